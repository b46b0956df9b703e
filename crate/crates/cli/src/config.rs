//! TOML run configuration.

use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use tssp_core::experiments::{integral_steps, InitialData, ReferenceSpec, StudyConfig};
use tssp_core::nonlinearity::SemiSmoothNonlinearity;
use tssp_core::propagators::{Potential, Scheme, SplitConfig};
use tssp_core::spectral::Grid1D;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Read {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("{field}: {message}")]
    Invalid { field: String, message: String },
}

fn invalid(field: &str, message: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        field: field.into(),
        message: message.into(),
    }
}

/// `zero`, `harmonic(ω)` or `samples(path)`.
#[derive(Clone, Debug, PartialEq)]
pub enum PotentialSpec {
    Zero,
    Harmonic(f64),
    Samples(PathBuf),
}

/// `type1`, `type2(seed)` or `mode(l)`.
#[derive(Clone, Debug, PartialEq)]
pub enum InitialSpec {
    Type1,
    Type2(u64),
    Mode(usize),
}

fn call_arg<'a>(s: &'a str, name: &str) -> Option<&'a str> {
    s.strip_prefix(name)?.strip_prefix('(')?.strip_suffix(')').map(str::trim)
}

impl FromStr for PotentialSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "zero" {
            return Ok(PotentialSpec::Zero);
        }
        if let Some(arg) = call_arg(s, "harmonic") {
            let w: f64 = arg.parse().map_err(|_| format!("bad frequency in '{s}'"))?;
            if !w.is_finite() {
                return Err(format!("frequency must be finite in '{s}'"));
            }
            return Ok(PotentialSpec::Harmonic(w));
        }
        if let Some(arg) = call_arg(s, "samples") {
            return Ok(PotentialSpec::Samples(PathBuf::from(arg)));
        }
        Err(format!("unknown potential '{s}' (expected zero, harmonic(w) or samples(file))"))
    }
}

impl fmt::Display for PotentialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            PotentialSpec::Zero => write!(f, "zero"),
            PotentialSpec::Harmonic(w) => write!(f, "harmonic({w:?})"),
            PotentialSpec::Samples(p) => write!(f, "samples({})", p.display()),
        }
    }
}

impl FromStr for InitialSpec {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        let s = s.trim();
        if s == "type1" {
            return Ok(InitialSpec::Type1);
        }
        if let Some(arg) = call_arg(s, "type2") {
            return arg.parse().map(InitialSpec::Type2).map_err(|_| format!("bad seed in '{s}'"));
        }
        if let Some(arg) = call_arg(s, "mode") {
            return match arg.parse() {
                Ok(l) if l >= 1 => Ok(InitialSpec::Mode(l)),
                _ => Err(format!("bad mode index in '{s}'")),
            };
        }
        Err(format!("unknown initial data '{s}' (expected type1, type2(seed) or mode(l))"))
    }
}

impl fmt::Display for InitialSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            InitialSpec::Type1 => write!(f, "type1"),
            InitialSpec::Type2(seed) => write!(f, "type2({seed})"),
            InitialSpec::Mode(l) => write!(f, "mode({l})"),
        }
    }
}

macro_rules! string_serde {
    ($t:ty) => {
        impl Serialize for $t {
            fn serialize<S: serde::Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
                s.collect_str(self)
            }
        }

        impl<'de> Deserialize<'de> for $t {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> Result<Self, D::Error> {
                let s = String::deserialize(d)?;
                s.parse().map_err(serde::de::Error::custom)
            }
        }
    };
}

string_serde!(PotentialSpec);
string_serde!(InitialSpec);

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Problem {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub beta: f64,
    #[serde(default = "default_potential")]
    pub potential: PotentialSpec,
    #[serde(default = "default_initial")]
    pub initial: InitialSpec,
}

fn default_potential() -> PotentialSpec {
    PotentialSpec::Zero
}

fn default_initial() -> InitialSpec {
    InitialSpec::Type1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Discretization {
    pub n: usize,
    pub tau: f64,
    #[serde(default = "default_scheme")]
    pub scheme: Scheme,
}

fn default_scheme() -> Scheme {
    Scheme::LieKineticLast
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Horizon {
    pub t_final: f64,
    /// Observables are recorded every this many steps.
    #[serde(default = "one")]
    pub observe_every: u64,
}

fn one() -> u64 {
    1
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Binary,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Io {
    #[serde(default = "default_out")]
    pub output_dir: PathBuf,
    /// Intermediate checkpoints every this many steps; 0 writes only the final state.
    #[serde(default)]
    pub checkpoint_every: u64,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
}

fn default_out() -> PathBuf {
    PathBuf::from("tssp-out")
}

fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json, Format::Binary]
}

impl Default for Io {
    fn default() -> Self {
        Io {
            output_dir: default_out(),
            checkpoint_every: 0,
            formats: default_formats(),
        }
    }
}

/// Lower bounds on fitted slopes; unset entries are not asserted.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SlopeBounds {
    pub l2: Option<f64>,
    pub h1: Option<f64>,
    pub linf: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Study {
    #[serde(default = "default_taus")]
    pub tau_list: Vec<f64>,
    #[serde(default = "default_ns")]
    pub n_list: Vec<usize>,
    #[serde(default = "default_ref_n")]
    pub reference_n: usize,
    #[serde(default = "default_ref_tau")]
    pub reference_tau: f64,
    pub spatial_tau: Option<f64>,
    /// Type II seeds swept; the smallest slope over seeds is asserted.
    #[serde(default)]
    pub seeds: Vec<u64>,
    #[serde(default)]
    pub expect_time: SlopeBounds,
    #[serde(default)]
    pub expect_space: SlopeBounds,
}

fn default_taus() -> Vec<f64> {
    StudyConfig::new(0.0, 1.0, 1.0).tau_list
}

fn default_ns() -> Vec<usize> {
    StudyConfig::new(0.0, 1.0, 1.0).n_list
}

fn default_ref_n() -> usize {
    ReferenceSpec::DESK.n
}

fn default_ref_tau() -> f64 {
    ReferenceSpec::DESK.tau
}

impl Default for Study {
    fn default() -> Self {
        Study {
            tau_list: default_taus(),
            n_list: default_ns(),
            reference_n: default_ref_n(),
            reference_tau: default_ref_tau(),
            spatial_tau: None,
            seeds: Vec::new(),
            expect_time: SlopeBounds::default(),
            expect_space: SlopeBounds::default(),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub problem: Problem,
    pub discretization: Discretization,
    pub horizon: Horizon,
    #[serde(default)]
    pub io: Io,
    #[serde(default)]
    pub study: Study,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let cfg: RunConfig = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
            path: path.to_path_buf(),
            source,
        })?;
        Self::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Hex SHA-256 of the canonical serialization.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        let p = &self.problem;
        if !(p.a.is_finite() && p.b.is_finite() && p.b > p.a) {
            return Err(invalid("problem.b", format!("need finite a < b, got ({}, {})", p.a, p.b)));
        }
        if !(p.sigma > 0.0 && p.sigma.is_finite()) {
            return Err(invalid("problem.sigma", format!("must be positive, got {}", p.sigma)));
        }
        if !p.beta.is_finite() {
            return Err(invalid("problem.beta", "must be finite"));
        }
        let d = &self.discretization;
        if d.n < 2 {
            return Err(invalid("discretization.n", format!("must be at least 2, got {}", d.n)));
        }
        if !(self.horizon.t_final > 0.0 && self.horizon.t_final.is_finite()) {
            return Err(invalid("horizon.t_final", "must be positive"));
        }
        integral_steps(self.horizon.t_final, d.tau, "discretization.tau")
            .map_err(|e| invalid("discretization.tau", e.to_string()))?;
        if self.horizon.observe_every == 0 {
            return Err(invalid("horizon.observe_every", "must be at least 1"));
        }
        if self.study.reference_n < 2 {
            return Err(invalid("study.reference_n", "must be at least 2"));
        }
        Ok(())
    }

    pub fn grid(&self) -> Grid1D {
        Grid1D::new(self.problem.a, self.problem.b, self.discretization.n).expect("validated")
    }

    pub fn nonlinearity(&self) -> SemiSmoothNonlinearity {
        SemiSmoothNonlinearity::new(self.problem.beta, self.problem.sigma).expect("validated")
    }

    pub fn steps(&self) -> u64 {
        integral_steps(self.horizon.t_final, self.discretization.tau, "discretization.tau").expect("validated")
    }

    /// Potential sampled on `grid`. Sample files hold one value per node,
    /// whitespace or comma separated; `#` starts a comment.
    pub fn potential(&self, grid: Grid1D, base_dir: &Path) -> Result<Potential, ConfigError> {
        match &self.problem.potential {
            PotentialSpec::Zero => Ok(Potential::zero(grid)),
            PotentialSpec::Harmonic(w) => Ok(Potential::harmonic(grid, *w)),
            PotentialSpec::Samples(p) => {
                let path = base_dir.join(p);
                let text = std::fs::read_to_string(&path).map_err(|source| ConfigError::Read {
                    path: path.clone(),
                    source,
                })?;
                let values = text
                    .lines()
                    .map(|l| l.split('#').next().unwrap_or(""))
                    .flat_map(|l| l.split(|c: char| c == ',' || c.is_whitespace()))
                    .filter(|t| !t.is_empty())
                    .map(|t| t.parse::<f64>())
                    .collect::<Result<Vec<_>, _>>()
                    .map_err(|e| invalid("problem.potential", format!("{}: {e}", path.display())))?;
                Potential::from_samples(grid, values).map_err(|e| invalid("problem.potential", e.to_string()))
            }
        }
    }

    pub fn split_config(&self, base_dir: &Path) -> Result<SplitConfig, ConfigError> {
        let pot = self.potential(self.grid(), base_dir)?;
        SplitConfig::new(self.discretization.scheme, self.discretization.tau, self.nonlinearity(), pot)
            .map_err(|e| invalid("discretization.tau", e.to_string()))
    }

    /// Type II data are drawn on the reference grid so every resolution
    /// samples the same function.
    pub fn initial_data(&self, seed_override: Option<u64>) -> InitialData {
        match self.problem.initial {
            InitialSpec::Type1 => InitialData::TypeI,
            InitialSpec::Type2(seed) => InitialData::type2(seed_override.unwrap_or(seed), self.study.reference_n),
            InitialSpec::Mode(l) => InitialData::Mode { l, amplitude: 1.0 },
        }
    }

    pub fn study_config(&self, paper_scale: bool) -> StudyConfig {
        let mut s = StudyConfig::new(self.problem.a, self.problem.b, self.problem.sigma);
        s.beta = self.problem.beta;
        s.t_final = self.horizon.t_final;
        s.scheme = self.discretization.scheme;
        s.tau_list = self.study.tau_list.clone();
        s.n_list = self.study.n_list.clone();
        s.reference = ReferenceSpec {
            n: self.study.reference_n,
            tau: self.study.reference_tau,
        };
        s.spatial_tau = self.study.spatial_tau;
        if paper_scale {
            s = s.with_paper_scale();
        }
        s
    }
}
