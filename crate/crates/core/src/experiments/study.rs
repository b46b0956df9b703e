use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::fit::{fit_order, OrderFit};
use super::initial::InitialData;
use crate::error::{Error, Result};
use crate::nonlinearity::SemiSmoothNonlinearity;
use crate::observables::{energy, error_norms, ErrorNorms};
use crate::propagators::{evolve, Observer, Potential, Scheme, SimulationState, SplitConfig, Stepper};
use crate::spectral::checkpoint::{read_checkpoint, write_checkpoint, Field};
use crate::spectral::{dst_analyze, dst_synthesize, lp_norm_nodal, Grid1D, LpExponent, NodalField, SpectralField};

/// Fine grid and step of the Strang reference solve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSpec {
    pub n: usize,
    pub tau: f64,
}

impl ReferenceSpec {
    pub const DESK: ReferenceSpec = ReferenceSpec { n: 4096, tau: 1e-5 };

    /// `h = 2^-9`, `τ = 1e-6` on `(a, b)`.
    pub fn paper_scale(a: f64, b: f64) -> Self {
        ReferenceSpec {
            n: ((b - a) * 512.0).round() as usize,
            tau: 1e-6,
        }
    }

    /// Twice the modes, half the step.
    pub fn refined(self) -> Self {
        ReferenceSpec {
            n: 2 * self.n,
            tau: 0.5 * self.tau,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StudyConfig {
    pub a: f64,
    pub b: f64,
    pub sigma: f64,
    pub beta: f64,
    pub t_final: f64,
    /// Scheme under study; the reference always uses Strang.
    pub scheme: Scheme,
    pub tau_list: Vec<f64>,
    pub n_list: Vec<usize>,
    pub reference: ReferenceSpec,
    /// Step used by spatial sweeps; `None` means the reference step.
    #[serde(default)]
    pub spatial_tau: Option<f64>,
}

impl StudyConfig {
    /// Defaults for a study on `(a, b)`: `T = 1`, `β = -1`, TSSP,
    /// `τ = 0.1·2^-k` for `k = 0..6`, `N = 64..512`, desk reference.
    pub fn new(a: f64, b: f64, sigma: f64) -> Self {
        StudyConfig {
            a,
            b,
            sigma,
            beta: -1.0,
            t_final: 1.0,
            scheme: Scheme::LieKineticLast,
            tau_list: (0..7).map(|k| 0.1 * 0.5f64.powi(k)).collect(),
            n_list: vec![64, 128, 256, 512],
            reference: ReferenceSpec::DESK,
            spatial_tau: None,
        }
    }

    /// Smooth data study on `(-16, 16)`.
    pub fn type1(sigma: f64) -> Self {
        Self::new(-16.0, 16.0, sigma)
    }

    /// Random data study on `(-1, 1)`.
    pub fn type2(sigma: f64) -> Self {
        Self::new(-1.0, 1.0, sigma)
    }

    pub fn with_paper_scale(mut self) -> Self {
        self.reference = ReferenceSpec::paper_scale(self.a, self.b);
        self
    }

    pub fn nonlinearity(&self) -> Result<SemiSmoothNonlinearity> {
        SemiSmoothNonlinearity::new(self.beta, self.sigma)
    }

    pub fn grid(&self, n: usize) -> Result<Grid1D> {
        Grid1D::new(self.a, self.b, n)
    }

    pub fn reference_grid(&self) -> Result<Grid1D> {
        self.grid(self.reference.n)
    }

    pub fn spatial_tau(&self) -> f64 {
        self.spatial_tau.unwrap_or(self.reference.tau)
    }

    /// Checks the sweep lists are dyadic, strictly coarser than the
    /// reference, and divide the final time.
    pub fn validate(&self) -> Result<()> {
        self.nonlinearity()?;
        let rg = self.reference_grid()?;
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return Err(Error::Config(format!("t_final must be positive, got {}", self.t_final)));
        }
        integral_steps(self.t_final, self.reference.tau, "reference.tau")?;
        integral_steps(self.t_final, self.spatial_tau(), "spatial_tau")?;
        if self.spatial_tau() < self.reference.tau {
            return Err(Error::Config("spatial_tau is finer than reference.tau".into()));
        }
        for w in self.tau_list.windows(2) {
            if (w[0] / w[1] - 2.0).abs() > 1e-12 {
                return Err(Error::Config(format!("tau_list is not dyadic at {} -> {}", w[0], w[1])));
            }
        }
        for &tau in &self.tau_list {
            integral_steps(self.t_final, tau, "tau_list")?;
            if tau <= self.reference.tau {
                return Err(Error::Config(format!(
                    "tau_list entry {tau} is not coarser than reference.tau"
                )));
            }
        }
        for w in self.n_list.windows(2) {
            if w[1] != 2 * w[0] {
                return Err(Error::Config(format!("n_list is not dyadic at {} -> {}", w[0], w[1])));
            }
        }
        for &n in &self.n_list {
            let g = self.grid(n)?;
            if n >= rg.n() || g.refinement_ratio(&rg).is_none() {
                return Err(Error::Config(format!(
                    "n_list entry {n} is not a dyadic coarsening of reference N = {}",
                    rg.n()
                )));
            }
        }
        Ok(())
    }
}

/// `T / τ` as a step count; rejects non-integral ratios.
pub fn integral_steps(t_final: f64, tau: f64, field: &str) -> Result<u64> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(Error::Config(format!("{field}: time step must be positive, got {tau}")));
    }
    let ratio = t_final / tau;
    let n = ratio.round();
    if n < 1.0 || (ratio - n).abs() > 1e-9 * n {
        return Err(Error::Config(format!(
            "{field}: T / tau = {t_final} / {tau} is not a positive integer"
        )));
    }
    Ok(n as u64)
}

fn zero_potential_config(cfg: &StudyConfig, scheme: Scheme, n: usize, tau: f64) -> Result<SplitConfig> {
    SplitConfig::new(scheme, tau, cfg.nonlinearity()?, Potential::zero(cfg.grid(n)?))
}

/// Strang solution at `T` on the reference grid and step.
pub fn reference_solution(cfg: &StudyConfig, init: &InitialData) -> Result<SpectralField> {
    let spec = cfg.reference;
    let steps = integral_steps(cfg.t_final, spec.tau, "reference.tau")?;
    let split = zero_potential_config(cfg, Scheme::Strang, spec.n, spec.tau)?;
    let mut field = init.sample(split.grid())?;
    let mut stepper = Stepper::new(split);
    log::info!("reference solve: N = {}, tau = {}, {} steps", spec.n, spec.tau, steps);
    stepper.advance_strang_fused(field.interior_mut(), steps)?;
    Ok(dst_analyze(&field))
}

#[derive(Serialize)]
struct CacheKey<'a> {
    format: u32,
    a: f64,
    b: f64,
    sigma: f64,
    beta: f64,
    t_final: f64,
    reference: ReferenceSpec,
    init: &'a InitialData,
}

/// Hex SHA-256 of everything the reference solve depends on.
pub fn reference_key(cfg: &StudyConfig, init: &InitialData) -> String {
    let key = CacheKey {
        format: 1,
        a: cfg.a,
        b: cfg.b,
        sigma: cfg.sigma,
        beta: cfg.beta,
        t_final: cfg.t_final,
        reference: cfg.reference,
        init,
    };
    let text = serde_json::to_string(&key).expect("cache key serializes");
    hex::encode(Sha256::digest(text.as_bytes()))
}

pub fn reference_cache_path(dir: &Path, cfg: &StudyConfig, init: &InitialData) -> PathBuf {
    dir.join(format!("ref-{}.bin", reference_key(cfg, init)))
}

/// [`reference_solution`] through an on-disk cache in `dir`. Files are
/// written to a temporary name and renamed into place.
pub fn reference_solution_cached(cfg: &StudyConfig, init: &InitialData, dir: &Path) -> Result<SpectralField> {
    let path = reference_cache_path(dir, cfg, init);
    if path.exists() {
        let (field, _) = read_checkpoint(BufReader::new(fs::File::open(&path)?))?;
        match field {
            Field::Spectral(c) if c.grid() == &cfg.reference_grid()? => return Ok(c),
            _ => log::warn!("ignoring mismatched cache entry {}", path.display()),
        }
    }
    let c = reference_solution(cfg, init)?;
    fs::create_dir_all(dir)?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    {
        let mut w = BufWriter::new(fs::File::create(&tmp)?);
        write_checkpoint(&mut w, &Field::Spectral(c.clone()), None)?;
        w.flush()?;
    }
    fs::rename(&tmp, &path)?;
    Ok(c)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Time,
    Space,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub n: usize,
    pub tau: f64,
    /// `τ` for temporal sweeps, `h` for spatial ones.
    pub resolution: f64,
    pub errors: ErrorNorms,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SweepResult {
    pub axis: Axis,
    pub rows: Vec<SweepRow>,
    pub l2: OrderFit,
    pub h1: OrderFit,
    pub linf: OrderFit,
}

pub const SWEEP_HEADER: &str = "resolution,e_l2,e_h1,e_linf";

impl SweepResult {
    /// Rows followed by a `slope` footer row.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{SWEEP_HEADER}")?;
        for r in &self.rows {
            writeln!(w, "{:e},{:e},{:e},{:e}", r.resolution, r.errors.l2, r.errors.h1, r.errors.linf)?;
        }
        let s = |f: &OrderFit| if f.degenerate { "degenerate".to_string() } else { format!("{:.6}", f.slope) };
        writeln!(w, "slope,{},{},{}", s(&self.l2), s(&self.h1), s(&self.linf))
    }
}

fn run_to_final(cfg: &StudyConfig, init: &InitialData, n: usize, tau: f64) -> Result<NodalField> {
    let split = zero_potential_config(cfg, cfg.scheme, n, tau)?;
    let steps = integral_steps(cfg.t_final, tau, "tau")?;
    let s0 = SimulationState::initial(init.sample(split.grid())?);
    Ok(evolve(&s0, &split, steps, &mut [])?.field)
}

/// Rounding in the reference grows linearly with its step count, so the
/// degeneracy floor for norm `n` is taken as `n` times that count.
fn finish(cfg: &StudyConfig, axis: Axis, rows: Vec<SweepRow>, reference: &SpectralField) -> Result<SweepResult> {
    let res: Vec<f64> = rows.iter().map(|r| r.resolution).collect();
    let col = |f: fn(&ErrorNorms) -> f64| rows.iter().map(|r| f(&r.errors)).collect::<Vec<_>>();
    let amplification = integral_steps(cfg.t_final, cfg.reference.tau, "reference.tau")? as f64;
    let linf = lp_norm_nodal(&dst_synthesize(reference), LpExponent::Infinity);
    Ok(SweepResult {
        axis,
        l2: fit_order(&res, &col(|e| e.l2), amplification * reference.l2_norm())?,
        h1: fit_order(&res, &col(|e| e.h1), amplification * reference.h1_norm())?,
        linf: fit_order(&res, &col(|e| e.linf), amplification * linf)?,
        rows,
    })
}

/// Errors at `T` on the reference grid for every `τ` in `tau_list`.
pub fn temporal_sweep(cfg: &StudyConfig, init: &InitialData, reference: &SpectralField) -> Result<SweepResult> {
    cfg.validate()?;
    let n = cfg.reference.n;
    let rows = cfg
        .tau_list
        .par_iter()
        .map(|&tau| {
            let v = run_to_final(cfg, init, n, tau)?;
            Ok(SweepRow {
                n,
                tau,
                resolution: tau,
                errors: error_norms(&v, reference)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    finish(cfg, Axis::Time, rows, reference)
}

/// Errors at `T` with step `spatial_tau` for every `N` in `n_list`.
pub fn spatial_sweep(cfg: &StudyConfig, init: &InitialData, reference: &SpectralField) -> Result<SweepResult> {
    cfg.validate()?;
    let tau = cfg.spatial_tau();
    let rows = cfg
        .n_list
        .par_iter()
        .map(|&n| {
            let v = run_to_final(cfg, init, n, tau)?;
            Ok(SweepRow {
                n,
                tau,
                resolution: v.grid().h(),
                errors: error_norms(&v, reference)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    finish(cfg, Axis::Space, rows, reference)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergySeries {
    pub tau: f64,
    pub times: Vec<f64>,
    /// `|E(ψ^k) - E(ψ⁰)| / |E(ψ⁰)|`.
    pub relative: Vec<f64>,
    /// Relative error divided by `τ`.
    pub normalized: Vec<f64>,
    pub max_mass_drift: f64,
}

impl EnergySeries {
    pub fn sup_normalized(&self) -> f64 {
        self.normalized.iter().copied().fold(0.0, f64::max)
    }

    pub fn sup_relative(&self) -> f64 {
        self.relative.iter().copied().fold(0.0, f64::max)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EnergyDrift {
    pub n: usize,
    pub series: Vec<EnergySeries>,
}

pub const ENERGY_HEADER: &str = "tau,time,relative_energy_error,relative_energy_error_over_tau";

impl EnergyDrift {
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{ENERGY_HEADER}")?;
        for s in &self.series {
            for ((t, r), q) in s.times.iter().zip(&s.relative).zip(&s.normalized) {
                writeln!(w, "{:e},{:e},{:e},{:e}", s.tau, t, r, q)?;
            }
        }
        Ok(())
    }

    /// Largest over smallest sup of the `τ`-normalized curves.
    pub fn collapse_ratio(&self) -> f64 {
        let sups: Vec<f64> = self.series.iter().map(|s| s.sup_normalized()).collect();
        let hi = sups.iter().copied().fold(0.0, f64::max);
        let lo = sups.iter().copied().fold(f64::INFINITY, f64::min);
        hi / lo
    }
}

struct EnergyProbe<'a> {
    cadence: u64,
    potential: &'a Potential,
    nl: &'a SemiSmoothNonlinearity,
    e0: Option<f64>,
    m0: Option<f64>,
    tau: f64,
    out: EnergySeries,
}

impl Observer for EnergyProbe<'_> {
    fn cadence(&self) -> u64 {
        self.cadence
    }

    fn observe(&mut self, s: &SimulationState) -> Result<()> {
        let e = energy(&s.field, self.potential, self.nl)?;
        let m = crate::observables::mass(&s.field);
        let e0 = *self.e0.get_or_insert(e);
        let m0 = *self.m0.get_or_insert(m);
        let rel = if e0 == 0.0 { (e - e0).abs() } else { (e - e0).abs() / e0.abs() };
        self.out.times.push(s.time);
        self.out.relative.push(rel);
        self.out.normalized.push(rel / self.tau);
        let dm = if m0 == 0.0 { (m - m0).abs() } else { (m - m0).abs() / m0 };
        self.out.max_mass_drift = self.out.max_mass_drift.max(dm);
        Ok(())
    }
}

/// Energy error time series on the grid with `n` subintervals up to
/// `t_long`, sampled every `sample_dt` (a multiple of every `τ`).
pub fn energy_drift_study(
    cfg: &StudyConfig,
    init: &InitialData,
    n: usize,
    tau_list: &[f64],
    t_long: f64,
    sample_dt: f64,
) -> Result<EnergyDrift> {
    let series = tau_list
        .par_iter()
        .map(|&tau| {
            let split = zero_potential_config(cfg, cfg.scheme, n, tau)?;
            let steps = integral_steps(t_long, tau, "tau_list")?;
            let cadence = integral_steps(sample_dt, tau, "sample_dt")?;
            let s0 = SimulationState::initial(init.sample(split.grid())?);
            let mut probe = EnergyProbe {
                cadence,
                potential: &split.potential,
                nl: &split.nonlinearity,
                e0: None,
                m0: None,
                tau,
                out: EnergySeries {
                    tau,
                    times: Vec::new(),
                    relative: Vec::new(),
                    normalized: Vec::new(),
                    max_mass_drift: 0.0,
                },
            };
            evolve(&s0, &split, steps, &mut [&mut probe])?;
            Ok(probe.out)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(EnergyDrift { n, series })
}
