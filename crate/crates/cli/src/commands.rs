use std::fs;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::Serialize;

use tssp_core::experiments::{
    reference_cache_path, reference_solution_cached, spatial_sweep, temporal_sweep, Axis, InitialData, OrderFit,
    StudyConfig, SweepResult,
};
use tssp_core::observables::{
    embedding_ratio, energy, gagliardo_nirenberg_ratio, mass, write_observables_csv, ObservableRecord,
};
use tssp_core::propagators::{evolve, Observer, SimulationState};
use tssp_core::selftest::{run_selftest, SelftestOptions};
use tssp_core::spectral::checkpoint::{read_checkpoint, to_json, write_checkpoint, Field, StateHeader};
use tssp_core::spectral::{dst_analyze, dst_synthesize, NodalField};

use crate::config::{ConfigError, Format, InitialSpec, RunConfig, SlopeBounds};
use crate::svg::{loglog_plot, Series};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
pub const OUT_DIR_ENV: &str = "TSSP_OUT_DIR";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("assertion failed: {0}")]
    Assertion(String),
    #[error("runtime failure: {0}")]
    Runtime(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Assertion(_) => 3,
            CliError::Runtime(_) => 4,
        }
    }
}

impl From<ConfigError> for CliError {
    fn from(e: ConfigError) -> Self {
        CliError::Config(e.to_string())
    }
}

impl From<tssp_core::Error> for CliError {
    fn from(e: tssp_core::Error) -> Self {
        match e {
            tssp_core::Error::Config(m) => CliError::Config(m),
            other => CliError::Runtime(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Runtime(e.to_string())
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Options shared by every command.
#[derive(Clone, Debug, Default)]
pub struct Globals {
    pub config: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub seed: Option<u64>,
    pub paper_scale: bool,
    pub svg: bool,
}

impl Globals {
    fn load(&self) -> CliResult<(RunConfig, PathBuf)> {
        let path = self
            .config
            .as_ref()
            .ok_or_else(|| CliError::Config("--config PATH is required".into()))?;
        let cfg = RunConfig::load(path)?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok((cfg, base))
    }

    /// `--out`, then the environment override, then the config file.
    fn out_dir(&self, cfg: Option<&RunConfig>) -> CliResult<PathBuf> {
        let dir = self
            .out
            .clone()
            .or_else(|| std::env::var_os(OUT_DIR_ENV).map(PathBuf::from))
            .or_else(|| cfg.map(|c| c.io.output_dir.clone()))
            .unwrap_or_else(|| PathBuf::from("tssp-out"));
        fs::create_dir_all(&dir)?;
        Ok(dir)
    }
}

/// Trailing CSV comment identifying the producing config and version.
pub fn metadata_line(cfg_hash: &str) -> String {
    format!("# tssp {VERSION} config-sha256={cfg_hash}")
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> std::io::Result<()>) -> CliResult<()> {
    let mut w = BufWriter::new(fs::File::create(path)?);
    body(&mut w)?;
    w.flush()?;
    Ok(())
}

struct Recorder<'a> {
    every: u64,
    split: &'a tssp_core::propagators::SplitConfig,
    rows: Vec<ObservableRecord>,
}

impl Observer for Recorder<'_> {
    fn cadence(&self) -> u64 {
        self.every
    }

    fn observe(&mut self, s: &SimulationState) -> tssp_core::Result<()> {
        self.rows.push(ObservableRecord::measure(
            s.time,
            &s.field,
            &self.split.potential,
            &self.split.nonlinearity,
        )?);
        Ok(())
    }
}

struct Checkpointer {
    every: u64,
    dir: PathBuf,
    scheme_tag: u8,
}

impl Observer for Checkpointer {
    fn cadence(&self) -> u64 {
        self.every
    }

    fn observe(&mut self, s: &SimulationState) -> tssp_core::Result<()> {
        if s.step_index == 0 {
            return Ok(());
        }
        let path = self.dir.join(format!("checkpoint-{:08}.bin", s.step_index));
        let mut w = BufWriter::new(fs::File::create(path)?);
        let header = StateHeader {
            step_index: s.step_index,
            time: s.time,
            scheme_tag: self.scheme_tag,
        };
        write_checkpoint(&mut w, &Field::Nodal(s.field.clone()), Some(header))?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct SimulateSummary {
    version: &'static str,
    config_sha256: String,
    scheme: &'static str,
    n: usize,
    tau: f64,
    steps: u64,
    t_final: f64,
    initial_mass: f64,
    initial_energy: f64,
    final_mass: f64,
    final_energy: f64,
    wall_time_s: f64,
}

pub fn simulate(g: &Globals) -> CliResult<()> {
    let (cfg, base) = g.load()?;
    let out = g.out_dir(Some(&cfg))?;
    let split = cfg.split_config(&base)?;
    let init = cfg.initial_data(g.seed).sample(split.grid())?;
    let s0 = SimulationState::initial(init);
    let hash = cfg.hash();
    let start = Instant::now();
    let mut rec = Recorder {
        every: cfg.horizon.observe_every,
        split: &split,
        rows: Vec::new(),
    };
    let mut ck = Checkpointer {
        every: cfg.io.checkpoint_every,
        dir: out.clone(),
        scheme_tag: split.scheme.tag(),
    };
    let final_state = if cfg.io.checkpoint_every > 0 && cfg.io.formats.contains(&Format::Binary) {
        evolve(&s0, &split, cfg.steps(), &mut [&mut rec, &mut ck])?
    } else {
        evolve(&s0, &split, cfg.steps(), &mut [&mut rec])?
    };
    let wall = start.elapsed().as_secs_f64();

    if cfg.io.formats.contains(&Format::Csv) {
        write_file(&out.join("observables.csv"), |w| {
            write_observables_csv(&mut *w, &rec.rows)?;
            writeln!(w, "{}", metadata_line(&hash))
        })?;
    }
    let final_field = Field::Nodal(final_state.field.clone());
    if cfg.io.formats.contains(&Format::Binary) {
        let header = StateHeader {
            step_index: final_state.step_index,
            time: final_state.time,
            scheme_tag: split.scheme.tag(),
        };
        let mut w = BufWriter::new(fs::File::create(out.join("final.bin"))?);
        write_checkpoint(&mut w, &final_field, Some(header))?;
        w.flush()?;
    }
    if cfg.io.formats.contains(&Format::Json) {
        fs::write(out.join("final.json"), to_json(&final_field)?)?;
    }
    let first = rec.rows.first().copied();
    let last = rec.rows.last().copied();
    let summary = SimulateSummary {
        version: VERSION,
        config_sha256: hash,
        scheme: split.scheme.name(),
        n: cfg.discretization.n,
        tau: cfg.discretization.tau,
        steps: final_state.step_index,
        t_final: final_state.time,
        initial_mass: first.map_or(f64::NAN, |r| r.mass),
        initial_energy: first.map_or(f64::NAN, |r| r.energy),
        final_mass: last.map_or(f64::NAN, |r| r.mass),
        final_energy: last.map_or(f64::NAN, |r| r.energy),
        wall_time_s: wall,
    };
    let text = serde_json::to_string_pretty(&summary).map_err(|e| CliError::Runtime(e.to_string()))?;
    fs::write(out.join("summary.json"), &text)?;
    println!("{text}");
    Ok(())
}

fn inits(cfg: &RunConfig, seed: Option<u64>) -> Vec<(String, InitialData)> {
    match cfg.problem.initial {
        InitialSpec::Type2(_) if seed.is_none() && !cfg.study.seeds.is_empty() => cfg
            .study
            .seeds
            .iter()
            .map(|&s| (format!("-seed{s}"), cfg.initial_data(Some(s))))
            .collect(),
        _ => vec![(String::new(), cfg.initial_data(seed))],
    }
}

fn describe(f: &OrderFit) -> String {
    if f.degenerate {
        "degenerate fit".into()
    } else {
        format!("{:.4}", f.slope)
    }
}

/// Checks each configured bound against the smallest slope over `runs`.
pub fn check_slopes(runs: &[SweepResult], bounds: &SlopeBounds) -> Vec<String> {
    let mut failures = Vec::new();
    let norms: [(&str, Option<f64>, fn(&SweepResult) -> &OrderFit); 3] = [
        ("L2", bounds.l2, |r| &r.l2),
        ("H1", bounds.h1, |r| &r.h1),
        ("linf", bounds.linf, |r| &r.linf),
    ];
    let any_bound = norms.iter().any(|(_, b, _)| b.is_some());
    for (name, bound, get) in norms {
        let asserted = bound.is_some() || (!any_bound && name == "L2");
        if !asserted {
            continue;
        }
        if runs.iter().any(|r| get(r).degenerate) {
            failures.push(format!("{name}: degenerate fit (errors at rounding level, no order measurable)"));
            continue;
        }
        if let Some(b) = bound {
            let min = runs.iter().map(|r| get(r).slope).fold(f64::INFINITY, f64::min);
            if min < b {
                failures.push(format!("{name}: slope {min:.4} below required {b}"));
            }
        }
    }
    failures
}

fn sweep_svg(axis: Axis, runs: &[(String, SweepResult)], guides: &[f64]) -> String {
    let mut series = Vec::new();
    for (tag, r) in runs {
        let x: Vec<f64> = r.rows.iter().map(|row| row.resolution).collect();
        for (name, y) in [
            ("L2", r.rows.iter().map(|row| row.errors.l2).collect::<Vec<_>>()),
            ("H1", r.rows.iter().map(|row| row.errors.h1).collect()),
            ("linf", r.rows.iter().map(|row| row.errors.linf).collect()),
        ] {
            series.push(Series {
                label: format!("{name}{tag}"),
                x: x.clone(),
                y,
            });
        }
    }
    let (title, xlabel) = match axis {
        Axis::Time => ("temporal error at T", "tau"),
        Axis::Space => ("spatial error at T", "h"),
    };
    loglog_plot(title, xlabel, &series, guides)
}

#[derive(Serialize)]
struct ConvergeSummary<'a> {
    version: &'static str,
    config_sha256: &'a str,
    axis: Axis,
    study: &'a StudyConfig,
    runs: Vec<(&'a str, &'a SweepResult)>,
    failures: &'a [String],
}

pub fn converge(g: &Globals, axis: Axis) -> CliResult<()> {
    let (cfg, _) = g.load()?;
    let out = g.out_dir(Some(&cfg))?;
    let study = cfg.study_config(g.paper_scale);
    study.validate()?;
    let hash = cfg.hash();
    let axis_name = match axis {
        Axis::Time => "time",
        Axis::Space => "space",
    };
    let mut runs = Vec::new();
    for (tag, init) in inits(&cfg, g.seed) {
        let reference = reference_solution_cached(&study, &init, &out.join("cache"))?;
        let result = match axis {
            Axis::Time => temporal_sweep(&study, &init, &reference)?,
            Axis::Space => spatial_sweep(&study, &init, &reference)?,
        };
        write_file(&out.join(format!("sweep-{axis_name}{tag}.csv")), |w| {
            result.write_csv(&mut *w)?;
            writeln!(w, "{}", metadata_line(&hash))
        })?;
        println!(
            "{axis_name}{tag}: slopes L2 {} H1 {} linf {}",
            describe(&result.l2),
            describe(&result.h1),
            describe(&result.linf)
        );
        runs.push((tag, result));
    }
    let bounds = match axis {
        Axis::Time => &cfg.study.expect_time,
        Axis::Space => &cfg.study.expect_space,
    };
    if g.svg {
        let mut guides: Vec<f64> = [bounds.l2, bounds.h1, bounds.linf].into_iter().flatten().collect();
        if guides.is_empty() {
            guides = vec![1.0, 2.0];
        }
        guides.dedup();
        fs::write(out.join(format!("sweep-{axis_name}.svg")), sweep_svg(axis, &runs, &guides))?;
    }
    let results: Vec<SweepResult> = runs.iter().map(|(_, r)| r.clone()).collect();
    let failures = check_slopes(&results, bounds);
    let summary = ConvergeSummary {
        version: VERSION,
        config_sha256: &hash,
        axis,
        study: &study,
        runs: runs.iter().map(|(t, r)| (t.as_str(), r)).collect(),
        failures: &failures,
    };
    fs::write(
        out.join(format!("converge-{axis_name}.json")),
        serde_json::to_string_pretty(&summary).map_err(|e| CliError::Runtime(e.to_string()))?,
    )?;
    if failures.is_empty() {
        Ok(())
    } else {
        Err(CliError::Assertion(failures.join("; ")))
    }
}

#[derive(Serialize)]
struct Snapshot {
    record: ObservableRecord,
    gagliardo_nirenberg_ratio: f64,
    embedding_ratio: f64,
}

/// Observables of the configured initial datum or of a checkpoint file.
pub fn observables(g: &Globals, checkpoint: Option<&Path>) -> CliResult<()> {
    let (cfg, base) = g.load()?;
    let (field, time): (NodalField, f64) = match checkpoint {
        Some(p) => {
            let (f, state) = read_checkpoint(std::io::BufReader::new(fs::File::open(p)?))?;
            let v = match f {
                Field::Nodal(v) => v,
                Field::Spectral(c) => dst_synthesize(&c),
            };
            (v, state.map_or(0.0, |s| s.time))
        }
        None => (cfg.initial_data(g.seed).sample(&cfg.grid())?, 0.0),
    };
    let pot = cfg.potential(*field.grid(), &base)?;
    let nl = cfg.nonlinearity();
    let record = ObservableRecord::measure(time, &field, &pot, &nl)?;
    debug_assert_eq!(record.mass, mass(&field));
    debug_assert_eq!(record.energy, energy(&field, &pot, &nl)?);
    let c = dst_analyze(&field);
    let snap = Snapshot {
        record,
        gagliardo_nirenberg_ratio: gagliardo_nirenberg_ratio(&c),
        embedding_ratio: embedding_ratio(&c),
    };
    let out = g.out_dir(Some(&cfg))?;
    write_file(&out.join("observables-snapshot.csv"), |w| {
        write_observables_csv(&mut *w, &[record])?;
        writeln!(w, "{}", metadata_line(&cfg.hash()))
    })?;
    println!(
        "{}",
        serde_json::to_string_pretty(&snap).map_err(|e| CliError::Runtime(e.to_string()))?
    );
    Ok(())
}

/// Parses the `J:FACTOR` fault-injection argument.
pub fn parse_corruption(s: &str) -> CliResult<(usize, f64)> {
    let bad = || CliError::Config(format!("expected J:FACTOR, got '{s}'"));
    let (j, f) = s.split_once(':').ok_or_else(bad)?;
    let j: usize = j.trim().parse().map_err(|_| bad())?;
    let f: f64 = f.trim().parse().map_err(|_| bad())?;
    if j > 3 {
        return Err(CliError::Config(format!("coefficient index must be 0..3, got {j}")));
    }
    Ok((j, f))
}

pub fn selftest(g: &Globals, corrupt_q: Option<(usize, f64)>) -> CliResult<()> {
    let report = run_selftest(SelftestOptions {
        seed: g.seed.unwrap_or(0),
        corrupt_q,
    });
    print!("{}", report.render());
    let failures = report.failures();
    if failures.is_empty() {
        println!("\nselftest passed ({} checks)", report.checks.len());
        Ok(())
    } else {
        let names: Vec<&str> = failures.iter().map(|c| c.name.as_str()).collect();
        Err(CliError::Assertion(format!(
            "{} failing checks: {}",
            names.len(),
            names.join(", ")
        )))
    }
}

pub fn reference(g: &Globals, build: bool) -> CliResult<()> {
    let (cfg, _) = g.load()?;
    let out = g.out_dir(Some(&cfg))?;
    let study = cfg.study_config(g.paper_scale);
    study.validate()?;
    let cache = out.join("cache");
    for (tag, init) in inits(&cfg, g.seed) {
        let path = reference_cache_path(&cache, &study, &init);
        if build {
            let start = Instant::now();
            reference_solution_cached(&study, &init, &cache)?;
            println!("reference{tag}: {} ({:.1} s)", path.display(), start.elapsed().as_secs_f64());
        } else {
            let state = if path.exists() { "cached" } else { "missing" };
            println!("reference{tag}: {} [{state}]", path.display());
        }
    }
    Ok(())
}
