//! Hard-assertion checks of the discretization, run by `tssp selftest`.

use std::fmt::Write as _;

use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::experiments::{energy_drift_study, EnergyDrift, InitialData, StudyConfig};
use crate::nonlinearity::{certify, RegularizedNonlinearity, SemiSmoothNonlinearity};
use crate::observables::{embedding_ratio, gagliardo_nirenberg_ratio, norm_equivalence_check};
use crate::spectral::{Grid1D, NodalField, SineTransform, SpectralField};

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: impl Into<String>, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// A monitored quantity with no pass/fail threshold.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Diagnostic {
    pub name: String,
    pub value: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize)]
pub struct SelftestReport {
    pub checks: Vec<Check>,
    pub diagnostics: Vec<Diagnostic>,
}

impl SelftestReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<&Check> {
        self.checks.iter().filter(|c| !c.passed).collect()
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        let width = self.checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
        for c in &self.checks {
            let tag = if c.passed { "PASS" } else { "FAIL" };
            let _ = writeln!(s, "{tag}  {:width$}  {}", c.name, c.detail);
        }
        if !self.diagnostics.is_empty() {
            let _ = writeln!(s, "\nmonitored diagnostics (no threshold)");
            let width = self.diagnostics.iter().map(|d| d.name.len()).max().unwrap_or(0);
            for d in &self.diagnostics {
                let _ = writeln!(s, "  {:width$}  {:.6e}", d.name, d.value);
            }
        }
        s
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct SelftestOptions {
    pub seed: u64,
    /// Multiplies coefficient `j` of every `Q_ε` by the given factor.
    pub corrupt_q: Option<(usize, f64)>,
}

fn uniform(rng: &mut ChaCha20Rng) -> f64 {
    (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
}

fn random_values(rng: &mut ChaCha20Rng, k: usize) -> Vec<Complex64> {
    (0..k).map(|_| Complex64::new(uniform(rng), uniform(rng))).collect()
}

fn direct_analyze(interior: &[Complex64], n: usize) -> Vec<Complex64> {
    let w = std::f64::consts::PI / n as f64;
    (1..n)
        .map(|l| {
            interior
                .iter()
                .enumerate()
                .map(|(i, v)| v * ((i + 1) as f64 * l as f64 * w).sin())
                .sum::<Complex64>()
                * (2.0 / n as f64)
        })
        .collect()
}

fn max_abs(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Fast transform against the direct sum and the round trip, over
/// `count` random fields at each of `N = 8, 16, 32`.
pub fn transform_check(seed: u64, count: usize) -> Check {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut worst_oracle: f64 = 0.0;
    let mut worst_trip: f64 = 0.0;
    for n in [8usize, 16, 32] {
        let mut t = SineTransform::new(n);
        let mut coeffs = vec![Complex64::default(); n - 1];
        let mut back = vec![Complex64::default(); n - 1];
        for _ in 0..count {
            let v = random_values(&mut rng, n - 1);
            t.analyze_interior(&v, &mut coeffs);
            let oracle = direct_analyze(&v, n);
            let diff: Vec<_> = coeffs.iter().zip(&oracle).map(|(a, b)| a - b).collect();
            worst_oracle = worst_oracle.max(max_abs(&diff) / max_abs(&oracle));
            t.synthesize_interior(&coeffs, &mut back);
            let diff: Vec<_> = back.iter().zip(&v).map(|(a, b)| a - b).collect();
            worst_trip = worst_trip.max(max_abs(&diff) / max_abs(&v));
        }
    }
    Check::new(
        "transform",
        worst_oracle <= 1e-12 && worst_trip <= 1e-12,
        format!(
            "{} fields per N in {{8,16,32}}; max rel dev from direct sum {worst_oracle:.2e}, round trip {worst_trip:.2e} (tol 1e-12)",
            count
        ),
    )
}

/// Energy and mass behaviour for `σ = 0.1`, `β = -10`, Type I data on
/// `(-16, 16)` with `N = 512` up to `T = 8`.
pub struct ConservationOutcome {
    pub drift: EnergyDrift,
    /// Sup raw relative energy error at `τ = 0.01` over that at `τ = 0.005`.
    pub halving_ratio: f64,
    pub max_mass_drift: f64,
}

pub const CONSERVATION_TAUS: [f64; 3] = [0.05, 0.01, 0.002];

pub fn conservation_study() -> crate::Result<ConservationOutcome> {
    let mut cfg = StudyConfig::type1(0.1);
    cfg.beta = -10.0;
    let drift = energy_drift_study(&cfg, &InitialData::TypeI, 512, &CONSERVATION_TAUS, 8.0, 0.05)?;
    let half = energy_drift_study(&cfg, &InitialData::TypeI, 512, &[0.005], 8.0, 0.05)?;
    let coarse = drift.series.iter().find(|s| s.tau == 0.01).expect("tau 0.01 present");
    let halving_ratio = coarse.sup_relative() / half.series[0].sup_relative();
    let max_mass_drift = drift
        .series
        .iter()
        .chain(&half.series)
        .map(|s| s.max_mass_drift)
        .fold(0.0, f64::max);
    Ok(ConservationOutcome {
        drift,
        halving_ratio,
        max_mass_drift,
    })
}

pub fn conservation_checks() -> (Vec<Check>, Vec<Diagnostic>) {
    let out = match conservation_study() {
        Ok(o) => o,
        Err(e) => return (vec![Check::new("conservation", false, e.to_string())], vec![]),
    };
    let sups: Vec<String> = out
        .drift
        .series
        .iter()
        .map(|s| format!("{:.3}", s.sup_normalized()))
        .collect();
    let collapse = out.drift.collapse_ratio();
    let checks = vec![
        Check::new(
            "mass drift",
            out.max_mass_drift <= 1e-10,
            format!("max relative drift {:.2e} (tol 1e-10)", out.max_mass_drift),
        ),
        Check::new(
            "energy O(tau) collapse",
            collapse <= 2.0,
            format!("sup |dE|/(|E0| tau) = [{}], spread {collapse:.3} (tol 2)", sups.join(", ")),
        ),
        Check::new(
            "energy halving ratio",
            (out.halving_ratio - 2.0).abs() <= 0.5,
            format!("err(0.01)/err(0.005) = {:.3} (want 2 +- 0.5)", out.halving_ratio),
        ),
    ];
    (checks, vec![])
}

pub const CERT_SIGMAS: [f64; 3] = [0.1, 0.25, 0.4];
pub const CERT_EPS: [f64; 3] = [1e-1, 1e-2, 1e-3];

pub fn regularization_checks(corrupt_q: Option<(usize, f64)>) -> (Vec<Check>, Vec<Diagnostic>) {
    let mut checks = Vec::new();
    let mut c2: f64 = 0.0;
    let mut c3: f64 = 0.0;
    let mut growth: f64 = 0.0;
    for &sigma in &CERT_SIGMAS {
        for &eps in &CERT_EPS {
            let base = SemiSmoothNonlinearity::new(-1.0, sigma).expect("valid parameters");
            let mut r = RegularizedNonlinearity::new(base, eps).expect("valid eps");
            if let Some((j, factor)) = corrupt_q {
                let mut q = r.q_coefficients();
                if let Some(c) = q.get_mut(j) {
                    *c *= factor;
                }
                r = RegularizedNonlinearity::with_coefficients(base, eps, q).expect("valid eps");
            }
            let cert = certify(&r);
            let tag = format!("sigma={sigma} eps={eps:e}");
            checks.push(Check::new(
                format!("f = f_eps above junction [{tag}]"),
                cert.exact_above_junction,
                "bitwise equality for rho >= eps^2",
            ));
            checks.push(Check::new(
                format!("approximation bound [{tag}]"),
                cert.approximation_ratio <= 1.0,
                format!("max |f - f_eps| / (|beta|(1+S) eps^2sigma) = {:.3e}", cert.approximation_ratio),
            ));
            let worst = cert.junction_mismatch.iter().copied().fold(0.0, f64::max);
            let which = cert
                .junction_mismatch
                .iter()
                .enumerate()
                .filter(|(_, m)| **m > crate::nonlinearity::JUNCTION_TOLERANCE)
                .map(|(k, _)| k.to_string())
                .collect::<Vec<_>>();
            checks.push(Check::new(
                format!("C3 junction [{tag}]"),
                cert.junction_passes(),
                if which.is_empty() {
                    format!("max rel mismatch {worst:.2e} (tol 1e-8)")
                } else {
                    format!("derivative orders {} mismatch, max {worst:.2e} (tol 1e-8)", which.join(","))
                },
            ));
            c2 = c2.max(cert.c2_ratio);
            c3 = c3.max(cert.c3_ratio);
            growth = growth.max(cert.growth_ratio);
        }
    }
    let diags = vec![
        Diagnostic {
            name: "growth ratio |f_eps| / (|beta| max(1,S) rho^sigma)".into(),
            value: growth,
        },
        Diagnostic {
            name: "first/second derivative bound ratio".into(),
            value: c2,
        },
        Diagnostic {
            name: "eps^(2-2sigma) (|f'| + rho|f''| + rho^2|f'''|)".into(),
            value: c3,
        },
    ];
    (checks, diags)
}

pub fn norm_equivalence_sweep(seed: u64, per_n: usize) -> (Check, Vec<Diagnostic>) {
    let mut rng = ChaCha20Rng::seed_from_u64(seed ^ 0x5eed);
    let mut passed = 0usize;
    let mut total = 0usize;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    let mut gn: f64 = 0.0;
    let mut emb: f64 = 0.0;
    for n in [8usize, 16, 32, 64] {
        let g = Grid1D::new(-1.0, 1.0, n).expect("valid grid");
        for _ in 0..per_n {
            let phi = SpectralField::new(g, random_values(&mut rng, n - 1)).expect("sizes match");
            let r = norm_equivalence_check(&phi);
            total += 1;
            passed += r.pass as usize;
            lo = lo.min(r.mid / r.lhs);
            hi = hi.max(r.mid / r.lhs);
            gn = gn.max(gagliardo_nirenberg_ratio(&phi));
            emb = emb.max(embedding_ratio(&phi));
        }
    }
    let check = Check::new(
        "norm equivalence",
        passed == total,
        format!("{passed}/{total} fields; ||d I_N phi|| / ||D+ phi|| in [{lo:.4}, {hi:.4}] (bounds 1, pi/2)"),
    );
    let diags = vec![
        Diagnostic {
            name: "discrete Gagliardo-Nirenberg ratio".into(),
            value: gn,
        },
        Diagnostic {
            name: "l4 embedding ratio ||D+ phi||_l4 / ||phi||_H2".into(),
            value: emb,
        },
    ];
    (check, diags)
}

pub fn run_selftest(opts: SelftestOptions) -> SelftestReport {
    let mut report = SelftestReport::default();
    report.checks.push(transform_check(opts.seed, 200));
    let (c, d) = conservation_checks();
    report.checks.extend(c);
    report.diagnostics.extend(d);
    let (c, d) = regularization_checks(opts.corrupt_q);
    report.checks.extend(c);
    report.diagnostics.extend(d);
    let (c, d) = norm_equivalence_sweep(opts.seed, 256);
    report.checks.push(c);
    report.diagnostics.extend(d);
    report
}

/// Nodal field with random interior values, used by the command-line tools.
pub fn random_nodal(grid: Grid1D, seed: u64) -> NodalField {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut v = random_values(&mut rng, grid.n() + 1);
    v[0] = Complex64::default();
    v[grid.n()] = Complex64::default();
    NodalField::new(grid, v).expect("sizes match")
}
