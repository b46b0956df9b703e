//! Exact sub-flows and their Lie/Strang compositions.
//!
//! The kinetic flow `e^{itΔ}` is diagonal in the sine basis, and the
//! potential-plus-nonlinear flow is a pointwise phase rotation because
//! `|ψ|` is constant along it. Each Lie step therefore costs exactly one
//! analyze/synthesize pair.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::SemiSmoothNonlinearity;
use crate::spectral::{Grid1D, NodalField, SineTransform, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    /// `ψ^{k+1} = e^{iτΔ} I_N Φ_B^τ(ψ^k)`, the TSSP scheme.
    LieKineticLast,
    /// `ψ^{k+1} = Φ_B^τ(e^{iτΔ} ψ^k)`.
    LieKineticFirst,
    /// Half kinetic, full phase, half kinetic.
    Strang,
}

impl Scheme {
    pub fn tag(self) -> u8 {
        match self {
            Scheme::LieKineticLast => 0,
            Scheme::LieKineticFirst => 1,
            Scheme::Strang => 2,
        }
    }

    pub fn from_tag(tag: u8) -> Option<Self> {
        match tag {
            0 => Some(Scheme::LieKineticLast),
            1 => Some(Scheme::LieKineticFirst),
            2 => Some(Scheme::Strang),
            _ => None,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Scheme::LieKineticLast => "lie-kinetic-last",
            Scheme::LieKineticFirst => "lie-kinetic-first",
            Scheme::Strang => "strang",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lie-kinetic-last" | "lie" | "tssp" => Ok(Scheme::LieKineticLast),
            "lie-kinetic-first" | "lie-alt" => Ok(Scheme::LieKineticFirst),
            "strang" => Ok(Scheme::Strang),
            other => Err(Error::Config(format!("unknown scheme '{other}'"))),
        }
    }
}

/// Time-independent real potential sampled at the grid nodes.
#[derive(Clone, Debug, PartialEq)]
pub struct Potential {
    grid: Grid1D,
    values: Vec<f64>,
}

impl Potential {
    pub fn zero(grid: Grid1D) -> Self {
        Self {
            grid,
            values: vec![0.0; grid.n() + 1],
        }
    }

    pub fn from_fn(grid: Grid1D, v: impl Fn(f64) -> f64) -> Self {
        Self {
            grid,
            values: grid.nodes().into_iter().map(v).collect(),
        }
    }

    /// `V(x) = ω² x² / 2`.
    pub fn harmonic(grid: Grid1D, omega: f64) -> Self {
        Self::from_fn(grid, |x| 0.5 * omega * omega * x * x)
    }

    pub fn from_samples(grid: Grid1D, values: Vec<f64>) -> Result<Self> {
        if values.len() != grid.n() + 1 {
            return Err(Error::GridMismatch(format!(
                "potential needs {} samples, got {}",
                grid.n() + 1,
                values.len()
            )));
        }
        if let Some(bad) = values.iter().find(|v| !v.is_finite()) {
            return Err(Error::Domain(format!("potential sample {bad} is not finite")));
        }
        Ok(Self { grid, values })
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn is_zero(&self) -> bool {
        self.values.iter().all(|&v| v == 0.0)
    }

    /// Adds a constant offset.
    pub fn shifted(&self, c: f64) -> Self {
        Self {
            grid: self.grid,
            values: self.values.iter().map(|v| v + c).collect(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SplitConfig {
    pub scheme: Scheme,
    pub tau: f64,
    pub nonlinearity: SemiSmoothNonlinearity,
    pub potential: Potential,
}

impl SplitConfig {
    /// `tau` may be zero or negative (backward stepping); it must be finite.
    pub fn new(
        scheme: Scheme,
        tau: f64,
        nonlinearity: SemiSmoothNonlinearity,
        potential: Potential,
    ) -> Result<Self> {
        if !tau.is_finite() {
            return Err(Error::Config(format!("time step must be finite, got {tau}")));
        }
        if tau.abs() >= 1.0 {
            log::warn!("time step {tau} violates the guideline tau < 1; results may be inaccurate");
        }
        Ok(Self {
            scheme,
            tau,
            nonlinearity,
            potential,
        })
    }

    pub fn grid(&self) -> &Grid1D {
        self.potential.grid()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimulationState {
    pub field: NodalField,
    pub step_index: u64,
    pub time: f64,
}

impl SimulationState {
    pub fn initial(field: NodalField) -> Self {
        Self {
            field,
            step_index: 0,
            time: 0.0,
        }
    }
}

/// `c_l ← e^{-i t μ_l²} c_l`.
pub fn kinetic_flow(c: &SpectralField, t: f64) -> SpectralField {
    let g = *c.grid();
    let mut out = c.clone();
    for (l, z) in out.coefficients_mut().iter_mut().enumerate() {
        let (s, co) = (-t * g.mu(l + 1).powi(2)).sin_cos();
        *z *= Complex64::new(co, s);
    }
    out
}

fn check_grid(v: &Grid1D, pot: &Potential) -> Result<()> {
    if v != pot.grid() {
        return Err(Error::GridMismatch(format!(
            "field on N = {} but potential on N = {}",
            v.n(),
            pot.grid().n()
        )));
    }
    Ok(())
}

#[inline]
fn rotate_phase(values: &mut [Complex64], pot: &[f64], nl: &SemiSmoothNonlinearity, t: f64) {
    for (z, &vj) in values.iter_mut().zip(pot) {
        let rho = z.norm_sqr();
        let (s, c) = (-t * (vj + nl.value_unchecked(rho))).sin_cos();
        *z *= Complex64::new(c, s);
    }
}

/// `v_j ← e^{-i t (V_j + f(|v_j|²))} v_j`; every `|v_j|` is preserved.
pub fn phase_flow(
    v: &NodalField,
    pot: &Potential,
    nl: &SemiSmoothNonlinearity,
    t: f64,
) -> Result<NodalField> {
    check_grid(v.grid(), pot)?;
    let mut out = v.clone();
    let n = v.grid().n();
    rotate_phase(out.interior_mut(), &pot.values()[1..n], nl, t);
    Ok(out)
}

/// Reusable stepping workspace for one configuration.
///
/// Holds the transform plan and precomputed kinetic phase factors so the
/// inner loop allocates nothing.
pub struct Stepper {
    cfg: SplitConfig,
    transform: SineTransform,
    kinetic_full: Vec<Complex64>,
    kinetic_half: Vec<Complex64>,
    coeffs: Vec<Complex64>,
}

fn kinetic_factors(g: &Grid1D, t: f64) -> Vec<Complex64> {
    (1..g.n())
        .map(|l| {
            let (s, c) = (-t * g.mu(l).powi(2)).sin_cos();
            Complex64::new(c, s)
        })
        .collect()
}

impl Stepper {
    pub fn new(cfg: SplitConfig) -> Self {
        let g = *cfg.grid();
        let kinetic_full = kinetic_factors(&g, cfg.tau);
        let kinetic_half = kinetic_factors(&g, 0.5 * cfg.tau);
        Self {
            transform: SineTransform::new(g.n()),
            coeffs: vec![Complex64::default(); g.modes()],
            kinetic_full,
            kinetic_half,
            cfg,
        }
    }

    pub fn config(&self) -> &SplitConfig {
        &self.cfg
    }

    fn phase(&mut self, interior: &mut [Complex64]) {
        let n = self.cfg.grid().n();
        rotate_phase(
            interior,
            &self.cfg.potential.values()[1..n],
            &self.cfg.nonlinearity,
            self.cfg.tau,
        );
    }

    fn kinetic(&mut self, interior: &mut [Complex64], half: bool) {
        self.transform.analyze_interior(interior, &mut self.coeffs);
        let factors = if half { &self.kinetic_half } else { &self.kinetic_full };
        for (c, f) in self.coeffs.iter_mut().zip(factors) {
            *c *= f;
        }
        self.transform.synthesize_interior(&self.coeffs, interior);
    }

    /// Advances interior values `ψ_1..ψ_{N-1}` by one step in place.
    pub fn advance_interior(&mut self, interior: &mut [Complex64]) {
        match self.cfg.scheme {
            Scheme::LieKineticLast => {
                self.phase(interior);
                self.kinetic(interior, false);
            }
            Scheme::LieKineticFirst => {
                self.kinetic(interior, false);
                self.phase(interior);
            }
            Scheme::Strang => {
                self.kinetic(interior, true);
                self.phase(interior);
                self.kinetic(interior, true);
            }
        }
    }

    /// `n_steps` Strang steps with adjacent half kinetic flows merged into
    /// one full flow. Agrees with repeated [`advance_interior`](Self::advance_interior)
    /// up to rounding, at roughly half the transform count.
    pub fn advance_strang_fused(&mut self, interior: &mut [Complex64], n_steps: u64) -> Result<()> {
        if self.cfg.scheme != Scheme::Strang {
            return Err(Error::Config(format!(
                "fused stepping needs the strang scheme, got {}",
                self.cfg.scheme.name()
            )));
        }
        if n_steps == 0 {
            return Ok(());
        }
        self.kinetic(interior, true);
        for k in 1..=n_steps {
            self.phase(interior);
            self.kinetic(interior, k == n_steps);
            if k % 256 == 0 && interior.iter().any(|z| !z.is_finite()) {
                return Err(Error::Step {
                    step: k,
                    source: Box::new(Error::Domain("non-finite value".into())),
                });
            }
        }
        Ok(())
    }

    pub fn step(&mut self, s: &SimulationState) -> Result<SimulationState> {
        check_grid(s.field.grid(), &self.cfg.potential)?;
        let mut field = s.field.clone();
        self.advance_interior(field.interior_mut());
        Ok(SimulationState {
            field,
            step_index: s.step_index + 1,
            time: s.time + self.cfg.tau,
        })
    }
}

fn step_with(s: &SimulationState, cfg: &SplitConfig, expected: Scheme) -> Result<SimulationState> {
    if cfg.scheme != expected {
        return Err(Error::Config(format!(
            "{} step requested with scheme {}",
            expected.name(),
            cfg.scheme.name()
        )));
    }
    Stepper::new(cfg.clone()).step(s)
}

/// One TSSP step: phase flow, then kinetic flow.
pub fn tssp_step(s: &SimulationState, cfg: &SplitConfig) -> Result<SimulationState> {
    step_with(s, cfg, Scheme::LieKineticLast)
}

/// One Lie step in the opposite order: kinetic flow, then phase flow.
pub fn tssp_step_alt(s: &SimulationState, cfg: &SplitConfig) -> Result<SimulationState> {
    step_with(s, cfg, Scheme::LieKineticFirst)
}

pub fn strang_step(s: &SimulationState, cfg: &SplitConfig) -> Result<SimulationState> {
    step_with(s, cfg, Scheme::Strang)
}

/// Read-only hook invoked during [`evolve`].
pub trait Observer {
    /// Observe every `cadence()` steps (always including step 0 and the final step).
    fn cadence(&self) -> u64 {
        1
    }

    fn observe(&mut self, state: &SimulationState) -> Result<()>;
}

impl<F: FnMut(&SimulationState) -> Result<()>> Observer for F {
    fn observe(&mut self, state: &SimulationState) -> Result<()> {
        self(state)
    }
}

/// Applies `n_steps` steps of the configured scheme.
///
/// Observers see the initial state, every state whose step index is a
/// multiple of their cadence, and the final state. Errors from observers are
/// reported with the index of the step at which they occurred.
pub fn evolve(
    s0: &SimulationState,
    cfg: &SplitConfig,
    n_steps: u64,
    observers: &mut [&mut dyn Observer],
) -> Result<SimulationState> {
    check_grid(s0.field.grid(), &cfg.potential)?;
    let mut stepper = Stepper::new(cfg.clone());
    let mut state = s0.clone();
    let t0 = s0.time;
    let notify = |state: &SimulationState, observers: &mut [&mut dyn Observer], last: bool| {
        for o in observers.iter_mut() {
            let cad = o.cadence().max(1);
            let k = state.step_index - s0.step_index;
            if k == 0 || last || k % cad == 0 {
                o.observe(state).map_err(|e| Error::Step {
                    step: state.step_index,
                    source: Box::new(e),
                })?;
            }
        }
        Ok::<(), Error>(())
    };
    notify(&state, observers, n_steps == 0)?;
    for k in 1..=n_steps {
        stepper.advance_interior(state.field.interior_mut());
        state.step_index += 1;
        state.time = t0 + k as f64 * cfg.tau;
        if let Some(bad) = state.field.interior().iter().position(|z| !z.is_finite()) {
            return Err(Error::Step {
                step: state.step_index,
                source: Box::new(Error::Domain(format!("non-finite value at node {}", bad + 1))),
            });
        }
        if !observers.is_empty() {
            notify(&state, observers, k == n_steps)?;
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{dst_analyze, dst_synthesize, l2_norm_nodal, lp_norm_nodal, LpExponent};
    use std::f64::consts::PI;

    fn grid01(n: usize) -> Grid1D {
        Grid1D::new(0.0, 1.0, n).unwrap()
    }

    fn nl(beta: f64, sigma: f64) -> SemiSmoothNonlinearity {
        SemiSmoothNonlinearity::new(beta, sigma).unwrap()
    }

    fn cfg(scheme: Scheme, g: Grid1D, tau: f64, beta: f64, sigma: f64) -> SplitConfig {
        SplitConfig::new(scheme, tau, nl(beta, sigma), Potential::zero(g)).unwrap()
    }

    fn bumpy(g: Grid1D) -> NodalField {
        NodalField::from_fn(g, |x| {
            let s = (x - g.a()) / g.length();
            Complex64::new(s * (1.0 - s) * (3.0 * s).cos(), (PI * s).sin().powi(3))
        })
    }

    fn max_diff(a: &NodalField, b: &NodalField) -> f64 {
        a.values().iter().zip(b.values()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
    }

    #[test]
    fn kinetic_flow_cases() {
        let g = grid01(8);
        let mut c = SpectralField::zeros(g);
        c.coefficients_mut()[0] = Complex64::new(1.0, 0.0);
        assert_eq!(kinetic_flow(&c, 0.0), c);
        let k = kinetic_flow(&c, 1.0 / PI);
        assert!((k.coefficient(1) - Complex64::new(-1.0, 0.0)).norm() < 1e-14);

        let r = dst_analyze(&bumpy(grid01(32)));
        let after = kinetic_flow(&r, 0.37);
        assert!((after.l2_norm() - r.l2_norm()).abs() <= 1e-14 * r.l2_norm());
    }

    #[test]
    fn phase_flow_cases() {
        let g = grid01(8);
        let pot = Potential::zero(g);
        let v = bumpy(g);
        assert_eq!(phase_flow(&v, &pot, &nl(1.0, 0.5), 0.0).unwrap(), v);

        let mut vals = vec![Complex64::default(); 9];
        vals[3] = Complex64::new(1.0, 0.0);
        let one = NodalField::new(g, vals).unwrap();
        let out = phase_flow(&one, &pot, &nl(1.0, 1.0), PI).unwrap();
        assert!((out.value(3) - Complex64::new(-1.0, 0.0)).norm() < 1e-15);

        let pot = Potential::harmonic(g, 3.0);
        let out = phase_flow(&v, &pot, &nl(-2.0, 0.3), 0.7).unwrap();
        for (a, b) in out.values().iter().zip(v.values()) {
            assert!((a.norm() - b.norm()).abs() <= 1e-15 * b.norm().max(1.0));
        }
        let two = LpExponent::new(2.0).unwrap();
        assert!((lp_norm_nodal(&out, two) - lp_norm_nodal(&v, two)).abs() < 1e-14);
        assert!(
            (lp_norm_nodal(&out, LpExponent::Infinity) - lp_norm_nodal(&v, LpExponent::Infinity))
                .abs()
                < 1e-14
        );

        let wrong = Potential::zero(grid01(16));
        assert!(phase_flow(&v, &wrong, &nl(1.0, 1.0), 0.1).is_err());
    }

    #[test]
    fn linear_steps_reduce_to_free_flow() {
        let g = grid01(16);
        let mut c = SpectralField::zeros(g);
        c.coefficients_mut()[2] = Complex64::new(0.5, 0.25);
        let s = SimulationState::initial(dst_synthesize(&c));
        let tau = 0.013;
        let expect = dst_synthesize(&kinetic_flow(&c, tau));
        for scheme in [Scheme::LieKineticLast, Scheme::LieKineticFirst, Scheme::Strang] {
            let out = Stepper::new(cfg(scheme, g, tau, 0.0, 1.0)).step(&s).unwrap();
            assert!(max_diff(&out.field, &expect) < 1e-14, "{scheme:?}");
            assert_eq!(out.step_index, 1);
            assert_eq!(out.time, tau);
        }
    }

    #[test]
    fn zero_step_is_identity() {
        let g = grid01(32);
        let s = SimulationState::initial(bumpy(g));
        for scheme in [Scheme::LieKineticLast, Scheme::LieKineticFirst, Scheme::Strang] {
            let out = Stepper::new(cfg(scheme, g, 0.0, -1.0, 0.5)).step(&s).unwrap();
            assert!(max_diff(&out.field, &s.field) < 1e-12);
        }
        assert!(SplitConfig::new(Scheme::Strang, f64::NAN, nl(1.0, 1.0), Potential::zero(g)).is_err());
    }

    #[test]
    fn tssp_step_matches_direct_composition() {
        let g = grid01(8);
        let tau = 0.01;
        let psi0: Vec<Complex64> = (0..=8)
            .map(|j| Complex64::new(if j == 0 || j == 8 { 0.0 } else { (PI * g.node(j)).sin() }, 0.0))
            .collect();
        // independent composition: scalar phase rotation, then O(N²) sine sums
        let phased: Vec<Complex64> = psi0
            .iter()
            .map(|&z| {
                let f = -(z.norm_sqr()).powf(0.5);
                z * Complex64::from_polar(1.0, -tau * f)
            })
            .collect();
        let mut expect = vec![Complex64::default(); 9];
        for l in 1..8 {
            let mut cl = Complex64::default();
            for (j, &p) in phased.iter().enumerate().take(8).skip(1) {
                cl += p * (j as f64 * l as f64 * PI / 8.0).sin();
            }
            cl *= 2.0 / 8.0;
            let mu2 = (PI * l as f64).powi(2);
            cl *= Complex64::from_polar(1.0, -tau * mu2);
            for (j, e) in expect.iter_mut().enumerate().take(8).skip(1) {
                *e += cl * (j as f64 * l as f64 * PI / 8.0).sin();
            }
        }
        let s = SimulationState::initial(NodalField::new(g, psi0).unwrap());
        let out = tssp_step(&s, &cfg(Scheme::LieKineticLast, g, tau, -1.0, 0.5)).unwrap();
        for (a, b) in out.field.values().iter().zip(&expect) {
            assert!((a - b).norm() < 1e-12);
        }
    }

    #[test]
    fn step_functions_check_scheme() {
        let g = grid01(8);
        let s = SimulationState::initial(bumpy(g));
        let c = cfg(Scheme::Strang, g, 0.1, 1.0, 1.0);
        assert!(tssp_step(&s, &c).is_err());
        assert!(tssp_step_alt(&s, &c).is_err());
        assert!(strang_step(&s, &c).is_ok());
    }

    #[test]
    fn lie_orderings_differ_at_second_order() {
        let g = Grid1D::new(-4.0, 4.0, 64).unwrap();
        let psi = NodalField::from_fn(g, |x| Complex64::new((-x * x).exp() * x, 0.0));
        let s = SimulationState::initial(psi);
        let diff = |tau: f64| {
            let a = tssp_step(&s, &cfg(Scheme::LieKineticLast, g, tau, -1.0, 1.0)).unwrap();
            let b = tssp_step_alt(&s, &cfg(Scheme::LieKineticFirst, g, tau, -1.0, 1.0)).unwrap();
            let d = NodalField::new(
                g,
                a.field.values().iter().zip(b.field.values()).map(|(x, y)| x - y).collect(),
            )
            .unwrap();
            l2_norm_nodal(&d)
        };
        let ratio = diff(0.01) / diff(0.005);
        assert!((ratio - 4.0).abs() < 0.2, "ratio {ratio}");
    }

    #[test]
    fn evolve_determinism_and_observers() {
        let g = grid01(32);
        let s0 = SimulationState::initial(bumpy(g));
        for scheme in [Scheme::LieKineticLast, Scheme::LieKineticFirst, Scheme::Strang] {
            let c = cfg(scheme, g, 0.003, -1.0, 0.3);
            assert_eq!(evolve(&s0, &c, 0, &mut []).unwrap(), s0);
            let one = evolve(&s0, &c, 1, &mut []).unwrap();
            let two = evolve(&one, &c, 1, &mut []).unwrap();
            let direct = evolve(&s0, &c, 2, &mut []).unwrap();
            assert_eq!(two.field, direct.field);
            assert_eq!(two.step_index, 2);
            assert_eq!(two.time, direct.time);
        }

        let c = cfg(Scheme::LieKineticLast, g, 0.003, -1.0, 0.3);
        let mut seen = Vec::new();
        struct Every3<'a>(&'a mut Vec<u64>);
        impl Observer for Every3<'_> {
            fn cadence(&self) -> u64 {
                3
            }
            fn observe(&mut self, s: &SimulationState) -> Result<()> {
                self.0.push(s.step_index);
                Ok(())
            }
        }
        let mut obs = Every3(&mut seen);
        evolve(&s0, &c, 10, &mut [&mut obs]).unwrap();
        assert_eq!(seen, vec![0, 3, 6, 9, 10]);

        let mut failing = |s: &SimulationState| {
            if s.step_index == 4 {
                Err(Error::Domain("boom".into()))
            } else {
                Ok(())
            }
        };
        match evolve(&s0, &c, 10, &mut [&mut failing]) {
            Err(Error::Step { step, .. }) => assert_eq!(step, 4),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mass_conserved_over_many_steps() {
        let g = Grid1D::new(-8.0, 8.0, 128).unwrap();
        let psi = NodalField::from_fn(g, |x| Complex64::new(x * (-x * x / 2.0).exp(), 0.0));
        let m0 = l2_norm_nodal(&psi);
        let s0 = SimulationState::initial(psi);
        for scheme in [Scheme::LieKineticLast, Scheme::LieKineticFirst, Scheme::Strang] {
            let mut c = cfg(scheme, g, 0.01, -5.0, 0.25);
            c.potential = Potential::harmonic(g, 1.5);
            let out = evolve(&s0, &c, 1000, &mut []).unwrap();
            let drift = (l2_norm_nodal(&out.field) - m0).abs() / m0;
            assert!(drift <= 1e-11, "{scheme:?}: {drift}");
        }
    }

    #[test]
    fn strang_is_time_symmetric() {
        let g = Grid1D::new(-6.0, 6.0, 128).unwrap();
        let psi = NodalField::from_fn(g, |x| Complex64::new(x * (-x * x / 2.0).exp(), 0.2 * (-x * x).exp()));
        let s0 = SimulationState::initial(psi.clone());
        let fwd = cfg(Scheme::Strang, g, 0.02, -1.0, 0.5);
        let bwd = cfg(Scheme::Strang, g, -0.02, -1.0, 0.5);
        let there = strang_step(&s0, &fwd).unwrap();
        let back = strang_step(&there, &bwd).unwrap();
        let d = NodalField::new(
            g,
            back.field.values().iter().zip(psi.values()).map(|(a, b)| a - b).collect(),
        )
        .unwrap();
        assert!(l2_norm_nodal(&d) <= 1e-10 * l2_norm_nodal(&psi));
    }

    #[test]
    fn gauge_covariance() {
        let g = Grid1D::new(-6.0, 6.0, 64).unwrap();
        let psi = NodalField::from_fn(g, |x| Complex64::new(x * (-x * x / 2.0).exp(), 0.0));
        let s0 = SimulationState::initial(psi);
        let shift = 0.8;
        let steps = 25;
        let tau = 0.01;
        for scheme in [Scheme::LieKineticLast, Scheme::LieKineticFirst, Scheme::Strang] {
            let base = cfg(scheme, g, tau, -1.0, 0.4);
            let mut moved = base.clone();
            moved.potential = base.potential.shifted(shift);
            let a = evolve(&s0, &base, steps, &mut []).unwrap();
            let b = evolve(&s0, &moved, steps, &mut []).unwrap();
            let undo = Complex64::from_polar(1.0, shift * steps as f64 * tau);
            for (x, y) in a.field.values().iter().zip(b.field.values()) {
                assert!((x - y * undo).norm() < 1e-12);
            }
        }
    }

    #[test]
    fn fused_strang_matches_unfused() {
        let g = Grid1D::new(-4.0, 4.0, 64).unwrap();
        let psi = bumpy(g);
        let c = cfg(Scheme::Strang, g, 0.003, -1.0, 0.3);
        let plain = evolve(&SimulationState::initial(psi.clone()), &c, 40, &mut []).unwrap();
        let mut fused = psi.clone();
        let mut st = Stepper::new(c);
        st.advance_strang_fused(fused.interior_mut(), 40).unwrap();
        assert!(max_diff(&plain.field, &fused) < 1e-12);
        let mut same = psi.clone();
        st.advance_strang_fused(same.interior_mut(), 0).unwrap();
        assert_eq!(same, psi);

        let mut lie = Stepper::new(cfg(Scheme::LieKineticLast, g, 0.003, -1.0, 0.3));
        assert!(lie.advance_strang_fused(same.interior_mut(), 1).is_err());
    }
}
