//! Conserved quantities, error norms and discrete difference operators.

use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nonlinearity::SemiSmoothNonlinearity;
use crate::propagators::Potential;
use crate::spectral::{dst_analyze, dst_synthesize, lp_norm_nodal, LpExponent, NodalField, SpectralField};

/// `∫ |I_N v|² dx`, exact for members of `X_N`.
pub fn mass(v: &NodalField) -> f64 {
    dst_analyze(v).l2_norm().powi(2)
}

/// `∫ |∂_x ψ|² + V|ψ|² + F(|ψ|²) dx` with a spectral kinetic term and an
/// `h`-weighted node sum for the potential and interaction terms.
pub fn energy(v: &NodalField, pot: &Potential, nl: &SemiSmoothNonlinearity) -> Result<f64> {
    if v.grid() != pot.grid() {
        return Err(Error::GridMismatch("energy: field and potential grids differ".into()));
    }
    let kinetic = dst_analyze(v).h1_seminorm().powi(2);
    let n = v.grid().n();
    let local: f64 = v.values()[1..n]
        .iter()
        .zip(&pot.values()[1..n])
        .map(|(z, &vj)| {
            let rho = z.norm_sqr();
            vj * rho + nl.antiderivative_unchecked(rho)
        })
        .sum();
    Ok(kinetic + v.grid().h() * local)
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct ErrorNorms {
    pub l2: f64,
    /// Full `H^1` norm `sqrt(L² + |·|_{H¹}²)`.
    pub h1: f64,
    pub linf: f64,
}

/// Error of `I_N(numeric)` against a reference living on the same or a
/// dyadically refined grid. `L²`/`H¹` are computed exactly after zero-padding
/// the coarse coefficients; `l∞` is taken at the coarse nodes.
pub fn error_norms(numeric: &NodalField, reference: &SpectralField) -> Result<ErrorNorms> {
    let coarse = *numeric.grid();
    let fine = *reference.grid();
    if coarse.refinement_ratio(&fine).is_none() {
        return Err(Error::GridMismatch(format!(
            "reference grid N = {} does not refine numeric grid N = {}",
            fine.n(),
            coarse.n()
        )));
    }
    let diff = reference.sub(&dst_analyze(numeric).embed_into(&fine)?)?;
    let ref_nodes = dst_synthesize(reference).subsample(&coarse)?;
    let linf = numeric
        .values()
        .iter()
        .zip(ref_nodes.values())
        .map(|(a, b)| (a - b).norm())
        .fold(0.0, f64::max);
    Ok(ErrorNorms {
        l2: diff.l2_norm(),
        h1: diff.h1_norm(),
        linf,
    })
}

/// `(v_{j+1} - v_j)/h` for `j = 0..N-1`.
pub fn forward_diff(v: &NodalField) -> Vec<Complex64> {
    let h = v.grid().h();
    v.values().windows(2).map(|w| (w[1] - w[0]) / h).collect()
}

/// `(v_{j+1} - 2 v_j + v_{j-1})/h²` for `j = 1..N-1`.
pub fn central_second_diff(v: &NodalField) -> Vec<Complex64> {
    let h2 = v.grid().h().powi(2);
    v.values()
        .windows(3)
        .map(|w| (w[2] - 2.0 * w[1] + w[0]) / h2)
        .collect()
}

fn weighted_l2(h: f64, w: &[Complex64]) -> f64 {
    (h * w.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormEquivalence {
    /// `||δ_x^+ φ||_{l²}`
    pub lhs: f64,
    /// `||∂_x I_N φ||_{L²}`
    pub mid: f64,
    /// `(π/2) ||δ_x^+ φ||_{l²}`
    pub rhs: f64,
    pub pass: bool,
}

/// `||δ_x^+ φ||_{l²} ≤ ||∂_x I_N φ||_{L²} ≤ (π/2)||δ_x^+ φ||_{l²}` for `φ ∈ X_N`.
pub fn norm_equivalence_check(phi: &SpectralField) -> NormEquivalence {
    let nodal = dst_synthesize(phi);
    let lhs = weighted_l2(phi.grid().h(), &forward_diff(&nodal));
    let mid = phi.h1_seminorm();
    let rhs = std::f64::consts::FRAC_PI_2 * lhs;
    let slack = 1.0 + 1e-12;
    NormEquivalence {
        lhs,
        mid,
        rhs,
        pass: lhs <= mid * slack && mid <= rhs * slack,
    }
}

/// `||φ||_{l⁴} / (||φ||_{l²}^{3/4} ||δ_x^+ φ||_{l²}^{1/4})`; monitored, no threshold.
pub fn gagliardo_nirenberg_ratio(phi: &SpectralField) -> f64 {
    let nodal = dst_synthesize(phi);
    let l4 = lp_norm_nodal(&nodal, LpExponent::Finite(4.0));
    let l2 = lp_norm_nodal(&nodal, LpExponent::Finite(2.0));
    let d = weighted_l2(phi.grid().h(), &forward_diff(&nodal));
    let denom = l2.powf(0.75) * d.powf(0.25);
    if denom == 0.0 {
        0.0
    } else {
        l4 / denom
    }
}

/// `||δ_x^+ φ||_{l⁴} / ||φ||_{H²}`; monitored, no threshold.
pub fn embedding_ratio(phi: &SpectralField) -> f64 {
    let nodal = dst_synthesize(phi);
    let h = phi.grid().h();
    let d = forward_diff(&nodal);
    let l4 = (h * d.iter().map(|z| z.norm_sqr().powi(2)).sum::<f64>()).powf(0.25);
    let h2 = phi.h2_norm();
    if h2 == 0.0 {
        0.0
    } else {
        l4 / h2
    }
}

/// One row of an observables time series. `l2`, `h1` and `linf` are norms of
/// the current state: `||I_N ψ||_{L²}`, `||I_N ψ||_{H¹}` and `max_j |ψ_j|`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObservableRecord {
    pub time: f64,
    pub mass: f64,
    pub energy: f64,
    pub l2: f64,
    pub h1: f64,
    pub linf: f64,
}

impl ObservableRecord {
    pub fn measure(
        time: f64,
        v: &NodalField,
        pot: &Potential,
        nl: &SemiSmoothNonlinearity,
    ) -> Result<Self> {
        let c = dst_analyze(v);
        let l2 = c.l2_norm();
        Ok(Self {
            time,
            mass: l2 * l2,
            energy: energy(v, pot, nl)?,
            l2,
            h1: c.h1_norm(),
            linf: lp_norm_nodal(v, LpExponent::Infinity),
        })
    }
}

pub const OBSERVABLES_HEADER: &str = "time,mass,energy,l2,h1,linf";

/// Writes records as CSV. Floats use Rust's shortest round-trip formatting,
/// so identical runs produce identical bytes.
pub fn write_observables_csv<W: Write>(mut w: W, rows: &[ObservableRecord]) -> std::io::Result<()> {
    writeln!(w, "{OBSERVABLES_HEADER}")?;
    for r in rows {
        writeln!(
            w,
            "{:e},{:e},{:e},{:e},{:e},{:e}",
            r.time, r.mass, r.energy, r.l2, r.h1, r.linf
        )?;
    }
    Ok(())
}
