use num_complex::Complex64;
use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{dst_synthesize, Grid1D, NodalField, SpectralField};

pub const DEFAULT_DECAY: f64 = 2.5;

/// Initial wave functions used by the studies.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum InitialData {
    /// `ψ₀(x) = x e^{-x²/2}`.
    TypeI,
    /// Random odd sine series with even-mode coefficients decaying like
    /// `|μ_l|^{-decay}`, normalized to unit `L²` norm. The series is drawn on
    /// a grid with `modes` subintervals; other grids sample that function.
    TypeII { seed: u64, decay: f64, modes: usize },
    /// `amplitude · sin(μ_l (x - a))`.
    Mode { l: usize, amplitude: f64 },
}

impl InitialData {
    pub fn type2(seed: u64, modes: usize) -> Self {
        InitialData::TypeII {
            seed,
            decay: DEFAULT_DECAY,
            modes,
        }
    }

    /// Nodal samples `ψ₀(x_j)`.
    pub fn sample(&self, grid: &Grid1D) -> Result<NodalField> {
        match *self {
            InitialData::TypeI => Ok(make_type1(grid)),
            InitialData::Mode { l, amplitude } => {
                if l == 0 {
                    return Err(Error::Config("mode index must be >= 1".into()));
                }
                let mu = grid.mu(l);
                Ok(NodalField::from_fn(*grid, |x| {
                    Complex64::new(amplitude * (mu * (x - grid.a())).sin(), 0.0)
                }))
            }
            InitialData::TypeII { seed, decay, modes } => {
                let gen = Grid1D::new(grid.a(), grid.b(), modes)?;
                let coeffs = type2_coefficients(&gen, seed, decay);
                if gen.refinement_ratio(grid).is_some() {
                    Ok(dst_synthesize(&coeffs.embed_into(grid)?))
                } else if grid.refinement_ratio(&gen).is_some() {
                    dst_synthesize(&coeffs).subsample(grid)
                } else {
                    let mut vals = vec![Complex64::default(); grid.n() + 1];
                    for (j, v) in vals.iter_mut().enumerate().take(grid.n()).skip(1) {
                        *v = coeffs.evaluate(grid.node(j))?;
                    }
                    NodalField::new(*grid, vals)
                }
            }
        }
    }
}

/// Samples of `x e^{-x²/2}`; endpoint values are set to exactly zero.
pub fn make_type1(grid: &Grid1D) -> NodalField {
    NodalField::from_fn(*grid, |x| Complex64::new(x * (-0.5 * x * x).exp(), 0.0))
}

/// Type II datum drawn on `grid` itself.
pub fn make_type2(grid: &Grid1D, seed: u64) -> NodalField {
    dst_synthesize(&type2_coefficients(grid, seed, DEFAULT_DECAY))
}

/// Uniform draw on `[-1, 1)` from the top 53 bits of one ChaCha20 output word.
fn uniform_pm1(rng: &mut ChaCha20Rng) -> f64 {
    let u = (rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
    2.0 * u - 1.0
}

/// Sine coefficients of the unit-norm Type II datum.
///
/// Draws come from `ChaCha20Rng::seed_from_u64(seed)`: for `l = 2, 4, ...`
/// in increasing order, one word for the real part, then one for the
/// imaginary part. A coarser grid therefore sees a prefix of the draws of a
/// finer one.
pub fn type2_coefficients(grid: &Grid1D, seed: u64, decay: f64) -> SpectralField {
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let mut c = SpectralField::zeros(*grid);
    for (i, z) in c.coefficients_mut().iter_mut().enumerate() {
        let l = i + 1;
        if l % 2 == 0 {
            let re = uniform_pm1(&mut rng);
            let im = uniform_pm1(&mut rng);
            *z = Complex64::new(re, im) / grid.mu(l).abs().powf(decay);
        }
    }
    let norm = c.l2_norm();
    if norm > 0.0 {
        for z in c.coefficients_mut() {
            *z /= norm;
        }
    }
    c
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::observables::mass;
    use crate::spectral::dst_analyze;
    use std::f64::consts::PI;

    #[test]
    fn type1_values() {
        let g = Grid1D::new(-16.0, 16.0, 64).unwrap();
        let v = make_type1(&g);
        assert_eq!(v.value(32), Complex64::default());
        assert_eq!(g.node(34), 1.0);
        assert!((v.value(34).re - 0.606_530_659_712_633_4).abs() < 1e-15);
        assert_eq!(v.value(0), Complex64::default());
        assert_eq!(v.value(64), Complex64::default());

        let g = Grid1D::new(-16.0, 16.0, 2048).unwrap();
        assert!((mass(&make_type1(&g)) - PI.sqrt() / 2.0).abs() < 1e-8);
    }

    #[test]
    fn type2_structure() {
        let g = Grid1D::new(-1.0, 1.0, 256).unwrap();
        let v = make_type2(&g, 7);
        let c = dst_analyze(&v);
        for l in (1..256).step_by(2) {
            assert!(c.coefficient(l).norm() < 1e-14, "odd mode {l}");
        }
        assert!((c.l2_norm() - 1.0).abs() < 1e-12);
        assert_eq!(make_type2(&g, 7), v);
        assert_ne!(make_type2(&g, 8), v);
    }

    #[test]
    fn type2_on_other_grids_samples_same_function() {
        let data = InitialData::type2(3, 128);
        let gen = Grid1D::new(-1.0, 1.0, 128).unwrap();
        let base = data.sample(&gen).unwrap();
        let fine = data.sample(&Grid1D::new(-1.0, 1.0, 512).unwrap()).unwrap();
        let coarse = data.sample(&Grid1D::new(-1.0, 1.0, 32).unwrap()).unwrap();
        for j in 0..=128 {
            assert!((fine.value(4 * j) - base.value(j)).norm() < 1e-13);
        }
        for j in 0..=32 {
            assert_eq!(coarse.value(j), base.value(4 * j));
        }
        let odd = data.sample(&Grid1D::new(-1.0, 1.0, 48).unwrap()).unwrap();
        let c = type2_coefficients(&gen, 3, DEFAULT_DECAY);
        for j in 0..=48 {
            let x = odd.grid().node(j);
            assert!((odd.value(j) - c.evaluate(x).unwrap()).norm() < 1e-12);
        }
    }

    #[test]
    fn coarse_draws_are_prefix() {
        let a = type2_coefficients(&Grid1D::new(-1.0, 1.0, 16).unwrap(), 11, 2.5);
        let b = type2_coefficients(&Grid1D::new(-1.0, 1.0, 64).unwrap(), 11, 2.5);
        let ratio = a.coefficient(2) / b.coefficient(2);
        for l in (2..16).step_by(2) {
            assert!((a.coefficient(l) / b.coefficient(l) - ratio).norm() < 1e-12);
        }
    }

    #[test]
    fn single_mode() {
        let g = Grid1D::new(0.0, 1.0, 8).unwrap();
        let v = InitialData::Mode { l: 1, amplitude: 2.0 }.sample(&g).unwrap();
        let c = dst_analyze(&v);
        assert!((c.coefficient(1).re - 2.0).abs() < 1e-14);
        assert!(InitialData::Mode { l: 0, amplitude: 1.0 }.sample(&g).is_err());
    }
}
