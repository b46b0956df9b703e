//! Power-law nonlinearity `f(ρ) = β ρ^σ` and its local C³ regularization.
//!
//! For `0 < σ < 1`, `f` is continuous but not differentiable at `ρ = 0`.
//! The regularization replaces it on `[0, ε²)` by `ρ Q_ε(ρ)`, where `Q_ε` is
//! the cubic Taylor polynomial of `f(ρ)/ρ` about `ρ = ε²` written in
//! `u = 1 - ρ/ε²`:
//!
//! ```text
//! Q_ε(ρ) = β ε^{2σ-2} Σ_{j=0}^{3} C(j-σ, j) u^j
//! ```
//!
//! so `f_ε` matches `f` together with its first three derivatives at the
//! junction and vanishes at the origin.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ρ^σ` with an explicit zero short-circuit.
#[inline]
fn pow_nonneg(rho: f64, sigma: f64) -> f64 {
    if rho == 0.0 {
        0.0
    } else {
        (sigma * rho.ln()).exp()
    }
}

fn check_rho(rho: f64) -> Result<()> {
    if rho >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("density must be nonnegative, got {rho}")))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct SemiSmoothNonlinearity {
    beta: f64,
    sigma: f64,
}

impl SemiSmoothNonlinearity {
    pub fn new(beta: f64, sigma: f64) -> Result<Self> {
        if !beta.is_finite() {
            return Err(Error::Config(format!("beta must be finite, got {beta}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
        }
        Ok(Self { beta, sigma })
    }

    #[inline]
    pub fn beta(&self) -> f64 {
        self.beta
    }

    #[inline]
    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    /// `β ρ^σ` without the domain check; `ρ` must be nonnegative.
    #[inline]
    pub fn value_unchecked(&self, rho: f64) -> f64 {
        if self.beta == 0.0 {
            return 0.0;
        }
        self.beta * pow_nonneg(rho, self.sigma)
    }

    pub fn f(&self, rho: f64) -> Result<f64> {
        check_rho(rho)?;
        Ok(self.value_unchecked(rho))
    }

    /// Antiderivative `F(ρ) = β/(σ+1) ρ^{σ+1}`.
    pub fn antiderivative(&self, rho: f64) -> Result<f64> {
        check_rho(rho)?;
        Ok(self.antiderivative_unchecked(rho))
    }

    #[inline]
    pub fn antiderivative_unchecked(&self, rho: f64) -> f64 {
        self.beta / (self.sigma + 1.0) * pow_nonneg(rho, self.sigma + 1.0)
    }

    /// `G(z) = β σ |z|^{2σ-2} z²`, `G(0) = 0`.
    pub fn g(&self, z: Complex64) -> Complex64 {
        let r2 = z.norm_sqr();
        if r2 == 0.0 {
            return Complex64::default();
        }
        z * z * (self.beta * self.sigma * pow_nonneg(r2, self.sigma - 1.0))
    }

    /// k-th derivative (k = 1..3) of the power law at `ρ > 0`.
    pub fn derivative(&self, rho: f64, k: u32) -> Result<f64> {
        if !(1..=3).contains(&k) {
            return Err(Error::Domain(format!("derivative order must be 1..3, got {k}")));
        }
        if rho <= 0.0 {
            return Err(Error::Domain(format!(
                "power-law derivative needs rho > 0, got {rho}"
            )));
        }
        let s = self.sigma;
        let falling = (0..k).fold(1.0, |acc, i| acc * (s - i as f64));
        Ok(self.beta * falling * pow_nonneg(rho, s - k as f64))
    }
}

/// Generalized binomial coefficient `C(j-σ, j)` for `j = 0..3`.
pub fn gen_binom(j: u32, sigma: f64) -> Result<f64> {
    if j > 3 {
        return Err(Error::Domain(format!("binomial index must be 0..3, got {j}")));
    }
    let jf = j as f64;
    let num = (0..j).fold(1.0, |acc, k| acc * (jf - sigma - k as f64));
    let fact = (1..=j).fold(1.0, |acc, k| acc * k as f64);
    Ok(num / fact)
}

/// `S_σ = Σ_{j=0}^{3} |C(j-σ, j)|`.
pub fn binom_abs_sum(sigma: f64) -> f64 {
    (0..4).map(|j| gen_binom(j, sigma).unwrap().abs()).sum()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RegularizedNonlinearity {
    base: SemiSmoothNonlinearity,
    eps: f64,
    /// `β ε^{2σ-2} C(j-σ, j)`, the coefficients of `Q_ε` in powers of `u`.
    q_coeffs: [f64; 4],
}

/// Which side of `ρ = ε²` a derivative is taken from.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Branch {
    Polynomial,
    PowerLaw,
}

impl RegularizedNonlinearity {
    /// Builds `f_ε`. Valid for any `σ > 0`; the solver itself never
    /// regularizes, and for `σ ≥ 1` `f` is already C¹ at the origin.
    pub fn new(base: SemiSmoothNonlinearity, eps: f64) -> Result<Self> {
        if !(eps > 0.0 && eps < 1.0) {
            return Err(Error::Config(format!("eps must lie in (0, 1), got {eps}")));
        }
        let scale = base.beta * pow_nonneg(eps, 2.0 * base.sigma - 2.0);
        let mut q_coeffs = [0.0; 4];
        for (j, q) in q_coeffs.iter_mut().enumerate() {
            *q = scale * gen_binom(j as u32, base.sigma)?;
        }
        Ok(Self {
            base,
            eps,
            q_coeffs,
        })
    }

    /// Same as [`new`](Self::new) but with caller-supplied `Q_ε`
    /// coefficients. Used for fault injection in the self-test.
    pub fn with_coefficients(base: SemiSmoothNonlinearity, eps: f64, q_coeffs: [f64; 4]) -> Result<Self> {
        let mut r = Self::new(base, eps)?;
        r.q_coeffs = q_coeffs;
        Ok(r)
    }

    #[inline]
    pub fn base(&self) -> &SemiSmoothNonlinearity {
        &self.base
    }

    #[inline]
    pub fn eps(&self) -> f64 {
        self.eps
    }

    #[inline]
    pub fn q_coefficients(&self) -> [f64; 4] {
        self.q_coeffs
    }

    #[inline]
    pub fn junction(&self) -> f64 {
        self.eps * self.eps
    }

    /// k-th derivative of `Q_ε` with respect to `ρ`, k = 0..3.
    fn q_deriv(&self, rho: f64, k: usize) -> f64 {
        let e2 = self.junction();
        let u = 1.0 - rho / e2;
        // d^k/du^k of sum q_j u^j, evaluated by Horner
        let mut acc = 0.0;
        for j in (k..4).rev() {
            let falling = ((j - k + 1)..=j).fold(1.0, |a, m| a * m as f64);
            acc = acc * u + self.q_coeffs[j] * falling;
        }
        acc * (-1.0 / e2).powi(k as i32)
    }

    /// `Q_ε(ρ)`.
    pub fn q(&self, rho: f64) -> f64 {
        self.q_deriv(rho, 0)
    }

    /// k-th derivative (k = 0..3) of `ρ Q_ε(ρ)`: `k Q^{(k-1)} + ρ Q^{(k)}`.
    fn poly_branch(&self, rho: f64, k: usize) -> f64 {
        let lower = if k == 0 { 0.0 } else { k as f64 * self.q_deriv(rho, k - 1) };
        lower + rho * self.q_deriv(rho, k)
    }

    fn power_branch(&self, rho: f64, k: usize) -> f64 {
        if k == 0 {
            self.base.value_unchecked(rho)
        } else {
            self.base.derivative(rho, k as u32).unwrap()
        }
    }

    pub fn value(&self, rho: f64) -> Result<f64> {
        check_rho(rho)?;
        Ok(if rho >= self.junction() {
            self.base.value_unchecked(rho)
        } else {
            rho * self.q(rho)
        })
    }

    /// Analytic k-th derivative (k = 1..3). At `ρ = ε²` the power-law side is used.
    pub fn derivative(&self, rho: f64, k: u32) -> Result<f64> {
        check_rho(rho)?;
        if !(1..=3).contains(&k) {
            return Err(Error::Domain(format!("derivative order must be 1..3, got {k}")));
        }
        let branch = if rho >= self.junction() {
            Branch::PowerLaw
        } else {
            Branch::Polynomial
        };
        self.derivative_on(rho, k, branch)
    }

    /// k-th derivative (k = 0..3) evaluated with the formula of a given branch,
    /// regardless of which side of the junction `ρ` lies on.
    pub fn derivative_on(&self, rho: f64, k: u32, branch: Branch) -> Result<f64> {
        check_rho(rho)?;
        if k > 3 {
            return Err(Error::Domain(format!("derivative order must be 0..3, got {k}")));
        }
        Ok(match branch {
            Branch::Polynomial => self.poly_branch(rho, k as usize),
            Branch::PowerLaw => {
                if rho == 0.0 && k > 0 {
                    return Err(Error::Domain("power-law derivative at rho = 0".into()));
                }
                self.power_branch(rho, k as usize)
            }
        })
    }

    /// Relative mismatch of the one-sided k-th derivatives at `ρ = ε²`, k = 0..3.
    pub fn junction_mismatch(&self) -> [f64; 4] {
        let e2 = self.junction();
        let mut out = [0.0; 4];
        for (k, o) in out.iter_mut().enumerate() {
            let left = self.poly_branch(e2, k);
            let right = self.power_branch(e2, k);
            let scale = left.abs().max(right.abs());
            *o = if scale == 0.0 { 0.0 } else { (left - right).abs() / scale };
        }
        out
    }
}

/// Density sample set used to certify the regularization: `ρ = 0`,
/// 400 log-spaced points on `[1e-16, 1e2]`, and `ε²(1 ± 2^{-k})` for
/// `k = 1..20`. Sorted ascending.
pub fn certification_samples(eps: f64) -> Vec<f64> {
    let mut rho = vec![0.0];
    let count = 400;
    for i in 0..count {
        let t = i as f64 / (count - 1) as f64;
        rho.push(10f64.powf(-16.0 + 18.0 * t));
    }
    let e2 = eps * eps;
    for k in 1..=20 {
        let d = 2f64.powi(-k);
        rho.push(e2 * (1.0 - d));
        rho.push(e2 * (1.0 + d));
    }
    rho.push(e2);
    rho.sort_by(f64::total_cmp);
    rho
}

/// Outcome of sampling the regularization bounds for one `(β, σ, ε)`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct RegularizationCertificate {
    pub beta: f64,
    pub sigma: f64,
    pub eps: f64,
    pub samples: usize,
    /// `f = f_ε` bit-for-bit at every sample with `ρ ≥ ε²`.
    pub exact_above_junction: bool,
    /// `max_{ρ<ε²} |f - f_ε| / (|β| (1 + S_σ) ε^{2σ})`; must be ≤ 1.
    pub approximation_ratio: f64,
    /// `max_ρ |f_ε(ρ)| / (|β| max(1, S_σ) ρ^σ)`; must be ≤ 1.
    pub growth_ratio: f64,
    /// Relative one-sided derivative mismatch at `ρ = ε²`, k = 0..3.
    pub junction_mismatch: [f64; 4],
    /// Monitored only: sup of the first-derivative bound ratio with `C = 1`.
    pub c2_ratio: f64,
    /// Monitored only: sup of `(|f_ε'| + |ρ f_ε''| + |ρ² f_ε'''|) ε^{2-2σ}`.
    pub c3_ratio: f64,
}

pub const JUNCTION_TOLERANCE: f64 = 1e-8;

impl RegularizationCertificate {
    pub fn passes(&self) -> bool {
        self.exact_above_junction
            && self.approximation_ratio <= 1.0
            && self.growth_ratio <= 1.0
            && self.junction_passes()
    }

    pub fn junction_passes(&self) -> bool {
        self.junction_mismatch.iter().all(|&m| m <= JUNCTION_TOLERANCE)
    }
}

pub fn certify(rnl: &RegularizedNonlinearity) -> RegularizationCertificate {
    let base = rnl.base();
    let (beta, sigma, eps) = (base.beta(), base.sigma(), rnl.eps());
    let e2 = rnl.junction();
    let s_sigma = binom_abs_sum(sigma);
    let approx_bound = beta.abs() * (1.0 + s_sigma) * pow_nonneg(eps, 2.0 * sigma);
    let growth_const = beta.abs() * s_sigma.max(1.0);
    let samples = certification_samples(eps);

    let mut exact = true;
    let mut approximation_ratio: f64 = 0.0;
    let mut growth_ratio: f64 = 0.0;
    let mut c2_ratio: f64 = 0.0;
    let mut c3_ratio: f64 = 0.0;
    for &rho in &samples {
        let fe = rnl.value(rho).unwrap();
        let f = base.value_unchecked(rho);
        if rho >= e2 {
            exact &= f.to_bits() == fe.to_bits();
        } else if approx_bound > 0.0 {
            approximation_ratio = approximation_ratio.max((f - fe).abs() / approx_bound);
        }
        if rho > 0.0 && growth_const > 0.0 {
            growth_ratio = growth_ratio.max(fe.abs() / (growth_const * pow_nonneg(rho, sigma)));
        }
        if rho > 0.0 {
            let d1 = rnl.derivative(rho, 1).unwrap();
            let d2 = rnl.derivative(rho, 2).unwrap();
            let d3 = rnl.derivative(rho, 3).unwrap();
            let lhs2 = rho.sqrt() * d1.abs() + rho.powf(1.5) * d2.abs();
            let rhs2 = if sigma <= 0.5 {
                pow_nonneg(eps, 2.0 * sigma - 1.0)
            } else {
                pow_nonneg(rho, sigma - 0.5)
            };
            c2_ratio = c2_ratio.max(lhs2 / rhs2);
            let lhs3 = d1.abs() + rho * d2.abs() + rho * rho * d3.abs();
            c3_ratio = c3_ratio.max(lhs3 * pow_nonneg(eps, 2.0 - 2.0 * sigma));
        }
    }
    RegularizationCertificate {
        beta,
        sigma,
        eps,
        samples: samples.len(),
        exact_above_junction: exact,
        approximation_ratio,
        growth_ratio,
        junction_mismatch: rnl.junction_mismatch(),
        c2_ratio,
        c3_ratio,
    }
}
