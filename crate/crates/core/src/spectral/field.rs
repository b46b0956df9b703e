use num_complex::Complex64;

use super::grid::Grid1D;
use crate::error::{Error, Result};

/// Grid values `v_0..v_N` of a wave function, with `v_0 = v_N = 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct NodalField {
    grid: Grid1D,
    values: Vec<Complex64>,
}

/// Sine coefficients `c_1..c_{N-1}` of a member of `X_N`, stored at index `l - 1`.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid1D,
    coeffs: Vec<Complex64>,
}

impl NodalField {
    pub fn new(grid: Grid1D, values: Vec<Complex64>) -> Result<Self> {
        if values.len() != grid.n() + 1 {
            return Err(Error::GridMismatch(format!(
                "nodal field needs {} values, got {}",
                grid.n() + 1,
                values.len()
            )));
        }
        let zero = Complex64::default();
        if values[0] != zero || values[grid.n()] != zero {
            return Err(Error::Domain(
                "nodal field must vanish at both endpoints".into(),
            ));
        }
        Ok(Self { grid, values })
    }

    pub(crate) fn from_parts(grid: Grid1D, values: Vec<Complex64>) -> Self {
        debug_assert_eq!(values.len(), grid.n() + 1);
        Self { grid, values }
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::from_parts(grid, vec![Complex64::default(); grid.n() + 1])
    }

    /// Samples `f` at the interior nodes; endpoint values are set to zero.
    pub fn from_fn(grid: Grid1D, f: impl Fn(f64) -> Complex64) -> Self {
        let n = grid.n();
        let values = (0..=n)
            .map(|j| {
                if j == 0 || j == n {
                    Complex64::default()
                } else {
                    f(grid.node(j))
                }
            })
            .collect();
        Self::from_parts(grid, values)
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    #[inline]
    pub fn values(&self) -> &[Complex64] {
        &self.values
    }

    #[inline]
    pub fn value(&self, j: usize) -> Complex64 {
        self.values[j]
    }

    /// `v_1..v_{N-1}`.
    #[inline]
    pub fn interior(&self) -> &[Complex64] {
        &self.values[1..self.grid.n()]
    }

    #[inline]
    pub fn interior_mut(&mut self) -> &mut [Complex64] {
        let n = self.grid.n();
        &mut self.values[1..n]
    }

    pub fn into_values(self) -> Vec<Complex64> {
        self.values
    }

    /// Restriction to a coarser grid whose nodes are a subset of these.
    pub fn subsample(&self, coarse: &Grid1D) -> Result<NodalField> {
        let r = coarse.refinement_ratio(&self.grid).ok_or_else(|| {
            Error::GridMismatch(format!(
                "cannot restrict N = {} to N = {}",
                self.grid.n(),
                coarse.n()
            ))
        })?;
        let values = (0..=coarse.n()).map(|j| self.values[j * r]).collect();
        Ok(NodalField::from_parts(*coarse, values))
    }
}

impl SpectralField {
    pub fn new(grid: Grid1D, coeffs: Vec<Complex64>) -> Result<Self> {
        if coeffs.len() != grid.modes() {
            return Err(Error::GridMismatch(format!(
                "spectral field needs {} coefficients, got {}",
                grid.modes(),
                coeffs.len()
            )));
        }
        Ok(Self { grid, coeffs })
    }

    pub(crate) fn from_parts(grid: Grid1D, coeffs: Vec<Complex64>) -> Self {
        debug_assert_eq!(coeffs.len(), grid.modes());
        Self { grid, coeffs }
    }

    pub fn zeros(grid: Grid1D) -> Self {
        Self::from_parts(grid, vec![Complex64::default(); grid.modes()])
    }

    #[inline]
    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    #[inline]
    pub fn coefficients(&self) -> &[Complex64] {
        &self.coeffs
    }

    #[inline]
    pub fn coefficients_mut(&mut self) -> &mut [Complex64] {
        &mut self.coeffs
    }

    /// Coefficient of mode `l` (1-based).
    #[inline]
    pub fn coefficient(&self, l: usize) -> Complex64 {
        self.coeffs[l - 1]
    }

    pub fn into_coefficients(self) -> Vec<Complex64> {
        self.coeffs
    }

    /// Pointwise value of `sum_l c_l sin(mu_l (x - a))`.
    pub fn evaluate(&self, x: f64) -> Result<Complex64> {
        let g = &self.grid;
        if !(x >= g.a() && x <= g.b()) {
            return Err(Error::Domain(format!(
                "x = {x} lies outside [{}, {}]",
                g.a(),
                g.b()
            )));
        }
        let s = x - g.a();
        Ok(self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| c * (g.mu(i + 1) * s).sin())
            .sum())
    }

    /// Keeps modes `l < coarse.n()`; exact `L^2` projection onto the coarse space.
    pub fn truncate_to(&self, coarse: &Grid1D) -> Result<SpectralField> {
        coarse.refinement_ratio(&self.grid).ok_or_else(|| {
            Error::GridMismatch(format!(
                "cannot project N = {} onto N = {}",
                self.grid.n(),
                coarse.n()
            ))
        })?;
        Ok(Self::from_parts(*coarse, self.coeffs[..coarse.modes()].to_vec()))
    }

    /// Zero-padding into a refining grid (the inclusion `X_coarse ⊂ X_fine`).
    pub fn embed_into(&self, fine: &Grid1D) -> Result<SpectralField> {
        self.grid.refinement_ratio(fine).ok_or_else(|| {
            Error::GridMismatch(format!(
                "cannot embed N = {} into N = {}",
                self.grid.n(),
                fine.n()
            ))
        })?;
        let mut coeffs = vec![Complex64::default(); fine.modes()];
        coeffs[..self.coeffs.len()].copy_from_slice(&self.coeffs);
        Ok(Self::from_parts(*fine, coeffs))
    }

    /// Continuous `L^2(a, b)` norm, by orthogonality of the sine modes.
    pub fn l2_norm(&self) -> f64 {
        let sum: f64 = self.coeffs.iter().map(|c| c.norm_sqr()).sum();
        (0.5 * self.grid.length() * sum).sqrt()
    }

    /// `||d/dx (series)||_{L^2}`.
    pub fn h1_seminorm(&self) -> f64 {
        let g = &self.grid;
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| g.mu(i + 1).powi(2) * c.norm_sqr())
            .sum();
        (0.5 * g.length() * sum).sqrt()
    }

    /// Full `H^1` norm `sqrt(||u||^2 + ||u'||^2)`.
    pub fn h1_norm(&self) -> f64 {
        self.l2_norm().hypot(self.h1_seminorm())
    }

    /// Full `H^2` norm `sqrt(||u||^2 + ||u'||^2 + ||u''||^2)`.
    pub fn h2_norm(&self) -> f64 {
        let g = &self.grid;
        let sum: f64 = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let m2 = g.mu(i + 1).powi(2);
                (1.0 + m2 + m2 * m2) * c.norm_sqr()
            })
            .sum();
        (0.5 * g.length() * sum).sqrt()
    }

    pub fn sub(&self, other: &SpectralField) -> Result<SpectralField> {
        if self.grid != other.grid {
            return Err(Error::GridMismatch("spectral fields on different grids".into()));
        }
        let coeffs = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a - b).collect();
        Ok(Self::from_parts(self.grid, coeffs))
    }
}

/// Exponent of a discrete `l^p` norm.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum LpExponent {
    Finite(f64),
    Infinity,
}

impl LpExponent {
    pub fn new(p: f64) -> Result<Self> {
        if p.is_nan() || p < 1.0 {
            return Err(Error::Domain(format!("l^p norm needs p >= 1, got {p}")));
        }
        Ok(if p.is_infinite() {
            Self::Infinity
        } else {
            Self::Finite(p)
        })
    }
}

/// `(h sum_{j<N} |v_j|^p)^{1/p}`, or `max_{j<N} |v_j|` for `p = inf`.
pub fn lp_norm_nodal(v: &NodalField, p: LpExponent) -> f64 {
    let n = v.grid().n();
    let vals = &v.values()[..n];
    match p {
        LpExponent::Infinity => vals.iter().map(|z| z.norm()).fold(0.0, f64::max),
        LpExponent::Finite(p) if p == 2.0 => {
            (v.grid().h() * vals.iter().map(|z| z.norm_sqr()).sum::<f64>()).sqrt()
        }
        LpExponent::Finite(p) => {
            (v.grid().h() * vals.iter().map(|z| z.norm().powf(p)).sum::<f64>()).powf(1.0 / p)
        }
    }
}

/// Discrete `l^2` norm on `Y_N`.
pub fn l2_norm_nodal(v: &NodalField) -> f64 {
    lp_norm_nodal(v, LpExponent::Finite(2.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::transform::{dst_analyze, dst_synthesize};
    use std::f64::consts::PI;

    fn grid01(n: usize) -> Grid1D {
        Grid1D::new(0.0, 1.0, n).unwrap()
    }

    fn mode1(n: usize) -> SpectralField {
        let mut c = SpectralField::zeros(grid01(n));
        c.coefficients_mut()[0] = Complex64::new(1.0, 0.0);
        c
    }

    fn pseudo_random(n: usize, seed: u64) -> Vec<Complex64> {
        let mut s = seed.wrapping_add(0x9e37_79b9_7f4a_7c15);
        let mut next = move || {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        };
        (0..n).map(|_| Complex64::new(next(), next())).collect()
    }

    /// Composite Gauss-Legendre (5 points) on `m` panels.
    fn gauss5(a: f64, b: f64, m: usize, f: impl Fn(f64) -> f64) -> f64 {
        let nodes = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        let weights = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_5,
            0.478_628_670_499_366_5,
            0.236_926_885_056_189_1,
            0.236_926_885_056_189_1,
        ];
        let w = (b - a) / m as f64;
        (0..m)
            .map(|k| {
                let mid = a + (k as f64 + 0.5) * w;
                nodes
                    .iter()
                    .zip(&weights)
                    .map(|(x, wt)| wt * f(mid + 0.5 * w * x))
                    .sum::<f64>()
                    * 0.5
                    * w
            })
            .sum()
    }

    #[test]
    fn evaluate_series_cases() {
        let c = mode1(8);
        assert_eq!(c.evaluate(0.0).unwrap().norm(), 0.0);
        assert!((c.evaluate(0.5).unwrap() - Complex64::new(1.0, 0.0)).norm() < 1e-15);
        assert!(c.evaluate(1.5).is_err());
        assert!(c.evaluate(-1e-9).is_err());

        let g = Grid1D::new(-1.0, 2.0, 16).unwrap();
        let coeffs = pseudo_random(15, 3);
        let f = SpectralField::new(g, coeffs.clone()).unwrap();
        let x = g.node(5) + 0.5 * g.h();
        let direct: Complex64 = coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| c * (PI * (i + 1) as f64 * (x + 1.0) / 3.0).sin())
            .sum();
        assert!((f.evaluate(x).unwrap() - direct).norm() < 1e-12);
        // at nodes, agrees with synthesis
        let v = dst_synthesize(&f);
        for j in 0..=16 {
            assert!((f.evaluate(g.node(j)).unwrap() - v.value(j)).norm() < 1e-12);
        }
    }

    #[test]
    fn truncation() {
        let fine = grid01(16);
        let coarse = grid01(8);
        let mut c = SpectralField::zeros(fine);
        c.coefficients_mut()[0] = Complex64::new(0.3, -2.0);
        let t = c.truncate_to(&coarse).unwrap();
        assert_eq!(t.coefficient(1), Complex64::new(0.3, -2.0));

        let mut c = SpectralField::zeros(fine);
        c.coefficients_mut()[9] = Complex64::new(1.0, 1.0);
        let t = c.truncate_to(&coarse).unwrap();
        assert!(t.coefficients().iter().all(|z| z.norm() == 0.0));

        let c = SpectralField::new(fine, pseudo_random(15, 11)).unwrap();
        let t = c.truncate_to(&coarse).unwrap();
        assert!(t.l2_norm() <= c.l2_norm());
        assert_eq!(t.truncate_to(&coarse).unwrap(), t);

        assert!(c.truncate_to(&Grid1D::new(0.0, 2.0, 8).unwrap()).is_err());
        assert!(t.truncate_to(&fine).is_err());
    }

    #[test]
    fn embedding_inverts_truncation() {
        let c = SpectralField::new(grid01(8), pseudo_random(7, 5)).unwrap();
        let e = c.embed_into(&grid01(32)).unwrap();
        assert_eq!(e.truncate_to(&grid01(8)).unwrap(), c);
        assert_eq!(e.l2_norm(), c.l2_norm());
    }

    #[test]
    fn continuous_norms_single_mode() {
        let c = mode1(8);
        assert!((c.l2_norm() - 0.5f64.sqrt()).abs() < 1e-15);
        assert!((c.h1_seminorm() - PI * 0.5f64.sqrt()).abs() < 1e-14);
        let z = SpectralField::zeros(grid01(8));
        assert_eq!(z.l2_norm(), 0.0);
        assert_eq!(z.h1_seminorm(), 0.0);
    }

    #[test]
    fn continuous_norms_match_quadrature() {
        let g = Grid1D::new(-1.0, 1.5, 8).unwrap();
        let coeffs = pseudo_random(7, 21);
        let c = SpectralField::new(g, coeffs.clone()).unwrap();
        let value = |x: f64| -> Complex64 {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * (g.mu(i + 1) * (x - g.a())).sin())
                .sum()
        };
        let deriv = |x: f64| -> Complex64 {
            coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| c * g.mu(i + 1) * (g.mu(i + 1) * (x - g.a())).cos())
                .sum()
        };
        let l2 = gauss5(g.a(), g.b(), 400, |x| value(x).norm_sqr()).sqrt();
        let h1 = gauss5(g.a(), g.b(), 400, |x| deriv(x).norm_sqr()).sqrt();
        assert!((c.l2_norm() - l2).abs() < 1e-10 * l2);
        assert!((c.h1_seminorm() - h1).abs() < 1e-10 * h1);
    }

    #[test]
    fn lp_norms() {
        let g = grid01(8);
        let z = NodalField::zeros(g);
        for p in [1.0, 2.0, 3.5, f64::INFINITY] {
            assert_eq!(lp_norm_nodal(&z, LpExponent::new(p).unwrap()), 0.0);
        }
        let v = NodalField::from_fn(g, |x| Complex64::new((PI * x).sin(), 0.0));
        let l2 = lp_norm_nodal(&v, LpExponent::new(2.0).unwrap());
        assert!((l2 - dst_analyze(&v).l2_norm()).abs() < 1e-12);

        let g = Grid1D::new(0.0, 2.0, 8).unwrap();
        let mut vals = vec![Complex64::default(); 9];
        vals[3] = Complex64::new(2.0, 0.0);
        let v = NodalField::new(g, vals).unwrap();
        assert_eq!(g.h(), 0.25);
        assert_eq!(lp_norm_nodal(&v, LpExponent::Infinity), 2.0);
        assert!((lp_norm_nodal(&v, LpExponent::new(1.0).unwrap()) - 0.5).abs() < 1e-15);
        assert!(LpExponent::new(0.5).is_err());
        assert!(LpExponent::new(f64::NAN).is_err());
    }

    #[test]
    fn discrete_parseval_random() {
        for n in [8usize, 16, 32, 24] {
            let g = Grid1D::new(-2.0, 1.0, n).unwrap();
            let mut vals = pseudo_random(n + 1, n as u64);
            vals[0] = Complex64::default();
            vals[n] = Complex64::default();
            let v = NodalField::new(g, vals).unwrap();
            let lhs = l2_norm_nodal(&v);
            let rhs = dst_analyze(&v).l2_norm();
            assert!((lhs - rhs).abs() < 1e-12 * lhs);
        }
    }

    #[test]
    fn nodal_validation() {
        let g = grid01(4);
        assert!(NodalField::new(g, vec![Complex64::default(); 4]).is_err());
        let mut vals = vec![Complex64::default(); 5];
        vals[4] = Complex64::new(1e-300, 0.0);
        assert!(NodalField::new(g, vals).is_err());
        assert!(SpectralField::new(g, vec![Complex64::default(); 4]).is_err());
    }

    #[test]
    fn subsample_takes_shared_nodes() {
        let fine = grid01(16);
        let v = NodalField::from_fn(fine, |x| Complex64::new(x * (1.0 - x), x));
        let c = v.subsample(&grid01(4)).unwrap();
        for j in 0..=4 {
            assert_eq!(c.value(j), v.value(4 * j));
        }
        assert!(v.subsample(&grid01(6)).is_err());
    }
}
