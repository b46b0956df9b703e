use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{config, Result};

/// Uniform grid `x_j = a + j h`, `j = 0..=N`, on the interval `(a, b)`.
///
/// The sine basis attached to the grid is `sin(mu_l (x - a))` for
/// `l = 1..N-1` with `mu_l = pi l / (b - a)`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    a: f64,
    b: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(a: f64, b: f64, n: usize) -> Result<Self> {
        if !(a.is_finite() && b.is_finite()) {
            return config(format!("grid endpoints must be finite, got ({a}, {b})"));
        }
        if b <= a {
            return config(format!("grid requires b > a, got a = {a}, b = {b}"));
        }
        if n < 2 {
            return config(format!("grid requires N >= 2, got N = {n}"));
        }
        Ok(Self { a, b, n })
    }

    #[inline]
    pub fn a(&self) -> f64 {
        self.a
    }

    #[inline]
    pub fn b(&self) -> f64 {
        self.b
    }

    /// Number of subintervals `N`.
    #[inline]
    pub fn n(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn length(&self) -> f64 {
        self.b - self.a
    }

    #[inline]
    pub fn h(&self) -> f64 {
        (self.b - self.a) / self.n as f64
    }

    /// Node `x_j`; `x_N` is returned as `b` exactly.
    #[inline]
    pub fn node(&self, j: usize) -> f64 {
        if j == self.n {
            self.b
        } else {
            self.a + j as f64 * self.h()
        }
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..=self.n).map(|j| self.node(j)).collect()
    }

    /// Sine frequency `mu_l = pi l / (b - a)`.
    #[inline]
    pub fn mu(&self, l: usize) -> f64 {
        PI * l as f64 / (self.b - self.a)
    }

    /// `mu_l` for `l = 1..N-1`, stored at index `l - 1`.
    pub fn frequencies(&self) -> Vec<f64> {
        (1..self.n).map(|l| self.mu(l)).collect()
    }

    /// Number of sine modes, `N - 1`.
    #[inline]
    pub fn modes(&self) -> usize {
        self.n - 1
    }

    pub fn same_interval(&self, other: &Grid1D) -> bool {
        self.a == other.a && self.b == other.b
    }

    /// Returns `r` with `fine.n() == r * self.n()` when `fine` refines this
    /// grid dyadically (or trivially, `r == 1`) on the same interval.
    pub fn refinement_ratio(&self, fine: &Grid1D) -> Option<usize> {
        if !self.same_interval(fine) || fine.n % self.n != 0 {
            return None;
        }
        let r = fine.n / self.n;
        r.is_power_of_two().then_some(r)
    }
}
