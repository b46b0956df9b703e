//! Time-splitting sine pseudospectral (TSSP) solver for the nonlinear
//! Schrödinger equation
//!
//! ```text
//! i ψ_t = -ψ_xx + V(x) ψ + β |ψ|^{2σ} ψ,   x ∈ (a, b),   ψ(a) = ψ(b) = 0,
//! ```
//!
//! with a power nonlinearity that is only Hölder continuous at the origin
//! when `0 < σ < 1`. The crate provides the discretization, the Lie and
//! Strang steppers, conserved quantities and error norms, the local C³
//! regularization of the nonlinearity, and a convergence-study harness.

pub mod error;
pub mod experiments;
pub mod nonlinearity;
pub mod observables;
pub mod propagators;
pub mod selftest;
pub mod spectral;

pub use error::{Error, Result};
