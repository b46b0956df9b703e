//! Sine-spectral discretization of `(a, b)` with homogeneous Dirichlet
//! boundaries: grids, the DST-I pair, projections and norms.

pub mod checkpoint;
mod field;
mod grid;
mod transform;

pub use field::{l2_norm_nodal, lp_norm_nodal, LpExponent, NodalField, SpectralField};
pub use grid::Grid1D;
pub use transform::{dst_analyze, dst_synthesize, SineTransform};
