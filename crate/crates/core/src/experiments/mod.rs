//! Convergence and conservation studies: initial data, Strang reference
//! solves, dyadic sweeps and order fits.

mod fit;
mod initial;
mod study;

pub use fit::{degeneracy_threshold, fit_order, OrderFit};
pub use initial::{make_type1, make_type2, type2_coefficients, InitialData, DEFAULT_DECAY};
pub use study::{
    energy_drift_study, integral_steps, reference_cache_path, reference_key, reference_solution,
    reference_solution_cached, spatial_sweep, temporal_sweep, Axis, EnergyDrift, EnergySeries,
    ReferenceSpec, StudyConfig, SweepResult, SweepRow, ENERGY_HEADER, SWEEP_HEADER,
};
