//! One-particle radial Schrödinger operators: discretisation, Sturm-sequence
//! eigenvalues, critical couplings, zero-energy decay fits and the
//! inverse-square counting model.

mod efimov;
mod potential;
mod radial;
pub mod tridiag;
mod zero_energy;

pub use efimov::{
    count_negative_eigenvalues_critical_model, count_slope, critical_model_count, exact_critical_model_count,
    is_saturated, saturation_threshold, EfimovCount, ThresholdBracket,
};
pub use potential::{PotentialSpec, Shape};
pub use radial::{
    critical_coupling, discretize, epsilon_sweep, lowest_eigenvalues, solve, CriticalCoupling, OuterBoundary,
    RadialGrid, RadialProblem, SpectralMetadata, SpectralReport, EDGE_TOL, MAX_REPORTED_EIGENVALUES,
    WITNESS_EPSILON,
};
pub use tridiag::SymTridiagonal;
pub use zero_energy::{
    fit_decay_exponent, growing_branch_coefficient, refine_critical_coupling, zero_energy_solution, DecayFit,
    ZeroEnergySolution, FIT_MARGINAL_BAND, FIT_NONLINEARITY_TOL,
};
