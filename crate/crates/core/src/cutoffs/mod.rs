//! IMS partitions of unity with pointwise localization-error bounds.
//!
//! Both constructions glue a C¹ smoothstep transition to a logarithmic
//! profile. The logarithmic part is what lets `|∇χ|²` decay like `ε/r²`;
//! its extent grows like `exp(1/ε)`, so the outer radius and the inner
//! aperture are stored as logarithms.

mod checks;
mod cone;
mod radial;

pub use checks::{check_cone_profile, check_radial_profile, ProfileCheck, FD_STEP, JOINT_GAP};
pub use cone::{build_cone_cutoff, verify_cone_bound, ConeBoundReport, ConeCutoffPair, ConeProfilePoint};
pub use radial::{
    build_radial_cutoff, verify_radial_bound, verify_radial_bound_on, RadialBoundReport, RadialCutoffPair,
};

/// Bound slack accepted by the verifiers.
pub const BOUND_TOL: f64 = 1e-9;

pub(crate) fn smoothstep(tau: f64) -> f64 {
    tau * tau * (3.0 - 2.0 * tau)
}

pub(crate) fn smoothstep_deriv(tau: f64) -> f64 {
    6.0 * tau * (1.0 - tau)
}
