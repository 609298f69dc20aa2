//! Partition-of-unity and derivative cross-checks for both profiles.

use serde::{Deserialize, Serialize};

use super::{ConeCutoffPair, RadialCutoffPair};
use crate::error::{arg, Result};

/// Centered-difference step in the log variable (a relative step in `r` or `t`).
pub const FD_STEP: f64 = 1e-6;
/// Points closer than this (in the log variable) to a joint are skipped by
/// the derivative check, where the profiles are only one-sided smooth.
pub const JOINT_GAP: f64 = 1e-3;
/// Derivatives smaller than this are compared absolutely.
const DERIV_FLOOR: f64 = 1e-3;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProfileCheck {
    /// `max |a² + b² − 1|` over the sampled points.
    pub unity_defect: f64,
    /// Largest relative disagreement between analytic and centered-difference
    /// derivatives.
    pub derivative_error: f64,
    pub points: usize,
    pub derivative_points: usize,
}

/// `eval(l)` returns `(a, b, a′, b′)` with derivatives taken in the log variable.
fn check(
    lo: f64,
    hi: f64,
    joints: &[f64],
    points: usize,
    eval: impl Fn(f64) -> (f64, f64, f64, f64),
) -> Result<ProfileCheck> {
    if points < 2 {
        return arg("profile check needs at least two points");
    }
    let mut out = ProfileCheck {
        unity_defect: 0.0,
        derivative_error: 0.0,
        points,
        derivative_points: 0,
    };
    for k in 0..points {
        let l = lo + (hi - lo) * k as f64 / (points - 1) as f64;
        let (a, b, da, db) = eval(l);
        out.unity_defect = out.unity_defect.max((a * a + b * b - 1.0).abs());
        if joints.iter().any(|j| (l - j).abs() <= JOINT_GAP) {
            continue;
        }
        let (a1, b1, _, _) = eval(l + FD_STEP);
        let (a0, b0, _, _) = eval(l - FD_STEP);
        let scale = da.abs().max(db.abs()).max(DERIV_FLOOR);
        let ea = ((a1 - a0) / (2.0 * FD_STEP) - da).abs() / scale;
        let eb = ((b1 - b0) / (2.0 * FD_STEP) - db).abs() / scale;
        out.derivative_error = out.derivative_error.max(ea).max(eb);
        out.derivative_points += 1;
    }
    Ok(out)
}

/// Sample `ln r` uniformly over `[ln b − 1, ln b̃ + 1]`.
pub fn check_radial_profile(pair: &RadialCutoffPair, points: usize) -> Result<ProfileCheck> {
    let joints = [pair.ln_b(), pair.ln_b_prime(), pair.ln_b_tilde()];
    check(pair.ln_b() - 1.0, pair.ln_b_tilde() + 1.0, &joints, points, |l| {
        let (a, b) = pair.chi_at_log(l);
        let (da, db) = pair.scaled_derivs_at_log(l);
        (a, b, da, db)
    })
}

/// Sample `ln t` uniformly over `[ln κ′ − 1, ln κ + 1]`.
pub fn check_cone_profile(pair: &ConeCutoffPair, points: usize) -> Result<ProfileCheck> {
    let joints = [pair.ln_kappa_prime(), pair.kappa_second().ln(), pair.kappa().ln()];
    check(pair.ln_kappa_prime() - 1.0, pair.kappa().ln() + 1.0, &joints, points, |l| {
        let p = pair.profile_at_log(l);
        (p.u, p.v, p.t_du, p.t_dv)
    })
}
