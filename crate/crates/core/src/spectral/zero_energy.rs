//! Zero-energy solutions, shooting refinement of the critical coupling and
//! decay-exponent fits.
//!
//! The radial equation at `E = 0` is integrated in `x = ln r`:
//! `ψ_xx = −(d−2)ψ_x + (l(l+d−2) + r²V/(1−ε))ψ`, starting from the regular
//! behaviour `ψ ~ r^l`. Beyond the support radius the solution is a
//! combination `A·r^{−s₋} + B·r^{−s₊}`; the critical coupling is where `A`
//! changes sign.

use serde::{Deserialize, Serialize};

use super::potential::Shape;
use crate::error::{arg, Error, Result};
use crate::hardy::{classify_decay, Classification};

/// RK4 steps per unit of `ln r`.
const STEPS_PER_LOG_UNIT: f64 = 400.0;
/// Integration starts at this fraction of the potential's length scale.
const START_FRACTION: f64 = 1e-8;
/// Renormalise whenever the state exceeds this magnitude.
const RENORM_THRESHOLD: f64 = 1e100;
/// Stored samples per unit of `ln r`.
const SAMPLES_PER_LOG_UNIT: f64 = 20.0;
/// Maximum absolute residual of `ln|ψ|` accepted by a fit.
pub const FIT_NONLINEARITY_TOL: f64 = 1e-2;
/// Half-width in `s` of the band classified as marginal by fits.
pub const FIT_MARGINAL_BAND: f64 = 0.05;
/// Fraction of the growing branch at the end of the span above which the
/// solution is flagged.
const GROWTH_FLAG: f64 = 1e-3;

#[derive(Debug, Clone, Copy)]
struct Equation {
    shape: Shape,
    d: u32,
    l: u32,
    lambda: f64,
    kin: f64,
}

impl Equation {
    fn rhs(&self, x: f64, psi: f64, p: f64) -> (f64, f64) {
        let r = x.exp();
        let l = self.l as f64;
        let angular = l * (l + self.d as f64 - 2.0);
        let pot = r * r * self.shape.value(r, self.lambda) / self.kin;
        (p, -(self.d as f64 - 2.0) * p + (angular + pot) * psi)
    }

    /// RK4 from `x0` to `x1`, invoking `visit(x, ψ, p, log_scale)` after every step.
    fn integrate(
        &self,
        state: &mut (f64, f64, f64),
        x0: f64,
        x1: f64,
        mut visit: impl FnMut(f64, f64, f64, f64),
    ) {
        // fixed step anchored at x0 plus a shorter final step, so extending
        // x1 leaves every earlier sample unchanged
        let h = 1.0 / STEPS_PER_LOG_UNIT;
        let full = ((x1 - x0) / h).floor() as usize;
        let steps = if x1 - (x0 + full as f64 * h) > 1e-9 * h { full + 1 } else { full };
        // stages never touch the segment ends, so a jump in V at a segment
        // boundary is seen from the correct side
        let nudge = 1e-9 * h;
        let at = |x: f64| x.clamp(x0 + nudge, x1 - nudge);
        let (ref mut psi, ref mut p, ref mut log_scale) = *state;
        for k in 0..steps {
            let x = x0 + k as f64 * h;
            let h = h.min(x1 - x);
            let (a1, b1) = self.rhs(at(x), *psi, *p);
            let (a2, b2) = self.rhs(at(x + 0.5 * h), *psi + 0.5 * h * a1, *p + 0.5 * h * b1);
            let (a3, b3) = self.rhs(at(x + 0.5 * h), *psi + 0.5 * h * a2, *p + 0.5 * h * b2);
            let (a4, b4) = self.rhs(at(x + h), *psi + h * a3, *p + h * b3);
            *psi += h / 6.0 * (a1 + 2.0 * a2 + 2.0 * a3 + a4);
            *p += h / 6.0 * (b1 + 2.0 * b2 + 2.0 * b3 + b4);
            if psi.abs().max(p.abs()) > RENORM_THRESHOLD {
                *psi /= RENORM_THRESHOLD;
                *p /= RENORM_THRESHOLD;
                *log_scale += RENORM_THRESHOLD.ln();
            }
            visit(x + h, *psi, *p, *log_scale);
        }
    }

    fn start(&self) -> (f64, f64, f64) {
        let x0 = (START_FRACTION * self.shape.length_scale()).ln();
        let l = self.l as f64;
        // ψ = r^l with the scale carried separately
        (1.0, l, l * x0)
    }

    fn x_start(&self) -> f64 {
        (START_FRACTION * self.shape.length_scale()).ln()
    }
}

fn exponents(shape: &Shape, d: u32, l: u32) -> Result<(f64, f64)> {
    shape
        .far_exponents(d, l)
        .ok_or_else(|| Error::Argument("zero-energy branches need an exact power-law tail".into()))
}

fn check(shape: &Shape, d: u32, epsilon: f64) -> Result<()> {
    shape.validate()?;
    if d < 3 {
        return arg(format!("dimension must be at least 3, got {d}"));
    }
    if !(0.0..1.0).contains(&epsilon) {
        return arg(format!("ε must lie in [0, 1), got {epsilon}"));
    }
    Ok(())
}

/// Sign-carrying coefficient of the slower branch `r^{−s₋}` at the support
/// radius, relative to `|ψ|` there.
pub fn growing_branch_coefficient(shape: Shape, d: u32, l: u32, lambda: f64, epsilon: f64) -> Result<f64> {
    check(&shape, d, epsilon)?;
    let (s_minus, s_plus) = exponents(&shape, d, l)?;
    let eq = Equation {
        shape,
        d,
        l,
        lambda,
        kin: 1.0 - epsilon,
    };
    let mut state = eq.start();
    eq.integrate(&mut state, eq.x_start(), shape.support_radius().ln(), |_, _, _, _| {});
    let (psi, p, _) = state;
    Ok((s_plus * psi + p) / ((s_plus - s_minus) * psi.abs().max(f64::MIN_POSITIVE)))
}

/// Refine a critical coupling estimate by bisection on the sign of the
/// slower branch coefficient, searching within ±`rel_window` of `guess`.
pub fn refine_critical_coupling(shape: Shape, d: u32, guess: f64, rel_window: f64) -> Result<f64> {
    if !(guess > 0.0 && rel_window > 0.0 && rel_window < 1.0) {
        return arg("refinement needs a positive guess and a window in (0, 1)");
    }
    let f = |lambda: f64| growing_branch_coefficient(shape, d, 0, lambda, 0.0);
    let (mut lo, mut hi) = (guess * (1.0 - rel_window), guess * (1.0 + rel_window));
    let (flo, fhi) = (f(lo)?, f(hi)?);
    if flo.signum() == fhi.signum() {
        return Err(Error::Bracketing { lo, hi });
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid)?.signum() == flo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZeroEnergySolution {
    pub d: u32,
    pub l: u32,
    pub lambda: f64,
    pub r: Vec<f64>,
    /// `ln|ψ(r)|` including the renormalisation scale.
    pub ln_abs_psi: Vec<f64>,
    /// Sign of `ψ(r)`.
    pub sign: Vec<i8>,
    /// Share of the slower branch in `ψ` at the end of the span.
    pub growing_fraction: f64,
    /// `true` when the slower branch visibly contaminates the tail.
    pub growth_flagged: bool,
}

impl ZeroEnergySolution {
    /// `ψ(r)`; underflows to zero where the magnitude is not representable.
    pub fn psi(&self) -> Vec<f64> {
        self.ln_abs_psi
            .iter()
            .zip(&self.sign)
            .map(|(l, &s)| s as f64 * l.exp())
            .collect()
    }

    /// `ln|u(r)|` with `u = r^{(d−1)/2}ψ`.
    pub fn ln_abs_u(&self) -> Vec<f64> {
        let half = (self.d as f64 - 1.0) / 2.0;
        self.r
            .iter()
            .zip(&self.ln_abs_psi)
            .map(|(r, l)| l + half * r.ln())
            .collect()
    }
}

/// Integrate the zero-energy equation at coupling `lambda` out to `r_end`,
/// keeping samples on a logarithmic grid.
pub fn zero_energy_solution(shape: Shape, d: u32, lambda: f64, r_end: f64) -> Result<ZeroEnergySolution> {
    check(&shape, d, 0.0)?;
    let support = shape.support_radius();
    if !(r_end > support) {
        return arg(format!("r_end = {r_end} must exceed the support radius {support}"));
    }
    let eq = Equation {
        shape,
        d,
        l: 0,
        lambda,
        kin: 1.0,
    };
    let mut sol = ZeroEnergySolution {
        d,
        l: 0,
        lambda,
        r: Vec::new(),
        ln_abs_psi: Vec::new(),
        sign: Vec::new(),
        growing_fraction: 0.0,
        growth_flagged: false,
    };
    let stride = (STEPS_PER_LOG_UNIT / SAMPLES_PER_LOG_UNIT) as usize;
    let mut step = 0usize;
    let mut record = |x: f64, psi: f64, _p: f64, scale: f64| {
        step += 1;
        if step % stride == 0 {
            sol.r.push(x.exp());
            sol.ln_abs_psi.push(psi.abs().ln() + scale);
            sol.sign.push(if psi < 0.0 { -1 } else { 1 });
        }
    };
    let mut state = eq.start();
    let x_mid = support.ln();
    eq.integrate(&mut state, eq.x_start(), x_mid, &mut record);
    eq.integrate(&mut state, x_mid, r_end.ln(), &mut record);
    if let Some((s_minus, s_plus)) = shape.far_exponents(d, 0) {
        let (psi, p, _) = state;
        let fraction = ((s_plus * psi + p) / ((s_plus - s_minus) * psi)).abs();
        sol.growing_fraction = fraction;
        sol.growth_flagged = !(fraction < GROWTH_FLAG);
    }
    Ok(sol)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecayFit {
    /// Fitted exponent in `|ψ| ~ r^{−s}`.
    pub s: f64,
    pub stderr: f64,
    pub classification: Classification,
    pub points: usize,
    /// Largest absolute residual of `ln|ψ|` about the fitted line.
    pub max_residual: f64,
    /// `false` when the residual exceeds the nonlinearity threshold.
    pub accepted: bool,
    pub warning: Option<String>,
}

/// Least-squares slope of `ln|ψ|` against `ln r` over `[r_lo, r_hi]`.
pub fn fit_decay_exponent(solution: &ZeroEnergySolution, window: (f64, f64)) -> Result<DecayFit> {
    let (r_lo, r_hi) = window;
    if !(0.0 < r_lo && r_lo < r_hi) {
        return arg(format!("fit window must satisfy 0 < r_lo < r_hi, got ({r_lo}, {r_hi})"));
    }
    let idx: Vec<usize> = (0..solution.r.len())
        .filter(|&i| solution.r[i] >= r_lo && solution.r[i] <= r_hi)
        .collect();
    if idx.len() < 3 {
        return Err(Error::Fit(format!("only {} samples inside the window", idx.len())));
    }
    let first = solution.sign[idx[0]];
    if idx.iter().any(|&i| solution.sign[i] != first) {
        return Err(Error::Fit("ψ changes sign inside the fit window".into()));
    }
    let xs: Vec<f64> = idx.iter().map(|&i| solution.r[i].ln()).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| solution.ln_abs_psi[i]).collect();
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let residuals: Vec<f64> = xs.iter().zip(&ys).map(|(x, y)| y - my - slope * (x - mx)).collect();
    let ssr: f64 = residuals.iter().map(|e| e * e).sum();
    let stderr = (ssr / (n - 2.0) / sxx).sqrt();
    let max_residual = residuals.iter().fold(0.0f64, |m, e| m.max(e.abs()));
    let s = -slope;
    let warning = (r_hi / r_lo < 10.0).then(|| format!("fit window spans less than one decade ({r_lo}, {r_hi})"));
    Ok(DecayFit {
        s,
        stderr,
        classification: classify_decay(solution.d, s, FIT_MARGINAL_BAND),
        points: idx.len(),
        max_residual,
        accepted: max_residual <= FIT_NONLINEARITY_TOL,
        warning,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::FRAC_PI_2;

    const WELL: Shape = Shape::SquareWell { depth: 1.0, radius: 1.0 };

    #[test]
    fn shooting_recovers_the_three_dimensional_well_threshold() {
        let lambda = refine_critical_coupling(WELL, 3, 2.4, 0.05).unwrap();
        assert!((lambda - FRAC_PI_2 * FRAC_PI_2).abs() < 1e-7, "{lambda}");
    }

    #[test]
    fn free_solution_is_constant() {
        let sol = zero_energy_solution(WELL, 3, 0.0, 100.0).unwrap();
        assert!(sol.ln_abs_psi.iter().all(|l| l.abs() < 1e-10));
        assert!(sol.growth_flagged);
    }

    #[test]
    fn sign_change_rejects_the_fit() {
        // beyond the second threshold ψ has a node inside the well but stays
        // one-signed outside; a strongly supercritical well oscillates inside
        let sol = zero_energy_solution(WELL, 3, 60.0, 100.0).unwrap();
        assert!(matches!(fit_decay_exponent(&sol, (0.05, 1.0)), Err(Error::Fit(_))));
    }

    #[test]
    fn short_window_warns() {
        let lambda = refine_critical_coupling(WELL, 3, 2.4, 0.05).unwrap();
        let sol = zero_energy_solution(WELL, 3, lambda, 100.0).unwrap();
        let fit = fit_decay_exponent(&sol, (10.0, 50.0)).unwrap();
        assert!(fit.warning.is_some());
        assert!((fit.s - 1.0).abs() < 1e-6);
    }
}
