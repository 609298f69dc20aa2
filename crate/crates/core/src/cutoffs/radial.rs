//! Radial pair `χ₁ = u(|x|)`, `χ₂ = √(1−u²)` with
//! `|∇χ₁|² + |∇χ₂|² ≤ ε|x|⁻²` on `[b, b̃]`.
//!
//! `u = cos(θ₀ s(τ))` on `[b, b′]` with `θ₀ = √ε/2`, then
//! `u = u(b′)·ln(r/b̃)/ln(b′/b̃)` on `[b′, b̃]`.

use serde::{Deserialize, Serialize};

use super::{smoothstep, smoothstep_deriv};
use crate::error::{arg, Result};

/// `θ₀ = RADIAL_ANGLE_FACTOR·√ε`.
const RADIAL_ANGLE_FACTOR: f64 = 0.5;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RadialCutoffPair {
    epsilon: f64,
    d: u32,
    ln_b: f64,
    ln_b_prime: f64,
    ln_b_tilde: f64,
    /// Angle reached by the transition profile at `b′`; `u(b′) = cos θ₀`.
    theta0: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBoundReport {
    pub max_ratio: f64,
    /// Logarithm of the radius where the maximum was attained.
    pub argmax_ln_radius: f64,
    pub grid_points: usize,
}

/// `max_τ [6τ(1−τ)(1/δ+τ)]²·c²`: the transition-regime bound ratio for `b′ = b(1+δ)`.
fn transition_ratio(delta: f64) -> f64 {
    let a = 2.0 * delta - 2.0;
    let tau = (a + (a * a + 12.0 * delta).sqrt()) / (6.0 * delta);
    let g = smoothstep_deriv(tau) * (1.0 / delta + tau);
    (RADIAL_ANGLE_FACTOR * g).powi(2)
}

/// Smallest (up to bisection resolution) `δ` with `transition_ratio(δ) ≤ 1`.
fn solve_delta() -> f64 {
    let (mut lo, mut hi) = (1e-3, 1.0);
    while transition_ratio(hi) > 1.0 {
        hi *= 2.0;
    }
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if transition_ratio(mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// Build the radial pair for error level `ε`, inner radius `b` and dimension `d`.
pub fn build_radial_cutoff(epsilon: f64, b: f64, d: u32) -> Result<RadialCutoffPair> {
    if !(epsilon > 0.0 && epsilon.is_finite()) {
        return arg(format!("ε must be positive, got {epsilon}"));
    }
    if !(b > 0.0 && b.is_finite()) {
        return arg(format!("b must be positive, got {b}"));
    }
    if d < 3 {
        return arg(format!("dimension must be at least 3, got {d}"));
    }
    // for ε > 1 the ε = 1 construction already satisfies the weaker bound
    let theta0 = RADIAL_ANGLE_FACTOR * epsilon.min(1.0).sqrt();
    let ln_b = b.ln();
    let ln_b_prime = ln_b + solve_delta().ln_1p();
    let ln_b_tilde = ln_b_prime + 1.0 / (theta0.tan() * epsilon.sqrt());
    Ok(RadialCutoffPair {
        epsilon,
        d,
        ln_b,
        ln_b_prime,
        ln_b_tilde,
        theta0,
    })
}

impl RadialCutoffPair {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn dimension(&self) -> u32 {
        self.d
    }

    pub fn b(&self) -> f64 {
        self.ln_b.exp()
    }

    pub fn b_prime(&self) -> f64 {
        self.ln_b_prime.exp()
    }

    /// `b̃`; `+∞` when it exceeds the floating-point range.
    pub fn b_tilde(&self) -> f64 {
        self.ln_b_tilde.exp()
    }

    pub fn ln_b(&self) -> f64 {
        self.ln_b
    }

    pub fn ln_b_prime(&self) -> f64 {
        self.ln_b_prime
    }

    pub fn ln_b_tilde(&self) -> f64 {
        self.ln_b_tilde
    }

    pub fn theta0(&self) -> f64 {
        self.theta0
    }

    /// Copy with `b̃` multiplied by `factor` (negative controls use `factor < 1`).
    pub fn with_b_tilde_scaled(&self, factor: f64) -> Self {
        Self {
            ln_b_tilde: self.ln_b_tilde + factor.ln(),
            ..self.clone()
        }
    }

    /// `(χ₁, χ₂)` at radius `e^{ln_r}`.
    pub fn chi_at_log(&self, ln_r: f64) -> (f64, f64) {
        let (u, v, _, _) = self.eval(ln_r);
        (u, v)
    }

    /// `(χ₁, χ₂)` at radius `r ≥ 0`.
    pub fn chi(&self, r: f64) -> (f64, f64) {
        if r <= 0.0 {
            return (1.0, 0.0);
        }
        self.chi_at_log(r.ln())
    }

    /// `(r·χ₁′, r·χ₂′)` at radius `e^{ln_r}`. Scaling by `r` keeps the values
    /// finite far out on the logarithmic profile.
    pub fn scaled_derivs_at_log(&self, ln_r: f64) -> (f64, f64) {
        let (_, _, du, dv) = self.eval(ln_r);
        (du, dv)
    }

    /// `(χ₁′, χ₂′)` at radius `r > 0`.
    pub fn derivs(&self, r: f64) -> (f64, f64) {
        if r <= 0.0 {
            return (0.0, 0.0);
        }
        let (du, dv) = self.scaled_derivs_at_log(r.ln());
        (du / r, dv / r)
    }

    /// `r²(|χ₁′|² + |χ₂′|²)/ε`.
    pub fn bound_ratio_at_log(&self, ln_r: f64) -> f64 {
        let (_, _, du, dv) = self.eval(ln_r);
        (du * du + dv * dv) / self.epsilon
    }

    fn eval(&self, ln_r: f64) -> (f64, f64, f64, f64) {
        if ln_r <= self.ln_b {
            return (1.0, 0.0, 0.0, 0.0);
        }
        if ln_r >= self.ln_b_tilde {
            return (0.0, 1.0, 0.0, 0.0);
        }
        if ln_r < self.ln_b_prime {
            let (b, bp) = (self.b(), self.b_prime());
            let r = ln_r.exp();
            let width = bp - b;
            let tau = ((r - b) / width).clamp(0.0, 1.0);
            let angle = self.theta0 * smoothstep(tau);
            let rate = r * self.theta0 * smoothstep_deriv(tau) / width;
            let (sin, cos) = angle.sin_cos();
            return (cos, sin, -rate * sin, rate * cos);
        }
        let u0 = self.theta0.cos();
        let window = self.ln_b_tilde - self.ln_b_prime;
        let u = u0 * (self.ln_b_tilde - ln_r) / window;
        let v = (1.0 - u * u).sqrt();
        let du = -u0 / window;
        (u, v, du, -u * du / v)
    }
}

/// Maximum bound ratio over a geometric grid on `[b(1−1e−6), b̃(1+1e−6)]`.
///
/// Half the points cover the transition `[b, b′]`, half the logarithmic tail;
/// the transition maximiser and both joints are always included.
pub fn verify_radial_bound(pair: &RadialCutoffPair, grid_points: usize) -> Result<RadialBoundReport> {
    if grid_points < 100 {
        return arg(format!("grid_points must be at least 100, got {grid_points}"));
    }
    let lo = pair.ln_b + (-1e-6f64).ln_1p();
    let hi = pair.ln_b_tilde + 1e-6f64.ln_1p();
    let half = grid_points / 2;
    let mut grid = log_grid(lo, pair.ln_b_prime, half);
    grid.extend(log_grid(pair.ln_b_prime, hi, grid_points - half));
    grid.extend([pair.ln_b, pair.ln_b_prime, pair.ln_b_tilde]);
    Ok(max_over(pair, &grid))
}

/// Maximum bound ratio over a geometric grid on `[e^{ln_lo}, e^{ln_hi}]`.
pub fn verify_radial_bound_on(
    pair: &RadialCutoffPair,
    ln_lo: f64,
    ln_hi: f64,
    grid_points: usize,
) -> Result<RadialBoundReport> {
    if grid_points < 2 || !(ln_lo < ln_hi) {
        return arg("need ln_lo < ln_hi and at least two grid points");
    }
    Ok(max_over(pair, &log_grid(ln_lo, ln_hi, grid_points)))
}

fn log_grid(lo: f64, hi: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    let mut grid: Vec<f64> = (0..n).map(|k| lo + (hi - lo) * k as f64 / (n - 1) as f64).collect();
    grid[n - 1] = hi;
    grid
}

fn max_over(pair: &RadialCutoffPair, grid: &[f64]) -> RadialBoundReport {
    let mut report = RadialBoundReport {
        max_ratio: 0.0,
        argmax_ln_radius: grid[0],
        grid_points: grid.len(),
    };
    for &ln_r in grid {
        let ratio = pair.bound_ratio_at_log(ln_r);
        if ratio > report.max_ratio {
            report.max_ratio = ratio;
            report.argmax_ln_radius = ln_r;
        }
    }
    report
}
