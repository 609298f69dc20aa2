//! Inductive aperture ladder `κ(l), κ′(l), d(l)` for which same-order cones
//! only meet inside lower-order cones.
//!
//! Given `κ′(l)`, the next rung sets
//! `d²(l+1) = (m³/2M³)·κ′(l)²/(1+κ′(l)²)` and needs `κ(l+1)` with
//!
//! ```text
//! (m³/M³)(κ′(l)² − κ(l+1)²)/(1+κ′(l)²) − κ(l+1)² > d²(l+1) > κ(l+1)²(1+κ(l+1)²).
//! ```
//!
//! The left side decreases and the right side increases in `κ(l+1)`, so the
//! feasible set is an interval `(0, κ_max)`. Each endpoint is found by
//! bisection and `κ(l+1)` is placed at the midpoint; `κ′(l+1) = κ(l+1)/2`.

use serde::{Deserialize, Serialize};

use super::MassSystem;
use crate::error::{arg, Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LadderRung {
    pub l: usize,
    pub kappa: f64,
    pub kappa_prime: f64,
    /// `d²(l)`; undefined on the first rung.
    pub d_squared: Option<f64>,
}

impl LadderRung {
    pub fn d(&self) -> Option<f64> {
        self.d_squared.map(f64::sqrt)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AzsLadder {
    /// `m³/M³` of the system the ladder was built for.
    mass_ratio_cubed: f64,
    rungs: Vec<LadderRung>,
}

fn d_squared_next(c: f64, kp: f64) -> f64 {
    c / 2.0 * kp * kp / (1.0 + kp * kp)
}

fn left_margin(c: f64, kp: f64, k: f64, d2: f64) -> f64 {
    c * (kp * kp - k * k) / (1.0 + kp * kp) - k * k - d2
}

fn right_margin(k: f64, d2: f64) -> f64 {
    d2 - k * k * (1.0 + k * k)
}

/// Largest `k` in `(0, hi]` with `f(k) > 0`, for `f` decreasing with `f(0⁺) > 0`.
fn bisect_upper(f: impl Fn(f64) -> f64, mut hi: f64) -> f64 {
    let mut lo = 0.0;
    if f(hi) > 0.0 {
        return hi;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

impl AzsLadder {
    pub fn rungs(&self) -> &[LadderRung] {
        &self.rungs
    }

    pub fn l_max(&self) -> usize {
        self.rungs.len()
    }

    pub fn mass_ratio_cubed(&self) -> f64 {
        self.mass_ratio_cubed
    }

    /// Rung of order `l` (one-based, as partitions are ordered).
    pub fn rung(&self, l: usize) -> Option<&LadderRung> {
        l.checked_sub(1).and_then(|k| self.rungs.get(k))
    }

    pub fn kappa(&self, l: usize) -> Option<f64> {
        self.rung(l).map(|r| r.kappa)
    }

    pub fn kappa_prime(&self, l: usize) -> Option<f64> {
        self.rung(l).map(|r| r.kappa_prime)
    }

    pub fn d(&self, l: usize) -> Option<f64> {
        self.rung(l).and_then(LadderRung::d)
    }

    /// Assemble a ladder from explicit rungs without validating them.
    ///
    /// Intended for negative controls that need deliberately broken ladders.
    pub fn from_rungs_unchecked(mass_ratio_cubed: f64, rungs: Vec<LadderRung>) -> Self {
        Self {
            mass_ratio_cubed,
            rungs,
        }
    }

    /// Copy with `κ(l)` multiplied by `factor` for every `l ≥ 2`. The result
    /// generally violates the ladder conditions.
    pub fn with_inflated_kappa(&self, factor: f64) -> Self {
        let rungs = self
            .rungs
            .iter()
            .map(|r| {
                let mut r = *r;
                if r.l >= 2 {
                    r.kappa *= factor;
                }
                r
            })
            .collect();
        Self::from_rungs_unchecked(self.mass_ratio_cubed, rungs)
    }

    /// Check every ladder condition; returns the first violated one.
    pub fn validate(&self) -> Result<()> {
        let c = self.mass_ratio_cubed;
        for (k, r) in self.rungs.iter().enumerate() {
            if r.l != k + 1 {
                return Err(Error::Construction(format!("rung {k} carries order {}", r.l)));
            }
            if !(0.0 < r.kappa_prime && r.kappa_prime < r.kappa) {
                return Err(Error::Construction(format!(
                    "rung {}: need 0 < κ′ < κ, got κ′={} κ={}",
                    r.l, r.kappa_prime, r.kappa
                )));
            }
            if k == 0 {
                continue;
            }
            let prev = &self.rungs[k - 1];
            let d2 = d_squared_next(c, prev.kappa_prime);
            if r.d_squared != Some(d2) {
                return Err(Error::Construction(format!(
                    "rung {}: d² = {:?} differs from (m³/2M³)κ′²/(1+κ′²) = {d2}",
                    r.l, r.d_squared
                )));
            }
            if !(left_margin(c, prev.kappa_prime, r.kappa, d2) > 0.0) {
                return Err(Error::Construction(format!(
                    "rung {}: left inequality fails for κ = {}",
                    r.l, r.kappa
                )));
            }
            if !(right_margin(r.kappa, d2) > 0.0) {
                return Err(Error::Construction(format!(
                    "rung {}: right inequality fails for κ = {}",
                    r.l, r.kappa
                )));
            }
        }
        Ok(())
    }
}

/// Build the ladder for `l = 1..=l_max` starting from `κ(1) > κ′(1) > 0`.
pub fn azs_ladder(sys: &MassSystem, l_max: usize, kappa1: f64, kappa1_prime: f64) -> Result<AzsLadder> {
    let n = sys.particles();
    if !(0.0 < kappa1_prime && kappa1_prime < kappa1) {
        return arg(format!("need 0 < κ′(1) < κ(1), got κ′(1)={kappa1_prime}, κ(1)={kappa1}"));
    }
    if l_max < 2 || l_max + 1 > n {
        return arg(format!("l_max must satisfy 2 ≤ l_max ≤ N−1 = {}, got {l_max}", n - 1));
    }
    let c = (sys.min_mass() / sys.total_mass()).powi(3);
    let mut rungs = vec![LadderRung {
        l: 1,
        kappa: kappa1,
        kappa_prime: kappa1_prime,
        d_squared: None,
    }];
    for l in 1..l_max {
        let kp = rungs[l - 1].kappa_prime;
        let d2 = d_squared_next(c, kp);
        let left_end = bisect_upper(|k| left_margin(c, kp, k, d2), kp);
        let right_end = bisect_upper(|k| right_margin(k, d2), d2.sqrt());
        let upper = left_end.min(right_end);
        let kappa = 0.5 * upper;
        if !(kappa > 0.0 && left_margin(c, kp, kappa, d2) > 0.0 && right_margin(kappa, d2) > 0.0) {
            return Err(Error::Construction(format!(
                "empty feasible window at l = {}: κ′(l) = {kp:e}, d² = {d2:e}, endpoints {left_end:e}/{right_end:e}",
                l + 1
            )));
        }
        rungs.push(LadderRung {
            l: l + 1,
            kappa,
            kappa_prime: 0.5 * kappa,
            d_squared: Some(d2),
        });
    }
    let ladder = AzsLadder {
        mass_ratio_cubed: c,
        rungs,
    };
    ladder.validate()?;
    Ok(ladder)
}
