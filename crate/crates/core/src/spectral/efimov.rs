//! Negative-eigenvalue counts of `−u″ − c/r²` on `[1, R]` with Dirichlet ends.
//!
//! Below the Hardy threshold `c = 1/4` the operator is non-negative for every
//! `R`. Above it the zero-energy solution `√r·sin(ω ln r)`, `ω = √(c − 1/4)`,
//! has a node every `π/ω` in `ln r`, so the count grows like `ω ln R/π`.

use serde::{Deserialize, Serialize};

use super::tridiag::negative_pivots;
use crate::error::{arg, Result};

/// Finite elements per unit of `ln r`.
pub const ELEMENTS_PER_LOG_UNIT: f64 = 200.0;
const MIN_ELEMENTS: usize = 100;

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EfimovCount {
    pub r: f64,
    pub count: usize,
}

/// `⌊ω ln R/π⌋` for `c > 1/4`, zero otherwise: the exact count from Sturm
/// oscillation of the zero-energy solution.
pub fn exact_critical_model_count(c: f64, r: f64) -> usize {
    if c <= 0.25 || r <= 1.0 {
        return 0;
    }
    ((c - 0.25).sqrt() * r.ln() / std::f64::consts::PI).floor() as usize
}

/// Number of negative eigenvalues of the P1 finite-element discretisation
/// on a geometric grid, from the inertia of the stiffness matrix.
pub fn critical_model_count(c: f64, r: f64) -> Result<usize> {
    if !(c >= 0.0 && c.is_finite()) {
        return arg(format!("c must be non-negative, got {c}"));
    }
    if !(r > 1.0 && r.is_finite()) {
        return arg(format!("R must exceed 1, got {r}"));
    }
    let log_r = r.ln();
    let m = ((ELEMENTS_PER_LOG_UNIT * log_r).ceil() as usize).max(MIN_ELEMENTS);
    let node = |k: usize| (log_r * k as f64 / m as f64).exp();
    // interior nodes 1..m−1
    let mut diag = vec![0.0; m - 1];
    let mut off = vec![0.0; m.saturating_sub(2)];
    for e in 0..m {
        let (a, b) = (node(e), node(e + 1));
        let h = b - a;
        let (mut m00, mut m01, mut m11) = (0.0, 0.0, 0.0);
        for (xi, w) in GAUSS4 {
            let x = 0.5 * (a + b) + 0.5 * h * xi;
            let (p0, p1) = ((b - x) / h, (x - a) / h);
            let g = 0.5 * h * w / (x * x);
            m00 += g * p0 * p0;
            m01 += g * p0 * p1;
            m11 += g * p1 * p1;
        }
        // local matrix on nodes e, e+1; node k maps to interior index k−1
        if e >= 1 {
            diag[e - 1] += 1.0 / h - c * m00;
        }
        if e + 1 <= m - 1 {
            diag[e] += 1.0 / h - c * m11;
        }
        if e >= 1 && e + 1 <= m - 1 {
            off[e - 1] = -1.0 / h - c * m01;
        }
    }
    Ok(negative_pivots(&diag, &off))
}

/// Counts for each `R` in `r_list` (strictly increasing), in input order.
pub fn count_negative_eigenvalues_critical_model(c: f64, r_list: &[f64]) -> Result<Vec<EfimovCount>> {
    if r_list.windows(2).any(|w| !(w[0] < w[1])) {
        return arg("R list must be strictly increasing");
    }
    r_list
        .iter()
        .map(|&r| critical_model_count(c, r).map(|count| EfimovCount { r, count }))
        .collect()
}

/// Least-squares slope of count against `ln R`.
pub fn count_slope(counts: &[EfimovCount]) -> Option<f64> {
    if counts.len() < 2 {
        return None;
    }
    let n = counts.len() as f64;
    let xs: Vec<f64> = counts.iter().map(|c| c.r.ln()).collect();
    let mx = xs.iter().sum::<f64>() / n;
    let my = counts.iter().map(|c| c.count as f64).sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(counts).map(|(x, c)| (x - mx) * (c.count as f64 - my)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Counts are constant over the upper half of the `ln R` range.
pub fn is_saturated(counts: &[EfimovCount]) -> bool {
    let Some(last) = counts.last() else {
        return true;
    };
    let mid = 0.5 * (counts[0].r.ln() + last.r.ln());
    counts
        .iter()
        .filter(|c| c.r.ln() >= mid)
        .all(|c| c.count == last.count)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ThresholdBracket {
    pub lo: f64,
    pub hi: f64,
    /// Coupling at which the saturation test flips, by bisection.
    pub estimate: f64,
}

/// Bracket the coupling where counts stop saturating: `c_lo` must saturate
/// and `c_hi` must not.
pub fn saturation_threshold(c_lo: f64, c_hi: f64, r_list: &[f64]) -> Result<Option<ThresholdBracket>> {
    if !(0.0 <= c_lo && c_lo < c_hi) {
        return arg("need 0 ≤ c_lo < c_hi");
    }
    let saturated = |c: f64| count_negative_eigenvalues_critical_model(c, r_list).map(|v| is_saturated(&v));
    if !saturated(c_lo)? || saturated(c_hi)? {
        return Ok(None);
    }
    let (mut lo, mut hi) = (c_lo, c_hi);
    for _ in 0..30 {
        let mid = 0.5 * (lo + hi);
        if saturated(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(Some(ThresholdBracket {
        lo: c_lo,
        hi: c_hi,
        estimate: 0.5 * (lo + hi),
    }))
}
