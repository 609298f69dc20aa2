//! Symmetric tridiagonal matrices, inertia counts and Sturm bisection.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SymTridiagonal {
    diag: Vec<f64>,
    off: Vec<f64>,
}

/// Number of negative pivots in the `LDLᵀ` factorisation of the symmetric
/// tridiagonal matrix `(diag, off)`, i.e. its number of negative eigenvalues.
pub fn negative_pivots(diag: &[f64], off: &[f64]) -> usize {
    debug_assert_eq!(off.len() + 1, diag.len());
    let mut count = 0;
    let mut pivot = 1.0;
    let mut prev_off2 = 0.0;
    for (i, &d) in diag.iter().enumerate() {
        pivot = d - prev_off2 / pivot;
        if pivot == 0.0 {
            pivot = f64::EPSILON * (d.abs() + prev_off2.sqrt()).max(f64::MIN_POSITIVE);
        }
        if pivot < 0.0 {
            count += 1;
        }
        prev_off2 = off.get(i).map_or(0.0, |b| b * b);
    }
    count
}

/// Smallest `x` in `[lo, hi]` (to bisection resolution) with `count(x) > k`,
/// for a count function non-decreasing in `x`.
pub fn bisect_count(count: impl Fn(f64) -> usize, k: usize, mut lo: f64, mut hi: f64) -> f64 {
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if count(mid) > k {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, off: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return arg("tridiagonal matrix must be non-empty");
        }
        if off.len() + 1 != diag.len() {
            return arg(format!(
                "off-diagonal length {} does not match diagonal length {}",
                off.len(),
                diag.len()
            ));
        }
        if diag.iter().chain(&off).any(|v| !v.is_finite()) {
            return arg("tridiagonal entries must be finite");
        }
        Ok(Self { diag, off })
    }

    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }

    pub fn diag(&self) -> &[f64] {
        &self.diag
    }

    pub fn off(&self) -> &[f64] {
        &self.off
    }

    /// Number of eigenvalues strictly below `sigma` (Sturm count).
    pub fn count_below(&self, sigma: f64) -> usize {
        let shifted: Vec<f64> = self.diag.iter().map(|d| d - sigma).collect();
        negative_pivots(&shifted, &self.off)
    }

    /// Gershgorin interval containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { self.off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { self.off[i].abs() } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        let pad = 1e-12 * lo.abs().max(hi.abs()).max(1.0);
        (lo - pad, hi + pad)
    }

    /// The `k` smallest eigenvalues in ascending order.
    pub fn lowest_eigenvalues(&self, k: usize) -> Result<Vec<f64>> {
        if k == 0 {
            return arg("k must be at least 1");
        }
        if k > self.len() {
            return arg(format!("requested {k} eigenvalues of a {}×{} matrix", self.len(), self.len()));
        }
        let (lo, hi) = self.gershgorin();
        Ok((0..k).map(|j| bisect_count(|x| self.count_below(x), j, lo, hi)).collect())
    }

    /// All eigenvalues strictly below `sigma`, ascending, at most `cap` of them.
    pub fn eigenvalues_below(&self, sigma: f64, cap: usize) -> Vec<f64> {
        let n = self.count_below(sigma).min(cap);
        let (lo, _) = self.gershgorin();
        (0..n).map(|j| bisect_count(|x| self.count_below(x), j, lo, sigma)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let t = SymTridiagonal::new(vec![1.0, 3.0], vec![0.0]).unwrap();
        let ev = t.lowest_eigenvalues(2).unwrap();
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        assert!(t.lowest_eigenvalues(3).is_err());
        assert!(t.lowest_eigenvalues(0).is_err());
    }

    #[test]
    fn discrete_laplacian_spectrum() {
        // eigenvalues of tridiag(−1, 2, −1) are 2 − 2cos(jπ/(n+1))
        let n = 50;
        let t = SymTridiagonal::new(vec![2.0; n], vec![-1.0; n - 1]).unwrap();
        let ev = t.lowest_eigenvalues(5).unwrap();
        for (j, e) in ev.iter().enumerate() {
            let exact = 2.0 - 2.0 * ((j + 1) as f64 * std::f64::consts::PI / (n + 1) as f64).cos();
            assert!((e - exact).abs() < 1e-13, "{e} {exact}");
        }
        assert_eq!(t.count_below(ev[2] + 1e-9), 3);
    }

    #[test]
    fn rejects_shape_mismatch() {
        assert!(SymTridiagonal::new(vec![1.0, 2.0], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![], vec![]).is_err());
        assert!(SymTridiagonal::new(vec![f64::NAN], vec![]).is_err());
    }
}
