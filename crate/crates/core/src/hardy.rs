//! Hardy constants, decay-exponent bounds and the angular Hardy constant of
//! three one-dimensional fermions.

use serde::{Deserialize, Serialize};

use crate::error::{arg, Error, Result};
use crate::spectral::tridiag::{bisect_count, negative_pivots};

/// `(d−2)²/4`, the sharp constant in `‖∇ψ‖² ≥ c‖ψ/|x|‖²` on `ℝᵈ`.
pub fn hardy_constant(d: u32) -> Result<f64> {
    if d < 3 {
        return Err(Error::Domain(format!("the Hardy inequality needs d ≥ 3, got d = {d}")));
    }
    let a = d as f64 - 2.0;
    Ok(a * a / 4.0)
}

/// `L(L+1)` with `L = l + (dim_x0 − 3)/2`.
pub fn angular_hardy(l: u32, dim_x0: u32) -> Result<f64> {
    if dim_x0 < 2 {
        return arg(format!("dim X₀ must be at least 2, got {dim_x0}"));
    }
    let big_l = l as f64 + (dim_x0 as f64 - 3.0) / 2.0;
    if big_l < -0.5 {
        return arg(format!("L = {big_l} is below −1/2"));
    }
    Ok(big_l * (big_l + 1.0))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum DecayQuery {
    OneBodyShortRange { d: u32 },
    /// Tail `β₁|x|⁻²`.
    OneBodyLongRangeCritical { d: u32, beta1: f64 },
    /// Tail `β₁|x|^{−β₂}` with `β₂ < 2`.
    OneBodyLongRangeSubcritical { d: u32, beta1: f64, beta2: f64 },
    /// `N` particles in `ℝⁿ`; an optional tail exponent `β` adds the
    /// subexponential rate.
    NBody { n: u32, particles: u32, beta: Option<f64> },
}

/// Supremum of admissible power weights `α₀`, or a subexponential rate `κ`
/// in `exp(|x|^κ)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayBound {
    pub alpha_sup: Option<f64>,
    pub kappa: Option<f64>,
}

pub fn decay_bound(q: DecayQuery) -> Result<DecayBound> {
    let one_body_d = |d: u32| {
        if d < 3 {
            arg(format!("one-body modes need d ≥ 3, got {d}"))
        } else {
            Ok(d as f64)
        }
    };
    let beta1_ok = |b: f64| {
        if b > 0.0 && b.is_finite() {
            Ok(b)
        } else {
            arg(format!("β₁ must be positive, got {b}"))
        }
    };
    match q {
        DecayQuery::OneBodyShortRange { d } => Ok(DecayBound {
            alpha_sup: Some((one_body_d(d)? - 2.0) / 2.0),
            kappa: None,
        }),
        DecayQuery::OneBodyLongRangeCritical { d, beta1 } => {
            let d = one_body_d(d)?;
            let b1 = beta1_ok(beta1)?;
            Ok(DecayBound {
                alpha_sup: Some((b1 + (d - 2.0).powi(2) / 4.0).sqrt()),
                kappa: None,
            })
        }
        DecayQuery::OneBodyLongRangeSubcritical { d, beta1, beta2 } => {
            one_body_d(d)?;
            beta1_ok(beta1)?;
            if !(beta2 > 0.0 && beta2 < 2.0) {
                return arg(format!("subcritical mode needs β₂ ∈ (0, 2), got {beta2}"));
            }
            Ok(DecayBound {
                alpha_sup: None,
                kappa: Some(1.0 - beta2 / 2.0),
            })
        }
        DecayQuery::NBody { n, particles, beta } => {
            if n < 3 || particles < 3 {
                return arg(format!("n-body mode needs n ≥ 3 and N ≥ 3, got n = {n}, N = {particles}"));
            }
            let kappa = match beta {
                Some(b) if b > 0.0 && b < 2.0 => Some(1.0 - b / 2.0),
                Some(b) => return arg(format!("β must lie in (0, 2), got {b}")),
                None => None,
            };
            let dim = (n * (particles - 1)) as f64;
            Ok(DecayBound {
                alpha_sup: Some((dim - 2.0) / 2.0),
                kappa,
            })
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Classification {
    Eigenvalue,
    Resonance,
    Marginal,
}

impl Classification {
    pub fn as_str(&self) -> &'static str {
        match self {
            Classification::Eigenvalue => "EIGENVALUE",
            Classification::Resonance => "RESONANCE",
            Classification::Marginal => "MARGINAL",
        }
    }
}

/// Classify a zero-energy solution `ψ ~ r^{−s}` in `ℝᵈ`: square integrable
/// at infinity iff `2s > d`; `2s = d` is flagged as marginal.
pub fn eigenvalue_or_resonance(d: u32, s: f64) -> Classification {
    classify_decay(d, s, 0.0)
}

/// As [`eigenvalue_or_resonance`], treating `|s − d/2| ≤ band` as marginal.
pub fn classify_decay(d: u32, s: f64, band: f64) -> Classification {
    let excess = s - d as f64 / 2.0;
    if excess.abs() <= band {
        Classification::Marginal
    } else if excess > 0.0 {
        Classification::Eigenvalue
    } else {
        Classification::Resonance
    }
}

/// Behaviour of the radial functions at the ends of the annulus.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AnnulusEnds {
    /// No condition; the constant function is admissible.
    #[default]
    Free,
    Dirichlet,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AnnulusGrid {
    pub rho0: f64,
    pub rho1: f64,
    pub points: usize,
    #[serde(default)]
    pub ends: AnnulusEnds,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FermionHardyReport {
    pub min_rayleigh: f64,
    /// Angular mode `n` of `sin(3nθ)` attaining the minimum (one-based).
    pub minimizing_mode: u32,
    /// Minimum quotient for each mode `n = 1..=modes`.
    pub per_mode: Vec<f64>,
}

const GAUSS4: [(f64, f64); 4] = [
    (-0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
    (-0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.339_981_043_584_856_3, 0.652_145_154_862_546_1),
    (0.861_136_311_594_052_6, 0.347_854_845_137_453_9),
];

/// Tridiagonal P1 matrices on a geometric `ρ` grid: `K = ∫a′²ρ dρ` and
/// `W = ∫a²/ρ dρ`, restricted to the admissible nodes.
fn annulus_matrices(grid: &AnnulusGrid) -> (Vec<f64>, Vec<f64>, Vec<f64>, Vec<f64>) {
    let n = grid.points;
    let ratio = grid.rho1 / grid.rho0;
    let node = |k: usize| grid.rho0 * ratio.powf(k as f64 / (n - 1) as f64);
    let (mut kd, mut ko) = (vec![0.0; n], vec![0.0; n - 1]);
    let (mut wd, mut wo) = (vec![0.0; n], vec![0.0; n - 1]);
    for e in 0..n - 1 {
        let (a, b) = (node(e), node(e + 1));
        let h = b - a;
        let stiff = 0.5 * (a + b) / h;
        kd[e] += stiff;
        kd[e + 1] += stiff;
        ko[e] -= stiff;
        for (xi, w) in GAUSS4 {
            let x = 0.5 * (a + b) + 0.5 * h * xi;
            let (p0, p1) = ((b - x) / h, (x - a) / h);
            let g = 0.5 * h * w / x;
            wd[e] += g * p0 * p0;
            wd[e + 1] += g * p1 * p1;
            wo[e] += g * p0 * p1;
        }
    }
    if grid.ends == AnnulusEnds::Dirichlet {
        for v in [&mut kd, &mut wd] {
            v.remove(n - 1);
            v.remove(0);
        }
        for v in [&mut ko, &mut wo] {
            v.remove(n - 2);
            v.remove(0);
        }
    }
    (kd, ko, wd, wo)
}

/// Minimise `‖∇ψ‖²/‖ψ/ρ‖²` over `ψ = Σ aₙ(ρ) sin(3nθ)` on an annulus.
///
/// Modes decouple: mode `n` contributes the pencil
/// `(K + 9n²W, W)`, whose lowest eigenvalue is found by bisection on the
/// inertia of `K + (9n² − σ)W`.
pub fn fermion1d_constant_check(grid: &AnnulusGrid, modes: u32) -> Result<FermionHardyReport> {
    let min_points = match grid.ends {
        AnnulusEnds::Free => 2,
        AnnulusEnds::Dirichlet => 3,
    };
    if !(grid.rho0 > 0.0 && grid.rho0 < grid.rho1 && grid.rho1.is_finite()) || grid.points < min_points {
        return arg(format!(
            "degenerate annulus grid: ρ₀ = {}, ρ₁ = {}, points = {}",
            grid.rho0, grid.rho1, grid.points
        ));
    }
    if modes == 0 {
        return arg("at least one angular mode is required");
    }
    let (kd, ko, wd, wo) = annulus_matrices(grid);
    // Rayleigh quotient of the all-ones vector bounds the K/W minimum from above
    let k_sum: f64 = kd.iter().sum::<f64>() + 2.0 * ko.iter().sum::<f64>();
    let w_sum: f64 = wd.iter().sum::<f64>() + 2.0 * wo.iter().sum::<f64>();
    let upper = (k_sum / w_sum).max(0.0);
    let per_mode: Vec<f64> = (1..=modes)
        .map(|n| {
            let angular = 9.0 * (n * n) as f64;
            let count = |sigma: f64| {
                let shift = angular - sigma;
                let diag: Vec<f64> = kd.iter().zip(&wd).map(|(k, w)| k + shift * w).collect();
                let off: Vec<f64> = ko.iter().zip(&wo).map(|(k, w)| k + shift * w).collect();
                negative_pivots(&diag, &off)
            };
            let lo = angular * (1.0 - 1e-12) - 1e-12;
            let hi = angular + upper * (1.0 + 1e-9) + 1e-12;
            bisect_count(count, 0, lo, hi)
        })
        .collect();
    let (idx, &min) = per_mode
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("at least one mode");
    Ok(FermionHardyReport {
        min_rayleigh: min,
        minimizing_mode: idx as u32 + 1,
        per_mode,
    })
}
