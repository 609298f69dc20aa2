//! Finite-difference radial operators `−(1−ε)Δ + λV` in angular sector `l`.
//!
//! With `u = r^{(d−1)/2}ψ` the radial operator becomes
//! `(1−ε)(−u″ + c_l u/r²) + V u` with `c_l = (d−1)(d−3)/4 + l(l+d−2)`.
//! Nodes sit at `r_i = i·h`; the potential is averaged over each cell so a
//! discontinuous well converges at second order.

use serde::{Deserialize, Serialize};

use super::potential::{PotentialSpec, Shape};
use super::tridiag::SymTridiagonal;
use crate::error::{arg, Error, Result};

/// Energies at or above `−EDGE_TOL` are not counted as bound.
pub const EDGE_TOL: f64 = 1e-10;
/// At most this many negative eigenvalues are resolved per report.
pub const MAX_REPORTED_EIGENVALUES: usize = 32;
/// `ε` used to witness a virtual level at the critical coupling.
pub const WITNESS_EPSILON: f64 = 1e-3;
/// Minimum number of grid points across the potential's length scale.
const MIN_POINTS_PER_WELL: f64 = 10.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OuterBoundary {
    /// `u(r_max) = 0`.
    #[default]
    Dirichlet,
    /// Robin condition `u′ = γu/r_max` matching the decaying zero-energy
    /// solution beyond the potential, so a zero crossing of the box ground
    /// energy sits at the true critical coupling.
    ZeroEnergyMatched,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RadialGrid {
    pub r_max: f64,
    pub points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialProblem {
    pub d: u32,
    pub l: u32,
    pub potential: PotentialSpec,
    pub epsilon: f64,
    pub grid: RadialGrid,
    pub boundary: OuterBoundary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralMetadata {
    pub d: u32,
    pub l: u32,
    pub shape: String,
    pub coupling: f64,
    pub epsilon: f64,
    pub r_max: f64,
    pub points: usize,
    pub boundary: OuterBoundary,
    pub edge_tol: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralReport {
    /// Eigenvalues below `−edge_tol`, ascending.
    pub eigenvalues: Vec<f64>,
    /// Lowest eigenvalue of the discretised operator, bound or not.
    pub ground_energy: f64,
    pub negative_count: usize,
    pub metadata: SpectralMetadata,
}

impl RadialProblem {
    pub fn new(d: u32, potential: PotentialSpec, epsilon: f64, grid: RadialGrid) -> Result<Self> {
        let p = Self {
            d,
            l: 0,
            potential,
            epsilon,
            grid,
            boundary: OuterBoundary::Dirichlet,
        };
        p.validate()?;
        Ok(p)
    }

    pub fn with_sector(self, l: u32) -> Self {
        Self { l, ..self }
    }

    pub fn with_boundary(self, boundary: OuterBoundary) -> Self {
        Self { boundary, ..self }
    }

    pub fn with_epsilon(self, epsilon: f64) -> Self {
        Self { epsilon, ..self }
    }

    pub fn with_coupling(self, coupling: f64) -> Self {
        Self {
            potential: PotentialSpec { coupling, ..self.potential },
            ..self
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.d < 3 {
            return arg(format!("dimension must be at least 3, got {}", self.d));
        }
        if !(0.0..1.0).contains(&self.epsilon) {
            return arg(format!("ε must lie in [0, 1), got {}", self.epsilon));
        }
        if !(self.grid.r_max > 0.0 && self.grid.r_max.is_finite()) {
            return arg(format!("r_max must be positive, got {}", self.grid.r_max));
        }
        if self.grid.points < 100 {
            return arg(format!("at least 100 grid points required, got {}", self.grid.points));
        }
        self.potential.shape.validate()?;
        if !self.potential.coupling.is_finite() {
            return arg("coupling must be finite");
        }
        Ok(())
    }

    /// Centrifugal coefficient `(d−1)(d−3)/4 + l(l+d−2)`.
    pub fn centrifugal(&self) -> f64 {
        let d = self.d as f64;
        let l = self.l as f64;
        (d - 1.0) * (d - 3.0) / 4.0 + l * (l + d - 2.0)
    }

    /// Grid spacing and node radii.
    pub fn nodes(&self) -> (f64, Vec<f64>) {
        let n = self.grid.points;
        let h = match self.boundary {
            OuterBoundary::Dirichlet => self.grid.r_max / (n + 1) as f64,
            OuterBoundary::ZeroEnergyMatched => self.grid.r_max / n as f64,
        };
        (h, (1..=n).map(|i| i as f64 * h).collect())
    }

    fn robin_gamma(&self) -> Result<f64> {
        let (_, s_plus) = self.potential.shape.far_exponents(self.d, self.l).ok_or_else(|| {
            Error::Argument("matched boundary needs an exact power-law tail beyond the potential".into())
        })?;
        Ok((self.d as f64 - 1.0) / 2.0 - s_plus)
    }
}

/// Symmetric tridiagonal discretisation of the radial operator.
pub fn discretize(problem: &RadialProblem) -> Result<SymTridiagonal> {
    problem.validate()?;
    let (h, r) = problem.nodes();
    let shape: Shape = problem.potential.shape;
    let per_well = shape.length_scale() / h;
    if per_well < MIN_POINTS_PER_WELL {
        return Err(Error::Resolution(format!(
            "{per_well:.1} points across the {} length scale {}; need at least {MIN_POINTS_PER_WELL}",
            shape.name(),
            shape.length_scale()
        )));
    }
    let kin = 1.0 - problem.epsilon;
    let cf = problem.centrifugal();
    let lambda = problem.potential.coupling;
    let n = r.len();
    let mut diag: Vec<f64> = r
        .iter()
        .map(|&ri| {
            let v = shape.integral(ri - 0.5 * h, ri + 0.5 * h, lambda) / h;
            kin * (2.0 / (h * h) + cf / (ri * ri)) + v
        })
        .collect();
    let mut off = vec![-kin / (h * h); n - 1];
    if problem.boundary == OuterBoundary::ZeroEnergyMatched {
        // last node carries half a cell; rows scaled by the inverse square
        // root of the lumped mass keep the matrix symmetric
        let gamma = problem.robin_gamma()?;
        let rn = r[n - 1];
        let v = shape.integral(rn - 0.5 * h, rn, lambda);
        let k_nn = kin / h + 0.5 * h * kin * cf / (rn * rn) + v - kin * gamma / rn;
        diag[n - 1] = k_nn / (0.5 * h);
        off[n - 2] = -kin / h / (h * (0.5 * h)).sqrt();
    }
    SymTridiagonal::new(diag, off)
}

/// The `k` smallest eigenvalues of a discretised operator.
pub fn lowest_eigenvalues(op: &SymTridiagonal, k: usize) -> Result<Vec<f64>> {
    op.lowest_eigenvalues(k)
}

/// Discretise and collect the bound-state spectrum.
pub fn solve(problem: &RadialProblem) -> Result<SpectralReport> {
    let op = discretize(problem)?;
    let ground_energy = op.lowest_eigenvalues(1)?[0];
    let eigenvalues = op.eigenvalues_below(-EDGE_TOL, MAX_REPORTED_EIGENVALUES);
    Ok(SpectralReport {
        negative_count: op.count_below(-EDGE_TOL),
        eigenvalues,
        ground_energy,
        metadata: SpectralMetadata {
            d: problem.d,
            l: problem.l,
            shape: problem.potential.shape.name().to_string(),
            coupling: problem.potential.coupling,
            epsilon: problem.epsilon,
            r_max: problem.grid.r_max,
            points: problem.grid.points,
            boundary: problem.boundary,
            edge_tol: EDGE_TOL,
        },
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CriticalCoupling {
    pub lambda_star: f64,
    /// Final bisection bracket: no negative eigenvalue at the lower end,
    /// at least one at the upper end.
    pub bracket: (f64, f64),
    pub ground_energy: f64,
    /// Ground energy of `h_ε` at `λ*` with `ε = WITNESS_EPSILON`.
    pub witness_energy: f64,
}

/// Smallest coupling at which the discretised `−Δ + λV` acquires a negative
/// eigenvalue, by bisection on the Sturm count at zero energy.
pub fn critical_coupling(
    shape: Shape,
    d: u32,
    grid: RadialGrid,
    boundary: OuterBoundary,
) -> Result<CriticalCoupling> {
    let base = RadialProblem::new(d, PotentialSpec::new(shape, 0.0)?, 0.0, grid)?.with_boundary(boundary);
    let has_bound = |lambda: f64| -> Result<bool> {
        let op = discretize(&base.with_coupling(lambda))?;
        Ok(op.count_below(0.0) > 0)
    };
    if has_bound(0.0)? {
        return Err(Error::Bracketing { lo: 0.0, hi: 0.0 });
    }
    let (mut lo, mut hi) = (0.0, 1.0);
    while !has_bound(hi)? {
        lo = hi;
        hi *= 2.0;
        if hi > 1e12 {
            return Err(Error::Bracketing { lo: 0.0, hi });
        }
    }
    while hi - lo > 1e-13 * hi {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if has_bound(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let at_star = base.with_coupling(hi);
    let ground_energy = discretize(&at_star)?.lowest_eigenvalues(1)?[0];
    let witness_energy = discretize(&at_star.with_epsilon(WITNESS_EPSILON))?.lowest_eigenvalues(1)?[0];
    Ok(CriticalCoupling {
        lambda_star: hi,
        bracket: (lo, hi),
        ground_energy,
        witness_energy,
    })
}

/// Spectral reports of `h_ε = −(1−ε)Δ + λV` for each `ε` in `eps_list`
/// (sorted descending), in input order.
pub fn epsilon_sweep(problem: &RadialProblem, lambda: f64, eps_list: &[f64]) -> Result<Vec<SpectralReport>> {
    if eps_list.windows(2).any(|w| !(w[0] > w[1])) {
        return arg("ε list must be strictly descending");
    }
    eps_list
        .iter()
        .map(|&eps| solve(&problem.with_coupling(lambda).with_epsilon(eps)))
        .collect()
}
