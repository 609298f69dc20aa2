//! Seeded agreement checks for the Gram identities and the merge formula.

use rand::seq::SliceRandom;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use super::cones::gaussian_relative;
use super::projections::{gram_identity_cm, gram_identity_internal, mass_norm, merge_difference};
use super::{Cluster, MassSystem, Partition, IDENTITY_TOL};
use crate::error::{arg, Result};
use crate::rng;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityReport {
    pub draws: usize,
    /// Largest `|lhs − rhs|/(|x|_m|y|_m)` per identity.
    pub max_error_internal: f64,
    pub max_error_cm: f64,
    pub max_error_merge: f64,
    /// Draws where some identity exceeded [`IDENTITY_TOL`].
    pub failures: usize,
}

impl IdentityReport {
    pub fn max_error(&self) -> f64 {
        self.max_error_internal.max(self.max_error_cm).max(self.max_error_merge)
    }
}

/// Masses drawn uniformly from `[lo, hi]`.
pub fn random_masses(particles: usize, lo: f64, hi: f64, rng: &mut rng::Rng) -> Vec<f64> {
    (0..particles).map(|_| rng.random_range(lo..=hi)).collect()
}

fn random_cluster(particles: usize, rng: &mut rng::Rng) -> Result<Cluster> {
    let mut idx: Vec<usize> = (0..particles).collect();
    idx.shuffle(rng);
    let size = rng.random_range(1..=particles);
    Cluster::new(idx[..size].to_vec())
}

fn random_partition(particles: usize, min_order: usize, rng: &mut rng::Rng) -> Result<Partition> {
    loop {
        let labels: Vec<usize> = (0..particles).map(|_| rng.random_range(0..particles)).collect();
        let clusters = (0..particles)
            .map(|l| (0..particles).filter(|&i| labels[i] == l).collect::<Vec<_>>())
            .filter(|m| !m.is_empty())
            .map(Cluster::new)
            .collect::<Result<Vec<_>>>()?;
        if clusters.len() >= min_order {
            return Partition::new(particles, clusters);
        }
    }
}

/// Evaluate both sides of each identity on `draws` seeded pairs `x, y ∈ X₀`
/// with a random cluster, partition and merge per draw.
pub fn identity_suite(sys: &MassSystem, draws: usize, seed: u64) -> Result<IdentityReport> {
    let particles = sys.particles();
    if particles < 2 {
        return arg("identity suite needs at least two particles");
    }
    let mut rng = rng::seeded(seed);
    let mut report = IdentityReport {
        draws,
        max_error_internal: 0.0,
        max_error_cm: 0.0,
        max_error_merge: 0.0,
        failures: 0,
    };
    for _ in 0..draws {
        let x = gaussian_relative(sys, &mut rng);
        let y = gaussian_relative(sys, &mut rng);
        let scale = mass_norm(sys, &x)? * mass_norm(sys, &y)?;
        let err = |(l, r): (f64, f64)| (l - r).abs() / scale;

        let c = random_cluster(particles, &mut rng)?;
        let e_int = err(gram_identity_internal(sys, &c, &x, &y)?);
        let z = random_partition(particles, 2, &mut rng)?;
        let e_cm = err(gram_identity_cm(sys, &z, &x, &y)?);
        let a = rng.random_range(0..z.order());
        let b = (a + rng.random_range(1..z.order())) % z.order();
        let merged = z.merge(a, b)?;
        let e_merge = err(merge_difference(sys, &z, &merged, &x, &y)?);

        report.max_error_internal = report.max_error_internal.max(e_int);
        report.max_error_cm = report.max_error_cm.max(e_cm);
        report.max_error_merge = report.max_error_merge.max(e_merge);
        if e_int.max(e_cm).max(e_merge) > IDENTITY_TOL {
            report.failures += 1;
        }
    }
    Ok(report)
}
