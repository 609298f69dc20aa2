//! Seeded falsification harnesses for the cone lower bound and the
//! same-order cone separation property.
//!
//! Cones `K(Z, κ)` with `1 < |Z| < N` are dilation invariant, so points are
//! drawn at a fixed radius chosen outside the one-cluster ball `K(Z₁, κ′(1))`.
//! The harnesses can only falsify: zero violations is evidence, not proof.

use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::projections::{in_cone_unchecked, split, split_norms_sq};
use super::{AzsLadder, Cluster, Configuration, MassSystem, Partition};
use crate::error::{arg, Error, Result};
use crate::rng::{self, Rng};

/// Draws allowed per requested sample before reporting exhaustion.
const DRAW_BUDGET_FACTOR: usize = 1000;

pub(crate) fn gaussian_relative(sys: &MassSystem, rng: &mut Rng) -> Configuration {
    let n = sys.dim();
    let mut x = Configuration::zeros(sys);
    for i in 0..sys.particles() {
        let s = sys.mass(i).sqrt().recip();
        for v in x.particle_mut(n, i) {
            *v = s * rng.sample::<f64, _>(StandardNormal);
        }
    }
    // remove the total center of mass; the result is isotropic in X₀
    let (q, _) = split(sys, &Partition::whole(sys.particles()), &x);
    q
}

pub(crate) fn norm(sys: &MassSystem, x: &Configuration) -> f64 {
    let n = sys.dim();
    (0..sys.particles())
        .map(|i| sys.mass(i) * x.particle(n, i).iter().map(|v| v * v).sum::<f64>())
        .sum::<f64>()
        .sqrt()
}

/// Uniform point on the unit sphere of `X₀` in the mass metric.
pub fn sample_unit_relative(sys: &MassSystem, rng: &mut Rng) -> Configuration {
    loop {
        let x = gaussian_relative(sys, rng);
        let r = norm(sys, &x);
        if r > 0.0 {
            return x.scaled(r.recip());
        }
    }
}

/// Point of `K(Z, κ)` at mass-radius `radius`, with the ratio
/// `t = |q|_m/|ξ|_m` distributed like the volume of the cone (`t = κU^{1/dim q}`).
pub fn sample_in_cone(
    sys: &MassSystem,
    z: &Partition,
    kappa: f64,
    radius: f64,
    rng: &mut Rng,
) -> Result<Configuration> {
    sys.check_partition(z)?;
    if z.order() <= 1 || z.order() >= sys.particles() {
        return arg(format!("cone sampling needs 1 < |Z| < N, got |Z| = {}", z.order()));
    }
    if !(kappa > 0.0 && radius > 0.0) {
        return arg("cone aperture and radius must be positive");
    }
    Ok(sample_in_cone_unchecked(sys, z, kappa, radius, rng))
}

fn sample_in_cone_unchecked(
    sys: &MassSystem,
    z: &Partition,
    kappa: f64,
    radius: f64,
    rng: &mut Rng,
) -> Configuration {
    let dim_q = (sys.dim() * (sys.particles() - z.order())) as f64;
    loop {
        let g = gaussian_relative(sys, rng);
        let (q, xi) = split(sys, z, &g);
        let (nq, nxi) = (norm(sys, &q), norm(sys, &xi));
        if nq == 0.0 || nxi == 0.0 {
            continue;
        }
        let u: f64 = rng.random();
        let t = kappa * u.powf(dim_q.recip());
        let x = xi.scaled(nxi.recip()).add(&q.scaled(t / nq));
        let r = norm(sys, &x);
        return x.scaled(radius / r);
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LowerBoundReport {
    pub samples: usize,
    pub drawn: usize,
    pub violations: usize,
    /// `min |P₀[C]x|_m / (d(|Z|)·|P_c(Z)x|_m)` over accepted points; `≥ 1` when the bound holds.
    pub worst_ratio: f64,
}

/// Sample the shell `M(Z,κ′,κ) = K(Z,κ(|Z|)) \ ⋃_{|Z′|<|Z|} K(Z′,κ′(|Z′|))`
/// and count points with `|P₀[C]x|_m < d(|Z|)|P_c(Z)x|_m`.
pub fn check_internal_lower_bound(
    sys: &MassSystem,
    z: &Partition,
    c: &Cluster,
    ladder: &AzsLadder,
    samples: usize,
    seed: u64,
) -> Result<LowerBoundReport> {
    sys.check_partition(z)?;
    sys.check_cluster(c)?;
    let l = z.order();
    if l <= 1 || l >= sys.particles() {
        return arg(format!("lower bound needs 1 < |Z| < N, got |Z| = {l}"));
    }
    if z.refines_cluster(c) {
        return arg(format!("cluster {c} lies inside a cluster of {z}; the bound requires C ⊄ Cᵢ"));
    }
    let (Some(kappa), Some(d)) = (ladder.kappa(l), ladder.d(l)) else {
        return arg(format!("ladder does not cover order {l}"));
    };
    let lower = lower_cones(sys, ladder, l)?;
    let radius = outside_ball_radius(ladder);
    let mut rng = rng::seeded(seed);
    let mut report = LowerBoundReport {
        samples: 0,
        drawn: 0,
        violations: 0,
        worst_ratio: f64::INFINITY,
    };
    // |P₀[C]x|²_m is the internal part of the partition (C, singletons)
    let internal = Partition::new(
        sys.particles(),
        std::iter::once(Ok(c.clone()))
            .chain((0..sys.particles()).filter(|i| !c.contains(*i)).map(|i| Cluster::new(vec![i])))
            .collect::<Result<Vec<_>>>()?,
    )?;
    while report.samples < samples {
        if report.drawn >= DRAW_BUDGET_FACTOR * samples.max(1) {
            return Err(Error::SamplingExhausted {
                requested: samples,
                accepted: report.samples,
                drawn: report.drawn,
            });
        }
        report.drawn += 1;
        let x = sample_in_cone_unchecked(sys, z, kappa, radius, &mut rng);
        if lower.iter().any(|(zl, kp)| in_cone_unchecked(sys, zl, *kp, &x)) {
            continue;
        }
        report.samples += 1;
        let (pc2, _) = split_norms_sq(sys, &internal, &x);
        let (_, xi2) = split_norms_sq(sys, z, &x);
        let ratio = pc2.sqrt() / (d * xi2.sqrt());
        if ratio < 1.0 {
            report.violations += 1;
        }
        report.worst_ratio = report.worst_ratio.min(ratio);
    }
    Ok(report)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationReport {
    pub order: usize,
    /// Candidate draws.
    pub drawn: usize,
    /// Draws lying in `K(Ẑ, κ(l))`.
    pub samples: usize,
    /// Accepted points that also lie in `K(Z̃, κ(l))`.
    pub in_intersection: usize,
    /// Intersection points outside every `K(Z, κ′(|Z|))` with `|Z| < l`.
    pub violations: usize,
    /// `absorbed_by_order[k]` counts intersection points whose tightest
    /// absorbing lower cone has order `k + 1`.
    pub absorbed_by_order: Vec<usize>,
    /// Minimum over intersection points of `max_Z (1 − r_Z)`, where `r_Z` is
    /// the point's cone ratio relative to `κ′(|Z|)`; negative means a violation.
    pub worst_margin: Option<f64>,
}

/// Sample `K(Ẑ,κ(l))`, keep the points that also lie in `K(Z̃,κ(l))` and check
/// that each lies in some lower-order cone `K(Z,κ′(|Z|))`.
///
/// Half of the candidates come from `K(Ẑ ∨ Z̃, 3κ(l)U)` when the join has at
/// least two clusters, which populates the intersection; every candidate
/// still has to pass the `K(Ẑ,κ(l))` membership test.
pub fn check_cone_separation(
    sys: &MassSystem,
    z_hat: &Partition,
    z_tilde: &Partition,
    ladder: &AzsLadder,
    samples: usize,
    seed: u64,
) -> Result<SeparationReport> {
    sys.check_partition(z_hat)?;
    sys.check_partition(z_tilde)?;
    let l = z_hat.order();
    if z_tilde.order() != l {
        return arg(format!("orders differ: |Ẑ| = {l}, |Z̃| = {}", z_tilde.order()));
    }
    if z_hat == z_tilde {
        return arg("separation requires Ẑ ≠ Z̃");
    }
    if l < 2 || l >= sys.particles() {
        return arg(format!("separation needs 2 ≤ l ≤ N−1, got l = {l}"));
    }
    let Some(kappa) = ladder.kappa(l) else {
        return arg(format!("ladder does not cover order {l}"));
    };
    let lower = lower_cones(sys, ladder, l)?;
    let join = z_hat.join(z_tilde)?;
    let radius = outside_ball_radius(ladder);
    let mut rng = rng::seeded(seed);
    let mut report = SeparationReport {
        order: l,
        drawn: 0,
        samples: 0,
        in_intersection: 0,
        violations: 0,
        absorbed_by_order: vec![0; l - 1],
        worst_margin: None,
    };
    while report.samples < samples {
        if report.drawn >= DRAW_BUDGET_FACTOR * samples.max(1) {
            return Err(Error::SamplingExhausted {
                requested: samples,
                accepted: report.samples,
                drawn: report.drawn,
            });
        }
        let use_join = join.order() >= 2 && report.drawn % 2 == 1;
        report.drawn += 1;
        let x = if use_join {
            let s: f64 = rng.random_range(0.0..3.0);
            sample_in_cone_unchecked(sys, &join, (s * kappa).max(f64::MIN_POSITIVE), radius, &mut rng)
        } else {
            sample_in_cone_unchecked(sys, z_hat, kappa, radius, &mut rng)
        };
        if use_join && !in_cone_unchecked(sys, z_hat, kappa, &x) {
            continue;
        }
        report.samples += 1;
        if !in_cone_unchecked(sys, z_tilde, kappa, &x) {
            continue;
        }
        report.in_intersection += 1;
        let mut best: Option<(f64, usize)> = None;
        for (zl, kp) in &lower {
            let r = cone_ratio(sys, zl, *kp, &x);
            if best.map_or(true, |(b, _)| r < b) {
                best = Some((r, zl.order()));
            }
        }
        let (r, order) = best.expect("at least the one-cluster ball is a lower cone");
        let margin = 1.0 - r;
        report.worst_margin = Some(report.worst_margin.map_or(margin, |m: f64| m.min(margin)));
        if r <= 1.0 {
            report.absorbed_by_order[order - 1] += 1;
        } else {
            report.violations += 1;
        }
    }
    Ok(report)
}

/// `|q(Z)|_m / (κ|ξ(Z)|_m)`, or `|x|_m/κ` for the one-cluster ball; `≤ 1` iff `x ∈ K(Z, κ)`.
fn cone_ratio(sys: &MassSystem, z: &Partition, kappa: f64, x: &Configuration) -> f64 {
    if z.order() == 1 {
        return norm(sys, x) / kappa;
    }
    let (q2, xi2) = split_norms_sq(sys, z, x);
    if xi2 == 0.0 {
        return if q2 == 0.0 { 0.0 } else { f64::INFINITY };
    }
    (q2 / xi2).sqrt() / kappa
}

/// All partitions of order `< l` paired with `κ′(order)`.
fn lower_cones(sys: &MassSystem, ladder: &AzsLadder, l: usize) -> Result<Vec<(Partition, f64)>> {
    let mut out = Vec::new();
    for order in 1..l {
        let Some(kp) = ladder.kappa_prime(order) else {
            return arg(format!("ladder does not cover order {order}"));
        };
        out.extend(Partition::of_order(sys.particles(), order).into_iter().map(|z| (z, kp)));
    }
    Ok(out)
}

fn outside_ball_radius(ladder: &AzsLadder) -> f64 {
    1.0 + 2.0 * ladder.kappa_prime(1).unwrap_or(0.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{azs_ladder, in_cone, in_x0, mass_norm};

    #[test]
    fn unit_samples_live_on_the_relative_sphere() {
        let sys = MassSystem::new(2, vec![0.5, 1.5, 4.0]).unwrap();
        let mut r = rng::seeded(3);
        for _ in 0..100 {
            let x = sample_unit_relative(&sys, &mut r);
            assert!(in_x0(&sys, &x).unwrap());
            assert!((mass_norm(&sys, &x).unwrap() - 1.0).abs() < 1e-14);
        }
    }

    #[test]
    fn cone_samples_are_members() {
        let sys = MassSystem::new(3, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
        let z = Partition::from_one_based(4, &[vec![1, 2], vec![3], vec![4]]).unwrap();
        let mut r = rng::seeded(4);
        for _ in 0..200 {
            let x = sample_in_cone(&sys, &z, 0.1, 2.0, &mut r).unwrap();
            assert!(in_cone(&sys, &z, 0.1 * (1.0 + 1e-12), &x).unwrap());
            assert!((mass_norm(&sys, &x).unwrap() - 2.0).abs() < 1e-13);
        }
        assert!(sample_in_cone(&sys, &Partition::whole(4), 0.1, 1.0, &mut r).is_err());
    }

    #[test]
    fn lower_bound_three_bodies() {
        let sys = MassSystem::equal_masses(3, 3).unwrap();
        let ladder = azs_ladder(&sys, 2, 1.0, 0.5).unwrap();
        let z = Partition::from_one_based(3, &[vec![1, 2], vec![3]]).unwrap();
        let c = Cluster::from_one_based(&[1, 3]).unwrap();
        let rep = check_internal_lower_bound(&sys, &z, &c, &ladder, 2000, 9).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.worst_ratio >= 1.0);
        // C inside a cluster of Z
        let inside = Cluster::from_one_based(&[1, 2]).unwrap();
        assert!(check_internal_lower_bound(&sys, &z, &inside, &ladder, 10, 9).is_err());
    }

    #[test]
    fn lower_bound_negative_control() {
        let sys = MassSystem::equal_masses(1, 3).unwrap();
        let ladder = azs_ladder(&sys, 2, 1.0, 0.5).unwrap().with_inflated_kappa(100.0);
        let z = Partition::from_one_based(3, &[vec![1, 2], vec![3]]).unwrap();
        let c = Cluster::from_one_based(&[1, 3]).unwrap();
        let rep = check_internal_lower_bound(&sys, &z, &c, &ladder, 10_000, 9).unwrap();
        assert!(rep.violations > 0);
    }

    #[test]
    fn separation_rejects_equal_partitions() {
        let sys = MassSystem::equal_masses(1, 3).unwrap();
        let ladder = azs_ladder(&sys, 2, 1.0, 0.5).unwrap();
        let z = Partition::from_one_based(3, &[vec![1, 2], vec![3]]).unwrap();
        assert!(check_cone_separation(&sys, &z, &z, &ladder, 10, 1).is_err());
    }

    #[test]
    fn separation_three_bodies_one_dimension() {
        let sys = MassSystem::equal_masses(1, 3).unwrap();
        let ladder = azs_ladder(&sys, 2, 1.0, 0.5).unwrap();
        let a = Partition::from_one_based(3, &[vec![1, 2], vec![3]]).unwrap();
        let b = Partition::from_one_based(3, &[vec![1, 3], vec![2]]).unwrap();
        let rep = check_cone_separation(&sys, &a, &b, &ladder, 10_000, 17).unwrap();
        assert_eq!(rep.samples, 10_000);
        assert_eq!(rep.violations, 0);
    }

    #[test]
    fn separation_four_bodies_populates_intersection() {
        let sys = MassSystem::equal_masses(3, 4).unwrap();
        let ladder = azs_ladder(&sys, 3, 1.0, 0.5).unwrap();
        let a = Partition::from_one_based(4, &[vec![1, 2], vec![3], vec![4]]).unwrap();
        let b = Partition::from_one_based(4, &[vec![1, 3], vec![2], vec![4]]).unwrap();
        let rep = check_cone_separation(&sys, &a, &b, &ladder, 4000, 5).unwrap();
        assert_eq!(rep.violations, 0);
        assert!(rep.in_intersection > 100);
        assert!(rep.worst_margin.unwrap() >= 0.0);
        assert_eq!(rep.absorbed_by_order.iter().sum::<usize>(), rep.in_intersection);
    }

    #[test]
    fn separation_negative_control() {
        let sys = MassSystem::equal_masses(1, 3).unwrap();
        let ladder = azs_ladder(&sys, 2, 1.0, 0.5).unwrap().with_inflated_kappa(100.0);
        let a = Partition::from_one_based(3, &[vec![1, 2], vec![3]]).unwrap();
        let b = Partition::from_one_based(3, &[vec![1, 3], vec![2]]).unwrap();
        let rep = check_cone_separation(&sys, &a, &b, &ladder, 5000, 17).unwrap();
        assert!(rep.violations > 0, "{rep:?}");
    }
}
