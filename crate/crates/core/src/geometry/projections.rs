use super::{Cluster, Configuration, MassSystem, Partition, X0_TOL};
use crate::error::{arg, Result};

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// `⟨x, y⟩_m = Σᵢ mᵢ⟨xᵢ, yᵢ⟩`.
pub fn mass_inner(sys: &MassSystem, x: &Configuration, y: &Configuration) -> Result<f64> {
    sys.check_config(x)?;
    sys.check_config(y)?;
    let n = sys.dim();
    Ok((0..sys.particles())
        .map(|i| sys.mass(i) * dot(x.particle(n, i), y.particle(n, i)))
        .sum())
}

pub fn mass_norm(sys: &MassSystem, x: &Configuration) -> Result<f64> {
    Ok(mass_inner(sys, x, x)?.sqrt())
}

fn weighted_mean(sys: &MassSystem, members: &[usize], x: &Configuration) -> Vec<f64> {
    let n = sys.dim();
    let mut acc = vec![0.0; n];
    let mut total = 0.0;
    for &i in members {
        let m = sys.mass(i);
        total += m;
        for (a, v) in acc.iter_mut().zip(x.particle(n, i)) {
            *a += m * v;
        }
    }
    acc.iter_mut().for_each(|a| *a /= total);
    acc
}

/// Cluster center of mass `x_c[C] = M[C]⁻¹ Σ_{i∈C} mᵢxᵢ`.
pub fn cluster_cm(sys: &MassSystem, c: &Cluster, x: &Configuration) -> Result<Vec<f64>> {
    sys.check_config(x)?;
    sys.check_cluster(c)?;
    if c.is_empty() {
        return arg("empty cluster");
    }
    Ok(weighted_mean(sys, c.members(), x))
}

/// Whether `Σ mᵢxᵢ = 0` up to `X0_TOL·|x|_m`.
pub fn in_x0(sys: &MassSystem, x: &Configuration) -> Result<bool> {
    sys.check_config(x)?;
    let all: Vec<usize> = (0..sys.particles()).collect();
    let cm = weighted_mean(sys, &all, x);
    // |P_c x|_m = √M · |x_cm|
    let cm_norm = (sys.total_mass() * dot(&cm, &cm)).sqrt();
    let scale = mass_norm(sys, x)?;
    Ok(cm_norm <= X0_TOL * scale.max(f64::MIN_POSITIVE))
}

fn require_x0(sys: &MassSystem, x: &Configuration) -> Result<()> {
    if !in_x0(sys, x)? {
        return arg("configuration is not in the relative space X₀ (Σ mᵢxᵢ ≠ 0)");
    }
    Ok(())
}

/// Projection `X → X₀`: subtract the total center of mass.
pub fn to_relative(sys: &MassSystem, x: &Configuration) -> Result<Configuration> {
    project_internal(sys, &Cluster::new((0..sys.particles()).collect())?, x)
}

/// `P₀[C]x`: component `i ∈ C` is `xᵢ − x_c[C]`, all other components vanish.
pub fn project_internal(sys: &MassSystem, c: &Cluster, x: &Configuration) -> Result<Configuration> {
    let cm = cluster_cm(sys, c, x)?;
    let n = sys.dim();
    let mut out = Configuration::zeros(sys);
    for &i in c.members() {
        for ((o, v), m) in out.particle_mut(n, i).iter_mut().zip(x.particle(n, i)).zip(&cm) {
            *o = v - m;
        }
    }
    Ok(out)
}

/// `P_c[C]x`: component `i ∈ C` is `x_c[C]`, all other components vanish.
pub fn project_cluster_cm(
    sys: &MassSystem,
    c: &Cluster,
    x: &Configuration,
) -> Result<Configuration> {
    let cm = cluster_cm(sys, c, x)?;
    let n = sys.dim();
    let mut out = Configuration::zeros(sys);
    for &i in c.members() {
        out.particle_mut(n, i).copy_from_slice(&cm);
    }
    Ok(out)
}

/// Split `x ∈ X₀` into `q(Z) = P₀(Z)x` and `ξ(Z) = P_c(Z)x`.
pub fn project_partition(
    sys: &MassSystem,
    z: &Partition,
    x: &Configuration,
) -> Result<(Configuration, Configuration)> {
    sys.check_partition(z)?;
    require_x0(sys, x)?;
    Ok(split(sys, z, x))
}

/// Unchecked split; callers guarantee shapes and `x ∈ X₀`.
pub(crate) fn split(
    sys: &MassSystem,
    z: &Partition,
    x: &Configuration,
) -> (Configuration, Configuration) {
    let n = sys.dim();
    let mut xi = Configuration::zeros(sys);
    for c in z.clusters() {
        let cm = weighted_mean(sys, c.members(), x);
        for &i in c.members() {
            xi.particle_mut(n, i).copy_from_slice(&cm);
        }
    }
    (x.sub(&xi), xi)
}

/// Squared norms `(|q(Z)|²_m, |ξ(Z)|²_m)` without allocating the split.
pub(crate) fn split_norms_sq(sys: &MassSystem, z: &Partition, x: &Configuration) -> (f64, f64) {
    const STACK_DIM: usize = 8;
    let n = sys.dim();
    if n > STACK_DIM {
        return split_norms_sq_heap(sys, z, x);
    }
    let mut q2 = 0.0;
    let mut xi2 = 0.0;
    for c in z.clusters() {
        let mut cm = [0.0; STACK_DIM];
        let mut total = 0.0;
        for &i in c.members() {
            let m = sys.mass(i);
            total += m;
            for (a, v) in cm.iter_mut().zip(x.particle(n, i)) {
                *a += m * v;
            }
        }
        let cm = &mut cm[..n];
        cm.iter_mut().for_each(|a| *a /= total);
        xi2 += total * dot(cm, cm);
        for &i in c.members() {
            let d: f64 = x.particle(n, i).iter().zip(cm.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
            q2 += sys.mass(i) * d;
        }
    }
    (q2, xi2)
}

fn split_norms_sq_heap(sys: &MassSystem, z: &Partition, x: &Configuration) -> (f64, f64) {
    let n = sys.dim();
    let mut q2 = 0.0;
    let mut xi2 = 0.0;
    for c in z.clusters() {
        let cm = weighted_mean(sys, c.members(), x);
        xi2 += sys.cluster_mass(c) * dot(&cm, &cm);
        for &i in c.members() {
            let d: f64 = x.particle(n, i).iter().zip(&cm).map(|(a, b)| (a - b) * (a - b)).sum();
            q2 += sys.mass(i) * d;
        }
    }
    (q2, xi2)
}

/// Internal Gram identity for `P₀[C]`.
///
/// Returns `(⟨P₀[C]x, P₀[C]y⟩_m, (2M[C])⁻¹ Σ_{i,j∈C} mᵢmⱼ⟨xᵢ−xⱼ, yᵢ−yⱼ⟩)`.
pub fn gram_identity_internal(
    sys: &MassSystem,
    c: &Cluster,
    x: &Configuration,
    y: &Configuration,
) -> Result<(f64, f64)> {
    let px = project_internal(sys, c, x)?;
    let py = project_internal(sys, c, y)?;
    let lhs = mass_inner(sys, &px, &py)?;
    let n = sys.dim();
    let mut sum = 0.0;
    for &i in c.members() {
        for &j in c.members() {
            let dx: Vec<f64> = x.particle(n, i).iter().zip(x.particle(n, j)).map(|(a, b)| a - b).collect();
            let dy: Vec<f64> = y.particle(n, i).iter().zip(y.particle(n, j)).map(|(a, b)| a - b).collect();
            sum += sys.mass(i) * sys.mass(j) * dot(&dx, &dy);
        }
    }
    Ok((lhs, sum / (2.0 * sys.cluster_mass(c))))
}

/// Center-of-mass Gram identity for `P_c(Z)` on `X₀`.
///
/// Returns `(⟨P_c(Z)x, P_c(Z)y⟩_m, (2M)⁻¹ Σ_{C′,C″} M[C′]M[C″]⟨x_c[C′]−x_c[C″], y_c[C′]−y_c[C″]⟩)`.
pub fn gram_identity_cm(
    sys: &MassSystem,
    z: &Partition,
    x: &Configuration,
    y: &Configuration,
) -> Result<(f64, f64)> {
    sys.check_partition(z)?;
    require_x0(sys, x)?;
    require_x0(sys, y)?;
    let (_, xi_x) = split(sys, z, x);
    let (_, xi_y) = split(sys, z, y);
    let lhs = mass_inner(sys, &xi_x, &xi_y)?;
    Ok((lhs, cm_pair_sum(sys, z, x, y)))
}

fn cm_pair_sum(sys: &MassSystem, z: &Partition, x: &Configuration, y: &Configuration) -> f64 {
    let cms: Vec<(f64, Vec<f64>, Vec<f64>)> = z
        .clusters()
        .iter()
        .map(|c| {
            (
                sys.cluster_mass(c),
                weighted_mean(sys, c.members(), x),
                weighted_mean(sys, c.members(), y),
            )
        })
        .collect();
    let mut sum = 0.0;
    for (ma, xa, ya) in &cms {
        for (mb, xb, yb) in &cms {
            let dx: Vec<f64> = xa.iter().zip(xb).map(|(a, b)| a - b).collect();
            let dy: Vec<f64> = ya.iter().zip(yb).map(|(a, b)| a - b).collect();
            sum += ma * mb * dot(&dx, &dy);
        }
    }
    sum / (2.0 * sys.total_mass())
}

/// Change of the center-of-mass form when two clusters of `z` are united.
///
/// Returns `(⟨P_c(Z)x,P_c(Z)y⟩_m − ⟨P_c(Z̃)x,P_c(Z̃)y⟩_m,
/// μ₁₂⟨x_c[C₁]−x_c[C₂], y_c[C₁]−y_c[C₂]⟩)` with reduced mass
/// `μ₁₂ = M[C₁]M[C₂]/(M[C₁]+M[C₂])`.
pub fn merge_difference(
    sys: &MassSystem,
    z: &Partition,
    z_merged: &Partition,
    x: &Configuration,
    y: &Configuration,
) -> Result<(f64, f64)> {
    sys.check_partition(z)?;
    sys.check_partition(z_merged)?;
    let Some((a, b)) = z.merged_pair(z_merged) else {
        return arg(format!("{z_merged} is not obtained from {z} by uniting two clusters"));
    };
    require_x0(sys, x)?;
    require_x0(sys, y)?;
    let (_, xi_x) = split(sys, z, x);
    let (_, xi_y) = split(sys, z, y);
    let (_, mxi_x) = split(sys, z_merged, x);
    let (_, mxi_y) = split(sys, z_merged, y);
    let lhs = mass_inner(sys, &xi_x, &xi_y)? - mass_inner(sys, &mxi_x, &mxi_y)?;

    let (c1, c2) = (&z.clusters()[a], &z.clusters()[b]);
    let (m1, m2) = (sys.cluster_mass(c1), sys.cluster_mass(c2));
    let dx: Vec<f64> = weighted_mean(sys, c1.members(), x)
        .iter()
        .zip(weighted_mean(sys, c2.members(), x))
        .map(|(p, q)| p - q)
        .collect();
    let dy: Vec<f64> = weighted_mean(sys, c1.members(), y)
        .iter()
        .zip(weighted_mean(sys, c2.members(), y))
        .map(|(p, q)| p - q)
        .collect();
    Ok((lhs, m1 * m2 / (m1 + m2) * dot(&dx, &dy)))
}

/// Membership in the cone `K(Z, κ)`.
///
/// For `1 < |Z| < N` this is `|q(Z)|_m ≤ κ|ξ(Z)|_m`; the one-cluster
/// partition uses the ball `|x|_m ≤ κ`. The all-singleton partition has
/// `q = 0` and therefore contains every configuration.
pub fn in_cone(sys: &MassSystem, z: &Partition, kappa: f64, x: &Configuration) -> Result<bool> {
    if !(kappa > 0.0) {
        return arg(format!("cone aperture must be positive, got {kappa}"));
    }
    sys.check_partition(z)?;
    require_x0(sys, x)?;
    Ok(in_cone_unchecked(sys, z, kappa, x))
}

pub(crate) fn in_cone_unchecked(sys: &MassSystem, z: &Partition, kappa: f64, x: &Configuration) -> bool {
    if z.order() == 1 {
        return mass_inner(sys, x, x).map_or(false, |r2| r2.sqrt() <= kappa);
    }
    let (q2, xi2) = split_norms_sq(sys, z, x);
    q2.sqrt() <= kappa * xi2.sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::sample_unit_relative;
    use crate::rng;
    use rand::Rng;

    fn cfg(v: &[f64]) -> Configuration {
        Configuration::from_flat(v.to_vec())
    }

    #[test]
    fn mass_inner_examples() {
        let sys = MassSystem::new(1, vec![1.0, 1.0]).unwrap();
        let z = Configuration::zeros(&sys);
        assert_eq!(mass_inner(&sys, &z, &z).unwrap(), 0.0);
        let x = cfg(&[1.0, -1.0]);
        assert_eq!(mass_inner(&sys, &x, &x).unwrap(), 2.0);
        assert!(mass_inner(&sys, &x, &cfg(&[1.0])).is_err());
    }

    #[test]
    fn cluster_cm_examples() {
        let sys = MassSystem::new(1, vec![1.0, 3.0]).unwrap();
        let c = Cluster::new(vec![0, 1]).unwrap();
        assert_eq!(cluster_cm(&sys, &c, &cfg(&[0.0, 4.0])).unwrap(), vec![3.0]);
        let sys3 = MassSystem::new(2, vec![1.0, 2.0, 5.0]).unwrap();
        let v = cfg(&[0.3, -1.2, 0.3, -1.2, 0.3, -1.2]);
        let all = Cluster::new(vec![0, 1, 2]).unwrap();
        let cm = cluster_cm(&sys3, &all, &v).unwrap();
        assert!((cm[0] - 0.3).abs() < 1e-15 && (cm[1] + 1.2).abs() < 1e-15);
    }

    #[test]
    fn project_internal_kills_translation_and_is_idempotent() {
        let sys = MassSystem::new(2, vec![1.0, 2.0, 0.5]).unwrap();
        let c = Cluster::new(vec![0, 2]).unwrap();
        let t = cfg(&[1.0, 2.0, 1.0, 2.0, 1.0, 2.0]);
        let p = project_internal(&sys, &c, &t).unwrap();
        assert!(p.as_slice().iter().all(|v| v.abs() < 1e-15));
        let x = cfg(&[0.1, 0.7, -2.0, 0.4, 1.5, -0.9]);
        let p1 = project_internal(&sys, &c, &x).unwrap();
        let p2 = project_internal(&sys, &c, &p1).unwrap();
        for (a, b) in p1.as_slice().iter().zip(p2.as_slice()) {
            assert!((a - b).abs() < 1e-14);
        }
        // component outside C vanishes
        assert_eq!(p1.particle(2, 1), &[0.0, 0.0]);
    }

    #[test]
    fn project_partition_extremes() {
        let sys = MassSystem::new(2, vec![1.0, 2.0, 3.0]).unwrap();
        let mut r = rng::seeded(5);
        let x = sample_unit_relative(&sys, &mut r);
        let (q, xi) = project_partition(&sys, &Partition::whole(3), &x).unwrap();
        assert!(q.sub(&x).as_slice().iter().all(|v| v.abs() < 1e-14));
        assert!(xi.as_slice().iter().all(|v| v.abs() < 1e-14));
        let (q, xi) = project_partition(&sys, &Partition::singletons(3), &x).unwrap();
        assert!(q.as_slice().iter().all(|v| v.abs() < 1e-14));
        assert!(xi.sub(&x).as_slice().iter().all(|v| v.abs() < 1e-14));
        let off = cfg(&[1.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        assert!(project_partition(&sys, &Partition::whole(3), &off).is_err());
    }

    #[test]
    fn gram_internal_hand_values() {
        let sys = MassSystem::new(1, vec![1.0, 1.0]).unwrap();
        let c = Cluster::new(vec![0, 1]).unwrap();
        let x = cfg(&[1.0, -1.0]);
        let (l, r) = gram_identity_internal(&sys, &c, &x, &x).unwrap();
        assert!((l - 2.0).abs() < 1e-15 && (r - 2.0).abs() < 1e-15);
        let t = cfg(&[4.0, 4.0]);
        assert_eq!(gram_identity_internal(&sys, &c, &t, &t).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn gram_cm_extremes() {
        let sys = MassSystem::new(3, vec![1.0, 2.0, 3.0, 0.5]).unwrap();
        let mut r = rng::seeded(11);
        let x = sample_unit_relative(&sys, &mut r);
        let y = sample_unit_relative(&sys, &mut r);
        let (l, rr) = gram_identity_cm(&sys, &Partition::whole(4), &x, &y).unwrap();
        assert!(l.abs() < 1e-14 && rr.abs() < 1e-14);
        let (l, _) = gram_identity_cm(&sys, &Partition::singletons(4), &x, &y).unwrap();
        assert!((l - mass_inner(&sys, &x, &y).unwrap()).abs() < 1e-14);
    }

    #[test]
    fn merge_difference_two_body_reduced_mass() {
        let sys = MassSystem::new(2, vec![2.0, 3.0]).unwrap();
        let x = to_relative(&sys, &cfg(&[1.0, 0.5, -0.2, 0.9])).unwrap();
        let y = to_relative(&sys, &cfg(&[0.3, -1.0, 0.7, 0.2])).unwrap();
        let z = Partition::singletons(2);
        let (l, r) = merge_difference(&sys, &z, &Partition::whole(2), &x, &y).unwrap();
        let n = 2;
        let dx: Vec<f64> = (0..n).map(|k| x.particle(n, 0)[k] - x.particle(n, 1)[k]).collect();
        let dy: Vec<f64> = (0..n).map(|k| y.particle(n, 0)[k] - y.particle(n, 1)[k]).collect();
        let hand = 2.0 * 3.0 / 5.0 * dot(&dx, &dy);
        assert!((l - hand).abs() < 1e-14 && (r - hand).abs() < 1e-14);
        // illegal merge
        assert!(merge_difference(&sys, &Partition::whole(2), &z, &x, &y).is_err());
    }

    #[test]
    fn merge_difference_coincident_centers() {
        let sys = MassSystem::new(1, vec![1.0, 1.0, 1.0, 1.0]).unwrap();
        // clusters {1,2} and {3,4} share the center 0
        let x = cfg(&[-1.0, 1.0, -2.0, 2.0]);
        let z = Partition::from_one_based(4, &[vec![1, 2], vec![3, 4]]).unwrap();
        let (l, r) = merge_difference(&sys, &z, &Partition::whole(4), &x, &x).unwrap();
        assert!(l.abs() < 1e-15 && r == 0.0);
    }

    #[test]
    fn cone_membership_examples() {
        let sys = MassSystem::new(1, vec![1.0, 1.0, 1.0]).unwrap();
        let z = Partition::from_one_based(3, &[vec![1, 2], vec![3]]).unwrap();
        let zero = Configuration::zeros(&sys);
        for k in [1e-6, 0.5, 3.0] {
            assert!(in_cone(&sys, &z, k, &zero).unwrap());
            assert!(in_cone(&sys, &Partition::whole(3), k, &zero).unwrap());
        }
        // particles 1 and 2 coincide: q = 0, ξ ≠ 0
        let collapsed = cfg(&[-1.0, -1.0, 2.0]);
        assert!(in_cone(&sys, &z, 1e-9, &collapsed).unwrap());
        // |q| = |ξ|: q has (a,-a,0) with |q|² = 2a², ξ = (b,b,-2b) with |ξ|² = 6b²
        let a = 3f64.sqrt();
        let x = cfg(&[a + 1.0, -a + 1.0, -2.0]);
        let (q, xi) = project_partition(&sys, &z, &x).unwrap();
        let (nq, nx) = (mass_norm(&sys, &q).unwrap(), mass_norm(&sys, &xi).unwrap());
        assert!((nq - nx).abs() < 1e-12);
        assert!(!in_cone(&sys, &z, 0.5, &x).unwrap());
        assert!(in_cone(&sys, &Partition::singletons(3), 1e-9, &x).unwrap());
        assert!(in_cone(&sys, &z, 0.0, &x).is_err());
    }

    #[test]
    fn seeded_cauchy_schwarz_and_positivity() {
        let mut r = rng::seeded(1);
        for _ in 0..1000 {
            let n = r.random_range(1..=3);
            let parts = r.random_range(2..=6);
            let masses: Vec<f64> = (0..parts).map(|_| r.random_range(0.1..10.0)).collect();
            let sys = MassSystem::new(n, masses).unwrap();
            let x = cfg(&(0..n * parts).map(|_| r.random_range(-5.0..5.0)).collect::<Vec<_>>());
            let y = cfg(&(0..n * parts).map(|_| r.random_range(-5.0..5.0)).collect::<Vec<_>>());
            let xy = mass_inner(&sys, &x, &y).unwrap();
            let xx = mass_inner(&sys, &x, &x).unwrap();
            let yy = mass_inner(&sys, &y, &y).unwrap();
            assert!(xx > 0.0 && yy > 0.0);
            assert!(xy * xy <= xx * yy * (1.0 + 1e-12));
            assert_eq!(xy, mass_inner(&sys, &y, &x).unwrap());
        }
    }

    #[test]
    fn seeded_orthogonality_of_internal_projection() {
        let mut r = rng::seeded(2);
        for _ in 0..1000 {
            let n = r.random_range(1..=3);
            let parts = r.random_range(2..=6);
            let masses: Vec<f64> = (0..parts).map(|_| r.random_range(0.1..10.0)).collect();
            let sys = MassSystem::new(n, masses).unwrap();
            let members: Vec<usize> = (0..parts).filter(|_| r.random_bool(0.6)).collect();
            let Ok(c) = Cluster::new(members) else { continue };
            let x = cfg(&(0..n * parts).map(|_| r.random_range(-1.0..1.0)).collect::<Vec<_>>());
            let y = cfg(&(0..n * parts).map(|_| r.random_range(-1.0..1.0)).collect::<Vec<_>>());
            let px = project_internal(&sys, &c, &x).unwrap();
            let py = project_internal(&sys, &c, &y).unwrap();
            let ip = mass_inner(&sys, &px, &y.sub(&py)).unwrap();
            let scale = mass_norm(&sys, &x).unwrap() * mass_norm(&sys, &y).unwrap();
            assert!(ip.abs() <= 1e-12 * scale.max(1.0));
        }
    }
}
