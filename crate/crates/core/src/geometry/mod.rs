//! Configuration space of N particles in ℝⁿ under the mass-weighted inner
//! product `⟨x, y⟩_m = Σ mᵢ⟨xᵢ, yᵢ⟩`.
//!
//! Particle indices are zero-based throughout the API; [`Partition`] and
//! [`Cluster`] print themselves one-based to match the usual notation.

pub(crate) mod cones;
mod identities;
mod ladder;
pub(crate) mod projections;

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{arg, Result};

pub use cones::{
    check_cone_separation, check_internal_lower_bound, sample_in_cone, sample_unit_relative,
    LowerBoundReport, SeparationReport,
};
pub use identities::{identity_suite, random_masses, IdentityReport};
pub use ladder::{azs_ladder, AzsLadder, LadderRung};
pub use projections::{
    cluster_cm, gram_identity_cm, gram_identity_internal, in_cone, in_x0, mass_inner, mass_norm,
    merge_difference, project_cluster_cm, project_internal, project_partition, to_relative,
};

/// Relative tolerance for exact algebraic identities.
pub const IDENTITY_TOL: f64 = 1e-12;
/// Membership tolerance for `X₀`, relative to `|x|_m`.
pub const X0_TOL: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MassSystem {
    n: usize,
    masses: Vec<f64>,
}

impl MassSystem {
    pub fn new(n: usize, masses: Vec<f64>) -> Result<Self> {
        if n == 0 {
            return arg("spatial dimension must be positive");
        }
        if masses.len() < 2 {
            return arg(format!("need at least two particles, got {}", masses.len()));
        }
        if let Some(m) = masses.iter().find(|m| !(m.is_finite() && **m > 0.0)) {
            return arg(format!("masses must be finite and positive, got {m}"));
        }
        Ok(Self { n, masses })
    }

    pub fn equal_masses(n: usize, particles: usize) -> Result<Self> {
        Self::new(n, vec![1.0; particles])
    }

    /// Spatial dimension of each particle.
    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn particles(&self) -> usize {
        self.masses.len()
    }

    pub fn masses(&self) -> &[f64] {
        &self.masses
    }

    pub fn mass(&self, i: usize) -> f64 {
        self.masses[i]
    }

    /// `M = Σ mᵢ`.
    pub fn total_mass(&self) -> f64 {
        self.masses.iter().sum()
    }

    /// `m = min mᵢ`.
    pub fn min_mass(&self) -> f64 {
        self.masses.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn cluster_mass(&self, c: &Cluster) -> f64 {
        c.members().iter().map(|&i| self.masses[i]).sum()
    }

    /// Length `nN` of a flat configuration vector.
    pub fn config_len(&self) -> usize {
        self.n * self.masses.len()
    }

    /// Dimension of the relative space `X₀`, i.e. `n(N − 1)`.
    pub fn relative_dim(&self) -> usize {
        self.n * (self.masses.len() - 1)
    }

    pub(crate) fn check_config(&self, x: &Configuration) -> Result<()> {
        if x.coords.len() != self.config_len() {
            return arg(format!(
                "configuration has {} coordinates, system expects {}",
                x.coords.len(),
                self.config_len()
            ));
        }
        Ok(())
    }

    pub(crate) fn check_cluster(&self, c: &Cluster) -> Result<()> {
        if let Some(&i) = c.members().iter().find(|&&i| i >= self.particles()) {
            return arg(format!(
                "cluster index {} out of range for {} particles",
                i + 1,
                self.particles()
            ));
        }
        Ok(())
    }

    pub(crate) fn check_partition(&self, z: &Partition) -> Result<()> {
        if z.particles() != self.particles() {
            return arg(format!(
                "partition covers {} particles, system has {}",
                z.particles(),
                self.particles()
            ));
        }
        Ok(())
    }
}

/// N vectors in ℝⁿ stored as one flat array of length `nN`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Configuration {
    coords: Vec<f64>,
}

impl Configuration {
    pub fn from_flat(coords: Vec<f64>) -> Self {
        Self { coords }
    }

    pub fn zeros(sys: &MassSystem) -> Self {
        Self {
            coords: vec![0.0; sys.config_len()],
        }
    }

    /// Build from per-particle vectors; all must share one length.
    pub fn from_particles(particles: &[Vec<f64>]) -> Result<Self> {
        let n = particles.first().map_or(0, Vec::len);
        if particles.iter().any(|p| p.len() != n) {
            return arg("particle vectors have differing dimensions");
        }
        Ok(Self {
            coords: particles.iter().flatten().copied().collect(),
        })
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.coords
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.coords
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.coords
    }

    pub fn particle(&self, n: usize, i: usize) -> &[f64] {
        &self.coords[i * n..(i + 1) * n]
    }

    pub fn particle_mut(&mut self, n: usize, i: usize) -> &mut [f64] {
        &mut self.coords[i * n..(i + 1) * n]
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self {
            coords: self.coords.iter().map(|v| v * s).collect(),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a + b).collect(),
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            coords: self.coords.iter().zip(&other.coords).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Nonempty set of particle indices, kept sorted.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Cluster {
    members: Vec<usize>,
}

impl Cluster {
    pub fn new(mut members: Vec<usize>) -> Result<Self> {
        if members.is_empty() {
            return arg("cluster must be nonempty");
        }
        members.sort_unstable();
        if members.windows(2).any(|w| w[0] == w[1]) {
            return arg(format!("duplicate particle in cluster {members:?}"));
        }
        Ok(Self { members })
    }

    /// Convenience for one-based index lists.
    pub fn from_one_based(members: &[usize]) -> Result<Self> {
        if members.contains(&0) {
            return arg("one-based cluster contains index 0");
        }
        Self::new(members.iter().map(|i| i - 1).collect())
    }

    pub fn members(&self) -> &[usize] {
        &self.members
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn contains(&self, i: usize) -> bool {
        self.members.binary_search(&i).is_ok()
    }

    pub fn is_subset_of(&self, other: &Cluster) -> bool {
        self.members.iter().all(|&i| other.contains(i))
    }

    fn smallest(&self) -> usize {
        self.members[0]
    }
}

impl fmt::Display for Cluster {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("{")?;
        for (k, i) in self.members.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{}", i + 1)?;
        }
        f.write_str("}")
    }
}

/// Cluster decomposition `Z = (C₁, …, C_p)` of `{0, …, N−1}`.
///
/// Canonical form: clusters ordered by their smallest member, so structural
/// equality coincides with equality of set partitions.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Partition {
    particles: usize,
    clusters: Vec<Cluster>,
}

impl Partition {
    pub fn new(particles: usize, mut clusters: Vec<Cluster>) -> Result<Self> {
        let mut seen = vec![false; particles];
        for c in &clusters {
            for &i in c.members() {
                if i >= particles {
                    return arg(format!("index {} exceeds particle count {particles}", i + 1));
                }
                if seen[i] {
                    return arg(format!("particle {} appears in two clusters", i + 1));
                }
                seen[i] = true;
            }
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return arg(format!("particle {} not covered by partition", i + 1));
        }
        clusters.sort_by_key(Cluster::smallest);
        Ok(Self {
            particles,
            clusters,
        })
    }

    pub fn from_one_based(particles: usize, clusters: &[Vec<usize>]) -> Result<Self> {
        let clusters = clusters
            .iter()
            .map(|c| Cluster::from_one_based(c))
            .collect::<Result<Vec<_>>>()?;
        Self::new(particles, clusters)
    }

    /// The one-cluster partition `Z₁ = ({1, …, N})`.
    pub fn whole(particles: usize) -> Self {
        Self {
            particles,
            clusters: vec![Cluster {
                members: (0..particles).collect(),
            }],
        }
    }

    pub fn singletons(particles: usize) -> Self {
        Self {
            particles,
            clusters: (0..particles).map(|i| Cluster { members: vec![i] }).collect(),
        }
    }

    /// Order `|Z|`.
    pub fn order(&self) -> usize {
        self.clusters.len()
    }

    pub fn particles(&self) -> usize {
        self.particles
    }

    pub fn clusters(&self) -> &[Cluster] {
        &self.clusters
    }

    pub fn cluster_index_of(&self, particle: usize) -> Option<usize> {
        self.clusters.iter().position(|c| c.contains(particle))
    }

    /// Unite clusters `a` and `b` (indices into [`Self::clusters`]).
    pub fn merge(&self, a: usize, b: usize) -> Result<Self> {
        if a == b || a >= self.order() || b >= self.order() {
            return arg(format!("cannot merge clusters {a} and {b} of {self}"));
        }
        let mut merged = self.clusters[a].members.clone();
        merged.extend_from_slice(&self.clusters[b].members);
        let mut clusters: Vec<Cluster> = self
            .clusters
            .iter()
            .enumerate()
            .filter(|(k, _)| *k != a && *k != b)
            .map(|(_, c)| c.clone())
            .collect();
        clusters.push(Cluster::new(merged)?);
        Self::new(self.particles, clusters)
    }

    /// If `coarser` arises from `self` by uniting exactly two clusters, return
    /// their indices in `self`.
    pub fn merged_pair(&self, coarser: &Partition) -> Option<(usize, usize)> {
        if coarser.particles != self.particles || coarser.order() + 1 != self.order() {
            return None;
        }
        for a in 0..self.order() {
            for b in a + 1..self.order() {
                if self.merge(a, b).ok().as_ref() == Some(coarser) {
                    return Some((a, b));
                }
            }
        }
        None
    }

    /// Does some cluster of `self` contain `c`?
    pub fn refines_cluster(&self, c: &Cluster) -> bool {
        self.clusters.iter().any(|ci| c.is_subset_of(ci))
    }

    /// Finest common coarsening of two partitions.
    pub fn join(&self, other: &Partition) -> Result<Self> {
        if self.particles != other.particles {
            return arg("partitions of different particle counts");
        }
        let n = self.particles;
        let mut parent: Vec<usize> = (0..n).collect();
        fn find(p: &mut [usize], i: usize) -> usize {
            let mut r = i;
            while p[r] != r {
                r = p[r];
            }
            let mut j = i;
            while p[j] != r {
                let next = p[j];
                p[j] = r;
                j = next;
            }
            r
        }
        for c in self.clusters.iter().chain(&other.clusters) {
            let first = c.members[0];
            for &i in &c.members[1..] {
                let (ra, rb) = (find(&mut parent, first), find(&mut parent, i));
                if ra != rb {
                    parent[rb] = ra;
                }
            }
        }
        let mut groups: Vec<Vec<usize>> = Vec::new();
        let mut root_slot = vec![usize::MAX; n];
        for i in 0..n {
            let r = find(&mut parent, i);
            if root_slot[r] == usize::MAX {
                root_slot[r] = groups.len();
                groups.push(Vec::new());
            }
            groups[root_slot[r]].push(i);
        }
        Self::new(n, groups.into_iter().map(|m| Cluster { members: m }).collect())
    }

    /// All set partitions of `particles` elements, in restricted-growth order.
    pub fn enumerate(particles: usize) -> Vec<Partition> {
        let mut out = Vec::new();
        if particles == 0 {
            return out;
        }
        let mut labels = vec![0usize; particles];
        loop {
            let blocks = labels.iter().max().unwrap() + 1;
            let mut clusters = vec![Vec::new(); blocks];
            for (i, &b) in labels.iter().enumerate() {
                clusters[b].push(i);
            }
            out.push(Partition {
                particles,
                clusters: clusters.into_iter().map(|m| Cluster { members: m }).collect(),
            });
            // next restricted growth string
            let mut i = particles - 1;
            loop {
                if i == 0 {
                    return out;
                }
                let max_prefix = labels[..i].iter().max().copied().unwrap_or(0);
                if labels[i] <= max_prefix {
                    labels[i] += 1;
                    for l in labels.iter_mut().skip(i + 1) {
                        *l = 0;
                    }
                    break;
                }
                i -= 1;
            }
        }
    }

    pub fn of_order(particles: usize, order: usize) -> Vec<Partition> {
        Self::enumerate(particles)
            .into_iter()
            .filter(|z| z.order() == order)
            .collect()
    }
}

impl fmt::Display for Partition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str("(")?;
        for (k, c) in self.clusters.iter().enumerate() {
            if k > 0 {
                f.write_str(",")?;
            }
            write!(f, "{c}")?;
        }
        f.write_str(")")
    }
}
