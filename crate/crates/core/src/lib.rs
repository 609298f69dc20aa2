//! Numerical laboratory for virtual levels of Schrödinger operators.
//!
//! * [`geometry`]: mass-weighted N-body configuration space, cluster projections,
//!   cones `K(Z, κ)` and the Antonets–Zhislin–Shereshevskij constant ladder.
//! * [`cutoffs`]: IMS partitions of unity (radial and cone-ratio) with certified
//!   localization-error bounds.
//! * [`hardy`]: Hardy constants, decay-exponent bounds and the three-fermion
//!   angular Hardy constant.
//! * [`spectral`]: radial discretization, Sturm-sequence eigensolver, critical
//!   couplings, zero-energy decay fits and the inverse-square counting model.

pub mod cutoffs;
pub mod error;
pub mod geometry;
pub mod hardy;
pub mod rng;
pub mod spectral;

pub use error::{Error, Result};
pub use geometry::{AzsLadder, Cluster, Configuration, MassSystem, Partition};
pub use hardy::{Classification, DecayBound, DecayQuery};
pub use spectral::{PotentialSpec, RadialProblem, Shape, SpectralReport};
