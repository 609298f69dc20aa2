//! Shared inputs for the criterion benchmarks.

use vlab_core::geometry::{MassSystem, Partition};
use vlab_core::spectral::RadialGrid;
use vlab_core::Shape;

pub const UNIT_WELL: Shape = Shape::SquareWell { depth: 1.0, radius: 1.0 };

pub fn grid(points: usize) -> RadialGrid {
    RadialGrid { r_max: 200.0, points }
}

pub fn four_body() -> MassSystem {
    MassSystem::new(3, vec![0.5, 1.0, 3.0, 8.0]).expect("valid masses")
}

/// Two order-3 partitions of four particles whose cones intersect.
pub fn order3_pair() -> (Partition, Partition) {
    (
        Partition::from_one_based(4, &[vec![1, 2], vec![3], vec![4]]).expect("valid"),
        Partition::from_one_based(4, &[vec![1, 3], vec![2], vec![4]]).expect("valid"),
    )
}
