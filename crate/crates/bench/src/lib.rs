//! Benchmark fixtures shared by the criterion targets.

use polystar_core::{RadialDensity, RadialGrid};

/// A smooth bump of unit width sampled on `n` nodes.
pub fn bump(n: usize) -> RadialDensity {
    let grid = RadialGrid::uniform(10.0, n).expect("valid grid");
    RadialDensity::from_fn(grid, |r| (-r * r).exp()).expect("nonnegative values")
}
