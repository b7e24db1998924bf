//! The two acceptance events tested on every fresh sample.

use super::build::ParentFamily;
use super::grid::grid_of_parent;
use super::{binomial, ConstructionParams, PointCloud};
use crate::Real;

/// Checks that every parent received at least half the target count:
/// `2 * |sample in parent| >= ceil((delta m)^s)` exactly, in integers.
pub fn check_event_min_count(
    cloud: &PointCloud,
    parents: &ParentFamily,
    params: &ConstructionParams,
) -> bool {
    let target = params.cells_target();
    cloud
        .counts_per_parent(parents.cubes.len())
        .iter()
        .all(|&c| 2 * c >= target)
}

/// Cluster statistic of one parent: the number of `a`-element subsets of
/// the sample that share a grid cell, normalized by `(delta m)^s`.
pub fn compute_xr(
    cloud: &PointCloud,
    parents: &ParentFamily,
    which: usize,
    params: &ConstructionParams,
) -> Real {
    let sum = cell_subset_sum(cloud, parents, which, params);
    sum as Real / (params.delta * params.m as Real).powf(params.s)
}

/// Checks that every parent's cluster statistic is within budget:
/// `8 * sum_cells binom(count, a) <= ceil((delta m)^s)` in integers.
pub fn check_event_grid(
    cloud: &PointCloud,
    parents: &ParentFamily,
    params: &ConstructionParams,
) -> bool {
    let budget = params.removal_budget_numerator() as u128;
    (0..parents.cubes.len()).all(|which| {
        let sum = cell_subset_sum(cloud, parents, which, params);
        sum.saturating_mul(8) <= budget
    })
}

/// Sum over the parent's grid cells of `binom(count, a)`.
fn cell_subset_sum(
    cloud: &PointCloud,
    parents: &ParentFamily,
    which: usize,
    params: &ConstructionParams,
) -> u128 {
    let grid = grid_of_parent(&parents.cubes[which], params);
    let mut counts: std::collections::HashMap<usize, u64> = std::collections::HashMap::new();
    for i in 0..cloud.len() {
        if cloud.parent_idx[i] == which {
            *counts.entry(grid.cell_of(&cloud.points[i])).or_insert(0) += 1;
        }
    }
    counts
        .values()
        .map(|&c| binomial(c, params.a))
        .fold(0u128, |acc, b| acc.saturating_add(b))
}
