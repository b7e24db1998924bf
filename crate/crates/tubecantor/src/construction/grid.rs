//! Per-parent grids and grid-cell cluster pruning.

use super::build::ParentFamily;
use super::{ConstructionParams, PointCloud};
use crate::geometry::{Cube, Point};
use crate::Real;

/// The regular grid laid over one parent cube: `per_axis` cells per axis,
/// lexicographic cell indices with axis 0 slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct ParentGrid {
    pub per_axis: usize,
    pub cell_side: Real,
    lo: Vec<Real>,
    d: usize,
}

impl ParentGrid {
    pub fn cell_count(&self) -> usize {
        self.per_axis.pow(self.d as u32)
    }

    /// Cell index of a point inside the parent; boundary coordinates clamp
    /// into the last cell.
    pub fn cell_of(&self, p: &Point<Real>) -> usize {
        let mut idx = 0usize;
        for axis in 0..self.d {
            let offset = (p.coords[axis] - self.lo[axis]) / self.cell_side;
            let cell = (offset.floor() as isize).clamp(0, self.per_axis as isize - 1) as usize;
            idx = idx * self.per_axis + cell;
        }
        idx
    }
}

/// Builds the `g^d` grid of a parent with `g = ceil((delta m)^(s/d))`.
/// The grid spans the sampling box (the parent shrunk by the margin
/// inset), so every cell sees unit mean occupancy; gridding the full
/// parent instead would concentrate the samples on a `(1 - 2 margin)^d`
/// fraction of the cells and inflate the cluster statistics.
pub fn grid_of_parent(parent: &Cube<Real>, params: &ConstructionParams) -> ParentGrid {
    let per_axis = params.grid_per_axis();
    let d = params.d;
    let inset = params.margin * params.delta;
    ParentGrid {
        per_axis,
        cell_side: (parent.side - 2.0 * inset) / per_axis as Real,
        lo: (0..d).map(|axis| parent.lo(axis) + inset).collect(),
        d,
    }
}

/// Caps every grid cell strictly below `a` points by dropping the
/// last-sampled points of overfull cells. Returns the surviving cloud and
/// the removal count per parent.
pub fn prune_grid_clusters(
    cloud: PointCloud,
    parents: &ParentFamily,
    params: &ConstructionParams,
) -> (PointCloud, Vec<u64>) {
    let n_parents = parents.cubes.len();
    let grids: Vec<ParentGrid> = parents
        .cubes
        .iter()
        .map(|c| grid_of_parent(c, params))
        .collect();
    let mut occupancy: Vec<std::collections::HashMap<usize, u32>> =
        vec![std::collections::HashMap::new(); n_parents];
    let mut alive = vec![true; cloud.len()];
    let mut removed = vec![0u64; n_parents];
    let cap = params.a - 1;
    for i in 0..cloud.len() {
        let parent = cloud.parent_idx[i];
        let cell = grids[parent].cell_of(&cloud.points[i]);
        let seen = occupancy[parent].entry(cell).or_insert(0);
        if *seen >= cap {
            alive[i] = false;
            removed[parent] += 1;
        } else {
            *seen += 1;
        }
    }
    (cloud.retain_alive(&alive), removed)
}
