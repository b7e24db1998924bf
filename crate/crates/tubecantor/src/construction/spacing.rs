//! Greedy minimum-distance thinning of the pruned sample.

use super::build::ParentFamily;
use super::pairscan::PointGrid;
use super::{ConstructionParams, PointCloud};
use crate::Real;

/// Keeps a point iff it lies at least `5 d eta` from every point kept
/// before it, scanning in sampling order. Returns the thinned cloud and
/// the removal count per parent.
pub fn enforce_spacing(
    cloud: PointCloud,
    parents: &ParentFamily,
    params: &ConstructionParams,
) -> (PointCloud, Vec<u64>) {
    let spacing = params.spacing_distance();
    let spacing_sq = spacing * spacing;
    let per_axis = ((1.0 / spacing).floor() as usize).clamp(1, 256);
    let mut kept_grid = PointGrid::empty(params.d, per_axis);
    let mut alive = vec![false; cloud.len()];
    let mut removed = vec![0u64; parents.cubes.len()];
    let mut candidates = Vec::new();
    for i in 0..cloud.len() {
        let p = &cloud.points[i];
        kept_grid.candidates_near_point(p, spacing, &mut candidates);
        let crowded = candidates.iter().any(|&c| {
            let q = &cloud.points[c as usize];
            let dist_sq: Real = p
                .coords
                .iter()
                .zip(&q.coords)
                .map(|(a, b)| (a - b) * (a - b))
                .sum();
            dist_sq < spacing_sq
        });
        if crowded {
            removed[cloud.parent_idx[i]] += 1;
        } else {
            alive[i] = true;
            kept_grid.insert(i as u32, p);
        }
    }
    (cloud.retain_alive(&alive), removed)
}
