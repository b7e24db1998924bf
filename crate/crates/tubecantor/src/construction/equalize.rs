//! Per-parent count equalization and the child side length.

use super::build::ParentFamily;
use super::{ceil_int, AttemptFailure, ConstructionParams, PointCloud, Stage};
use crate::Real;

/// Number of grid cells whose closest approach to a fixed cell is within
/// the spacing distance, the cell itself included. Bounds how many cells a
/// spacing ball can drain, so it calibrates the survivor floor.
pub fn spacing_cell_neighbours(params: &ConstructionParams) -> u64 {
    let spacing = params.spacing_distance() + crate::GEOM_TOL;
    let cell = params.eta_realized();
    let range = (spacing / cell).ceil() as i64 + 1;
    let d = params.d;
    let mut counter = vec![-range; d];
    let mut count = 0u64;
    loop {
        let gap_sq: Real = counter
            .iter()
            .map(|&v| {
                let gap = (v.abs() - 1).max(0) as Real * cell;
                gap * gap
            })
            .sum();
        if gap_sq.sqrt() <= spacing {
            count += 1;
        }
        let mut carry = true;
        for pos in (0..d).rev() {
            if counter[pos] < range {
                counter[pos] += 1;
                carry = false;
                break;
            }
            counter[pos] = -range;
        }
        if carry {
            break;
        }
    }
    count
}

/// Outcome of the equalization step.
#[derive(Debug, Clone, PartialEq)]
pub struct Equalized {
    pub cloud: PointCloud,
    /// Common per-parent count after trimming.
    pub n_per_parent: u64,
    pub removed: Vec<u64>,
    /// Minimum admissible count at these parameters.
    pub floor: u64,
    pub cell_neighbours: u64,
}

/// Minimum admissible per-parent count,
/// `max(2, ceil(ceil((delta m)^s) / (16 a c)))` with `c` the measured
/// neighbour-cell count, returned alongside `c`.
pub(crate) fn survivor_floor(params: &ConstructionParams) -> (u64, u64) {
    let cell_neighbours = spacing_cell_neighbours(params);
    let denom = 16 * params.a as u64 * cell_neighbours;
    let floor = ceil_int(params.cells_target() as Real / denom as Real).max(2);
    (floor, cell_neighbours)
}

/// Trims every parent to the minimum per-parent count by dropping its
/// last-sampled points. Fails when that count is below the density floor.
pub fn equalize_counts(
    cloud: PointCloud,
    parents: &ParentFamily,
    params: &ConstructionParams,
) -> Result<Equalized, AttemptFailure> {
    let n_parents = parents.cubes.len();
    let counts = cloud.counts_per_parent(n_parents);
    let n_min = counts.iter().copied().min().unwrap_or(0);
    let (floor, cell_neighbours) = survivor_floor(params);
    if n_min < floor {
        return Err(AttemptFailure::DensityFloor);
    }
    let mut seen = vec![0u64; n_parents];
    let mut alive = vec![false; cloud.len()];
    let mut removed = vec![0u64; n_parents];
    for i in 0..cloud.len() {
        let parent = cloud.parent_idx[i];
        if seen[parent] < n_min {
            alive[i] = true;
            seen[parent] += 1;
        } else {
            removed[parent] += 1;
        }
    }
    let mut cloud = cloud.retain_alive(&alive);
    cloud.stage = Stage::Final;
    Ok(Equalized {
        cloud,
        n_per_parent: n_min,
        removed,
        floor,
        cell_neighbours,
    })
}

/// Child cube side from the equalized count: `epsilon = delta * n^(-1/s)`,
/// the unique side with `(delta/epsilon)^s = n`.
pub fn derive_epsilon(params: &ConstructionParams, n_per_parent: u64) -> Real {
    params.delta * (n_per_parent as Real).powf(-1.0 / params.s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Cube, Point};
    use proptest::prelude::*;

    fn two_parents() -> ParentFamily {
        // delta = 1/4 at s = 0.5 would need 2 parents: use sides 0.25.
        ParentFamily {
            cubes: vec![
                Cube::new(Point::new(vec![0.2, 0.2]), 0.25),
                Cube::new(Point::new(vec![0.7, 0.7]), 0.25),
            ],
            delta: 0.25,
        }
    }

    fn params(m: u64) -> ConstructionParams {
        ConstructionParams::new(2, 0.5, 0.25, 5, 4, m, 7, 50, 0.125).unwrap()
    }

    fn cloud_with_counts(counts: &[usize]) -> PointCloud {
        let mut points = Vec::new();
        let mut parent_idx = Vec::new();
        for (which, &n) in counts.iter().enumerate() {
            for i in 0..n {
                let base = 0.1 + 0.5 * which as Real;
                points.push(Point::new(vec![base + 0.01 * i as Real, base]));
                parent_idx.push(which);
            }
        }
        PointCloud {
            points,
            parent_idx,
            stage: Stage::Pruned,
        }
    }

    #[test]
    fn trims_to_the_minimum_from_the_sampling_tail() {
        let p = params(400);
        let cloud = cloud_with_counts(&[5, 3]);
        let eq = equalize_counts(cloud, &two_parents(), &p).unwrap();
        assert_eq!(eq.n_per_parent, 3);
        assert_eq!(eq.removed, vec![2, 0]);
        assert_eq!(eq.cloud.len(), 6);
        assert_eq!(eq.cloud.stage, Stage::Final);
        // Parent 0 keeps its first three points.
        let first: Vec<Real> = eq
            .cloud
            .points
            .iter()
            .zip(&eq.cloud.parent_idx)
            .filter(|&(_, &pi)| pi == 0)
            .map(|(pt, _)| pt.coords[0])
            .collect();
        assert_eq!(first.len(), 3);
        for (i, x) in first.iter().enumerate() {
            assert!((x - (0.1 + 0.01 * i as Real)).abs() < 1e-15);
        }
    }

    #[test]
    fn floor_rejects_a_starved_parent() {
        let p = params(400);
        let cloud = cloud_with_counts(&[5, 1]);
        assert_eq!(
            equalize_counts(cloud, &two_parents(), &p).unwrap_err(),
            AttemptFailure::DensityFloor
        );
    }

    #[test]
    fn neighbour_count_matches_direct_enumeration_in_2d() {
        let p = params(1_600_000);
        let spacing = p.spacing_distance() + crate::GEOM_TOL;
        let cell = p.eta_realized();
        let range = (spacing / cell).ceil() as i64 + 2;
        let mut direct = 0u64;
        for vx in -range..=range {
            for vy in -range..=range {
                let gx = (vx.abs() - 1).max(0) as Real * cell;
                let gy = (vy.abs() - 1).max(0) as Real * cell;
                if (gx * gx + gy * gy).sqrt() <= spacing {
                    direct += 1;
                }
            }
        }
        assert_eq!(spacing_cell_neighbours(&p), direct);
        // The disk of radius spacing/cell + 2 bounds the count above.
        let radius = spacing / cell + 2.0;
        assert!(direct as Real <= std::f64::consts::PI * radius * radius);
        assert!(direct > 100);
    }

    proptest! {
        #[test]
        fn epsilon_inverts_to_the_count(
            n in 2u64..10_000,
            s in 0.3f64..1.8,
            delta_exp in 0u32..6,
        ) {
            let d = 3;
            // Choose delta with an integral delta^(-s): delta = q^(-1/s)
            // for integer q.
            let q = 2u64.pow(delta_exp);
            let delta = (q as Real).powf(-1.0 / s);
            let params = ConstructionParams::new(
                d, s, delta.min(1.0), 9, 4, 10_000, 7, 50, 0.125,
            );
            prop_assume!(params.is_ok());
            let params = params.unwrap();
            let eps = derive_epsilon(&params, n);
            prop_assert!(eps > 0.0 && eps < params.delta);
            let recovered = (params.delta / eps).powf(params.s);
            prop_assert!(
                (recovered - n as Real).abs() <= 1e-9 * n as Real,
                "recovered {} from n = {}", recovered, n
            );
        }
    }
}
