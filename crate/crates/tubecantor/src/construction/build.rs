//! Parent-family invariants and the full generation build loop.

use super::equalize::{derive_epsilon, equalize_counts};
use super::events::{check_event_grid, check_event_min_count};
use super::grid::prune_grid_clusters;
use super::pairscan::{line_distance_sq, pair_line};
use super::sampling::sample_points;
use super::spacing::enforce_spacing;
use super::tube_law::enforce_tube_law;
use super::tubes::prune_tube_clusters;
use super::{
    AttemptFailure, ConstructionError, ConstructionParams, GenerationOutput, RemovalLog,
};
use crate::geometry::Cube;
use crate::Real;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

/// The cubes a generation is built inside: pairwise disjoint, of common
/// side `delta`, contained in the unit cube, and sparse enough that no
/// thin tube meets more than `k` of them.
#[derive(Debug, Clone, PartialEq)]
pub struct ParentFamily {
    pub cubes: Vec<Cube<Real>>,
    pub delta: Real,
}

impl ParentFamily {
    /// The unit cube as the sole parent.
    pub fn unit(d: usize) -> Self {
        ParentFamily {
            cubes: vec![Cube::unit(d)],
            delta: 1.0,
        }
    }

    /// Checks the family invariants for exponent `s` and occupancy cap `k`.
    pub fn validate(&self, s: Real, k: u32) -> Result<(), ConstructionError> {
        if self.cubes.is_empty() {
            return Err(ConstructionError::EmptyParentFamily);
        }
        let d = self.cubes[0].dim();
        let unit = Cube::unit(d);
        for (i, cube) in self.cubes.iter().enumerate() {
            if cube.dim() != d {
                return Err(ConstructionError::BadParentFamily(format!(
                    "cube {i} has dimension {} instead of {d}",
                    cube.dim()
                )));
            }
            if (cube.side - self.delta).abs() > 1e-12 * self.delta {
                return Err(ConstructionError::BadParentFamily(format!(
                    "cube {i} has side {} instead of {}",
                    cube.side, self.delta
                )));
            }
            if !unit.contains_cube(cube, crate::GEOM_TOL) {
                return Err(ConstructionError::BadParentFamily(format!(
                    "cube {i} leaves the unit cube"
                )));
            }
        }
        let expected = self.delta.powf(-s);
        if (expected - expected.round()).abs() > crate::INT_TOL * expected.max(1.0)
            || expected.round() as usize != self.cubes.len()
        {
            return Err(ConstructionError::BadParentFamily(format!(
                "family holds {} cubes but side {} requires {expected}",
                self.cubes.len(),
                self.delta
            )));
        }
        for i in 0..self.cubes.len() {
            for j in i + 1..self.cubes.len() {
                if !self.cubes[i].disjoint_from(&self.cubes[j], crate::GEOM_TOL) {
                    return Err(ConstructionError::BadParentFamily(format!(
                        "cubes {i} and {j} overlap"
                    )));
                }
            }
        }
        self.check_center_occupancy(k)?;
        Ok(())
    }

    /// Occupancy of the parent centres themselves: no pair tube at the
    /// thin enforcement width for side `delta` may hold more than `k`
    /// centres. This is exactly what the previous generation's occupancy
    /// stage enforced on its survivors.
    fn check_center_occupancy(&self, k: u32) -> Result<(), ConstructionError> {
        let n = self.cubes.len();
        if n <= k as usize {
            return Ok(());
        }
        let d = self.cubes[0].dim();
        let width = super::thin_enforcement_width(d, self.delta);
        let thr = width / 2.0 + crate::GEOM_TOL;
        let thr_sq = thr * thr;
        let centers: Vec<crate::geometry::Point<Real>> =
            self.cubes.iter().map(|c| c.center.clone()).collect();
        let mut anchor = vec![0.0; d];
        let mut dir = vec![0.0; d];
        for i in 0..n {
            for j in i + 1..n {
                if !pair_line(&centers, i, j, &mut anchor, &mut dir) {
                    continue;
                }
                let count = centers
                    .iter()
                    .filter(|c| line_distance_sq(&c.coords, &anchor, &dir) <= thr_sq)
                    .count();
                if count > k as usize {
                    return Err(ConstructionError::BadParentFamily(format!(
                        "a tube of width {width} through centres {i} and {j} \
                         meets {count} parents (cap {k})"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Builds one generation inside the parents, retrying with derived seeds
/// until a sample passes every stage or `max_retries` attempts are spent.
pub fn build_generation(
    parents: &ParentFamily,
    params: &ConstructionParams,
) -> Result<GenerationOutput, ConstructionError> {
    parents.validate(params.s, params.k)?;
    if (parents.delta - params.delta).abs() > 1e-12 * params.delta {
        return Err(ConstructionError::InvalidParams(format!(
            "parent side {} does not match the configured {}",
            parents.delta, params.delta
        )));
    }
    let n_parents = parents.cubes.len();
    let mut failures: Vec<(AttemptFailure, u32)> = Vec::new();
    let record = |failures: &mut Vec<(AttemptFailure, u32)>, kind: AttemptFailure| {
        match failures.iter_mut().find(|(k, _)| *k == kind) {
            Some((_, n)) => *n += 1,
            None => failures.push((kind, 1)),
        }
    };

    for attempt in 0..params.max_retries {
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed.wrapping_add(attempt as u64));
        let cloud = sample_points(parents, params, &mut rng);
        if !check_event_min_count(&cloud, parents, params) {
            record(&mut failures, AttemptFailure::MinCountEvent);
            continue;
        }
        if !check_event_grid(&cloud, parents, params) {
            record(&mut failures, AttemptFailure::GridEvent);
            continue;
        }
        let (cloud, grid_removed) = prune_grid_clusters(cloud, parents, params);
        let tubes = match prune_tube_clusters(cloud, parents, params) {
            Ok(t) => t,
            Err(kind) => {
                record(&mut failures, kind);
                continue;
            }
        };
        let (cloud, spacing_removed) = enforce_spacing(tubes.cloud, parents, params);
        let law = match enforce_tube_law(cloud, parents, params) {
            Ok(l) => l,
            Err(kind) => {
                record(&mut failures, kind);
                continue;
            }
        };
        let equalized = match equalize_counts(law.cloud, parents, params) {
            Ok(e) => e,
            Err(kind) => {
                record(&mut failures, kind);
                continue;
            }
        };
        debug_assert_eq!(equalized.n_per_parent, law.n_target);
        let epsilon = derive_epsilon(params, equalized.n_per_parent);
        // Children must fit inside the margin the sampler respected.
        if epsilon / 2.0 > params.margin * params.delta * (1.0 + crate::INT_TOL) {
            record(&mut failures, AttemptFailure::MarginExceeded);
            continue;
        }
        let mut children = Vec::with_capacity(equalized.cloud.len());
        let mut child_parent = Vec::with_capacity(equalized.cloud.len());
        for which in 0..n_parents {
            for i in 0..equalized.cloud.len() {
                if equalized.cloud.parent_idx[i] == which {
                    children.push(Cube::new(equalized.cloud.points[i].clone(), epsilon));
                    child_parent.push(which);
                }
            }
        }
        let mut overlap = false;
        'outer: for i in 0..children.len() {
            for j in i + 1..children.len() {
                if !children[i].disjoint_from(&children[j], crate::GEOM_TOL) {
                    overlap = true;
                    break 'outer;
                }
            }
        }
        if overlap {
            record(&mut failures, AttemptFailure::ChildOverlap);
            continue;
        }
        debug_assert!(children
            .iter()
            .zip(&child_parent)
            .all(|(c, &p)| parents.cubes[p].contains_cube(c, crate::GEOM_TOL)));
        return Ok(GenerationOutput {
            children,
            child_parent,
            epsilon,
            n_per_parent: equalized.n_per_parent,
            removal_log: RemovalLog {
                grid_removed,
                tube_removed_total: tubes.removed_total,
                tube_budget_numerator: params.removal_budget_numerator(),
                spacing_removed,
                law_removed: law.removed,
                equalize_removed: equalized.removed,
                spacing_cell_neighbours: equalized.cell_neighbours,
            },
            retries: attempt,
            eta: params.eta(),
        });
    }
    Err(ConstructionError::RetriesExhausted {
        attempts: params.max_retries,
        histogram: failures,
    })
}
