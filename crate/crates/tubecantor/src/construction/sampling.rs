//! Uniform point sampling over the margin-shrunk parent cubes.

use super::{ConstructionParams, PointCloud, Stage};
use crate::construction::build::ParentFamily;
use crate::geometry::Point;
use crate::Real;
use rand::Rng;

/// Draws `ceil(m^s)` points uniformly from the union of the parents, each
/// shrunk by `margin * delta` on every side. Parents have equal volume, so
/// a uniform parent choice followed by a uniform draw inside the shrunk
/// cube is uniform on the union. Points are returned in sampling order
/// with their parent assignment.
pub fn sample_points<R: Rng>(
    parents: &ParentFamily,
    params: &ConstructionParams,
    rng: &mut R,
) -> PointCloud {
    let n = params.sample_size() as usize;
    let n_parents = parents.cubes.len();
    let inset = params.margin * params.delta;
    let inner_side = params.delta - 2.0 * inset;
    let mut points = Vec::with_capacity(n);
    let mut parent_idx = Vec::with_capacity(n);
    for _ in 0..n {
        let which = rng.gen_range(0..n_parents);
        let cube = &parents.cubes[which];
        let coords: Vec<Real> = (0..params.d)
            .map(|axis| cube.lo(axis) + inset + rng.gen::<Real>() * inner_side)
            .collect();
        points.push(Point::new(coords));
        parent_idx.push(which);
    }
    PointCloud {
        points,
        parent_idx,
        stage: Stage::Raw,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Cube;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn sixteen_parents() -> ParentFamily {
        // Sixteen disjoint cubes of side 1/256 (so delta^(-1/2) = 16) laid
        // out on a 4x4 grid inside the unit square.
        let side = 1.0 / 256.0;
        let mut cubes = Vec::new();
        for i in 0..4 {
            for j in 0..4 {
                let cx = 0.125 + 0.25 * i as f64;
                let cy = 0.125 + 0.25 * j as f64;
                cubes.push(Cube::new(Point::new(vec![cx, cy]), side));
            }
        }
        ParentFamily {
            cubes,
            delta: side,
        }
    }

    #[test]
    fn points_stay_inside_their_shrunk_parent() {
        let parents = sixteen_parents();
        let params =
            ConstructionParams::new(2, 0.5, 1.0 / 256.0, 5, 4, 1_000_000, 7, 50, 0.125).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let cloud = sample_points(&parents, &params, &mut rng);
        assert_eq!(cloud.len(), 1000);
        assert_eq!(cloud.stage, Stage::Raw);
        let inset = params.margin * params.delta;
        for (pt, &pi) in cloud.points.iter().zip(&cloud.parent_idx) {
            let cube = &parents.cubes[pi];
            for axis in 0..2 {
                assert!(pt.coords[axis] >= cube.lo(axis) + inset);
                assert!(pt.coords[axis] <= cube.hi(axis) - inset);
            }
        }
    }

    #[test]
    fn parent_counts_pass_chi_squared_uniformity() {
        // 10^4 points over 16 equal-volume parents; Pearson statistic
        // against the 0.001 critical value for 15 degrees of freedom.
        let parents = sixteen_parents();
        let params =
            ConstructionParams::new(2, 0.5, 1.0 / 256.0, 5, 4, 100_000_000, 7, 50, 0.125)
                .unwrap();
        assert_eq!(params.sample_size(), 10_000);
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        let cloud = sample_points(&parents, &params, &mut rng);
        let counts = cloud.counts_per_parent(16);
        let expected = 10_000.0 / 16.0;
        let stat: f64 = counts
            .iter()
            .map(|&c| {
                let diff = c as f64 - expected;
                diff * diff / expected
            })
            .sum();
        const CHI2_CRITICAL_DOF15_P001: f64 = 37.697;
        assert!(
            stat < CHI2_CRITICAL_DOF15_P001,
            "chi-squared statistic {stat} exceeds critical value"
        );
    }

    #[test]
    fn sampling_is_deterministic_in_the_seed() {
        let parents = sixteen_parents();
        let params =
            ConstructionParams::new(2, 0.5, 1.0 / 256.0, 5, 4, 10_000, 99, 50, 0.125).unwrap();
        let mut rng_a = ChaCha8Rng::seed_from_u64(41);
        let mut rng_b = ChaCha8Rng::seed_from_u64(41);
        let a = sample_points(&parents, &params, &mut rng_a);
        let b = sample_points(&parents, &params, &mut rng_b);
        assert_eq!(a, b);
        let mut rng_c = ChaCha8Rng::seed_from_u64(42);
        let c = sample_points(&parents, &params, &mut rng_c);
        assert_ne!(a, c);
    }
}
