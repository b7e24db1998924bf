//! Exact Euclidean distances between lines, points, cubes, and the tube
//! predicates built on them.

use super::{vec_dot, Cube, GeometryError, Point, Tube, UNIT_TOL};
use crate::scalar::Scalar;

/// Distance from `p` to the axis line of `t` (the tube's width is ignored).
pub fn distance_point_to_line<F: Scalar>(p: &Point<F>, t: &Tube<F>) -> Result<F, GeometryError> {
    check_tube(t)?;
    if p.dim() != t.dim() {
        return Err(GeometryError::DimensionMismatch {
            left: p.dim(),
            right: t.dim(),
        });
    }
    let w: Vec<F> = p
        .coords
        .iter()
        .zip(&t.anchor.coords)
        .map(|(a, b)| *a - *b)
        .collect();
    let along = vec_dot(&w, &t.direction);
    let mut acc = F::zero();
    for (wi, ui) in w.iter().zip(&t.direction) {
        let r = *wi - along * *ui;
        acc = acc + r * r;
    }
    Ok(acc.sqrt())
}

/// Closed membership: is `p` within `width/2` of the tube's axis line?
/// Boundary ties resolve to `true` within an absolute `1e-12`.
pub fn point_in_tube<F: Scalar>(p: &Point<F>, t: &Tube<F>) -> Result<bool, GeometryError> {
    let dist = distance_point_to_line(p, t)?;
    let half = t.width * F::from_f64_lossy(0.5);
    Ok(dist.to_f64_lossy() <= half.to_f64_lossy() + crate::GEOM_TOL)
}

/// Same tube with width multiplied by `h > 0`.
pub fn scale_tube<F: Scalar>(t: &Tube<F>, h: F) -> Result<Tube<F>, GeometryError> {
    check_tube(t)?;
    if h <= F::zero() {
        return Err(GeometryError::NonPositiveScale {
            factor: h.to_f64_lossy(),
        });
    }
    Ok(Tube {
        anchor: t.anchor.clone(),
        direction: t.direction.clone(),
        width: t.width * h,
    })
}

/// Distance from `p` to the closed cube `c` (zero inside).
pub fn distance_point_to_cube<F: Scalar>(p: &Point<F>, c: &Cube<F>) -> F {
    let mut acc = F::zero();
    for i in 0..c.dim() {
        let x = p.coords[i];
        let d = if x < c.lo(i) {
            c.lo(i) - x
        } else if x > c.hi(i) {
            x - c.hi(i)
        } else {
            F::zero()
        };
        acc = acc + d * d;
    }
    acc.sqrt()
}

/// Minimum distance between the axis line of `t` and the closed cube `c`.
///
/// Along the line `a + t u` the squared distance to the cube is a convex
/// piecewise quadratic in the parameter; its pieces change only where a
/// coordinate crosses a face plane. The minimiser is found by clamping the
/// per-piece stationary point into each piece, so the result is exact up to
/// rounding rather than sampled.
pub fn distance_line_to_cube<F: Scalar>(t: &Tube<F>, c: &Cube<F>) -> Result<F, GeometryError> {
    check_tube(t)?;
    if t.dim() != c.dim() {
        return Err(GeometryError::DimensionMismatch {
            left: t.dim(),
            right: c.dim(),
        });
    }
    let d = c.dim();
    let a = &t.anchor.coords;
    let u = &t.direction;

    let mut breaks: Vec<F> = Vec::with_capacity(2 * d);
    let mut constant = F::zero();
    for i in 0..d {
        if u[i].to_f64_lossy().abs() > 1e-15 {
            breaks.push((c.lo(i) - a[i]) / u[i]);
            breaks.push((c.hi(i) - a[i]) / u[i]);
        } else {
            // Fixed coordinate: contributes a constant deficit on every piece.
            let x = a[i];
            let def = if x < c.lo(i) {
                c.lo(i) - x
            } else if x > c.hi(i) {
                x - c.hi(i)
            } else {
                F::zero()
            };
            constant = constant + def * def;
        }
    }
    if breaks.is_empty() {
        // Degenerate direction; treat the anchor as the whole line.
        return Ok(constant.sqrt());
    }
    breaks.sort_by(|a, b| a.partial_cmp(b).unwrap());
    breaks.dedup_by(|a, b| (*a - *b).abs().to_f64_lossy() < 1e-300);

    let one = F::one();
    let first = breaks[0];
    let last = breaks[breaks.len() - 1];
    let span = (last - first).max(one);

    // Piece endpoints, with sentinels standing in for the unbounded ends.
    let mut ends: Vec<(F, F)> = Vec::with_capacity(breaks.len() + 1);
    ends.push((first - span, first));
    for w in breaks.windows(2) {
        ends.push((w[0], w[1]));
    }
    ends.push((last, last + span));

    let half = F::from_f64_lossy(0.5);
    let mut best = F::infinity();
    for (t0, t1) in ends {
        let mid = (t0 + t1) * half;
        // Classify each moving coordinate on this piece and accumulate the
        // quadratic A s^2 + B s + C of the squared deficit.
        let mut qa = F::zero();
        let mut qb = F::zero();
        let mut qc = constant;
        for i in 0..d {
            if u[i].to_f64_lossy().abs() <= 1e-15 {
                continue;
            }
            let y = a[i] + mid * u[i];
            if y < c.lo(i) {
                // deficit = (lo - a_i) - s u_i
                let k = c.lo(i) - a[i];
                qa = qa + u[i] * u[i];
                qb = qb - (k * u[i] + k * u[i]);
                qc = qc + k * k;
            } else if y > c.hi(i) {
                // deficit = (a_i - hi) + s u_i
                let k = a[i] - c.hi(i);
                qa = qa + u[i] * u[i];
                qb = qb + (k * u[i] + k * u[i]);
                qc = qc + k * k;
            }
        }
        let eval = |s: F| (qa * s + qb) * s + qc;
        let mut lo_val = eval(t0).min(eval(t1));
        if qa > F::zero() {
            let s_star = -qb / (qa + qa);
            if s_star > t0 && s_star < t1 {
                lo_val = lo_val.min(eval(s_star));
            }
        }
        if lo_val < best {
            best = lo_val;
        }
        if best <= F::zero() {
            return Ok(F::zero());
        }
    }
    Ok(best.max(F::zero()).sqrt())
}

/// Whether the closed tube meets the closed cube; boundary contact counts
/// as intersection within an absolute `1e-12`.
pub fn tube_cube_intersects<F: Scalar>(t: &Tube<F>, c: &Cube<F>) -> Result<bool, GeometryError> {
    let dist = distance_line_to_cube(t, c)?;
    let half = t.width * F::from_f64_lossy(0.5);
    Ok(dist.to_f64_lossy() <= half.to_f64_lossy() + crate::GEOM_TOL)
}

fn check_tube<F: Scalar>(t: &Tube<F>) -> Result<(), GeometryError> {
    if t.anchor.dim() != t.direction.len() {
        return Err(GeometryError::DimensionMismatch {
            left: t.anchor.dim(),
            right: t.direction.len(),
        });
    }
    let norm = super::vec_norm(&t.direction).to_f64_lossy();
    if (norm - 1.0).abs() > UNIT_TOL {
        return Err(GeometryError::NonUnitDirection { norm });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn p(coords: &[f64]) -> Point<f64> {
        Point::new(coords.to_vec())
    }

    fn tube(anchor: &[f64], dir: &[f64], width: f64) -> Tube<f64> {
        let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
        Tube {
            anchor: p(anchor),
            direction: dir.iter().map(|x| x / norm).collect(),
            width,
        }
    }

    #[test]
    fn point_line_distance_planar() {
        let t = tube(&[0.0, 0.0], &[1.0, 0.0], 0.1);
        let d = distance_point_to_line(&p(&[3.0, 2.0]), &t).unwrap();
        assert!((d - 2.0).abs() < 1e-14);
    }

    #[test]
    fn point_line_distance_diagonal_3d() {
        let t = tube(&[0.0, 0.0, 0.0], &[1.0, 1.0, 1.0], 0.1);
        // Distance from (1,0,0) to the main diagonal is sqrt(2/3).
        let d = distance_point_to_line(&p(&[1.0, 0.0, 0.0]), &t).unwrap();
        assert!((d - (2.0f64 / 3.0).sqrt()).abs() < 1e-14);
    }

    #[test]
    fn membership_boundary_counts_inside() {
        let t = tube(&[0.0, 0.0], &[0.0, 1.0], 0.5);
        assert!(point_in_tube(&p(&[0.25, 7.0]), &t).unwrap());
        assert!(!point_in_tube(&p(&[0.2500001, 7.0]), &t).unwrap());
    }

    #[test]
    fn scaling_requires_positive_factor() {
        let t = tube(&[0.0, 0.0], &[1.0, 0.0], 0.5);
        assert!((scale_tube(&t, 3.0).unwrap().width - 1.5).abs() < 1e-15);
        assert!(matches!(
            scale_tube(&t, 0.0),
            Err(GeometryError::NonPositiveScale { .. })
        ));
    }

    #[test]
    fn line_cube_distance_known_cases() {
        let c = Cube::new(p(&[0.5, 0.5]), 1.0);
        // Horizontal line through the cube.
        let t = tube(&[-5.0, 0.5], &[1.0, 0.0], 0.1);
        assert!(distance_line_to_cube(&t, &c).unwrap() < 1e-15);
        // Horizontal line above the cube by 0.25.
        let t = tube(&[-5.0, 1.25], &[1.0, 0.0], 0.1);
        assert!((distance_line_to_cube(&t, &c).unwrap() - 0.25).abs() < 1e-14);
        // Diagonal line through (2, 0): closest to corner (1, .. 1)? Distance
        // from corner (1,1) to line x+y=2 is 0 (the corner lies on it).
        let t = tube(&[2.0, 0.0], &[-1.0, 1.0], 0.1);
        assert!(distance_line_to_cube(&t, &c).unwrap() < 1e-14);
        // Diagonal line x + y = 2.5: nearest cube point is (1,1), distance
        // |1 + 1 - 2.5| / sqrt(2).
        let t = tube(&[2.5, 0.0], &[-1.0, 1.0], 0.1);
        let want = 0.5 / 2f64.sqrt();
        assert!((distance_line_to_cube(&t, &c).unwrap() - want).abs() < 1e-14);
    }

    #[test]
    fn line_cube_distance_axis_parallel_3d() {
        let c = Cube::new(p(&[0.5, 0.5, 0.5]), 1.0);
        // Line along z offset to (2, 2) in the xy-plane: distance is from
        // (2,2) to the square's corner (1,1).
        let t = tube(&[2.0, 2.0, 0.0], &[0.0, 0.0, 1.0], 0.1);
        let want = 2f64.sqrt();
        assert!((distance_line_to_cube(&t, &c).unwrap() - want).abs() < 1e-14);
    }

    // Dense sampling along the line as an independent oracle for the
    // piecewise-quadratic minimisation.
    #[test]
    fn line_cube_distance_matches_dense_sampling() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for case in 0..200 {
            let d = 2 + (case % 3);
            let c = Cube::new(
                Point::new((0..d).map(|_| rng.gen_range(-1.0..1.0)).collect()),
                rng.gen_range(0.2..1.5),
            );
            let anchor: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            let mut dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0f64)).collect();
            let norm = dir.iter().map(|x| x * x).sum::<f64>().sqrt();
            if norm < 1e-3 {
                continue;
            }
            for x in dir.iter_mut() {
                *x /= norm;
            }
            let t = Tube {
                anchor: Point::new(anchor.clone()),
                direction: dir.clone(),
                width: 0.1,
            };
            let exact = distance_line_to_cube(&t, &c).unwrap();

            let mut sampled = f64::INFINITY;
            let steps = 40_000;
            for k in 0..=steps {
                let s = -8.0 + 16.0 * (k as f64) / (steps as f64);
                let q = Point::new(
                    (0..d)
                        .map(|i| anchor[i] + s * dir[i])
                        .collect::<Vec<f64>>(),
                );
                sampled = sampled.min(distance_point_to_cube(&q, &c));
            }
            assert!(
                exact <= sampled + 1e-9,
                "exact distance exceeds sampled oracle: {exact} vs {sampled}"
            );
            assert!(
                sampled <= exact + 1e-3,
                "sampling found a far smaller distance: {exact} vs {sampled}"
            );
        }
    }

    #[test]
    fn tube_cube_intersection_boundary() {
        let c = Cube::new(p(&[0.5, 0.5]), 1.0);
        // Line at height 1.25, width 0.5 reaches exactly down to 1.0.
        let t = tube(&[0.0, 1.25], &[1.0, 0.0], 0.5);
        assert!(tube_cube_intersects(&t, &c).unwrap());
        let t = tube(&[0.0, 1.2501], &[1.0, 0.0], 0.5);
        assert!(!tube_cube_intersects(&t, &c).unwrap());
    }
}
