//! Regular subdivision of a cube into a grid of subcells.

use super::{Cube, GeometryError, Point};
use crate::scalar::Scalar;

/// Splits `c` into `g^d` congruent closed subcells of side `c.side / g`,
/// returned in lexicographic order of their integer grid index (axis 0
/// varying slowest).
pub fn subdivide_cube<F: Scalar>(c: &Cube<F>, g: usize) -> Result<Vec<Cube<F>>, GeometryError> {
    if g == 0 {
        return Err(GeometryError::ZeroResolution);
    }
    let d = c.dim();
    let side = c.side / F::from_usize(g).unwrap();
    let half = F::from_f64_lossy(0.5);
    let mut out = Vec::with_capacity(g.pow(d as u32));
    let mut idx = vec![0usize; d];
    loop {
        let center: Vec<F> = (0..d)
            .map(|i| c.lo(i) + side * (F::from_usize(idx[i]).unwrap() + half))
            .collect();
        out.push(Cube::new(Point::new(center), side));
        // Advance the mixed-radix counter, last axis fastest.
        let mut axis = d;
        loop {
            if axis == 0 {
                return Ok(out);
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < g {
                break;
            }
            idx[axis] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quarters_of_the_unit_square() {
        let c = Cube::new(Point::new(vec![0.5, 0.5]), 1.0);
        let cells = subdivide_cube(&c, 2).unwrap();
        assert_eq!(cells.len(), 4);
        let centers: Vec<Vec<f64>> = cells.iter().map(|q| q.center.coords.clone()).collect();
        assert_eq!(
            centers,
            vec![
                vec![0.25, 0.25],
                vec![0.25, 0.75],
                vec![0.75, 0.25],
                vec![0.75, 0.75],
            ]
        );
        assert!(cells.iter().all(|q| (q.side - 0.5).abs() < 1e-15));
    }

    #[test]
    fn resolution_one_returns_the_cube() {
        let c = Cube::new(Point::new(vec![0.3, 0.4, 0.5]), 0.2);
        let cells = subdivide_cube(&c, 1).unwrap();
        assert_eq!(cells, vec![c]);
    }

    #[test]
    fn zero_resolution_is_an_error() {
        let c = Cube::new(Point::new(vec![0.5, 0.5]), 1.0);
        assert!(matches!(
            subdivide_cube(&c, 0),
            Err(GeometryError::ZeroResolution)
        ));
    }
}
