//! Geometric primitives: points, axis-aligned cubes, tubes (closed
//! neighbourhoods of lines), and the finite tube families used to reduce
//! "for every tube" claims to finitely many checks.
//!
//! Conventions: cubes and tubes are closed sets; membership and intersection
//! predicates resolve ties toward "intersecting" within an absolute
//! tolerance of `1e-12`. Dimensions are runtime values (`d >= 2`).

mod candidates;
mod distance;
mod representatives;
mod subdivide;

pub use candidates::candidate_worst_tubes;
pub use distance::{
    distance_line_to_cube, distance_point_to_cube, distance_point_to_line, point_in_tube,
    scale_tube, tube_cube_intersects,
};
pub use representatives::{
    representative_family_size, representative_tubes, RepresentativeFamily,
};
pub use subdivide::subdivide_cube;

use crate::scalar::Scalar;
use serde::{Deserialize, Serialize};

/// Relative tolerance accepted when validating unit direction vectors.
pub const UNIT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GeometryError {
    #[error("tube direction must be a unit vector (norm {norm})")]
    NonUnitDirection { norm: f64 },
    #[error("scale factor must be positive (got {factor})")]
    NonPositiveScale { factor: f64 },
    #[error("tube width must be positive (got {width})")]
    NonPositiveWidth { width: f64 },
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },
    #[error("ambient dimension must be at least 2 (got {d})")]
    BadDimension { d: usize },
    #[error("width parameter must lie in (0, 1] (got {tau})")]
    BadWidthParameter { tau: f64 },
    #[error("representative family at width parameter {tau} would hold {count} tubes")]
    FamilyTooLarge { tau: f64, count: u128 },
    #[error("grid resolution must be at least 1")]
    ZeroResolution,
}

/// A point in `R^d` with runtime dimension.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Point<F> {
    pub coords: Vec<F>,
}

impl<F: Scalar> Point<F> {
    pub fn new(coords: Vec<F>) -> Self {
        Point { coords }
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn distance(&self, other: &Point<F>) -> F {
        debug_assert_eq!(self.dim(), other.dim());
        let mut acc = F::zero();
        for (a, b) in self.coords.iter().zip(&other.coords) {
            let d = *a - *b;
            acc = acc + d * d;
        }
        acc.sqrt()
    }
}

/// Closed axis-aligned cube given by its centre and side length.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cube<F> {
    pub center: Point<F>,
    pub side: F,
}

impl<F: Scalar> Cube<F> {
    pub fn new(center: Point<F>, side: F) -> Self {
        Cube { center, side }
    }

    /// Unit cube `[0,1]^d`.
    pub fn unit(d: usize) -> Self {
        let half = F::from_f64_lossy(0.5);
        Cube {
            center: Point::new(vec![half; d]),
            side: F::one(),
        }
    }

    pub fn dim(&self) -> usize {
        self.center.dim()
    }

    pub fn lo(&self, axis: usize) -> F {
        self.center.coords[axis] - self.side * F::from_f64_lossy(0.5)
    }

    pub fn hi(&self, axis: usize) -> F {
        self.center.coords[axis] + self.side * F::from_f64_lossy(0.5)
    }

    /// Euclidean diameter `sqrt(d) * side`.
    pub fn diameter(&self) -> F {
        F::from_usize(self.dim()).unwrap().sqrt() * self.side
    }

    /// Closed membership with absolute tolerance `tol`.
    pub fn contains_point(&self, p: &Point<F>, tol: F) -> bool {
        (0..self.dim()).all(|i| p.coords[i] >= self.lo(i) - tol && p.coords[i] <= self.hi(i) + tol)
    }

    /// Whether `inner` lies inside `self`, with absolute tolerance `tol`.
    pub fn contains_cube(&self, inner: &Cube<F>, tol: F) -> bool {
        (0..self.dim())
            .all(|i| inner.lo(i) >= self.lo(i) - tol && inner.hi(i) <= self.hi(i) + tol)
    }

    /// Whether two closed cubes have no common point, with ties (touching
    /// faces) counted as intersecting within `tol`.
    pub fn disjoint_from(&self, other: &Cube<F>, tol: F) -> bool {
        (0..self.dim()).any(|i| self.lo(i) > other.hi(i) + tol || other.lo(i) > self.hi(i) + tol)
    }
}

/// Closed tube: all points within `width / 2` of the line through `anchor`
/// with unit direction `direction`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tube<F> {
    pub anchor: Point<F>,
    pub direction: Vec<F>,
    pub width: F,
}

impl<F: Scalar> Tube<F> {
    /// Builds a tube, validating the direction and width.
    pub fn new(anchor: Point<F>, direction: Vec<F>, width: F) -> Result<Self, GeometryError> {
        if anchor.dim() != direction.len() {
            return Err(GeometryError::DimensionMismatch {
                left: anchor.dim(),
                right: direction.len(),
            });
        }
        let norm = vec_norm(&direction);
        if (norm.to_f64_lossy() - 1.0).abs() > UNIT_TOL {
            return Err(GeometryError::NonUnitDirection {
                norm: norm.to_f64_lossy(),
            });
        }
        if width <= F::zero() {
            return Err(GeometryError::NonPositiveWidth {
                width: width.to_f64_lossy(),
            });
        }
        Ok(Tube {
            anchor,
            direction,
            width,
        })
    }

    /// Tube of the given width through two distinct points; `None` when the
    /// points are too close to define a direction.
    pub fn through_points(p: &Point<F>, q: &Point<F>, width: F) -> Option<Self> {
        let mut dir: Vec<F> = q
            .coords
            .iter()
            .zip(&p.coords)
            .map(|(b, a)| *b - *a)
            .collect();
        let norm = vec_norm(&dir);
        if norm.to_f64_lossy() < 1e-15 {
            return None;
        }
        for c in dir.iter_mut() {
            *c = *c / norm;
        }
        Some(Tube {
            anchor: p.clone(),
            direction: dir,
            width,
        })
    }

    pub fn dim(&self) -> usize {
        self.anchor.dim()
    }
}

pub(crate) fn vec_dot<F: Scalar>(a: &[F], b: &[F]) -> F {
    let mut acc = F::zero();
    for (x, y) in a.iter().zip(b) {
        acc = acc + *x * *y;
    }
    acc
}

pub(crate) fn vec_norm<F: Scalar>(a: &[F]) -> F {
    vec_dot(a, a).sqrt()
}

/// Flips `v` so that its first coordinate of non-negligible magnitude is
/// positive; identifies a line's two direction signs.
pub(crate) fn canonical_sign<F: Scalar>(v: &mut [F]) {
    for c in v.iter() {
        let x = c.to_f64_lossy();
        if x.abs() > 1e-14 {
            if x < 0.0 {
                for c in v.iter_mut() {
                    *c = -*c;
                }
            }
            return;
        }
    }
}
