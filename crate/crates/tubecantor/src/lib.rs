//! Construction and verification of Cantor-type cube families in the unit
//! cube whose intersections with arbitrary tubes (neighbourhoods of lines)
//! stay quantitatively small at every scale.
//!
//! The crate is organised around a pipeline: sample a dense point cloud
//! inside a family of parent cubes, prune it until no small region and no
//! thin tube holds too many points, thin it to a fixed separation, and keep
//! an equal number of survivors per parent. The survivors become centres of
//! the next, strictly smaller, generation of cubes. Iterating produces a
//! nested family whose tube occupancy obeys a power law in the tube width.
//!
//! Geometric primitives and the analytic bounds are generic over the scalar
//! type through [`scalar::Scalar`]; the construction pipeline, verification,
//! and file formats run in `f64` (the aliases at the crate root fix that
//! choice in one place).

pub mod analysis;
pub mod cantor;
pub mod cli;
pub mod construction;
pub mod geometry;
pub mod scalar;
pub mod verify;

/// Scalar type used by the construction pipeline and all file formats.
pub type Real = f64;

pub type Point64 = geometry::Point<Real>;
pub type Cube64 = geometry::Cube<Real>;
pub type Tube64 = geometry::Tube<Real>;
pub type RepresentativeFamily64 = geometry::RepresentativeFamily<Real>;

/// Absolute tolerance for geometric predicates; ties resolve toward
/// "intersecting" / "contained".
pub const GEOM_TOL: Real = 1e-12;

/// Relative tolerance for recognising real quantities that ought to be
/// integers (cube counts, grid resolutions).
pub const INT_TOL: Real = 1e-9;

/// Slack factor in the graded occupancy cap for intermediate tube widths:
/// a tube of width `w` between the child and parent sides may meet at most
/// `LAW_SLACK * k * (w / epsilon)^s` child cubes. Construction enforces
/// this cap and verification asserts it.
pub const LAW_SLACK: Real = 8.0;
