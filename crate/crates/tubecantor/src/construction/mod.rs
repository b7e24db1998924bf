//! One generation of the randomized build-and-prune pipeline.
//!
//! Given a family of disjoint parent cubes of common side `delta`, the
//! pipeline samples points uniformly in the (margin-shrunk) parents, tests
//! two concentration events, prunes grid-cell clusters and collinear
//! clusters, thins to a minimum pairwise distance, enforces the per-width
//! tube occupancy caps against the eventual child size, equalizes
//! per-parent counts, and emits one child cube per surviving point.
//! Every stage is deterministic given the seed; failed events or exceeded
//! removal budgets trigger a resample with a derived seed.

mod build;
mod equalize;
mod events;
mod grid;
mod pairscan;
mod sampling;
mod spacing;
mod tube_law;
mod tubes;

pub use build::{build_generation, ParentFamily};
pub use equalize::{derive_epsilon, equalize_counts, spacing_cell_neighbours};
pub use events::{check_event_grid, check_event_min_count, compute_xr};
pub use grid::{grid_of_parent, prune_grid_clusters};
pub use sampling::sample_points;
pub use spacing::enforce_spacing;
pub use tube_law::enforce_tube_law;
pub use tubes::prune_tube_clusters;

use crate::geometry::{Cube, Point};
use crate::Real;
use serde::{Deserialize, Serialize};

/// Parameters for building one generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConstructionParams {
    pub d: usize,
    pub s: Real,
    /// Common side length of the parent cubes.
    pub delta: Real,
    /// Tube occupancy cap: no thin tube may meet more than `k` children.
    pub k: u32,
    /// Grid-cell cluster threshold: cells are pruned below `a` points.
    pub a: u32,
    /// Tube dilation factor used by the collinear-cluster pruning.
    pub r: Real,
    /// Density parameter: the sample holds `ceil(m^s)` points.
    pub m: u64,
    pub seed: u64,
    pub max_retries: u32,
    /// Sampling margin as a fraction of `delta`: points keep at least
    /// `margin * delta` away from parent boundaries so child cubes nest.
    pub margin: Real,
}

impl ConstructionParams {
    /// Validates ranges and cross-field requirements.
    pub fn new(
        d: usize,
        s: Real,
        delta: Real,
        k: u32,
        a: u32,
        m: u64,
        seed: u64,
        max_retries: u32,
        margin: Real,
    ) -> Result<Self, ConstructionError> {
        if d < 2 {
            return Err(ConstructionError::InvalidParams(format!(
                "dimension must be at least 2 (got {d})"
            )));
        }
        if !(s > 0.0 && s < (d - 1) as Real) {
            return Err(ConstructionError::InvalidParams(format!(
                "need 0 < s < d-1 (got s={s}, d={d})"
            )));
        }
        if !(delta > 0.0 && delta <= 1.0) {
            return Err(ConstructionError::InvalidParams(format!(
                "parent side must lie in (0,1] (got {delta})"
            )));
        }
        let inv_count = delta.powf(-s);
        if (inv_count - inv_count.round()).abs() > crate::INT_TOL * inv_count.max(1.0) {
            return Err(ConstructionError::InvalidParams(format!(
                "delta^(-s) = {inv_count} is not an integer"
            )));
        }
        if k == 0 || (k as Real) * ((d - 1) as Real - s) <= 2.0 * (d - 1) as Real {
            return Err(ConstructionError::InvalidParams(format!(
                "occupancy cap k={k} does not satisfy k(d-1-s) > 2(d-1)"
            )));
        }
        if a < 2 {
            return Err(ConstructionError::InvalidParams(format!(
                "cell cluster threshold must be at least 2 (got {a})"
            )));
        }
        if m == 0 {
            return Err(ConstructionError::InvalidParams("m must be positive".into()));
        }
        if max_retries == 0 {
            return Err(ConstructionError::InvalidParams(
                "max_retries must be positive".into(),
            ));
        }
        if !(margin > 0.0 && margin < 0.5) {
            return Err(ConstructionError::InvalidParams(format!(
                "margin must lie in (0, 0.5) (got {margin})"
            )));
        }
        let r = dilation_constant(d, s, a);
        Ok(ConstructionParams {
            d,
            s,
            delta,
            k,
            a,
            r,
            m,
            seed,
            max_retries,
            margin,
        })
    }

    /// Number of points drawn per sample: `ceil(m^s)`.
    pub fn sample_size(&self) -> u64 {
        ceil_int((self.m as Real).powf(self.s))
    }

    /// Target cell count per parent: `ceil((delta * m)^s)`.
    pub fn cells_target(&self) -> u64 {
        ceil_int((self.delta * self.m as Real).powf(self.s))
    }

    /// Per-axis subdivision count `g = ceil((delta*m)^(s/d))` of the
    /// parent grid.
    pub fn grid_per_axis(&self) -> usize {
        ceil_int((self.delta * self.m as Real).powf(self.s / self.d as Real)).max(1) as usize
    }

    /// Nominal cell scale `delta^((d-s)/d) * m^(-s/d)`; separation and the
    /// thin/thick width split are stated against this value.
    pub fn eta(&self) -> Real {
        self.delta.powf((self.d as Real - self.s) / self.d as Real)
            * (self.m as Real).powf(-self.s / self.d as Real)
    }

    /// Realized grid cell side `(1 - 2 margin) * delta / g`, at most
    /// `eta()`. The grid covers the sampling box, not the whole parent,
    /// so cells carry unit mean occupancy.
    pub fn eta_realized(&self) -> Real {
        (1.0 - 2.0 * self.margin) * self.delta / self.grid_per_axis() as Real
    }

    /// Minimum pairwise distance enforced on survivors: `5 d eta`.
    pub fn spacing_distance(&self) -> Real {
        5.0 * self.d as Real * self.eta()
    }

    /// Shared removal budget for the cluster prunes: `ceil((delta m)^s) / 8`
    /// compared exactly as `8 * removed <= ceil((delta m)^s)`.
    pub fn removal_budget_numerator(&self) -> u64 {
        self.cells_target()
    }
}

/// Tube dilation from the a-priori child-size cap `a^(1/s) / m`:
/// `max(2 a^(1/s), 1 + ceil(sqrt(d) a^(1/s)))`. Computed once per run, so
/// the pruning widths are known before the realized child size is.
pub fn dilation_constant(d: usize, s: Real, a: u32) -> Real {
    let eps_cap_m = (a as Real).powf(1.0 / s);
    let with_diag = 1.0 + ((d as Real).sqrt() * eps_cap_m).ceil();
    (2.0 * eps_cap_m).max(with_diag)
}

/// Pipeline position of a point sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Stage {
    /// Freshly sampled.
    Raw,
    /// After grid-cell and tube-cluster pruning.
    Pruned,
    /// Spaced and equalized; ready to become cube centres.
    Final,
}

/// A point sample with its parent assignment, in sampling order.
#[derive(Debug, Clone, PartialEq)]
pub struct PointCloud {
    pub points: Vec<Point<Real>>,
    /// Index into the parent family, parallel to `points`.
    pub parent_idx: Vec<usize>,
    pub stage: Stage,
}

impl PointCloud {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Point count per parent.
    pub fn counts_per_parent(&self, n_parents: usize) -> Vec<u64> {
        let mut counts = vec![0u64; n_parents];
        for &p in &self.parent_idx {
            counts[p] += 1;
        }
        counts
    }

    /// Keeps exactly the flagged points, preserving sampling order.
    pub(crate) fn retain_alive(&self, alive: &[bool]) -> PointCloud {
        let mut points = Vec::new();
        let mut parent_idx = Vec::new();
        for i in 0..self.points.len() {
            if alive[i] {
                points.push(self.points[i].clone());
                parent_idx.push(self.parent_idx[i]);
            }
        }
        PointCloud {
            points,
            parent_idx,
            stage: self.stage,
        }
    }
}

/// Removal accounting across the pruning stages.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct RemovalLog {
    /// Grid-cell cluster removals per parent.
    pub grid_removed: Vec<u64>,
    /// Total removals by the dyadic tube-cluster prune (budgeted).
    pub tube_removed_total: u64,
    /// Budget numerator: accepted runs keep
    /// `8 * tube_removed_total <= tube_budget_numerator`.
    pub tube_budget_numerator: u64,
    /// Spacing removals per parent.
    pub spacing_removed: Vec<u64>,
    /// Occupancy-law removals per parent, sized against the realized child
    /// side rather than the sampling widths.
    pub law_removed: Vec<u64>,
    /// Equalization removals per parent.
    pub equalize_removed: Vec<u64>,
    /// Measured count of grid cells within the spacing distance of one
    /// cell; enters the per-parent survivor floor.
    pub spacing_cell_neighbours: u64,
}

/// One built generation: child cubes with parent links and the run log.
#[derive(Debug, Clone, PartialEq)]
pub struct GenerationOutput {
    pub children: Vec<Cube<Real>>,
    /// Parent index of each child, parallel to `children`.
    pub child_parent: Vec<usize>,
    /// Child cube side.
    pub epsilon: Real,
    /// Children per parent.
    pub n_per_parent: u64,
    pub removal_log: RemovalLog,
    /// Resamples consumed before acceptance.
    pub retries: u32,
    /// Nominal cell scale of this build.
    pub eta: Real,
}

/// Why one sampling attempt was abandoned.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum AttemptFailure {
    /// Some parent received fewer than half the target points.
    MinCountEvent,
    /// Some parent's grid-cell cluster statistic exceeded its budget.
    GridEvent,
    /// Tube-cluster removals exceeded the shared budget.
    TubeBudget,
    /// Spacing left a parent empty or below two points.
    SpacingDegenerate,
    /// No child count from the floor upward survives the occupancy caps.
    ThinningCollapse,
    /// Equalized count fell below the per-parent floor.
    DensityFloor,
    /// Child cubes would cross the sampling margin.
    MarginExceeded,
    /// Two child cubes would overlap.
    ChildOverlap,
}

impl std::fmt::Display for AttemptFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            AttemptFailure::MinCountEvent => "min-count event",
            AttemptFailure::GridEvent => "grid-cluster event",
            AttemptFailure::TubeBudget => "tube removal budget",
            AttemptFailure::SpacingDegenerate => "degenerate spacing",
            AttemptFailure::ThinningCollapse => "occupancy-law collapse",
            AttemptFailure::DensityFloor => "survivor floor",
            AttemptFailure::MarginExceeded => "margin too small for child size",
            AttemptFailure::ChildOverlap => "overlapping children",
        };
        write!(f, "{name}")
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ConstructionError {
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error("parent family is empty")]
    EmptyParentFamily,
    #[error("parent family violates its invariants: {0}")]
    BadParentFamily(String),
    #[error("construction failed after {attempts} attempts; failures: {}",
        format_histogram(.histogram))]
    RetriesExhausted {
        attempts: u32,
        histogram: Vec<(AttemptFailure, u32)>,
    },
}

fn format_histogram(h: &[(AttemptFailure, u32)]) -> String {
    let mut parts: Vec<String> = h.iter().map(|(k, n)| format!("{k} x{n}")).collect();
    if parts.is_empty() {
        parts.push("none recorded".into());
    }
    parts.join(", ")
}

/// Ceiling with a relative snap: values within `1e-9` of an integer round
/// to it instead of jumping a full unit up.
pub(crate) fn ceil_int(x: Real) -> u64 {
    debug_assert!(x >= 0.0);
    let snapped = x.round();
    if (x - snapped).abs() <= crate::INT_TOL * snapped.abs().max(1.0) {
        snapped as u64
    } else {
        x.ceil() as u64
    }
}

/// Enforcement width that pins all tubes of width `2 * side` around cubes
/// of side `side` to the occupancy cap: pair tubes of this width contain
/// every such configuration of cube centres.
pub(crate) fn thin_enforcement_width(d: usize, side: Real) -> Real {
    (4.0 + 2.0 * (d as Real).sqrt()) * side
}

/// Binomial coefficient, saturating at `u128::MAX`.
pub(crate) fn binomial(n: u64, k: u32) -> u128 {
    let k = k as u64;
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = match acc.checked_mul((n - i) as u128) {
            Some(v) => v,
            None => return u128::MAX,
        };
        acc /= (i + 1) as u128;
    }
    acc
}
