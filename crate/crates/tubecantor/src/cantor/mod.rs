//! Iterated construction of the nested cube families and the
//! measure-theoretic diagnostics evaluated on them: the mass identity,
//! tube-content estimates, a ball-growth check, and a box-dimension fit.

use crate::analysis::{choose_m, select_k, AnalysisError};
use crate::construction::{
    build_generation, ConstructionError, ConstructionParams, GenerationOutput, ParentFamily,
};
use crate::geometry::{distance_point_to_cube, tube_cube_intersects, Cube, Point, Tube};
use crate::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

/// Per-generation density choice.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum MSchedule {
    /// One density per generation, in order.
    Explicit(Vec<u64>),
    /// Derive each generation's density from the cluster-sum target. The
    /// derived values grow fast as the cube side shrinks; desk-scale runs
    /// usually pin an explicit list instead.
    Auto,
}

/// Everything needed to build a multi-generation family deterministically.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CantorSchedule {
    pub d: usize,
    pub s: Real,
    pub n_generations: u32,
    pub m_schedule: MSchedule,
    pub a: u32,
    pub c_abs: Real,
    pub seed: u64,
    pub max_retries: u32,
    pub margin: Real,
}

impl CantorSchedule {
    pub fn validate(&self) -> Result<(), CantorError> {
        if self.n_generations == 0 {
            return Err(CantorError::BadSchedule(
                "need at least one generation".into(),
            ));
        }
        if let MSchedule::Explicit(list) = &self.m_schedule {
            if list.len() != self.n_generations as usize {
                return Err(CantorError::BadSchedule(format!(
                    "density list holds {} entries for {} generations",
                    list.len(),
                    self.n_generations
                )));
            }
        }
        Ok(())
    }
}

/// The built nested families. Index 0 of `side_lengths` is the unit cube;
/// entry `n` of `generations` holds the cubes of generation `n + 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct CantorSet {
    pub schedule: CantorSchedule,
    pub generations: Vec<GenerationOutput>,
    /// Common cube side per generation, starting from the unit cube:
    /// `side_lengths[n]` is the side at generation `n`.
    pub side_lengths: Vec<Real>,
}

impl CantorSet {
    /// Number of built generations (the unit cube not counted).
    pub fn depth(&self) -> usize {
        self.generations.len()
    }

    /// The cubes of generation `n`; generation 0 is the unit cube.
    pub fn family_at(&self, n: usize) -> Vec<Cube<Real>> {
        if n == 0 {
            vec![Cube::unit(self.schedule.d)]
        } else {
            self.generations[n - 1].children.clone()
        }
    }

    /// Cube count of generation `n`.
    pub fn count_at(&self, n: usize) -> usize {
        if n == 0 {
            1
        } else {
            self.generations[n - 1].children.len()
        }
    }
}

/// How a tube-content estimate was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ContentFlag {
    /// Width at least 1: the global mass bound applies as-is.
    Trivial,
    /// A built generation brackets the width from below.
    Bracketed,
    /// Width below the deepest built side; the deepest generation stands
    /// in for the unbuilt one.
    Extrapolated,
}

/// A content estimate together with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ContentEstimate {
    pub value: Real,
    pub flag: ContentFlag,
    /// Generation whose cubes covered the tube (0 for the trivial case).
    pub generation: usize,
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum CantorError {
    #[error("invalid schedule: {0}")]
    BadSchedule(String),
    #[error("density selection failed: {0}")]
    DensitySelection(#[from] AnalysisError),
    #[error("generation {index} failed: {source}")]
    Generation {
        index: u32,
        source: ConstructionError,
    },
    #[error("generation index {n} exceeds built depth {depth}")]
    GenerationOutOfRange { n: usize, depth: usize },
    #[error("dimension estimate needs at least 2 built generations (have {depth})")]
    NeedTwoGenerations { depth: usize },
}

/// Builds the nested families described by the schedule, starting from the
/// unit cube. Each generation's survivors become the next generation's
/// parents; the parent-family invariants are checked before every step.
pub fn build_cantor(schedule: &CantorSchedule) -> Result<CantorSet, CantorError> {
    schedule.validate()?;
    let k = select_k(schedule.d, schedule.s)?;
    let mut parents = ParentFamily::unit(schedule.d);
    let mut generations = Vec::with_capacity(schedule.n_generations as usize);
    let mut side_lengths = vec![1.0];
    for index in 0..schedule.n_generations {
        let m = match &schedule.m_schedule {
            MSchedule::Explicit(list) => list[index as usize],
            MSchedule::Auto => choose_m(
                schedule.d,
                schedule.s,
                k,
                parents.delta,
                schedule.c_abs,
                1,
            )?,
        };
        let params = ConstructionParams::new(
            schedule.d,
            schedule.s,
            parents.delta,
            k,
            schedule.a,
            m,
            schedule.seed,
            schedule.max_retries,
            schedule.margin,
        )
        .map_err(|source| CantorError::Generation { index, source })?;
        let output = build_generation(&parents, &params)
            .map_err(|source| CantorError::Generation { index, source })?;
        parents = ParentFamily {
            cubes: output.children.clone(),
            delta: output.epsilon,
        };
        side_lengths.push(output.epsilon);
        generations.push(output);
    }
    Ok(CantorSet {
        schedule: schedule.clone(),
        generations,
        side_lengths,
    })
}

/// Largest deviation of any parent's children from carrying exactly the
/// parent's diameter mass: `max |sum_children diam^s / diam_parent^s - 1|`
/// between generations `n` and `n + 1`.
pub fn mass_check(cs: &CantorSet, n: usize) -> Result<Real, CantorError> {
    if n + 1 > cs.depth() {
        return Err(CantorError::GenerationOutOfRange {
            n: n + 1,
            depth: cs.depth(),
        });
    }
    let parents = cs.family_at(n);
    let child_gen = &cs.generations[n];
    let s = cs.schedule.s;
    let mut worst: Real = 0.0;
    for (which, parent) in parents.iter().enumerate() {
        let child_mass: Real = child_gen
            .children
            .iter()
            .zip(&child_gen.child_parent)
            .filter(|(_, &p)| p == which)
            .map(|(c, _)| c.diameter().powf(s))
            .sum();
        let rel = (child_mass / parent.diameter().powf(s) - 1.0).abs();
        worst = worst.max(rel);
    }
    Ok(worst)
}

/// Exact count of generation-`n` cubes meeting the tube.
pub fn count_cubes_meeting_tube(
    cs: &CantorSet,
    n: usize,
    tube: &Tube<Real>,
) -> Result<usize, CantorError> {
    if n > cs.depth() {
        return Err(CantorError::GenerationOutOfRange { n, depth: cs.depth() });
    }
    let mut count = 0;
    for cube in cs.family_at(n) {
        if tube_cube_intersects(tube, &cube).expect("validated tube") {
            count += 1;
        }
    }
    Ok(count)
}

/// Upper estimate of the mass the family leaves inside a tube, by the
/// natural cover: pick the generation whose side brackets the tube width
/// from below and charge each met cube its full diameter mass.
pub fn tube_content_estimate(cs: &CantorSet, tube: &Tube<Real>) -> ContentEstimate {
    let w = tube.width;
    if w >= 1.0 {
        return ContentEstimate {
            value: 1.0,
            flag: ContentFlag::Trivial,
            generation: 0,
        };
    }
    let mut n = cs.depth();
    let mut flag = ContentFlag::Extrapolated;
    for candidate in 1..=cs.depth() {
        if cs.side_lengths[candidate] < w && w <= cs.side_lengths[candidate - 1] {
            n = candidate;
            flag = ContentFlag::Bracketed;
            break;
        }
    }
    let count = count_cubes_meeting_tube(cs, n, tube).expect("depth checked");
    let d = cs.schedule.d as Real;
    let value = count as Real * (d.sqrt() * cs.side_lengths[n]).powf(cs.schedule.s);
    ContentEstimate {
        value,
        flag,
        generation: n,
    }
}

/// Maximum over random balls of the diameter mass the generation-`n`
/// cubes place inside a ball, relative to the ball's own diameter mass.
/// Ball diameters are log-uniform in `[side_n, sqrt(d)]`, centres uniform
/// in the unit cube, drawn deterministically from the run seed.
pub fn ball_property_check(cs: &CantorSet, n: usize, trials: u64) -> Result<Real, CantorError> {
    if n > cs.depth() {
        return Err(CantorError::GenerationOutOfRange { n, depth: cs.depth() });
    }
    let d = cs.schedule.d;
    let s = cs.schedule.s;
    let cubes = cs.family_at(n);
    let lo = cs.side_lengths[n].ln();
    let hi = ((d as Real).sqrt()).ln();
    let mut rng = ChaCha8Rng::seed_from_u64(cs.schedule.seed);
    rng.set_stream(BALL_CHECK_STREAM + n as u64);
    let mut worst: Real = 0.0;
    for _ in 0..trials {
        let center = Point::new((0..d).map(|_| rng.gen::<Real>()).collect());
        let diameter = (lo + rng.gen::<Real>() * (hi - lo)).exp();
        let radius = diameter / 2.0;
        let mass: Real = cubes
            .iter()
            .filter(|c| distance_point_to_cube(&center, c) <= radius)
            .map(|c| c.diameter().powf(s))
            .sum();
        worst = worst.max(mass / diameter.powf(s));
    }
    Ok(worst)
}

/// RNG stream offsets for the diagnostic samplers, disjoint from the
/// construction (stream 0) and the Monte Carlo trials (streams from 1).
const BALL_CHECK_STREAM: u64 = 1 << 32;

/// Least-squares slope of `log(count)` against `log(1 / side)` across the
/// built generations, the box-counting dimension of the family.
pub fn box_dimension_estimate(cs: &CantorSet) -> Result<Real, CantorError> {
    if cs.depth() < 2 {
        return Err(CantorError::NeedTwoGenerations { depth: cs.depth() });
    }
    let points: Vec<(Real, Real)> = (0..=cs.depth())
        .map(|n| {
            let x = (1.0 / cs.side_lengths[n]).ln();
            let y = (cs.count_at(n) as Real).ln();
            (x, y)
        })
        .collect();
    let n = points.len() as Real;
    let mean_x: Real = points.iter().map(|p| p.0).sum::<Real>() / n;
    let mean_y: Real = points.iter().map(|p| p.1).sum::<Real>() / n;
    let cov: Real = points
        .iter()
        .map(|p| (p.0 - mean_x) * (p.1 - mean_y))
        .sum();
    let var: Real = points.iter().map(|p| (p.0 - mean_x).powi(2)).sum();
    Ok(cov / var)
}
