//! Independent post-hoc checks of a built generation.
//!
//! Every check works from the cube families and the run parameters alone,
//! never from construction-internal state, so a hand-crafted bad family
//! fails the matching check. "Every tube" claims are witnessed by pair
//! tubes through cube centres at slightly inflated width (an occupancy
//! maximizer can be perturbed onto two centres), a representative net when
//! small enough to enumerate, seeded random tubes, and, in the plane, a
//! perturbation audit around each pair tube.

use crate::construction::{ConstructionParams, GenerationOutput, ParentFamily};
use crate::geometry::{
    candidate_worst_tubes, representative_family_size, representative_tubes,
    tube_cube_intersects, Cube, Point, Tube,
};
use crate::{Real, GEOM_TOL, INT_TOL, LAW_SLACK};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashMap;

/// Representative nets above this size are skipped rather than enumerated;
/// pair candidates and random tubes still run.
pub const REPRESENTATIVE_AUDIT_CAP: u128 = 200_000;

/// Default random-tube count for the thin-width check.
pub const THIN_RANDOM_TUBES: u64 = 10_000;

/// Default random-tube count per width for the graded-law check.
pub const LAW_RANDOM_TUBES: u64 = 1_000;

/// Default random-tube count for the parent-occupancy check.
pub const HYPOTHESIS_RANDOM_TUBES: u64 = 1_000;

const THIN_STREAM: u64 = 2 << 32;
const LAW_STREAM: u64 = 3 << 32;
const HYPOTHESIS_STREAM: u64 = 4 << 32;

/// Exact child-count and nesting audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountsCheck {
    /// Every parent holds exactly the expected child count (by centre
    /// membership) and the totals match the side lengths.
    pub count_pass: bool,
    /// Every child cube lies inside the parent owning its centre.
    pub nesting_pass: bool,
    pub expected_per_parent: u64,
    pub expected_total: u64,
    pub total_children: u64,
    pub failures: Vec<String>,
}

impl CountsCheck {
    pub fn pass(&self) -> bool {
        self.count_pass && self.nesting_pass
    }
}

/// Pairwise-distance and cell-occupancy audit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparationCheck {
    pub pass: bool,
    /// Smallest pairwise centre distance (`f64::MAX` for fewer than two
    /// children).
    pub min_distance: Real,
    /// Required separation `5 d eta`.
    pub required: Real,
    pub eta: Real,
    /// No cell of any phase-shifted `eta`-grid meets two children.
    pub grid_audit_pass: bool,
    pub worst_pair: Option<[usize; 2]>,
}

/// Occupancy of thin tubes against the hard cap.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThinTubeCheck {
    pub pass: bool,
    pub cap: u32,
    pub max_count: u64,
    pub candidate_tubes: u64,
    pub perturbed_tubes: u64,
    pub random_tubes: u64,
    pub representative_tubes: u64,
    /// The net size exceeded the audit cap and was skipped.
    pub representatives_skipped: bool,
    pub worst_tube: Option<Tube<Real>>,
}

/// Occupancy law at one probed width.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WidthLaw {
    pub width: Real,
    pub max_count: u64,
    /// `max_count / (k (width/epsilon)^s)`.
    pub constant: Real,
}

/// Occupancy power law across intermediate widths.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LawCheck {
    pub pass: bool,
    /// Largest per-width constant.
    pub max_constant: Real,
    /// Acceptance cap on the constant.
    pub slack_cap: Real,
    pub per_width: Vec<WidthLaw>,
    pub random_tubes_per_width: u64,
}

/// Parent-family occupancy at double the parent side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HypothesisCheck {
    pub pass: bool,
    pub cap: u32,
    pub max_count: u64,
    pub candidate_tubes: u64,
    pub random_tubes: u64,
    pub representative_tubes: u64,
    pub representatives_skipped: bool,
}

/// Echo of the construction's tube-removal accounting.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetCheck {
    pub pass: bool,
    pub removed_total: u64,
    /// Accepted runs keep `8 * removed_total <= budget_numerator`.
    pub budget_numerator: u64,
}

/// All checks on one generation, with the parameters that reproduce it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub params: ConstructionParams,
    pub pass: bool,
    pub counts: CountsCheck,
    pub eta_separation: SeparationCheck,
    pub thin_tube: ThinTubeCheck,
    pub intermediate_law: LawCheck,
    pub hypothesis: HypothesisCheck,
    pub tube_budget: BudgetCheck,
    /// Witness-set scope note: pair tubes provably dominate in the plane
    /// (where the perturbation audit also runs); in higher dimensions the
    /// random sample carries the residual risk.
    pub caveat: String,
}

/// Runs every check with the default witness sizes.
pub fn full_report(
    gen: &GenerationOutput,
    parents: &ParentFamily,
    params: &ConstructionParams,
) -> VerificationReport {
    let counts = verify_counts(gen, parents, params);
    let eta_separation = verify_eta_cell(gen, params);
    let thin_tube = verify_thin_tubes(gen, params, THIN_RANDOM_TUBES);
    let intermediate_law =
        verify_intermediate_tubes(gen, params, &dyadic_widths(gen, params), LAW_RANDOM_TUBES);
    let hypothesis = verify_hypothesis(parents, params, HYPOTHESIS_RANDOM_TUBES);
    let tube_budget = verify_budget(gen);
    let pass = counts.pass()
        && eta_separation.pass
        && thin_tube.pass
        && intermediate_law.pass
        && hypothesis.pass
        && tube_budget.pass;
    VerificationReport {
        params: params.clone(),
        pass,
        counts,
        eta_separation,
        thin_tube,
        intermediate_law,
        hypothesis,
        tube_budget,
        caveat: "pair-tube witnesses are extremal in the plane; for d >= 3 \
                 the random sample carries the residual risk"
            .into(),
    }
}

/// The dyadic widths `epsilon * 2^j` up to and including the parent side.
pub fn dyadic_widths(gen: &GenerationOutput, params: &ConstructionParams) -> Vec<Real> {
    let mut widths = Vec::new();
    let mut w = gen.epsilon;
    while w < params.delta * (1.0 - INT_TOL) {
        widths.push(w);
        w *= 2.0;
    }
    widths.push(params.delta);
    widths
}

/// Checks that every parent holds the same child count, the totals match
/// the side lengths exactly, and every child nests in its parent.
pub fn verify_counts(
    gen: &GenerationOutput,
    parents: &ParentFamily,
    params: &ConstructionParams,
) -> CountsCheck {
    let mut failures = Vec::new();
    let children = &gen.children;
    let mut check = CountsCheck {
        count_pass: false,
        nesting_pass: true,
        expected_per_parent: 0,
        expected_total: 0,
        total_children: children.len() as u64,
        failures: Vec::new(),
    };
    if children.is_empty() {
        check.failures.push("generation holds no children".into());
        return check;
    }
    let epsilon = children[0].side;
    for (i, c) in children.iter().enumerate() {
        if (c.side - epsilon).abs() > 1e-12 * epsilon {
            failures.push(format!("child {i} has side {} instead of {epsilon}", c.side));
        }
    }
    let per_parent = (parents.delta / epsilon).powf(params.s);
    let total = epsilon.powf(-params.s);
    if (per_parent - per_parent.round()).abs() > INT_TOL * per_parent.max(1.0) {
        failures.push(format!(
            "side ratio gives a non-integral per-parent count {per_parent}"
        ));
    }
    if (total - total.round()).abs() > INT_TOL * total.max(1.0) {
        failures.push(format!("child side gives a non-integral total {total}"));
    }
    check.expected_per_parent = per_parent.round() as u64;
    check.expected_total = total.round() as u64;

    let mut counts = vec![0u64; parents.cubes.len()];
    let mut nesting_failures = Vec::new();
    for (i, child) in children.iter().enumerate() {
        let owners: Vec<usize> = parents
            .cubes
            .iter()
            .enumerate()
            .filter(|(_, p)| p.contains_point(&child.center, GEOM_TOL))
            .map(|(j, _)| j)
            .collect();
        match owners.as_slice() {
            [owner] => {
                counts[*owner] += 1;
                if !parents.cubes[*owner].contains_cube(child, GEOM_TOL) {
                    nesting_failures.push(format!(
                        "child {i} crosses the boundary of parent {owner}"
                    ));
                }
            }
            [] => {
                nesting_failures.push(format!("child {i} has its centre in no parent"));
            }
            many => {
                nesting_failures.push(format!(
                    "child {i} has its centre in parents {many:?}"
                ));
            }
        }
    }
    let mut count_ok = failures.is_empty();
    for (which, &c) in counts.iter().enumerate() {
        if c != check.expected_per_parent {
            count_ok = false;
            failures.push(format!(
                "parent {which} holds {c} children instead of {}",
                check.expected_per_parent
            ));
        }
    }
    if check.total_children != check.expected_total {
        count_ok = false;
        failures.push(format!(
            "family holds {} children instead of {}",
            check.total_children, check.expected_total
        ));
    }
    check.count_pass = count_ok;
    check.nesting_pass = nesting_failures.is_empty();
    failures.extend(nesting_failures);
    check.failures = failures;
    check
}

/// Checks the minimum pairwise centre distance against `5 d eta` and
/// audits every phase-shifted `eta`-grid for a cell meeting two children.
pub fn verify_eta_cell(gen: &GenerationOutput, params: &ConstructionParams) -> SeparationCheck {
    let eta = params.eta();
    let required = params.spacing_distance();
    let children = &gen.children;
    let mut min_distance = Real::MAX;
    let mut worst_pair = None;
    for i in 0..children.len() {
        for j in i + 1..children.len() {
            let dist = children[i].center.distance(&children[j].center);
            if dist < min_distance {
                min_distance = dist;
                worst_pair = Some([i, j]);
            }
        }
    }
    let distance_pass = min_distance >= required - 1e-12;

    // Each phase shifts the grid origin by eta/2 on a subset of axes; a
    // cell is charged to every child cube it touches.
    let d = params.d;
    let mut grid_audit_pass = true;
    'phases: for phase in 0..(1usize << d) {
        let mut seen: HashMap<Vec<i64>, usize> = HashMap::new();
        for (which, child) in children.iter().enumerate() {
            let ranges: Vec<(i64, i64)> = (0..d)
                .map(|axis| {
                    let offset = if phase >> axis & 1 == 1 { eta / 2.0 } else { 0.0 };
                    let lo = ((child.lo(axis) - offset - GEOM_TOL) / eta).floor() as i64;
                    let hi = ((child.hi(axis) - offset + GEOM_TOL) / eta).floor() as i64;
                    (lo, hi)
                })
                .collect();
            let mut cell: Vec<i64> = ranges.iter().map(|r| r.0).collect();
            loop {
                if let Some(&other) = seen.get(&cell) {
                    if other != which {
                        grid_audit_pass = false;
                        break 'phases;
                    }
                } else {
                    seen.insert(cell.clone(), which);
                }
                let mut axis = 0;
                loop {
                    if axis == d {
                        break;
                    }
                    cell[axis] += 1;
                    if cell[axis] <= ranges[axis].1 {
                        break;
                    }
                    cell[axis] = ranges[axis].0;
                    axis += 1;
                }
                if axis == d {
                    break;
                }
            }
        }
    }
    SeparationCheck {
        pass: distance_pass && grid_audit_pass,
        min_distance,
        required,
        eta,
        grid_audit_pass,
        worst_pair,
    }
}

fn count_met(cubes: &[Cube<Real>], tube: &Tube<Real>) -> u64 {
    cubes
        .iter()
        .filter(|c| tube_cube_intersects(tube, c).expect("validated tube"))
        .count() as u64
}

fn random_direction<R: Rng>(rng: &mut R, d: usize) -> Vec<Real> {
    loop {
        let v: Vec<Real> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = v.iter().map(|x| x * x).sum::<Real>().sqrt();
        if norm > 0.1 && norm <= 1.0 {
            return v.iter().map(|x| x / norm).collect();
        }
    }
}

fn random_tube<R: Rng>(rng: &mut R, d: usize, width: Real) -> Tube<Real> {
    let anchor = Point::new((0..d).map(|_| rng.gen::<Real>()).collect());
    Tube {
        anchor,
        direction: random_direction(rng, d),
        width,
    }
}

/// In the plane, tilts and offsets a tube slightly in every combination,
/// probing the neighbourhood of a pair-tube witness.
fn planar_perturbations(tube: &Tube<Real>, scale: Real) -> Vec<Tube<Real>> {
    let mut out = Vec::new();
    let perp = [-tube.direction[1], tube.direction[0]];
    for rot in [-1.0, 0.0, 1.0] {
        let angle: Real = rot * scale;
        let (sin, cos) = angle.sin_cos();
        let dir = vec![
            tube.direction[0] * cos - tube.direction[1] * sin,
            tube.direction[0] * sin + tube.direction[1] * cos,
        ];
        for shift in [-1.0, 0.0, 1.0] {
            if rot == 0.0 && shift == 0.0 {
                continue;
            }
            let anchor = Point::new(vec![
                tube.anchor.coords[0] + shift * scale * perp[0],
                tube.anchor.coords[1] + shift * scale * perp[1],
            ]);
            out.push(Tube {
                anchor,
                direction: dir.clone(),
                width: tube.width,
            });
        }
    }
    out
}

struct TubeAudit {
    max_count: u64,
    worst: Option<Tube<Real>>,
    candidates: u64,
    perturbed: u64,
    randoms: u64,
    representatives: u64,
    representatives_skipped: bool,
}

/// Shared audit: pair tubes through the centres at `candidate_width`,
/// planar perturbations of each at `query_width`, the representative net
/// at `representative_tau` when small enough, and seeded random tubes at
/// `query_width`.
fn audit_tubes(
    cubes: &[Cube<Real>],
    d: usize,
    candidate_width: Real,
    query_width: Real,
    representative_tau: Real,
    random_tubes: u64,
    seed: u64,
    stream: u64,
) -> TubeAudit {
    let centers: Vec<Point<Real>> = cubes.iter().map(|c| c.center.clone()).collect();
    let mut max_count = 0u64;
    let mut worst = None;
    let consider = |tube: &Tube<Real>, max_count: &mut u64, worst: &mut Option<Tube<Real>>| {
        let count = count_met(cubes, tube);
        if count > *max_count {
            *max_count = count;
            *worst = Some(tube.clone());
        }
        count
    };

    let candidates = candidate_worst_tubes(&centers, candidate_width);
    let mut perturbed = 0u64;
    for tube in &candidates {
        consider(tube, &mut max_count, &mut worst);
        if d == 2 {
            let probe = Tube {
                width: query_width,
                ..tube.clone()
            };
            for variant in planar_perturbations(&probe, query_width / 4.0) {
                consider(&variant, &mut max_count, &mut worst);
                perturbed += 1;
            }
        }
    }

    let mut representatives = 0u64;
    let mut representatives_skipped = false;
    match representative_family_size(representative_tau, d) {
        Ok(size) if size <= REPRESENTATIVE_AUDIT_CAP => {
            let family =
                representative_tubes(representative_tau, d).expect("size under the hard cap");
            for tube in &family.tubes {
                consider(tube, &mut max_count, &mut worst);
            }
            representatives = family.len() as u64;
        }
        _ => representatives_skipped = true,
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    for _ in 0..random_tubes {
        let tube = random_tube(&mut rng, d, query_width);
        consider(&tube, &mut max_count, &mut worst);
    }

    TubeAudit {
        max_count,
        worst,
        candidates: candidates.len() as u64,
        perturbed,
        randoms: random_tubes,
        representatives,
        representatives_skipped,
    }
}

/// Checks that no thin tube meets more than `k` children: pair tubes at
/// width `(2 + sqrt(d)) epsilon` (which dominate every width-`2 epsilon`
/// tube), the representative net at the child side, and random
/// width-`2 epsilon` tubes.
pub fn verify_thin_tubes(
    gen: &GenerationOutput,
    params: &ConstructionParams,
    sample_size: u64,
) -> ThinTubeCheck {
    let d = params.d;
    let epsilon = gen
        .children
        .first()
        .map(|c| c.side)
        .unwrap_or(gen.epsilon);
    let query_width = 2.0 * epsilon;
    let candidate_width = query_width + (d as Real).sqrt() * epsilon;
    let audit = audit_tubes(
        &gen.children,
        d,
        candidate_width,
        query_width,
        epsilon,
        sample_size,
        params.seed,
        THIN_STREAM,
    );
    ThinTubeCheck {
        pass: audit.max_count <= params.k as u64,
        cap: params.k,
        max_count: audit.max_count,
        candidate_tubes: audit.candidates,
        perturbed_tubes: audit.perturbed,
        random_tubes: audit.randoms,
        representative_tubes: audit.representatives,
        representatives_skipped: audit.representatives_skipped,
        worst_tube: audit.worst,
    }
}

/// Checks the occupancy power law at each probed width: no tube of width
/// `w` may meet more than `LAW_SLACK * k * (w / epsilon)^s` children.
pub fn verify_intermediate_tubes(
    gen: &GenerationOutput,
    params: &ConstructionParams,
    widths: &[Real],
    sample_size: u64,
) -> LawCheck {
    let d = params.d;
    let epsilon = gen
        .children
        .first()
        .map(|c| c.side)
        .unwrap_or(gen.epsilon);
    let centers: Vec<Point<Real>> = gen.children.iter().map(|c| c.center.clone()).collect();
    let mut per_width = Vec::with_capacity(widths.len());
    let mut max_constant: Real = 0.0;
    for (widx, &width) in widths.iter().enumerate() {
        let mut max_count = 0u64;
        let candidate_width = width + (d as Real).sqrt() * epsilon;
        for tube in candidate_worst_tubes(&centers, candidate_width) {
            max_count = max_count.max(count_met(&gen.children, &tube));
        }
        let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
        rng.set_stream(LAW_STREAM + widx as u64);
        for _ in 0..sample_size {
            let tube = random_tube(&mut rng, d, width);
            max_count = max_count.max(count_met(&gen.children, &tube));
        }
        let constant = max_count as Real / (params.k as Real * (width / epsilon).powf(params.s));
        max_constant = max_constant.max(constant);
        per_width.push(WidthLaw {
            width,
            max_count,
            constant,
        });
    }
    LawCheck {
        pass: max_constant <= LAW_SLACK,
        max_constant,
        slack_cap: LAW_SLACK,
        per_width,
        random_tubes_per_width: sample_size,
    }
}

/// Checks that no tube of width `2 delta` meets more than `k` parents.
pub fn verify_hypothesis(
    parents: &ParentFamily,
    params: &ConstructionParams,
    sample_size: u64,
) -> HypothesisCheck {
    let d = parents.cubes[0].dim();
    let query_width = 2.0 * parents.delta;
    let candidate_width = query_width + (d as Real).sqrt() * parents.delta;
    let audit = audit_tubes(
        &parents.cubes,
        d,
        candidate_width,
        query_width,
        parents.delta.min(1.0),
        sample_size,
        params.seed,
        HYPOTHESIS_STREAM,
    );
    HypothesisCheck {
        pass: audit.max_count <= params.k as u64,
        cap: params.k,
        max_count: audit.max_count,
        candidate_tubes: audit.candidates,
        random_tubes: audit.randoms,
        representative_tubes: audit.representatives,
        representatives_skipped: audit.representatives_skipped,
    }
}

/// Echoes the construction's removal accounting against its budget.
pub fn verify_budget(gen: &GenerationOutput) -> BudgetCheck {
    let removed = gen.removal_log.tube_removed_total;
    let numerator = gen.removal_log.tube_budget_numerator;
    BudgetCheck {
        pass: 8 * removed <= numerator,
        removed_total: removed,
        budget_numerator: numerator,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::construction::build_generation;
    use std::sync::OnceLock;

    fn reference() -> (GenerationOutput, ParentFamily, ConstructionParams) {
        static BUILD: OnceLock<(GenerationOutput, ParentFamily, ConstructionParams)> =
            OnceLock::new();
        BUILD
            .get_or_init(|| {
                let params =
                    ConstructionParams::new(2, 0.5, 1.0, 5, 4, 1_000_000, 7, 50, 0.125).unwrap();
                let parents = ParentFamily::unit(2);
                let gen = build_generation(&parents, &params).unwrap();
                (gen, parents, params)
            })
            .clone()
    }

    #[test]
    fn accepted_build_passes_every_check() {
        let (gen, parents, params) = reference();
        let report = full_report(&gen, &parents, &params);
        assert!(report.pass, "failing report: {report:?}");
        assert!(report.counts.pass());
        assert_eq!(report.counts.expected_per_parent, gen.n_per_parent);
        assert!(report.eta_separation.pass);
        assert!(report.thin_tube.pass);
        assert!(report.thin_tube.max_count >= 2);
        assert!(report.intermediate_law.pass);
        assert!(report.intermediate_law.max_constant <= LAW_SLACK);
        assert!(report.hypothesis.pass);
        assert_eq!(report.hypothesis.max_count, 1);
        assert!(report.tube_budget.pass);
    }

    #[test]
    fn report_roundtrips_exactly_through_json() {
        let (gen, parents, params) = reference();
        let report = full_report(&gen, &parents, &params);
        let text = serde_json::to_string_pretty(&report).unwrap();
        let back: VerificationReport = serde_json::from_str(&text).unwrap();
        assert_eq!(report, back);
        let again = serde_json::to_string_pretty(&back).unwrap();
        assert_eq!(text, again);
    }

    #[test]
    fn deleted_child_fails_the_counts_check_only() {
        let (mut gen, parents, params) = reference();
        gen.children.pop();
        gen.child_parent.pop();
        let counts = verify_counts(&gen, &parents, &params);
        assert!(!counts.count_pass);
        assert!(counts.nesting_pass);
        assert!(counts.failures.iter().any(|f| f.contains("parent 0")));
        assert!(verify_eta_cell(&gen, &params).pass);
        assert!(verify_thin_tubes(&gen, &params, 500).pass);
    }

    #[test]
    fn boundary_crossing_child_fails_nesting_only() {
        let (mut gen, parents, params) = reference();
        // Slide one child so its cube pokes out of the unit cube while
        // its centre stays inside.
        let eps = gen.epsilon;
        let victim = 0;
        gen.children[victim].center = Point::new(vec![eps / 4.0, 0.5]);
        let counts = verify_counts(&gen, &parents, &params);
        assert!(!counts.nesting_pass);
        assert!(counts.count_pass);
        assert!(counts
            .failures
            .iter()
            .any(|f| f.contains("crosses the boundary")));
    }

    #[test]
    fn close_pair_fails_separation() {
        let (mut gen, parents, params) = reference();
        let near = gen.children[1].center.coords.clone();
        let shifted: Vec<Real> = near
            .iter()
            .map(|&x| x + params.eta() / 2.0 / (2f64).sqrt())
            .collect();
        gen.children[0].center = Point::new(shifted);
        let sep = verify_eta_cell(&gen, &params);
        assert!(!sep.pass);
        assert!(sep.min_distance < sep.required);
        assert_eq!(sep.worst_pair, Some([0, 1]));
        assert!(!sep.grid_audit_pass);
        assert!(verify_counts(&gen, &parents, &params).pass());
    }

    #[test]
    fn single_child_separation_is_vacuous() {
        let (mut gen, _, params) = reference();
        gen.children.truncate(1);
        let sep = verify_eta_cell(&gen, &params);
        assert!(sep.pass);
        assert_eq!(sep.min_distance, Real::MAX);
        assert_eq!(sep.worst_pair, None);
    }

    #[test]
    fn collinear_overload_fails_the_thin_check_with_witness() {
        let (mut gen, _, params) = reference();
        // Six centres on one line, far apart: every other check's geometry
        // is untouched, but a thin pair tube catches all six.
        let eps = gen.epsilon;
        gen.children = (0..6)
            .map(|i| {
                Cube::new(
                    Point::new(vec![0.1 + 0.15 * i as Real, 0.4 + 0.045 * i as Real]),
                    eps,
                )
            })
            .collect();
        gen.child_parent = vec![0; 6];
        let thin = verify_thin_tubes(&gen, &params, 500);
        assert!(!thin.pass);
        assert_eq!(thin.max_count, 6);
        let witness = thin.worst_tube.expect("a failing check has a witness");
        assert_eq!(count_met(&gen.children, &witness), 6);
    }

    #[test]
    fn zero_children_give_zero_occupancy() {
        let (mut gen, _, params) = reference();
        gen.children.clear();
        gen.child_parent.clear();
        let thin = verify_thin_tubes(&gen, &params, 200);
        assert!(thin.pass);
        assert_eq!(thin.max_count, 0);
        assert!(thin.worst_tube.is_none());
    }

    #[test]
    fn law_constant_is_consistent_at_the_thin_end() {
        let (gen, _, params) = reference();
        let law = verify_intermediate_tubes(&gen, &params, &[gen.epsilon], 500);
        let thin = verify_thin_tubes(&gen, &params, 500);
        // Width-epsilon tubes are narrower than the thin probes, so the
        // endpoint constant cannot exceed the thin maximum over the cap.
        assert!(law.per_width[0].max_count <= thin.max_count);
        assert!(law.per_width[0].constant <= thin.max_count as Real / params.k as Real);
    }

    #[test]
    fn law_width_at_parent_side_is_globally_capped() {
        let (gen, _, params) = reference();
        let law = verify_intermediate_tubes(&gen, &params, &[params.delta], 500);
        assert!(law.per_width[0].max_count <= gen.children.len() as u64);
    }

    #[test]
    fn aligned_parent_row_fails_the_hypothesis() {
        // Six parents of side 1/36 in one row; a double-side tube catches
        // them all.
        let side = 1.0 / 36.0;
        let parents = ParentFamily {
            cubes: (0..6)
                .map(|i| Cube::new(Point::new(vec![0.1 + 0.15 * i as Real, 0.5]), side))
                .collect(),
            delta: side,
        };
        let params =
            ConstructionParams::new(2, 0.5, side, 5, 4, 100_000_000, 7, 50, 0.125).unwrap();
        let check = verify_hypothesis(&parents, &params, 300);
        assert!(!check.pass);
        assert_eq!(check.max_count, 6);
        let unit = ParentFamily::unit(2);
        let easy = ConstructionParams::new(2, 0.5, 1.0, 5, 4, 1_000_000, 7, 50, 0.125).unwrap();
        let check = verify_hypothesis(&unit, &easy, 300);
        assert!(check.pass);
        assert_eq!(check.max_count, 1);
    }

    #[test]
    fn tampered_removal_accounting_fails_the_budget_echo() {
        let (mut gen, _, _) = reference();
        gen.removal_log.tube_removed_total = gen.removal_log.tube_budget_numerator;
        let budget = verify_budget(&gen);
        assert!(!budget.pass);
    }

    #[test]
    fn reports_at_two_seeds_differ_only_in_measurements() {
        let parents = ParentFamily::unit(2);
        let reports: Vec<VerificationReport> = [7u64, 11]
            .iter()
            .map(|&seed| {
                let params =
                    ConstructionParams::new(2, 0.5, 1.0, 5, 4, 1_000_000, seed, 50, 0.125)
                        .unwrap();
                let gen = build_generation(&parents, &params).unwrap();
                full_report(&gen, &parents, &params)
            })
            .collect();
        let (a, b) = (&reports[0], &reports[1]);
        assert!(a.pass && b.pass);
        assert_eq!(a.counts.expected_per_parent, b.counts.expected_per_parent);
        assert_eq!(a.thin_tube.cap, b.thin_tube.cap);
        assert_eq!(a.eta_separation.required, b.eta_separation.required);
        assert_eq!(
            a.intermediate_law.slack_cap,
            b.intermediate_law.slack_cap
        );
        assert_ne!(a.eta_separation.min_distance, b.eta_separation.min_distance);
        // The stable law constants sit within a factor 2 of each other.
        let (ca, cb) = (a.intermediate_law.max_constant, b.intermediate_law.max_constant);
        assert!(ca <= 2.0 * cb && cb <= 2.0 * ca, "constants {ca} vs {cb}");
    }

    #[test]
    fn widening_a_tube_never_loses_cubes() {
        let (gen, _, _params) = reference();
        let centers: Vec<Point<Real>> =
            gen.children.iter().map(|c| c.center.clone()).collect();
        for tube in candidate_worst_tubes(&centers, gen.epsilon) {
            let narrow = count_met(&gen.children, &tube);
            let wide = count_met(
                &gen.children,
                &Tube {
                    width: tube.width * 3.0,
                    ..tube.clone()
                },
            );
            assert!(wide >= narrow);
        }
    }
}
