//! Collinear-cluster pruning over a dyadic ladder of tube widths.
//!
//! For each rung `beta = 1, 2, 4, ...` the sample must not contain
//! `ceil(k beta^s)` points inside any tube of width `r beta / m` around a
//! line through two sample points. Enforcement works on the pair tubes at
//! twice that width: if some width-`w` tube held a violating cluster, the
//! pair tube through the cluster's two extremal points at width `2w`
//! would hold it too, so clearing all pair tubes clears every tube.
//!
//! The ladder stops where enforcement becomes meaningless at the sampled
//! density: rungs whose width exceeds the realized grid cell side, or
//! whose expected occupancy reaches a quarter of the cap, are not
//! enforced, and rungs whose tiny caps would be tripped by the sheer
//! number of pairs are skipped at the bottom. Total removals are
//! budgeted; exceeding the budget abandons the sample.

use super::build::ParentFamily;
use super::pairscan::{line_distance_sq, pair_line, PointGrid};
use super::{ceil_int, AttemptFailure, ConstructionParams, PointCloud, Stage};
use crate::Real;
use rayon::prelude::*;

/// One enforced rung of the dyadic ladder.
#[derive(Debug, Clone, PartialEq)]
pub struct LadderRung {
    pub beta: u64,
    /// Width of the enforced pair tubes, `2 r beta / m`.
    pub pair_width: Real,
    /// Maximum points allowed in such a tube, `ceil(k beta^s) - 1`.
    pub cap: u64,
}

/// Result of the collinear-cluster prune.
#[derive(Debug, Clone, PartialEq)]
pub struct TubePrune {
    pub cloud: PointCloud,
    pub removed_total: u64,
    pub rungs: Vec<LadderRung>,
}

/// The rungs enforced at these parameters.
///
/// Admission is gated on both ends. A pair tube at rung `beta` has mean
/// occupancy `mu(beta) = density * width * chord`, where the chord is the
/// mean length a line cuts through two sampled parents. At the top of the
/// ladder a rung whose cap sits within 4x of the mean would flag a
/// constant fraction of all tubes, so those rungs stop the ladder. At the
/// bottom the caps are tiny and the danger is tail mass instead: with
/// `pairs * mu^(q-2) / ((q-2)! * C(q,2))` expected removals (Poisson tail
/// over the non-endpoint members, one removal per cluster of `C(q,2)`
/// flagged pairs), a rung that alone would eat more than a quarter of the
/// removal budget is skipped. Enforcement at such widths is pointless
/// anyway: the later per-child occupancy law covers every width that the
/// final family is accountable for.
pub fn ladder_rungs(params: &ConstructionParams) -> Vec<LadderRung> {
    let mut rungs = Vec::new();
    let eta_cell = params.eta_realized();
    let shrunk = 1.0 - 2.0 * params.margin;
    let density = params.cells_target() as Real
        / (shrunk.powi(params.d as i32) * params.delta.powi(params.d as i32));
    let chord = std::f64::consts::FRAC_PI_2 * shrunk * params.delta;
    let n = params.sample_size() as Real;
    let pairs = n * (n - 1.0) / 2.0;
    let budget = params.removal_budget_numerator() as Real;
    let mut beta: u64 = 1;
    loop {
        let pair_width = 2.0 * params.r * beta as Real / params.m as Real;
        if pair_width > eta_cell * (1.0 + crate::INT_TOL) {
            break;
        }
        let q = ceil_int(params.k as Real * (beta as Real).powf(params.s));
        let mu = density * pair_width * chord;
        if 4.0 * mu > q as Real {
            break;
        }
        let mut tail = 1.0;
        for i in 1..q.saturating_sub(1) {
            tail *= mu / i as Real;
        }
        let cluster_pairs = (q * (q - 1) / 2) as Real;
        let expected_removals = pairs * tail / cluster_pairs;
        if expected_removals <= budget / 4.0 {
            rungs.push(LadderRung {
                beta,
                pair_width,
                cap: q.saturating_sub(1),
            });
        }
        match beta.checked_mul(2) {
            Some(next) => beta = next,
            None => break,
        }
    }
    rungs
}

/// Removes points until no pair tube on any rung holds more than its cap.
/// Violating tubes lose their farthest points first (ties to the later
/// sample). Fails when total removals exceed the shared budget.
pub fn prune_tube_clusters(
    cloud: PointCloud,
    parents: &ParentFamily,
    params: &ConstructionParams,
) -> Result<TubePrune, AttemptFailure> {
    let _ = parents;
    let rungs = ladder_rungs(params);
    let budget_numerator = params.removal_budget_numerator();
    let n = cloud.len();
    if rungs.is_empty() || n < 3 {
        let mut cloud = cloud;
        cloud.stage = Stage::Pruned;
        return Ok(TubePrune {
            cloud,
            removed_total: 0,
            rungs,
        });
    }

    let mut alive = vec![true; n];
    let mut grid = PointGrid::build(
        &cloud.points,
        &alive,
        PointGrid::resolution_for(n, params.d),
    );
    let thresholds_sq: Vec<Real> = rungs
        .iter()
        .map(|r| {
            let t = r.pair_width / 2.0 + crate::GEOM_TOL;
            t * t
        })
        .collect();
    let top_radius = rungs.last().unwrap().pair_width / 2.0 + crate::GEOM_TOL;

    // Detection pass: for every pair, gather candidate points near the
    // line once at the widest rung and test each rung's cap on the sorted
    // distances. Removals only shrink counts, so pairs clean here stay
    // clean; only flagged pairs need serial fixup.
    let top_threshold_sq = thresholds_sq[thresholds_sq.len() - 1];
    let flagged: Vec<(u32, u32, u32)> = (0..n as u32 - 1)
        .into_par_iter()
        .map(|i| {
            let mut local = Vec::new();
            let mut candidates = Vec::new();
            let mut dists = Vec::new();
            let mut anchor = vec![0.0; params.d];
            let mut dir = vec![0.0; params.d];
            for j in i + 1..n as u32 {
                if !pair_line(&cloud.points, i as usize, j as usize, &mut anchor, &mut dir) {
                    continue;
                }
                grid.candidates_near_line(&anchor, &dir, top_radius, &mut candidates);
                dists.clear();
                for &c in &candidates {
                    let dsq = line_distance_sq(&cloud.points[c as usize].coords, &anchor, &dir);
                    if dsq <= top_threshold_sq {
                        dists.push(dsq);
                    }
                }
                dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
                let mut mask = 0u32;
                for (t, rung) in rungs.iter().enumerate() {
                    let count = dists.partition_point(|&dsq| dsq <= thresholds_sq[t]);
                    if count as u64 > rung.cap {
                        mask |= 1 << t;
                    }
                }
                if mask != 0 {
                    local.push((mask, i, j));
                }
            }
            local
        })
        .collect::<Vec<_>>()
        .into_iter()
        .flatten()
        .collect();

    let mut removed_total = 0u64;
    let mut candidates = Vec::new();
    let mut anchor = vec![0.0; params.d];
    let mut dir = vec![0.0; params.d];
    for (t, rung) in rungs.iter().enumerate() {
        let bit = 1u32 << t;
        for &(mask, i, j) in &flagged {
            if mask & bit == 0 || !alive[i as usize] || !alive[j as usize] {
                continue;
            }
            loop {
                if !pair_line(&cloud.points, i as usize, j as usize, &mut anchor, &mut dir) {
                    break;
                }
                grid.candidates_near_line(
                    &anchor,
                    &dir,
                    rung.pair_width / 2.0 + crate::GEOM_TOL,
                    &mut candidates,
                );
                let mut members: Vec<(Real, u32)> = candidates
                    .iter()
                    .filter_map(|&c| {
                        let dsq =
                            line_distance_sq(&cloud.points[c as usize].coords, &anchor, &dir);
                        (dsq <= thresholds_sq[t]).then_some((dsq, c))
                    })
                    .collect();
                if members.len() as u64 <= rung.cap {
                    break;
                }
                // Farthest point goes; among equals, the later sample.
                members.sort_by(|a, b| {
                    a.0.partial_cmp(&b.0)
                        .unwrap()
                        .then(a.1.cmp(&b.1))
                });
                let victim = members.last().unwrap().1;
                alive[victim as usize] = false;
                grid.remove(victim, &cloud.points[victim as usize]);
                removed_total += 1;
                if 8 * removed_total > budget_numerator {
                    return Err(AttemptFailure::TubeBudget);
                }
            }
        }
    }

    let mut cloud = cloud.retain_alive(&alive);
    cloud.stage = Stage::Pruned;
    Ok(TubePrune {
        cloud,
        removed_total,
        rungs,
    })
}
