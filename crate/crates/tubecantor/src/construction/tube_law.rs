//! Tube occupancy caps sized against the realized child side.
//!
//! The earlier prunes work at widths tied to the sampling density. The
//! final caps are stated against the child side `epsilon`, which is only
//! known once the per-parent count is: `epsilon = delta * n^(-1/s)`. This
//! stage searches downward over candidate counts `n`. For each candidate
//! it enforces, on the pair tubes of the surviving points,
//!
//! * at width `(4 + 2 sqrt(d)) epsilon`, at most `k` points, which pins
//!   every width-`2 epsilon` tube to at most `k` child cubes, and
//! * at width `2 (w + sqrt(d) epsilon)` for each dyadic `w` between
//!   `epsilon` and `delta`, at most `floor(SLACK k (w/epsilon)^s)` points,
//!   the graded cap for intermediate widths,
//!
//! removing points from a violating tube until it complies, richest
//! parent first so no parent starves while another has slack. A candidate
//! wins if every parent still holds `n` points at the fixed point; the
//! first winner (largest `n`) is returned.

use super::build::ParentFamily;
use super::equalize::{derive_epsilon, survivor_floor};
use super::pairscan::{line_distance_sq, pair_line};
use super::{AttemptFailure, ConstructionParams, PointCloud};
use crate::{Real, LAW_SLACK};

/// One enforced width with its occupancy cap.
#[derive(Debug, Clone, PartialEq)]
struct LawRung {
    pair_width: Real,
    cap: u64,
}

/// Outcome of the occupancy-cap stage.
#[derive(Debug, Clone, PartialEq)]
pub struct TubeLawOutcome {
    pub cloud: PointCloud,
    /// Winning per-parent count; the caller equalizes to exactly this.
    pub n_target: u64,
    pub removed: Vec<u64>,
    /// Width below which tubes are pinned to `k` points.
    pub thin_width: Real,
}

fn rungs_for(params: &ConstructionParams, epsilon: Real) -> Vec<LawRung> {
    let sqrt_d = (params.d as Real).sqrt();
    let k = params.k as u64;
    let mut rungs = vec![LawRung {
        pair_width: super::thin_enforcement_width(params.d, epsilon),
        cap: k,
    }];
    let mut probe = epsilon;
    while probe <= params.delta * (1.0 + crate::INT_TOL) {
        let graded = LAW_SLACK * params.k as Real * (probe / epsilon).powf(params.s);
        rungs.push(LawRung {
            pair_width: 2.0 * (probe + sqrt_d * epsilon),
            cap: graded.floor() as u64,
        });
        probe *= 2.0;
    }
    rungs.sort_by(|a, b| a.pair_width.partial_cmp(&b.pair_width).unwrap());
    rungs
}

/// Enforces all rungs on the alive points to a fixed point. Returns the
/// number of removals, charged per parent.
///
/// A violating tube loses points from whichever parent currently holds
/// the most survivors, so enforcement starves no parent while another
/// still has slack; among that parent's members the farthest from the
/// axis goes first, ties to the later sample.
fn enforce_rungs(
    cloud: &PointCloud,
    rungs: &[LawRung],
    alive: &mut [bool],
    removed: &mut [u64],
) -> u64 {
    let n = cloud.len();
    let d = cloud.points.first().map_or(2, |p| p.dim());
    let mut counts = vec![0u64; removed.len()];
    for i in 0..n {
        if alive[i] {
            counts[cloud.parent_idx[i]] += 1;
        }
    }
    let mut anchor = vec![0.0; d];
    let mut dir = vec![0.0; d];
    let mut total = 0u64;
    loop {
        let mut changed = false;
        for rung in rungs {
            let thr = rung.pair_width / 2.0 + crate::GEOM_TOL;
            let thr_sq = thr * thr;
            for i in 0..n {
                if !alive[i] {
                    continue;
                }
                for j in i + 1..n {
                    if !alive[j] {
                        continue;
                    }
                    if !pair_line(&cloud.points, i, j, &mut anchor, &mut dir) {
                        continue;
                    }
                    loop {
                        let mut worst: Option<(u64, Real, usize)> = None;
                        let mut count = 0u64;
                        for (c, p) in cloud.points.iter().enumerate() {
                            if !alive[c] {
                                continue;
                            }
                            let dsq = line_distance_sq(&p.coords, &anchor, &dir);
                            if dsq <= thr_sq {
                                count += 1;
                                let richness = counts[cloud.parent_idx[c]];
                                let beats = worst
                                    .map(|(w_rich, w_dsq, w_idx)| {
                                        (richness, dsq, c) > (w_rich, w_dsq, w_idx)
                                    })
                                    .unwrap_or(true);
                                if beats {
                                    worst = Some((richness, dsq, c));
                                }
                            }
                        }
                        if count <= rung.cap {
                            break;
                        }
                        let (_, _, victim) = worst.expect("overfull tube has a member");
                        alive[victim] = false;
                        counts[cloud.parent_idx[victim]] -= 1;
                        removed[cloud.parent_idx[victim]] += 1;
                        total += 1;
                        changed = true;
                        if victim == i || victim == j {
                            break;
                        }
                    }
                    if !alive[i] {
                        break;
                    }
                }
            }
        }
        if !changed {
            return total;
        }
    }
}

/// Searches downward from the current minimum per-parent count for the
/// largest count whose caps can be enforced without starving a parent.
pub fn enforce_tube_law(
    cloud: PointCloud,
    parents: &ParentFamily,
    params: &ConstructionParams,
) -> Result<TubeLawOutcome, AttemptFailure> {
    let n_parents = parents.cubes.len();
    let counts = cloud.counts_per_parent(n_parents);
    let start = counts.iter().copied().min().unwrap_or(0);
    if start < 2 {
        return Err(AttemptFailure::SpacingDegenerate);
    }
    let (floor, _) = survivor_floor(params);
    if start < floor {
        return Err(AttemptFailure::DensityFloor);
    }
    for n_target in (floor..=start).rev() {
        let epsilon = derive_epsilon(params, n_target);
        let rungs = rungs_for(params, epsilon);
        let mut alive = vec![true; cloud.len()];
        let mut removed = vec![0u64; n_parents];
        enforce_rungs(&cloud, &rungs, &mut alive, &mut removed);
        let surviving = cloud.retain_alive(&alive);
        let min_count = surviving
            .counts_per_parent(n_parents)
            .into_iter()
            .min()
            .unwrap_or(0);
        if min_count >= n_target {
            return Ok(TubeLawOutcome {
                cloud: surviving,
                n_target,
                removed,
                thin_width: super::thin_enforcement_width(params.d, epsilon),
            });
        }
    }
    Err(AttemptFailure::ThinningCollapse)
}
