//! The run manifest: every input needed to reproduce a run bit-exactly,
//! plus per-generation summaries and the constants measured afterwards.

use crate::analysis::{choose_m, select_k};
use crate::cantor::{CantorError, CantorSet, MSchedule};
use crate::construction::{ConstructionParams, RemovalLog};
use crate::geometry::representative_family_size;
use crate::Real;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub schedule: crate::cantor::CantorSchedule,
    pub generations: Vec<GenerationSummary>,
    pub measured: MeasuredConstants,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenerationSummary {
    pub generation: u32,
    /// Cube side at this generation.
    pub side: Real,
    pub n_per_parent: u64,
    pub total_cubes: u64,
    pub m: u64,
    pub retries: u32,
    pub eta: Real,
    /// Density of the representative tube net at this side:
    /// `family_size * side^(2(d-1))`.
    pub representative_density: Real,
    pub params: ConstructionParams,
    pub removal_log: RemovalLog,
}

/// Constants measured by later commands; absent until those commands run.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct MeasuredConstants {
    /// Largest content-to-width-power ratio seen by the sweep.
    pub content_ratio_max: Option<Real>,
    /// The sweep's per-generation content ratio maxima (index 0 is
    /// generation 1).
    pub content_ratio_per_generation: Option<Vec<Real>>,
    /// Largest graded-occupancy constant reported by verification.
    pub law_constant: Option<Real>,
}

/// Re-derives the per-generation construction parameters exactly as the
/// build did: the occupancy cap once, the density per generation.
pub fn schedule_params(cs: &CantorSet) -> Result<Vec<ConstructionParams>, CantorError> {
    let schedule = &cs.schedule;
    let k = select_k(schedule.d, schedule.s)?;
    let mut out = Vec::with_capacity(cs.depth());
    for index in 0..cs.depth() {
        let delta = cs.side_lengths[index];
        let m = match &schedule.m_schedule {
            MSchedule::Explicit(list) => list[index],
            MSchedule::Auto => choose_m(schedule.d, schedule.s, k, delta, schedule.c_abs, 1)?,
        };
        let params = ConstructionParams::new(
            schedule.d,
            schedule.s,
            delta,
            k,
            schedule.a,
            m,
            schedule.seed,
            schedule.max_retries,
            schedule.margin,
        )
        .map_err(|source| CantorError::Generation {
            index: index as u32,
            source,
        })?;
        out.push(params);
    }
    Ok(out)
}

pub fn manifest_for(cs: &CantorSet) -> Result<RunManifest, CantorError> {
    let params = schedule_params(cs)?;
    let d = cs.schedule.d;
    let generations = cs
        .generations
        .iter()
        .zip(&params)
        .enumerate()
        .map(|(i, (gen, params))| {
            let side = gen.epsilon;
            let density = representative_family_size(side, d)
                .map(|size| size as Real * side.powi(2 * (d as i32 - 1)))
                .unwrap_or(0.0);
            GenerationSummary {
                generation: i as u32 + 1,
                side,
                n_per_parent: gen.n_per_parent,
                total_cubes: gen.children.len() as u64,
                m: params.m,
                retries: gen.retries,
                eta: gen.eta,
                representative_density: density,
                params: params.clone(),
                removal_log: gen.removal_log.clone(),
            }
        })
        .collect();
    Ok(RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        schedule: cs.schedule.clone(),
        generations,
        measured: MeasuredConstants::default(),
    })
}
