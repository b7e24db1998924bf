//! Monte Carlo estimation of the sampling events the construction
//! conditions on.
//!
//! Every trial draws a fresh sample from the same parent family and
//! parameters as the construction itself, using the run seed with a
//! per-trial RNG stream (`stream = trial + 1`; stream 0 belongs to the
//! construction). Trials are independent and order-free, so reports are
//! deterministic for a fixed seed regardless of thread count.

use super::AnalysisError;
use crate::construction::{
    check_event_grid, check_event_min_count, compute_xr, prune_grid_clusters,
    prune_tube_clusters, sample_points, ConstructionParams, ParentFamily,
};
use crate::Real;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

/// Fewest trials accepted by the estimators.
pub const MIN_TRIALS: u64 = 100;

/// Frequency of the cluster-mass diagnostic reaching 1/10.
///
/// Per trial, each parent's statistic is the number of `a`-element
/// subsets of the sample sharing one of its grid cells, normalized by
/// `(delta m)^s`; the trial's value is the maximum over parents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MainClaimReport {
    pub trials: u64,
    /// Trials whose maximum statistic reached 1/10.
    pub exceedances: u64,
    /// `exceedances / trials`; accepted parameters keep this below 0.1.
    pub frequency: Real,
    /// Per-trial maxima in trial order, the histogram source.
    pub trial_maxima: Vec<Real>,
}

/// Pass frequencies of the three per-sample checks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EventReport {
    pub trials: u64,
    /// Every parent received at least half the target count.
    pub min_count_passes: u64,
    /// Every parent's grid-cell cluster statistic stayed within budget.
    pub grid_passes: u64,
    /// The grid and collinear-cluster prunes finished within the shared
    /// removal budget.
    pub tube_budget_passes: u64,
}

impl EventReport {
    pub fn min_count_frequency(&self) -> Real {
        self.min_count_passes as Real / self.trials as Real
    }

    pub fn grid_frequency(&self) -> Real {
        self.grid_passes as Real / self.trials as Real
    }

    pub fn tube_budget_frequency(&self) -> Real {
        self.tube_budget_passes as Real / self.trials as Real
    }
}

fn trial_rng(seed: u64, trial: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(trial + 1);
    rng
}

fn check_trials(parents: &ParentFamily, params: &ConstructionParams, trials: u64)
    -> Result<(), AnalysisError>
{
    if trials < MIN_TRIALS {
        return Err(AnalysisError::TooFewTrials {
            min: MIN_TRIALS,
            got: trials,
        });
    }
    parents
        .validate(params.s, params.k)
        .map_err(|e| AnalysisError::BadParameter {
            what: format!("parent family: {e}"),
        })
}

/// Estimates how often the maximum per-parent cluster statistic reaches
/// 1/10 over `trials` independent samples.
pub fn montecarlo_mainclaim(
    parents: &ParentFamily,
    params: &ConstructionParams,
    trials: u64,
) -> Result<MainClaimReport, AnalysisError> {
    check_trials(parents, params, trials)?;
    let trial_maxima: Vec<Real> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(params.seed, trial);
            let cloud = sample_points(parents, params, &mut rng);
            (0..parents.cubes.len())
                .map(|which| compute_xr(&cloud, parents, which, params))
                .fold(0.0, Real::max)
        })
        .collect();
    let exceedances = trial_maxima.iter().filter(|&&x| x >= 0.1).count() as u64;
    Ok(MainClaimReport {
        trials,
        exceedances,
        frequency: exceedances as Real / trials as Real,
        trial_maxima,
    })
}

/// Estimates the pass frequency of each per-sample check over `trials`
/// independent samples.
pub fn montecarlo_events(
    parents: &ParentFamily,
    params: &ConstructionParams,
    trials: u64,
) -> Result<EventReport, AnalysisError> {
    check_trials(parents, params, trials)?;
    let outcomes: Vec<(bool, bool, bool)> = (0..trials)
        .into_par_iter()
        .map(|trial| {
            let mut rng = trial_rng(params.seed, trial);
            let cloud = sample_points(parents, params, &mut rng);
            let min_count = check_event_min_count(&cloud, parents, params);
            let grid = check_event_grid(&cloud, parents, params);
            let (pruned, _) = prune_grid_clusters(cloud, parents, params);
            let budget = prune_tube_clusters(pruned, parents, params).is_ok();
            (min_count, grid, budget)
        })
        .collect();
    let mut report = EventReport {
        trials,
        min_count_passes: 0,
        grid_passes: 0,
        tube_budget_passes: 0,
    };
    for (min_count, grid, budget) in outcomes {
        report.min_count_passes += min_count as u64;
        report.grid_passes += grid as u64;
        report.tube_budget_passes += budget as u64;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{Cube, Point};

    fn unit_params(m: u64, a: u32) -> ConstructionParams {
        ConstructionParams::new(2, 0.5, 1.0, 5, a, m, 7, 50, 0.125).unwrap()
    }

    fn two_parents() -> ParentFamily {
        ParentFamily {
            cubes: vec![
                Cube::new(Point::new(vec![0.2, 0.5]), 0.25),
                Cube::new(Point::new(vec![0.7, 0.5]), 0.25),
            ],
            delta: 0.25,
        }
    }

    #[test]
    fn too_few_trials_are_rejected() {
        let p = unit_params(10_000, 4);
        let parents = ParentFamily::unit(2);
        let err = montecarlo_mainclaim(&parents, &p, 99).unwrap_err();
        assert_eq!(err, AnalysisError::TooFewTrials { min: 100, got: 99 });
        let err = montecarlo_events(&parents, &p, 0).unwrap_err();
        assert_eq!(err, AnalysisError::TooFewTrials { min: 100, got: 0 });
    }

    #[test]
    fn oversized_subset_threshold_gives_frequency_zero() {
        // a = 1000 exceeds the 100-point sample, so every statistic is 0.
        let p = unit_params(10_000, 1000);
        let parents = ParentFamily::unit(2);
        let report = montecarlo_mainclaim(&parents, &p, 100).unwrap();
        assert_eq!(report.exceedances, 0);
        assert_eq!(report.frequency, 0.0);
        assert!(report.trial_maxima.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn reports_are_deterministic_and_in_range() {
        let p = unit_params(40_000, 4);
        let parents = ParentFamily::unit(2);
        let a = montecarlo_mainclaim(&parents, &p, 120).unwrap();
        let b = montecarlo_mainclaim(&parents, &p, 120).unwrap();
        assert_eq!(a, b);
        assert!(a.frequency >= 0.0 && a.frequency <= 1.0);
        assert_eq!(a.trial_maxima.len(), 120);
        let e = montecarlo_events(&parents, &p, 120).unwrap();
        let f = montecarlo_events(&parents, &p, 120).unwrap();
        assert_eq!(e, f);
        for freq in [
            e.min_count_frequency(),
            e.grid_frequency(),
            e.tube_budget_frequency(),
        ] {
            assert!((0.0..=1.0).contains(&freq));
        }
    }

    #[test]
    fn exceedance_frequency_is_non_increasing_in_subset_size() {
        // Same seed, so all four runs see identical samples; only the
        // subset size in the statistic changes.
        let freqs: Vec<Real> = [2u32, 3, 4, 6]
            .iter()
            .map(|&a| {
                let p = unit_params(250_000, a);
                montecarlo_mainclaim(&ParentFamily::unit(2), &p, 100)
                    .unwrap()
                    .frequency
            })
            .collect();
        for w in freqs.windows(2) {
            assert!(w[0] >= w[1], "frequencies not monotone: {freqs:?}");
        }
        // Pairs are abundant and 6-subsets vanishingly rare.
        assert_eq!(freqs[0], 1.0);
        assert_eq!(freqs[3], 0.0);
    }

    #[test]
    fn min_count_frequency_grows_with_density() {
        // Two parents splitting the sample binomially: the half-target
        // event sharpens as the sample grows.
        let parents = two_parents();
        let freqs: Vec<Real> = [16u64, 64, 256]
            .iter()
            .map(|&m| {
                let p = ConstructionParams::new(2, 0.5, 0.25, 5, 4, m, 7, 50, 0.125).unwrap();
                montecarlo_events(&parents, &p, 200)
                    .unwrap()
                    .min_count_frequency()
            })
            .collect();
        assert!(freqs[0] <= freqs[1] && freqs[1] <= freqs[2], "{freqs:?}");
        assert!(freqs[2] >= 0.9);
    }

    #[test]
    fn invalid_family_is_rejected() {
        let p = unit_params(10_000, 4);
        let bad = ParentFamily {
            cubes: vec![Cube::unit(2), Cube::unit(2)],
            delta: 1.0,
        };
        assert!(matches!(
            montecarlo_events(&bad, &p, 100),
            Err(AnalysisError::BadParameter { .. })
        ));
    }
}
