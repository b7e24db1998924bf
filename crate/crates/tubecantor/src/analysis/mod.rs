//! Probabilistic bookkeeping: parameter selectors, cluster-expectation
//! bounds, and Monte Carlo estimation of the sampling events that the
//! construction conditions on.

mod bounds;
pub mod montecarlo;

pub use bounds::{
    choose_m, expected_cluster_bound, select_k, total_cluster_bound, tube_point_probability,
    BoundInputs, ClusterTotals,
};
pub use montecarlo::{montecarlo_events, montecarlo_mainclaim, EventReport, MainClaimReport};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum AnalysisError {
    #[error("need 0 < s < d-1 (got d={d}, s={s})")]
    InvalidExponent { d: usize, s: f64 },
    #[error("parameter out of range: {what}")]
    BadParameter { what: String },
    #[error("beta must satisfy 1 <= beta <= m (got {beta})")]
    BadBeta { beta: f64 },
    #[error("cluster exponent {exponent} is not positive: occupancy cap k is too small")]
    KTooSmall { exponent: f64 },
    #[error("geometric ratio {ratio} is not below 1: density m is too small")]
    MTooSmall { ratio: f64 },
    #[error("no density m below {limit} meets the cluster-sum target")]
    NoFeasibleM { limit: u64 },
    #[error("need at least {min} trials (got {got})")]
    TooFewTrials { min: u64, got: u64 },
}
