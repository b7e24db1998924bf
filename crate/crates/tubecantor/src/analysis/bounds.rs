//! Closed-form bounds on tube-cluster counts and the parameter selectors
//! built on them.

use super::AnalysisError;
use crate::scalar::Scalar;

/// Parameters entering the cluster bounds, with the derived per-point
/// base `cluster_base = e * c_abs * delta^(s - d + 1)`.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInputs<F> {
    pub d: usize,
    pub s: F,
    pub k: u32,
    pub delta: F,
    pub m: u64,
    pub c_abs: F,
    pub cluster_base: F,
}

impl<F: Scalar> BoundInputs<F> {
    pub fn new(
        d: usize,
        s: F,
        k: u32,
        delta: F,
        m: u64,
        c_abs: F,
    ) -> Result<Self, AnalysisError> {
        let sf = s.to_f64_lossy();
        if d < 2 || sf <= 0.0 || sf >= (d - 1) as f64 {
            return Err(AnalysisError::InvalidExponent { d, s: sf });
        }
        if k == 0 {
            return Err(AnalysisError::BadParameter {
                what: "k must be positive".into(),
            });
        }
        let df = delta.to_f64_lossy();
        if !(df > 0.0 && df <= 1.0) {
            return Err(AnalysisError::BadParameter {
                what: format!("delta must lie in (0,1], got {df}"),
            });
        }
        if m == 0 {
            return Err(AnalysisError::BadParameter {
                what: "m must be positive".into(),
            });
        }
        if c_abs.to_f64_lossy() <= 0.0 {
            return Err(AnalysisError::BadParameter {
                what: "c_abs must be positive".into(),
            });
        }
        let exponent = s - F::from_usize(d - 1).unwrap();
        let cluster_base = F::from_f64_lossy(std::f64::consts::E) * c_abs * delta.powf(exponent);
        Ok(BoundInputs {
            d,
            s,
            k,
            delta,
            m,
            c_abs,
            cluster_base,
        })
    }

    fn d_f(&self) -> F {
        F::from_usize(self.d).unwrap()
    }

    fn m_f(&self) -> F {
        F::from_u64(self.m).unwrap()
    }

    fn k_f(&self) -> F {
        F::from_u32(self.k).unwrap()
    }
}

/// Smallest occupancy cap `k` making both cluster exponents favourable:
/// `k(d-1-s) > 2(d-1)` and `k(d-1-s) > d-2`, strictly.
pub fn select_k<F: Scalar>(d: usize, s: F) -> Result<u32, AnalysisError> {
    let sf = s.to_f64_lossy();
    if d < 2 || sf <= 0.0 || sf >= (d - 1) as f64 {
        return Err(AnalysisError::InvalidExponent { d, s: sf });
    }
    let gap = (d - 1) as f64 - sf;
    let mut k = 1u32;
    loop {
        let lhs = k as f64 * gap;
        if lhs > 2.0 * (d - 1) as f64 && lhs > (d - 2) as f64 {
            return Ok(k);
        }
        k = k.checked_add(1).ok_or(AnalysisError::BadParameter {
            what: "no 32-bit k satisfies the exponent inequalities".into(),
        })?;
    }
}

/// Probability bound for one uniform point of a parent cell landing in a
/// dilated tube of width parameter `beta`:
/// `min(1, c_abs * k * delta^(s-d+1) * (beta/m)^(d-1))`.
pub fn tube_point_probability<F: Scalar>(
    inputs: &BoundInputs<F>,
    beta: F,
) -> Result<F, AnalysisError> {
    let bf = beta.to_f64_lossy();
    if bf < 1.0 || bf > inputs.m as f64 {
        return Err(AnalysisError::BadBeta { beta: bf });
    }
    let exponent = inputs.s - F::from_usize(inputs.d - 1).unwrap();
    let raw = inputs.c_abs
        * inputs.k_f()
        * inputs.delta.powf(exponent)
        * (beta / inputs.m_f()).powf(inputs.d_f() - F::one());
    Ok(raw.min(F::one()))
}

/// Expected number of `q`-point clusters inside some dilated tube of width
/// parameter `beta`, with `q = k * beta^s`:
/// `cluster_base^q * (beta/m)^(q(d-1-s) - 2(d-1))`.
pub fn expected_cluster_bound<F: Scalar>(
    inputs: &BoundInputs<F>,
    beta: F,
) -> Result<F, AnalysisError> {
    let bf = beta.to_f64_lossy();
    if bf < 1.0 {
        return Err(AnalysisError::BadBeta { beta: bf });
    }
    let one = F::one();
    let q = inputs.k_f() * beta.powf(inputs.s);
    let gap = inputs.d_f() - one - inputs.s;
    let exponent = q * gap - (inputs.d_f() - one) * F::from_f64_lossy(2.0);
    if exponent.to_f64_lossy() <= 0.0 && bf < inputs.m as f64 {
        return Err(AnalysisError::KTooSmall {
            exponent: exponent.to_f64_lossy(),
        });
    }
    // Evaluated in log space: the two factors can individually overflow and
    // underflow long before their product leaves the representable range.
    let log_value = q * inputs.cluster_base.ln() + exponent * (beta / inputs.m_f()).ln();
    Ok(log_value.exp())
}

/// The cluster expectation summed over the dyadic widths in play.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterTotals<F> {
    /// Direct sum of `expected_cluster_bound` over admissible `beta = 2^j`.
    pub direct: F,
    /// The geometric-series overestimate
    /// `rho / (1 - rho) * m^(2s(d-1)/d)` with
    /// `rho = cluster_base^k * m^(-s k (d-1-s)/d)`.
    pub closed_form: F,
    pub terms: u32,
}

/// Sums the cluster bound over `beta = 2^j` with
/// `beta <= delta^((d-s)/d) * m^(1 - s/d)`, and evaluates the closed-form
/// overestimate for comparison.
pub fn total_cluster_bound<F: Scalar>(
    inputs: &BoundInputs<F>,
) -> Result<ClusterTotals<F>, AnalysisError> {
    let one = F::one();
    let two = F::from_f64_lossy(2.0);
    let d_f = inputs.d_f();
    let m_f = inputs.m_f();
    let gap = d_f - one - inputs.s;

    let rho = inputs.cluster_base.powf(inputs.k_f())
        * m_f.powf(-(inputs.s * inputs.k_f() * gap) / d_f);
    if rho.to_f64_lossy() >= 1.0 {
        return Err(AnalysisError::MTooSmall {
            ratio: rho.to_f64_lossy(),
        });
    }
    let closed_form = rho / (one - rho) * m_f.powf(two * inputs.s * (d_f - one) / d_f);

    let limit = inputs.delta.powf((d_f - inputs.s) / d_f) * m_f.powf(one - inputs.s / d_f);
    let limit_slack = limit.to_f64_lossy() * (1.0 + crate::INT_TOL);
    let mut direct = F::zero();
    let mut terms = 0u32;
    let mut beta = 1.0f64;
    while beta <= limit_slack {
        direct = direct + expected_cluster_bound(inputs, F::from_f64_lossy(beta))?;
        terms += 1;
        beta *= 2.0;
    }
    Ok(ClusterTotals {
        direct,
        closed_form,
        terms,
    })
}

const CHOOSE_M_LIMIT: u64 = 1 << 40;

/// Smallest `m >= floor_m` whose direct cluster sum drops below
/// `(delta*m)^s / 100`, found by doubling then bisection.
pub fn choose_m<F: Scalar>(
    d: usize,
    s: F,
    k: u32,
    delta: F,
    c_abs: F,
    floor_m: u64,
) -> Result<u64, AnalysisError> {
    let floor_m = floor_m.max(1);
    let satisfies = |m: u64| -> Result<bool, AnalysisError> {
        let inputs = BoundInputs::new(d, s, k, delta, m, c_abs)?;
        let target =
            (inputs.delta * inputs.m_f()).powf(inputs.s) / F::from_f64_lossy(100.0);
        match total_cluster_bound(&inputs) {
            Ok(totals) => Ok(totals.direct < target),
            Err(AnalysisError::MTooSmall { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };

    let mut hi = floor_m;
    let mut lo = 0u64;
    while !satisfies(hi)? {
        if hi >= CHOOSE_M_LIMIT {
            return Err(AnalysisError::NoFeasibleM {
                limit: CHOOSE_M_LIMIT,
            });
        }
        lo = hi; // latest density known to fail
        hi = hi.saturating_mul(2).min(CHOOSE_M_LIMIT);
    }
    if hi == floor_m {
        return Ok(hi);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if mid < floor_m || !satisfies(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(hi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    fn reference_inputs(m: u64) -> BoundInputs<f64> {
        BoundInputs::new(2, 0.5, 5, 1.0, m, 1.0).unwrap()
    }

    #[test]
    fn k_selection_known_values() {
        assert_eq!(select_k(2, 0.5f64).unwrap(), 5);
        assert_eq!(select_k(3, 1.0f64).unwrap(), 5);
        assert!(matches!(
            select_k(2, 1.0f64),
            Err(AnalysisError::InvalidExponent { .. })
        ));
        assert!(matches!(
            select_k(2, 1.5f64),
            Err(AnalysisError::InvalidExponent { .. })
        ));
    }

    #[test]
    fn k_selection_is_minimal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..50 {
            let d = rng.gen_range(2..=6usize);
            let s: f64 = rng.gen_range(0.05..(d as f64 - 1.0 - 0.05));
            let k = select_k(d, s).unwrap();
            let holds = |k: f64| {
                k * ((d - 1) as f64 - s) > 2.0 * (d - 1) as f64
                    && k * ((d - 1) as f64 - s) > (d - 2) as f64
            };
            assert!(holds(k as f64), "selected k fails at d={d}, s={s}");
            assert!(
                k == 1 || !holds((k - 1) as f64),
                "k-1 also satisfies both inequalities at d={d}, s={s}"
            );
        }
    }

    #[test]
    fn point_probability_formula_and_clamp() {
        let inputs = reference_inputs(100);
        // k * (beta/m)^(d-1) with everything else 1.
        let p = tube_point_probability(&inputs, 1.0).unwrap();
        assert!((p - 0.05).abs() < 1e-15);
        // Halving beta scales by 2^-(d-1).
        let p2 = tube_point_probability(&inputs, 2.0).unwrap();
        assert!((p2 / p - 2.0).abs() < 1e-12);
        // At beta = m the raw value is k >= 1, clamped.
        assert_eq!(tube_point_probability(&inputs, 100.0).unwrap(), 1.0);
        assert!(matches!(
            tube_point_probability(&inputs, 0.5),
            Err(AnalysisError::BadBeta { .. })
        ));
    }

    #[test]
    fn cluster_bound_reference_value() {
        let inputs = reference_inputs(100);
        // base^5 * (1/100)^(5*0.5*0.5 - 2) = e^5 / 10.
        let v = expected_cluster_bound(&inputs, 1.0).unwrap();
        assert!((v - 5.0f64.exp() / 10.0).abs() < 1e-10);
    }

    #[test]
    fn cluster_bound_power_law_in_m() {
        let a = expected_cluster_bound(&reference_inputs(100), 1.0).unwrap();
        let b = expected_cluster_bound(&reference_inputs(200), 1.0).unwrap();
        // Exponent at beta=1 is k(d-1-s) - 2(d-1) = 0.5.
        assert!((b / a - 2f64.powf(-0.5)).abs() < 1e-12);
        assert!(b < a);
    }

    #[test]
    fn cluster_bound_flags_small_k() {
        let inputs = BoundInputs::new(2, 0.5, 3, 1.0, 100, 1.0).unwrap();
        // 3 * 0.5 - 2 = -0.5.
        assert!(matches!(
            expected_cluster_bound(&inputs, 1.0),
            Err(AnalysisError::KTooSmall { .. })
        ));
    }

    #[test]
    fn totals_direct_below_closed_form() {
        for m in [5_000u64, 20_000, 100_000, 1_000_000] {
            let totals = total_cluster_bound(&reference_inputs(m)).unwrap();
            assert!(
                totals.direct <= totals.closed_form,
                "direct {} above closed form {} at m={m}",
                totals.direct,
                totals.closed_form
            );
            assert!(totals.terms >= 1);
        }
        let inputs = BoundInputs::new(3, 1.2, 8, 0.25, 50_000, 1.0).unwrap();
        let totals = total_cluster_bound(&inputs).unwrap();
        assert!(totals.direct <= totals.closed_form);
    }

    #[test]
    fn totals_flag_small_m() {
        assert!(matches!(
            total_cluster_bound(&reference_inputs(100)),
            Err(AnalysisError::MTooSmall { .. })
        ));
    }

    #[test]
    fn totals_single_term_range() {
        // Range limit m^(1 - s/d) < 2 leaves only beta = 1.
        let inputs = BoundInputs::new(3, 1.9, 41, 1.0, 6, 0.001).unwrap();
        let totals = total_cluster_bound(&inputs).unwrap();
        assert_eq!(totals.terms, 1);
        let single = expected_cluster_bound(&inputs, 1.0).unwrap();
        assert_eq!(totals.direct, single);
    }

    #[test]
    fn totals_meet_target_for_large_m() {
        let inputs = reference_inputs(20_000);
        let totals = total_cluster_bound(&inputs).unwrap();
        assert!(totals.direct < (20_000f64).powf(0.5) / 100.0);
    }

    #[test]
    fn chosen_m_is_minimal_and_scan_checked() {
        let m = choose_m(2, 0.5f64, 5, 1.0, 1.0, 2).unwrap();
        let ok = |m: u64| {
            let inputs = reference_inputs(m);
            match total_cluster_bound(&inputs) {
                Ok(t) => t.direct < (m as f64).powf(0.5) / 100.0,
                Err(_) => false,
            }
        };
        assert!(ok(m));
        assert!(!ok(m - 1));
        assert!(!ok(m / 2));

        // Independent linear scan from below, coarse-to-fine.
        let mut scan = 2u64;
        while !ok(scan) {
            scan += 1;
        }
        assert_eq!(m, scan);
    }

    #[test]
    fn chosen_m_monotone_in_c_abs() {
        let m1 = choose_m(2, 0.5f64, 5, 1.0, 1.0, 2).unwrap();
        let m2 = choose_m(2, 0.5f64, 5, 1.0, 2.0, 2).unwrap();
        assert!(m2 >= m1);
    }

    // Independent oracle: the cluster bound must dominate the empirical mean
    // number of q-subsets lying in a thin slab, measured by exact convex
    // width over all pair directions (d = 2, so slabs and tubes coincide).
    #[test]
    fn cluster_bound_dominates_subset_simulation() {
        let m = 50u64;
        let inputs = reference_inputs(m);
        let beta = 1.0f64;
        let q = (inputs.k as f64 * beta.powf(inputs.s)).ceil() as usize; // 5
        let n = (m as f64).powf(inputs.s).ceil() as usize; // 8 points
        let slab_width = 2.0 * beta / m as f64;

        let mut rng = ChaCha8Rng::seed_from_u64(23);
        let trials = 500;
        let mut total_hits = 0u64;
        for _ in 0..trials {
            let pts: Vec<[f64; 2]> =
                (0..n).map(|_| [rng.gen::<f64>(), rng.gen::<f64>()]).collect();
            // Enumerate q-subsets of n points.
            let mut subset: Vec<usize> = (0..q).collect();
            loop {
                if hull_width(&subset.iter().map(|&i| pts[i]).collect::<Vec<_>>())
                    <= slab_width
                {
                    total_hits += 1;
                }
                // Next combination in lexicographic order.
                let mut advanced = false;
                for i in (0..q).rev() {
                    if subset[i] != i + n - q {
                        subset[i] += 1;
                        for j in (i + 1)..q {
                            subset[j] = subset[j - 1] + 1;
                        }
                        advanced = true;
                        break;
                    }
                }
                if !advanced {
                    break;
                }
            }
        }
        let empirical_mean = total_hits as f64 / trials as f64;
        let bound = expected_cluster_bound(&inputs, beta).unwrap();
        assert!(
            empirical_mean <= bound,
            "empirical mean {empirical_mean} exceeds bound {bound}"
        );
    }

    /// Minimal width of a point set over all directions: the narrowest slab
    /// containing it, computed from directions normal to point pairs.
    fn hull_width(pts: &[[f64; 2]]) -> f64 {
        let mut best = f64::INFINITY;
        for i in 0..pts.len() {
            for j in (i + 1)..pts.len() {
                let dx = pts[j][0] - pts[i][0];
                let dy = pts[j][1] - pts[i][1];
                let norm = (dx * dx + dy * dy).sqrt();
                if norm < 1e-12 {
                    continue;
                }
                let (nx, ny) = (-dy / norm, dx / norm);
                let mut lo = f64::INFINITY;
                let mut hi = f64::NEG_INFINITY;
                for p in pts {
                    let v = p[0] * nx + p[1] * ny;
                    lo = lo.min(v);
                    hi = hi.max(v);
                }
                best = best.min(hi - lo);
            }
        }
        if best.is_finite() {
            best
        } else {
            0.0
        }
    }
}
