//! Finite families of tubes that witness every thin tube at once.
//!
//! For a width parameter `tau`, the family holds tubes of width `2 tau`
//! whose directions form a net on the sphere and whose offsets form a grid
//! in each direction's orthogonal complement, both fine enough that any
//! tube of width at most `tau` meeting `[0,1]^d` has its clipped part
//! contained in some family member. Checking a per-tube bound on the family
//! (at doubled width) therefore certifies it for all tubes.

use super::{canonical_sign, vec_dot, GeometryError, Point, Tube};
use crate::scalar::Scalar;
use std::collections::HashSet;

/// Hard cap on family size; construction refuses rather than exhausting
/// memory when `tau` is too small for an explicit family.
pub(crate) const MAX_FAMILY_TUBES: u128 = 8_000_000;

/// A concrete direction/offset net of tubes of width `2 * tau`.
pub struct RepresentativeFamily<F> {
    pub tau: F,
    pub direction_step: F,
    pub offset_step: F,
    pub tubes: Vec<Tube<F>>,
    entries: Vec<DirectionEntry<F>>,
    reach: i64,
    dim: usize,
}

struct DirectionEntry<F> {
    direction: Vec<F>,
    basis: Vec<Vec<F>>,
    first_tube: usize,
}

impl<F: Scalar> RepresentativeFamily<F> {
    pub fn len(&self) -> usize {
        self.tubes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tubes.is_empty()
    }

    pub fn num_directions(&self) -> usize {
        self.entries.len()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Index of a family tube that contains `t`'s intersection with
    /// `[0,1]^d`, provided `t.width <= tau`. Returns `Ok(None)` when `t` is
    /// too wide for the covering guarantee.
    pub fn find_covering_representative(
        &self,
        t: &Tube<F>,
    ) -> Result<Option<usize>, GeometryError> {
        if t.dim() != self.dim {
            return Err(GeometryError::DimensionMismatch {
                left: t.dim(),
                right: self.dim,
            });
        }
        let norm = super::vec_norm(&t.direction).to_f64_lossy();
        if (norm - 1.0).abs() > super::UNIT_TOL {
            return Err(GeometryError::NonUnitDirection { norm });
        }
        if t.width.to_f64_lossy() > self.tau.to_f64_lossy() * (1.0 + 1e-9) {
            return Ok(None);
        }

        // Nearest net direction, as lines (sign-insensitive).
        let mut best = 0usize;
        let mut best_dot = -1.0f64;
        for (i, e) in self.entries.iter().enumerate() {
            let dot = vec_dot(&t.direction, &e.direction).to_f64_lossy().abs();
            if dot > best_dot {
                best_dot = dot;
                best = i;
            }
        }
        let entry = &self.entries[best];

        // Closest point of the query line to the unit-cube centre, expressed
        // in the chosen direction's offset basis, then rounded to the grid.
        let half = F::from_f64_lossy(0.5);
        let o: Vec<F> = vec![half; self.dim];
        let w: Vec<F> = o
            .iter()
            .zip(&t.anchor.coords)
            .map(|(c, a)| *c - *a)
            .collect();
        let along = vec_dot(&w, &t.direction);
        let z_minus_o: Vec<F> = (0..self.dim)
            .map(|i| t.anchor.coords[i] + along * t.direction[i] - o[i])
            .collect();

        let step = self.offset_step.to_f64_lossy();
        let per_axis = (2 * self.reach + 1) as usize;
        let mut idx = entry.first_tube;
        let mut stride = per_axis.pow((self.dim - 2) as u32);
        for basis_vec in &entry.basis {
            let coeff = vec_dot(&z_minus_o, basis_vec).to_f64_lossy();
            let n = (coeff / step).round() as i64;
            let n = n.clamp(-self.reach, self.reach);
            idx += ((n + self.reach) as usize) * stride;
            stride = if stride >= per_axis { stride / per_axis } else { 1 };
        }
        Ok(Some(idx))
    }
}

/// Tube count of the family at width parameter `tau` in dimension `d`,
/// before line deduplication, by the same arithmetic the builder uses.
/// Cheap, so callers can refuse an oversized audit without building it.
pub fn representative_family_size<F: Scalar>(tau: F, d: usize) -> Result<u128, GeometryError> {
    if d < 2 {
        return Err(GeometryError::BadDimension { d });
    }
    let tau_f = tau.to_f64_lossy();
    if !(tau_f > 0.0 && tau_f <= 1.0) {
        return Err(GeometryError::BadWidthParameter { tau: tau_f });
    }
    let sqrt_d = (d as f64).sqrt();
    let sqrt_dm1 = ((d - 1) as f64).sqrt();
    let dir_step = tau_f / ((sqrt_d + tau_f) * sqrt_dm1);
    let off_step = tau_f / (2.0 * sqrt_dm1);
    let segments = (2.0 / dir_step).ceil() as usize;
    let reach = (sqrt_d / off_step).ceil() as i64;
    let per_axis = (2 * reach + 1) as u128;
    let raw_dirs = (d as u128) * ((segments as u128) + 1).pow((d - 1) as u32);
    Ok(raw_dirs.saturating_mul(per_axis.pow((d - 1) as u32)))
}

/// Builds the net for width parameter `tau` in dimension `d`.
///
/// Directions come from a grid on the `d` cube faces `{w_j = 1}` with step
/// `tau / ((sqrt(d) + tau) * sqrt(d-1))`, so the angular gap to any line is
/// small enough to cost at most `tau/4` of slack across the cube. Offsets
/// use step `tau / (2 sqrt(d-1))` per orthogonal axis out to radius
/// `sqrt(d)`, costing at most another `tau/4`. Together with the query
/// tube's own half-width `tau/2`, everything fits inside width `2 tau`.
pub fn representative_tubes<F: Scalar>(
    tau: F,
    d: usize,
) -> Result<RepresentativeFamily<F>, GeometryError> {
    let total = representative_family_size(tau, d)?;
    if total > MAX_FAMILY_TUBES {
        return Err(GeometryError::FamilyTooLarge {
            tau: tau.to_f64_lossy(),
            count: total,
        });
    }
    let tau_f = tau.to_f64_lossy();
    let sqrt_d = (d as f64).sqrt();
    let sqrt_dm1 = ((d - 1) as f64).sqrt();
    let dir_step = tau_f / ((sqrt_d + tau_f) * sqrt_dm1);
    let off_step = tau_f / (2.0 * sqrt_dm1);
    let segments = (2.0 / dir_step).ceil() as usize;
    let reach = (sqrt_d / off_step).ceil() as i64;

    // Face grids, deduplicated as lines via a canonical sign and exact bits.
    let mut seen: HashSet<Vec<u64>> = HashSet::new();
    let mut directions: Vec<Vec<f64>> = Vec::new();
    let mut grid_idx = vec![0usize; d - 1];
    for face in 0..d {
        grid_idx.iter_mut().for_each(|v| *v = 0);
        loop {
            let mut w = vec![0.0f64; d];
            w[face] = 1.0;
            let mut slot = 0;
            for axis in 0..d {
                if axis == face {
                    continue;
                }
                // (2i - n) / n is exactly symmetric and hits the endpoints.
                w[axis] =
                    (2.0 * grid_idx[slot] as f64 - segments as f64) / segments as f64;
                slot += 1;
            }
            let norm = w.iter().map(|x| x * x).sum::<f64>().sqrt();
            let mut u: Vec<f64> = w.iter().map(|x| x / norm).collect();
            canonical_sign(&mut u);
            if seen.insert(u.iter().map(|x| x.to_bits()).collect()) {
                directions.push(u);
            }
            if !advance_counter(&mut grid_idx, segments + 1) {
                break;
            }
        }
    }

    let width = tau * F::from_f64_lossy(2.0);
    let half = 0.5f64;
    let mut tubes: Vec<Tube<F>> = Vec::new();
    let mut entries: Vec<DirectionEntry<F>> = Vec::with_capacity(directions.len());
    let per_axis = (2 * reach + 1) as usize;
    for u in directions {
        let basis = orthogonal_basis(&u);
        let first_tube = tubes.len();
        let mut counters = vec![0usize; d - 1];
        loop {
            let mut anchor = vec![half; d];
            for (slot, b) in basis.iter().enumerate() {
                let n = counters[slot] as i64 - reach;
                let shift = (n as f64) * off_step;
                for i in 0..d {
                    anchor[i] += shift * b[i];
                }
            }
            tubes.push(Tube {
                anchor: Point::new(anchor.iter().map(|&x| F::from_f64_lossy(x)).collect()),
                direction: u.iter().map(|&x| F::from_f64_lossy(x)).collect(),
                width,
            });
            if !advance_counter(&mut counters, per_axis) {
                break;
            }
        }
        entries.push(DirectionEntry {
            direction: u.iter().map(|&x| F::from_f64_lossy(x)).collect(),
            basis: basis
                .iter()
                .map(|b| b.iter().map(|&x| F::from_f64_lossy(x)).collect())
                .collect(),
            first_tube,
        });
    }

    Ok(RepresentativeFamily {
        tau,
        direction_step: F::from_f64_lossy(dir_step),
        offset_step: F::from_f64_lossy(off_step),
        tubes,
        entries,
        reach,
        dim: d,
    })
}

/// Steps a mixed-radix counter (last slot fastest); `false` once every
/// combination has been visited and the counter wrapped back to zero.
fn advance_counter(counters: &mut [usize], base: usize) -> bool {
    for slot in (0..counters.len()).rev() {
        counters[slot] += 1;
        if counters[slot] < base {
            return true;
        }
        counters[slot] = 0;
    }
    false
}

/// Orthonormal basis of the complement of `u`, by Gram-Schmidt on the
/// standard vectors other than `u`'s dominant axis.
fn orthogonal_basis(u: &[f64]) -> Vec<Vec<f64>> {
    let d = u.len();
    let mut dominant = 0;
    for i in 1..d {
        if u[i].abs() > u[dominant].abs() {
            dominant = i;
        }
    }
    let mut basis: Vec<Vec<f64>> = Vec::with_capacity(d - 1);
    for i in 0..d {
        if i == dominant {
            continue;
        }
        let mut v = vec![0.0f64; d];
        v[i] = 1.0;
        let along: f64 = v.iter().zip(u).map(|(a, b)| a * b).sum();
        for (vk, uk) in v.iter_mut().zip(u) {
            *vk -= along * uk;
        }
        for b in &basis {
            let c: f64 = v.iter().zip(b).map(|(a, x)| a * x).sum();
            for (vk, bk) in v.iter_mut().zip(b) {
                *vk -= c * bk;
            }
        }
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        for vk in v.iter_mut() {
            *vk /= norm;
        }
        basis.push(v);
    }
    basis
}
