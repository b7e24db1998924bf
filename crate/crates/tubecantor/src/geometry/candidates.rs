//! Worst-case tube candidates through pairs of centres.
//!
//! Among tubes of a fixed width, the ones that maximise how many of a finite
//! point set they contain can be searched over lines through two of the
//! points (any optimal tube can be translated and rotated until its line
//! pins two points without losing members), so pair tubes are the canonical
//! candidate list.

use super::{canonical_sign, vec_dot, Point, Tube};
use crate::scalar::Scalar;
use std::collections::HashSet;

/// One tube per distinct line through two of `centers`, at the given width.
///
/// Lines are deduplicated by a canonical direction sign and by the line's
/// closest point to the origin, both quantised at `1e-9`. Order follows the
/// first pair `(i, j)`, `i < j`, that produced each line.
pub fn candidate_worst_tubes<F: Scalar>(centers: &[Point<F>], width: F) -> Vec<Tube<F>> {
    let mut out = Vec::new();
    let mut seen: HashSet<Vec<i64>> = HashSet::new();
    for i in 0..centers.len() {
        for j in (i + 1)..centers.len() {
            let Some(mut tube) = Tube::through_points(&centers[i], &centers[j], width) else {
                continue;
            };
            canonical_sign(&mut tube.direction);
            let along = vec_dot(&tube.anchor.coords, &tube.direction);
            let foot: Vec<f64> = tube
                .anchor
                .coords
                .iter()
                .zip(&tube.direction)
                .map(|(a, u)| (*a - along * *u).to_f64_lossy())
                .collect();
            let mut key: Vec<i64> = tube
                .direction
                .iter()
                .map(|u| quantise(u.to_f64_lossy()))
                .collect();
            key.extend(foot.iter().map(|x| quantise(*x)));
            if seen.insert(key) {
                out.push(tube);
            }
        }
    }
    out
}

fn quantise(x: f64) -> i64 {
    (x / 1e-9).round() as i64
}
