//! Uniform bucket grid over the unit cube for near-line and near-point
//! candidate queries. The line query walks slabs along the line's major
//! axis with a conservative pad, so it never misses a point within the
//! requested distance; callers confirm candidates with exact distances.

use crate::geometry::Point;
use crate::Real;

#[derive(Debug, Clone)]
pub(crate) struct PointGrid {
    d: usize,
    per_axis: usize,
    cell_side: Real,
    cells: Vec<Vec<u32>>,
}

impl PointGrid {
    /// Buckets the flagged points. `per_axis` cells per axis over `[0,1]^d`.
    pub fn build(points: &[Point<Real>], alive: &[bool], per_axis: usize) -> Self {
        let d = points.first().map_or(2, |p| p.dim());
        let mut grid = PointGrid {
            d,
            per_axis,
            cell_side: 1.0 / per_axis as Real,
            cells: vec![Vec::new(); per_axis.pow(d as u32)],
        };
        for (i, p) in points.iter().enumerate() {
            if alive[i] {
                let cell = grid.cell_of(p);
                grid.cells[cell].push(i as u32);
            }
        }
        grid
    }

    /// Suggested resolution for `n` points in dimension `d`, sized so cells
    /// hold a handful of points each.
    pub fn resolution_for(n: usize, d: usize) -> usize {
        let per_axis = 2.0 * (n.max(1) as Real).powf(1.0 / d as Real);
        (per_axis.ceil() as usize).clamp(4, 256)
    }

    fn axis_cell(&self, coord: Real) -> usize {
        ((coord / self.cell_side).floor() as isize).clamp(0, self.per_axis as isize - 1) as usize
    }

    fn cell_of(&self, p: &Point<Real>) -> usize {
        let mut idx = 0;
        for axis in 0..self.d {
            idx = idx * self.per_axis + self.axis_cell(p.coords[axis]);
        }
        idx
    }

    pub fn remove(&mut self, index: u32, p: &Point<Real>) {
        let cell = self.cell_of(p);
        self.cells[cell].retain(|&i| i != index);
    }

    pub fn insert(&mut self, index: u32, p: &Point<Real>) {
        let cell = self.cell_of(p);
        self.cells[cell].push(index);
    }

    /// An empty grid ready for incremental insertion.
    pub fn empty(d: usize, per_axis: usize) -> Self {
        PointGrid {
            d,
            per_axis,
            cell_side: 1.0 / per_axis as Real,
            cells: vec![Vec::new(); per_axis.pow(d as u32)],
        }
    }

    /// Appends the indices of all bucketed points that could lie within
    /// `radius` of the line `a + t u` (unit `u`). May over-report, never
    /// under-reports.
    pub fn candidates_near_line(
        &self,
        a: &[Real],
        u: &[Real],
        radius: Real,
        out: &mut Vec<u32>,
    ) {
        out.clear();
        let d = self.d;
        let h = self.cell_side;
        let major = (0..d)
            .max_by(|&x, &y| u[x].abs().partial_cmp(&u[y].abs()).unwrap())
            .unwrap();
        let u_major = u[major];
        debug_assert!(u_major.abs() >= 1.0 / (d as Real).sqrt() - 1e-9);
        // A point within `radius` of the line deviates from the line's
        // position at the same major coordinate by at most
        // radius * (1 + |u_i| / |u_major|) on axis i.
        let pads: Vec<Real> = (0..d)
            .map(|i| radius * (1.0 + (u[i] / u_major).abs()) + 1e-12)
            .collect();
        let others: Vec<usize> = (0..d).filter(|&i| i != major).collect();
        let mut lo_cell = vec![0usize; others.len()];
        let mut hi_cell = vec![0usize; others.len()];
        let mut counter = vec![0usize; others.len()];
        for slab in 0..self.per_axis {
            let t0 = (slab as Real * h - a[major]) / u_major;
            let t1 = ((slab + 1) as Real * h - a[major]) / u_major;
            let mut in_domain = true;
            for (pos, &axis) in others.iter().enumerate() {
                let c0 = a[axis] + t0 * u[axis];
                let c1 = a[axis] + t1 * u[axis];
                let lo = c0.min(c1) - pads[axis];
                let hi = c0.max(c1) + pads[axis];
                if hi < 0.0 || lo > 1.0 {
                    in_domain = false;
                    break;
                }
                lo_cell[pos] = self.axis_cell(lo.max(0.0));
                hi_cell[pos] = self.axis_cell(hi.min(1.0));
            }
            if !in_domain {
                continue;
            }
            counter.copy_from_slice(&lo_cell);
            loop {
                let mut idx = 0;
                let mut pos = 0;
                for axis in 0..d {
                    let cell = if axis == major {
                        slab
                    } else {
                        let c = counter[pos];
                        pos += 1;
                        c
                    };
                    idx = idx * self.per_axis + cell;
                }
                out.extend_from_slice(&self.cells[idx]);
                // Mixed-radix advance over the non-major axes.
                let mut carry = true;
                for pos in (0..counter.len()).rev() {
                    if counter[pos] < hi_cell[pos] {
                        counter[pos] += 1;
                        carry = false;
                        break;
                    }
                    counter[pos] = lo_cell[pos];
                }
                if carry {
                    break;
                }
            }
        }
    }

    /// Appends the indices of all bucketed points that could lie within
    /// `radius` of `p`. May over-report, never under-reports.
    pub fn candidates_near_point(&self, p: &Point<Real>, radius: Real, out: &mut Vec<u32>) {
        out.clear();
        let d = self.d;
        let mut lo_cell = vec![0usize; d];
        let mut hi_cell = vec![0usize; d];
        for axis in 0..d {
            lo_cell[axis] = self.axis_cell((p.coords[axis] - radius).max(0.0));
            hi_cell[axis] = self.axis_cell((p.coords[axis] + radius).min(1.0));
        }
        let mut counter = lo_cell.clone();
        loop {
            let mut idx = 0;
            for axis in 0..d {
                idx = idx * self.per_axis + counter[axis];
            }
            out.extend_from_slice(&self.cells[idx]);
            let mut carry = true;
            for pos in (0..d).rev() {
                if counter[pos] < hi_cell[pos] {
                    counter[pos] += 1;
                    carry = false;
                    break;
                }
                counter[pos] = lo_cell[pos];
            }
            if carry {
                break;
            }
        }
    }
}

/// Squared distance from `x` to the line `a + t u` with unit `u`.
pub(crate) fn line_distance_sq(x: &[Real], a: &[Real], u: &[Real]) -> Real {
    let mut dot = 0.0;
    let mut norm_sq = 0.0;
    for i in 0..x.len() {
        let v = x[i] - a[i];
        dot += v * u[i];
        norm_sq += v * v;
    }
    (norm_sq - dot * dot).max(0.0)
}

/// Writes the anchor and unit direction of the line through points `i`
/// and `j` into the buffers; `false` for (near-)coincident points.
pub(crate) fn pair_line(
    points: &[Point<Real>],
    i: usize,
    j: usize,
    anchor: &mut [Real],
    dir: &mut [Real],
) -> bool {
    let a = &points[i].coords;
    let b = &points[j].coords;
    let mut norm_sq = 0.0;
    for axis in 0..a.len() {
        let diff = b[axis] - a[axis];
        anchor[axis] = a[axis];
        dir[axis] = diff;
        norm_sq += diff * diff;
    }
    let norm = norm_sq.sqrt();
    if norm < 1e-15 {
        return false;
    }
    for x in dir.iter_mut() {
        *x /= norm;
    }
    true
}
