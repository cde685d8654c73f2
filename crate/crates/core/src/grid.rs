//! Uniform cubical decomposition of a compact box.
//!
//! Cells are closed boxes that tile the bounds and overlap only on shared
//! faces. Cell indices are linearized with axis 0 fastest, so in 2-D the
//! linear index of (column `i`, row `j`) is `j * res[0] + i`.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::AxisBox;

/// Relative tolerance (in units of one cell width) used when deciding
/// whether a box/cell intersection has positive measure. Absorbs the
/// ~1 ulp noise of closed-form evaluators without ever growing a cover
/// by a visible amount.
const COVER_EPS: f64 = 1e-9;

/// A uniform grid over `[lo_0, hi_0] x ... x [lo_{d-1}, hi_{d-1}]`.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSpace {
    lo: Vec<f64>,
    hi: Vec<f64>,
    res: Vec<usize>,
    width: Vec<f64>,
    stride: Vec<usize>,
    ncells: usize,
}

impl GridSpace {
    pub fn new(bounds: &[(f64, f64)], resolution: &[usize]) -> Result<Arc<GridSpace>> {
        if bounds.is_empty() || bounds.len() != resolution.len() {
            return Err(Error::InvalidGrid(format!(
                "bounds ({}) and resolution ({}) must be nonempty and agree",
                bounds.len(),
                resolution.len()
            )));
        }
        let mut ncells = 1usize;
        for (k, (&(a, b), &n)) in bounds.iter().zip(resolution).enumerate() {
            if !(a.is_finite() && b.is_finite() && a < b) {
                return Err(Error::InvalidGrid(format!("axis {k}: need finite lower < upper")));
            }
            if n == 0 {
                return Err(Error::InvalidGrid(format!("axis {k}: resolution must be positive")));
            }
            ncells = ncells
                .checked_mul(n)
                .ok_or_else(|| Error::InvalidGrid("cell count overflow".into()))?;
        }
        let mut stride = vec![1usize; bounds.len()];
        for k in 1..bounds.len() {
            stride[k] = stride[k - 1] * resolution[k - 1];
        }
        Ok(Arc::new(GridSpace {
            lo: bounds.iter().map(|&(a, _)| a).collect(),
            hi: bounds.iter().map(|&(_, b)| b).collect(),
            res: resolution.to_vec(),
            width: bounds
                .iter()
                .zip(resolution)
                .map(|(&(a, b), &n)| (b - a) / n as f64)
                .collect(),
            stride,
            ncells,
        }))
    }

    /// 1-D convenience constructor.
    pub fn line(lo: f64, hi: f64, n: usize) -> Result<Arc<GridSpace>> {
        GridSpace::new(&[(lo, hi)], &[n])
    }

    /// 2-D convenience constructor.
    pub fn plane(x: (f64, f64), y: (f64, f64), nx: usize, ny: usize) -> Result<Arc<GridSpace>> {
        GridSpace::new(&[x, y], &[nx, ny])
    }

    pub fn dimension(&self) -> usize {
        self.res.len()
    }

    pub fn ncells(&self) -> usize {
        self.ncells
    }

    pub fn resolution(&self) -> &[usize] {
        &self.res
    }

    pub fn bounds(&self) -> Vec<(f64, f64)> {
        self.lo.iter().zip(&self.hi).map(|(&a, &b)| (a, b)).collect()
    }

    pub fn bounding_box(&self) -> AxisBox {
        AxisBox { lo: self.lo.clone(), hi: self.hi.clone() }
    }

    /// Width of a cell along `axis`.
    pub fn cell_width(&self, axis: usize) -> f64 {
        self.width[axis]
    }

    /// Largest cell width over all axes.
    pub fn max_cell_width(&self) -> f64 {
        self.width.iter().cloned().fold(0.0, f64::max)
    }

    pub fn multi_index(&self, cell: usize) -> Vec<usize> {
        debug_assert!(cell < self.ncells);
        let mut rest = cell;
        let mut idx = vec![0usize; self.dimension()];
        for k in 0..self.dimension() {
            idx[k] = rest % self.res[k];
            rest /= self.res[k];
        }
        idx
    }

    pub fn linear_index(&self, idx: &[usize]) -> usize {
        debug_assert_eq!(idx.len(), self.dimension());
        idx.iter().zip(&self.stride).map(|(i, s)| i * s).sum()
    }

    /// Cell containing `point`. Points on shared faces resolve to the
    /// lexicographically smallest containing index.
    pub fn cell_of(&self, point: &[f64]) -> Result<usize> {
        if point.len() != self.dimension() {
            return Err(Error::PointOutOfBounds { point: point.to_vec(), axis: point.len() });
        }
        let mut cell = 0usize;
        for k in 0..self.dimension() {
            let p = point[k];
            if p < self.lo[k] || p > self.hi[k] || !p.is_finite() {
                return Err(Error::PointOutOfBounds { point: point.to_vec(), axis: k });
            }
            let r = (p - self.lo[k]) / self.width[k];
            let mut i = (r.floor() as isize).clamp(0, self.res[k] as isize - 1) as usize;
            // A point exactly on the left face of cell i also belongs to cell i-1.
            if i > 0 && self.lo[k] + i as f64 * self.width[k] == p {
                i -= 1;
            }
            cell += i * self.stride[k];
        }
        Ok(cell)
    }

    pub fn center_of(&self, cell: usize) -> Vec<f64> {
        let idx = self.multi_index(cell);
        idx.iter()
            .enumerate()
            .map(|(k, &i)| self.lo[k] + (i as f64 + 0.5) * self.width[k])
            .collect()
    }

    pub fn box_of(&self, cell: usize) -> AxisBox {
        let idx = self.multi_index(cell);
        let mut lo = Vec::with_capacity(self.dimension());
        let mut hi = Vec::with_capacity(self.dimension());
        for (k, &i) in idx.iter().enumerate() {
            lo.push(self.lo[k] + i as f64 * self.width[k]);
            hi.push(self.lo[k] + (i + 1) as f64 * self.width[k]);
        }
        AxisBox { lo, hi }
    }

    /// Per-axis index ranges of the cells whose intersection with `b` has
    /// positive measure (degenerate boxes fall back to a containing cell).
    /// Returns `None` when the box misses the grid entirely. Soundness: the
    /// union of the returned cells covers `b` clipped to the bounds, up to
    /// the `COVER_EPS` sliver of one cell width.
    pub fn cover_outer(&self, b: &AxisBox) -> Option<CellRange> {
        debug_assert_eq!(b.dim(), self.dimension());
        let mut lo_idx = Vec::with_capacity(self.dimension());
        let mut hi_idx = Vec::with_capacity(self.dimension());
        for k in 0..self.dimension() {
            let (a, c) = (b.lo[k], b.hi[k]);
            if c < self.lo[k] || a > self.hi[k] {
                return None;
            }
            let n = self.res[k] as isize;
            let rl = (a - self.lo[k]) / self.width[k];
            let rh = (c - self.lo[k]) / self.width[k];
            let mut il = (rl + COVER_EPS).floor() as isize;
            let mut ih = (rh - COVER_EPS).ceil() as isize - 1;
            if ih < il {
                // Thin box: keep the single cell containing its midpoint.
                il = ((0.5 * (rl + rh)).floor() as isize).clamp(0, n - 1);
                ih = il;
            }
            il = il.clamp(0, n - 1);
            ih = ih.clamp(0, n - 1);
            lo_idx.push(il as usize);
            hi_idx.push(ih as usize);
        }
        Some(CellRange { lo: lo_idx, hi: hi_idx })
    }

    /// Per-axis index ranges of every cell whose closed box intersects the
    /// closed box `b` (boundary touching counts, with `COVER_EPS` slack so
    /// float noise at a shared face never drops the touching cell). Used
    /// when building relations from lower-dimensional geometry such as
    /// segments.
    pub fn cover_closed(&self, b: &AxisBox) -> Option<CellRange> {
        debug_assert_eq!(b.dim(), self.dimension());
        let mut lo_idx = Vec::with_capacity(self.dimension());
        let mut hi_idx = Vec::with_capacity(self.dimension());
        for k in 0..self.dimension() {
            let (a, c) = (b.lo[k], b.hi[k]);
            if c < self.lo[k] || a > self.hi[k] {
                return None;
            }
            let n = self.res[k] as isize;
            // Cell i intersects [a, c] iff i >= (a - lo)/w - 1 and i <= (c - lo)/w.
            let rl = (a - self.lo[k]) / self.width[k];
            let rh = (c - self.lo[k]) / self.width[k];
            let il = ((rl - 1.0 - COVER_EPS).ceil() as isize).clamp(0, n - 1);
            let ih = ((rh + COVER_EPS).floor() as isize).clamp(0, n - 1);
            lo_idx.push(il as usize);
            hi_idx.push(ih.max(il) as usize);
        }
        Some(CellRange { lo: lo_idx, hi: hi_idx })
    }

    /// All cells whose closed boxes share at least a face or corner with
    /// `cell`, the cell itself included.
    pub fn neighbors(&self, cell: usize) -> Vec<usize> {
        let idx = self.multi_index(cell);
        let mut out = Vec::with_capacity(3usize.pow(self.dimension() as u32));
        let mut offsets = vec![-1isize; self.dimension()];
        'outer: loop {
            let mut lin = 0usize;
            let mut ok = true;
            for k in 0..self.dimension() {
                let j = idx[k] as isize + offsets[k];
                if j < 0 || j >= self.res[k] as isize {
                    ok = false;
                    break;
                }
                lin += j as usize * self.stride[k];
            }
            if ok {
                out.push(lin);
            }
            for k in 0..self.dimension() {
                offsets[k] += 1;
                if offsets[k] <= 1 {
                    continue 'outer;
                }
                offsets[k] = -1;
            }
            break;
        }
        out
    }
}

/// Inclusive per-axis index ranges describing a rectangular block of cells.
#[derive(Debug, Clone, PartialEq)]
pub struct CellRange {
    pub lo: Vec<usize>,
    pub hi: Vec<usize>,
}

impl CellRange {
    /// Number of cells in the block.
    pub fn len(&self) -> usize {
        self.lo.iter().zip(&self.hi).map(|(a, b)| b - a + 1).product()
    }

    /// Ranges are nonempty by construction.
    pub fn is_empty(&self) -> bool {
        false
    }

    /// Visit every linear index in the block.
    pub fn for_each(&self, space: &GridSpace, mut f: impl FnMut(usize)) {
        let d = self.lo.len();
        let mut idx = self.lo.clone();
        loop {
            f(space.linear_index(&idx));
            let mut k = 0;
            loop {
                if k == d {
                    return;
                }
                idx[k] += 1;
                if idx[k] <= self.hi[k] {
                    break;
                }
                idx[k] = self.lo[k];
                k += 1;
            }
        }
    }
}
