//! Subsets of grid cells, stored as bit vectors.
//!
//! A `CellSet` is the computable stand-in for a closed subset of the state
//! space: every member cell is a closed box, so the union of member boxes is
//! closed. Boolean algebra is bitwise; the combinatorial interior uses full
//! box-intersection adjacency (diagonals included), which under-approximates
//! the topological interior so that strict-confinement certificates stay
//! conservative.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::geom::{box_distance, Metric};
use crate::grid::{CellRange, GridSpace};

#[derive(Debug, Clone)]
pub struct CellSet {
    space: Arc<GridSpace>,
    blocks: Blocks,
}

/// Block storage: spaces of at most 64 cells stay off the heap, which
/// matters in exhaustive sweeps over tiny spaces.
#[derive(Debug, Clone)]
enum Blocks {
    One(u64),
    Many(Vec<u64>),
}

impl Blocks {
    #[inline]
    fn as_slice(&self) -> &[u64] {
        match self {
            Blocks::One(b) => std::slice::from_ref(b),
            Blocks::Many(v) => v,
        }
    }

    #[inline]
    fn as_mut_slice(&mut self) -> &mut [u64] {
        match self {
            Blocks::One(b) => std::slice::from_mut(b),
            Blocks::Many(v) => v,
        }
    }
}

fn nblocks(ncells: usize) -> usize {
    ncells.div_ceil(64)
}

impl PartialEq for CellSet {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.blocks.as_slice() == other.blocks.as_slice()
    }
}
impl Eq for CellSet {}

impl CellSet {
    pub fn empty(space: &Arc<GridSpace>) -> CellSet {
        let blocks = if space.ncells() <= 64 {
            Blocks::One(0)
        } else {
            Blocks::Many(vec![0; nblocks(space.ncells())])
        };
        CellSet { space: Arc::clone(space), blocks }
    }

    pub fn full(space: &Arc<GridSpace>) -> CellSet {
        let mut s = CellSet::empty(space);
        for b in s.blocks.as_mut_slice() {
            *b = !0;
        }
        s.trim();
        s
    }

    pub fn from_cells(space: &Arc<GridSpace>, cells: impl IntoIterator<Item = usize>) -> Result<CellSet> {
        let mut s = CellSet::empty(space);
        for c in cells {
            if c >= space.ncells() {
                return Err(Error::InvalidCell { cell: c, ncells: space.ncells() });
            }
            s.insert(c);
        }
        Ok(s)
    }

    /// Cells selected by an arbitrary predicate on the linear index.
    pub fn from_fn(space: &Arc<GridSpace>, mut pred: impl FnMut(usize) -> bool) -> CellSet {
        let mut s = CellSet::empty(space);
        for c in 0..space.ncells() {
            if pred(c) {
                s.insert(c);
            }
        }
        s
    }

    pub fn space(&self) -> &Arc<GridSpace> {
        &self.space
    }

    pub(crate) fn blocks(&self) -> &[u64] {
        self.blocks.as_slice()
    }

    pub(crate) fn blocks_mut(&mut self) -> &mut [u64] {
        self.blocks.as_mut_slice()
    }

    fn trim(&mut self) {
        let n = self.space.ncells();
        if !n.is_multiple_of(64) {
            let blocks = self.blocks.as_mut_slice();
            let last = blocks.len() - 1;
            blocks[last] &= (1u64 << (n % 64)) - 1;
        }
    }

    pub fn insert(&mut self, cell: usize) {
        debug_assert!(cell < self.space.ncells());
        self.blocks.as_mut_slice()[cell / 64] |= 1 << (cell % 64);
    }

    pub fn clear(&mut self) {
        self.blocks.as_mut_slice().fill(0);
    }

    pub fn remove(&mut self, cell: usize) {
        self.blocks.as_mut_slice()[cell / 64] &= !(1 << (cell % 64));
    }

    pub fn contains(&self, cell: usize) -> bool {
        cell < self.space.ncells()
            && self.blocks.as_slice()[cell / 64] >> (cell % 64) & 1 == 1
    }

    pub fn insert_range(&mut self, range: &CellRange) {
        let space = Arc::clone(&self.space);
        range.for_each(&space, |c| self.insert(c));
    }

    pub fn len(&self) -> usize {
        self.blocks.as_slice().iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.blocks.as_slice().iter().all(|&b| b == 0)
    }

    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.blocks.as_slice().iter().enumerate().flat_map(|(i, &b)| {
            let mut bits = b;
            std::iter::from_fn(move || {
                if bits == 0 {
                    return None;
                }
                let t = bits.trailing_zeros() as usize;
                bits &= bits - 1;
                Some(i * 64 + t)
            })
        })
    }

    /// Sorted member indices (the canonical serialized form).
    pub fn to_sorted_vec(&self) -> Vec<usize> {
        self.iter().collect()
    }

    fn assert_same_space(&self, other: &CellSet) {
        assert!(self.space == other.space, "cell sets live on different grid spaces");
    }

    pub fn union(&self, other: &CellSet) -> CellSet {
        self.assert_same_space(other);
        let mut out = self.clone();
        for (a, b) in out.blocks.as_mut_slice().iter_mut().zip(other.blocks.as_slice()) {
            *a |= b;
        }
        out
    }

    pub fn intersection(&self, other: &CellSet) -> CellSet {
        self.assert_same_space(other);
        let mut out = self.clone();
        for (a, b) in out.blocks.as_mut_slice().iter_mut().zip(other.blocks.as_slice()) {
            *a &= b;
        }
        out
    }

    pub fn minus(&self, other: &CellSet) -> CellSet {
        self.assert_same_space(other);
        let mut out = self.clone();
        for (a, b) in out.blocks.as_mut_slice().iter_mut().zip(other.blocks.as_slice()) {
            *a &= !b;
        }
        out
    }

    pub fn complement(&self) -> CellSet {
        let mut out = self.clone();
        for a in out.blocks.as_mut_slice().iter_mut() {
            *a = !*a;
        }
        out.trim();
        out
    }

    pub fn is_subset(&self, other: &CellSet) -> bool {
        self.assert_same_space(other);
        self.blocks
            .as_slice()
            .iter()
            .zip(other.blocks.as_slice())
            .all(|(a, b)| a & !b == 0)
    }

    pub fn intersects(&self, other: &CellSet) -> bool {
        self.assert_same_space(other);
        self.blocks
            .as_slice()
            .iter()
            .zip(other.blocks.as_slice())
            .any(|(a, b)| a & b != 0)
    }

    /// Cells of `self` all of whose box-intersecting neighbors (diagonals
    /// included, a cell being its own neighbor) are also in `self`.
    pub fn interior(&self) -> CellSet {
        let mut out = CellSet::empty(&self.space);
        for c in self.iter() {
            if self.space.neighbors(c).into_iter().all(|n| self.contains(n)) {
                out.insert(c);
            }
        }
        out
    }

    /// Combinatorial closure of the complement: `complement(interior(self))`.
    pub fn closure_of_complement(&self) -> CellSet {
        self.interior().complement()
    }

    /// Members plus every neighbor of a member (one combinatorial ring).
    pub fn dilate(&self) -> CellSet {
        let mut out = self.clone();
        for c in self.iter() {
            for n in self.space.neighbors(c) {
                out.insert(n);
            }
        }
        out
    }

    /// True when every member of `self` is a member of `other` or one of its
    /// neighbors, i.e. the two sets differ by at most one boundary ring.
    pub fn within_one_cell_of(&self, other: &CellSet) -> bool {
        self.is_subset(&other.dilate()) && other.is_subset(&self.dilate())
    }
}

/// Exact minimum distance between the closed box unions of two nonempty
/// cell sets; 0 if they intersect (touching counts as distance 0).
pub fn set_distance(s: &CellSet, t: &CellSet, metric: Metric) -> Result<f64> {
    assert!(s.space() == t.space(), "cell sets live on different grid spaces");
    if s.is_empty() || t.is_empty() {
        return Err(Error::EmptyOperand);
    }
    if s.intersects(t) {
        return Ok(0.0);
    }
    let space = s.space();
    let t_boxes: Vec<_> = t.iter().map(|c| space.box_of(c)).collect();
    let mut best = f64::INFINITY;
    for c in s.iter() {
        let cb = space.box_of(c);
        for tb in &t_boxes {
            let d = box_distance(metric, &cb, tb);
            if d < best {
                best = d;
                if best == 0.0 {
                    return Ok(0.0);
                }
            }
        }
    }
    Ok(best)
}

/// Per-cell distance field: `out[c]` is the exact distance from the box of
/// `c` to the box union of `target` (infinity when `target` is empty).
pub fn distance_field(space: &Arc<GridSpace>, target: &CellSet, metric: Metric) -> Vec<f64> {
    let t_boxes: Vec<_> = target.iter().map(|c| space.box_of(c)).collect();
    (0..space.ncells())
        .map(|c| {
            if target.contains(c) {
                return 0.0;
            }
            let cb = space.box_of(c);
            let mut best = f64::INFINITY;
            for tb in &t_boxes {
                let d = box_distance(metric, &cb, tb);
                if d < best {
                    best = d;
                    if best == 0.0 {
                        break;
                    }
                }
            }
            best
        })
        .collect()
}
