//! Finite closed relations: images, transposes, composition, iteration,
//! inverse images, and invariance classification.
//!
//! A relation is stored row-sparse: one bit vector of targets per source
//! cell. The transpose rows are built lazily and cached, since image and
//! transpose-image are the two hot kernels of every fixpoint downstream.

use std::fmt::Write as _;
use std::sync::{Arc, OnceLock};

use crate::cellset::CellSet;
use crate::error::{Error, Result};
use crate::geom::AxisBox;
use crate::grid::GridSpace;

#[derive(Debug)]
pub struct FiniteRelation {
    space: Arc<GridSpace>,
    bpr: usize,
    rows: Arc<[u64]>,
    transpose_rows: OnceLock<Arc<[u64]>>,
}

impl Clone for FiniteRelation {
    fn clone(&self) -> Self {
        let t = OnceLock::new();
        if let Some(tr) = self.transpose_rows.get() {
            let _ = t.set(Arc::clone(tr));
        }
        FiniteRelation {
            space: Arc::clone(&self.space),
            bpr: self.bpr,
            rows: Arc::clone(&self.rows),
            transpose_rows: t,
        }
    }
}

impl PartialEq for FiniteRelation {
    fn eq(&self, other: &Self) -> bool {
        self.space == other.space && self.rows == other.rows
    }
}
impl Eq for FiniteRelation {}

fn blocks_per_row(ncells: usize) -> usize {
    ncells.div_ceil(64)
}

impl FiniteRelation {
    pub fn empty(space: &Arc<GridSpace>) -> FiniteRelation {
        let bpr = blocks_per_row(space.ncells());
        FiniteRelation {
            space: Arc::clone(space),
            bpr,
            rows: vec![0; bpr * space.ncells()].into(),
            transpose_rows: OnceLock::new(),
        }
    }

    pub fn identity(space: &Arc<GridSpace>) -> FiniteRelation {
        let mut rows = vec![0u64; blocks_per_row(space.ncells()) * space.ncells()];
        let bpr = blocks_per_row(space.ncells());
        for c in 0..space.ncells() {
            rows[c * bpr + c / 64] |= 1 << (c % 64);
        }
        FiniteRelation {
            space: Arc::clone(space),
            bpr,
            rows: rows.into(),
            transpose_rows: OnceLock::new(),
        }
    }

    pub fn from_pairs(
        space: &Arc<GridSpace>,
        pairs: impl IntoIterator<Item = (usize, usize)>,
    ) -> Result<FiniteRelation> {
        let n = space.ncells();
        let bpr = blocks_per_row(n);
        let mut rows = vec![0u64; bpr * n];
        for (s, t) in pairs {
            if s >= n {
                return Err(Error::InvalidCell { cell: s, ncells: n });
            }
            if t >= n {
                return Err(Error::InvalidCell { cell: t, ncells: n });
            }
            rows[s * bpr + t / 64] |= 1 << (t % 64);
        }
        Ok(FiniteRelation {
            space: Arc::clone(space),
            bpr,
            rows: rows.into(),
            transpose_rows: OnceLock::new(),
        })
    }

    /// Relation covering a list of geometric pair-boxes: every cell pair
    /// whose closed product box meets `src x tgt` for some entry is included
    /// (touching counts, so lower-dimensional graphs like segments are kept).
    pub fn from_box_pairs(space: &Arc<GridSpace>, pairs: &[(AxisBox, AxisBox)]) -> FiniteRelation {
        let n = space.ncells();
        let bpr = blocks_per_row(n);
        let mut rows = vec![0u64; bpr * n];
        for (sb, tb) in pairs {
            let (Some(sr), Some(tr)) = (space.cover_closed(sb), space.cover_closed(tb)) else {
                continue;
            };
            let mut targets = vec![0u64; bpr];
            tr.for_each(space, |t| targets[t / 64] |= 1 << (t % 64));
            sr.for_each(space, |s| {
                for (b, t) in rows[s * bpr..(s + 1) * bpr].iter_mut().zip(&targets) {
                    *b |= t;
                }
            });
        }
        FiniteRelation {
            space: Arc::clone(space),
            bpr,
            rows: rows.into(),
            transpose_rows: OnceLock::new(),
        }
    }

    /// Rows given directly as one 64-bit target mask per source cell.
    /// Only valid for spaces of at most 64 cells; bits at or above the
    /// cell count must be clear.
    pub fn from_row_masks(space: &Arc<GridSpace>, rows: &[u64]) -> Result<FiniteRelation> {
        let n = space.ncells();
        if n > 64 || rows.len() != n {
            return Err(Error::MalformedRelation(format!(
                "expected {n} single-block rows on a space of at most 64 cells"
            )));
        }
        let stray = if n == 64 { 0 } else { !((1u64 << n) - 1) };
        if rows.iter().any(|r| r & stray != 0) {
            return Err(Error::MalformedRelation(
                "row mask has bits beyond the cell count".into(),
            ));
        }
        Ok(FiniteRelation {
            space: Arc::clone(space),
            bpr: 1,
            rows: rows.into(),
            transpose_rows: OnceLock::new(),
        })
    }

    pub(crate) fn from_raw_rows(space: &Arc<GridSpace>, rows: Vec<u64>) -> FiniteRelation {
        let bpr = blocks_per_row(space.ncells());
        debug_assert_eq!(rows.len(), bpr * space.ncells());
        FiniteRelation {
            space: Arc::clone(space),
            bpr,
            rows: rows.into(),
            transpose_rows: OnceLock::new(),
        }
    }

    pub fn space(&self) -> &Arc<GridSpace> {
        &self.space
    }

    #[inline]
    pub(crate) fn row_blocks(&self, source: usize) -> &[u64] {
        &self.rows[source * self.bpr..(source + 1) * self.bpr]
    }

    pub fn contains_pair(&self, source: usize, target: usize) -> bool {
        source < self.space.ncells()
            && target < self.space.ncells()
            && self.row_blocks(source)[target / 64] >> (target % 64) & 1 == 1
    }

    pub fn pair_count(&self) -> usize {
        self.rows.iter().map(|b| b.count_ones() as usize).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.rows.iter().all(|&b| b == 0)
    }

    /// Pairs in lexicographic (source, target) order.
    pub fn pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        let n = self.space.ncells();
        (0..n).flat_map(move |s| self.row_targets(s).map(move |t| (s, t)))
    }

    pub fn row_targets(&self, source: usize) -> impl Iterator<Item = usize> + '_ {
        self.row_blocks(source).iter().enumerate().flat_map(|(i, &b)| {
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

    /// Targets of a single source cell as a `CellSet`.
    pub fn row(&self, source: usize) -> CellSet {
        let mut out = CellSet::empty(&self.space);
        out.blocks_mut().copy_from_slice(self.row_blocks(source));
        out
    }

    /// Pairwise containment (`self` a sub-relation of `other`).
    pub fn is_subrelation_of(&self, other: &FiniteRelation) -> bool {
        assert!(self.space == other.space, "relations live on different grid spaces");
        self.rows.iter().zip(other.rows.iter()).all(|(a, b)| a & !b == 0)
    }

    pub fn union(&self, other: &FiniteRelation) -> FiniteRelation {
        assert!(self.space == other.space, "relations live on different grid spaces");
        let mut rows = self.rows.to_vec();
        for (a, b) in rows.iter_mut().zip(other.rows.iter()) {
            *a |= b;
        }
        FiniteRelation::from_raw_rows(&self.space, rows)
    }

    /// One-step image of `set`: all targets reachable from a member source.
    pub fn image(&self, set: &CellSet) -> CellSet {
        assert!(self.space == *set.space(), "relation and set live on different grid spaces");
        let mut out = CellSet::empty(&self.space);
        let blocks = out.blocks_mut();
        for s in set.iter() {
            let row = self.row_blocks(s);
            for (o, r) in blocks.iter_mut().zip(row) {
                *o |= r;
            }
        }
        out
    }

    /// Image under the transpose (the backward-time object).
    pub fn transpose_image(&self, set: &CellSet) -> CellSet {
        assert!(self.space == *set.space(), "relation and set live on different grid spaces");
        let tr = self.transpose_blocks();
        let mut out = CellSet::empty(&self.space);
        let blocks = out.blocks_mut();
        for s in set.iter() {
            let row = &tr[s * self.bpr..(s + 1) * self.bpr];
            for (o, r) in blocks.iter_mut().zip(row) {
                *o |= r;
            }
        }
        out
    }

    fn transpose_blocks(&self) -> &Arc<[u64]> {
        self.transpose_rows.get_or_init(|| {
            let n = self.space.ncells();
            let mut tr = vec![0u64; self.bpr * n];
            for s in 0..n {
                for t in self.row_targets(s) {
                    tr[t * self.bpr + s / 64] |= 1 << (s % 64);
                }
            }
            tr.into()
        })
    }

    /// Pair-swapped relation `{(y, x) : (x, y) in self}`.
    pub fn transpose(&self) -> FiniteRelation {
        let tr = Arc::clone(self.transpose_blocks());
        let out = FiniteRelation {
            space: Arc::clone(&self.space),
            bpr: self.bpr,
            rows: tr,
            transpose_rows: OnceLock::new(),
        };
        let _ = out.transpose_rows.set(Arc::clone(&self.rows));
        out
    }

    /// Inverse image `{x : self(x) subset of set}`. Unlike the transpose
    /// image this is not itself a relation image and does not preserve
    /// unions; it satisfies `transpose_image(S)^c = inverse_image(S^c)`.
    pub fn inverse_image(&self, set: &CellSet) -> CellSet {
        assert!(self.space == *set.space(), "relation and set live on different grid spaces");
        let mut out = CellSet::empty(&self.space);
        for s in 0..self.space.ncells() {
            let row = self.row_blocks(s);
            if row.iter().zip(set.blocks()).all(|(r, b)| r & !b == 0) {
                out.insert(s);
            }
        }
        out
    }

    /// Composition `self . other`: apply `other` first, then `self`.
    pub fn compose(&self, other: &FiniteRelation) -> FiniteRelation {
        assert!(self.space == other.space, "relations live on different grid spaces");
        let n = self.space.ncells();
        let mut rows = vec![0u64; self.bpr * n];
        for x in 0..n {
            let out = &mut rows[x * self.bpr..(x + 1) * self.bpr];
            for y in other.row_targets(x) {
                for (o, r) in out.iter_mut().zip(self.row_blocks(y)) {
                    *o |= r;
                }
            }
        }
        FiniteRelation::from_raw_rows(&self.space, rows)
    }

    /// n-fold composition; `iterate(0)` is the identity relation.
    pub fn iterate(&self, n: usize) -> FiniteRelation {
        let mut acc = FiniteRelation::identity(&self.space);
        for _ in 0..n {
            acc = self.compose(&acc);
        }
        acc
    }

    /// Restriction to pairs whose source lies in `window`.
    pub fn restrict_sources(&self, window: &CellSet) -> FiniteRelation {
        assert!(self.space == *window.space(), "relation and set live on different grid spaces");
        let n = self.space.ncells();
        let mut rows = vec![0u64; self.bpr * n];
        for s in window.iter() {
            rows[s * self.bpr..(s + 1) * self.bpr].copy_from_slice(self.row_blocks(s));
        }
        FiniteRelation::from_raw_rows(&self.space, rows)
    }

    /// Plain-text form: one `source target` pair per line, sorted.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (s, t) in self.pairs() {
            let _ = writeln!(out, "{s} {t}");
        }
        out
    }

    pub fn from_text(space: &Arc<GridSpace>, text: &str) -> Result<FiniteRelation> {
        let mut pairs = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let mut it = line.split_whitespace();
            let parse = |tok: Option<&str>| -> Result<usize> {
                tok.ok_or_else(|| {
                    Error::MalformedRelation(format!("line {}: expected `source target`", lineno + 1))
                })?
                .parse::<usize>()
                .map_err(|e| Error::MalformedRelation(format!("line {}: {e}", lineno + 1)))
            };
            let s = parse(it.next())?;
            let t = parse(it.next())?;
            if it.next().is_some() {
                return Err(Error::MalformedRelation(format!(
                    "line {}: trailing tokens",
                    lineno + 1
                )));
            }
            pairs.push((s, t));
        }
        FiniteRelation::from_pairs(space, pairs)
    }

    /// Binary form: `MFRL`, version, cell count, pair count, then sorted
    /// `(u64, u64)` little-endian pairs.
    pub fn to_binary(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 16 * self.pair_count());
        out.extend_from_slice(b"MFRL");
        out.extend_from_slice(&1u32.to_le_bytes());
        out.extend_from_slice(&(self.space.ncells() as u64).to_le_bytes());
        out.extend_from_slice(&(self.pair_count() as u64).to_le_bytes());
        for (s, t) in self.pairs() {
            out.extend_from_slice(&(s as u64).to_le_bytes());
            out.extend_from_slice(&(t as u64).to_le_bytes());
        }
        out
    }

    pub fn from_binary(space: &Arc<GridSpace>, bytes: &[u8]) -> Result<FiniteRelation> {
        let bad = |msg: &str| Error::MalformedRelation(msg.to_string());
        if bytes.len() < 24 || &bytes[0..4] != b"MFRL" {
            return Err(bad("missing MFRL header"));
        }
        let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
        if version != 1 {
            return Err(bad("unsupported version"));
        }
        let ncells = u64::from_le_bytes(bytes[8..16].try_into().unwrap()) as usize;
        if ncells != space.ncells() {
            return Err(bad("cell count does not match the grid"));
        }
        let npairs = u64::from_le_bytes(bytes[16..24].try_into().unwrap()) as usize;
        if bytes.len() != 24 + 16 * npairs {
            return Err(bad("truncated pair list"));
        }
        let pairs = (0..npairs).map(|i| {
            let off = 24 + 16 * i;
            let s = u64::from_le_bytes(bytes[off..off + 8].try_into().unwrap()) as usize;
            let t = u64::from_le_bytes(bytes[off + 8..off + 16].try_into().unwrap()) as usize;
            (s, t)
        });
        FiniteRelation::from_pairs(space, pairs)
    }

    /// Classify the six invariance flags of `set` plus strict and
    /// horizon-bounded eventual variants. On a finite space the image-set
    /// sequence is eventually periodic, so `horizon = ncells + 1` (the
    /// default used by callers) gives a sound eventual verdict.
    pub fn classify(&self, set: &CellSet, horizon: usize) -> InvarianceReport {
        assert!(horizon >= 1, "classification horizon must be at least 1");
        let image = self.image(set);
        let star_image = self.transpose_image(set);
        let confining = image.is_subset(set);
        let rejecting = star_image.is_subset(set);
        let backward_complete = set.is_subset(&image);
        let forward_complete = set.is_subset(&star_image);
        let strict_confining = image.is_subset(&set.interior());

        // Forward image sequence up to the horizon.
        let interior = set.interior();
        let mut confining_ok = vec![false; horizon + 1];
        let mut strict_ok = vec![false; horizon + 1];
        let mut cur = set.clone();
        for n in 0..=horizon {
            if n > 0 {
                cur = self.image(&cur);
            }
            confining_ok[n] = cur.is_subset(set);
            strict_ok[n] = cur.is_subset(&interior);
        }
        let least_persisting = |ok: &[bool]| -> Option<usize> {
            let mut from = None;
            for n in (1..=horizon).rev() {
                if ok[n] {
                    from = Some(n);
                } else {
                    break;
                }
            }
            from
        };
        InvarianceReport {
            confining,
            rejecting,
            backward_complete,
            forward_complete,
            invariant: confining && backward_complete,
            star_invariant: rejecting && forward_complete,
            strict_confining,
            eventually_confining_at: least_persisting(&confining_ok),
            eventually_strictly_confining_at: least_persisting(&strict_ok),
            horizon,
        }
    }

    /// Default classification horizon: one more than the cell count.
    pub fn default_horizon(&self) -> usize {
        self.space.ncells() + 1
    }
}

/// Outcome of [`FiniteRelation::classify`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InvarianceReport {
    pub confining: bool,
    pub rejecting: bool,
    pub backward_complete: bool,
    pub forward_complete: bool,
    pub invariant: bool,
    pub star_invariant: bool,
    pub strict_confining: bool,
    /// Least `n <= horizon` such that `f^k(S) <= S` for all `k` from `n` to
    /// the horizon; `None` if the property does not persist.
    pub eventually_confining_at: Option<usize>,
    pub eventually_strictly_confining_at: Option<usize>,
    pub horizon: usize,
}
