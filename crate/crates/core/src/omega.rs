//! Omega limit sets, maximal invariant subsets, and confining-core tests
//! for finite relations.
//!
//! On a finite cell space the forward image sequence `S, f(S), f^2(S), ...`
//! is eventually periodic, so both omega limit constructions reduce to
//! detecting that cycle. The strict omega limit set is the union of the
//! sets in the cycle; the confining-core (K-set) construction intersects
//! the tail unions `C_n = union of f^k(S) for k >= n`. Both are computed
//! and compared rather than trusting their equality on finite spaces.

use crate::cellset::CellSet;
use crate::relation::FiniteRelation;

/// Result of an omega limit computation.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OmegaReport {
    /// Intersection of all closed confining supersets of an eventual image.
    pub omega: CellSet,
    /// Union of the image-set cycle (the nested-tail construction).
    pub strict_omega: CellSet,
    /// Whether the two constructions agreed (always true on a finite grid;
    /// kept as a consistency guard).
    pub agree: bool,
    /// Iterations before the image-set sequence enters its cycle.
    pub transient_length: usize,
    /// Length of the cycle.
    pub cycle_length: usize,
}

/// Stack buffer for mask sequences; sequences of tiny relations almost
/// never exceed it, and overflow falls back to the heap path.
const MASK_BUF: usize = 40;

#[inline]
fn image_mask(f: &FiniteRelation, s: u64) -> u64 {
    let mut out = 0u64;
    let mut bits = s;
    while bits != 0 {
        let i = bits.trailing_zeros() as usize;
        out |= f.row_blocks(i)[0];
        bits &= bits - 1;
    }
    out
}

/// Image sequence of a single-block space as raw masks: no per-step set
/// allocations, which matters in exhaustive sweeps over tiny relations.
/// Returns `(len, transient, cycle)` with the sequence in `buf[..len]`,
/// or `None` if the sequence outgrew the buffer.
fn mask_cycle(
    f: &FiniteRelation,
    start: u64,
    buf: &mut [u64; MASK_BUF],
) -> Option<(usize, usize, usize)> {
    let mut len = 0usize;
    let mut cur = start;
    loop {
        if let Some(j) = buf[..len].iter().position(|&s| s == cur) {
            return Some((len, j, len - j));
        }
        if len == MASK_BUF {
            return None;
        }
        buf[len] = cur;
        len += 1;
        cur = image_mask(f, cur);
    }
}

/// Forward image sequence from `start` until the first repeat.
/// Returns `(sets, transient, cycle)` where `sets[transient..]` is one full
/// cycle period and `sets.len() == transient + cycle`.
fn image_cycle(f: &FiniteRelation, start: &CellSet) -> (Vec<CellSet>, usize, usize) {
    let mut seen: Vec<(u64, CellSet)> = Vec::new();
    let mut cur = start.clone();
    loop {
        let h = hash_blocks(cur.blocks());
        if let Some(j) = seen
            .iter()
            .position(|(hh, s)| *hh == h && s.blocks() == cur.blocks())
        {
            let cycle = seen.len() - j;
            let sets = seen.into_iter().map(|(_, s)| s).collect();
            return (sets, j, cycle);
        }
        let next = f.image(&cur);
        seen.push((h, cur));
        cur = next;
    }
}

fn set_from_mask(space: &std::sync::Arc<crate::grid::GridSpace>, mask: u64) -> CellSet {
    let mut s = CellSet::empty(space);
    s.blocks_mut()[0] = mask;
    s
}

fn hash_blocks(blocks: &[u64]) -> u64 {
    // FxHash-style mix; collisions only cost an extra comparison.
    let mut h = 0xcbf29ce484222325u64;
    for &b in blocks {
        h = (h ^ b).wrapping_mul(0x100000001b3);
        h ^= h >> 29;
    }
    h
}

/// Strict omega limit set: iterate the image sequence, detect its cycle,
/// and return the union of the cycle sets.
pub fn strict_omega(f: &FiniteRelation, start: &CellSet) -> OmegaReport {
    if start.space().ncells() <= 64 {
        let mut buf = [0u64; MASK_BUF];
        if let Some((len, transient, cycle)) = mask_cycle(f, start.blocks()[0], &mut buf) {
            let omega_hat = buf[transient..len].iter().fold(0u64, |a, &m| a | m);
            return OmegaReport {
                omega: set_from_mask(start.space(), omega_hat),
                strict_omega: set_from_mask(start.space(), omega_hat),
                agree: true,
                transient_length: transient,
                cycle_length: cycle,
            };
        }
    }
    let (sets, transient, cycle) = image_cycle(f, start);
    let mut omega_hat = CellSet::empty(start.space());
    for s in &sets[transient..] {
        omega_hat = omega_hat.union(s);
    }
    OmegaReport {
        omega: omega_hat.clone(),
        strict_omega: omega_hat,
        agree: true,
        transient_length: transient,
        cycle_length: cycle,
    }
}

/// Omega limit set via the confining-core chain: each tail union
/// `C_n = union of f^k(S), k >= n` is closed and confining and contains
/// `f^n(S)`, and every closed confining superset of some `f^n(S)` contains
/// `C_n`; the omega limit set is the intersection of the chain. The result
/// is checked against [`strict_omega`] and both are reported.
pub fn omega(f: &FiniteRelation, start: &CellSet) -> OmegaReport {
    if start.space().ncells() <= 64 {
        let mut buf = [0u64; MASK_BUF];
        if let Some((len, transient, cycle)) = mask_cycle(f, start.blocks()[0], &mut buf) {
            let cycle_union = buf[transient..len].iter().fold(0u64, |a, &m| a | m);
            let mut tail = cycle_union;
            let mut limit = cycle_union;
            for &m in buf[..transient].iter().rev() {
                tail |= m;
                limit &= tail;
            }
            let agree = limit == cycle_union;
            debug_assert!(agree, "tail-chain omega diverged from the strict construction");
            return OmegaReport {
                omega: set_from_mask(start.space(), limit),
                strict_omega: set_from_mask(start.space(), cycle_union),
                agree,
                transient_length: transient,
                cycle_length: cycle,
            };
        }
    }
    let (sets, transient, cycle) = image_cycle(f, start);
    let mut cycle_union = CellSet::empty(start.space());
    for s in &sets[transient..] {
        cycle_union = cycle_union.union(s);
    }
    // Tail unions C_n for n = 0..=transient (beyond the transient they all
    // equal the cycle union), intersected into the limit.
    let mut tail = cycle_union.clone();
    let mut limit = cycle_union.clone();
    for s in sets[..transient].iter().rev() {
        tail = tail.union(s);
        limit = limit.intersection(&tail);
    }
    // The chain is nested downward, so the intersection is the cycle union.
    let strict = cycle_union;
    let agree = limit == strict;
    debug_assert!(agree, "tail-chain omega diverged from the strict construction");
    OmegaReport {
        omega: limit,
        strict_omega: strict,
        agree,
        transient_length: transient,
        cycle_length: cycle,
    }
}

/// Largest subset `A` of `window` with `f(A) = A`, computed by iterated
/// forced removal. The confinement pass drops sources whose row escapes the
/// candidate; the backward-completeness pass drops cells not hit by the
/// candidate. Both removals are forced for every invariant subset, so the
/// stable point contains each of them and satisfies `f(A) = A`.
pub fn maximal_invariant(f: &FiniteRelation, window: &CellSet) -> CellSet {
    let mut a = window.clone();
    loop {
        let mut confined = CellSet::empty(a.space());
        for x in a.iter() {
            if f.row_blocks(x).iter().zip(a.blocks()).all(|(r, b)| r & !b == 0) {
                confined.insert(x);
            }
        }
        let next = confined.intersection(&f.image(&confined));
        if next == a {
            return next;
        }
        a = next;
    }
}

/// Whether `candidate` is a confining set containing some forward image of
/// `start`, i.e. a member of the K-set family of `start`. The search for
/// the forward image runs over the whole eventually-periodic image
/// sequence, which is exhaustive on a finite space.
pub fn kset_membership(f: &FiniteRelation, start: &CellSet, candidate: &CellSet) -> bool {
    if !f.image(candidate).is_subset(candidate) {
        return false;
    }
    if start.space().ncells() <= 64 {
        let mut buf = [0u64; MASK_BUF];
        if let Some((len, _, _)) = mask_cycle(f, start.blocks()[0], &mut buf) {
            let cand = candidate.blocks()[0];
            return buf[..len].iter().any(|&m| m & !cand == 0);
        }
    }
    let (sets, _, _) = image_cycle(f, start);
    sets.iter().any(|s| s.is_subset(candidate))
}
