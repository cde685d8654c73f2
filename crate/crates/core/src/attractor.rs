//! Attractor blocks and their certification for relations and multiflows.
//!
//! A cell set `B` is an attractor block for a relation when no pair leads
//! from `B` into the closure of its complement; the certificate form is
//! robust under perturbation (see the continuation module). For multiflows
//! the forward-time reduction theorem lets a dense check on `(0, T]` stand
//! in for all positive times, so the certifier checks densely up to the
//! threshold and spot-checks beyond it.

use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::cellset::CellSet;
use crate::error::{Error, Result};
use crate::grid::GridSpace;
use crate::models::MultiflowModel;
use crate::multiflow::{image_of_set, omega_fixed_time, sample_relation, TimeGrid};
use crate::omega::maximal_invariant;
use crate::relation::FiniteRelation;

const MAX_WITNESSES: usize = 16;

/// Outcome of a single block check.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockCheck {
    pub is_block: bool,
    /// Up to 16 offending pairs (source in the block, target in the closed
    /// complement).
    pub witnesses: Vec<(usize, usize)>,
}

/// Whether no pair of `f` leads from `block` into the closure of the
/// complement of `block`.
pub fn is_attractor_block(f: &FiniteRelation, block: &CellSet) -> BlockCheck {
    let ccb = block.closure_of_complement();
    let mut witnesses = Vec::new();
    for s in block.iter() {
        if witnesses.len() == MAX_WITNESSES {
            break;
        }
        let escapes = f
            .row_blocks(s)
            .iter()
            .zip(ccb.blocks())
            .any(|(r, c)| r & c != 0);
        if escapes {
            for t in f.row_targets(s) {
                if ccb.contains(t) {
                    witnesses.push((s, t));
                    if witnesses.len() == MAX_WITNESSES {
                        break;
                    }
                }
            }
        }
    }
    BlockCheck { is_block: witnesses.is_empty(), witnesses }
}

/// Options for [`certify_block_multiflow`].
#[derive(Debug, Clone)]
pub struct CertifyOptions {
    /// Spot checks drawn beyond the threshold after a dense pass succeeds.
    pub spot_checks: usize,
    /// Spot times are drawn uniformly from `(T, factor * T]`.
    pub spot_horizon_factor: f64,
    pub seed: u64,
    /// Iteration cap for the omega computation of the attractor.
    pub max_omega_iterations: usize,
}

impl Default for CertifyOptions {
    fn default() -> Self {
        CertifyOptions {
            spot_checks: 8,
            spot_horizon_factor: 4.0,
            seed: 0,
            max_omega_iterations: 4096,
        }
    }
}

/// Certificate that a cell set is an attractor block across sampled times.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockCertificate {
    pub block: CellSet,
    /// Sampled times in `(0, T]` at which the block condition was checked.
    pub relation_times: Vec<f64>,
    pub is_block: bool,
    /// Failing `(time, source, target)` triples, at most 16.
    pub witnesses: Vec<(f64, usize, usize)>,
    /// Omega limit set of the block at the representative time (the
    /// largest sample not exceeding the threshold).
    pub attractor: CellSet,
    pub representative_time: f64,
    /// Least sampled time from which the strict-confinement check holds
    /// through the horizon.
    pub strictly_confining_from: Option<f64>,
    /// Times spot-checked beyond the threshold (empty unless the dense
    /// pass succeeded).
    pub spot_times: Vec<f64>,
    /// Spot checks that failed. A nonempty list contradicts the
    /// forward-time reduction theorem and points at an unsound evaluator.
    pub spot_failures: Vec<f64>,
}

fn block_check_at_time(
    model: &MultiflowModel,
    space: &Arc<GridSpace>,
    block: &CellSet,
    ccb: &CellSet,
    t: f64,
) -> Result<Vec<(usize, usize)>> {
    let mut witnesses = Vec::new();
    for s in block.iter() {
        for bx in model.images(t, &space.box_of(s))? {
            let Some(range) = space.cover_outer(&bx) else { continue };
            range.for_each(space, |c| {
                if ccb.contains(c) && witnesses.len() < MAX_WITNESSES {
                    witnesses.push((s, c));
                }
            });
        }
        if witnesses.len() >= MAX_WITNESSES {
            break;
        }
    }
    Ok(witnesses)
}

/// Check the block condition at every sampled time in `(0, T]`; if all
/// pass, spot-check beyond `T` (justified by the forward-time reduction of
/// blocks) and compute the attractor as the omega limit set of the block
/// at the representative time.
pub fn certify_block_multiflow(
    model: &MultiflowModel,
    space: &Arc<GridSpace>,
    block: &CellSet,
    times: &TimeGrid,
    opts: &CertifyOptions,
) -> Result<BlockCertificate> {
    let ccb = block.closure_of_complement();
    let dense = times.samples_to_horizon();
    let horizon = times.horizon();

    let mut witnesses = Vec::new();
    let mut strict_ok = Vec::with_capacity(dense.len());
    for &t in dense {
        let w = block_check_at_time(model, space, block, &ccb, t)?;
        strict_ok.push(w.is_empty());
        for (s, c) in w {
            if witnesses.len() < MAX_WITNESSES {
                witnesses.push((t, s, c));
            }
        }
    }
    let is_block = witnesses.is_empty();

    let mut strictly_confining_from = None;
    for (i, &t) in dense.iter().enumerate().rev() {
        if strict_ok[i] {
            strictly_confining_from = Some(t);
        } else {
            break;
        }
    }

    let representative_time = *dense.last().unwrap();
    let attractor =
        omega_fixed_time(model, space, block, representative_time, opts.max_omega_iterations)?
            .omega;

    let mut spot_times = Vec::new();
    let mut spot_failures = Vec::new();
    if is_block && opts.spot_checks > 0 {
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        for _ in 0..opts.spot_checks {
            let t = horizon * (1.0 + rng.gen::<f64>() * (opts.spot_horizon_factor - 1.0));
            spot_times.push(t);
        }
        spot_times.sort_by(f64::total_cmp);
        for &t in &spot_times {
            if !block_check_at_time(model, space, block, &ccb, t)?.is_empty() {
                spot_failures.push(t);
            }
        }
    }

    Ok(BlockCertificate {
        block: block.clone(),
        relation_times: dense.to_vec(),
        is_block,
        witnesses,
        attractor,
        representative_time,
        strictly_confining_from,
        spot_times,
        spot_failures,
    })
}

/// Failure modes of [`find_block_in_neighborhood`].
#[derive(Debug, Clone)]
pub enum FindBlockError {
    Precondition(Error),
    /// The iteration budget ran out (or the candidate stalled) before the
    /// strict-confinement check passed.
    BudgetExhausted {
        iterations: usize,
        last_candidate: CellSet,
        /// Failing `(time, source, target)` triples of the last candidate.
        witnesses: Vec<(f64, usize, usize)>,
    },
}

impl std::fmt::Display for FindBlockError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            FindBlockError::Precondition(e) => write!(f, "{e}"),
            FindBlockError::BudgetExhausted { iterations, .. } => {
                write!(f, "no strictly confining candidate within {iterations} iterations")
            }
        }
    }
}

impl std::error::Error for FindBlockError {}

/// Shrink `neighborhood` toward an attractor block around the invariant
/// set `attractor` by repeatedly intersecting with the sampled
/// forward-image hull, keeping the attractor pinned inside. Succeeds as
/// soon as the candidate is strictly confining at all sampled times in
/// `(0, T]`; a budget converts the non-constructive finite-intersection
/// argument into a decidable procedure with an honest failure mode.
pub fn find_block_in_neighborhood(
    model: &MultiflowModel,
    space: &Arc<GridSpace>,
    attractor: &CellSet,
    neighborhood: &CellSet,
    times: &TimeGrid,
    budget: usize,
    opts: &CertifyOptions,
) -> std::result::Result<BlockCertificate, FindBlockError> {
    let pre = |msg: String| FindBlockError::Precondition(Error::Precondition(msg));
    if attractor.is_empty() {
        return Err(pre("attractor set is empty".into()));
    }
    if !attractor.is_subset(&neighborhood.interior()) {
        return Err(pre("attractor must lie in the interior of the neighborhood".into()));
    }
    let dense = times.samples_to_horizon();
    for &t in dense {
        let img = image_of_set(model, space, t, attractor)
            .map_err(FindBlockError::Precondition)?;
        if img != *attractor {
            return Err(pre(format!("attractor is not invariant at sampled time {t}")));
        }
    }

    let mut candidate = neighborhood.clone();
    let mut last_witnesses = Vec::new();
    for iteration in 0..budget {
        // Strict confinement of the candidate at all sampled times in (0, T].
        let ccb = candidate.closure_of_complement();
        last_witnesses.clear();
        let mut strict = true;
        for &t in dense {
            let w = block_check_at_time(model, space, &candidate, &ccb, t)
                .map_err(FindBlockError::Precondition)?;
            if !w.is_empty() {
                strict = false;
                for (s, c) in w {
                    if last_witnesses.len() < MAX_WITNESSES {
                        last_witnesses.push((t, s, c));
                    }
                }
            }
        }
        if strict && attractor.is_subset(&candidate.interior()) {
            return certify_block_multiflow(model, space, &candidate, times, opts)
                .map_err(FindBlockError::Precondition);
        }

        // Intersect with the sampled forward-image hull, keeping the
        // attractor inside.
        let mut hull: Option<CellSet> = None;
        for &t in dense {
            let img = image_of_set(model, space, t, &candidate)
                .map_err(FindBlockError::Precondition)?;
            hull = Some(match hull {
                None => img,
                Some(h) => h.intersection(&img),
            });
        }
        let next = candidate.intersection(&hull.expect("time grid is nonempty").union(attractor));
        if next == candidate {
            return Err(FindBlockError::BudgetExhausted {
                iterations: iteration + 1,
                last_candidate: candidate,
                witnesses: last_witnesses,
            });
        }
        candidate = next;
    }
    Err(FindBlockError::BudgetExhausted {
        iterations: budget,
        last_candidate: candidate,
        witnesses: last_witnesses,
    })
}

/// Whether `attractor` is the maximal invariant subset of `window` for the
/// sampled relation at every sampled time.
pub fn maximality_check(
    model: &MultiflowModel,
    space: &Arc<GridSpace>,
    attractor: &CellSet,
    window: &CellSet,
    times: &TimeGrid,
) -> Result<bool> {
    if !attractor.is_subset(window) {
        return Err(Error::Precondition("attractor must lie inside the window".into()));
    }
    for &t in times.samples() {
        let f = sample_relation(model, space, t)?;
        if maximal_invariant(&f, window) != *attractor {
            return Ok(false);
        }
    }
    Ok(true)
}
