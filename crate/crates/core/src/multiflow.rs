//! Continuous-time layer: sampling fixed-time relations from a model,
//! semigroup audits, multiflow-level confinement, and multiflow omega
//! limit sets.
//!
//! Continuous time is handled on a `TimeGrid`: every "for all t" claim
//! downstream means "for all sampled t", and reports carry the sampled
//! times so the caveat stays auditable.

use std::sync::Arc;

use rayon::prelude::*;

use crate::cellset::CellSet;
use crate::error::{Error, Result};
use crate::grid::GridSpace;
use crate::models::MultiflowModel;
use crate::relation::FiniteRelation;

/// Strictly increasing positive sample times, with an optional threshold
/// marking where "eventually" verdicts are keyed.
#[derive(Debug, Clone, PartialEq)]
pub struct TimeGrid {
    samples: Vec<f64>,
    threshold: Option<f64>,
}

impl TimeGrid {
    pub fn new(samples: Vec<f64>, threshold: Option<f64>) -> Result<TimeGrid> {
        if samples.is_empty() {
            return Err(Error::InvalidTimeGrid("no sample times".into()));
        }
        if samples[0] <= 0.0 || samples.iter().any(|t| !t.is_finite()) {
            return Err(Error::InvalidTimeGrid("sample times must be finite and positive".into()));
        }
        if samples.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidTimeGrid("sample times must be strictly increasing".into()));
        }
        if let Some(th) = threshold {
            if !(th >= samples[0]) || th > *samples.last().unwrap() {
                return Err(Error::InvalidTimeGrid(
                    "threshold must lie between the first and last sample".into(),
                ));
            }
        }
        Ok(TimeGrid { samples, threshold })
    }

    /// `count` uniform samples `max/count, 2 max/count, ..., max`.
    pub fn uniform(count: usize, max: f64) -> Result<TimeGrid> {
        if count == 0 {
            return Err(Error::InvalidTimeGrid("no sample times".into()));
        }
        let samples = (1..=count).map(|k| k as f64 * max / count as f64).collect();
        TimeGrid::new(samples, None)
    }

    pub fn with_threshold(mut self, threshold: f64) -> Result<TimeGrid> {
        self.threshold = Some(threshold);
        TimeGrid::new(self.samples, self.threshold)
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn threshold(&self) -> Option<f64> {
        self.threshold
    }

    /// The threshold if set, otherwise the last sample.
    pub fn horizon(&self) -> f64 {
        self.threshold.unwrap_or(*self.samples.last().unwrap())
    }

    /// Samples in `(0, horizon]`.
    pub fn samples_to_horizon(&self) -> &[f64] {
        let h = self.horizon();
        let end = self.samples.partition_point(|&t| t <= h);
        &self.samples[..end]
    }
}

fn check_model_space(model: &MultiflowModel, space: &GridSpace) -> Result<()> {
    if model.dimension() != space.dimension() {
        return Err(Error::EvaluatorDomain(format!(
            "model `{}` is {}-dimensional but the grid is {}-dimensional",
            model.name(),
            model.dimension(),
            space.dimension()
        )));
    }
    Ok(())
}

/// Sample the fixed-time relation of `model` at time `t` on `space`: each
/// source cell is mapped through the evaluator and every cell meeting the
/// returned boxes (clipped to the grid) becomes a target. The result is an
/// outer approximation of the true fixed-time relation restricted to the
/// grid; image mass leaving the bounds is dropped.
pub fn sample_relation(
    model: &MultiflowModel,
    space: &Arc<GridSpace>,
    t: f64,
) -> Result<FiniteRelation> {
    check_model_space(model, space)?;
    // Probe once so evaluator-domain errors surface before the sweep.
    model.images(t, &space.box_of(0))?;
    let n = space.ncells();
    let bpr = n.div_ceil(64);
    let mut rows = vec![0u64; bpr * n];
    rows.par_chunks_mut(bpr).enumerate().for_each(|(cell, row)| {
        let boxes = model
            .images(t, &space.box_of(cell))
            .expect("evaluator failed after successful probe");
        for bx in &boxes {
            if let Some(range) = space.cover_outer(bx) {
                range.for_each(space, |c| row[c / 64] |= 1 << (c % 64));
            }
        }
    });
    Ok(FiniteRelation::from_raw_rows(space, rows))
}

/// One-step image of `set` at time `t`, computed directly from the
/// evaluator without materializing the full relation.
pub fn image_of_set(
    model: &MultiflowModel,
    space: &Arc<GridSpace>,
    t: f64,
    set: &CellSet,
) -> Result<CellSet> {
    check_model_space(model, space)?;
    let mut out = CellSet::empty(space);
    for cell in set.iter() {
        for bx in model.images(t, &space.box_of(cell))? {
            if let Some(range) = space.cover_outer(&bx) {
                range.for_each(space, |c| out.insert(c));
            }
        }
    }
    Ok(out)
}

/// Outcome of a semigroup audit at a pair of times.
#[derive(Debug, Clone, PartialEq)]
pub struct SemigroupReport {
    pub s: f64,
    pub t: f64,
    /// Whether `sample(s) . sample(t)` contains `sample(s + t)` pairwise.
    pub contains: bool,
    /// Up to 16 pairs of the direct sample missing from the composition.
    pub missing: Vec<(usize, usize)>,
    pub composed_pairs: usize,
    pub direct_pairs: usize,
    /// For exact models, how many extra pairs the composition carries over
    /// the direct sample (the cost of composing outer approximations).
    pub excess_pairs: Option<usize>,
}

/// Verify that the sampled relations compose outward: the composition of
/// two outer approximations must contain the directly sampled sum-time
/// relation. A containment failure is reported, not raised, since it
/// indicates evaluator unsoundness rather than a caller error.
pub fn check_semigroup(
    model: &MultiflowModel,
    space: &Arc<GridSpace>,
    s: f64,
    t: f64,
) -> Result<SemigroupReport> {
    if !(s > 0.0 && t > 0.0) {
        return Err(Error::EvaluatorDomain("semigroup check needs s, t > 0".into()));
    }
    let fs = sample_relation(model, space, s)?;
    let ft = sample_relation(model, space, t)?;
    let direct = sample_relation(model, space, s + t)?;
    let composed = fs.compose(&ft);
    let contains = direct.is_subrelation_of(&composed);
    let mut missing = Vec::new();
    if !contains {
        for (a, b) in direct.pairs() {
            if !composed.contains_pair(a, b) {
                missing.push((a, b));
                if missing.len() == 16 {
                    break;
                }
            }
        }
    }
    let composed_pairs = composed.pair_count();
    let direct_pairs = direct.pair_count();
    Ok(SemigroupReport {
        s,
        t,
        contains,
        missing,
        composed_pairs,
        direct_pairs,
        excess_pairs: model.is_exact().then(|| composed_pairs.saturating_sub(direct_pairs)),
    })
}

/// Confinement verdict at one sampled time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeVerdict {
    pub t: f64,
    pub confining: bool,
    pub strictly_confining: bool,
}

/// Multiflow-level confinement report over a sampled time grid.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiflowClassification {
    pub per_time: Vec<TimeVerdict>,
    pub confining_at_all_sampled: bool,
    pub strictly_confining_at_all_sampled: bool,
    /// Whether confinement holds at every sampled time at or beyond the
    /// threshold; `None` when the grid carries no threshold.
    pub eventually_confining: Option<bool>,
    pub eventually_strictly_confining: Option<bool>,
    pub threshold: Option<f64>,
    /// Sampled times at which confinement failed.
    pub confining_failures: Vec<f64>,
    pub strict_failures: Vec<f64>,
}

impl MultiflowClassification {
    /// Eventual confinement if a threshold is set, otherwise confinement at
    /// every sampled time.
    pub fn effectively_eventually_confining(&self) -> bool {
        self.eventually_confining.unwrap_or(self.confining_at_all_sampled)
    }
}

/// Evaluate confinement and strict confinement of `set` at every sampled
/// time; "eventually" verdicts are keyed to the grid threshold.
pub fn classify_multiflow(
    model: &MultiflowModel,
    space: &Arc<GridSpace>,
    set: &CellSet,
    times: &TimeGrid,
) -> Result<MultiflowClassification> {
    check_model_space(model, space)?;
    let interior = set.interior();
    let mut per_time = Vec::with_capacity(times.samples().len());
    for &t in times.samples() {
        let image = image_of_set(model, space, t, set)?;
        per_time.push(TimeVerdict {
            t,
            confining: image.is_subset(set),
            strictly_confining: image.is_subset(&interior),
        });
    }
    let confining_failures: Vec<f64> =
        per_time.iter().filter(|v| !v.confining).map(|v| v.t).collect();
    let strict_failures: Vec<f64> =
        per_time.iter().filter(|v| !v.strictly_confining).map(|v| v.t).collect();
    let at_or_beyond = |th: f64, pred: &dyn Fn(&TimeVerdict) -> bool| {
        per_time.iter().filter(|v| v.t >= th).all(pred)
    };
    Ok(MultiflowClassification {
        confining_at_all_sampled: confining_failures.is_empty(),
        strictly_confining_at_all_sampled: strict_failures.is_empty(),
        eventually_confining: times.threshold().map(|th| at_or_beyond(th, &|v| v.confining)),
        eventually_strictly_confining: times
            .threshold()
            .map(|th| at_or_beyond(th, &|v| v.strictly_confining)),
        threshold: times.threshold(),
        per_time,
        confining_failures,
        strict_failures,
    })
}

/// Omega limit set of `start` under one fixed-time relation of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedTimeOmega {
    pub t: f64,
    pub omega: CellSet,
    pub transient_length: usize,
    pub cycle_length: usize,
    /// False when the iterate sequence hit the iteration cap without
    /// repeating; the reported set is then the union of the tail half.
    pub converged: bool,
}

/// Compute the omega limit set of `start` under the fixed-time relation at
/// `t` by sampling the k-th iterate directly from the evaluator at time
/// `k t` (the semigroup law makes that the k-fold composition), which keeps
/// each iterate one cover away from the closed form instead of compounding
/// cover slack through repeated grid composition.
pub fn omega_fixed_time(
    model: &MultiflowModel,
    space: &Arc<GridSpace>,
    start: &CellSet,
    t: f64,
    max_iterations: usize,
) -> Result<FixedTimeOmega> {
    check_model_space(model, space)?;
    let mut seen: Vec<CellSet> = vec![start.clone()];
    for k in 1..=max_iterations {
        let next = image_of_set(model, space, k as f64 * t, start)?;
        if let Some(j) = seen.iter().position(|s| *s == next) {
            let cycle = seen.len() - j;
            let mut omega = CellSet::empty(space);
            for s in &seen[j..] {
                omega = omega.union(s);
            }
            return Ok(FixedTimeOmega {
                t,
                omega,
                transient_length: j,
                cycle_length: cycle,
                converged: true,
            });
        }
        seen.push(next);
    }
    // No exact repeat within the cap: report the union of the tail half.
    let half = seen.len() / 2;
    let mut omega = CellSet::empty(space);
    for s in &seen[half..] {
        omega = omega.union(s);
    }
    Ok(FixedTimeOmega {
        t,
        omega,
        transient_length: half,
        cycle_length: seen.len() - half,
        converged: false,
    })
}

/// Multiflow omega limit report.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiflowOmegaReport {
    pub classification: MultiflowClassification,
    /// Per sampled time, the omega limit set of that fixed-time relation.
    pub per_time: Vec<FixedTimeOmega>,
    /// Whether all per-time omega sets coincide.
    pub per_time_equal: bool,
    /// The common per-time omega set, populated when the start set is
    /// (eventually) confining over the sampled grid and the per-time sets
    /// agree as the theory then demands.
    pub common: Option<CellSet>,
    /// Sampled stand-in for the multiflow strict omega limit set: the
    /// intersection over leading start indices of unions of later
    /// single-step sampled images.
    pub strict_multiflow: CellSet,
    /// Number of tail-start indices intersected (tails shorter than half
    /// the grid are not used; a thin tail would under-represent recurrence).
    pub tail_starts: usize,
}

/// Omega limit sets of `start` over a sampled time grid. If `start` is
/// eventually confining (per [`classify_multiflow`]), the per-time omega
/// sets must agree and the common set is returned; otherwise the report
/// flags the disagreement and carries the per-time sets and the sampled
/// multiflow strict omega separately.
pub fn omega_multiflow(
    model: &MultiflowModel,
    space: &Arc<GridSpace>,
    start: &CellSet,
    times: &TimeGrid,
    max_iterations: usize,
) -> Result<MultiflowOmegaReport> {
    let classification = classify_multiflow(model, space, start, times)?;

    let mut per_time = Vec::with_capacity(times.samples().len());
    for &t in times.samples() {
        per_time.push(omega_fixed_time(model, space, start, t, max_iterations)?);
    }
    let per_time_equal = per_time.windows(2).all(|w| w[0].omega == w[1].omega);
    let common = (classification.effectively_eventually_confining() && per_time_equal)
        .then(|| per_time[0].omega.clone());

    // Single-step sampled images, tail unions, intersection over the
    // leading half of the start indices.
    let images: Vec<CellSet> = times
        .samples()
        .iter()
        .map(|&t| image_of_set(model, space, t, start))
        .collect::<Result<_>>()?;
    let tail_starts = images.len() / 2 + 1;
    let mut tails: Vec<CellSet> = Vec::with_capacity(images.len());
    let mut acc = CellSet::empty(space);
    for img in images.iter().rev() {
        acc = acc.union(img);
        tails.push(acc.clone());
    }
    tails.reverse();
    let mut strict_multiflow = tails[0].clone();
    for tail in tails.iter().take(tail_starts) {
        strict_multiflow = strict_multiflow.intersection(tail);
    }

    Ok(MultiflowOmegaReport {
        classification,
        per_time,
        per_time_equal,
        common,
        strict_multiflow,
        tail_starts,
    })
}
