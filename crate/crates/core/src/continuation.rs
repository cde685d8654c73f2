//! Robustness of attractor blocks under relation perturbation.
//!
//! The certified radius is the exact product-metric distance from the
//! relation's pair boxes to `B x closure(complement B)`. Any relation
//! within one-sided distance less than that radius of `f` keeps `B` an
//! attractor block. The naive image-gap radius (distance from the image of
//! the block to the closed complement) is NOT sound; the two are reported
//! side by side so the distinction stays visible.

use crate::cellset::{distance_field, set_distance, CellSet};
use crate::error::{Error, Result};
use crate::geom::{box_distance, combine_product, AxisBox, Metric};
use crate::relation::FiniteRelation;

/// Robustness radii of an attractor block.
#[derive(Debug, Clone, PartialEq)]
pub struct RobustnessReport {
    /// Exact product-metric distance from the relation to
    /// `B x closure(complement B)`; infinite when the complement is empty
    /// or the relation has no pairs.
    pub delta_graph: f64,
    /// Distance from the image of the block to the closed complement (the
    /// naive candidate radius, reported for comparison only).
    pub delta_image: f64,
    /// `(epsilon, still a block)` rows filled by [`epsilon_sweep`].
    pub epsilon_tested: Vec<(f64, bool)>,
    pub metric: Metric,
}

/// Compute both robustness radii of a certified block.
pub fn robustness_radius(
    f: &FiniteRelation,
    block: &CellSet,
    metric: Metric,
) -> Result<RobustnessReport> {
    if !crate::attractor::is_attractor_block(f, block).is_block {
        return Err(Error::NotABlock);
    }
    let space = f.space();
    let ccb = block.closure_of_complement();

    let delta_image = match set_distance(&f.image(block), &ccb, metric) {
        Ok(d) => d,
        Err(Error::EmptyOperand) => f64::INFINITY,
        Err(e) => return Err(e),
    };

    let delta_graph = if ccb.is_empty() || block.is_empty() || f.is_empty() {
        f64::INFINITY
    } else {
        // d(pair, B x ccB) factorizes into per-side distances to the box
        // unions, so two distance fields replace the quadratic pair scan.
        let to_block = distance_field(space, block, metric);
        let to_ccb = distance_field(space, &ccb, metric);
        let mut best = f64::INFINITY;
        for (s, t) in f.pairs() {
            let d = combine_product(metric, to_block[s], to_ccb[t]);
            if d < best {
                best = d;
            }
        }
        best
    };

    Ok(RobustnessReport { delta_graph, delta_image, epsilon_tested: Vec::new(), metric })
}

/// For each epsilon, fatten the relation and re-check the block condition.
pub fn epsilon_sweep(
    f: &FiniteRelation,
    block: &CellSet,
    metric: Metric,
    epsilons: &[f64],
) -> Vec<(f64, bool)> {
    epsilons
        .iter()
        .map(|&eps| {
            let g = fatten(f, eps, metric);
            (eps, crate::attractor::is_attractor_block(&g, block).is_block)
        })
        .collect()
}

/// The relation swollen to every cell pair whose product-box center lies
/// within product-metric distance `epsilon` of some pair box of `f`.
/// Contains `f`, is monotone in `epsilon`, and is the identity below half
/// a cell pitch (a neighboring cell's center sits half a pitch from the
/// pair box, so sub-cell radii add nothing at cell resolution).
pub fn fatten(f: &FiniteRelation, epsilon: f64, metric: Metric) -> FiniteRelation {
    assert!(epsilon > 0.0, "fattening radius must be positive");
    let space = f.space();
    let n = space.ncells();
    let bpr = n.div_ceil(64);
    let mut rows = vec![0u64; bpr * n];
    for (s, t) in f.pairs() {
        rows[s * bpr + t / 64] |= 1 << (t % 64);
    }
    // Candidates come from a per-axis window around each pair (a superset
    // of the metric ball); each candidate then gets an exact distance check
    // from its center to the pair box.
    let pitch = space.max_cell_width();
    for (s, t) in f.pairs() {
        let sb = space.box_of(s);
        let tb = space.box_of(t);
        let Some(src_win) = space.cover_closed(&sb.dilate(epsilon + pitch)) else { continue };
        let Some(tgt_win) = space.cover_closed(&tb.dilate(epsilon + pitch)) else { continue };
        let mut sources = Vec::new();
        src_win.for_each(space, |u| sources.push(u));
        let mut targets = Vec::new();
        tgt_win.for_each(space, |v| targets.push(v));
        let tgt_dists: Vec<f64> = targets
            .iter()
            .map(|&v| box_distance(metric, &AxisBox::point(&space.center_of(v)), &tb))
            .collect();
        for &u in &sources {
            let ds = box_distance(metric, &AxisBox::point(&space.center_of(u)), &sb);
            if ds > epsilon {
                continue;
            }
            let row = &mut rows[u * bpr..(u + 1) * bpr];
            for (&v, &dt) in targets.iter().zip(&tgt_dists) {
                if row[v / 64] >> (v % 64) & 1 == 1 {
                    continue;
                }
                if combine_product(metric, ds, dt) <= epsilon {
                    row[v / 64] |= 1 << (v % 64);
                }
            }
        }
    }
    FiniteRelation::from_raw_rows(space, rows)
}

/// One-sided Hausdorff functional: the largest product-metric distance from
/// a pair of `g` to the pairs of `f`. Zero when `g` is a sub-relation of
/// `f` at box level; infinite when `f` is empty but `g` is not.
pub fn one_sided_hausdorff(g: &FiniteRelation, f: &FiniteRelation, metric: Metric) -> f64 {
    assert!(g.space() == f.space(), "relations live on different grid spaces");
    if g.is_empty() {
        return 0.0;
    }
    if f.is_empty() {
        return f64::INFINITY;
    }
    let space = g.space();
    let f_pairs: Vec<(AxisBox, AxisBox)> =
        f.pairs().map(|(s, t)| (space.box_of(s), space.box_of(t))).collect();
    let mut worst = 0.0f64;
    for (s, t) in g.pairs() {
        if f.contains_pair(s, t) {
            continue;
        }
        let sb = space.box_of(s);
        let tb = space.box_of(t);
        let mut best = f64::INFINITY;
        for (fs, ft) in &f_pairs {
            let d = combine_product(
                metric,
                box_distance(metric, &sb, fs),
                box_distance(metric, &tb, ft),
            );
            if d < best {
                best = d;
                if best <= worst {
                    break;
                }
            }
        }
        if best > worst {
            worst = best;
        }
    }
    worst
}

/// Verdict of a continuation check.
#[derive(Debug, Clone, PartialEq)]
pub enum ContinuationVerdict {
    /// `epsilon < delta_graph`: the block transfers by the perturbation
    /// theorem (and the direct check is asserted as a guard).
    Guaranteed,
    /// The radius did not cover the perturbation but the direct check
    /// still passes.
    UnguaranteedPass,
    /// The perturbed relation crosses into `B x closure(complement B)`.
    Fail { witnesses: Vec<(usize, usize)> },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ContinuationReport {
    /// One-sided distance from `g` to `f`.
    pub epsilon: f64,
    pub delta_graph: f64,
    pub metric: Metric,
    pub verdict: ContinuationVerdict,
}

/// Decide whether `block` certifiably transfers from `f` to the nearby
/// relation `g`: compare the one-sided distance against the robustness
/// radius, falling back to the direct block check when the radius does not
/// apply.
pub fn continuation_check(
    f: &FiniteRelation,
    block: &CellSet,
    g: &FiniteRelation,
    metric: Metric,
) -> Result<ContinuationReport> {
    let radii = robustness_radius(f, block, metric)?;
    let epsilon = one_sided_hausdorff(g, f, metric);
    let verdict = if epsilon < radii.delta_graph {
        let check = crate::attractor::is_attractor_block(g, block);
        assert!(
            check.is_block,
            "perturbation theorem violated: eps {epsilon} < delta {} yet the block fails",
            radii.delta_graph
        );
        ContinuationVerdict::Guaranteed
    } else {
        let check = crate::attractor::is_attractor_block(g, block);
        if check.is_block {
            ContinuationVerdict::UnguaranteedPass
        } else {
            ContinuationVerdict::Fail { witnesses: check.witnesses }
        }
    };
    Ok(ContinuationReport { epsilon, delta_graph: radii.delta_graph, metric, verdict })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::GridSpace;
    use std::sync::Arc;

    /// The two-segment relation with the off-block spike at x = 2 + alpha.
    fn segment_relation(space: &Arc<GridSpace>, alpha: f64) -> FiniteRelation {
        FiniteRelation::from_box_pairs(
            space,
            &[
                (
                    AxisBox::from_intervals(&[(0.8, 2.0 + alpha)]),
                    AxisBox::from_intervals(&[(1.5, 1.5)]),
                ),
                (
                    AxisBox::from_intervals(&[(2.0 + alpha, 2.0 + alpha)]),
                    AxisBox::from_intervals(&[(1.5, 3.0)]),
                ),
            ],
        )
    }

    fn unit_block(space: &Arc<GridSpace>) -> CellSet {
        CellSet::from_fn(space, |c| {
            let b = space.box_of(c);
            b.lo[0] >= 1.0 - 1e-12 && b.hi[0] <= 2.0 + 1e-12
        })
    }

    #[test]
    fn segment_relation_radii() {
        let space = GridSpace::line(0.0, 3.0, 300).unwrap();
        let f = segment_relation(&space, 0.1);
        let b = unit_block(&space);
        let rep = robustness_radius(&f, &b, Metric::Euclidean).unwrap();
        // Discretization can eat up to one cell per side, which is exactly
        // the stated tolerance; the 1e-9 absorbs float dust at that edge.
        assert!((rep.delta_image - 0.5).abs() <= 0.02 + 1e-9, "delta_image {}", rep.delta_image);
        assert!((rep.delta_graph - 0.1).abs() <= 0.02 + 1e-9, "delta_graph {}", rep.delta_graph);
        assert!(rep.delta_graph < rep.delta_image);
    }

    #[test]
    fn graph_radius_matches_brute_force_pair_scan() {
        // A relation staying deep inside the block: the radius comes from
        // box gaps alone and must agree with the quadratic pair scan.
        let space = GridSpace::line(0.0, 3.0, 60).unwrap();
        let f = FiniteRelation::from_pairs(&space, [(25, 30), (28, 26), (31, 29)]).unwrap();
        let b = CellSet::from_fn(&space, |c| (20..40).contains(&c));
        for metric in [Metric::Euclidean, Metric::Chebyshev] {
            let rep = robustness_radius(&f, &b, metric).unwrap();
            let ccb = b.closure_of_complement();
            let mut brute = f64::INFINITY;
            for (s, t) in f.pairs() {
                for cb in b.iter() {
                    for cc in ccb.iter() {
                        let d = crate::geom::product_distance(
                            metric,
                            &space.box_of(s),
                            &space.box_of(t),
                            &space.box_of(cb),
                            &space.box_of(cc),
                        );
                        brute = brute.min(d);
                    }
                }
            }
            assert!(brute > 0.0);
            assert!((rep.delta_graph - brute).abs() < 1e-12, "{metric:?}");
        }
    }

    #[test]
    fn full_space_block_has_infinite_radius() {
        let space = GridSpace::line(0.0, 3.0, 10).unwrap();
        let f = FiniteRelation::from_pairs(&space, [(0, 5), (9, 2)]).unwrap();
        let rep = robustness_radius(&f, &CellSet::full(&space), Metric::Euclidean).unwrap();
        assert!(rep.delta_graph.is_infinite());
    }

    #[test]
    fn not_a_block_is_rejected() {
        let space = GridSpace::line(0.0, 3.0, 3).unwrap();
        let id = FiniteRelation::identity(&space);
        let b = CellSet::from_cells(&space, [0, 1]).unwrap();
        assert!(matches!(
            robustness_radius(&id, &b, Metric::Euclidean),
            Err(Error::NotABlock)
        ));
    }

    #[test]
    fn sub_cell_fattening_is_identity_and_monotone() {
        let space = GridSpace::line(0.0, 3.0, 30).unwrap();
        let f = FiniteRelation::from_pairs(&space, [(3, 4), (10, 20)]).unwrap();
        let g = fatten(&f, 0.04, Metric::Euclidean); // below half the 0.1 pitch
        assert_eq!(g, f);
        let g1 = fatten(&f, 0.25, Metric::Euclidean);
        let g2 = fatten(&f, 0.5, Metric::Euclidean);
        assert!(f.is_subrelation_of(&g1));
        assert!(g1.is_subrelation_of(&g2));
        let e = FiniteRelation::empty(&space);
        assert!(fatten(&e, 1.0, Metric::Euclidean).is_empty());
    }

    #[test]
    fn hausdorff_basics() {
        let space = GridSpace::line(0.0, 3.0, 30).unwrap();
        let f = FiniteRelation::from_pairs(&space, [(3, 4), (10, 20)]).unwrap();
        assert_eq!(one_sided_hausdorff(&f, &f, Metric::Euclidean), 0.0);
        let g = fatten(&f, 0.35, Metric::Euclidean);
        let d = one_sided_hausdorff(&g, &f, Metric::Euclidean);
        assert!(d > 0.0 && d <= 0.35, "d = {d}");
        // One far pair dominates; its distance is the min over f's pairs.
        let far = f.union(&FiniteRelation::from_pairs(&space, [(3, 29)]).unwrap());
        let d = one_sided_hausdorff(&far, &f, Metric::Euclidean);
        let expected = f
            .pairs()
            .map(|(s, t)| {
                crate::geom::product_distance(
                    Metric::Euclidean,
                    &space.box_of(3),
                    &space.box_of(29),
                    &space.box_of(s),
                    &space.box_of(t),
                )
            })
            .fold(f64::INFINITY, f64::min);
        assert!(expected > 0.0);
        assert!((d - expected).abs() < 1e-12);
        // Empty comparisons.
        let e = FiniteRelation::empty(&space);
        assert_eq!(one_sided_hausdorff(&e, &f, Metric::Euclidean), 0.0);
        assert!(one_sided_hausdorff(&f, &e, Metric::Euclidean).is_infinite());
    }

    #[test]
    fn continuation_verdicts_on_the_segment_relation() {
        let space = GridSpace::line(0.0, 3.0, 300).unwrap();
        let f = segment_relation(&space, 0.1);
        let b = unit_block(&space);
        let g = fatten(&f, 0.08, Metric::Euclidean);
        let rep = continuation_check(&f, &b, &g, Metric::Euclidean).unwrap();
        assert_eq!(rep.verdict, ContinuationVerdict::Guaranteed);

        let g = fatten(&f, 0.15, Metric::Euclidean);
        let rep = continuation_check(&f, &b, &g, Metric::Euclidean).unwrap();
        assert!(matches!(rep.verdict, ContinuationVerdict::Fail { .. }));

        let rep = continuation_check(&f, &b, &f, Metric::Euclidean).unwrap();
        assert_eq!(rep.verdict, ContinuationVerdict::Guaranteed);
        assert_eq!(rep.epsilon, 0.0);
    }
}
