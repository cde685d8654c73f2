//! Acceptance suite: one test per criterion, each printing a pass/fail line
//! and holding the stated time budget. Expected values come from worked
//! examples (exact, desk scale) plus independent oracles computed here.

use std::panic::{catch_unwind, AssertUnwindSafe};
use std::sync::Arc;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use multiflow::{
    certify_block_multiflow, check_semigroup, classify_multiflow, continuation_check,
    distance_field, fatten, is_attractor_block, maximal_invariant, omega_fixed_time,
    omega_multiflow, robustness_radius, sample_relation, strict_omega, AxisBox, CellSet,
    CertifyOptions, ContinuationVerdict, CoverMode, FiniteRelation, GridSpace, Metric,
    MultiflowModel, Region, TimeGrid,
};

/// Criteria hold individual wall-clock budgets, so they must not contend
/// with each other under the parallel test harness.
static SERIAL: std::sync::Mutex<()> = std::sync::Mutex::new(());

fn run_criterion(number: u32, name: &str, budget: Duration, body: impl FnOnce()) {
    let _guard = SERIAL.lock().unwrap_or_else(std::sync::PoisonError::into_inner);
    let t0 = Instant::now();
    let outcome = catch_unwind(AssertUnwindSafe(body));
    let elapsed = t0.elapsed();
    match outcome {
        Ok(()) => {
            println!(
                "acceptance criterion {number:2} ({name}): PASS in {elapsed:.2?} (budget {budget:.0?})"
            );
            assert!(
                elapsed <= budget,
                "criterion {number} exceeded its budget: {elapsed:.2?} > {budget:.2?}"
            );
        }
        Err(cause) => {
            println!("acceptance criterion {number:2} ({name}): FAIL in {elapsed:.2?}");
            std::panic::resume_unwind(cause);
        }
    }
}

fn line(n: usize) -> Arc<GridSpace> {
    GridSpace::line(0.0, n as f64, n).unwrap()
}

fn mask_set(g: &Arc<GridSpace>, mask: u64) -> CellSet {
    CellSet::from_fn(g, |c| mask >> c & 1 == 1)
}

fn set_mask(s: &CellSet) -> u64 {
    s.iter().fold(0u64, |acc, c| acc | 1 << c)
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e3779b97f4a7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d049bb133111eb);
    x ^ (x >> 31)
}

// ---------------------------------------------------------------------------
// 1. Relation algebra golden tests (exact set equality, < 1 ms each).
// ---------------------------------------------------------------------------

#[test]
fn criterion_01_relation_algebra_golden() {
    run_criterion(1, "relation algebra golden tests", Duration::from_millis(500), || {
        // Warm the tiny spaces outside the timed sections.
        let g3 = line(3);
        let g2 = line(2);

        // Image of an intersection is strictly smaller than the
        // intersection of images: f(1)={1,2}, f(2)={}, f(3)={2,3}.
        let t0 = Instant::now();
        let f = FiniteRelation::from_pairs(&g3, [(0, 0), (0, 1), (2, 1), (2, 2)]).unwrap();
        let a = CellSet::from_cells(&g3, [0, 1]).unwrap();
        let a2 = CellSet::from_cells(&g3, [1, 2]).unwrap();
        assert!(f.image(&a.intersection(&a2)).is_empty());
        assert_eq!(f.image(&a).intersection(&f.image(&a2)).to_sorted_vec(), vec![1]);
        assert!(t0.elapsed() < Duration::from_millis(1), "intersection example too slow");

        // Inverse image breaks unions, the transpose does not, and the
        // complement law ties them together.
        let t0 = Instant::now();
        let f = FiniteRelation::from_pairs(&g2, [(0, 0), (0, 1), (1, 0)]).unwrap();
        let s0 = CellSet::from_cells(&g2, [0]).unwrap();
        let s1 = CellSet::from_cells(&g2, [1]).unwrap();
        assert_eq!(f.inverse_image(&s0.union(&s1)), CellSet::full(&g2));
        assert_eq!(
            f.inverse_image(&s0).union(&f.inverse_image(&s1)).to_sorted_vec(),
            vec![1]
        );
        assert_eq!(f.transpose_image(&s0.union(&s1)), CellSet::full(&g2));
        for mask in 0u64..4 {
            let s = mask_set(&g2, mask);
            assert_eq!(f.transpose_image(&s).complement(), f.inverse_image(&s.complement()));
        }
        assert!(t0.elapsed() < Duration::from_millis(1), "inverse-image example too slow");

        // Stream {1} -> {1,2} -> {1,2,3}.
        let t0 = Instant::now();
        let f = FiniteRelation::from_pairs(&g3, [(0, 0), (0, 1), (1, 0), (1, 2), (2, 2)]).unwrap();
        let s = CellSet::from_cells(&g3, [0]).unwrap();
        let s1 = f.image(&s);
        assert_eq!(s1.to_sorted_vec(), vec![0, 1]);
        assert_eq!(f.image(&s1).to_sorted_vec(), vec![0, 1, 2]);
        assert_eq!(f.iterate(2).image(&s).to_sorted_vec(), vec![0, 1, 2]);
        assert!(t0.elapsed() < Duration::from_millis(1), "stream example too slow");
    });
}

// ---------------------------------------------------------------------------
// 2. Omega correctness: golden example, exhaustive <=5 cells, 1000 random
//    relations on <=10 cells, f(omega) = omega throughout. < 10 s.
// ---------------------------------------------------------------------------

fn image_mask(rows: &[u64], s: u64) -> u64 {
    let mut out = 0u64;
    let mut bits = s;
    while bits != 0 {
        let i = bits.trailing_zeros() as usize;
        out |= rows[i];
        bits &= bits - 1;
    }
    out
}

/// Independent oracle: evaluate the nested-tail definition
/// `intersection over m of (union of f^k(S) for k >= m)` by direct
/// unrolling. The tail unions are nested downward in m and stabilize once
/// m passes the transient, which is at most 2^n; the intersection is
/// therefore exactly the union of iterates 2^n through 2 * 2^n. The image
/// function is memoized over all subsets (`table[m & (m-1)]` strips the
/// lowest bit, so each entry is one union away from a previous one).
fn omega_oracle(n: usize, rows: &[u64], start: u64, scratch: &mut Vec<u64>) -> u64 {
    let cap = 1usize << n;
    if scratch.len() != cap {
        scratch.resize(cap, 0);
    }
    let table = &mut scratch[..];
    table[0] = 0;
    for m in 1..cap {
        table[m] = table[m & (m - 1)] | rows[m.trailing_zeros() as usize];
    }
    let mut cur = start;
    for _ in 0..cap {
        cur = table[cur as usize];
    }
    let mut acc = 0u64;
    for _ in cap..=2 * cap {
        acc |= cur;
        cur = table[cur as usize];
    }
    acc
}

fn check_omega_against_oracle(
    g: &Arc<GridSpace>,
    n: usize,
    rows: &[u64],
    start_mask: u64,
    start: &mut CellSet,
    scratch: &mut Vec<u64>,
) {
    let f = FiniteRelation::from_row_masks(g, rows).unwrap();
    start.clear();
    for c in (0..n).filter(|c| start_mask >> c & 1 == 1) {
        start.insert(c);
    }
    let rep = strict_omega(&f, start);
    let got = set_mask(&rep.strict_omega);
    let expect = omega_oracle(n, rows, start_mask, scratch);
    assert_eq!(got, expect, "n={n} rows={rows:?} start={start_mask:#x}");
    assert!(rep.agree);
    // Invariance, checked with the oracle's own image.
    assert_eq!(image_mask(rows, got), got, "omega not invariant");
}

#[test]
fn criterion_02_omega_correctness() {
    run_criterion(2, "omega correctness vs unrolled oracle", Duration::from_secs(10), || {
        // Golden: omega({a, b}) = {c, d, e} for the 5-point map.
        let g5 = line(5);
        let f = FiniteRelation::from_pairs(&g5, [(0, 1), (1, 2), (2, 3), (3, 4), (4, 2)]).unwrap();
        let rep = strict_omega(&f, &CellSet::from_cells(&g5, [0, 1]).unwrap());
        assert_eq!(rep.strict_omega.to_sorted_vec(), vec![2, 3, 4]);

        // Exhaustive over all relations on 1..=5 cells, randomized start
        // set. Each parallel split carries its own space and scratch so
        // the shared reference count does not become a contended line.
        for n in 1..=5usize {
            let total: usize = 1 << (n * n);
            (0..total).into_par_iter().with_min_len(1 << 16).for_each_init(
                || {
                    let g = line(n);
                    let start = CellSet::empty(&g);
                    (g, start, [0u64; 5], Vec::new())
                },
                |(g, start, rows, scratch), bits| {
                    let bits = bits as u64;
                    for s in 0..n {
                        rows[s] = bits >> (s * n) & ((1 << n) - 1);
                    }
                    let start_mask = splitmix(bits ^ (n as u64) << 56) & ((1 << n) - 1);
                    check_omega_against_oracle(g, n, &rows[..n], start_mask, start, scratch);
                },
            );
        }

        // 1000 random relations on up to 10 cells.
        (0..1000u64).into_par_iter().for_each(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(0xA110_C8ED ^ i);
            let n = rng.gen_range(6..=10usize);
            let g = line(n);
            let density = rng.gen_range(0.05..0.4);
            let mut rows = vec![0u64; n];
            for row in rows.iter_mut() {
                for b in 0..n {
                    if rng.gen_bool(density) {
                        *row |= 1 << b;
                    }
                }
            }
            let start_mask = rng.gen::<u64>() & ((1 << n) - 1);
            let mut start = CellSet::empty(&g);
            let mut scratch = Vec::new();
            check_omega_against_oracle(&g, n, &rows, start_mask, &mut start, &mut scratch);
        });
    });
}

// ---------------------------------------------------------------------------
// 3. Maximal invariant vs 2^|X| subset enumeration. < 30 s.
// ---------------------------------------------------------------------------

fn maximal_invariant_oracle(n: usize, rows: &[u64], window: u64) -> u64 {
    let image = |s: u64| {
        let mut out = 0u64;
        let mut bits = s;
        while bits != 0 {
            let i = bits.trailing_zeros() as usize;
            out |= rows[i];
            bits &= bits - 1;
        }
        out
    };
    let mut union = 0u64;
    for a in 0..(1u64 << n) {
        if a & !window == 0 && image(a) == a {
            union |= a;
        }
    }
    union
}

#[test]
fn criterion_03_maximal_invariant_oracle() {
    run_criterion(3, "maximal invariant vs subset enumeration", Duration::from_secs(30), || {
        for n in 1..=4usize {
            let g = line(n);
            let total: u64 = 1 << (n * n);
            (0..total).into_par_iter().for_each(|bits| {
                let rows: Vec<u64> = (0..n).map(|s| bits >> (s * n) & ((1 << n) - 1)).collect();
                let f = FiniteRelation::from_pairs(
                    &g,
                    (0..n * n).filter(|i| bits >> i & 1 == 1).map(|i| (i / n, i % n)),
                )
                .unwrap();
                for window in 0..(1u64 << n) {
                    let got = maximal_invariant(&f, &mask_set(&g, window));
                    assert_eq!(
                        set_mask(&got),
                        maximal_invariant_oracle(n, &rows, window),
                        "n={n} bits={bits:#x} window={window:#x}"
                    );
                }
            });
        }

        // 500 random instances at |X| = 12.
        let n = 12usize;
        let g = line(n);
        (0..500u64).into_par_iter().for_each(|i| {
            let mut rng = ChaCha8Rng::seed_from_u64(0x3A1_0000 ^ i);
            let mut rows = vec![0u64; n];
            let density = rng.gen_range(0.05..0.35);
            for row in rows.iter_mut() {
                for b in 0..n {
                    if rng.gen_bool(density) {
                        *row |= 1 << b;
                    }
                }
            }
            let window: u64 = rng.gen::<u64>() & ((1 << n) - 1);
            let f = FiniteRelation::from_pairs(
                &g,
                (0..n).flat_map(|s| {
                    let row = rows[s];
                    (0..n).filter(move |t| row >> t & 1 == 1).map(move |t| (s, t))
                }),
            )
            .unwrap();
            let got = maximal_invariant(&f, &mask_set(&g, window));
            assert_eq!(set_mask(&got), maximal_invariant_oracle(n, &rows, window));
        });
    });
}

// ---------------------------------------------------------------------------
// 4. sqrt-abs multiflow: sampled rows vs the closed-form piecewise images,
//    and the group-structure failure at x = -4. < 5 s.
// ---------------------------------------------------------------------------

/// Test-side closed form: image intervals of [a, b] at time t > 0.
fn sqrtabs_reference(t: f64, a: f64, b: f64) -> Vec<(f64, f64)> {
    let split = -t * t / 4.0;
    let mut out = Vec::new();
    if a < split {
        let top = b.min(split);
        let m = |x: f64| -(((-x).sqrt()) - t / 2.0).powi(2);
        out.push((m(a), m(top)));
    }
    if b >= split && a <= 0.0 {
        let top = b.min(0.0).max(split);
        out.push((0.0, (t / 2.0 - (-top).sqrt()).powi(2)));
    }
    if b > 0.0 {
        let bot = a.max(0.0);
        let p = |x: f64| (t / 2.0 + x.sqrt()).powi(2);
        out.push((p(bot), p(b)));
    }
    out
}

#[test]
fn criterion_04_sqrt_abs_multiflow() {
    run_criterion(4, "sqrt-abs rows and group-structure failure", Duration::from_secs(5), || {
        let model = MultiflowModel::sqrt_abs();
        let g = GridSpace::line(-30.0, 40.0, 256).unwrap();

        for t in [7.0, 10.0] {
            let f = sample_relation(&model, &g, t).unwrap();
            for src in 0..g.ncells() {
                let b = g.box_of(src);
                let mut reference = CellSet::empty(&g);
                for (lo, hi) in sqrtabs_reference(t, b.lo[0], b.hi[0]) {
                    if let Some(range) = g.cover_closed(&AxisBox::new(vec![lo], vec![hi])) {
                        reference.insert_range(&range);
                    }
                }
                assert!(
                    f.row(src).within_one_cell_of(&reference),
                    "t={t} source cell {src} row disagrees beyond one cell"
                );
            }
        }

        // Group-structure failure: composing the time-6 relation with the
        // worked backward unit step (whose value at -4 is {-9/4}, the
        // time-1 image) covers [0, 9/4], while the time-5 relation at -4
        // covers only [0, 1/4]; the cells around 9/4 tell them apart.
        let f1 = sample_relation(&model, &g, 1.0).unwrap();
        let f5 = sample_relation(&model, &g, 5.0).unwrap();
        let f6 = sample_relation(&model, &g, 6.0).unwrap();
        let src = g.cell_of(&[-4.0]).unwrap();
        let row_back_forward = f6.compose(&f1).row(src);
        let row5 = f5.row(src);

        let covers = |row: &CellSet, lo: f64, hi: f64| {
            let mut want = CellSet::empty(&g);
            if let Some(r) = g.cover_outer(&AxisBox::new(vec![lo], vec![hi])) {
                want.insert_range(&r);
            }
            want.is_subset(row)
        };
        assert!(covers(&row_back_forward, 0.0, 2.25), "composition must cover [0, 9/4]");
        assert!(covers(&row5, 0.0, 0.25), "time-5 row must cover [0, 1/4]");
        let cell_near_nine_quarters = g.cell_of(&[2.25]).unwrap();
        assert!(row_back_forward.contains(cell_near_nine_quarters));
        assert!(
            !row5.contains(cell_near_nine_quarters),
            "time-5 row must not reach 9/4: the two are distinguishable at this resolution"
        );
    });
}

// ---------------------------------------------------------------------------
// 5. Filippov wedge: the sliding fan from (-2, 0) and the semigroup
//    containment at t = 1 + 1. < 10 s.
// ---------------------------------------------------------------------------

#[test]
fn criterion_05_filippov_wedge() {
    run_criterion(5, "Filippov wedge sliding fan and semigroup", Duration::from_secs(10), || {
        let model = MultiflowModel::filippov_wedge();
        let g = GridSpace::plane((-4.0, 4.0), (-4.0, 4.0), 128, 128).unwrap();
        let f2 = sample_relation(&model, &g, 2.0).unwrap();
        let src = g.cell_of(&[-2.0, 0.0]).unwrap();
        let row = f2.row(src);

        // Reference: cells meeting the segment {0} x [-2, 2].
        let mut reference = CellSet::empty(&g);
        if let Some(r) = g.cover_closed(&AxisBox::new(vec![0.0, -2.0], vec![0.0, 2.0])) {
            reference.insert_range(&r);
        }
        assert!(
            row.within_one_cell_of(&reference),
            "row has {} cells vs reference {}",
            row.len(),
            reference.len()
        );

        let rep = check_semigroup(&model, &g, 1.0, 1.0).unwrap();
        assert!(rep.contains, "semigroup containment failed: {:?}", rep.missing);
    });
}

// ---------------------------------------------------------------------------
// 6. Rotation omega hierarchy: ellipse, six-petal flower, disk. < 60 s.
// ---------------------------------------------------------------------------

#[test]
fn criterion_06_rotation_omega_hierarchy() {
    run_criterion(6, "rotation omega hierarchy", Duration::from_secs(60), || {
        use std::f64::consts::PI;
        let model = MultiflowModel::rotation();
        let g = GridSpace::plane((-5.0, 5.0), (-5.0, 5.0), 128, 128).unwrap();
        let ellipse = Region::Ellipse { coeffs: vec![4.0, 1.0], rhs: 16.0, center: vec![0.0, 0.0] }
            .cells(&g, CoverMode::Center);

        // Half-turn: the ellipse is symmetric, so its omega set is itself,
        // exactly at cell level.
        let half_turn = omega_fixed_time(&model, &g, &ellipse, PI, 64).unwrap();
        assert!(half_turn.converged);
        assert_eq!(half_turn.omega, ellipse, "omega under the half-turn must equal the ellipse");

        // Sixth-turn: the union of the six rotated copies.
        let sixth = omega_fixed_time(&model, &g, &ellipse, PI / 3.0, 64).unwrap();
        assert!(sixth.converged);
        let flower = CellSet::from_fn(&g, |c| {
            let p = g.center_of(c);
            (0..6).any(|j| {
                let a = -(j as f64) * PI / 3.0;
                let x = a.cos() * p[0] - a.sin() * p[1];
                let y = a.sin() * p[0] + a.cos() * p[1];
                4.0 * x * x + y * y <= 16.0
            })
        });
        assert!(
            sixth.omega.within_one_cell_of(&flower),
            "flower mismatch: got {} cells, reference {}",
            sixth.omega.len(),
            flower.len()
        );

        // Multiflow strict omega over 64 sampled times spanning two full
        // periods: the radius-4 disk.
        let times = TimeGrid::uniform(64, 4.0 * PI).unwrap();
        let rep = omega_multiflow(&model, &g, &ellipse, &times, 256).unwrap();
        let disk = CellSet::from_fn(&g, |c| {
            let p = g.center_of(c);
            p[0] * p[0] + p[1] * p[1] <= 16.0
        });
        assert!(
            rep.strict_multiflow.within_one_cell_of(&disk),
            "disk mismatch: got {} cells, reference {}",
            rep.strict_multiflow.len(),
            disk.len()
        );

        // Strict inclusions, visible in the cell counts.
        assert!(ellipse.len() < sixth.omega.len());
        assert!(sixth.omega.len() < rep.strict_multiflow.len());
        assert!(ellipse.is_subset(&sixth.omega.dilate()));
    });
}

// ---------------------------------------------------------------------------
// 7. Spiral-heart confinement profile over 32 sampled times. < 30 s.
// ---------------------------------------------------------------------------

#[test]
fn criterion_07_spiral_heart_confinement() {
    run_criterion(7, "spiral heart confinement profile", Duration::from_secs(30), || {
        use std::f64::consts::PI;
        let model = MultiflowModel::spiral_contraction();
        let g = GridSpace::plane((-1.6, 1.6), (-1.6, 1.6), 256, 256).unwrap();
        // The spiral-bounded heart, fattened by a fixed margin so the
        // region classifies at cell resolution the way the exact region
        // does analytically (the exact heart touches its own image).
        let heart = Region::Heart { margin: 0.11 }.cells(&g, CoverMode::Intersect);
        let times = TimeGrid::uniform(32, 2.0 * PI).unwrap();
        let rep = classify_multiflow(&model, &g, &heart, &times).unwrap();

        assert!(
            rep.confining_at_all_sampled,
            "confinement failed at {:?}",
            rep.confining_failures
        );
        let early_failure = rep
            .per_time
            .iter()
            .any(|v| v.t <= PI && !v.strictly_confining);
        assert!(early_failure, "strict confinement must fail for some sampled t <= pi");
        for v in &rep.per_time {
            if v.t > PI + 0.1 {
                assert!(
                    v.strictly_confining,
                    "strict confinement must hold at sampled t = {} > pi + 0.1",
                    v.t
                );
            }
        }
    });
}

// ---------------------------------------------------------------------------
// 8. Segment-relation continuation: the two radii and the epsilon
//    dichotomy. < 5 s.
// ---------------------------------------------------------------------------

#[test]
fn criterion_08_segment_relation_continuation() {
    run_criterion(8, "segment-relation continuation radii", Duration::from_secs(5), || {
        let g = GridSpace::line(0.0, 3.0, 300).unwrap();
        let alpha = 0.1;
        let f = FiniteRelation::from_box_pairs(
            &g,
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
        );
        let block = Region::Boxes(vec![AxisBox::from_intervals(&[(1.0, 2.0)])])
            .cells(&g, CoverMode::Center);

        let rep = robustness_radius(&f, &block, Metric::Euclidean).unwrap();
        assert!(
            (rep.delta_image - 0.5).abs() <= 0.02 + 1e-9,
            "delta_image = {}",
            rep.delta_image
        );
        assert!(
            (rep.delta_graph - 0.1).abs() <= 0.02 + 1e-9,
            "delta_graph = {}",
            rep.delta_graph
        );

        let g_guaranteed = fatten(&f, 0.08, Metric::Euclidean);
        let verdict = continuation_check(&f, &block, &g_guaranteed, Metric::Euclidean).unwrap();
        assert_eq!(verdict.verdict, ContinuationVerdict::Guaranteed);

        let g_broken = fatten(&f, 0.15, Metric::Euclidean);
        let verdict = continuation_check(&f, &block, &g_broken, Metric::Euclidean).unwrap();
        match verdict.verdict {
            ContinuationVerdict::Fail { ref witnesses } => {
                assert!(!witnesses.is_empty());
                // Witnesses sit near the narrow gap at x = 2 + alpha.
                assert!(witnesses
                    .iter()
                    .any(|&(s, _)| (g.center_of(s)[0] - 2.0).abs() < 0.2));
            }
            other => panic!("expected failure with witnesses, got {other:?}"),
        }
    });
}

// ---------------------------------------------------------------------------
// 9. Soundness sweep: fattening below the certified radius never breaks a
//    block. Zero failures allowed. < 60 s.
// ---------------------------------------------------------------------------

#[test]
fn criterion_09_robustness_soundness_sweep() {
    run_criterion(9, "robustness radius soundness sweep", Duration::from_secs(60), || {
        (0..200u64).into_par_iter().for_each(|instance| {
            let mut rng = ChaCha8Rng::seed_from_u64(0x050B_000D ^ instance);
            let metric = if instance % 2 == 0 { Metric::Euclidean } else { Metric::Chebyshev };
            let g = if rng.gen_bool(0.5) {
                GridSpace::line(0.0, 1.0, rng.gen_range(32..=512)).unwrap()
            } else {
                let nx = rng.gen_range(6..=32);
                let ny = rng.gen_range(6..=32);
                GridSpace::plane((0.0, 1.0), (0.0, 1.0), nx, ny).unwrap()
            };

            // A proper sub-box block with room on every side.
            let d = g.dimension();
            let block_box = AxisBox::from_intervals(
                &(0..d)
                    .map(|_| {
                        let a = rng.gen_range(0.15..0.4);
                        let b = rng.gen_range(0.6..0.85);
                        (a, b)
                    })
                    .collect::<Vec<_>>(),
            );
            let block = Region::Boxes(vec![block_box]).cells(&g, CoverMode::Center);
            if block.is_empty() || block.complement().is_empty() {
                return;
            }
            let ccb = block.closure_of_complement();
            let to_block = distance_field(&g, &block, metric);
            let to_ccb = distance_field(&g, &ccb, metric);

            // Random pairs kept only at positive product distance from
            // block x closed-complement, so the radius is positive.
            let want = rng.gen_range(4..=48usize);
            let mut pairs = Vec::new();
            for _ in 0..want * 8 {
                if pairs.len() == want {
                    break;
                }
                let s = rng.gen_range(0..g.ncells());
                let t = rng.gen_range(0..g.ncells());
                if to_block[s] > 0.0 || to_ccb[t] > 0.0 {
                    pairs.push((s, t));
                }
            }
            if pairs.is_empty() {
                return;
            }
            let f = FiniteRelation::from_pairs(&g, pairs).unwrap();
            assert!(is_attractor_block(&f, &block).is_block);
            let radii = robustness_radius(&f, &block, metric).unwrap();
            assert!(radii.delta_graph > 0.0);

            let cap = radii.delta_graph.min(3.0 * g.max_cell_width());
            for _ in 0..5 {
                let eps = rng.gen_range(0.05..0.999) * cap;
                let fat = fatten(&f, eps, metric);
                for _ in 0..3 {
                    let sub = FiniteRelation::from_pairs(
                        &g,
                        fat.pairs().filter(|_| rng.gen_bool(0.5)),
                    )
                    .unwrap();
                    let check = is_attractor_block(&sub, &block);
                    assert!(
                        check.is_block,
                        "instance {instance}: eps {eps} < delta {} broke the block: {:?}",
                        radii.delta_graph,
                        check.witnesses
                    );
                }
            }
        });
    });
}

// ---------------------------------------------------------------------------
// 10. Cross-time omega equality for an eventually confining block. < 20 s.
// ---------------------------------------------------------------------------

#[test]
fn criterion_10_cross_time_omega_equality() {
    run_criterion(10, "cross-time omega equality", Duration::from_secs(20), || {
        let model = MultiflowModel::spiral_contraction();
        let g = GridSpace::plane((-1.6, 1.6), (-1.6, 1.6), 96, 96).unwrap();
        let block = Region::Ball { center: vec![0.0, 0.0], radius: 1.2 }.cells(&g, CoverMode::Center);

        let times = [0.7, 1.0, 2f64.sqrt(), std::f64::consts::FRAC_PI_2];
        // The block is confining at each of these times.
        let grid = TimeGrid::new(times.to_vec(), None).unwrap();
        let classify = classify_multiflow(&model, &g, &block, &grid).unwrap();
        assert!(classify.confining_at_all_sampled);

        let omegas: Vec<CellSet> = times
            .iter()
            .map(|&t| {
                let rep = omega_fixed_time(&model, &g, &block, t, 512).unwrap();
                assert!(rep.converged, "omega iteration did not settle at t = {t}");
                rep.omega
            })
            .collect();
        for pair in omegas.windows(2) {
            assert_eq!(pair[0], pair[1], "omega sets differ across fixed times");
        }
        assert!(!omegas[0].is_empty());
    });
}

// ---------------------------------------------------------------------------
// 11. Block certification on (0, T] transfers to spot checks in (T, 4T].
//     Zero spot failures. < 30 s.
// ---------------------------------------------------------------------------

#[test]
fn criterion_11_block_forward_time_reduction() {
    run_criterion(11, "block forward-time reduction", Duration::from_secs(30), || {
        struct Case {
            model: MultiflowModel,
            space: Arc<GridSpace>,
            block: CellSet,
            horizon: f64,
        }
        // The smallest sampled time must contract the rim by more than the
        // eroded boundary ring plus cover slack (about 2.6 cells), which
        // sets grid and horizon here: at 128 cells and T = 1.6 the first
        // sample contracts the unit rim by 3.8 cells.
        let spiral_space = GridSpace::plane((-1.6, 1.6), (-1.6, 1.6), 128, 128).unwrap();
        let drift_space = GridSpace::line(-1.0, 1.0, 200).unwrap();
        let sqrt_space = GridSpace::line(-30.0, 40.0, 256).unwrap();
        let wedge_space = GridSpace::plane((-4.0, 4.0), (-4.0, 4.0), 128, 128).unwrap();
        let cases = [
            Case {
                model: MultiflowModel::spiral_contraction(),
                block: Region::Ball { center: vec![0.0, 0.0], radius: 1.0 }
                    .cells(&spiral_space, CoverMode::Center),
                space: spiral_space,
                horizon: 1.6,
            },
            Case {
                model: MultiflowModel::restricted_drift(),
                block: Region::Boxes(vec![AxisBox::from_intervals(&[(0.5, 1.0)])])
                    .cells(&drift_space, CoverMode::Center),
                space: drift_space,
                horizon: 0.35,
            },
            Case {
                model: MultiflowModel::sqrt_abs(),
                block: Region::Boxes(vec![AxisBox::from_intervals(&[(22.0, 40.0)])])
                    .cells(&sqrt_space, CoverMode::Center),
                space: sqrt_space,
                horizon: 1.6,
            },
            Case {
                model: MultiflowModel::filippov_wedge(),
                block: Region::Boxes(vec![AxisBox::from_intervals(&[(2.0, 4.0), (-4.0, 4.0)])])
                    .cells(&wedge_space, CoverMode::Center),
                space: wedge_space,
                horizon: 2.4,
            },
        ];
        // The rotation model is omitted: nothing short of the whole space
        // is a block for a rigid rotation.
        for (i, case) in cases.iter().enumerate() {
            let times = TimeGrid::uniform(16, case.horizon).unwrap();
            let opts = CertifyOptions {
                spot_checks: 8,
                spot_horizon_factor: 4.0,
                seed: 0xB10C + i as u64,
                ..CertifyOptions::default()
            };
            let cert =
                certify_block_multiflow(&case.model, &case.space, &case.block, &times, &opts)
                    .unwrap();
            assert!(
                cert.is_block,
                "model `{}` failed dense certification: {:?}",
                case.model.name(),
                cert.witnesses
            );
            assert_eq!(cert.spot_times.len(), 8);
            assert!(
                cert.spot_failures.is_empty(),
                "model `{}` failed spot checks at {:?}",
                case.model.name(),
                cert.spot_failures
            );
        }
    });
}
