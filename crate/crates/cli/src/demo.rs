//! Built-in end-to-end demos. Each demo carries its own config, writes the
//! usual reports and figures, and checks the values it is expected to
//! reproduce; a failed check turns into the certification-failure exit
//! code.

use std::path::Path;

use anyhow::Result;
use serde::Serialize;

use multiflow::{
    continuation_check, epsilon_sweep, fatten, robustness_radius, sample_relation,
    ContinuationVerdict, Metric, MultiflowModel,
};

use crate::config::ExperimentConfig;
use crate::report::{write_csv, CellSetJson, Report};
use crate::render;

pub const CE1_CONFIG: &str = r#"{
  "space": { "bounds": [[0.0, 3.0]], "resolution": [300] },
  "sets": {
    "B": { "box": [[1.0, 2.0]], "mode": "center" }
  },
  "continuation": {
    "block": "B",
    "relation": {
      "box_pairs": [
        { "source": [[0.8, 2.1]], "target": [[1.5, 1.5]] },
        { "source": [[2.1, 2.1]], "target": [[1.5, 3.0]] }
      ]
    },
    "epsilons": [0.02, 0.05, 0.08, 0.09, 0.12, 0.15, 0.2]
  }
}"#;

pub const SQRTABS_CONFIG: &str = r#"{
  "space": { "bounds": [[-30.0, 40.0]], "resolution": [256] },
  "model": { "builtin": "sqrt-abs" },
  "times": { "samples": [7.0, 10.0] }
}"#;

#[derive(Serialize)]
struct Ce1Result {
    delta_graph: f64,
    delta_image: f64,
    epsilon_tested: Vec<EpsRow>,
    guaranteed_at: f64,
    fails_at: f64,
    checks_passed: bool,
    check_messages: Vec<String>,
}

#[derive(Serialize)]
struct EpsRow {
    epsilon: f64,
    still_block: bool,
}

/// The two-segment relation whose robust radius is set by the narrow gap
/// at x = 2.1, not by the image distance. Returns false when a reproduced
/// value misses its expected window.
pub fn run_ce1(out: &Path, seed: u64, metric: Metric) -> Result<bool> {
    let cfg = ExperimentConfig::parse(CE1_CONFIG)?;
    crate::report::write_atomic(&out.join("config.json"), cfg.to_json().as_bytes())?;
    let space = cfg.build_space()?;
    let params = cfg.continuation.as_ref().expect("demo config has continuation");
    let f = cfg.build_relation(&space, Path::new("."), &params.relation)?;
    let block = cfg.resolve_set(&space, &params.block)?;

    let radii = robustness_radius(&f, &block, metric)?;
    let sweep = epsilon_sweep(&f, &block, metric, &params.epsilons);

    let mut messages = Vec::new();
    let tol = 0.02 + 1e-9;
    let mut check = |ok: bool, msg: String| {
        if !ok {
            messages.push(msg);
        }
        ok
    };
    let mut passed = true;
    passed &= check(
        (radii.delta_graph - 0.1).abs() <= tol,
        format!("delta_graph {} outside 0.1 +- 0.02", radii.delta_graph),
    );
    passed &= check(
        (radii.delta_image - 0.5).abs() <= tol,
        format!("delta_image {} outside 0.5 +- 0.02", radii.delta_image),
    );
    let guaranteed = continuation_check(&f, &block, &fatten(&f, 0.08, metric), metric)?;
    passed &= check(
        guaranteed.verdict == ContinuationVerdict::Guaranteed,
        format!("epsilon 0.08 should be guaranteed, got {:?}", guaranteed.verdict),
    );
    let broken = continuation_check(&f, &block, &fatten(&f, 0.15, metric), metric)?;
    passed &= check(
        matches!(broken.verdict, ContinuationVerdict::Fail { .. }),
        format!("epsilon 0.15 should break the block, got {:?}", broken.verdict),
    );

    let result = Ce1Result {
        delta_graph: radii.delta_graph,
        delta_image: radii.delta_image,
        epsilon_tested: sweep
            .iter()
            .map(|&(epsilon, still_block)| EpsRow { epsilon, still_block })
            .collect(),
        guaranteed_at: 0.08,
        fails_at: 0.15,
        checks_passed: passed,
        check_messages: messages,
    };
    Report::new("demo-ce1", CE1_CONFIG.as_bytes(), seed, metric.name(), &space, result)
        .write(&out.join("report.json"))?;
    write_csv(
        &out.join("epsilon_sweep.csv"),
        "epsilon,still_block",
        &sweep.iter().map(|(e, b)| format!("{e},{b}")).collect::<Vec<_>>(),
    )?;
    render::relation_1d_pgm(&out.join("relation.pgm"), &f)?;
    render::relation_1d_svg(&out.join("relation.svg"), &f)?;
    Ok(passed)
}

#[derive(Serialize)]
struct SqrtAbsResult {
    times: Vec<f64>,
    pair_counts: Vec<usize>,
    row_at_minus_four: Vec<CellSetJson>,
}

/// Fixed-time relation plots of the square-root field at t = 7 and t = 10.
pub fn run_sqrtabs(out: &Path, seed: u64, metric: Metric) -> Result<bool> {
    let cfg = ExperimentConfig::parse(SQRTABS_CONFIG)?;
    crate::report::write_atomic(&out.join("config.json"), cfg.to_json().as_bytes())?;
    let space = cfg.build_space()?;
    let model = MultiflowModel::sqrt_abs();
    let times = cfg.build_times()?;

    let mut pair_counts = Vec::new();
    let mut rows = Vec::new();
    for &t in times.samples() {
        let f = sample_relation(&model, &space, t)?;
        pair_counts.push(f.pair_count());
        let src = space.cell_of(&[-4.0])?;
        rows.push(CellSetJson::of(&f.row(src)));
        let tag = format!("{t}").replace('.', "_");
        render::relation_1d_pgm(&out.join(format!("phi_t{tag}.pgm")), &f)?;
        render::relation_1d_svg(&out.join(format!("phi_t{tag}.svg")), &f)?;
    }
    let result = SqrtAbsResult {
        times: times.samples().to_vec(),
        pair_counts,
        row_at_minus_four: rows,
    };
    Report::new("demo-sqrtabs", SQRTABS_CONFIG.as_bytes(), seed, metric.name(), &space, result)
        .with_model(model.name())
        .with_times(&times)
        .write(&out.join("report.json"))?;
    Ok(true)
}
