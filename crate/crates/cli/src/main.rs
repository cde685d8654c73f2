//! Configuration-driven command line for grid dynamics experiments.
//!
//! Exit codes: 0 success, 1 usage or configuration error, 2 certification
//! failure (a block that fails, a budget that runs out, a demo whose
//! reproduced values miss their windows).

mod config;
mod demo;
mod render;
mod report;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use serde::Serialize;

use multiflow::{
    certify_block_multiflow, check_semigroup, classify_multiflow, continuation_check,
    epsilon_sweep, fatten, find_block_in_neighborhood, omega_multiflow, robustness_radius,
    sample_relation, CertifyOptions, ContinuationVerdict, FindBlockError, Metric,
};

use config::ExperimentConfig;
use report::{write_csv, CellSetJson, Report};

#[derive(Parser)]
#[command(name = "multiflow", version, about = "Grid dynamics experiments for closed relations and multiflows")]
struct Cli {
    /// Experiment configuration (JSON). Required for everything but demos.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory for reports, tables, and figures.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Worker threads for sampling sweeps (defaults to all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Seed for randomized spot checks.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
    /// Metric for distances and fattening.
    #[arg(long, global = true, default_value = "euclidean")]
    metric: String,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Omega limit sets of a named set over the sampled time grid.
    Omega,
    /// Confinement and strict confinement of a named set per sampled time.
    Classify,
    /// Sample one fixed-time relation and write it out with figures.
    Sample,
    /// Audit the semigroup containment at a pair of times.
    Semigroup,
    /// Certify a named set as an attractor block across sampled times.
    Block,
    /// Search a neighborhood for an attractor block around an invariant set.
    FindBlock,
    /// Robustness radius and epsilon sweep of a block under a relation.
    Continuation,
    /// Run a named built-in demo (ce1, sqrtabs).
    Demo { name: String },
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            // Usage problems exit 1 regardless of clap's default codes;
            // --help and --version stay successful.
            let _ = e.print();
            return match e.kind() {
                clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion => {
                    ExitCode::SUCCESS
                }
                _ => ExitCode::from(1),
            };
        }
    };
    match run(cli) {
        Ok(certified) => {
            if certified {
                ExitCode::SUCCESS
            } else {
                ExitCode::from(2)
            }
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

/// Returns whether every certification-style check passed.
fn run(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let metric = Metric::parse(&cli.metric)?;
    std::fs::create_dir_all(&cli.out)
        .with_context(|| format!("creating output directory {}", cli.out.display()))?;

    if let Command::Demo { name } = &cli.command {
        return match name.as_str() {
            "ce1" => demo::run_ce1(&cli.out, cli.seed, metric),
            "sqrtabs" => demo::run_sqrtabs(&cli.out, cli.seed, metric),
            other => bail!("unknown demo `{other}` (available: ce1, sqrtabs)"),
        };
    }

    let config_path = cli
        .config
        .as_deref()
        .context("this command needs --config pointing at an experiment file")?;
    let config_bytes = std::fs::read(config_path)
        .with_context(|| format!("reading config {}", config_path.display()))?;
    let text = String::from_utf8(config_bytes.clone()).context("config is not UTF-8")?;
    let cfg = ExperimentConfig::parse(&text)?;
    let config_dir = config_path.parent().unwrap_or_else(|| Path::new("."));
    let space = cfg.build_space()?;
    let out = cli.out.as_path();

    match cli.command {
        Command::Omega => {
            let model = cfg.build_model(config_dir)?;
            let times = cfg.build_times()?;
            let params = cfg.omega.as_ref().context("config needs an `omega` section")?;
            let set = cfg.resolve_set(&space, &params.set)?;
            let rep = omega_multiflow(
                &model,
                &space,
                &set,
                &times,
                params.max_iterations.unwrap_or(4096),
            )?;
            #[derive(Serialize)]
            struct PerTime {
                t: f64,
                transient_length: usize,
                cycle_length: usize,
                converged: bool,
                omega: CellSetJson,
            }
            #[derive(Serialize)]
            struct OmegaJson {
                eventually_confining: bool,
                per_time_equal: bool,
                tail_starts: usize,
                common: Option<CellSetJson>,
                strict_multiflow: CellSetJson,
                per_time: Vec<PerTime>,
            }
            let result = OmegaJson {
                eventually_confining: rep.classification.effectively_eventually_confining(),
                per_time_equal: rep.per_time_equal,
                tail_starts: rep.tail_starts,
                common: rep.common.as_ref().map(CellSetJson::of),
                strict_multiflow: CellSetJson::of(&rep.strict_multiflow),
                per_time: rep
                    .per_time
                    .iter()
                    .map(|ft| PerTime {
                        t: ft.t,
                        transient_length: ft.transient_length,
                        cycle_length: ft.cycle_length,
                        converged: ft.converged,
                        omega: CellSetJson::of(&ft.omega),
                    })
                    .collect(),
            };
            if space.dimension() <= 2 {
                render::cellset_pgm(&out.join("strict_multiflow.pgm"), &rep.strict_multiflow)?;
            }
            if space.dimension() == 2 {
                render::cellset_svg(&out.join("strict_multiflow.svg"), &rep.strict_multiflow)?;
            }
            Report::new("omega", &config_bytes, cli.seed, metric.name(), &space, result)
                .with_model(model.name())
                .with_times(&times)
                .write(&out.join("report.json"))?;
            Ok(true)
        }
        Command::Classify => {
            let model = cfg.build_model(config_dir)?;
            let times = cfg.build_times()?;
            let params = cfg.classify.as_ref().context("config needs a `classify` section")?;
            let set = cfg.resolve_set(&space, &params.set)?;
            let rep = classify_multiflow(&model, &space, &set, &times)?;
            write_csv(
                &out.join("classification.csv"),
                "t,confining,strictly_confining",
                &rep.per_time
                    .iter()
                    .map(|v| format!("{},{},{}", v.t, v.confining, v.strictly_confining))
                    .collect::<Vec<_>>(),
            )?;
            #[derive(Serialize)]
            struct ClassifyJson {
                confining_at_all_sampled: bool,
                strictly_confining_at_all_sampled: bool,
                eventually_confining: Option<bool>,
                eventually_strictly_confining: Option<bool>,
                confining_failures: Vec<f64>,
                strict_failures: Vec<f64>,
            }
            let result = ClassifyJson {
                confining_at_all_sampled: rep.confining_at_all_sampled,
                strictly_confining_at_all_sampled: rep.strictly_confining_at_all_sampled,
                eventually_confining: rep.eventually_confining,
                eventually_strictly_confining: rep.eventually_strictly_confining,
                confining_failures: rep.confining_failures.clone(),
                strict_failures: rep.strict_failures.clone(),
            };
            Report::new("classify", &config_bytes, cli.seed, metric.name(), &space, result)
                .with_model(model.name())
                .with_times(&times)
                .write(&out.join("report.json"))?;
            Ok(true)
        }
        Command::Sample => {
            let model = cfg.build_model(config_dir)?;
            let params = cfg.sample.as_ref().context("config needs a `sample` section")?;
            let f = sample_relation(&model, &space, params.t)?;
            report::write_atomic(&out.join("relation.txt"), f.to_text().as_bytes())?;
            report::write_atomic(&out.join("relation.bin"), &f.to_binary())?;
            let mut row_json = None;
            match space.dimension() {
                1 => {
                    render::relation_1d_pgm(&out.join("relation.pgm"), &f)?;
                    render::relation_1d_svg(&out.join("relation.svg"), &f)?;
                }
                2 => {
                    if let Some(point) = &params.source_point {
                        let src = space.cell_of(point)?;
                        let row = f.row(src);
                        render::cellset_pgm(&out.join("row.pgm"), &row)?;
                        render::cellset_svg(&out.join("row.svg"), &row)?;
                        row_json = Some((src, CellSetJson::of(&row)));
                    }
                }
                _ => {}
            }
            #[derive(Serialize)]
            struct SampleJson {
                t: f64,
                pair_count: usize,
                source_cell: Option<usize>,
                row: Option<CellSetJson>,
            }
            let (source_cell, row) = match row_json {
                Some((c, r)) => (Some(c), Some(r)),
                None => (None, None),
            };
            let result =
                SampleJson { t: params.t, pair_count: f.pair_count(), source_cell, row };
            Report::new("sample", &config_bytes, cli.seed, metric.name(), &space, result)
                .with_model(model.name())
                .write(&out.join("report.json"))?;
            Ok(true)
        }
        Command::Semigroup => {
            let model = cfg.build_model(config_dir)?;
            let params = cfg.semigroup.as_ref().context("config needs a `semigroup` section")?;
            let rep = check_semigroup(&model, &space, params.s, params.t)?;
            #[derive(Serialize)]
            struct SemigroupJson {
                s: f64,
                t: f64,
                contains: bool,
                missing: Vec<(usize, usize)>,
                composed_pairs: usize,
                direct_pairs: usize,
                excess_pairs: Option<usize>,
            }
            let contains = rep.contains;
            let result = SemigroupJson {
                s: rep.s,
                t: rep.t,
                contains: rep.contains,
                missing: rep.missing,
                composed_pairs: rep.composed_pairs,
                direct_pairs: rep.direct_pairs,
                excess_pairs: rep.excess_pairs,
            };
            Report::new("semigroup", &config_bytes, cli.seed, metric.name(), &space, result)
                .with_model(model.name())
                .write(&out.join("report.json"))?;
            // A containment failure means the sampled family is unsound.
            Ok(contains)
        }
        Command::Block => {
            let model = cfg.build_model(config_dir)?;
            let times = cfg.build_times()?;
            let params = cfg.block.as_ref().context("config needs a `block` section")?;
            let set = cfg.resolve_set(&space, &params.set)?;
            let opts = CertifyOptions {
                spot_checks: params.spot_checks.unwrap_or(8),
                seed: cli.seed,
                ..CertifyOptions::default()
            };
            let cert = certify_block_multiflow(&model, &space, &set, &times, &opts)?;
            let ok = cert.is_block && cert.spot_failures.is_empty();
            let result = block_certificate_json(&space, &cert);
            if space.dimension() == 2 {
                render::cellset_pgm(&out.join("attractor.pgm"), &cert.attractor)?;
                render::cellset_svg(&out.join("attractor.svg"), &cert.attractor)?;
            }
            Report::new("block", &config_bytes, cli.seed, metric.name(), &space, result)
                .with_model(model.name())
                .with_times(&times)
                .write(&out.join("report.json"))?;
            Ok(ok)
        }
        Command::FindBlock => {
            let model = cfg.build_model(config_dir)?;
            let times = cfg.build_times()?;
            let params =
                cfg.find_block.as_ref().context("config needs a `find_block` section")?;
            let attractor = cfg.resolve_set(&space, &params.attractor)?;
            let neighborhood = cfg.resolve_set(&space, &params.neighborhood)?;
            let budget = params.budget.unwrap_or(64);
            let opts = CertifyOptions { seed: cli.seed, ..CertifyOptions::default() };
            match find_block_in_neighborhood(
                &model,
                &space,
                &attractor,
                &neighborhood,
                &times,
                budget,
                &opts,
            ) {
                Ok(cert) => {
                    let result = block_certificate_json(&space, &cert);
                    Report::new("find-block", &config_bytes, cli.seed, metric.name(), &space, result)
                        .with_model(model.name())
                        .with_times(&times)
                        .write(&out.join("report.json"))?;
                    Ok(true)
                }
                Err(FindBlockError::BudgetExhausted { iterations, last_candidate, witnesses }) => {
                    #[derive(Serialize)]
                    struct ExhaustedJson {
                        status: &'static str,
                        iterations: usize,
                        last_candidate: CellSetJson,
                        witnesses: Vec<WitnessJson>,
                    }
                    let result = ExhaustedJson {
                        status: "budget-exhausted",
                        iterations,
                        last_candidate: CellSetJson::of(&last_candidate),
                        witnesses: witnesses
                            .iter()
                            .map(|&(t, s, c)| witness_json(&space, t, s, c))
                            .collect(),
                    };
                    Report::new("find-block", &config_bytes, cli.seed, metric.name(), &space, result)
                        .with_model(model.name())
                        .with_times(&times)
                        .write(&out.join("report.json"))?;
                    Ok(false)
                }
                Err(FindBlockError::Precondition(e)) => Err(e.into()),
            }
        }
        Command::Continuation => {
            let params =
                cfg.continuation.as_ref().context("config needs a `continuation` section")?;
            let f = cfg.build_relation(&space, config_dir, &params.relation)?;
            let block = cfg.resolve_set(&space, &params.block)?;
            let radii = robustness_radius(&f, &block, metric)?;
            let sweep = epsilon_sweep(&f, &block, metric, &params.epsilons);
            write_csv(
                &out.join("epsilon_sweep.csv"),
                "epsilon,still_block",
                &sweep.iter().map(|(e, b)| format!("{e},{b}")).collect::<Vec<_>>(),
            )?;
            #[derive(Serialize)]
            struct EpsVerdict {
                epsilon: f64,
                one_sided_distance: f64,
                verdict: String,
                witnesses: Vec<(usize, usize)>,
            }
            #[derive(Serialize)]
            struct ContinuationJson {
                delta_graph: f64,
                delta_image: f64,
                epsilon_tested: Vec<(f64, bool)>,
                verdicts: Vec<EpsVerdict>,
            }
            let mut verdicts = Vec::new();
            for &eps in &params.epsilons {
                let g = fatten(&f, eps, metric);
                let rep = continuation_check(&f, &block, &g, metric)?;
                let (name, witnesses) = match rep.verdict {
                    ContinuationVerdict::Guaranteed => ("guaranteed".to_string(), Vec::new()),
                    ContinuationVerdict::UnguaranteedPass => {
                        ("unguaranteed-pass".to_string(), Vec::new())
                    }
                    ContinuationVerdict::Fail { witnesses } => ("fail".to_string(), witnesses),
                };
                verdicts.push(EpsVerdict {
                    epsilon: eps,
                    one_sided_distance: rep.epsilon,
                    verdict: name,
                    witnesses,
                });
            }
            let result = ContinuationJson {
                delta_graph: radii.delta_graph,
                delta_image: radii.delta_image,
                epsilon_tested: sweep,
                verdicts,
            };
            Report::new("continuation", &config_bytes, cli.seed, metric.name(), &space, result)
                .write(&out.join("report.json"))?;
            Ok(true)
        }
        Command::Demo { .. } => unreachable!("handled above"),
    }
}

#[derive(Serialize)]
struct WitnessJson {
    t: f64,
    source: usize,
    target: usize,
    source_box: Vec<[f64; 2]>,
    target_box: Vec<[f64; 2]>,
}

fn witness_json(space: &multiflow::GridSpace, t: f64, s: usize, c: usize) -> WitnessJson {
    let to_iv = |b: multiflow::AxisBox| {
        b.lo.iter().zip(&b.hi).map(|(&a, &b)| [a, b]).collect::<Vec<_>>()
    };
    WitnessJson {
        t,
        source: s,
        target: c,
        source_box: to_iv(space.box_of(s)),
        target_box: to_iv(space.box_of(c)),
    }
}

#[derive(Serialize)]
struct BlockCertificateJson {
    is_block: bool,
    relation_times: Vec<f64>,
    representative_time: f64,
    strictly_confining_from: Option<f64>,
    spot_times: Vec<f64>,
    spot_failures: Vec<f64>,
    block: CellSetJson,
    attractor: CellSetJson,
    witnesses: Vec<WitnessJson>,
}

fn block_certificate_json(
    space: &multiflow::GridSpace,
    cert: &multiflow::BlockCertificate,
) -> BlockCertificateJson {
    BlockCertificateJson {
        is_block: cert.is_block,
        relation_times: cert.relation_times.clone(),
        representative_time: cert.representative_time,
        strictly_confining_from: cert.strictly_confining_from,
        spot_times: cert.spot_times.clone(),
        spot_failures: cert.spot_failures.clone(),
        block: CellSetJson::of(&cert.block),
        attractor: CellSetJson::of(&cert.attractor),
        witnesses: cert
            .witnesses
            .iter()
            .map(|&(t, s, c)| witness_json(space, t, s, c))
            .collect(),
    }
}
