use clap::{Args, Parser, Subcommand, ValueEnum};
use colas::calibration::{self};
use colas::copula::{CopulaFamily, WeightMarginal};
use colas::error::Error;
use colas::experiments;
use colas::generator::{self, GenConfig, Regime};
use colas::limits::{self, LimitModel};
use colas::rewiring;
use colas::{io, stats};
use std::path::PathBuf;
use std::process::ExitCode;

#[derive(Parser)]
#[command(name = "colas", about = "Copula-seeded local latent-space random graphs", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
#[value(rename_all = "snake_case")]
enum RegimeArg {
    FixedRangeExp,
    FixedRangeLinear,
    HeavyTail,
}

impl From<RegimeArg> for Regime {
    fn from(r: RegimeArg) -> Regime {
        match r {
            RegimeArg::FixedRangeExp => Regime::FixedRangeExp,
            RegimeArg::FixedRangeLinear => Regime::FixedRangeLinear,
            RegimeArg::HeavyTail => Regime::HeavyTail,
        }
    }
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MarginalArg {
    Uniform,
    Pareto,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum Format {
    Text,
    Csv,
}

#[derive(Args)]
struct CommonOut {
    /// Output file or directory, depending on the subcommand.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    format: Format,
    /// Worker threads for replicate loops.
    #[arg(long, default_value_t = 1)]
    threads: usize,
}

#[derive(Subcommand)]
enum Command {
    /// Sample a graph and write edge list, marks CSV, and metadata.
    Generate {
        #[arg(long)]
        n: usize,
        #[arg(long, default_value_t = 1)]
        dim: usize,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        #[arg(long, value_enum, default_value_t = RegimeArg::FixedRangeExp)]
        regime: RegimeArg,
        #[arg(long, value_enum, default_value_t = MarginalArg::Uniform)]
        marginal: MarginalArg,
        /// Pareto tail index (required with --marginal pareto).
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonOut,
    },
    /// Compute statistics for an edge list.
    Stats {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        marks: Option<PathBuf>,
        /// Also write the degree CCDF curve here.
        #[arg(long)]
        ccdf: Option<PathBuf>,
        /// Also write the clustering-by-degree curve here.
        #[arg(long)]
        clustering_curve: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOut,
    },
    /// Evaluate the closed-form limits.
    Limits {
        #[arg(long)]
        lambda: f64,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 0.0)]
        theta: f64,
        /// Also report lambda_c and r along the constant-clustering curve at
        /// this target level.
        #[arg(long)]
        c_target: Option<f64>,
        /// Emit a CSV sweep over a theta grid of this many points.
        #[arg(long)]
        sweep: Option<usize>,
        #[command(flatten)]
        common: CommonOut,
    },
    /// One-graph calibration of (lambda, theta) from an edge list.
    Calibrate {
        #[arg(long)]
        edges: PathBuf,
        /// Marks CSV defining the full node set (edge lists alone lose
        /// isolated nodes, which biases the density scale).
        #[arg(long)]
        marks: Option<PathBuf>,
        #[arg(long, default_value_t = 1.0)]
        rho: f64,
        #[arg(long, default_value_t = 50)]
        bootstrap: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonOut,
    },
    /// Degree-preserving rewiring toward a target assortativity.
    Rewire {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        target: f64,
        #[arg(long, default_value_t = 250_000)]
        max_swaps: u64,
        #[arg(long, default_value_t = 0.01)]
        tolerance: f64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        common: CommonOut,
    },
    /// Run a scripted experiment from a config file.
    Experiment {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        seed: Option<u64>,
        #[command(flatten)]
        common: CommonOut,
    },
    /// Ingest an external edge list (compacts ids, drops loops/duplicates).
    Ingest {
        #[arg(long)]
        edges: PathBuf,
        #[arg(long)]
        marks: Option<PathBuf>,
        #[command(flatten)]
        common: CommonOut,
    },
}

fn emit(common: &CommonOut, text: String, csv: String) -> colas::Result<()> {
    let content = match common.format {
        Format::Text => text,
        Format::Csv => csv,
    };
    match &common.out {
        Some(path) if path.is_dir() => {
            let name = match common.format {
                Format::Text => "report.txt",
                Format::Csv => "report.csv",
            };
            io::write_string(&path.join(name), &content)
        }
        Some(path) => io::write_string(path, &content),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> colas::Result<()> {
    match cli.command {
        Command::Generate { n, dim, rho, lambda, theta, regime, marginal, alpha, seed, common } => {
            let marginal = match marginal {
                MarginalArg::Uniform => WeightMarginal::UnitUniform,
                MarginalArg::Pareto => WeightMarginal::pareto(alpha.ok_or_else(|| {
                    Error::Parameter("--marginal pareto requires --alpha".into())
                })?),
            };
            let cfg = GenConfig::new(
                n,
                rho,
                lambda,
                regime.into(),
                CopulaFamily::fgm(theta, dim),
                marginal,
                seed,
            );
            let graph = generator::generate(&cfg)?;
            let dir = common.out.clone().unwrap_or_else(|| PathBuf::from("."));
            std::fs::create_dir_all(&dir)?;
            io::write_edge_list(&graph, &dir.join("edges.txt"))?;
            io::write_marks_csv(graph.marks.as_ref().unwrap(), &dir.join("marks.csv"))?;
            io::write_metadata(&graph, &cfg, &dir.join("meta.txt"))?;
            eprintln!(
                "n={} edges={} mean_degree={:.4} -> {}",
                graph.n,
                graph.edge_count(),
                graph.mean_degree(),
                dir.display()
            );
            Ok(())
        }
        Command::Stats { edges, marks, ccdf, clustering_curve, common } => {
            let ingested = io::ingest_edge_list(&edges)?;
            let graph = attach_marks(ingested, marks.as_deref())?;
            let summary = stats::summarize(&graph);
            if let Some(path) = ccdf {
                io::write_string(&path, &io::curve_csv(("degree", "ccdf"), &stats::degree_ccdf(&graph)))?;
            }
            if let Some(path) = clustering_curve {
                io::write_string(
                    &path,
                    &io::curve_csv(("degree", "mean_local_clustering"), &stats::degree_clustering_curve(&graph)),
                )?;
            }
            let (text, csv) = io::stat_report(&summary);
            emit(&common, text, csv)
        }
        Command::Limits { lambda, rho, theta, c_target, sweep, common } => {
            let model = LimitModel::new(
                lambda,
                rho,
                theta,
                1,
                Regime::FixedRangeLinear,
                WeightMarginal::UnitUniform,
            )?;
            if let Some(points) = sweep {
                if points < 2 {
                    return Err(Error::Parameter("sweep needs at least 2 points".into()));
                }
                let mut csv = String::from("theta,transitivity_limit,assortativity_limit");
                if c_target.is_some() {
                    csv.push_str(",lambda_c,r_along_curve");
                }
                csv.push('\n');
                for i in 0..points {
                    let th = i as f64 / (points - 1) as f64;
                    let mut m = model.clone();
                    m.theta = th;
                    csv.push_str(&format!(
                        "{th:.6},{:.12},{:.12}",
                        limits::fgm_limit_c(&m)?,
                        limits::fgm_limit_r(&m)?
                    ));
                    if let Some(c) = c_target {
                        csv.push_str(&format!(
                            ",{:.12},{:.12}",
                            limits::lambda_c_curve(c, th, rho)?,
                            limits::r_along_curve(c, th, rho)?
                        ));
                    }
                    csv.push('\n');
                }
                return emit(&common, csv.clone(), csv);
            }
            let mut text = format!(
                "transitivity_limit={:.12}\nassortativity_limit={:.12}\nmean_degree_limit={:.12}\n",
                limits::fgm_limit_c(&model)?,
                limits::fgm_limit_r(&model)?,
                lambda * model.constants.kappa2 * limits::fgm_mean_degree_scalar(theta)
            );
            if let Some(c) = c_target {
                text.push_str(&format!(
                    "lambda_c={:.12}\nr_along_curve={:.12}\n",
                    limits::lambda_c_curve(c, theta, rho)?,
                    limits::r_along_curve(c, theta, rho)?
                ));
            }
            let csv = {
                let mut header = String::new();
                let mut row = String::new();
                for line in text.lines() {
                    let (k, v) = line.split_once('=').unwrap();
                    if !header.is_empty() {
                        header.push(',');
                        row.push(',');
                    }
                    header.push_str(k);
                    row.push_str(v);
                }
                format!("{header}\n{row}\n")
            };
            emit(&common, text, csv)
        }
        Command::Calibrate { edges, marks, rho, bootstrap, seed, common } => {
            let graph = attach_marks(io::ingest_edge_list(&edges)?, marks.as_deref())?;
            let report = calibration::calibrate_graph(&graph, rho, bootstrap, seed)?;
            let (mut text, csv) = io::fit_report(&report);
            // joint calibration error |dC| + |dr| against the fitted limits
            let e_cr = (report.observed.0 - report.predicted.0).abs()
                + (report.observed.1 - report.predicted.1).abs();
            text.push_str(&format!("e_cr={e_cr:.15e}\n"));
            emit(&common, text, csv)
        }
        Command::Rewire { edges, target, max_swaps, tolerance, seed, common } => {
            let graph = io::ingest_edge_list(&edges)?.graph;
            let res = rewiring::rewire_to_target_r(&graph, target, max_swaps, tolerance, seed)?;
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir)?;
                io::write_edge_list(&res.graph, &dir.join("rewired_edges.txt"))?;
            }
            let text = format!(
                "final_r={:.6}\nreached_target={}\nswaps_attempted={}\nswaps_accepted={}\n",
                res.final_r, res.reached_target, res.swaps_attempted, res.swaps_accepted
            );
            let csv = format!(
                "final_r,reached_target,swaps_attempted,swaps_accepted\n{:.6},{},{},{}\n",
                res.final_r, res.reached_target, res.swaps_attempted, res.swaps_accepted
            );
            emit(&common, text, csv)
        }
        Command::Experiment { config, seed, common } => {
            let mut cfg = experiments::load_config(&config)?;
            if let Some(seed) = seed {
                cfg.seed = seed;
            }
            if let Some(out) = &common.out {
                cfg.output_dir = out.clone();
            }
            if common.threads > 1 {
                cfg.threads = common.threads;
            }
            let files = experiments::run_experiment(&cfg)?;
            for f in files {
                eprintln!("wrote {}", f.display());
            }
            Ok(())
        }
        Command::Ingest { edges, marks, common } => {
            let ingested = io::ingest_edge_list(&edges)?;
            let text = format!(
                "n={}\nedges={}\ndropped_loops={}\ndropped_duplicates={}\n",
                ingested.graph.n,
                ingested.graph.edge_count(),
                ingested.dropped_loops,
                ingested.dropped_duplicates
            );
            let csv = format!(
                "n,edges,dropped_loops,dropped_duplicates\n{},{},{},{}\n",
                ingested.graph.n,
                ingested.graph.edge_count(),
                ingested.dropped_loops,
                ingested.dropped_duplicates
            );
            if let Some(dir) = &common.out {
                std::fs::create_dir_all(dir)?;
                io::write_edge_list(&ingested.graph, &dir.join("compacted_edges.txt"))?;
                let mut map = String::from("compact_id,original_id\n");
                for (i, id) in ingested.id_map.iter().enumerate() {
                    map.push_str(&format!("{i},{id}\n"));
                }
                io::write_string(&dir.join("id_map.csv"), &map)?;
            }
            let _ = attach_marks(ingested, marks.as_deref())?;
            match common.format {
                Format::Text => print!("{text}"),
                Format::Csv => print!("{csv}"),
            }
            Ok(())
        }
    }
}

/// Consistency-check optional marks against an ingested graph. The marks
/// file defines the full node set (an edge list alone cannot recover
/// isolated nodes), so the graph is rebuilt on original ids against it.
fn attach_marks(
    ingested: io::IngestResult,
    marks: Option<&std::path::Path>,
) -> colas::Result<generator::Graph> {
    let graph = ingested.graph;
    let Some(path) = marks else { return Ok(graph) };
    let m = io::read_marks_csv(path)?;
    if let Some(&max_id) = ingested.id_map.iter().max() {
        if max_id as usize >= m.n {
            return Err(Error::Consistency(format!(
                "edge list references node {max_id} but the marks file has only {} nodes",
                m.n
            )));
        }
    }
    let edges: Vec<(u32, u32)> = graph
        .edges()
        .iter()
        .map(|&(u, v)| {
            let a = ingested.id_map[u as usize] as u32;
            let b = ingested.id_map[v as usize] as u32;
            (a.min(b), a.max(b))
        })
        .collect();
    Ok(generator::Graph::from_edges(m.n, &edges))
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Parameter(_) | Error::Parse(_) => 2,
        Error::Regime(_) | Error::Unsupported(_) | Error::OutOfRange(_) => 3,
        Error::Numeric(_) | Error::Calibration(_) | Error::Consistency(_) => 4,
        Error::Domain(_) => 2,
        Error::Io(_) => 5,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}
