//! Command-line front end. Each subcommand is a thin adapter over the library.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::constructions::{clique_scheme, k3_catalog, simple_random_walk, triangle_free_solve};
use crate::curvature::Dimension;
use crate::error::{Error, Result};
use crate::flow::{certify_limit, integrate, FlowConfig};
use crate::io::{self as docio, round12, to_document, write_json};
use crate::report::{render_table, summarize};
use crate::sharpness::{is_n_sharp, sharpness_all, DEFAULT_TOLERANCE};
use crate::sweep::{flow_batch, parse_grid, sweep_path3, sweep_square, write_batch_csv, write_sweep_csv};

#[derive(Debug, Parser)]
#[command(name = "curveflow", version, about = "Bakry-Emery curvature, sharpness and curvature flow on weighted graphs")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Curvature K_N and its bounds at every vertex.
    Curvature {
        graph: PathBuf,
        #[arg(long, default_value = "inf")]
        dimension: Dimension,
        /// Restrict the report to one vertex.
        #[arg(long)]
        vertex: Option<String>,
        /// Fixed-width table instead of JSON.
        #[arg(long)]
        text: bool,
    },
    /// Per-vertex sharpness certificates.
    Sharpness {
        graph: PathBuf,
        /// Also test N-sharpness for this dimension.
        #[arg(long)]
        dimension: Option<Dimension>,
        #[arg(long, default_value_t = DEFAULT_TOLERANCE)]
        tol: f64,
        #[arg(long)]
        text: bool,
    },
    /// Integrate the curvature flow.
    Flow {
        graph: PathBuf,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long = "t-max")]
        t_max: f64,
        /// Convergence threshold on the RHS infinity norm.
        #[arg(long, default_value_t = 1e-8)]
        tol: f64,
        #[arg(long, default_value_t = 100)]
        record_every: usize,
        /// Trajectory CSV.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Final scheme as a graph document.
        #[arg(long = "final")]
        final_scheme: Option<PathBuf>,
    },
    /// Build a curvature sharp scheme.
    Construct {
        #[arg(long, value_enum)]
        kind: Kind,
        /// Topology document (not needed for k3-catalog).
        #[arg(long)]
        graph: Option<PathBuf>,
        /// Comma-separated clique vertices.
        #[arg(long, value_delimiter = ',')]
        clique: Vec<String>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Curvature sweep over a one-parameter family.
    Sweep {
        #[arg(long, value_enum)]
        family: Family,
        /// `a:b:step`
        #[arg(long)]
        grid: String,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Flow runs from random starts on every graph document in a directory.
    FlowBatch {
        #[arg(long)]
        graphs: PathBuf,
        #[arg(long, default_value_t = 1)]
        seeds: u64,
        #[arg(long, default_value_t = 0.01)]
        dt: f64,
        #[arg(long = "t-max", default_value_t = 100.0)]
        t_max: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Kind {
    Srw,
    Clique,
    TriangleFree,
    K3Catalog,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    Square,
    Path3,
}

/// Exit status for an error: 2 infeasible construction, 3 flow blow-up, 1 otherwise.
pub fn exit_code(err: &Error) -> i32 {
    match err {
        Error::Infeasible(_) => 2,
        Error::FlowBlowUp { .. } => 3,
        _ => 1,
    }
}

fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

#[derive(Serialize)]
struct SharpnessEntry {
    vertex: String,
    isolated: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    n_sharp: Option<bool>,
    #[serde(flatten)]
    report: Option<crate::sharpness::SharpnessReport>,
}

#[derive(Serialize)]
struct FlowSummary {
    converged: bool,
    converged_at: Option<f64>,
    t_final: f64,
    steps_recorded: usize,
    rhs_inf_norm: f64,
    row_sum_defect: f64,
    min_rate: f64,
    limit_sharp: Option<bool>,
}

pub fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Curvature { graph, dimension, vertex, text } => {
            let scheme = docio::load_scheme(&graph)?;
            let mut rows = summarize(&scheme, dimension, DEFAULT_TOLERANCE);
            if let Some(v) = vertex {
                scheme.graph().vertex_or_err(&v)?;
                rows.retain(|r| r.vertex == v);
            }
            let mut out = sink(None)?;
            if text {
                out.write_all(render_table(&rows).as_bytes())?;
            } else {
                #[derive(Serialize)]
                struct Doc<'a> {
                    dimension: Dimension,
                    vertices: &'a [crate::report::VertexSummary],
                }
                write_json(&Doc { dimension, vertices: &rows }, &mut out)?;
            }
            out.flush()?;
        }
        Command::Sharpness { graph, dimension, tol, text } => {
            let scheme = docio::load_scheme(&graph)?;
            let mut out = sink(None)?;
            if text {
                let rows = summarize(&scheme, dimension.unwrap_or(Dimension::Infinite), tol);
                out.write_all(render_table(&rows).as_bytes())?;
            } else {
                let entries: Vec<SharpnessEntry> = sharpness_all(&scheme, tol)
                    .into_iter()
                    .enumerate()
                    .map(|(x, report)| SharpnessEntry {
                        vertex: scheme.name(x).to_owned(),
                        isolated: report.is_none(),
                        n_sharp: dimension.and_then(|n| is_n_sharp(&scheme, x, n).ok()),
                        report,
                    })
                    .collect();
                write_json(&entries, &mut out)?;
            }
            out.flush()?;
        }
        Command::Flow { graph, dt, t_max, tol, record_every, out, final_scheme } => {
            let scheme = docio::load_scheme(&graph)?;
            let config = FlowConfig {
                dt,
                t_max,
                convergence_tol: tol,
                record_every,
                ..FlowConfig::default()
            };
            let traj = integrate(&scheme, &config)?;
            if let Some(path) = out {
                docio::write_trajectory(&traj, BufWriter::new(File::create(path)?))?;
            }
            if let Some(path) = final_scheme {
                write_json(&to_document(&traj.final_scheme), BufWriter::new(File::create(path)?))?;
            }
            let last = traj.diagnostics.last().expect("at least one snapshot");
            let summary = FlowSummary {
                converged: traj.converged,
                converged_at: traj.converged_at,
                t_final: *traj.times.last().unwrap(),
                steps_recorded: traj.times.len(),
                rhs_inf_norm: round12(last.rhs_inf_norm),
                row_sum_defect: round12(last.row_sum_defect),
                min_rate: round12(last.min_rate),
                limit_sharp: certify_limit(&traj).ok().map(|(_, ok)| ok),
            };
            let mut stdout = sink(None)?;
            write_json(&summary, &mut stdout)?;
            stdout.flush()?;
        }
        Command::Construct { kind, graph, clique, out } => {
            let mut w = sink(out.as_deref())?;
            if kind == Kind::K3Catalog {
                let docs: Vec<_> = k3_catalog().iter().map(to_document).collect();
                write_json(&docs, &mut w)?;
            } else {
                let path = graph.ok_or_else(|| Error::InvalidConfig("--graph is required".into()))?;
                let topo = docio::load_topology(&path)?;
                let scheme = match kind {
                    Kind::Srw => simple_random_walk(&topo)?,
                    Kind::Clique => {
                        let members = clique
                            .iter()
                            .map(|v| topo.vertex_or_err(v))
                            .collect::<Result<Vec<_>>>()?;
                        clique_scheme(&topo, &members)?
                    }
                    Kind::TriangleFree => triangle_free_solve(&topo)?.scheme,
                    Kind::K3Catalog => unreachable!(),
                };
                write_json(&to_document(&scheme), &mut w)?;
            }
            w.flush()?;
        }
        Command::Sweep { family, grid, out } => {
            let grid = parse_grid(&grid)?;
            let rows = match family {
                Family::Square => sweep_square(&grid)?,
                Family::Path3 => sweep_path3(&grid)?,
            };
            write_sweep_csv(&rows, sink(out.as_deref())?)?;
        }
        Command::FlowBatch { graphs, seeds, dt, t_max, out } => {
            let mut paths: Vec<PathBuf> = std::fs::read_dir(&graphs)?
                .map(|e| e.map(|e| e.path()))
                .collect::<io::Result<_>>()?;
            paths.retain(|p| p.extension().is_some_and(|e| e == "json"));
            paths.sort();
            let inputs = paths
                .iter()
                .map(|p| {
                    let name = p.file_stem().unwrap_or_default().to_string_lossy().into_owned();
                    Ok((name, docio::load_topology(p)?))
                })
                .collect::<Result<Vec<_>>>()?;
            let config = FlowConfig { dt, t_max, ..FlowConfig::default() };
            let rows = flow_batch(&inputs, seeds, &config)?;
            write_batch_csv(&rows, sink(out.as_deref())?)?;
        }
    }
    Ok(())
}

/// Configures the global thread pool from `CURVEFLOW_THREADS` (0 or unset = automatic).
pub fn init_threads() {
    if let Some(n) = std::env::var("CURVEFLOW_THREADS")
        .ok()
        .and_then(|v| v.trim().parse::<usize>().ok())
        .filter(|&n| n > 0)
    {
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
}
