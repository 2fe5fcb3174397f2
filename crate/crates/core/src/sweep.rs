//! Parameter sweeps over the square and path families and batches of flow runs.

use std::io::Write;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{curvature, upper_bound_dist, Dimension};
use crate::error::{Error, Result};
use crate::flow::{certify_limit, integrate, FlowConfig, LIMIT_TOLERANCE};
use crate::generators;
use crate::graph::{MixedGraph, WeightingScheme};
use crate::io::round12;
use crate::sharpness::sharpness_all;

/// An edge rate below this in a limit scheme counts as vanished.
pub const DEGENERACY_THRESHOLD: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct SweepRow {
    pub p: f64,
    pub k_inf: f64,
    pub k_inf_dist: f64,
}

/// Parses `a:b:step` into `a, a + step, ...` up to and including `b`.
pub fn parse_grid(spec: &str) -> Result<Vec<f64>> {
    let bad = || Error::InvalidGrid(spec.to_owned());
    let parts: Vec<f64> = spec
        .split(':')
        .map(|s| s.trim().parse::<f64>().map_err(|_| bad()))
        .collect::<Result<_>>()?;
    let [a, b, step] = parts[..] else {
        return Err(bad());
    };
    if !(a.is_finite() && b.is_finite() && step.is_finite() && step > 0.0 && b >= a) {
        return Err(bad());
    }
    let count = ((b - a) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| (a + i as f64 * step).min(b)).collect())
}

fn check_grid(grid: &[f64]) -> Result<()> {
    match grid.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        Some(p) => Err(Error::InvalidGrid(format!("{p} is outside [0, 1]"))),
        None => Ok(()),
    }
}

fn sweep(grid: &[f64], family: fn(f64) -> WeightingScheme, x: usize) -> Result<Vec<SweepRow>> {
    check_grid(grid)?;
    grid.par_iter()
        .map(|&p| {
            let s = family(p);
            Ok(SweepRow {
                p,
                k_inf: curvature(&s, x, Dimension::Infinite).value,
                k_inf_dist: upper_bound_dist(&s, x, Dimension::Infinite)?,
            })
        })
        .collect()
}

/// `(p, K_inf(v0), K_inf^{d}(v0))` on the square with rates `p`, `1 - p`.
pub fn sweep_square(grid: &[f64]) -> Result<Vec<SweepRow>> {
    sweep(grid, generators::square, 0)
}

/// `(p, K_inf(v1), K_inf^{d}(v1))` on the path of length 3 with inner rate `p`.
pub fn sweep_path3(grid: &[f64]) -> Result<Vec<SweepRow>> {
    sweep(grid, generators::path3, 1)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p", "K_inf", "K_inf_dist"])?;
    for r in rows {
        w.write_record([r.p, r.k_inf, r.k_inf_dist].map(|v| round12(v).to_string()))?;
    }
    w.flush()?;
    Ok(())
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct BatchRow {
    pub graph: String,
    pub seed: u64,
    pub converged: bool,
    /// Convergence time, or the horizon when not converged.
    pub time: f64,
    pub final_min_rate: f64,
    /// Every vertex residual of the final scheme is below the limit tolerance.
    pub limit_sharp: bool,
    /// Some edge rate of the final scheme is below [`DEGENERACY_THRESHOLD`].
    pub limit_degenerate: bool,
}

/// Runs the flow from `seeds` random non-degenerate zero-laziness starts on
/// every graph. Seeds are `0..seeds`; rows follow input order.
pub fn flow_batch(graphs: &[(String, MixedGraph)], seeds: u64, config: &FlowConfig) -> Result<Vec<BatchRow>> {
    let jobs: Vec<(usize, u64)> = (0..graphs.len())
        .flat_map(|g| (0..seeds).map(move |s| (g, s)))
        .collect();
    jobs.par_iter()
        .map(|&(g, seed)| {
            let (name, graph) = &graphs[g];
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let start = generators::random_scheme(graph, false, &mut rng);
            let traj = integrate(&start, config)?;
            let fin = &traj.final_scheme;
            let limit_sharp = match certify_limit(&traj) {
                Ok((_, ok)) => ok,
                Err(_) => sharpness_all(fin, LIMIT_TOLERANCE)
                    .iter()
                    .flatten()
                    .all(|r| r.residual_norm < LIMIT_TOLERANCE),
            };
            Ok(BatchRow {
                graph: name.clone(),
                seed,
                converged: traj.converged,
                time: traj.converged_at.unwrap_or(*traj.times.last().unwrap()),
                final_min_rate: fin.min_edge_rate(),
                limit_sharp,
                limit_degenerate: fin.min_edge_rate() < DEGENERACY_THRESHOLD,
            })
        })
        .collect()
}

pub fn write_batch_csv<W: Write>(rows: &[BatchRow], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "graph",
        "seed",
        "converged",
        "time",
        "final_min_rate",
        "limit_sharp",
        "limit_degenerate",
    ])?;
    for r in rows {
        w.write_record([
            r.graph.clone(),
            r.seed.to_string(),
            r.converged.to_string(),
            round12(r.time).to_string(),
            round12(r.final_min_rate).to_string(),
            r.limit_sharp.to_string(),
            r.limit_degenerate.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
