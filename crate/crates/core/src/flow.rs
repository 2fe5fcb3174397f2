//! The normalized curvature flow `p_x' = -4 Q(x) 1 + 2 K_inf^{d}(x) p_x`,
//! integrated with fixed-step RK4 and frozen laziness.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Vertex, WeightingScheme};
use crate::linalg;
use crate::sharpness::{sharpness_all, SharpnessReport};

/// Residual bar for certifying a converged limit as sharp.
pub const LIMIT_TOLERANCE: f64 = 1e-6;

/// Graphs at least this large evaluate RHS rows in parallel.
const PARALLEL_THRESHOLD: usize = 64;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FlowConfig {
    pub dt: f64,
    pub t_max: f64,
    /// Convergence when the RHS infinity norm stays below this at two consecutive evaluations.
    pub convergence_tol: f64,
    /// Record a snapshot every this many steps (the first and last are always kept).
    pub record_every: usize,
    /// Negative rates down to `-clamp_tol` are clamped to zero; anything below aborts.
    pub clamp_tol: f64,
    /// Stop as soon as convergence is detected instead of running to `t_max`.
    pub stop_at_convergence: bool,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            dt: 0.01,
            t_max: 100.0,
            convergence_tol: 1e-8,
            record_every: 100,
            clamp_tol: 1e-9,
            stop_at_convergence: true,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidConfig(m.to_owned()));
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return bad("dt must be positive");
        }
        if !(self.t_max.is_finite() && self.t_max >= 0.0) {
            return bad("t_max must be nonnegative");
        }
        if !(self.convergence_tol > 0.0) || !(self.clamp_tol > 0.0) {
            return bad("tolerances must be positive");
        }
        if self.record_every == 0 {
            return bad("record_every must be at least 1");
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Diagnostics {
    pub row_sum_defect: f64,
    pub min_rate: f64,
    /// Largest `|p_xx(t) - p_xx(0)|`.
    pub laziness_drift: f64,
    pub rhs_inf_norm: f64,
}

#[derive(Clone, Debug)]
pub struct FlowTrajectory {
    pub times: Vec<f64>,
    pub schemes: Vec<WeightingScheme>,
    pub diagnostics: Vec<Diagnostics>,
    pub converged: bool,
    /// Time of the second consecutive evaluation below the tolerance.
    pub converged_at: Option<f64>,
    pub final_scheme: WeightingScheme,
}

fn rhs_row(scheme: &WeightingScheme, x: Vertex) -> Vec<(Vertex, f64)> {
    let s1 = scheme.graph().out_neighbors(x);
    let d = scheme.weighted_degree(x);
    if d <= 0.0 {
        return s1.iter().map(|&y| (y, 0.0)).collect();
    }
    let p = |a: Vertex, b: Vertex| scheme.rate(a, b);
    let back: f64 = s1.iter().map(|&y| p(x, y) * p(y, x)).sum();
    let within_all: f64 = s1
        .iter()
        .map(|&y| p(x, y) * s1.iter().map(|&w| p(y, w)).sum::<f64>())
        .sum();
    s1.iter()
        .map(|&y| {
            let mut within = 0.0;
            let mut incoming = 0.0;
            for &w in s1.iter().filter(|&&w| w != y) {
                within += p(y, w);
                incoming += p(x, w) * p(w, y);
            }
            let f = p(x, y)
                * (-4.0 * p(y, x) - 2.0 * within + 4.0 / d * back + within_all / d - p(y, y))
                + incoming;
            (y, f)
        })
        .collect()
}

/// Derivative of the rate matrix under the flow. Diagonal entries are zero,
/// rows at vertices with `D_x = 0` are zero.
pub fn flow_rhs(scheme: &WeightingScheme) -> DMatrix<f64> {
    let n = scheme.len();
    let rows: Vec<Vec<(Vertex, f64)>> = if n >= PARALLEL_THRESHOLD {
        (0..n).into_par_iter().map(|x| rhs_row(scheme, x)).collect()
    } else {
        (0..n).map(|x| rhs_row(scheme, x)).collect()
    };
    let mut out = DMatrix::zeros(n, n);
    for (x, row) in rows.into_iter().enumerate() {
        for (y, f) in row {
            out[(x, y)] = f;
        }
    }
    out
}

fn diagnostics(scheme: &WeightingScheme, lazy0: &[f64], rhs_norm: f64) -> Diagnostics {
    Diagnostics {
        row_sum_defect: scheme.row_sum_defect(),
        min_rate: scheme.min_edge_rate().min(
            (0..scheme.len())
                .map(|x| scheme.laziness(x))
                .fold(f64::INFINITY, f64::min),
        ),
        laziness_drift: (0..scheme.len())
            .map(|x| (scheme.laziness(x) - lazy0[x]).abs())
            .fold(0.0, f64::max),
        rhs_inf_norm: rhs_norm,
    }
}

/// Clamps float-noise negatives, aborts on real ones, then rescales each
/// row's off-diagonal part back to its initial total.
fn project(
    scheme: &WeightingScheme,
    rates: &mut DMatrix<f64>,
    lazy0: &[f64],
    degree0: &[f64],
    t: f64,
    clamp_tol: f64,
) -> Result<()> {
    let graph = scheme.graph();
    for x in 0..rates.nrows() {
        rates[(x, x)] = lazy0[x];
        let mut sum = 0.0;
        for &y in graph.out_neighbors(x) {
            let v = rates[(x, y)];
            if !v.is_finite() || v < -clamp_tol {
                return Err(Error::FlowBlowUp {
                    t,
                    from: graph.name(x).to_owned(),
                    to: graph.name(y).to_owned(),
                    value: v,
                });
            }
            if v < 0.0 {
                rates[(x, y)] = 0.0;
            }
            sum += rates[(x, y)];
        }
        if sum > 0.0 && sum != degree0[x] {
            let scale = degree0[x] / sum;
            for &y in graph.out_neighbors(x) {
                rates[(x, y)] *= scale;
            }
        }
    }
    Ok(())
}

/// Integrates the flow from `scheme` with classical RK4.
pub fn integrate(scheme: &WeightingScheme, config: &FlowConfig) -> Result<FlowTrajectory> {
    config.validate()?;
    let graph = scheme.graph().clone();
    let n = scheme.len();
    let lazy0: Vec<f64> = (0..n).map(|x| scheme.laziness(x)).collect();
    let degree0: Vec<f64> = (0..n).map(|x| scheme.weighted_degree(x)).collect();
    let state = |r: DMatrix<f64>| WeightingScheme::from_parts(graph.clone(), r);

    let mut current = scheme.clone();
    let mut k1 = flow_rhs(&current);
    let mut norm = linalg::inf_norm(k1.iter().copied());
    let mut below = usize::from(norm < config.convergence_tol);

    let mut times = vec![0.0];
    let mut schemes = vec![current.clone()];
    let mut diags = vec![diagnostics(&current, &lazy0, norm)];
    let mut converged_at = None;

    let mut t = 0.0;
    let mut step = 0usize;
    let eps = 1e-12 * config.dt;
    while t < config.t_max - eps {
        let h = config.dt.min(config.t_max - t);
        let p = current.rates();
        let k2 = flow_rhs(&state(p + &k1 * (h / 2.0)));
        let k3 = flow_rhs(&state(p + &k2 * (h / 2.0)));
        let k4 = flow_rhs(&state(p + &k3 * h));
        let mut next = p + (&k1 + &k2 * 2.0 + &k3 * 2.0 + &k4) * (h / 6.0);
        step += 1;
        t = if config.t_max - (t + h) <= eps { config.t_max } else { t + h };
        project(&current, &mut next, &lazy0, &degree0, t, config.clamp_tol)?;

        current = state(next);
        k1 = flow_rhs(&current);
        norm = linalg::inf_norm(k1.iter().copied());
        if norm < config.convergence_tol {
            below += 1;
        } else {
            below = 0;
        }
        if below >= 2 && converged_at.is_none() {
            converged_at = Some(t);
        }
        let done = converged_at.is_some() && config.stop_at_convergence;
        let last = done || t >= config.t_max;
        if step % config.record_every == 0 || last {
            times.push(t);
            schemes.push(current.clone());
            diags.push(diagnostics(&current, &lazy0, norm));
        }
        if done {
            break;
        }
    }

    Ok(FlowTrajectory {
        times,
        schemes,
        diagnostics: diags,
        converged: converged_at.is_some(),
        converged_at,
        final_scheme: current,
    })
}

/// Sharpness reports of the limit at every vertex (`None` at isolated ones)
/// and whether all residuals are below [`LIMIT_TOLERANCE`].
pub fn certify_limit(trajectory: &FlowTrajectory) -> Result<(Vec<Option<SharpnessReport>>, bool)> {
    if !trajectory.converged {
        return Err(Error::NotConverged);
    }
    let reports = sharpness_all(&trajectory.final_scheme, LIMIT_TOLERANCE);
    let ok = reports
        .iter()
        .flatten()
        .all(|r| r.residual_norm < LIMIT_TOLERANCE);
    Ok((reports, ok))
}
