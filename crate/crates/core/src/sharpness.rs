//! Curvature sharpness: the identity `Q(x) 1 = K/2 p_x`, the matrices
//! `M_N(x)`, one-ball defects, volume homogeneity and reversibility.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::Serialize;

use crate::curvature::{upper_bound_dist, Dimension};
use crate::error::{Error, Result};
use crate::graph::{Vertex, WeightingScheme};
use crate::linalg;
use crate::operators;

/// Default tolerance on the residual infinity norm.
pub const DEFAULT_TOLERANCE: f64 = 1e-9;

/// Tolerance of the reversibility test on `|pi_x p_xy - pi_y p_yx|`.
pub const REVERSIBILITY_TOLERANCE: f64 = 1e-10;

const HOMOGENEITY_TOLERANCE: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SharpnessReport {
    pub x: Vertex,
    pub vertex: String,
    /// `S_1(x)` in `G`, the index set of the vectors below.
    pub s1: Vec<String>,
    /// `K_inf^{d_G(x,.)}(x)`.
    pub k_inf_dist: f64,
    pub four_q_one: Vec<f64>,
    /// `4 Q 1 - 2 K_inf^{d} p_x`.
    pub residual: Vec<f64>,
    pub residual_norm: f64,
    pub sharp_via_q: bool,
    pub sharp_via_m2: bool,
    pub one_ball_residuals: Vec<f64>,
    pub volume_homogeneous: bool,
    pub reversible: bool,
    pub degenerate: bool,
}

/// `4 Q(x) 1` from one-ball rates:
/// `p_xy_i (D_x - D_y_i + 4 p_y_i x + 2 sum_{j != i} p_y_i y_j) - sum_{j != i} p_xy_j p_y_j y_i`.
pub fn four_q_one(scheme: &WeightingScheme, x: Vertex) -> DVector<f64> {
    let s1 = scheme.graph().out_neighbors(x);
    let dx = scheme.weighted_degree(x);
    DVector::from_iterator(
        s1.len(),
        s1.iter().map(|&y| {
            let mut within = 0.0;
            let mut incoming = 0.0;
            for &w in s1.iter().filter(|&&w| w != y) {
                within += scheme.rate(y, w);
                incoming += scheme.rate(x, w) * scheme.rate(w, y);
            }
            scheme.rate(x, y)
                * (dx - scheme.weighted_degree(y) + 4.0 * scheme.rate(y, x) + 2.0 * within)
                - incoming
        }),
    )
}

/// Per-neighbour defects of the one-ball sharpness equations,
/// `p_xy (4 p_yx + 2 sum_{y' != y} p_yy' - 4/D sum p_xy' p_y'x - 1/D sum p_xy' p_y'y'' + p_yy)
/// - sum_{y' != y} p_xy' p_y'y`.
pub fn one_ball_residuals(scheme: &WeightingScheme, x: Vertex) -> Result<DVector<f64>> {
    let s1 = scheme.graph().out_neighbors(x);
    let d = scheme.weighted_degree(x);
    if d <= 0.0 {
        return Err(Error::IsolatedVertex(scheme.name(x).to_owned()));
    }
    let p = |a: Vertex, b: Vertex| scheme.rate(a, b);
    let back: f64 = s1.iter().map(|&y| p(x, y) * p(y, x)).sum();
    let within_all: f64 = s1
        .iter()
        .map(|&y| p(x, y) * s1.iter().map(|&w| p(y, w)).sum::<f64>())
        .sum();
    Ok(DVector::from_iterator(
        s1.len(),
        s1.iter().map(|&y| {
            let others = s1.iter().filter(|&&w| w != y);
            let within: f64 = others.clone().map(|&w| p(y, w)).sum();
            let incoming: f64 = others.map(|&w| p(x, w) * p(w, y)).sum();
            p(x, y)
                * (4.0 * p(y, x) + 2.0 * within - 4.0 / d * back - within_all / d + p(y, y))
                - incoming
        }),
    ))
}

/// `M_N(x) = Q(x) - (1/N) p_x p_x^T - K_N^{d_G}(x) / 2 diag(p_x)` on `S_1(x)` of `G`.
pub fn m_matrix(scheme: &WeightingScheme, x: Vertex, n: Dimension) -> Result<DMatrix<f64>> {
    let k = upper_bound_dist(scheme, x, n)?;
    let blocks = operators::local_blocks(scheme, x);
    let q = operators::q_matrix(&blocks);
    let p = &blocks.delta_s1;
    let m = p.len();
    Ok(DMatrix::from_fn(m, m, |i, j| {
        let diag = if i == j { 0.5 * k * p[i] } else { 0.0 };
        q.entries[(i, j)] - n.reciprocal() * p[i] * p[j] - diag
    }))
}

/// `x` is `N`-curvature sharp iff `M_N(x)` is positive semidefinite.
pub fn is_n_sharp(scheme: &WeightingScheme, x: Vertex, n: Dimension) -> Result<bool> {
    Ok(linalg::is_psd(&m_matrix(scheme, x, n)?))
}

/// `p_yx` and the total rate from `y` into `S_2(x)` are the same for all `y` in `S_1(x)`.
pub fn volume_homogeneous(scheme: &WeightingScheme, x: Vertex) -> bool {
    let dist = scheme.graph().distances_from(x);
    let s2: Vec<Vertex> = (0..scheme.len()).filter(|&z| dist[z].is(2)).collect();
    let profile: Vec<(f64, f64)> = scheme
        .graph()
        .out_neighbors(x)
        .iter()
        .map(|&y| (scheme.rate(y, x), s2.iter().map(|&z| scheme.rate(y, z)).sum()))
        .collect();
    profile.windows(2).all(|w| {
        (w[0].0 - w[1].0).abs() <= HOMOGENEITY_TOLERANCE
            && (w[0].1 - w[1].1).abs() <= HOMOGENEITY_TOLERANCE
    })
}

/// Solves `pi P = pi`, `sum pi = 1`. `None` when the system is singular.
pub fn stationary_distribution(scheme: &WeightingScheme) -> Option<DVector<f64>> {
    let n = scheme.len();
    if n == 0 {
        return None;
    }
    let mut a = scheme.rates().transpose() - DMatrix::identity(n, n);
    a.row_mut(n - 1).fill(1.0);
    let mut b = DVector::zeros(n);
    b[n - 1] = 1.0;
    let pi = a.lu().solve(&b)?;
    pi.iter().all(|v| v.is_finite()).then_some(pi)
}

/// Largest detailed-balance defect `|pi_x p_xy - pi_y p_yx|`, or `None` if no
/// strictly positive stationary distribution is found.
pub fn reversibility_defect(scheme: &WeightingScheme) -> Option<f64> {
    let pi = stationary_distribution(scheme)?;
    if pi.iter().any(|&v| v <= 0.0) {
        return None;
    }
    let n = scheme.len();
    let mut worst = 0.0f64;
    for x in 0..n {
        for y in x + 1..n {
            worst = worst.max((pi[x] * scheme.rate(x, y) - pi[y] * scheme.rate(y, x)).abs());
        }
    }
    Some(worst)
}

pub fn is_reversible(scheme: &WeightingScheme) -> bool {
    reversibility_defect(scheme).is_some_and(|d| d < REVERSIBILITY_TOLERANCE)
}

/// Pair defect on complete graphs, `p_xy (1 + 2 p_yx) - 3 p_xy p2_xx - p2_xy`.
pub fn complete_graph_defect(scheme: &WeightingScheme, x: Vertex, y: Vertex) -> f64 {
    let pxy = scheme.rate(x, y);
    pxy * (1.0 + 2.0 * scheme.rate(y, x)) - 3.0 * pxy * scheme.two_step(x, x) - scheme.two_step(x, y)
}

fn report_with(scheme: &WeightingScheme, x: Vertex, tol: f64, reversible: bool) -> Result<SharpnessReport> {
    let inf = Dimension::Infinite;
    let k = upper_bound_dist(scheme, x, inf)?;
    let s1 = scheme.graph().out_neighbors(x);
    let fq = four_q_one(scheme, x);
    let residual: Vec<f64> = fq
        .iter()
        .zip(s1)
        .map(|(v, &y)| v - 2.0 * k * scheme.rate(x, y))
        .collect();
    let residual_norm = linalg::inf_norm(residual.iter().copied());
    let degenerate = s1.iter().any(|&y| scheme.rate(x, y) <= 0.0);
    Ok(SharpnessReport {
        x,
        vertex: scheme.name(x).to_owned(),
        s1: s1.iter().map(|&y| scheme.name(y).to_owned()).collect(),
        k_inf_dist: k,
        four_q_one: fq.iter().copied().collect(),
        residual,
        residual_norm,
        sharp_via_q: residual_norm <= tol,
        sharp_via_m2: is_n_sharp(scheme, x, Dimension::Finite(2.0))?,
        one_ball_residuals: one_ball_residuals(scheme, x)?.iter().copied().collect(),
        volume_homogeneous: volume_homogeneous(scheme, x),
        reversible,
        degenerate,
    })
}

pub fn sharpness_report(scheme: &WeightingScheme, x: Vertex, tol: f64) -> Result<SharpnessReport> {
    report_with(scheme, x, tol, is_reversible(scheme))
}

/// Reports for every non-isolated vertex, in vertex order; isolated vertices give `None`.
pub fn sharpness_all(scheme: &WeightingScheme, tol: f64) -> Vec<Option<SharpnessReport>> {
    let reversible = is_reversible(scheme);
    (0..scheme.len())
        .into_par_iter()
        .map(|x| report_with(scheme, x, tol, reversible).ok())
        .collect()
}
