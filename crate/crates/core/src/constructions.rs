//! Explicit curvature sharp weighting schemes: simple random walks, the
//! clique-based construction, the triangle-free linear system, the `K_3`
//! catalog and degenerate schemes on complete graphs.

use std::collections::VecDeque;

use minilp::{ComparisonOp, OptimizationDirection, Problem};
use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::generators::complete_graph;
use crate::graph::{MixedGraph, Vertex, WeightingScheme};

/// Lower slack on the open bound `c > 0`.
pub const POSITIVITY_SLACK: f64 = 1e-10;

const RESIDUAL_TOLERANCE: f64 = 1e-10;

/// Non-lazy simple random walk, `p_xy = 1 / d_x` on outgoing edges.
pub fn simple_random_walk(graph: &MixedGraph) -> Result<WeightingScheme> {
    let n = graph.len();
    let mut rates = DMatrix::zeros(n, n);
    for x in 0..n {
        let out = graph.out_neighbors(x);
        if out.is_empty() {
            return Err(Error::Sink(graph.name(x).to_owned()));
        }
        for &y in out {
            rates[(x, y)] = 1.0 / out.len() as f64;
        }
    }
    WeightingScheme::new(graph.clone(), rates)
}

fn require_unmixed_connected(graph: &MixedGraph) -> Result<()> {
    if !graph.is_unmixed() {
        return Err(Error::Mixed);
    }
    if !graph.is_weakly_connected() {
        return Err(Error::Disconnected);
    }
    Ok(())
}

/// Curvature sharp scheme built around a clique `V_0`: simple random walk on
/// the clique, uniform rates into the clique from its neighbours, and a
/// single unit rate toward the clique from every farther vertex. The parent
/// of a far vertex is its lexicographically first (by name) neighbour one
/// step closer to the clique.
pub fn clique_scheme(graph: &MixedGraph, clique: &[Vertex]) -> Result<WeightingScheme> {
    require_unmixed_connected(graph)?;
    let mut members: Vec<Vertex> = clique.to_vec();
    members.sort_unstable();
    members.dedup();
    if members.len() < 2 {
        return Err(Error::CliqueTooSmall);
    }
    for (i, &a) in members.iter().enumerate() {
        if a >= graph.len() {
            return Err(Error::UnknownVertex(format!("#{a}")));
        }
        for &b in &members[i + 1..] {
            if !graph.has_two_sided(a, b) {
                return Err(Error::NotAClique(
                    graph.name(a).to_owned(),
                    graph.name(b).to_owned(),
                ));
            }
        }
    }

    let n = graph.len();
    let mut depth = vec![usize::MAX; n];
    let mut queue = VecDeque::new();
    for &v in &members {
        depth[v] = 0;
        queue.push_back(v);
    }
    while let Some(v) = queue.pop_front() {
        for &w in graph.out_neighbors(v) {
            if depth[w] == usize::MAX {
                depth[w] = depth[v] + 1;
                queue.push_back(w);
            }
        }
    }

    let size = members.len() as f64;
    let mut rates = DMatrix::zeros(n, n);
    for x in 0..n {
        let nbrs = graph.out_neighbors(x);
        match depth[x] {
            0 => {
                for &y in nbrs.iter().filter(|&&y| depth[y] == 0) {
                    rates[(x, y)] = 1.0 / (size - 1.0);
                }
            }
            1 => {
                let inside: Vec<Vertex> = nbrs.iter().copied().filter(|&y| depth[y] == 0).collect();
                for &y in &inside {
                    rates[(x, y)] = 1.0 / inside.len() as f64;
                }
            }
            d => {
                let parent = nbrs
                    .iter()
                    .copied()
                    .filter(|&y| depth[y] == d - 1)
                    .min_by(|&a, &b| graph.name(a).cmp(graph.name(b)))
                    .expect("BFS parent exists");
                rates[(x, parent)] = 1.0;
            }
        }
    }
    WeightingScheme::new(graph.clone(), rates)
}

#[derive(Clone, Debug)]
pub struct TriangleFreeSolution {
    /// `c_v` in vertex order, all in `(0, 1]`.
    pub c: Vec<f64>,
    /// `A_G` is invertible.
    pub unique: bool,
    pub kernel_dimension: usize,
    /// Orthonormal basis of the kernel of `A_G`.
    pub kernel: Vec<DVector<f64>>,
    /// The scheme `p_xy = c_y`.
    pub scheme: WeightingScheme,
}

/// Scheme `p_xy = c_y` on an unmixed graph; fails if a row does not sum to 1.
pub fn scheme_from_vertex_weights(graph: &MixedGraph, c: &[f64]) -> Result<WeightingScheme> {
    let n = graph.len();
    let mut rates = DMatrix::zeros(n, n);
    for (x, y) in graph.arcs() {
        rates[(x, y)] = c[y];
    }
    WeightingScheme::with_tolerance(graph.clone(), rates, RESIDUAL_TOLERANCE)
}

/// Solves `A_G c = 1` for `c` in `(0, 1]^V` on a connected, unmixed,
/// triangle-free graph. The least-norm solution is tried first, then a
/// linear program maximizing `min_v c_v`.
pub fn triangle_free_solve(graph: &MixedGraph) -> Result<TriangleFreeSolution> {
    require_unmixed_connected(graph)?;
    if let Some((a, b, c)) = graph.find_triangle() {
        return Err(Error::Triangle(
            graph.name(a).to_owned(),
            graph.name(b).to_owned(),
            graph.name(c).to_owned(),
        ));
    }
    let n = graph.len();
    let a = graph.adjacency_matrix();
    let ones = DVector::from_element(n, 1.0);
    let svd = a.clone().svd(true, true);
    let rank_tol = 1e-9 * svd.singular_values.max().max(1.0);
    let rank = svd.rank(rank_tol);
    let kernel_dimension = n - rank;
    let v_t = svd.v_t.as_ref().expect("requested V^T");
    let kernel: Vec<DVector<f64>> = (0..n)
        .filter(|&i| svd.singular_values[i] <= rank_tol)
        .map(|i| v_t.row(i).transpose())
        .collect();
    let least_norm = svd
        .solve(&ones, rank_tol)
        .expect("SVD computed with U and V^T");

    let residual = (&a * &least_norm - &ones).amax();
    if residual > RESIDUAL_TOLERANCE {
        return Err(Error::Infeasible(format!(
            "A_G c = 1 has no solution (least-squares residual {residual:.3e})"
        )));
    }

    let in_range = |c: &DVector<f64>| c.iter().all(|&v| v > POSITIVITY_SLACK && v <= 1.0 + RESIDUAL_TOLERANCE);
    let c = if in_range(&least_norm) {
        least_norm
    } else {
        match max_min_solution(&a) {
            Some(c) if in_range(&c) => {
                // Project back onto the affine solution set to remove LP round-off.
                let fix = svd
                    .solve(&(&a * &c - &ones), rank_tol)
                    .expect("SVD computed with U and V^T");
                c - fix
            }
            _ => {
                let violated: Vec<String> = least_norm
                    .iter()
                    .enumerate()
                    .filter(|(_, &v)| v <= POSITIVITY_SLACK || v > 1.0 + RESIDUAL_TOLERANCE)
                    .map(|(i, v)| format!("c[{}] = {:.6}", graph.name(i), v))
                    .collect();
                return Err(Error::Infeasible(violated.join(", ")));
            }
        }
    };
    let c: Vec<f64> = c.iter().map(|&v| v.min(1.0)).collect();
    let scheme = scheme_from_vertex_weights(graph, &c)?;
    Ok(TriangleFreeSolution {
        c,
        unique: kernel_dimension == 0,
        kernel_dimension,
        kernel,
        scheme,
    })
}

/// Maximizes `t` subject to `A c = 1`, `t <= c_v <= 1`; returns `c` when `t > 0`.
fn max_min_solution(a: &DMatrix<f64>) -> Option<DVector<f64>> {
    let n = a.nrows();
    let mut lp = Problem::new(OptimizationDirection::Maximize);
    let t = lp.add_var(1.0, (0.0, 1.0));
    let c: Vec<_> = (0..n).map(|_| lp.add_var(0.0, (0.0, 1.0))).collect();
    for i in 0..n {
        let row: Vec<_> = (0..n)
            .filter(|&j| a[(i, j)] != 0.0)
            .map(|j| (c[j], a[(i, j)]))
            .collect();
        lp.add_constraint(row.as_slice(), ComparisonOp::Eq, 1.0);
        lp.add_constraint(&[(c[i], 1.0), (t, -1.0)][..], ComparisonOp::Ge, 0.0);
    }
    let sol = lp.solve().ok()?;
    (*sol.var_value(t) > POSITIVITY_SLACK)
        .then(|| DVector::from_iterator(n, c.iter().map(|&v| *sol.var_value(v))))
}

/// The four curvature sharp zero-laziness schemes on `K_3`, listed as
/// `(p01, p02, p10, p12, p20, p21)`; the first is the simple random walk.
pub const K3_CATALOG: [[f64; 6]; 4] = [
    [0.5, 0.5, 0.5, 0.5, 0.5, 0.5],
    [0.0, 1.0, 0.5, 0.5, 1.0, 0.0],
    [0.5, 0.5, 0.0, 1.0, 0.0, 1.0],
    [1.0, 0.0, 1.0, 0.0, 0.5, 0.5],
];

pub fn k3_scheme(p: [f64; 6]) -> Result<WeightingScheme> {
    let [p01, p02, p10, p12, p20, p21] = p;
    let rates = DMatrix::from_row_slice(3, 3, &[0.0, p01, p02, p10, 0.0, p12, p20, p21, 0.0]);
    WeightingScheme::new(complete_graph(3), rates)
}

pub fn k3_catalog() -> Vec<WeightingScheme> {
    K3_CATALOG
        .iter()
        .map(|&p| k3_scheme(p).expect("catalog rows are stochastic"))
        .collect()
}

/// Degenerate sharp scheme on `K_n` around `K_m` (`1 < m < n`): simple random
/// walk on `v0..v{m-1}`, rate `1/m` from every other vertex into each of
/// them, zero otherwise.
pub fn complete_graph_degenerate(n: usize, m: usize) -> Result<WeightingScheme> {
    if m < 2 {
        return Err(Error::CliqueTooSmall);
    }
    if m >= n {
        return Err(Error::InvalidConfig(format!("need m < n, got m = {m}, n = {n}")));
    }
    let mut rates = DMatrix::zeros(n, n);
    for x in 0..n {
        for y in 0..m {
            if x != y {
                rates[(x, y)] = if x < m { 1.0 / (m as f64 - 1.0) } else { 1.0 / m as f64 };
            }
        }
    }
    WeightingScheme::new(complete_graph(n), rates)
}
