//! Bakry-Emery operators of the random walk Laplacian and their local matrix
//! representation on the 2-ball of a vertex.
//!
//! For a vertex `x` with `f(x) = 0`, the forms `Delta f(x)`, `Gamma(f)(x)` and
//! `Gamma_2(f)(x)` only see `f` on `S_1(x) ∪ S_2(x)`, where the spheres are
//! taken with respect to the combinatorial distance `d_G`. [`LocalBlocks`]
//! stores the corresponding vector and matrix blocks, and [`q_matrix`] forms
//! the Schur complement eliminating the 2-sphere.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::graph::{Vertex, WeightingScheme};

/// `p^(2)_{xz}` at or below this value is treated as zero by the
/// pseudoinverse of the diagonal 2-sphere block.
pub const TWO_STEP_THRESHOLD: f64 = 1e-14;

/// `Delta f(v) = sum_w p_vw (f(w) - f(v))`.
pub fn laplacian(scheme: &WeightingScheme, f: &[f64], v: Vertex) -> f64 {
    scheme
        .graph()
        .out_neighbors(v)
        .iter()
        .map(|&w| scheme.rate(v, w) * (f[w] - f[v]))
        .sum()
}

/// `Gamma(f, g)(v) = 1/2 sum_w p_vw (f(w) - f(v)) (g(w) - g(v))`.
pub fn gamma(scheme: &WeightingScheme, f: &[f64], g: &[f64], v: Vertex) -> f64 {
    0.5 * scheme
        .graph()
        .out_neighbors(v)
        .iter()
        .map(|&w| scheme.rate(v, w) * (f[w] - f[v]) * (g[w] - g[v]))
        .sum::<f64>()
}

/// `Gamma_2(f, g)(v)` from `2 Gamma_2(f,g) = Delta Gamma(f,g) - Gamma(f, Delta g) - Gamma(g, Delta f)`,
/// evaluated with whole-graph functions.
pub fn gamma2_bilinear(scheme: &WeightingScheme, f: &[f64], g: &[f64], v: Vertex) -> f64 {
    let n = scheme.len();
    let gamma_fg: Vec<f64> = (0..n).map(|w| gamma(scheme, f, g, w)).collect();
    let lap_f: Vec<f64> = (0..n).map(|w| laplacian(scheme, f, w)).collect();
    let lap_g: Vec<f64> = (0..n).map(|w| laplacian(scheme, g, w)).collect();
    0.5 * (laplacian(scheme, &gamma_fg, v) - gamma(scheme, f, &lap_g, v) - gamma(scheme, g, &lap_f, v))
}

pub fn gamma2(scheme: &WeightingScheme, f: &[f64], v: Vertex) -> f64 {
    gamma2_bilinear(scheme, f, f, v)
}

/// Local blocks of `Delta(x)`, `Gamma(x)` and `Gamma_2(x)` on `S_1 ∪ S_2`.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalBlocks {
    pub x: Vertex,
    pub n_vertices: usize,
    /// `S_1(x)` with respect to `d_G`, in vertex order.
    pub s1: Vec<Vertex>,
    /// `S_2(x)` with respect to `d_G`, in vertex order.
    pub s2: Vec<Vertex>,
    /// `Delta(x)_{S_1} = p_x`.
    pub delta_s1: DVector<f64>,
    /// `Gamma(x)_{S_1} = diag(p_x) / 2`.
    pub gamma_s1: DMatrix<f64>,
    pub gamma2_s1: DMatrix<f64>,
    pub gamma2_s1s2: DMatrix<f64>,
    /// Diagonal, `p^(2)_{xz} / 4`.
    pub gamma2_s2: DMatrix<f64>,
    /// `p^(2)_{xz}` for `z` in `S_2`.
    pub two_step_s2: DVector<f64>,
    /// Diagonal of the pseudoinverse of `gamma2_s2`.
    pub q_weights: DVector<f64>,
}

impl LocalBlocks {
    /// `Gamma_2(x)` on `S_1 ∪ S_2` as one symmetric matrix.
    pub fn gamma2_full(&self) -> DMatrix<f64> {
        let m = self.s1.len();
        let n = self.s2.len();
        let mut full = DMatrix::zeros(m + n, m + n);
        full.view_mut((0, 0), (m, m)).copy_from(&self.gamma2_s1);
        full.view_mut((0, m), (m, n)).copy_from(&self.gamma2_s1s2);
        full.view_mut((m, 0), (n, m))
            .copy_from(&self.gamma2_s1s2.transpose());
        full.view_mut((m, m), (n, n)).copy_from(&self.gamma2_s2);
        full
    }

    /// Vertex order of the rows of [`LocalBlocks::gamma2_full`].
    pub fn local_vertices(&self) -> Vec<Vertex> {
        self.s1.iter().chain(&self.s2).copied().collect()
    }

    /// Restricts a whole-graph function to `S_1 ∪ S_2`, after shifting so that `f(x) = 0`.
    pub fn restrict(&self, f: &[f64]) -> DVector<f64> {
        let fx = f[self.x];
        DVector::from_iterator(
            self.s1.len() + self.s2.len(),
            self.local_vertices().iter().map(|&v| f[v] - fx),
        )
    }
}

/// Symmetric accumulator for a quadratic form `sum c (a.f)(b.f)`.
struct QuadraticForm {
    index: HashMap<Vertex, usize>,
    m: DMatrix<f64>,
}

impl QuadraticForm {
    fn new(vertices: &[Vertex]) -> Self {
        Self {
            index: vertices.iter().enumerate().map(|(i, &v)| (v, i)).collect(),
            m: DMatrix::zeros(vertices.len(), vertices.len()),
        }
    }

    /// Adds `c * (a . f) * (b . f)` for sparse linear forms in `f`; vertices
    /// outside the index (the base point) carry value zero.
    fn add(&mut self, c: f64, a: &[(Vertex, f64)], b: &[(Vertex, f64)]) {
        for &(u, au) in a {
            let Some(&i) = self.index.get(&u) else { continue };
            for &(w, bw) in b {
                let Some(&j) = self.index.get(&w) else { continue };
                let v = 0.5 * c * au * bw;
                self.m[(i, j)] += v;
                self.m[(j, i)] += v;
            }
        }
    }
}

/// Assembles the local blocks at `x`, with spheres taken in `d_G`.
pub fn local_blocks(scheme: &WeightingScheme, x: Vertex) -> LocalBlocks {
    let graph = scheme.graph();
    let dist = graph.distances_from(x);
    let s1: Vec<Vertex> = (0..scheme.len()).filter(|&v| dist[v].is(1)).collect();
    let s2: Vec<Vertex> = (0..scheme.len()).filter(|&v| dist[v].is(2)).collect();
    let m = s1.len();
    let n = s2.len();
    let local: Vec<Vertex> = s1.iter().chain(&s2).copied().collect();

    let dx = scheme.weighted_degree(x);
    let mut form = QuadraticForm::new(&local);

    // 2 Gamma_2(f)(x) = Delta Gamma(f)(x) - 2 Gamma(f, Delta f)(x) with f(x) = 0.
    for &y in graph.out_neighbors(x) {
        let pxy = scheme.rate(x, y);
        if pxy == 0.0 {
            continue;
        }
        // 1/2 p_xy Gamma(f)(y) = 1/4 p_xy sum_z p_yz (f(z) - f(y))^2
        for &z in graph.out_neighbors(y) {
            let pyz = scheme.rate(y, z);
            if pyz == 0.0 {
                continue;
            }
            let diff = [(z, 1.0), (y, -1.0)];
            form.add(0.25 * pxy * pyz, &diff, &diff);
        }
        // -1/2 D_x p_xy Gamma(f)(x) contribution: -1/4 D_x p_xy f(y)^2
        form.add(-0.25 * dx * pxy, &[(y, 1.0)], &[(y, 1.0)]);
        // -Gamma(f, Delta f)(x) = -1/2 sum_y p_xy f(y) (Delta f(y) - Delta f(x))
        let mut lap_y: Vec<(Vertex, f64)> = graph
            .out_neighbors(y)
            .iter()
            .map(|&z| (z, scheme.rate(y, z)))
            .collect();
        lap_y.push((y, -scheme.weighted_degree(y)));
        form.add(-0.5 * pxy, &[(y, 1.0)], &lap_y);
        let lap_x: Vec<(Vertex, f64)> = graph
            .out_neighbors(x)
            .iter()
            .map(|&w| (w, scheme.rate(x, w)))
            .collect();
        form.add(0.5 * pxy, &[(y, 1.0)], &lap_x);
    }

    let full = form.m;
    let gamma2_s1 = full.view((0, 0), (m, m)).into_owned();
    let gamma2_s1s2 = full.view((0, m), (m, n)).into_owned();
    let gamma2_s2 = full.view((m, m), (n, n)).into_owned();

    let delta_s1 = DVector::from_iterator(m, s1.iter().map(|&y| scheme.rate(x, y)));
    let gamma_s1 = DMatrix::from_diagonal(&(&delta_s1 * 0.5));
    let two_step_s2 = DVector::from_iterator(n, s2.iter().map(|&z| scheme.two_step(x, z)));
    let q_weights = two_step_s2.map(|p2| if p2 > TWO_STEP_THRESHOLD { 4.0 / p2 } else { 0.0 });

    LocalBlocks {
        x,
        n_vertices: scheme.len(),
        s1,
        s2,
        delta_s1,
        gamma_s1,
        gamma2_s1,
        gamma2_s1s2,
        gamma2_s2,
        two_step_s2,
        q_weights,
    }
}

/// The Schur complement of `Gamma_2(x)` eliminating the 2-sphere.
#[derive(Clone, Debug, PartialEq)]
pub struct QMatrix {
    pub x: Vertex,
    pub s1: Vec<Vertex>,
    pub entries: DMatrix<f64>,
    /// `q_z = 4 / p^(2)_{xz}` when positive, else 0.
    pub q_weights: DVector<f64>,
}

/// `Q(x) = Gamma_2(x)_{S1} - Gamma_2(x)_{S1,S2} Gamma_2(x)_{S2}^+ Gamma_2(x)_{S2,S1}`.
pub fn q_matrix(blocks: &LocalBlocks) -> QMatrix {
    let b = &blocks.gamma2_s1s2;
    let scaled = DMatrix::from_fn(b.nrows(), b.ncols(), |i, j| b[(i, j)] * blocks.q_weights[j]);
    let mut entries = &blocks.gamma2_s1 - scaled * b.transpose();
    entries = (&entries + entries.transpose()) * 0.5;
    QMatrix {
        x: blocks.x,
        s1: blocks.s1.clone(),
        entries,
        q_weights: blocks.q_weights.clone(),
    }
}

/// Entrywise closed form of `Q(x)` for a Markovian scheme, independent of the
/// block assembly. Spheres are taken in `d_G`.
pub fn q_matrix_closed_form(scheme: &WeightingScheme, x: Vertex) -> DMatrix<f64> {
    let dist = scheme.graph().distances_from(x);
    let s1: Vec<Vertex> = (0..scheme.len()).filter(|&v| dist[v].is(1)).collect();
    let s2: Vec<Vertex> = (0..scheme.len()).filter(|&v| dist[v].is(2)).collect();
    let p = |a: Vertex, b: Vertex| scheme.rate(a, b);
    let q: Vec<f64> = s2
        .iter()
        .map(|&z| {
            let p2 = scheme.two_step(x, z);
            if p2 > TWO_STEP_THRESHOLD {
                4.0 / p2
            } else {
                0.0
            }
        })
        .collect();
    let dx = scheme.weighted_degree(x);
    let m = s1.len();
    DMatrix::from_fn(m, m, |i, j| {
        let (yi, yj) = (s1[i], s1[j]);
        if i == j {
            let y = yi;
            let pxy = p(x, y);
            let out_s2: f64 = s2.iter().map(|&z| p(y, z)).sum();
            let within: f64 = s1
                .iter()
                .filter(|&&w| w != y)
                .map(|&w| 3.0 * pxy * p(y, w) + p(x, w) * p(w, y))
                .sum();
            let schur: f64 = s2
                .iter()
                .zip(&q)
                .map(|(&z, &qz)| pxy * pxy * p(y, z) * p(y, z) * qz)
                .sum();
            0.5 * pxy * pxy + 0.75 * pxy * p(y, x) - 0.25 * dx * pxy + 0.75 * pxy * out_s2
                + 0.25 * within
                - 0.25 * schur
        } else {
            let schur: f64 = s2
                .iter()
                .zip(&q)
                .map(|(&z, &qz)| p(x, yi) * p(yi, z) * p(x, yj) * p(yj, z) * qz)
                .sum();
            0.5 * p(x, yi) * p(x, yj) - 0.5 * p(x, yi) * p(yi, yj) - 0.5 * p(x, yj) * p(yj, yi)
                - 0.25 * schur
        }
    })
}

/// The `Gamma_2`-minimizing extension of a function prescribed on `B_1(x)`.
///
/// Values on `B_1(x)` are kept; on the part of `S_2(x)` reachable by a
/// positive two-step rate they are
/// `-f(x) + 2 / p^(2)_{xz} sum_y p_xy p_yz f(y)`; everywhere else they are 0.
pub fn optimal_extension(blocks: &LocalBlocks, f0: &HashMap<Vertex, f64>) -> Result<DVector<f64>> {
    let value = |v: Vertex| {
        f0.get(&v)
            .copied()
            .ok_or_else(|| Error::MissingValue(format!("#{v}")))
    };
    let fx = value(blocks.x)?;
    let v = DVector::from_iterator(
        blocks.s1.len(),
        blocks
            .s1
            .iter()
            .map(|&y| value(y).map(|fy| fy - fx))
            .collect::<Result<Vec<_>>>()?,
    );
    let w = s2_extension(blocks, &v);

    let mut f = DVector::zeros(blocks.n_vertices);
    f[blocks.x] = fx;
    for (i, &y) in blocks.s1.iter().enumerate() {
        f[y] = v[i] + fx;
    }
    for (j, &z) in blocks.s2.iter().enumerate() {
        if blocks.q_weights[j] > 0.0 {
            f[z] = w[j] + fx;
        }
    }
    Ok(f)
}

/// `w = -Gamma_2(x)_{S2}^+ Gamma_2(x)_{S2,S1} v`.
pub fn s2_extension(blocks: &LocalBlocks, v: &DVector<f64>) -> DVector<f64> {
    let bt_v = blocks.gamma2_s1s2.transpose() * v;
    DVector::from_iterator(
        blocks.s2.len(),
        bt_v.iter()
            .zip(blocks.q_weights.iter())
            .map(|(b, q)| -q * b),
    )
}

/// Whole-graph function with `f(x) = 0`, values `v` on `S_1(x)` and the
/// optimal values on `S_2(x)`.
pub fn extend_from_sphere(blocks: &LocalBlocks, v: &DVector<f64>) -> DVector<f64> {
    let w = s2_extension(blocks, v);
    let mut f = DVector::zeros(blocks.n_vertices);
    for (i, &y) in blocks.s1.iter().enumerate() {
        f[y] = v[i];
    }
    for (j, &z) in blocks.s2.iter().enumerate() {
        f[z] = w[j];
    }
    f
}
