//! Independent oracles for the integration tests. Nothing here calls the
//! library's operator assembly, Schur complement or curvature routines; only
//! the rate matrix and the edge lists are read.
#![allow(dead_code)]

use std::collections::VecDeque;

use curveflow::generators;
use curveflow::{MixedGraph, WeightingScheme};
use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol
}

/// Directed BFS over the edge lists.
pub fn bfs(g: &MixedGraph, x: usize) -> Vec<Option<usize>> {
    let mut adj = vec![Vec::new(); g.len()];
    for (a, b) in g.one_sided_edges() {
        adj[a].push(b);
    }
    for (a, b) in g.two_sided_edges() {
        adj[a].push(b);
        adj[b].push(a);
    }
    let mut d = vec![None; g.len()];
    d[x] = Some(0);
    let mut q = VecDeque::from([x]);
    while let Some(v) = q.pop_front() {
        for &w in &adj[v] {
            if d[w].is_none() {
                d[w] = Some(d[v].unwrap() + 1);
                q.push_back(w);
            }
        }
    }
    d
}

pub fn sphere(g: &MixedGraph, x: usize, r: usize) -> Vec<usize> {
    bfs(g, x)
        .iter()
        .enumerate()
        .filter(|(_, d)| **d == Some(r))
        .map(|(v, _)| v)
        .collect()
}

fn p(s: &WeightingScheme, a: usize, b: usize) -> f64 {
    s.rates()[(a, b)]
}

pub fn lap(s: &WeightingScheme, f: &[f64], x: usize) -> f64 {
    (0..s.len()).filter(|&y| y != x).map(|y| p(s, x, y) * (f[y] - f[x])).sum()
}

pub fn gam(s: &WeightingScheme, f: &[f64], x: usize) -> f64 {
    0.5 * (0..s.len())
        .filter(|&y| y != x)
        .map(|y| p(s, x, y) * (f[y] - f[x]).powi(2))
        .sum::<f64>()
}

/// `Gamma_2(f)(x)` through the summation identity valid for Markovian schemes:
/// `(-1 + p_xx/2) Gamma(f) + (Delta f)^2 / 2 + 1/4 sum_{y != x} p_xy sum_z p_yz (f_z - 2 f_y + f_x)^2`.
pub fn gamma2_sum(s: &WeightingScheme, f: &[f64], x: usize) -> f64 {
    let n = s.len();
    let mut tail = 0.0;
    for y in (0..n).filter(|&y| y != x) {
        let pxy = p(s, x, y);
        if pxy == 0.0 {
            continue;
        }
        for z in 0..n {
            tail += pxy * p(s, y, z) * (f[z] - 2.0 * f[y] + f[x]).powi(2);
        }
    }
    let l = lap(s, f, x);
    (-1.0 + p(s, x, x) / 2.0) * gam(s, f, x) + 0.5 * l * l + 0.25 * tail
}

/// `Gamma_2(f)(x)` straight from `2 Gamma_2 = Delta Gamma - 2 Gamma(f, Delta f)`.
pub fn gamma2_direct(s: &WeightingScheme, f: &[f64], x: usize) -> f64 {
    let n = s.len();
    let g: Vec<f64> = (0..n).map(|v| gam(s, f, v)).collect();
    let lf: Vec<f64> = (0..n).map(|v| lap(s, f, v)).collect();
    let cross: f64 = 0.5
        * (0..n)
            .filter(|&y| y != x)
            .map(|y| p(s, x, y) * (f[y] - f[x]) * (lf[y] - lf[x]))
            .sum::<f64>();
    0.5 * lap(s, &g, x) - cross
}

/// Matrix of `f -> Gamma_2(f)(x)` on the listed vertices (with `f(x) = 0`), by polarization.
pub fn gamma2_matrix(s: &WeightingScheme, x: usize, verts: &[usize]) -> DMatrix<f64> {
    let n = s.len();
    let unit = |i: usize| {
        let mut f = vec![0.0; n];
        f[verts[i]] = 1.0;
        f
    };
    let m = verts.len();
    let diag: Vec<f64> = (0..m).map(|i| gamma2_sum(s, &unit(i), x)).collect();
    DMatrix::from_fn(m, m, |i, j| {
        if i == j {
            diag[i]
        } else {
            let mut f = unit(i);
            f[verts[j]] = 1.0;
            (gamma2_sum(s, &f, x) - diag[i] - diag[j]) / 2.0
        }
    })
}

/// Pseudoinverse of a symmetric matrix through its eigendecomposition,
/// dropping eigenvalues below `1e-13` in magnitude.
pub fn sym_pinv(c: &DMatrix<f64>) -> DMatrix<f64> {
    let e = SymmetricEigen::new(c.clone());
    let inv = e.eigenvalues.map(|l| if l.abs() > 1e-13 { 1.0 / l } else { 0.0 });
    &e.eigenvectors * DMatrix::from_diagonal(&inv) * e.eigenvectors.transpose()
}

/// Schur complement of the polarized `Gamma_2` matrix eliminating `S_2`,
/// using an eigendecomposition pseudoinverse. Returns `(S_1, S_2, Q)`.
pub fn q_oracle(s: &WeightingScheme, x: usize) -> (Vec<usize>, Vec<usize>, DMatrix<f64>) {
    let s1 = sphere(s.graph(), x, 1);
    let s2 = sphere(s.graph(), x, 2);
    let verts: Vec<usize> = s1.iter().chain(&s2).copied().collect();
    let full = gamma2_matrix(s, x, &verts);
    let full = (&full + full.transpose()) * 0.5;
    let (m, k) = (s1.len(), s2.len());
    let a = full.view((0, 0), (m, m)).into_owned();
    let b = full.view((0, m), (m, k)).into_owned();
    let c = full.view((m, m), (k, k)).into_owned();
    let q = if k == 0 {
        a
    } else {
        &a - &b * sym_pinv(&c) * b.transpose()
    };
    (s1, s2, (&q + q.transpose()) * 0.5)
}

pub fn min_eig(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return f64::INFINITY;
    }
    SymmetricEigen::new((m + m.transpose()) * 0.5).eigenvalues.min()
}

/// Largest `K` with `Q - (1/N) p p^T - (K/2) diag(p)` positive semidefinite,
/// by 60 bisection steps on `[-4, 2]`. Meant for non-degenerate vertices.
pub fn bisection_curvature(s: &WeightingScheme, x: usize, inv_n: f64) -> f64 {
    let (s1, _, q) = q_oracle(s, x);
    let pv = DVector::from_iterator(s1.len(), s1.iter().map(|&y| p(s, x, y)));
    let psd = |k: f64| {
        let m = &q - &pv * pv.transpose() * inv_n - DMatrix::from_diagonal(&(&pv * (k / 2.0)));
        min_eig(&m) >= -1e-13
    };
    let (mut lo, mut hi) = (-4.0, 2.0);
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if psd(mid) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    lo
}

/// `min_w Gamma_2(v on S_1, w on S_2)(x)` by exact per-coordinate parabola
/// fits (the form is separable in the `S_2` values).
pub fn brute_min_gamma2(s: &WeightingScheme, x: usize, v: &[f64]) -> f64 {
    let n = s.len();
    let s1 = sphere(s.graph(), x, 1);
    let s2 = sphere(s.graph(), x, 2);
    let mut f = vec![0.0; n];
    for (i, &y) in s1.iter().enumerate() {
        f[y] = v[i];
    }
    for &z in &s2 {
        let mut at = |t: f64| {
            f[z] = t;
            gamma2_sum(s, &f, x)
        };
        let (g0, g1, gm) = (at(0.0), at(1.0), at(-1.0));
        let curv = (g1 + gm - 2.0 * g0) / 2.0;
        let slope = (g1 - gm) / 2.0;
        f[z] = if curv > 1e-15 { -slope / (2.0 * curv) } else { 0.0 };
    }
    gamma2_sum(s, &f, x)
}

/// Random connected graph on `2..=max_n` vertices, sometimes with one-sided edges.
pub fn random_graph<R: Rng>(max_n: usize, r: &mut R) -> MixedGraph {
    let n = r.random_range(2..=max_n);
    let density = r.random_range(0.1..0.7);
    if r.random_bool(0.3) {
        generators::random_mixed_graph(n, density, 0.5, r)
    } else {
        generators::random_connected_graph(n, density, r)
    }
}

/// 100-scheme style corpus: random non-degenerate schemes, half of them lazy.
pub fn random_corpus(count: usize, max_n: usize, seed: u64) -> Vec<WeightingScheme> {
    let mut r = rng(seed);
    (0..count)
        .map(|_| {
            let g = random_graph(max_n, &mut r);
            let lazy = r.random_bool(0.5);
            generators::random_scheme(&g, lazy, &mut r)
        })
        .collect()
}

/// Known sharp schemes, several of them degenerate.
pub fn sharp_corpus() -> Vec<WeightingScheme> {
    use curveflow::constructions::*;
    let mut out = k3_catalog();
    for n in [4, 5] {
        out.push(simple_random_walk(&generators::complete_graph(n)).unwrap());
    }
    out.push(simple_random_walk(&generators::hypercube(3)).unwrap());
    out.push(simple_random_walk(&generators::cycle_graph(5)).unwrap());
    out.push(generators::square(0.5));
    out.push(generators::path3(0.0));
    out.push(generators::path3(1.0));
    out.push(clique_scheme(&generators::petersen(), &[0, 1]).unwrap());
    out.push(complete_graph_degenerate(5, 3).unwrap());
    out.push(triangle_free_solve(&generators::cycle_graph(6)).unwrap().scheme);
    out
}

pub fn random_vector<R: Rng>(m: usize, r: &mut R) -> Vec<f64> {
    (0..m).map(|_| r.random_range(-1.0..1.0)).collect()
}
