//! Bakry-Emery curvature `K_N(x)` and the distance-function upper bounds.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::graph::{Vertex, WeightingScheme};
use crate::linalg;
use crate::operators::{self, LocalBlocks};

/// Dimension parameter `N` in `(0, inf]`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Dimension {
    Finite(f64),
    Infinite,
}

impl Dimension {
    pub fn finite(n: f64) -> Result<Self> {
        if n.is_finite() && n > 0.0 {
            Ok(Dimension::Finite(n))
        } else if n == f64::INFINITY {
            Ok(Dimension::Infinite)
        } else {
            Err(Error::InvalidDimension(n.to_string()))
        }
    }

    /// `1/N`, zero for `N = inf`.
    pub fn reciprocal(self) -> f64 {
        match self {
            Dimension::Finite(n) => 1.0 / n,
            Dimension::Infinite => 0.0,
        }
    }

    pub fn as_f64(self) -> f64 {
        match self {
            Dimension::Finite(n) => n,
            Dimension::Infinite => f64::INFINITY,
        }
    }
}

impl FromStr for Dimension {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "inf" | "infinity" | "Inf" | "INF" => Ok(Dimension::Infinite),
            t => t
                .parse::<f64>()
                .ok()
                .filter(|n| n.is_finite())
                .ok_or_else(|| Error::InvalidDimension(s.to_owned()))
                .and_then(Dimension::finite),
        }
    }
}

impl fmt::Display for Dimension {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Dimension::Finite(n) => write!(f, "{n}"),
            Dimension::Infinite => f.write_str("inf"),
        }
    }
}

impl Serialize for Dimension {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Dimension::Finite(n) => s.serialize_f64(*n),
            Dimension::Infinite => s.serialize_str("inf"),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurvatureRoute {
    /// Smallest eigenvalue of the curvature matrix on the induced subgraph.
    EigenOnInducedSubgraph,
    /// No positive rate leaves the vertex; curvature is set to zero.
    IsolatedVertex,
}

#[derive(Clone, Debug, PartialEq)]
pub struct CurvatureResult {
    pub x: Vertex,
    pub dimension: Dimension,
    pub value: f64,
    /// `S_1(x)` in the induced subgraph; rows of `curvature_matrix`.
    pub s1: Vec<Vertex>,
    pub curvature_matrix: Option<DMatrix<f64>>,
    pub route: CurvatureRoute,
}

/// Curvature matrix `A_N(x)` on the induced subgraph together with its
/// local blocks and `v_0 = (sqrt(p_xy))_y`. `None` at isolated vertices.
pub fn curvature_matrix(
    scheme: &WeightingScheme,
    x: Vertex,
    n: Dimension,
) -> Option<(DMatrix<f64>, LocalBlocks, DVector<f64>)> {
    if scheme.is_isolated(x) {
        return None;
    }
    let gp = scheme.on_induced_subgraph();
    let blocks = operators::local_blocks(&gp, x);
    let q = operators::q_matrix(&blocks);
    let v0 = blocks.delta_s1.map(f64::sqrt);
    let m = v0.len();
    let a = DMatrix::from_fn(m, m, |i, j| {
        2.0 * q.entries[(i, j)] / (v0[i] * v0[j]) - 2.0 * n.reciprocal() * v0[i] * v0[j]
    });
    Some(((&a + a.transpose()) * 0.5, blocks, v0))
}

pub fn curvature(scheme: &WeightingScheme, x: Vertex, n: Dimension) -> CurvatureResult {
    match curvature_matrix(scheme, x, n) {
        None => CurvatureResult {
            x,
            dimension: n,
            value: 0.0,
            s1: Vec::new(),
            curvature_matrix: None,
            route: CurvatureRoute::IsolatedVertex,
        },
        Some((a, blocks, _)) => CurvatureResult {
            x,
            dimension: n,
            value: linalg::min_eigenvalue(&a),
            s1: blocks.s1,
            curvature_matrix: Some(a),
            route: CurvatureRoute::EigenOnInducedSubgraph,
        },
    }
}

/// Curvature at every vertex, in vertex order.
pub fn curvature_all(scheme: &WeightingScheme, n: Dimension) -> Vec<CurvatureResult> {
    (0..scheme.len())
        .into_par_iter()
        .map(|x| curvature(scheme, x, n))
        .collect()
}

/// A function attaining `K_N(x)` as its upper bound `K_N^f(x)`: the minimal
/// eigenvector of `A_N(x)` lifted by `diag(v_0)^{-1}` and extended optimally
/// to the 2-sphere of the induced subgraph. Zero at `x`.
pub fn optimal_test_function(scheme: &WeightingScheme, x: Vertex, n: Dimension) -> Option<DVector<f64>> {
    let (a, blocks, v0) = curvature_matrix(scheme, x, n)?;
    let (_, e) = linalg::min_eigenpair(&a)?;
    let v = e.component_div(&v0);
    Some(operators::extend_from_sphere(&blocks, &v))
}

/// `K_N^f(x) = (Gamma_2(f)(x) - (Delta f(x))^2 / N) / Gamma(f)(x)`.
pub fn upper_bound_f(scheme: &WeightingScheme, x: Vertex, f: &[f64], n: Dimension) -> Result<f64> {
    let g = operators::gamma(scheme, f, f, x);
    if g.abs() < 1e-300 {
        return Err(Error::DegenerateTestFunction);
    }
    let lap = operators::laplacian(scheme, f, x);
    Ok((operators::gamma2(scheme, f, x) - lap * lap * n.reciprocal()) / g)
}

fn require_degree(scheme: &WeightingScheme, x: Vertex) -> Result<f64> {
    let d = scheme.weighted_degree(x);
    if d > 0.0 {
        Ok(d)
    } else {
        Err(Error::IsolatedVertex(scheme.name(x).to_owned()))
    }
}

/// `K_N^{d_G(x,.)}(x)` from one-ball data only:
/// `(4 sum p_xy p_yx + sum_{y,y'} p_xy p_yy') / (2 D_x) - p_xx / 2 - 2 D_x / N`,
/// where `y, y'` range over `S_1(x)` and `y = y'` contributes the laziness of `y`.
pub fn upper_bound_dist(scheme: &WeightingScheme, x: Vertex, n: Dimension) -> Result<f64> {
    let d = require_degree(scheme, x)?;
    let s1 = scheme.graph().out_neighbors(x);
    let mut back = 0.0;
    let mut within = 0.0;
    for &y in s1 {
        let pxy = scheme.rate(x, y);
        back += pxy * scheme.rate(y, x);
        within += pxy * s1.iter().map(|&w| scheme.rate(y, w)).sum::<f64>();
    }
    Ok((4.0 * back + within) / (2.0 * d) - scheme.laziness(x) / 2.0 - 2.0 * d * n.reciprocal())
}

/// The same bound via the two-sphere:
/// `D_x/2 + (3 p2_xx - 3 p_xx^2 - sum_{z in S_2} p2_xz) / (2 D_x) - 2 D_x / N`.
pub fn upper_bound_dist_sphere_form(scheme: &WeightingScheme, x: Vertex, n: Dimension) -> Result<f64> {
    let d = require_degree(scheme, x)?;
    let dist = scheme.graph().distances_from(x);
    let out_s2: f64 = (0..scheme.len())
        .filter(|&z| dist[z].is(2))
        .map(|z| scheme.two_step(x, z))
        .sum();
    let pxx = scheme.laziness(x);
    Ok(d / 2.0 + (3.0 * scheme.two_step(x, x) - 3.0 * pxx * pxx - out_s2) / (2.0 * d)
        - 2.0 * d * n.reciprocal())
}

/// Lower and upper curvature bounds valid for `N >= 2`:
/// `-1 + p_xx/2 + min_y (2 p_yx + 1/2 sum_z min(p_yz, p_xz p_zy / p_xy))` and `2 - 2 D_x / N`,
/// with `y` over `S_1^P(x)` and `z` over the common out-neighbours in the induced subgraph.
///
/// The pair term is weighted by `p_xz / p_xy`; the unweighted `min(p_yz, p_zy)`
/// agrees whenever `x` spreads its mass evenly, but is not a lower bound in general.
pub fn theoretical_bounds(scheme: &WeightingScheme, x: Vertex, n: Dimension) -> Result<(f64, f64)> {
    if n.as_f64() < 2.0 {
        return Err(Error::UnsupportedDimension(n.as_f64()));
    }
    let d = require_degree(scheme, x)?;
    let gp = scheme.induced_subgraph();
    let sx = gp.out_neighbors(x);
    let min_term = sx
        .iter()
        .map(|&y| {
            let common: f64 = gp
                .out_neighbors(y)
                .iter()
                .filter(|z| sx.contains(z))
                .map(|&z| scheme.rate(y, z).min(scheme.rate(x, z) * scheme.rate(z, y) / scheme.rate(x, y)))
                .sum();
            2.0 * scheme.rate(y, x) + 0.5 * common
        })
        .fold(f64::INFINITY, f64::min);
    let lower = -1.0 + scheme.laziness(x) / 2.0 + min_term;
    Ok((lower, 2.0 - 2.0 * d * n.reciprocal()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;

    const INF: Dimension = Dimension::Infinite;

    #[test]
    fn k3_srw_is_five_quarters() {
        let s = generators::k3_srw();
        for x in 0..3 {
            let r = curvature(&s, x, INF);
            assert!((r.value - 1.25).abs() < 1e-12);
            assert_eq!(r.route, CurvatureRoute::EigenOnInducedSubgraph);
            assert!((upper_bound_dist(&s, x, INF).unwrap() - 1.25).abs() < 1e-15);
        }
    }

    #[test]
    fn complete_graph_srw_constant() {
        for n in 3..7 {
            let s = crate::constructions::simple_random_walk(&generators::complete_graph(n)).unwrap();
            let expect = 0.5 + 1.5 / (n as f64 - 1.0);
            assert!((curvature(&s, 0, INF).value - expect).abs() < 1e-12);
            assert!((upper_bound_dist(&s, 0, INF).unwrap() - expect).abs() < 1e-12);
        }
    }

    #[test]
    fn square_and_path3_closed_forms() {
        for p in [0.1, 0.3, 0.5, 0.8] {
            let s = generators::square(p);
            assert!((curvature(&s, 0, INF).value - 2.0 * p.min(1.0 - p)).abs() < 1e-12);
            let ub = 2.0 * (1.0 - 2.0 * p * (1.0 - p));
            assert!((upper_bound_dist(&s, 0, INF).unwrap() - ub).abs() < 1e-12);

            let s = generators::path3(p);
            let k = 0.5 + p - (12.0 * p * p - 20.0 * p + 9.0).sqrt() / 2.0;
            assert!((curvature(&s, 1, INF).value - k).abs() < 1e-12);
            let ub = 2.0 - 2.0 * p * (1.0 - p);
            assert!((upper_bound_dist(&s, 1, INF).unwrap() - ub).abs() < 1e-12);
        }
    }

    #[test]
    fn endpoints_jump_to_two() {
        for p in [0.0, 1.0] {
            assert!((curvature(&generators::square(p), 0, INF).value - 2.0).abs() < 1e-12);
            assert!((curvature(&generators::path3(p), 1, INF).value - 2.0).abs() < 1e-12);
        }
    }

    #[test]
    fn isolated_vertex_is_zero() {
        let g = generators::path_graph(2);
        let rates = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.5, 0.5]);
        let s = WeightingScheme::new(g, rates).unwrap();
        for n in [Dimension::Finite(1.0), INF] {
            let r = curvature(&s, 0, n);
            assert_eq!(r.value, 0.0);
            assert_eq!(r.route, CurvatureRoute::IsolatedVertex);
        }
        assert!(matches!(
            upper_bound_dist(&s, 0, INF),
            Err(Error::IsolatedVertex(_))
        ));
    }

    #[test]
    fn bounds_and_dimension_parsing() {
        let s = generators::k3_srw();
        let (lo, hi) = theoretical_bounds(&s, 0, INF).unwrap();
        assert!((lo - 0.25).abs() < 1e-15);
        assert_eq!(hi, 2.0);
        let (_, hi) = theoretical_bounds(&s, 0, Dimension::Finite(2.0)).unwrap();
        assert_eq!(hi, 1.0);
        assert!(matches!(
            theoretical_bounds(&s, 0, Dimension::Finite(1.5)),
            Err(Error::UnsupportedDimension(_))
        ));

        let c = crate::constructions::simple_random_walk(&generators::hypercube(3)).unwrap();
        let (lo, _) = theoretical_bounds(&c, 0, INF).unwrap();
        assert!((lo - (-1.0 + 2.0 / 3.0)).abs() < 1e-15);

        assert_eq!("inf".parse::<Dimension>().unwrap(), INF);
        assert_eq!("2.5".parse::<Dimension>().unwrap(), Dimension::Finite(2.5));
        assert!("0".parse::<Dimension>().is_err());
        assert!("-1".parse::<Dimension>().is_err());
        assert!("x".parse::<Dimension>().is_err());
    }

    #[test]
    fn constant_test_function_is_rejected() {
        let s = generators::k3_srw();
        assert!(matches!(
            upper_bound_f(&s, 0, &[1.0, 1.0, 1.0], INF),
            Err(Error::DegenerateTestFunction)
        ));
        let f = [0.0, 1.0, 1.0];
        let kf = upper_bound_f(&s, 0, &f, INF).unwrap();
        assert!((kf - upper_bound_dist(&s, 0, INF).unwrap()).abs() < 1e-14);
    }
}
