//! Per-vertex summaries and their fixed-width text rendering.

use std::fmt::Write;

use serde::Serialize;

use crate::curvature::{curvature, theoretical_bounds, upper_bound_dist, CurvatureRoute, Dimension};
use crate::graph::WeightingScheme;
use crate::io::round12;
use crate::sharpness::sharpness_all;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct VertexSummary {
    pub vertex: String,
    pub k: f64,
    pub route: CurvatureRoute,
    /// `K_N^{d_G(x,.)}(x)`; absent at isolated vertices.
    pub k_dist: Option<f64>,
    /// Lower and upper bounds, present for `N >= 2` at non-isolated vertices.
    pub lower_bound: Option<f64>,
    pub upper_bound: Option<f64>,
    pub residual_norm: Option<f64>,
    pub sharp: Option<bool>,
    pub degenerate: bool,
    pub isolated: bool,
}

pub fn summarize(scheme: &WeightingScheme, n: Dimension, tol: f64) -> Vec<VertexSummary> {
    let reports = sharpness_all(scheme, tol);
    let degenerate = scheme.degeneracy().degenerate_vertices;
    (0..scheme.len())
        .map(|x| {
            let c = curvature(scheme, x, n);
            let bounds = theoretical_bounds(scheme, x, n).ok();
            let rep = reports[x].as_ref();
            VertexSummary {
                vertex: scheme.name(x).to_owned(),
                k: round12(c.value),
                route: c.route,
                k_dist: upper_bound_dist(scheme, x, n).ok().map(round12),
                lower_bound: bounds.map(|b| round12(b.0)),
                upper_bound: bounds.map(|b| round12(b.1)),
                residual_norm: rep.map(|r| round12(r.residual_norm)),
                sharp: rep.map(|r| r.sharp_via_q),
                degenerate: degenerate.contains(&x),
                isolated: c.route == CurvatureRoute::IsolatedVertex,
            }
        })
        .collect()
}

fn num(v: Option<f64>) -> String {
    v.map_or_else(|| "isolated".to_owned(), |v| format!("{v:.12}"))
}

/// Columns: vertex, K_N, K_N^d, residual, sharp?, degenerate?.
pub fn render_table(rows: &[VertexSummary]) -> String {
    let width = rows.iter().map(|r| r.vertex.len()).max().unwrap_or(0).max(6);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<width$}  {:>16}  {:>16}  {:>16}  {:>8}  {:>11}",
        "vertex", "K_N", "K_N^d", "residual", "sharp?", "degenerate?"
    );
    for r in rows {
        let sharp = match r.sharp {
            Some(true) => "yes",
            Some(false) => "no",
            None => "isolated",
        };
        let _ = writeln!(
            out,
            "{:<width$}  {:>16.12}  {:>16}  {:>16}  {:>8}  {:>11}",
            r.vertex,
            r.k,
            num(r.k_dist),
            num(r.residual_norm),
            sharp,
            if r.degenerate { "yes" } else { "no" },
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::generators;
    use crate::sharpness::DEFAULT_TOLERANCE;
    use nalgebra::DMatrix;

    #[test]
    fn k3_table_all_sharp() {
        let rows = summarize(&generators::k3_srw(), Dimension::Infinite, DEFAULT_TOLERANCE);
        assert_eq!(rows.len(), 3);
        assert!(rows.iter().all(|r| r.sharp == Some(true) && r.k == 1.25));
        let text = render_table(&rows);
        assert_eq!(text.lines().count(), 4);
        assert!(text.lines().skip(1).all(|l| l.contains("yes")));
    }

    #[test]
    fn path3_inner_vertex_not_sharp() {
        let rows = summarize(&generators::path3(0.3), Dimension::Infinite, DEFAULT_TOLERANCE);
        assert_eq!(rows[1].sharp, Some(false));
    }

    #[test]
    fn isolated_row() {
        let g = generators::path_graph(2);
        let rates = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 1.0, 0.0]);
        let s = WeightingScheme::new(g, rates).unwrap();
        let rows = summarize(&s, Dimension::Infinite, DEFAULT_TOLERANCE);
        assert!(rows[0].isolated && rows[0].k == 0.0);
        let line = render_table(&rows).lines().nth(1).unwrap().to_owned();
        assert!(line.contains("isolated"), "{line}");
    }
}
