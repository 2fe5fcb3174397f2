//! JSON graph documents and trajectory CSV.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::flow::FlowTrajectory;
use crate::graph::{DegeneracyReport, MixedGraph, WeightingScheme};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RateEntry {
    pub from: String,
    pub to: String,
    pub p: f64,
}

/// On-disk description of a graph and, optionally, its weighting scheme.
/// Unlisted rates are zero; laziness defaults to zero.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GraphDocument {
    pub vertices: Vec<String>,
    #[serde(default)]
    pub two_sided_edges: Vec<[String; 2]>,
    #[serde(default)]
    pub one_sided_edges: Vec<[String; 2]>,
    #[serde(default)]
    pub rates: Vec<RateEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub laziness: Option<BTreeMap<String, f64>>,
}

impl GraphDocument {
    pub fn topology(&self) -> Result<MixedGraph> {
        let pairs = |e: &[[String; 2]]| -> Vec<(String, String)> {
            e.iter().map(|[a, b]| (a.clone(), b.clone())).collect()
        };
        MixedGraph::from_names(
            &self.vertices,
            &pairs(&self.one_sided_edges),
            &pairs(&self.two_sided_edges),
        )
    }

    pub fn scheme(&self) -> Result<WeightingScheme> {
        let graph = self.topology()?;
        let n = graph.len();
        let mut rates = DMatrix::zeros(n, n);
        let mut seen = HashSet::new();
        for r in &self.rates {
            let x = graph.vertex_or_err(&r.from)?;
            let y = graph.vertex_or_err(&r.to)?;
            if x == y {
                return Err(Error::Loop(r.from.clone()));
            }
            if !seen.insert((x, y)) {
                return Err(Error::DuplicateRate(r.from.clone(), r.to.clone()));
            }
            rates[(x, y)] = r.p;
        }
        for (v, &p) in self.laziness.iter().flatten() {
            let x = graph.vertex_or_err(v)?;
            rates[(x, x)] = p;
        }
        WeightingScheme::new(graph, rates)
    }
}

pub fn parse_document(text: &str) -> Result<GraphDocument> {
    Ok(serde_json::from_str(text)?)
}

pub fn read_document(path: &Path) -> Result<GraphDocument> {
    parse_document(&std::fs::read_to_string(path)?)
}

/// Parses and validates a scheme, classifying its degeneracy.
pub fn load_and_validate(text: &str) -> Result<(WeightingScheme, DegeneracyReport)> {
    let scheme = parse_document(text)?.scheme()?;
    let report = scheme.degeneracy();
    Ok((scheme, report))
}

pub fn load_scheme(path: &Path) -> Result<WeightingScheme> {
    read_document(path)?.scheme()
}

/// Topology only; any rates in the document are ignored.
pub fn load_topology(path: &Path) -> Result<MixedGraph> {
    read_document(path)?.topology()
}

pub fn topology_document(graph: &MixedGraph) -> GraphDocument {
    let name = |v| graph.name(v).to_owned();
    GraphDocument {
        vertices: graph.names().to_vec(),
        two_sided_edges: graph.two_sided_edges().map(|(a, b)| [name(a), name(b)]).collect(),
        one_sided_edges: graph.one_sided_edges().map(|(a, b)| [name(a), name(b)]).collect(),
        rates: Vec::new(),
        laziness: None,
    }
}

/// Lossless document for a scheme: every positive edge rate plus every laziness.
pub fn to_document(scheme: &WeightingScheme) -> GraphDocument {
    let graph = scheme.graph();
    let mut doc = topology_document(graph);
    doc.rates = graph
        .arcs()
        .into_iter()
        .filter(|&(x, y)| scheme.rate(x, y) != 0.0)
        .map(|(x, y)| RateEntry {
            from: graph.name(x).to_owned(),
            to: graph.name(y).to_owned(),
            p: scheme.rate(x, y),
        })
        .collect();
    doc.laziness = Some(
        (0..scheme.len())
            .map(|x| (graph.name(x).to_owned(), scheme.laziness(x)))
            .collect(),
    );
    doc
}

pub fn write_json<T: Serialize, W: Write>(value: &T, mut out: W) -> Result<()> {
    serde_json::to_writer_pretty(&mut out, value)?;
    writeln!(out)?;
    Ok(())
}

/// Rounds to 12 significant digits.
pub fn round12(v: f64) -> f64 {
    if !v.is_finite() || v == 0.0 {
        return v;
    }
    format!("{v:.11e}").parse().unwrap_or(v)
}

/// Header of the trajectory CSV: diagnostics then one column per arc, in
/// index order of `(from, to)`.
pub fn trajectory_header(scheme: &WeightingScheme) -> Vec<String> {
    let g = scheme.graph();
    let mut head: Vec<String> = ["t", "rhs_inf_norm", "row_sum_defect", "min_rate"]
        .map(String::from)
        .to_vec();
    head.extend(
        g.arcs()
            .into_iter()
            .map(|(x, y)| format!("p_{}_{}", g.name(x), g.name(y))),
    );
    head
}

pub fn write_trajectory<W: Write>(trajectory: &FlowTrajectory, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(trajectory_header(&trajectory.final_scheme))?;
    let arcs = trajectory.final_scheme.graph().arcs();
    for ((t, s), d) in trajectory
        .times
        .iter()
        .zip(&trajectory.schemes)
        .zip(&trajectory.diagnostics)
    {
        let mut row = vec![*t, d.rhs_inf_norm, d.row_sum_defect, d.min_rate];
        row.extend(arcs.iter().map(|&(x, y)| s.rate(x, y)));
        w.write_record(row.into_iter().map(|v| round12(v).to_string()))?;
    }
    w.flush()?;
    Ok(())
}
