//! Mixed combinatorial graphs and Markovian weighting schemes on them.
//!
//! A [`MixedGraph`] carries the topology: vertices plus one-sided and
//! two-sided edges. A [`WeightingScheme`] attaches a row-stochastic rate
//! matrix whose off-diagonal support lies on the edges of the graph and whose
//! diagonal holds the laziness.

use std::collections::{BTreeSet, HashMap, VecDeque};
use std::fmt;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Maximum deviation of a row sum from 1 accepted (and then renormalized away).
pub const ROW_TOLERANCE: f64 = 1e-12;

/// Index of a vertex in document order.
pub type Vertex = usize;

/// Directed combinatorial distance; `Infinite` when no directed path exists.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Distance {
    Finite(usize),
    Infinite,
}

impl Distance {
    pub fn is(self, r: usize) -> bool {
        self == Distance::Finite(r)
    }

    pub fn at_most(self, r: usize) -> bool {
        matches!(self, Distance::Finite(d) if d <= r)
    }

    pub fn finite(self) -> Option<usize> {
        match self {
            Distance::Finite(d) => Some(d),
            Distance::Infinite => None,
        }
    }
}

impl fmt::Display for Distance {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Distance::Finite(d) => write!(f, "{d}"),
            Distance::Infinite => f.write_str("inf"),
        }
    }
}

/// A simple mixed graph: no loops, no multiple edges, and no pair joined by
/// both a one-sided and a two-sided edge.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MixedGraph {
    names: Vec<String>,
    index: HashMap<String, Vertex>,
    one_sided: BTreeSet<(Vertex, Vertex)>,
    /// Stored as `(min, max)`.
    two_sided: BTreeSet<(Vertex, Vertex)>,
    out: Vec<Vec<Vertex>>,
}

impl MixedGraph {
    pub fn new(
        names: Vec<String>,
        one_sided: &[(Vertex, Vertex)],
        two_sided: &[(Vertex, Vertex)],
    ) -> Result<Self> {
        let mut index = HashMap::with_capacity(names.len());
        for (i, name) in names.iter().enumerate() {
            if index.insert(name.clone(), i).is_some() {
                return Err(Error::DuplicateVertex(name.clone()));
            }
        }
        let n = names.len();
        let check = |v: Vertex| -> Result<()> {
            if v >= n {
                Err(Error::UnknownVertex(format!("#{v}")))
            } else {
                Ok(())
            }
        };

        let mut pairs: BTreeSet<(Vertex, Vertex)> = BTreeSet::new();
        let mut one = BTreeSet::new();
        let mut two = BTreeSet::new();
        for &(x, y) in one_sided {
            check(x)?;
            check(y)?;
            if x == y {
                return Err(Error::Loop(names[x].clone()));
            }
            if !pairs.insert((x.min(y), x.max(y))) {
                return Err(Error::DuplicateEdge(names[x].clone(), names[y].clone()));
            }
            one.insert((x, y));
        }
        for &(x, y) in two_sided {
            check(x)?;
            check(y)?;
            if x == y {
                return Err(Error::Loop(names[x].clone()));
            }
            let key = (x.min(y), x.max(y));
            if !pairs.insert(key) {
                return Err(Error::DuplicateEdge(names[x].clone(), names[y].clone()));
            }
            two.insert(key);
        }

        let mut out = vec![Vec::new(); n];
        for &(x, y) in &one {
            out[x].push(y);
        }
        for &(x, y) in &two {
            out[x].push(y);
            out[y].push(x);
        }
        for list in &mut out {
            list.sort_unstable();
        }

        Ok(Self {
            names,
            index,
            one_sided: one,
            two_sided: two,
            out,
        })
    }

    /// Builds a graph from vertex names and edges given by name.
    pub fn from_names<S: AsRef<str>>(
        vertices: &[S],
        one_sided: &[(S, S)],
        two_sided: &[(S, S)],
    ) -> Result<Self> {
        let names: Vec<String> = vertices.iter().map(|v| v.as_ref().to_owned()).collect();
        let lookup: HashMap<&str, Vertex> = names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i))
            .collect();
        let resolve = |s: &S| -> Result<Vertex> {
            lookup
                .get(s.as_ref())
                .copied()
                .ok_or_else(|| Error::UnknownVertex(s.as_ref().to_owned()))
        };
        let one = one_sided
            .iter()
            .map(|(a, b)| Ok((resolve(a)?, resolve(b)?)))
            .collect::<Result<Vec<_>>>()?;
        let two = two_sided
            .iter()
            .map(|(a, b)| Ok((resolve(a)?, resolve(b)?)))
            .collect::<Result<Vec<_>>>()?;
        Self::new(names, &one, &two)
    }

    /// An unmixed graph on vertices `v0..v{n-1}`.
    pub fn unmixed(n: usize, edges: &[(Vertex, Vertex)]) -> Result<Self> {
        let names = (0..n).map(|i| format!("v{i}")).collect();
        Self::new(names, &[], edges)
    }

    pub fn len(&self) -> usize {
        self.names.len()
    }

    pub fn is_empty(&self) -> bool {
        self.names.is_empty()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn name(&self, v: Vertex) -> &str {
        &self.names[v]
    }

    pub fn vertex(&self, name: &str) -> Option<Vertex> {
        self.index.get(name).copied()
    }

    pub fn vertex_or_err(&self, name: &str) -> Result<Vertex> {
        self.vertex(name)
            .ok_or_else(|| Error::UnknownVertex(name.to_owned()))
    }

    pub fn one_sided_edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.one_sided.iter().copied()
    }

    pub fn two_sided_edges(&self) -> impl Iterator<Item = (Vertex, Vertex)> + '_ {
        self.two_sided.iter().copied()
    }

    /// Vertices reachable from `x` along one edge, in increasing index order.
    pub fn out_neighbors(&self, x: Vertex) -> &[Vertex] {
        &self.out[x]
    }

    pub fn out_degree(&self, x: Vertex) -> usize {
        self.out[x].len()
    }

    /// True if an edge may be traversed from `x` to `y`.
    pub fn has_arc(&self, x: Vertex, y: Vertex) -> bool {
        self.out[x].binary_search(&y).is_ok()
    }

    pub fn has_two_sided(&self, x: Vertex, y: Vertex) -> bool {
        self.two_sided.contains(&(x.min(y), x.max(y)))
    }

    /// All traversable directed pairs `(x, y)`, ordered by index.
    pub fn arcs(&self) -> Vec<(Vertex, Vertex)> {
        (0..self.len())
            .flat_map(|x| self.out[x].iter().map(move |&y| (x, y)))
            .collect()
    }

    pub fn is_unmixed(&self) -> bool {
        self.one_sided.is_empty()
    }

    /// Adjacency matrix with `A[x][y] = 1` when an edge leads from `x` to `y`.
    pub fn adjacency_matrix(&self) -> DMatrix<f64> {
        let n = self.len();
        let mut a = DMatrix::zeros(n, n);
        for (x, y) in self.arcs() {
            a[(x, y)] = 1.0;
        }
        a
    }

    /// Directed breadth-first distances from `source`.
    pub fn distances_from(&self, source: Vertex) -> Vec<Distance> {
        bfs(self.len(), source, |x| self.out[x].iter().copied())
    }

    /// Connected when directions are ignored.
    pub fn is_weakly_connected(&self) -> bool {
        if self.is_empty() {
            return true;
        }
        let mut undirected = vec![Vec::new(); self.len()];
        for (x, y) in self.arcs() {
            undirected[x].push(y);
            undirected[y].push(x);
        }
        bfs(self.len(), 0, |x| undirected[x].iter().copied())
            .iter()
            .all(|d| *d != Distance::Infinite)
    }

    /// Returns a triangle `(a, b, c)` of mutually adjacent vertices if one exists.
    pub fn find_triangle(&self) -> Option<(Vertex, Vertex, Vertex)> {
        let adjacent = |a: Vertex, b: Vertex| self.has_arc(a, b) || self.has_arc(b, a);
        for a in 0..self.len() {
            for b in a + 1..self.len() {
                if !adjacent(a, b) {
                    continue;
                }
                for c in b + 1..self.len() {
                    if adjacent(a, c) && adjacent(b, c) {
                        return Some((a, b, c));
                    }
                }
            }
        }
        None
    }
}

fn bfs<I, F>(n: usize, source: Vertex, neighbors: F) -> Vec<Distance>
where
    F: Fn(Vertex) -> I,
    I: Iterator<Item = Vertex>,
{
    let mut dist = vec![Distance::Infinite; n];
    dist[source] = Distance::Finite(0);
    let mut queue = VecDeque::from([source]);
    while let Some(v) = queue.pop_front() {
        let Distance::Finite(d) = dist[v] else {
            unreachable!()
        };
        for w in neighbors(v) {
            if dist[w] == Distance::Infinite {
                dist[w] = Distance::Finite(d + 1);
                queue.push_back(w);
            }
        }
    }
    dist
}

/// Degenerate edges and vertices of a weighted graph.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct DegeneracyReport {
    pub degenerate_one_sided: Vec<(Vertex, Vertex)>,
    pub degenerate_two_sided: Vec<(Vertex, Vertex)>,
    pub degenerate_vertices: Vec<Vertex>,
    pub is_degenerate: bool,
}

/// Distances from one source in both `G` and the induced subgraph `G_P`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DistanceField {
    pub source: Vertex,
    pub d_g: Vec<Distance>,
    pub d_p: Vec<Distance>,
}

impl DistanceField {
    pub fn sphere_g(&self, r: usize) -> Vec<Vertex> {
        select(&self.d_g, |d| d.is(r))
    }

    pub fn ball_g(&self, r: usize) -> Vec<Vertex> {
        select(&self.d_g, |d| d.at_most(r))
    }

    pub fn sphere_p(&self, r: usize) -> Vec<Vertex> {
        select(&self.d_p, |d| d.is(r))
    }

    pub fn ball_p(&self, r: usize) -> Vec<Vertex> {
        select(&self.d_p, |d| d.at_most(r))
    }
}

fn select(d: &[Distance], keep: impl Fn(Distance) -> bool) -> Vec<Vertex> {
    d.iter()
        .enumerate()
        .filter(|(_, &d)| keep(d))
        .map(|(v, _)| v)
        .collect()
}

/// A Markovian weighting scheme `P` attached to a mixed graph.
///
/// Off-diagonal entries are transition rates supported on edges; the diagonal
/// holds the laziness. Rows sum to one.
#[derive(Clone, Debug, PartialEq)]
pub struct WeightingScheme {
    graph: MixedGraph,
    rates: DMatrix<f64>,
}

impl WeightingScheme {
    /// Validates `rates` against `graph`. Rows within [`ROW_TOLERANCE`] of
    /// stochastic are rescaled to sum to one; anything worse is rejected.
    pub fn new(graph: MixedGraph, rates: DMatrix<f64>) -> Result<Self> {
        let mut scheme = Self::with_tolerance(graph, rates, ROW_TOLERANCE)?;
        scheme.renormalize();
        Ok(scheme)
    }

    /// Like [`WeightingScheme::new`] but with a caller-chosen row-sum
    /// tolerance and without renormalization.
    pub fn with_tolerance(graph: MixedGraph, rates: DMatrix<f64>, tol: f64) -> Result<Self> {
        let n = graph.len();
        if rates.nrows() != n || rates.ncols() != n {
            return Err(Error::Shape {
                rows: rates.nrows(),
                cols: rates.ncols(),
                n,
            });
        }
        for x in 0..n {
            for y in 0..n {
                let p = rates[(x, y)];
                let err = |value| (graph.name(x).to_owned(), graph.name(y).to_owned(), value);
                if !p.is_finite() {
                    let (from, to, value) = err(p);
                    return Err(Error::NonFiniteRate { from, to, value });
                }
                if p < 0.0 {
                    let (from, to, value) = err(p);
                    return Err(Error::NegativeRate { from, to, value });
                }
                if x != y && p > 0.0 && !graph.has_arc(x, y) {
                    let (from, to, value) = err(p);
                    return Err(Error::RateOnNonEdge { from, to, value });
                }
            }
            let sum: f64 = rates.row(x).iter().sum();
            if (sum - 1.0).abs() > tol {
                return Err(Error::NonStochasticRow {
                    vertex: graph.name(x).to_owned(),
                    sum,
                });
            }
        }
        Ok(Self { graph, rates })
    }

    /// Builds a scheme from off-diagonal rates, filling the diagonal with
    /// whatever laziness makes each row stochastic.
    pub fn from_off_diagonal(graph: MixedGraph, mut rates: DMatrix<f64>) -> Result<Self> {
        for x in 0..graph.len() {
            rates[(x, x)] = 0.0;
            let d: f64 = rates.row(x).iter().sum();
            rates[(x, x)] = (1.0 - d).max(0.0);
        }
        Self::new(graph, rates)
    }

    /// No validation; for internal states of the flow integrator.
    pub(crate) fn from_parts(graph: MixedGraph, rates: DMatrix<f64>) -> Self {
        Self { graph, rates }
    }

    fn renormalize(&mut self) {
        for x in 0..self.len() {
            let sum: f64 = self.rates.row(x).iter().sum();
            if sum != 1.0 && sum > 0.0 {
                let mut row = self.rates.row_mut(x);
                row /= sum;
            }
        }
    }

    pub fn graph(&self) -> &MixedGraph {
        &self.graph
    }

    pub fn rates(&self) -> &DMatrix<f64> {
        &self.rates
    }

    pub fn into_parts(self) -> (MixedGraph, DMatrix<f64>) {
        (self.graph, self.rates)
    }

    pub fn len(&self) -> usize {
        self.graph.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graph.is_empty()
    }

    pub fn name(&self, v: Vertex) -> &str {
        self.graph.name(v)
    }

    #[inline]
    pub fn rate(&self, x: Vertex, y: Vertex) -> f64 {
        self.rates[(x, y)]
    }

    pub fn laziness(&self, x: Vertex) -> f64 {
        self.rates[(x, x)]
    }

    /// `D_x`, the total off-diagonal rate out of `x`.
    pub fn weighted_degree(&self, x: Vertex) -> f64 {
        self.graph.out_neighbors(x).iter().map(|&y| self.rate(x, y)).sum()
    }

    /// `p^(2)_{xz} = sum_y p_xy p_yz`, laziness included.
    pub fn two_step(&self, x: Vertex, z: Vertex) -> f64 {
        (0..self.len()).map(|y| self.rate(x, y) * self.rate(y, z)).sum()
    }

    /// No positive rate leaves `x`.
    pub fn is_isolated(&self, x: Vertex) -> bool {
        self.graph
            .out_neighbors(x)
            .iter()
            .all(|&y| self.rate(x, y) <= 0.0)
    }

    /// Same rates on a different topology; fails if a positive rate lies off
    /// the new edge set.
    pub fn with_graph(&self, graph: MixedGraph) -> Result<Self> {
        Self::with_tolerance(graph, self.rates.clone(), f64::INFINITY)
    }

    /// The induced subgraph `G_P`: a two-sided edge where both directions
    /// carry positive rate, a one-sided edge where exactly one does.
    pub fn induced_subgraph(&self) -> MixedGraph {
        let mut one = Vec::new();
        let mut two = Vec::new();
        for x in 0..self.len() {
            for y in x + 1..self.len() {
                match (self.rate(x, y) > 0.0, self.rate(y, x) > 0.0) {
                    (true, true) => two.push((x, y)),
                    (true, false) => one.push((x, y)),
                    (false, true) => one.push((y, x)),
                    (false, false) => {}
                }
            }
        }
        MixedGraph::new(self.graph.names.clone(), &one, &two)
            .expect("induced subgraph of a valid graph is valid")
    }

    /// The weighted graph `(G_P, P)`.
    pub fn on_induced_subgraph(&self) -> Self {
        Self {
            graph: self.induced_subgraph(),
            rates: self.rates.clone(),
        }
    }

    pub fn degeneracy(&self) -> DegeneracyReport {
        let zero = |x: Vertex, y: Vertex| self.rate(x, y) <= 0.0;
        let degenerate_one_sided: Vec<_> = self
            .graph
            .one_sided_edges()
            .filter(|&(x, y)| zero(x, y))
            .collect();
        let degenerate_two_sided: Vec<_> = self
            .graph
            .two_sided_edges()
            .filter(|&(x, y)| zero(x, y) || zero(y, x))
            .collect();
        let degenerate_vertices: Vec<_> = (0..self.len())
            .filter(|&x| self.graph.out_neighbors(x).iter().any(|&y| zero(x, y)))
            .collect();
        let is_degenerate = !degenerate_one_sided.is_empty() || !degenerate_two_sided.is_empty();
        DegeneracyReport {
            degenerate_one_sided,
            degenerate_two_sided,
            degenerate_vertices,
            is_degenerate,
        }
    }

    pub fn distances(&self, x: Vertex) -> DistanceField {
        DistanceField {
            source: x,
            d_g: self.graph.distances_from(x),
            d_p: self.induced_subgraph().distances_from(x),
        }
    }

    /// Largest `|sum_y p_xy - 1|` over all rows.
    pub fn row_sum_defect(&self) -> f64 {
        (0..self.len())
            .map(|x| (self.rates.row(x).iter().sum::<f64>() - 1.0).abs())
            .fold(0.0, f64::max)
    }

    /// Smallest rate on an edge (laziness excluded).
    pub fn min_edge_rate(&self) -> f64 {
        self.graph
            .arcs()
            .into_iter()
            .map(|(x, y)| self.rate(x, y))
            .fold(f64::INFINITY, f64::min)
    }
}
