//! Named graphs and schemes used by the examples, sweeps and tests, plus
//! seeded random topologies and schemes.

use nalgebra::DMatrix;
use rand::Rng;

use crate::constructions::simple_random_walk;
use crate::graph::{MixedGraph, Vertex, WeightingScheme};

pub fn complete_graph(n: usize) -> MixedGraph {
    let edges: Vec<_> = (0..n)
        .flat_map(|a| (a + 1..n).map(move |b| (a, b)))
        .collect();
    MixedGraph::unmixed(n, &edges).unwrap()
}

pub fn cycle_graph(n: usize) -> MixedGraph {
    let edges: Vec<_> = (0..n).map(|a| (a, (a + 1) % n)).collect();
    MixedGraph::unmixed(n, &edges).unwrap()
}

/// Path on `n` vertices.
pub fn path_graph(n: usize) -> MixedGraph {
    let edges: Vec<_> = (1..n).map(|a| (a - 1, a)).collect();
    MixedGraph::unmixed(n, &edges).unwrap()
}

/// Star with center `v0` and `leaves` leaves.
pub fn star_graph(leaves: usize) -> MixedGraph {
    let edges: Vec<_> = (1..=leaves).map(|l| (0, l)).collect();
    MixedGraph::unmixed(leaves + 1, &edges).unwrap()
}

/// Hypercube `Q^d`; vertex `i` is adjacent to `i ^ (1 << k)`.
pub fn hypercube(d: u32) -> MixedGraph {
    let n = 1usize << d;
    let edges: Vec<_> = (0..n)
        .flat_map(|a| (0..d).map(move |k| (a, a ^ (1 << k))))
        .filter(|&(a, b)| a < b)
        .collect();
    MixedGraph::unmixed(n, &edges).unwrap()
}

/// Petersen graph: outer 5-cycle `0..5`, spokes `i - i+5`, inner pentagram.
pub fn petersen() -> MixedGraph {
    let mut edges = Vec::new();
    for i in 0..5 {
        edges.push((i, (i + 1) % 5));
        edges.push((i, i + 5));
        edges.push((5 + i, 5 + (i + 2) % 5));
    }
    MixedGraph::unmixed(10, &edges).unwrap()
}

/// Ball of radius `depth` around the root of the `d`-regular tree.
pub fn regular_tree(d: usize, depth: usize) -> MixedGraph {
    let mut edges = Vec::new();
    let mut frontier = vec![0usize];
    let mut n = 1;
    for level in 0..depth {
        let mut next = Vec::new();
        for &v in &frontier {
            let children = if level == 0 { d } else { d - 1 };
            for _ in 0..children {
                edges.push((v, n));
                next.push(n);
                n += 1;
            }
        }
        frontier = next;
    }
    MixedGraph::unmixed(n, &edges).unwrap()
}

pub fn k3_srw() -> WeightingScheme {
    simple_random_walk(&complete_graph(3)).unwrap()
}

/// The 4-cycle `v0 v1 v2 v3` with rate `p` along the horizontal edges
/// `{v0,v1}`, `{v2,v3}` and `1 - p` along the vertical ones.
pub fn square(p: f64) -> WeightingScheme {
    let q = 1.0 - p;
    let rates = DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, p, 0.0, q, //
            p, 0.0, q, 0.0, //
            0.0, q, 0.0, p, //
            q, 0.0, p, 0.0,
        ],
    );
    WeightingScheme::new(cycle_graph(4), rates).unwrap()
}

/// Path `v0 v1 v2 v3` with rate `p` in both directions along the inner edge
/// and the remaining mass pushed outward.
pub fn path3(p: f64) -> WeightingScheme {
    let q = 1.0 - p;
    let rates = DMatrix::from_row_slice(
        4,
        4,
        &[
            0.0, 1.0, 0.0, 0.0, //
            q, 0.0, p, 0.0, //
            0.0, p, 0.0, q, //
            0.0, 0.0, 1.0, 0.0,
        ],
    );
    WeightingScheme::new(path_graph(4), rates).unwrap()
}

/// Random tree on `n` vertices (each vertex attaches to a uniformly chosen earlier one).
pub fn random_tree<R: Rng>(n: usize, rng: &mut R) -> MixedGraph {
    let edges: Vec<_> = (1..n).map(|v| (rng.random_range(0..v), v)).collect();
    MixedGraph::unmixed(n, &edges).unwrap()
}

/// Random connected unmixed graph: a random tree plus each remaining pair
/// with probability `density`.
pub fn random_connected_graph<R: Rng>(n: usize, density: f64, rng: &mut R) -> MixedGraph {
    let tree = random_tree(n, rng);
    let mut edges: Vec<_> = tree.two_sided_edges().collect();
    for a in 0..n {
        for b in a + 1..n {
            if !tree.has_two_sided(a, b) && rng.random_bool(density) {
                edges.push((a, b));
            }
        }
    }
    MixedGraph::unmixed(n, &edges).unwrap()
}

/// Random connected mixed graph: as [`random_connected_graph`], then every
/// non-tree edge is made one-sided (random orientation) with probability
/// `one_sided`.
pub fn random_mixed_graph<R: Rng>(n: usize, density: f64, one_sided: f64, rng: &mut R) -> MixedGraph {
    let base = random_connected_graph(n, density, rng);
    let tree: Vec<(Vertex, Vertex)> = spanning_tree_edges(&base);
    let mut one = Vec::new();
    let mut two = Vec::new();
    for (a, b) in base.two_sided_edges() {
        if !tree.contains(&(a, b)) && rng.random_bool(one_sided) {
            if rng.random_bool(0.5) {
                one.push((a, b));
            } else {
                one.push((b, a));
            }
        } else {
            two.push((a, b));
        }
    }
    MixedGraph::new(base.names().to_vec(), &one, &two).unwrap()
}

/// A BFS spanning tree of a connected unmixed graph, as `(min, max)` pairs.
fn spanning_tree_edges(g: &MixedGraph) -> Vec<(Vertex, Vertex)> {
    let mut seen = vec![false; g.len()];
    let mut queue = std::collections::VecDeque::from([0]);
    let mut edges = Vec::new();
    seen[0] = true;
    while let Some(v) = queue.pop_front() {
        for &w in g.out_neighbors(v) {
            if !seen[w] {
                seen[w] = true;
                edges.push((v.min(w), v.max(w)));
                queue.push_back(w);
            }
        }
    }
    edges
}

/// Random non-degenerate scheme: every edge direction gets a positive rate.
/// With `lazy` set, each vertex keeps a random laziness in `[0, 0.5)`.
pub fn random_scheme<R: Rng>(graph: &MixedGraph, lazy: bool, rng: &mut R) -> WeightingScheme {
    let n = graph.len();
    let mut rates = DMatrix::zeros(n, n);
    for x in 0..n {
        let out = graph.out_neighbors(x);
        if out.is_empty() {
            rates[(x, x)] = 1.0;
            continue;
        }
        // Normalized exponentials are uniform on the simplex.
        let w: Vec<f64> = out
            .iter()
            .map(|_| -(1.0 - rng.random::<f64>()).ln() + 1e-3)
            .collect();
        let total: f64 = w.iter().sum();
        let laziness = if lazy { 0.5 * rng.random::<f64>() } else { 0.0 };
        for (&y, wy) in out.iter().zip(&w) {
            rates[(x, y)] = (1.0 - laziness) * wy / total;
        }
        rates[(x, x)] = laziness;
    }
    WeightingScheme::new(graph.clone(), rates).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn named_graph_sizes() {
        assert_eq!(hypercube(3).two_sided_edges().count(), 12);
        assert_eq!(petersen().two_sided_edges().count(), 15);
        assert!(petersen().find_triangle().is_none());
        assert_eq!(regular_tree(3, 2).len(), 10);
        assert_eq!(complete_graph(5).two_sided_edges().count(), 10);
    }

    #[test]
    fn random_graphs_are_connected_and_schemes_non_degenerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..20 {
            let g = random_mixed_graph(6, 0.4, 0.3, &mut rng);
            assert!(g.is_weakly_connected());
            let s = random_scheme(&g, true, &mut rng);
            assert!(!s.degeneracy().is_degenerate);
            assert!(s.row_sum_defect() < 1e-15);
        }
    }
}
