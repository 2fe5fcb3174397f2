//! Bakry-Emery curvature, curvature sharpness and the normalized curvature
//! flow on finite mixed graphs with Markovian weighting schemes.

pub mod cli;
pub mod constructions;
pub mod curvature;
pub mod error;
pub mod flow;
pub mod generators;
pub mod graph;
pub mod io;
pub mod linalg;
pub mod operators;
pub mod report;
pub mod sharpness;
pub mod sweep;

pub use constructions::{
    clique_scheme, complete_graph_degenerate, k3_catalog, simple_random_walk, triangle_free_solve,
    TriangleFreeSolution,
};
pub use curvature::{
    curvature, curvature_all, theoretical_bounds, upper_bound_dist, upper_bound_f,
    CurvatureResult, CurvatureRoute, Dimension,
};
pub use error::{Error, Result};
pub use flow::{certify_limit, flow_rhs, integrate, FlowConfig, FlowTrajectory};
pub use graph::{DegeneracyReport, Distance, DistanceField, MixedGraph, Vertex, WeightingScheme};
pub use operators::{local_blocks, optimal_extension, q_matrix, LocalBlocks, QMatrix};
pub use sharpness::{four_q_one, is_n_sharp, sharpness_report, SharpnessReport};
