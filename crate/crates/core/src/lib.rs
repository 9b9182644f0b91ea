//! Random instances, budget-constrained solvers and scaling experiments for
//! minimum-weight paths, assignments, matchings and tours whose edges carry a
//! random weight and a vector of random costs.

pub mod distributions;
pub mod error;
pub mod exact;
pub mod experiments;
pub mod graph;
pub mod hamilton;
pub mod heuristic;
pub mod instance;
pub mod json;
pub mod matching;
pub mod numeric;
pub mod solution;

pub use distributions::{DistributionParams, OrderStatQuery};
pub use error::{Error, Result};
pub use instance::{
    filter_edges, filter_probability, generate, k_out_subgraph, BudgetVector, EdgeId, EdgeSet, FilterMode,
    FilterSpec, GenerateOptions, GraphKind, Instance, Orientation, Vertex,
};
pub use solution::{verify, Solution, SolutionKind};
