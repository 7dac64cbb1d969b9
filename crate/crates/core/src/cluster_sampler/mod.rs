//! The polynomial-time classical sampler for short-time dynamics: operator
//! space formalism, connected-cluster enumeration, the gamma-coefficient
//! marginal expansions and their cross-operator analogue, the sampling loop,
//! the interaction-picture entry point, and the conditional-correlation
//! diagnostic.

mod clusters;
mod dyson;
mod expansion;
pub mod moebius;
mod operator_space;
mod params;
mod sample;

pub use clusters::{
    connected_subsets, enumerate_clusters, enumerate_clusters_brute, is_connected, Cluster,
};
pub use dyson::DysonExpansion;
pub use expansion::{
    divide_series, locality_ball, ClusterSeries, ExpansionEngine, InitialOperator, MeasuredQubit,
    EPS_CLIP,
};
pub use operator_space::OperatorVector;
pub use params::{t_star, term_overlap_graph, SamplerParams, TermOverlapGraph};
pub use sample::{
    conditional_correlation, engine_for_hamiltonian, sample, sampled_distribution,
    ClusterBasisProvider,
};
