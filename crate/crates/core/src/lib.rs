//! Simulation workbench for Heisenberg-limited metrology on GHZ-like states
//! evolving under a perturbed field Hamiltonian `H_omega = V + omega Z`.
//!
//! The crate provides exact dense simulation as the ground-truth oracle, the
//! adaptive LOCC measurement protocol with classically computed bases, a
//! cluster-expansion sampler for short-time dynamics, a 1D matrix-product-state
//! backend, appendix baseline protocols, and a seeded experiment harness.

pub mod dense;
pub mod error;
pub mod baselines;
pub mod cluster_sampler;
pub mod exact_engine;
pub mod harness;
pub mod initial_states;
pub mod locc;
pub mod metrology;
pub mod mps_backend;
pub mod pauli_graph;

pub use error::{Error, Result};
