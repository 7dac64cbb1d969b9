//! Interaction graphs, Pauli-string Hamiltonian terms, the perturbed
//! Hamiltonian `H_omega = V + omega Z`, and its interaction-picture form.

mod drive;
mod graph;
mod hamiltonian;
mod pauli;
mod spec_file;

pub use drive::{interaction_picture, DriveTerm, TimeDependentHamiltonian};
pub use graph::{build_graph, GraphKind, InteractionGraph, INFINITE_DISTANCE};
pub use hamiltonian::{
    dense_block, local_strength, LocalTerm, PerturbedHamiltonian, DEFAULT_DENSE_CAP, DEFAULT_RANGE,
};
pub use pauli::{axis_matrix, Axis, PauliAction, PauliString};
pub use spec_file::{
    canonicalize, ising_chain, ising_chain_with_local_strength, parse_hamiltonian_spec,
    parse_pauli_label, ParsedHamiltonian,
};
