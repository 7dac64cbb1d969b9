//! 1D matrix-product-state backend: branch representation, Trotterized time
//! evolution with SVD truncation, string-operator contraction for the basis
//! rule, single-qubit projection, and MPS sampling — fidelity-certified
//! against the exact engine at overlapping sizes.

pub mod contract;
mod io;
mod mps;
mod provider;
mod tebd;

pub use contract::{project_qubit, string_expectation};
pub use io::{load_mps, save_mps};
pub use mps::{MatrixProductState, DEFAULT_CUTOFF, DEFAULT_D_MAX};
pub use provider::{mps_string_distribution, sample_mps, MpsBasisProvider};
pub use tebd::{apply_two_site_gate, bond_hamiltonians, evolve_mps, TebdOptions};
