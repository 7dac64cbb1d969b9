//! The adaptive LOCC measurement protocol: the simultaneous
//! zero-diagonalization basis rule, basis providers (exact here; MPS and
//! cluster backends plug in through the same trait), the measurement
//! simulator, and the binary-search readout.

mod basis;
mod estimate;
mod measure;
mod provider;

pub use basis::{zero_diagonalize, MatrixPair, QubitBasis};
pub use estimate::{estimate_omega, max_oracle_calls, EstimateOutcome};
pub use measure::{
    adaptive_measure, parity_expectation_exact, povm_completeness_defect, string_distribution,
    verify_basis_condition,
};
pub use provider::{
    record_product_ket, BasisProvider, ExactBasisProvider, FixedBasisProvider, MeasurementRecord,
};
