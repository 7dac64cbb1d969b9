//! Basis providers: classical computations that return the next measurement
//! basis given the outcomes so far. Providers are deterministic and cache per
//! outcome prefix, so identical prefixes always yield bit-identical bases.

use std::collections::HashMap;
use std::sync::RwLock;

use num_complex::Complex64 as C64;

use super::basis::{MatrixPair, QubitBasis};
use crate::error::{Error, Result};
use crate::exact_engine::{
    conditioned_cross_operator, conditioned_reduced_raw, ProjectorStep, StateVector,
};

/// Outcomes and bases accumulated while measuring qubits one at a time.
#[derive(Debug, Clone)]
pub struct MeasurementRecord {
    pub order: Vec<usize>,
    pub outcomes: Vec<bool>,
    pub bases: Vec<QubitBasis>,
}

impl MeasurementRecord {
    pub fn empty(order: Vec<usize>) -> Self {
        Self { order, outcomes: Vec::new(), bases: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.outcomes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.outcomes.is_empty()
    }

    /// `(-1)^{sum x_i}`
    pub fn parity(&self) -> i8 {
        if self.outcomes.iter().filter(|&&x| x).count() % 2 == 0 {
            1
        } else {
            -1
        }
    }

    pub fn push(&mut self, basis: QubitBasis, outcome: bool) {
        self.bases.push(basis);
        self.outcomes.push(outcome);
    }

    /// The measured qubits as projector steps.
    pub fn projector_steps(&self) -> Vec<ProjectorStep> {
        self.outcomes
            .iter()
            .zip(self.bases.iter())
            .enumerate()
            .map(|(k, (&x, b))| ProjectorStep { qubit: self.order[k], ket: *b.ket(x) })
            .collect()
    }
}

fn prefix_key(outcomes: &[bool]) -> u64 {
    let mut key = 1u64; // leading 1 disambiguates lengths
    for &x in outcomes {
        key = (key << 1) | (x as u64);
    }
    key
}

pub trait BasisProvider: Send + Sync {
    /// Measurement order (a permutation of 0..N).
    fn order(&self) -> &[usize];

    /// The basis for the next qubit given the outcome prefix.
    fn basis_for(&self, prefix: &[bool]) -> Result<QubitBasis>;

    fn backend_name(&self) -> &'static str;

    fn qubit_count(&self) -> usize {
        self.order().len()
    }
}

/// Exact-engine provider: bases from conditioned reduced density matrices of
/// the two dense branch states at the anchor field omega'.
pub struct ExactBasisProvider {
    branch0: StateVector,
    branch1: StateVector,
    order: Vec<usize>,
    cache: RwLock<HashMap<u64, QubitBasis>>,
}

impl ExactBasisProvider {
    /// `branch0`, `branch1` are the evolved branches at omega'.
    pub fn new(branch0: StateVector, branch1: StateVector, order: Option<Vec<usize>>) -> Result<Self> {
        let n = branch0.qubit_count();
        if branch1.qubit_count() != n {
            return Err(Error::Structural("branch sizes differ".into()));
        }
        let order = order.unwrap_or_else(|| (0..n).collect());
        validate_order(&order, n)?;
        Ok(Self { branch0, branch1, order, cache: RwLock::new(HashMap::new()) })
    }

    /// The matrix pair at a prefix, normalized per branch weight.
    pub fn matrix_pair(&self, prefix: &[bool], bases: &[QubitBasis]) -> Result<MatrixPair> {
        let steps: Vec<ProjectorStep> = prefix
            .iter()
            .zip(bases.iter())
            .enumerate()
            .map(|(k, (&x, b))| ProjectorStep { qubit: self.order[k], ket: *b.ket(x) })
            .collect();
        let target = self.order[prefix.len()];
        let (raw0, w0) = conditioned_reduced_raw(&self.branch0, &steps, target)?;
        let (raw1, w1) = conditioned_reduced_raw(&self.branch1, &steps, target)?;
        if w0 < 1e-14 || w1 < 1e-14 {
            return Err(Error::Degenerate(format!(
                "branch weight vanished along prefix (w0 = {w0:.2e}, w1 = {w1:.2e})"
            )));
        }
        let (cross, _cw0, _cw1) =
            conditioned_cross_operator(&self.branch0, &self.branch1, &steps, target)?;
        let weight = 0.5 * (w0 + w1);
        let m = raw0.mapv(|z| z / w0) - raw1.mapv(|z| z / w1);
        let mt = cross.mapv(|z| z / weight);
        Ok(MatrixPair { m, mt, weight })
    }
}

fn validate_order(order: &[usize], n: usize) -> Result<()> {
    let mut seen = vec![false; n];
    if order.len() != n {
        return Err(Error::Structural("measurement order must cover all qubits".into()));
    }
    for &q in order {
        if q >= n || seen[q] {
            return Err(Error::Structural("measurement order is not a permutation".into()));
        }
        seen[q] = true;
    }
    Ok(())
}

impl BasisProvider for ExactBasisProvider {
    fn order(&self) -> &[usize] {
        &self.order
    }

    fn basis_for(&self, prefix: &[bool]) -> Result<QubitBasis> {
        if prefix.len() >= self.order.len() {
            return Err(Error::Structural("all qubits already measured".into()));
        }
        let key = prefix_key(prefix);
        if let Some(b) = self.cache.read().expect("cache poisoned").get(&key) {
            return Ok(b.clone());
        }
        // Reconstruct earlier bases along this prefix (cached recursively).
        let mut bases = Vec::with_capacity(prefix.len());
        for k in 0..prefix.len() {
            bases.push(self.basis_for(&prefix[..k])?);
        }
        let pair = self.matrix_pair(prefix, &bases)?;
        let sign = if prefix.iter().filter(|&&x| x).count() % 2 == 0 { 1 } else { -1 };
        let basis = pair.basis(sign)?;
        self.cache.write().expect("cache poisoned").insert(key, basis.clone());
        Ok(basis)
    }

    fn backend_name(&self) -> &'static str {
        "exact"
    }
}

/// Fixed (non-adaptive) provider: the same per-qubit basis regardless of
/// outcomes. Used by the sampler tests and as a negative control.
pub struct FixedBasisProvider {
    order: Vec<usize>,
    bases: Vec<QubitBasis>,
}

impl FixedBasisProvider {
    pub fn uniform(n: usize, basis: QubitBasis) -> Self {
        Self { order: (0..n).collect(), bases: vec![basis; n] }
    }

    pub fn all_x(n: usize) -> Self {
        Self::uniform(n, QubitBasis::x_basis())
    }

    pub fn all_computational(n: usize) -> Self {
        Self::uniform(n, QubitBasis::computational())
    }

    pub fn per_qubit(bases: Vec<QubitBasis>) -> Self {
        Self { order: (0..bases.len()).collect(), bases }
    }
}

impl BasisProvider for FixedBasisProvider {
    fn order(&self) -> &[usize] {
        &self.order
    }

    fn basis_for(&self, prefix: &[bool]) -> Result<QubitBasis> {
        self.bases
            .get(prefix.len())
            .cloned()
            .ok_or_else(|| Error::Structural("all qubits already measured".into()))
    }

    fn backend_name(&self) -> &'static str {
        "fixed"
    }
}

/// `Tr_rest` cross matrix element helper shared by provider tests: builds the
/// product ket `|E_x>` of a full record.
pub fn record_product_ket(record: &MeasurementRecord, n: usize) -> Result<StateVector> {
    if record.len() != n {
        return Err(Error::Structural("record does not cover all qubits".into()));
    }
    let mut sites = vec![[C64::new(0.0, 0.0); 2]; n];
    for (k, (&x, b)) in record.outcomes.iter().zip(record.bases.iter()).enumerate() {
        sites[record.order[k]] = *b.ket(x);
    }
    Ok(StateVector::product(&sites))
}
