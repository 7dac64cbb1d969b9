//! Local Hamiltonian terms and the perturbed Hamiltonian `H = V + omega Z`.

use std::collections::BTreeSet;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::graph::InteractionGraph;
use super::pauli::PauliString;
use crate::dense::operator_norm;
use crate::error::{Error, Result};

/// Default cap on dense-matrix assembly (2^14 = 16384).
pub const DEFAULT_DENSE_CAP: usize = 14;
/// Default interaction range `ell` (diameter bound for term supports).
pub const DEFAULT_RANGE: u32 = 3;

/// One local term `V_S`: a sum of Pauli strings supported on a common set S.
#[derive(Debug, Clone)]
pub struct LocalTerm {
    paulis: Vec<PauliString>,
    support: BTreeSet<usize>,
    norm: f64,
}

impl LocalTerm {
    /// Builds a term from Pauli strings; the support is their union and the
    /// operator norm is computed exactly from the dense block on the support.
    pub fn new(paulis: Vec<PauliString>) -> Result<Self> {
        if paulis.is_empty() {
            return Err(Error::Structural("local term needs at least one Pauli string".into()));
        }
        let mut support = BTreeSet::new();
        for p in &paulis {
            support.extend(p.support());
        }
        if support.is_empty() {
            return Err(Error::Structural(
                "interaction term must have nonempty support (identity terms are not interactions)"
                    .into(),
            ));
        }
        if support.len() > 10 {
            return Err(Error::Resource(format!(
                "term support of {} qubits is too large for exact norm computation",
                support.len()
            )));
        }
        let block = dense_block(&paulis, &support);
        let norm = operator_norm(&block)?;
        Ok(Self { paulis, support, norm })
    }

    pub fn from_pauli(p: PauliString) -> Result<Self> {
        Self::new(vec![p])
    }

    pub fn paulis(&self) -> &[PauliString] {
        &self.paulis
    }

    pub fn support(&self) -> &BTreeSet<usize> {
        &self.support
    }

    pub fn norm(&self) -> f64 {
        self.norm
    }

    /// `|| B - B^dagger ||_F / ||B||_F` on the dense support block.
    pub fn hermiticity_defect(&self) -> f64 {
        let b = dense_block(&self.paulis, &self.support);
        let bh = b.t().mapv(|z| z.conj());
        let num = crate::dense::fro_norm(&(&b - &bh));
        let den = crate::dense::fro_norm(&b).max(1e-300);
        num / den
    }
}

/// Dense matrix of a Pauli-string sum restricted to `support` (relabelled to
/// local qubits 0..k in ascending order of the global index).
pub fn dense_block(paulis: &[PauliString], support: &BTreeSet<usize>) -> Array2<C64> {
    let locals: Vec<usize> = support.iter().copied().collect();
    let k = locals.len();
    let dim = 1usize << k;
    let mut m = Array2::zeros((dim, dim));
    for p in paulis {
        let relabelled = PauliString::new(
            p.ops().iter().map(|&(q, a)| {
                let li = locals.binary_search(&q).expect("pauli site outside support");
                (li, a)
            }),
            p.coeff,
        );
        let act = relabelled.action_masks();
        for b in 0..dim as u64 {
            let b2 = b ^ act.flip;
            m[(b2 as usize, b as usize)] += act.amp_on(b);
        }
    }
    m
}

/// The local strength `J`: max over vertices of the summed norms of the terms
/// containing that vertex.
pub fn local_strength(terms: &[LocalTerm], graph: &InteractionGraph) -> f64 {
    let mut per_vertex = vec![0.0; graph.vertex_count()];
    for t in terms {
        for &v in t.support() {
            per_vertex[v] += t.norm();
        }
    }
    per_vertex.into_iter().fold(0.0, f64::max)
}

/// `H_omega = V + omega Z` on an interaction graph.
#[derive(Debug, Clone)]
pub struct PerturbedHamiltonian {
    graph: InteractionGraph,
    terms: Vec<LocalTerm>,
    omega: f64,
    local_strength: f64,
    dense_cap: usize,
}

impl PerturbedHamiltonian {
    pub fn new(graph: InteractionGraph, terms: Vec<LocalTerm>, omega: f64) -> Result<Self> {
        Self::with_range(graph, terms, omega, DEFAULT_RANGE)
    }

    pub fn with_range(
        graph: InteractionGraph,
        terms: Vec<LocalTerm>,
        omega: f64,
        range: u32,
    ) -> Result<Self> {
        for t in &terms {
            for &v in t.support() {
                if v >= graph.vertex_count() {
                    return Err(Error::Structural(format!(
                        "term acts on vertex {v} outside the graph"
                    )));
                }
            }
            let diam = graph.diameter_of(t.support().iter().copied());
            if diam > range {
                return Err(Error::Validation(format!(
                    "term support has diameter {diam} > interaction range {range}"
                )));
            }
            // V must be Hermitian; each stored block is validated directly.
            let defect = t.hermiticity_defect();
            if defect > 1e-12 {
                return Err(Error::Validation(format!(
                    "term block is not Hermitian (relative defect {defect:.2e})"
                )));
            }
        }
        let j = local_strength(&terms, &graph);
        Ok(Self { graph, terms, omega, local_strength: j, dense_cap: DEFAULT_DENSE_CAP })
    }

    pub fn graph(&self) -> &InteractionGraph {
        &self.graph
    }

    pub fn terms(&self) -> &[LocalTerm] {
        &self.terms
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn local_strength(&self) -> f64 {
        self.local_strength
    }

    pub fn qubit_count(&self) -> usize {
        self.graph.vertex_count()
    }

    /// Same interaction, different field strength.
    pub fn with_omega(&self, omega: f64) -> Self {
        let mut h = self.clone();
        h.omega = omega;
        h
    }

    pub fn set_dense_cap(&mut self, cap: usize) {
        self.dense_cap = cap;
    }

    /// All Pauli strings of V, flattened.
    pub fn interaction_paulis(&self) -> Vec<PauliString> {
        self.terms.iter().flat_map(|t| t.paulis().iter().cloned()).collect()
    }

    /// True when every term is Z-type (H is diagonal in the computational basis).
    pub fn is_diagonal(&self) -> bool {
        self.terms.iter().all(|t| {
            t.paulis()
                .iter()
                .all(|p| p.ops().iter().all(|&(_, a)| a == super::pauli::Axis::Z))
        })
    }

    /// Dense `2^N x 2^N` matrix of `V + omega Z`.
    pub fn assemble_dense(&self) -> Result<Array2<C64>> {
        let n = self.qubit_count();
        if n > self.dense_cap {
            return Err(Error::Resource(format!(
                "dense assembly of {n} qubits exceeds cap {}",
                self.dense_cap
            )));
        }
        let dim = 1usize << n;
        let mut m: Array2<C64> = Array2::zeros((dim, dim));
        for p in self.interaction_paulis() {
            let act = p.action_masks();
            for b in 0..dim as u64 {
                let b2 = b ^ act.flip;
                m[(b2 as usize, b as usize)] += act.amp_on(b);
            }
        }
        // omega * sum_j Z_j on the diagonal; Z|0> = +|0>.
        for b in 0..dim as u64 {
            let zsum = n as f64 - 2.0 * (b.count_ones() as f64);
            m[(b as usize, b as usize)] += C64::new(self.omega * zsum, 0.0);
        }
        Ok(m)
    }
}
