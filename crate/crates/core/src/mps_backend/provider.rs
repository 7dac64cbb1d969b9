//! MPS-backed basis provider and MPS sampling.

use std::collections::HashMap;
use std::sync::RwLock;

use ndarray::Array2;
use num_complex::Complex64 as C64;
use rand::Rng;

use super::contract::{project_qubit, string_expectation};
use super::mps::MatrixProductState;
use crate::error::{Error, Result};
use crate::locc::{BasisProvider, MatrixPair, MeasurementRecord, QubitBasis};

fn ketbra(e: &[C64; 2]) -> Array2<C64> {
    let mut m: Array2<C64> = Array2::zeros((2, 2));
    for r in 0..2 {
        for c in 0..2 {
            m[(r, c)] = e[r] * e[c].conj();
        }
    }
    m
}

/// Basis provider computing the matrix pair by transfer contractions over the
/// two branch MPSs at the anchor field (Procedure 1 with MPS-approximated
/// matrices).
pub struct MpsBasisProvider {
    branch0: MatrixProductState,
    branch1: MatrixProductState,
    order: Vec<usize>,
    cache: RwLock<HashMap<u64, QubitBasis>>,
}

impl MpsBasisProvider {
    pub fn new(
        branch0: MatrixProductState,
        branch1: MatrixProductState,
        order: Option<Vec<usize>>,
    ) -> Result<Self> {
        let n = branch0.site_count();
        if branch1.site_count() != n {
            return Err(Error::Structural("branch sizes differ".into()));
        }
        let order = order.unwrap_or_else(|| (0..n).collect());
        Ok(Self { branch0, branch1, order, cache: RwLock::new(HashMap::new()) })
    }

    fn prefix_key(prefix: &[bool]) -> u64 {
        let mut key = 1u64;
        for &x in prefix {
            key = (key << 1) | (x as u64);
        }
        key
    }

    /// The matrix pair at a prefix: conditioned reduced matrices of both
    /// branches and the cross matrix, from string contractions with the
    /// record's projectors inserted.
    pub fn matrix_pair(&self, prefix: &[bool], bases: &[QubitBasis]) -> Result<MatrixPair> {
        let n = self.order.len();
        let target = self.order[prefix.len()];
        let mut ops: Vec<Option<Array2<C64>>> = vec![None; n];
        for (k, (&x, b)) in prefix.iter().zip(bases.iter()).enumerate() {
            ops[self.order[k]] = Some(ketbra(b.ket(x)));
        }
        let mut rho0: Array2<C64> = Array2::zeros((2, 2));
        let mut rho1: Array2<C64> = Array2::zeros((2, 2));
        let mut cross: Array2<C64> = Array2::zeros((2, 2));
        for i in 0..2usize {
            for j in 0..2usize {
                // <i| rho |j> inserts |j><i| at the target
                let mut ins: Array2<C64> = Array2::zeros((2, 2));
                ins[(j, i)] = C64::new(1.0, 0.0);
                ops[target] = Some(ins);
                rho0[(i, j)] = string_expectation(&self.branch0, &self.branch0, &ops)?;
                rho1[(i, j)] = string_expectation(&self.branch1, &self.branch1, &ops)?;
                // cross = Tr_rest E |phi1><phi0| E : entries <i|..|j> =
                // <phi0| E (|j><i|) |phi1>
                cross[(i, j)] = string_expectation(&self.branch0, &self.branch1, &ops)?;
            }
        }
        ops[target] = None;
        let w0 = (rho0[(0, 0)] + rho0[(1, 1)]).re;
        let w1 = (rho1[(0, 0)] + rho1[(1, 1)]).re;
        if w0 < 1e-14 || w1 < 1e-14 {
            return Err(Error::Degenerate(format!(
                "branch weight vanished along prefix (w0 = {w0:.2e}, w1 = {w1:.2e})"
            )));
        }
        let weight = 0.5 * (w0 + w1);
        let m = rho0.mapv(|z| z / w0) - rho1.mapv(|z| z / w1);
        let mt = cross.mapv(|z| z / weight);
        Ok(MatrixPair { m, mt, weight })
    }
}

impl BasisProvider for MpsBasisProvider {
    fn order(&self) -> &[usize] {
        &self.order
    }

    fn basis_for(&self, prefix: &[bool]) -> Result<QubitBasis> {
        if prefix.len() >= self.order.len() {
            return Err(Error::Structural("all qubits already measured".into()));
        }
        let key = Self::prefix_key(prefix);
        if let Some(b) = self.cache.read().expect("cache").get(&key) {
            return Ok(b.clone());
        }
        let mut bases = Vec::with_capacity(prefix.len());
        for k in 0..prefix.len() {
            bases.push(self.basis_for(&prefix[..k])?);
        }
        let pair = self.matrix_pair(prefix, &bases)?;
        let sign = if prefix.iter().filter(|&&x| x).count() % 2 == 0 { 1 } else { -1 };
        let basis = pair.basis(sign)?;
        self.cache.write().expect("cache").insert(key, basis.clone());
        Ok(basis)
    }

    fn backend_name(&self) -> &'static str {
        "mps"
    }
}

/// Sequential Born sampling of an MPS through projections.
pub fn sample_mps(
    state: &MatrixProductState,
    provider: &dyn BasisProvider,
    rng: &mut impl Rng,
) -> Result<MeasurementRecord> {
    let n = state.site_count();
    if provider.qubit_count() != n {
        return Err(Error::Structural("provider does not cover the state".into()));
    }
    let mut record = MeasurementRecord::empty(provider.order().to_vec());
    let mut current = state.clone();
    let mut current_w = current.norm_sqr();
    for k in 0..n {
        let basis = provider.basis_for(&record.outcomes)?;
        let target = provider.order()[k];
        let mut local = target;
        for &done in &provider.order()[..k] {
            if done < target {
                local -= 1;
            }
        }
        let outcome;
        if current.site_count() == 1 {
            // last qubit: project dense
            let sv = current.to_statevector()?;
            let a = sv.amplitudes();
            let amp0 = basis.e0[0].conj() * a[0] + basis.e0[1].conj() * a[1];
            let p0 = (amp0.norm_sqr() / current_w).clamp(0.0, 1.0);
            outcome = rng.gen::<f64>() >= p0;
        } else {
            match project_qubit(&current, local, &basis.e0) {
                Ok((next, w)) => {
                    let p0 = (w / current_w).clamp(0.0, 1.0);
                    if rng.gen::<f64>() < p0 {
                        outcome = false;
                        current = next;
                        current_w = w;
                    } else {
                        outcome = true;
                        let (next1, w1) = project_qubit(&current, local, &basis.e1)?;
                        current = next1;
                        current_w = w1;
                    }
                }
                Err(Error::Degenerate(_)) => {
                    // outcome 0 has vanishing weight
                    outcome = true;
                    let (next1, w1) = project_qubit(&current, local, &basis.e1)?;
                    current = next1;
                    current_w = w1;
                }
                Err(e) => return Err(e),
            }
        }
        record.push(basis, outcome);
    }
    Ok(record)
}

/// Exact string distribution of an MPS under a provider (index bit k is the
/// outcome of the k-th measured qubit).
pub fn mps_string_distribution(
    state: &MatrixProductState,
    provider: &dyn BasisProvider,
) -> Result<Vec<f64>> {
    let n = state.site_count();
    if n > 16 {
        return Err(Error::Resource("string enumeration capped at N = 16".into()));
    }
    let norm = state.norm_sqr();
    let mut probs = vec![0.0; 1 << n];
    struct Frame {
        state: MatrixProductState,
        weight: f64,
        prefix: Vec<bool>,
    }
    let mut stack = vec![Frame { state: state.clone(), weight: norm, prefix: vec![] }];
    while let Some(f) = stack.pop() {
        let k = f.prefix.len();
        if k == n {
            let mut idx = 0usize;
            for (i, &x) in f.prefix.iter().enumerate() {
                idx |= (x as usize) << i;
            }
            probs[idx] = f.weight / norm;
            continue;
        }
        let basis = provider.basis_for(&f.prefix)?;
        let target = provider.order()[k];
        let mut local = target;
        for &done in &provider.order()[..k] {
            if done < target {
                local -= 1;
            }
        }
        for outcome in [false, true] {
            let e = basis.ket(outcome);
            if f.state.site_count() == 1 {
                let sv = f.state.to_statevector()?;
                let a = sv.amplitudes();
                let amp = e[0].conj() * a[0] + e[1].conj() * a[1];
                let mut prefix = f.prefix.clone();
                prefix.push(outcome);
                let mut idx = 0usize;
                for (i, &x) in prefix.iter().enumerate() {
                    idx |= (x as usize) << i;
                }
                probs[idx] = amp.norm_sqr() / norm;
                continue;
            }
            match project_qubit(&f.state, local, e) {
                Ok((next, w)) => {
                    let mut prefix = f.prefix.clone();
                    prefix.push(outcome);
                    stack.push(Frame { state: next, weight: w, prefix });
                }
                Err(Error::Degenerate(_)) => {
                    // zero-weight subtree: probabilities stay zero
                }
                Err(e) => return Err(e),
            }
        }
    }
    Ok(probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::locc::FixedBasisProvider;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const SQH: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn product_state_computational_sampling_is_deterministic() {
        let st = MatrixProductState::basis_state(4, 0b1010);
        let provider = FixedBasisProvider::all_computational(4);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let rec = sample_mps(&st, &provider, &mut rng).unwrap();
        assert_eq!(rec.outcomes, vec![false, true, false, true]);
    }

    #[test]
    fn ghz_x_basis_even_parity() {
        let n = 4;
        let a = MatrixProductState::basis_state(n, 0);
        let b = MatrixProductState::basis_state(n, (1 << n) - 1);
        let mut ghz = MatrixProductState::direct_sum(&a, &b).unwrap();
        ghz.canonicalize().unwrap();
        let provider = FixedBasisProvider::all_x(n);
        let probs = mps_string_distribution(&ghz, &provider).unwrap();
        for (x, p) in probs.iter().enumerate() {
            if x.count_ones() % 2 == 1 {
                assert!(*p < 1e-12, "odd string {x} has p = {p}");
            }
        }
        assert!((probs.iter().sum::<f64>() - 1.0).abs() < 1e-10);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..30 {
            let rec = sample_mps(&ghz, &provider, &mut rng).unwrap();
            assert_eq!(rec.parity(), 1);
        }
    }

    #[test]
    fn mps_distribution_matches_dense() {
        let n = 6;
        let h = crate::pauli_graph::ising_chain(n, 0.25, 1.0).unwrap();
        let zeros = MatrixProductState::basis_state(n, 0);
        let evolved =
            super::super::tebd::evolve_mps(&zeros, &h, 0.3, &super::super::tebd::TebdOptions::default())
                .unwrap();
        let provider = FixedBasisProvider::all_x(n);
        let probs = mps_string_distribution(&evolved, &provider).unwrap();
        let dense = crate::exact_engine::HamiltonianOperator::new(h)
            .evolve(&crate::exact_engine::StateVector::basis_state(n, 0), 0.3)
            .unwrap();
        let exact = crate::locc::string_distribution(&dense, &provider).unwrap();
        let tv: f64 = probs.iter().zip(exact.iter()).map(|(a, b)| (a - b).abs()).sum();
        assert!(tv < 1e-7, "tv = {tv}");
    }

    #[test]
    fn provider_matches_exact_provider_free_field() {
        // V = 0, GHZ branches: bases agree with the exact provider closely
        let n = 4;
        let t = 0.8;
        let w_true = 1.07;
        let prior = crate::metrology::PriorInterval::containing(w_true, n, t).unwrap();
        let g = crate::pauli_graph::build_graph(&crate::pauli_graph::GraphKind::Chain { n })
            .unwrap();
        let h =
            crate::pauli_graph::PerturbedHamiltonian::new(g, vec![], prior.omega_prime).unwrap();
        let pair = crate::initial_states::make_ghz(n).unwrap();
        let op = crate::exact_engine::HamiltonianOperator::new(h.clone());
        let b0 = op.evolve(&pair.branch0, t).unwrap();
        let b1 = op.evolve(&pair.branch1, t).unwrap();
        // MPS branches: product states evolved under the field only (exact)
        let m0 = super::super::tebd::evolve_mps(
            &MatrixProductState::basis_state(n, 0),
            &h,
            t,
            &super::super::tebd::TebdOptions::default(),
        )
        .unwrap();
        let m1 = super::super::tebd::evolve_mps(
            &MatrixProductState::basis_state(n, (1 << n) - 1),
            &h,
            t,
            &super::super::tebd::TebdOptions::default(),
        )
        .unwrap();
        let exact = crate::locc::ExactBasisProvider::new(b0, b1, None).unwrap();
        let mps = MpsBasisProvider::new(m0, m1, None).unwrap();
        for prefix in [vec![], vec![false], vec![true], vec![false, true], vec![true, true, false]]
        {
            let a = exact.basis_for(&prefix).unwrap();
            let b = mps.basis_for(&prefix).unwrap();
            assert!(a.angle_distance(&b) < 1e-9, "prefix {prefix:?}");
        }
    }
}
