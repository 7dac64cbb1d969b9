//! Dense brute-force quantum simulation: the ground-truth oracle for every
//! other module. Time evolution goes through a cached Hermitian
//! eigendecomposition (exact at these sizes, reusable across times), with a
//! diagonal fast path when `V` is Z-type.

use ndarray::{Array1, Array2};
use num_complex::Complex64 as C64;
use once_cell::sync::OnceCell;

use crate::dense::{HermitianEigen, hermitian_norm};
use crate::error::{Error, Result};
use crate::pauli_graph::{PerturbedHamiltonian, TimeDependentHamiltonian};

/// Dense amplitudes of an `N`-qubit pure state. Bit `q` of a basis index is
/// the occupation of qubit `q` (so `|1>` on qubit q sets that bit).
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    amps: Array1<C64>,
    n: usize,
}

impl StateVector {
    pub fn from_amplitudes(amps: Array1<C64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || dim & (dim - 1) != 0 {
            return Err(Error::Structural(format!("amplitude length {dim} is not a power of two")));
        }
        Ok(Self { n: dim.trailing_zeros() as usize, amps })
    }

    pub fn basis_state(n: usize, bits: u64) -> Self {
        let mut amps = Array1::zeros(1 << n);
        amps[bits as usize] = C64::new(1.0, 0.0);
        Self { amps, n }
    }

    /// Product state from per-qubit kets.
    pub fn product(qubits: &[[C64; 2]]) -> Self {
        let n = qubits.len();
        let mut amps = Array1::zeros(1 << n);
        for b in 0..(1u64 << n) {
            let mut a = C64::new(1.0, 0.0);
            for (q, site) in qubits.iter().enumerate() {
                a *= site[((b >> q) & 1) as usize];
            }
            amps[b as usize] = a;
        }
        Self { amps, n }
    }

    pub fn qubit_count(&self) -> usize {
        self.n
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &Array1<C64> {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn normalized(mut self) -> Self {
        let n = self.norm();
        if n > 0.0 {
            self.amps.mapv_inplace(|a| a / n);
        }
        self
    }

    pub fn inner(&self, other: &Self) -> C64 {
        self.amps.iter().zip(other.amps.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn fidelity(&self, other: &Self) -> f64 {
        self.inner(other).norm_sqr()
    }

    pub fn scale(mut self, c: C64) -> Self {
        self.amps.mapv_inplace(|a| a * c);
        self
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::Structural("adding states of different size".into()));
        }
        Ok(Self { amps: &self.amps + &other.amps, n: self.n })
    }

    /// Expectation of a sum-of-Z operator weighted per qubit (weight 1 each).
    pub fn z_total_expectation(&self) -> f64 {
        self.amps
            .iter()
            .enumerate()
            .map(|(b, a)| a.norm_sqr() * (self.n as f64 - 2.0 * (b as u64).count_ones() as f64))
            .sum()
    }

    /// Expectation of a dense operator.
    pub fn expectation(&self, op: &Array2<C64>) -> C64 {
        let y = op.dot(&self.amps);
        self.amps.iter().zip(y.iter()).map(|(a, b)| a.conj() * b).sum()
    }

    /// Expectation of `prod_j X_j`.
    pub fn all_x_expectation(&self) -> f64 {
        let full = (1u64 << self.n) - 1;
        self.amps
            .iter()
            .enumerate()
            .map(|(b, a)| (a.conj() * self.amps[(b as u64 ^ full) as usize]).re)
            .sum()
    }

    /// Project qubit `q` onto single-qubit ket `e`; returns the unnormalized
    /// projected state and its weight (squared norm).
    pub fn project_qubit(&self, q: usize, e: &[C64; 2]) -> (Self, f64) {
        let mut amps: Array1<C64> = Array1::zeros(self.dim());
        // <e| applied to qubit q then re-embedded as |e> ⊗ rest:
        // P|psi> = |e>_q <e|_q traced against the amplitudes.
        let mask = 1u64 << q;
        for b in 0..self.dim() as u64 {
            if b & mask != 0 {
                continue;
            }
            let a0 = self.amps[b as usize];
            let a1 = self.amps[(b | mask) as usize];
            let overlap = e[0].conj() * a0 + e[1].conj() * a1;
            amps[b as usize] = overlap * e[0];
            amps[(b | mask) as usize] = overlap * e[1];
        }
        let st = Self { amps, n: self.n };
        let w = st.amps.iter().map(|a| a.norm_sqr()).sum();
        (st, w)
    }

    /// Amplitude-level contraction of qubit `q` against `<e|`, producing a
    /// state on one fewer qubit (unnormalized), plus the squared-norm weight.
    pub fn contract_qubit(&self, q: usize, e: &[C64; 2]) -> (Self, f64) {
        let dim = self.dim() >> 1;
        let mut amps = Array1::zeros(dim);
        let low = (1u64 << q) - 1;
        for c in 0..dim as u64 {
            let rest_low = c & low;
            let rest_high = (c & !low) << 1;
            let b0 = rest_high | rest_low;
            let b1 = b0 | (1 << q);
            amps[c as usize] =
                e[0].conj() * self.amps[b0 as usize] + e[1].conj() * self.amps[b1 as usize];
        }
        let st = Self { amps, n: self.n - 1 };
        let w = st.amps.iter().map(|a| a.norm_sqr()).sum();
        (st, w)
    }
}

/// A Hamiltonian prepared for exact evolution; the eigendecomposition is
/// computed once on first use and shared across threads.
pub struct HamiltonianOperator {
    h: PerturbedHamiltonian,
    dense: OnceCell<Array2<C64>>,
    eigen: OnceCell<HermitianEigen>,
    diagonal: Option<Array1<f64>>,
}

impl HamiltonianOperator {
    pub fn new(h: PerturbedHamiltonian) -> Self {
        let diagonal = if h.is_diagonal() {
            let n = h.qubit_count();
            let dim = 1usize << n;
            let mut d = Array1::zeros(dim);
            for b in 0..dim as u64 {
                let mut e = h.omega() * (n as f64 - 2.0 * b.count_ones() as f64);
                for p in h.interaction_paulis() {
                    let act = p.action_masks();
                    debug_assert_eq!(act.flip, 0);
                    e += act.amp_on(b).re;
                }
                d[b as usize] = e;
            }
            Some(d)
        } else {
            None
        };
        Self { h, dense: OnceCell::new(), eigen: OnceCell::new(), diagonal }
    }

    pub fn hamiltonian(&self) -> &PerturbedHamiltonian {
        &self.h
    }

    pub fn dense(&self) -> Result<&Array2<C64>> {
        self.dense.get_or_try_init(|| self.h.assemble_dense())
    }

    pub fn eigen(&self) -> Result<&HermitianEigen> {
        self.eigen.get_or_try_init(|| HermitianEigen::new(self.dense()?))
    }

    /// `e^{-i t H} |psi>`
    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if 1usize << self.h.qubit_count() != psi.dim() {
            return Err(Error::Structural(format!(
                "state dimension {} does not match {} qubits",
                psi.dim(),
                self.h.qubit_count()
            )));
        }
        if !t.is_finite() {
            return Err(Error::Domain("evolution time must be finite".into()));
        }
        if let Some(d) = &self.diagonal {
            let mut amps = psi.amps.clone();
            for (a, &e) in amps.iter_mut().zip(d.iter()) {
                *a *= (-C64::i() * e * t).exp();
            }
            return Ok(StateVector { amps, n: psi.n });
        }
        let eig = self.eigen()?;
        Ok(StateVector { amps: eig.propagate(&psi.amps, t), n: psi.n })
    }

    /// `f(H)|psi>` through the spectral decomposition.
    pub fn apply_spectral_fn(&self, psi: &StateVector, f: impl Fn(f64) -> C64) -> Result<StateVector> {
        if let Some(d) = &self.diagonal {
            let mut amps = psi.amps.clone();
            for (a, &e) in amps.iter_mut().zip(d.iter()) {
                *a *= f(e);
            }
            return Ok(StateVector { amps, n: psi.n });
        }
        let eig = self.eigen()?;
        Ok(StateVector { amps: eig.apply_fn(&psi.amps, f), n: psi.n })
    }
}

/// Second-order midpoint-rule propagator for a time-dependent Hamiltonian:
/// the time-ordered product of `e^{-i ds H(s_mid)}` steps.
pub fn evolve_time_dependent(
    psi: &StateVector,
    h: &TimeDependentHamiltonian,
    t: f64,
    steps: usize,
) -> Result<StateVector> {
    if steps == 0 {
        return Err(Error::Domain("steps must be >= 1".into()));
    }
    let n = psi.qubit_count();
    let ds = t / steps as f64;
    let mut state = psi.clone();
    for k in 0..steps {
        let s_mid = (k as f64 + 0.5) * ds;
        let hm = h.dense_at(n, s_mid);
        let eig = HermitianEigen::new(&hm)?;
        state = StateVector { amps: eig.propagate(&state.amps, ds), n };
    }
    Ok(state)
}

/// Default step count for time-dependent evolution: `J~ * ds <= 1e-3`.
pub fn default_td_steps(h: &TimeDependentHamiltonian, t: f64) -> usize {
    ((h.j_tilde() * t.abs() / 1e-3).ceil() as usize).max(1)
}

/// One measured qubit of a record: which qubit, and the rank-1 basis ket.
#[derive(Debug, Clone)]
pub struct ProjectorStep {
    pub qubit: usize,
    pub ket: [C64; 2],
}

/// Conditioned reduced density matrix of `target` after projecting the listed
/// qubits, plus the pre-normalization weight Tr(E psi E).
pub fn conditioned_reduced_density(
    state: &StateVector,
    projections: &[ProjectorStep],
    target: usize,
) -> Result<(Array2<C64>, f64)> {
    let (rho, w) = conditioned_reduced_raw(state, projections, target)?;
    if w < 1e-14 {
        return Err(Error::Degenerate(format!(
            "record has vanishing probability weight {w:.3e}"
        )));
    }
    Ok((rho.mapv(|z| z / w), w))
}

/// Unnormalized version: `Tr_rest(E psi E)` restricted to the target qubit.
pub fn conditioned_reduced_raw(
    state: &StateVector,
    projections: &[ProjectorStep],
    target: usize,
) -> Result<(Array2<C64>, f64)> {
    let mut proj = state.clone();
    for p in projections {
        if p.qubit == target {
            return Err(Error::Structural("record includes the target qubit".into()));
        }
        let (next, _w) = proj.project_qubit(p.qubit, &p.ket);
        proj = next;
    }
    let mask = 1u64 << target;
    let mut rho: Array2<C64> = Array2::zeros((2, 2));
    for b in 0..proj.dim() as u64 {
        if b & mask != 0 {
            continue;
        }
        let a0 = proj.amps[b as usize];
        let a1 = proj.amps[(b | mask) as usize];
        rho[(0, 0)] += a0 * a0.conj();
        rho[(0, 1)] += a0 * a1.conj();
        rho[(1, 0)] += a1 * a0.conj();
        rho[(1, 1)] += a1 * a1.conj();
    }
    let w = (rho[(0, 0)] + rho[(1, 1)]).re;
    Ok((rho, w))
}

/// Cross operator `Tr_rest(E |phi1><phi0| E)` on the target qubit together
/// with the two branch weights.
pub fn conditioned_cross_operator(
    phi0: &StateVector,
    phi1: &StateVector,
    projections: &[ProjectorStep],
    target: usize,
) -> Result<(Array2<C64>, f64, f64)> {
    let mut p0 = phi0.clone();
    let mut p1 = phi1.clone();
    for p in projections {
        if p.qubit == target {
            return Err(Error::Structural("record includes the target qubit".into()));
        }
        p0 = p0.project_qubit(p.qubit, &p.ket).0;
        p1 = p1.project_qubit(p.qubit, &p.ket).0;
    }
    let mask = 1u64 << target;
    let mut cross: Array2<C64> = Array2::zeros((2, 2));
    let mut w0 = 0.0;
    let mut w1 = 0.0;
    for b in 0..p0.dim() as u64 {
        if b & mask != 0 {
            continue;
        }
        let (a0, a1) = (p1.amps[b as usize], p1.amps[(b | mask) as usize]);
        let (b0, b1) = (p0.amps[b as usize], p0.amps[(b | mask) as usize]);
        // <i| Tr_rest(|phi1><phi0|) |j> = sum_rest phi1[i,rest] conj(phi0[j,rest])
        cross[(0, 0)] += a0 * b0.conj();
        cross[(0, 1)] += a0 * b1.conj();
        cross[(1, 0)] += a1 * b0.conj();
        cross[(1, 1)] += a1 * b1.conj();
        w0 += b0.norm_sqr() + b1.norm_sqr();
        w1 += a0.norm_sqr() + a1.norm_sqr();
    }
    Ok((cross, w0, w1))
}

/// `|| e^{isH} O e^{-isH} - O ||` (exact largest eigenvalue of the Hermitian
/// difference).
pub fn heisenberg_deviation(
    h: &HamiltonianOperator,
    op: &Array2<C64>,
    s: f64,
) -> Result<f64> {
    let eig = h.eigen()?;
    // Conjugate columns: U(s) O U(-s) with U = e^{isH}
    let dim = op.nrows();
    let mut evolved = Array2::zeros((dim, dim));
    // Build U(s) column-by-column from the eigendecomposition.
    // O(s) = e^{isH} O e^{-isH}; apply to each basis column.
    for j in 0..dim {
        let mut col = Array1::zeros(dim);
        col[j] = C64::new(1.0, 0.0);
        let col = eig.apply_fn(&col, |e| (-C64::i() * e * s).exp()); // e^{-isH} |j>
        let ocol = op.dot(&col);
        let ocol = eig.apply_fn(&ocol, |e| (C64::i() * e * s).exp()); // e^{isH} O e^{-isH} |j>
        evolved.column_mut(j).assign(&ocol);
    }
    let diff = &evolved - op;
    hermitian_norm(&diff)
}

/// Dense matrix of `sum_j Z_j`.
pub fn z_total_dense(n: usize) -> Array2<C64> {
    let dim = 1usize << n;
    let mut m = Array2::zeros((dim, dim));
    for b in 0..dim as u64 {
        m[(b as usize, b as usize)] =
            C64::new(n as f64 - 2.0 * b.count_ones() as f64, 0.0);
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pauli_graph::{ising_chain, Axis, PauliString, LocalTerm, PerturbedHamiltonian};
    use crate::pauli_graph::{build_graph, GraphKind};

    const SQRT_HALF: f64 = std::f64::consts::FRAC_1_SQRT_2;

    fn plus_state(n: usize) -> StateVector {
        let site = [C64::new(SQRT_HALF, 0.0), C64::new(SQRT_HALF, 0.0)];
        StateVector::product(&vec![site; n])
    }

    fn ghz(n: usize) -> StateVector {
        let b0 = StateVector::basis_state(n, 0);
        let b1 = StateVector::basis_state(n, (1u64 << n) - 1);
        b0.add(&b1).unwrap().scale(C64::new(SQRT_HALF, 0.0))
    }

    #[test]
    fn evolve_at_zero_time_is_identity() {
        let h = HamiltonianOperator::new(ising_chain(3, 0.4, 0.9).unwrap());
        let psi = plus_state(3);
        let out = h.evolve(&psi, 0.0).unwrap();
        assert!(out.fidelity(&psi) > 1.0 - 1e-12);
    }

    #[test]
    fn single_qubit_rabi_rotation() {
        // |+>, H = w Z: <X>(t) = cos(2 w t)
        let w = 0.8;
        let g = build_graph(&GraphKind::Chain { n: 1 }).unwrap();
        let h = HamiltonianOperator::new(PerturbedHamiltonian::new(g, vec![], w).unwrap());
        let psi = plus_state(1);
        for &t in &[0.1, 0.7, 2.3] {
            let out = h.evolve(&psi, t).unwrap();
            assert!((out.all_x_expectation() - (2.0 * w * t).cos()).abs() < 1e-12);
            assert!((out.norm() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ghz_parity_oscillates_at_2n_omega() {
        let n = 4;
        let w = 0.6;
        let g = build_graph(&GraphKind::Chain { n }).unwrap();
        let h = HamiltonianOperator::new(PerturbedHamiltonian::new(g, vec![], w).unwrap());
        for &t in &[0.2, 0.9] {
            let out = h.evolve(&ghz(n), t).unwrap();
            assert!((out.all_x_expectation() - (2.0 * n as f64 * w * t).cos()).abs() < 1e-10);
        }
    }

    #[test]
    fn evolution_is_unitary_reversible_and_composable() {
        let h = HamiltonianOperator::new(ising_chain(4, 0.3, 1.1).unwrap());
        let psi = ghz(4);
        let fwd = h.evolve(&psi, 0.37).unwrap();
        assert!((fwd.norm() - 1.0).abs() < 1e-10);
        let back = h.evolve(&fwd, -0.37).unwrap();
        assert!(back.fidelity(&psi) >= 1.0 - 1e-10);
        let two_step = h.evolve(&h.evolve(&psi, 0.2).unwrap(), 0.17).unwrap();
        let diff = (&two_step.amps - &fwd.amps).iter().map(|z| z.norm()).fold(0.0, f64::max);
        assert!(diff < 1e-9);
    }

    #[test]
    fn time_dependent_constant_matches_static() {
        // constant drive == static Hamiltonian
        let n = 3;
        let hstat = ising_chain(n, 0.5, 0.0).unwrap();
        let paulis = hstat.interaction_paulis();
        let tdh = crate::pauli_graph::interaction_picture(&paulis, 0.0).unwrap();
        let psi = plus_state(n);
        let t = 0.4;
        let a = HamiltonianOperator::new(hstat).evolve(&psi, t).unwrap();
        let b = evolve_time_dependent(&psi, &tdh, t, 2000).unwrap();
        assert!(a.fidelity(&b) > 1.0 - 1e-8);
    }

    #[test]
    fn interaction_picture_reproduces_static_evolution_on_zeros() {
        // e^{-i t H_w}|0..0> equals time-ordered interaction-picture evolution
        // up to a global phase.
        let n = 3;
        let h = ising_chain(n, 0.4, 1.3).unwrap();
        let t = 0.35;
        let psi0 = StateVector::basis_state(n, 0);
        let exact = HamiltonianOperator::new(h.clone()).evolve(&psi0, t).unwrap();
        let vs = crate::pauli_graph::interaction_picture(&h.interaction_paulis(), h.omega()).unwrap();
        let hs = vs.evolution_drive(t);
        let ip = evolve_time_dependent(&psi0, &hs, t, 4000).unwrap();
        assert!(exact.fidelity(&ip) >= 1.0 - 1e-8);
    }

    #[test]
    fn rotating_frame_single_qubit_matches_reference_integration() {
        // H(s) = cos(2ws) X + sin(2ws) Y from interaction_picture of V = X
        let w = 1.1;
        let t = 0.3;
        let tdh = crate::pauli_graph::interaction_picture(
            &[PauliString::new([(0, Axis::X)], C64::new(1.0, 0.0))],
            w,
        )
        .unwrap();
        let psi0 = StateVector::basis_state(1, 0);
        let coarse = evolve_time_dependent(&psi0, &tdh, t, 800).unwrap();
        let fine = evolve_time_dependent(&psi0, &tdh, t, 12800).unwrap();
        assert!(coarse.fidelity(&fine) > 1.0 - 1e-8);
    }

    #[test]
    fn conditioned_rdm_product_state() {
        let psi = StateVector::basis_state(3, 0);
        let (rho, w) = conditioned_reduced_density(&psi, &[], 1).unwrap();
        assert!((w - 1.0).abs() < 1e-12);
        assert!((rho[(0, 0)].re - 1.0).abs() < 1e-12);
        assert!(rho[(1, 1)].norm() < 1e-12);
    }

    #[test]
    fn conditioned_rdm_ghz_after_plus_measurement() {
        let psi = ghz(2);
        let plus = [C64::new(SQRT_HALF, 0.0), C64::new(SQRT_HALF, 0.0)];
        let (rho, w) =
            conditioned_reduced_density(&psi, &[ProjectorStep { qubit: 0, ket: plus }], 1).unwrap();
        assert!((w - 0.5).abs() < 1e-12);
        // rho = (I + X)/2
        for (idx, expect) in [((0, 0), 0.5), ((0, 1), 0.5), ((1, 0), 0.5), ((1, 1), 0.5)] {
            assert!((rho[idx] - C64::new(expect, 0.0)).norm() < 1e-12);
        }
    }

    #[test]
    fn conditioned_rdm_ghz_branch_collapse() {
        let psi = ghz(3);
        let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let (rho, w) =
            conditioned_reduced_density(&psi, &[ProjectorStep { qubit: 0, ket: zero }], 1).unwrap();
        assert!((w - 0.5).abs() < 1e-12);
        assert!((rho[(0, 0)].re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_probability_record_is_degenerate() {
        let psi = StateVector::basis_state(2, 0);
        let one = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let res = conditioned_reduced_density(&psi, &[ProjectorStep { qubit: 0, ket: one }], 1);
        assert!(matches!(res, Err(Error::Degenerate(_))));
    }

    #[test]
    fn heisenberg_deviation_zero_cases() {
        let h = HamiltonianOperator::new(ising_chain(3, 0.5, 0.8).unwrap());
        let z = z_total_dense(3);
        assert!(heisenberg_deviation(&h, &z, 0.0).unwrap() < 1e-12);

        let free = HamiltonianOperator::new(ising_chain(3, 0.0, 0.8).unwrap());
        assert!(heisenberg_deviation(&free, &z, 1.7).unwrap() < 1e-10);
    }

    #[test]
    fn heisenberg_deviation_obeys_both_short_time_bounds() {
        // N = 4 chain, V = g sum XX: ||Z(s) - Z|| <= min(2||V|| s, 2NJ/w)
        let n = 4;
        let gc = 0.3;
        let w = 2.0;
        let h = HamiltonianOperator::new(ising_chain(n, gc, w).unwrap());
        let j = h.hamiltonian().local_strength();
        let z = z_total_dense(n);
        for &s in &[0.05, 0.2, 0.8] {
            let dev = heisenberg_deviation(&h, &z, s).unwrap();
            // s ||[V, Z]|| <= 2NJs from the local strength, and 2NJ/w from
            // energy conservation
            assert!(dev <= 2.0 * (n as f64) * j * s + 1e-9);
            assert!(dev <= 2.0 * (n as f64) * j / w + 1e-9);
        }
    }

    #[test]
    fn diagonal_fast_path_matches_generic() {
        let g = build_graph(&GraphKind::Chain { n: 3 }).unwrap();
        let zz = LocalTerm::from_pauli(PauliString::new(
            [(0, Axis::Z), (1, Axis::Z)],
            C64::new(0.4, 0.0),
        ))
        .unwrap();
        let h = PerturbedHamiltonian::new(g, vec![zz], 0.7).unwrap();
        let op = HamiltonianOperator::new(h.clone());
        assert!(op.hamiltonian().is_diagonal());
        let psi = plus_state(3);
        let fast = op.evolve(&psi, 0.9).unwrap();
        // generic path: force through eigen by building a copy without the
        // diagonal marker
        let dense = h.assemble_dense().unwrap();
        let eig = HermitianEigen::new(&dense).unwrap();
        let slow = StateVector { amps: eig.propagate(&psi.amps, 0.9), n: 3 };
        assert!(fast.fidelity(&slow) > 1.0 - 1e-12);
    }
}
