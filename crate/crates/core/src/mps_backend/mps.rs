//! Matrix product states on a chain of qubits: site tensors with shape
//! `[left bond, 2, right bond]`, open boundary bonds of dimension 1.

use ndarray::{Array1, Array2, Array3};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::exact_engine::StateVector;

pub const DEFAULT_D_MAX: usize = 64;
pub const DEFAULT_CUTOFF: f64 = 1e-10;

#[derive(Debug, Clone)]
pub struct MatrixProductState {
    tensors: Vec<Array3<C64>>,
    /// additively accumulated upper bound on the discarded weight
    pub truncation_error: f64,
}

impl MatrixProductState {
    pub fn from_tensors(tensors: Vec<Array3<C64>>) -> Result<Self> {
        if tensors.is_empty() {
            return Err(Error::Structural("MPS needs at least one site".into()));
        }
        if tensors[0].shape()[0] != 1 || tensors.last().unwrap().shape()[2] != 1 {
            return Err(Error::Structural("boundary bonds must have dimension 1".into()));
        }
        for w in tensors.windows(2) {
            if w[0].shape()[2] != w[1].shape()[0] {
                return Err(Error::Structural("bond dimensions do not match".into()));
            }
        }
        Ok(Self { tensors, truncation_error: 0.0 })
    }

    /// Product state from per-site kets: all bond dimensions 1.
    pub fn from_product(sites: &[[C64; 2]]) -> Self {
        let tensors = sites
            .iter()
            .map(|s| {
                let mut t = Array3::zeros((1, 2, 1));
                t[(0, 0, 0)] = s[0];
                t[(0, 1, 0)] = s[1];
                t
            })
            .collect();
        Self { tensors, truncation_error: 0.0 }
    }

    pub fn basis_state(n: usize, bits: u64) -> Self {
        let zero = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let one = [C64::new(0.0, 0.0), C64::new(1.0, 0.0)];
        let sites: Vec<[C64; 2]> =
            (0..n).map(|q| if (bits >> q) & 1 == 1 { one } else { zero }).collect();
        Self::from_product(&sites)
    }

    pub fn site_count(&self) -> usize {
        self.tensors.len()
    }

    pub fn tensor(&self, i: usize) -> &Array3<C64> {
        &self.tensors[i]
    }

    pub fn tensor_mut(&mut self, i: usize) -> &mut Array3<C64> {
        &mut self.tensors[i]
    }

    pub fn bond_dims(&self) -> Vec<usize> {
        self.tensors.iter().skip(1).map(|t| t.shape()[0]).collect()
    }

    pub fn max_bond_dim(&self) -> usize {
        self.bond_dims().into_iter().max().unwrap_or(1)
    }

    /// `<self|self>` by transfer contraction.
    pub fn norm_sqr(&self) -> f64 {
        let ops: Vec<Option<Array2<C64>>> = vec![None; self.site_count()];
        crate::mps_backend::contract::string_expectation(self, self, &ops)
            .expect("norm contraction")
            .re
    }

    /// Superposition `(a + b)` by bond-wise direct sum (not normalized).
    pub fn direct_sum(a: &Self, b: &Self) -> Result<Self> {
        if a.site_count() != b.site_count() {
            return Err(Error::Structural("superposing MPS of different size".into()));
        }
        let n = a.site_count();
        let mut tensors = Vec::with_capacity(n);
        for i in 0..n {
            let (ta, tb) = (&a.tensors[i], &b.tensors[i]);
            let (la, ra) = (ta.shape()[0], ta.shape()[2]);
            let (lb, rb) = (tb.shape()[0], tb.shape()[2]);
            let (l, r) = if n == 1 {
                (1, 1)
            } else if i == 0 {
                (1, ra + rb)
            } else if i == n - 1 {
                (la + lb, 1)
            } else {
                (la + lb, ra + rb)
            };
            let mut t = Array3::zeros((l, 2, r));
            for s in 0..2 {
                for x in 0..la {
                    for y in 0..ra {
                        t[(x, s, y)] += ta[(x, s, y)];
                    }
                }
                for x in 0..lb {
                    for y in 0..rb {
                        let xo = if i == 0 { x } else { x + la };
                        let yo = if i == n - 1 { y } else { y + ra };
                        t[(xo, s, yo)] += tb[(x, s, y)];
                    }
                }
            }
            tensors.push(t);
        }
        let mut out = Self::from_tensors(tensors)?;
        out.truncation_error = a.truncation_error + b.truncation_error;
        Ok(out)
    }

    /// Dense amplitudes (small N only).
    pub fn to_statevector(&self) -> Result<StateVector> {
        let n = self.site_count();
        if n > 20 {
            return Err(Error::Resource("dense conversion capped at N = 20".into()));
        }
        let mut amps = Array1::zeros(1 << n);
        for bits in 0..(1u64 << n) {
            // row vector propagated through the chain
            let mut v: Array1<C64> = Array1::from_elem(1, C64::new(1.0, 0.0));
            for (q, t) in self.tensors.iter().enumerate() {
                let s = ((bits >> q) & 1) as usize;
                let (dl, dr) = (t.shape()[0], t.shape()[2]);
                let mut next = Array1::zeros(dr);
                for b in 0..dr {
                    let mut acc = C64::new(0.0, 0.0);
                    for a in 0..dl {
                        acc += v[a] * t[(a, s, b)];
                    }
                    next[b] = acc;
                }
                v = next;
            }
            amps[bits as usize] = v[0];
        }
        StateVector::from_amplitudes(amps)
    }

    /// Sweep right-to-left bringing every site into right-canonical form;
    /// returns the state norm and leaves the MPS normalized. Uses modified
    /// Gram-Schmidt row orthonormalization, which is deterministic, so the
    /// canonical form is idempotent.
    pub fn canonicalize(&mut self) -> Result<f64> {
        let n = self.site_count();
        let mut carry: Option<Array2<C64>> = None;
        for i in (0..n).rev() {
            let mut t = self.tensors[i].clone();
            if let Some(c) = carry.take() {
                t = contract_right(&t, &c);
            }
            let (dl, dr) = (t.shape()[0], t.shape()[2]);
            let m = reshape_lr(&t, dl, 2 * dr);
            let (coeff, q) = row_orthonormalize(&m)?;
            let k = q.nrows();
            let mut rc = Array3::zeros((k, 2, dr));
            for a in 0..k {
                for sph in 0..2 {
                    for b in 0..dr {
                        rc[(a, sph, b)] = q[(a, sph * dr + b)];
                    }
                }
            }
            self.tensors[i] = rc;
            if i == 0 {
                // dl == 1: coeff is a row vector whose norm is the state norm
                let norm = (0..k).map(|c| coeff[(0, c)].norm_sqr()).sum::<f64>().sqrt();
                if norm < 1e-300 {
                    return Err(Error::Degenerate("canonicalizing a zero state".into()));
                }
                let row = coeff.row(0).to_owned();
                let t0 = self.tensors[0].clone();
                let dr0 = t0.shape()[2];
                let mut merged = Array3::zeros((1, 2, dr0));
                for sph in 0..2 {
                    for b in 0..dr0 {
                        let mut acc = C64::new(0.0, 0.0);
                        for a in 0..k {
                            acc += row[a] * t0[(a, sph, b)];
                        }
                        merged[(0, sph, b)] = acc / norm;
                    }
                }
                self.tensors[0] = merged;
                return Ok(norm);
            }
            carry = Some(coeff);
        }
        unreachable!("loop returns at i == 0");
    }
}

/// Factor `M = C Q` with orthonormal rows Q spanning the row space of M
/// (modified Gram-Schmidt with a deterministic phase convention: the first
/// entry of each Q row above 1e-12 is real positive). Near-zero rows are
/// dropped, trimming the bond.
fn row_orthonormalize(m: &Array2<C64>) -> Result<(Array2<C64>, Array2<C64>)> {
    let (rows, cols) = (m.nrows(), m.ncols());
    let scale = crate::dense::fro_norm(m).max(1e-300);
    let mut q_rows: Vec<Array1<C64>> = Vec::new();
    let mut coeff: Array2<C64> = Array2::zeros((rows, rows.min(cols)));
    for r in 0..rows {
        let mut v = m.row(r).to_owned();
        for (qi, qrow) in q_rows.iter().enumerate() {
            let ip: C64 = qrow.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            coeff[(r, qi)] = ip;
            for (vi, &qv) in v.iter_mut().zip(qrow.iter()) {
                *vi -= ip * qv;
            }
        }
        // second MGS pass for orthogonality at working precision
        for (qi, qrow) in q_rows.iter().enumerate() {
            let ip: C64 = qrow.iter().zip(v.iter()).map(|(a, b)| a.conj() * b).sum();
            coeff[(r, qi)] += ip;
            for (vi, &qv) in v.iter_mut().zip(qrow.iter()) {
                *vi -= ip * qv;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-13 * scale {
            if q_rows.len() == cols {
                return Err(Error::Numerical("row space exceeds column count".into()));
            }
            // deterministic phase: first significant entry real positive
            let pivot = v.iter().find(|z| z.norm() > 1e-12 * norm).copied().unwrap_or(C64::new(1.0, 0.0));
            let phase = pivot / pivot.norm();
            let qn = v.mapv(|z| z / (phase * norm));
            coeff[(r, q_rows.len())] = phase * norm;
            q_rows.push(qn);
        }
    }
    if q_rows.is_empty() {
        return Err(Error::Degenerate("zero matrix in canonicalization".into()));
    }
    let k = q_rows.len();
    let mut q: Array2<C64> = Array2::zeros((k, cols));
    for (i, row) in q_rows.iter().enumerate() {
        q.row_mut(i).assign(row);
    }
    Ok((coeff.slice(ndarray::s![.., ..k]).to_owned(), q))
}

/// Contract a matrix into the right bond: `T'[a, s, c] = sum_b T[a, s, b] M[b, c]`.
pub fn contract_right(t: &Array3<C64>, m: &Array2<C64>) -> Array3<C64> {
    let (dl, dr2) = (t.shape()[0], m.shape()[1]);
    let mut out = Array3::zeros((dl, 2, dr2));
    for a in 0..dl {
        for s in 0..2 {
            for c in 0..dr2 {
                let mut acc = C64::new(0.0, 0.0);
                for b in 0..t.shape()[2] {
                    acc += t[(a, s, b)] * m[(b, c)];
                }
                out[(a, s, c)] = acc;
            }
        }
    }
    out
}

/// Contract a matrix into the left bond: `T'[a, s, b] = sum_x M[a, x] T[x, s, b]`.
pub fn contract_left(m: &Array2<C64>, t: &Array3<C64>) -> Array3<C64> {
    let (dl2, dr) = (m.shape()[0], t.shape()[2]);
    let mut out = Array3::zeros((dl2, 2, dr));
    for a in 0..dl2 {
        for s in 0..2 {
            for b in 0..dr {
                let mut acc = C64::new(0.0, 0.0);
                for x in 0..t.shape()[0] {
                    acc += m[(a, x)] * t[(x, s, b)];
                }
                out[(a, s, b)] = acc;
            }
        }
    }
    out
}

pub fn reshape_lr(t: &Array3<C64>, rows: usize, cols: usize) -> Array2<C64> {
    let mut m = Array2::zeros((rows, cols));
    let (dl, dr) = (t.shape()[0], t.shape()[2]);
    debug_assert_eq!(rows * cols, dl * 2 * dr);
    for a in 0..dl {
        for s in 0..2 {
            for b in 0..dr {
                let flat = (a * 2 + s) * dr + b;
                m[(flat / cols, flat % cols)] = t[(a, s, b)];
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;

    const SQH: f64 = std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn product_states_have_unit_bonds() {
        let s = [C64::new(SQH, 0.0), C64::new(SQH, 0.0)];
        let mps = MatrixProductState::from_product(&vec![s; 5]);
        assert!(mps.bond_dims().iter().all(|&d| d == 1));
        assert!((mps.norm_sqr() - 1.0).abs() < 1e-12);
        let sv = mps.to_statevector().unwrap();
        for a in sv.amplitudes() {
            assert!((a.re - (SQH.powi(5))).abs() < 1e-12);
        }
    }

    #[test]
    fn ghz_direct_sum_has_bond_two() {
        let n = 4;
        let a = MatrixProductState::basis_state(n, 0);
        let b = MatrixProductState::basis_state(n, (1 << n) - 1);
        let mut ghz = MatrixProductState::direct_sum(&a, &b).unwrap();
        assert!(ghz.bond_dims().iter().all(|&d| d == 2));
        let norm = ghz.canonicalize().unwrap();
        assert!((norm - 2f64.sqrt()).abs() < 1e-12);
        let sv = ghz.to_statevector().unwrap();
        assert!((sv.amplitudes()[0].norm() - SQH).abs() < 1e-12);
        assert!((sv.amplitudes()[(1 << n) - 1].norm() - SQH).abs() < 1e-12);
    }

    #[test]
    fn canonicalize_is_idempotent() {
        let n = 3;
        let a = MatrixProductState::basis_state(n, 0b010);
        let b = MatrixProductState::basis_state(n, 0b101);
        let mut st = MatrixProductState::direct_sum(&a, &b).unwrap();
        st.canonicalize().unwrap();
        let before: Vec<Array3<C64>> = st.tensors.clone();
        st.canonicalize().unwrap();
        for (x, y) in before.iter().zip(st.tensors.iter()) {
            let diff: f64 = x
                .iter()
                .zip(y.iter())
                .map(|(p, q)| (p - q).norm_sqr())
                .sum::<f64>()
                .sqrt();
            assert!(diff < 1e-12, "tensors changed on re-canonicalization");
        }
    }
}
