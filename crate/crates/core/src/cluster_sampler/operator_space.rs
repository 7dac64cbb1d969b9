//! Dense operator-space vectors: operators viewed as vectors under the
//! Hilbert-Schmidt inner product `(A|B) = Tr(A^dagger B)`. Used as the
//! brute-force oracle for the cluster expansion and to test Liouvillian
//! properties.

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::pauli_graph::PauliString;

#[derive(Debug, Clone)]
pub struct OperatorVector {
    pub mat: Array2<C64>,
    pub n: usize,
}

impl OperatorVector {
    pub fn ketbra(n: usize, ket: u64, bra: u64) -> Self {
        let dim = 1usize << n;
        let mut mat = Array2::zeros((dim, dim));
        mat[(ket as usize, bra as usize)] = C64::new(1.0, 0.0);
        Self { mat, n }
    }

    pub fn from_matrix(mat: Array2<C64>) -> Self {
        let n = mat.nrows().trailing_zeros() as usize;
        Self { mat, n }
    }

    /// `(self | other) = Tr(self^dagger other)`
    pub fn inner(&self, other: &Self) -> C64 {
        self.mat
            .iter()
            .zip(other.mat.iter())
            .map(|(a, b)| a.conj() * b)
            .sum()
    }

    pub fn norm2(&self) -> f64 {
        self.inner(self).re.max(0.0).sqrt()
    }

    /// `L_a |O) = -i |[H_a, O])`
    pub fn liouvillian_apply(&self, h_a: &PauliString) -> Self {
        let dim = self.mat.nrows();
        let act = h_a.action_masks();
        let mut out: Array2<C64> = Array2::zeros((dim, dim));
        for k in 0..dim as u64 {
            let amp = act.amp_on(k);
            let k2 = (k ^ act.flip) as usize;
            for b in 0..dim {
                // H O term: row k2 gets amp * O[k, b]
                out[(k2, b)] += -C64::i() * amp * self.mat[(k as usize, b)];
            }
        }
        for b in 0..dim as u64 {
            // (OH)[k, b2] = O[k, b] H[b, b2] with H[b, b2] = amp_on(b2)
            let amp = act.amp_on(b ^ act.flip);
            let b2 = (b ^ act.flip) as usize;
            for k in 0..dim {
                out[(k, b2)] += C64::i() * amp * self.mat[(k, b as usize)];
            }
        }
        Self { mat: out, n: self.n }
    }
}
