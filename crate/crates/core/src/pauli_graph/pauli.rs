//! Pauli strings on named qubits.

use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Single-qubit Pauli axis. Identity is represented by absence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

/// A scalar multiple of a tensor product of Pauli operators.
///
/// Stored as a sorted `(qubit, axis)` list; qubits not listed carry identity.
/// The empty support with a scalar represents a multiple of the identity.
#[derive(Debug, Clone, PartialEq)]
pub struct PauliString {
    ops: Vec<(usize, Axis)>,
    pub coeff: C64,
}

impl PauliString {
    pub fn new(ops: impl IntoIterator<Item = (usize, Axis)>, coeff: C64) -> Self {
        let mut v: Vec<(usize, Axis)> = ops.into_iter().collect();
        v.sort_by_key(|&(q, _)| q);
        v.dedup_by_key(|&mut (q, _)| q);
        Self { ops: v, coeff }
    }

    pub fn identity(coeff: C64) -> Self {
        Self { ops: Vec::new(), coeff }
    }

    pub fn ops(&self) -> &[(usize, Axis)] {
        &self.ops
    }

    pub fn axis_on(&self, qubit: usize) -> Option<Axis> {
        self.ops
            .binary_search_by_key(&qubit, |&(q, _)| q)
            .ok()
            .map(|i| self.ops[i].1)
    }

    pub fn support(&self) -> impl Iterator<Item = usize> + '_ {
        self.ops.iter().map(|&(q, _)| q)
    }

    pub fn weight(&self) -> usize {
        self.ops.len()
    }

    /// Bitmask of qubits where the string acts nontrivially (qubits < 64).
    pub fn support_mask(&self) -> u64 {
        self.ops.iter().fold(0u64, |m, &(q, _)| m | (1u64 << q))
    }

    /// Masks for applying the string to computational-basis kets:
    /// `flip` marks X/Y sites, `phase_z` marks Z/Y sites.
    pub fn action_masks(&self) -> PauliAction {
        let mut flip = 0u64;
        let mut z = 0u64;
        let mut y_count = 0u32;
        for &(q, a) in &self.ops {
            match a {
                Axis::X => flip |= 1 << q,
                Axis::Y => {
                    flip |= 1 << q;
                    z |= 1 << q;
                    y_count += 1;
                }
                Axis::Z => z |= 1 << q,
            }
        }
        PauliAction { flip, z, y_count, coeff: self.coeff }
    }

    /// Product of two Pauli strings; the phase is a power of i.
    pub fn mul(&self, other: &Self) -> Self {
        let mut ops = Vec::with_capacity(self.ops.len() + other.ops.len());
        let mut phase = C64::new(1.0, 0.0);
        let (mut i, mut j) = (0, 0);
        while i < self.ops.len() || j < other.ops.len() {
            if j >= other.ops.len() || (i < self.ops.len() && self.ops[i].0 < other.ops[j].0) {
                ops.push(self.ops[i]);
                i += 1;
            } else if i >= self.ops.len() || other.ops[j].0 < self.ops[i].0 {
                ops.push(other.ops[j]);
                j += 1;
            } else {
                let q = self.ops[i].0;
                let (a, b) = (self.ops[i].1, other.ops[j].1);
                if a == b {
                    // sigma^2 = I
                } else {
                    let (axis, ph) = pauli_product(a, b);
                    ops.push((q, axis));
                    phase *= ph;
                }
                i += 1;
                j += 1;
            }
        }
        Self { ops, coeff: self.coeff * other.coeff * phase }
    }

    /// Human-readable form like `X1 Z3` (1-based qubits), ignoring the coefficient.
    pub fn label(&self) -> String {
        if self.ops.is_empty() {
            return "I".to_string();
        }
        self.ops
            .iter()
            .map(|&(q, a)| format!("{:?}{}", a, q + 1))
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Bit-level description of a Pauli string's action on basis states.
#[derive(Debug, Clone, Copy)]
pub struct PauliAction {
    pub flip: u64,
    pub z: u64,
    pub y_count: u32,
    pub coeff: C64,
}

impl PauliAction {
    /// `P |b> = amp |b ^ flip>`; returns `amp`.
    pub fn amp_on(&self, b: u64) -> C64 {
        // Z-type phase: (-1)^{popcount(b & z)}; each Y contributes i on |0>, -i on |1>,
        // i.e. a global i^{y_count} together with the (-1) from the z mask.
        let sign = if ((b & self.z).count_ones() & 1) == 1 { -1.0 } else { 1.0 };
        let i_pow = match self.y_count % 4 {
            0 => C64::new(1.0, 0.0),
            1 => C64::new(0.0, 1.0),
            2 => C64::new(-1.0, 0.0),
            _ => C64::new(0.0, -1.0),
        };
        self.coeff * i_pow * sign
    }
}

fn pauli_product(a: Axis, b: Axis) -> (Axis, C64) {
    use Axis::*;
    let i = C64::new(0.0, 1.0);
    match (a, b) {
        (X, Y) => (Z, i),
        (Y, X) => (Z, -i),
        (Y, Z) => (X, i),
        (Z, Y) => (X, -i),
        (Z, X) => (Y, i),
        (X, Z) => (Y, -i),
        _ => unreachable!("equal axes handled by caller"),
    }
}

/// 2x2 matrix of a single axis.
pub fn axis_matrix(a: Axis) -> [[C64; 2]; 2] {
    let o = C64::new(0.0, 0.0);
    let l = C64::new(1.0, 0.0);
    let i = C64::new(0.0, 1.0);
    match a {
        Axis::X => [[o, l], [l, o]],
        Axis::Y => [[o, -i], [i, o]],
        Axis::Z => [[l, o], [o, -l]],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(ops: &[(usize, Axis)]) -> PauliString {
        PauliString::new(ops.iter().copied(), C64::new(1.0, 0.0))
    }

    #[test]
    fn products_carry_quarter_phases() {
        use Axis::*;
        let xy = p(&[(0, X)]).mul(&p(&[(0, Y)]));
        assert_eq!(xy.ops(), &[(0, Z)]);
        assert!((xy.coeff - C64::new(0.0, 1.0)).norm() < 1e-15);

        let yx = p(&[(0, Y)]).mul(&p(&[(0, X)]));
        assert!((yx.coeff - C64::new(0.0, -1.0)).norm() < 1e-15);

        // (X1 Y2)(Y1 Y2) = (XY) (Y Y) = iZ1
        let a = p(&[(0, X), (1, Y)]);
        let b = p(&[(0, Y), (1, Y)]);
        let c = a.mul(&b);
        assert_eq!(c.ops(), &[(0, Z)]);
        assert!((c.coeff - C64::new(0.0, 1.0)).norm() < 1e-15);
    }

    #[test]
    fn phase_is_always_power_of_i() {
        use Axis::*;
        let strings = [
            p(&[(0, X), (1, Z)]),
            p(&[(0, Y), (2, Y)]),
            p(&[(1, Z), (2, X)]),
            p(&[(0, Z), (1, Y), (2, X)]),
        ];
        for a in &strings {
            for b in &strings {
                let c = a.mul(b);
                let ph = c.coeff;
                let ok = [(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)]
                    .iter()
                    .any(|&(re, im)| (ph - C64::new(re, im)).norm() < 1e-15);
                assert!(ok, "phase {ph} not a power of i");
            }
        }
    }

    #[test]
    fn basis_action_matches_matrices() {
        use Axis::*;
        // Y|0> = i|1>, Y|1> = -i|0>
        let y = p(&[(0, Y)]).action_masks();
        assert!((y.amp_on(0) - C64::new(0.0, 1.0)).norm() < 1e-15);
        assert!((y.amp_on(1) - C64::new(0.0, -1.0)).norm() < 1e-15);
        // Z1 X2 |01> : qubit0 in |0>... bit order: bit q = qubit q occupation
        let zx = p(&[(0, Z), (1, X)]).action_masks();
        assert_eq!(zx.flip, 0b10);
        assert!((zx.amp_on(0b01) + C64::new(1.0, 0.0)).norm() < 1e-15);
    }
}
