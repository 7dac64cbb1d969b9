//! Time-dependent Hamiltonians with a shared Fourier frequency list, and the
//! interaction-picture reduction of `V + omega Z`.

use std::collections::BTreeMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::pauli::{Axis, PauliString};
use crate::error::{Error, Result};

/// One drive term `J_a(s) H_a` with `H_a` a unit-coefficient Pauli string and
/// `J_a(s) = sum_nu c_nu e^{-i nu B s}` over integer multiples `nu` of the
/// base frequency `B`.
#[derive(Debug, Clone)]
pub struct DriveTerm {
    pub pauli: PauliString,
    /// (integer frequency multiple, complex amplitude)
    pub fourier: Vec<(i64, C64)>,
}

impl DriveTerm {
    pub fn coefficient(&self, base_freq: f64, s: f64) -> C64 {
        self.fourier
            .iter()
            .map(|&(m, c)| c * (-C64::i() * (m as f64) * base_freq * s).exp())
            .sum()
    }
}

/// `H(s) = sum_a J_a(s) H_a`, all `J_a` built on one shared frequency list.
///
/// Frequencies are stored as exact integer multiples of `base_freq` so that
/// deduplication (the Fourier-component count F) is exact.
#[derive(Debug, Clone)]
pub struct TimeDependentHamiltonian {
    terms: Vec<DriveTerm>,
    base_freq: f64,
    multiples: Vec<i64>,
    j_tilde: f64,
}

impl TimeDependentHamiltonian {
    pub fn new(terms: Vec<DriveTerm>, base_freq: f64) -> Result<Self> {
        for t in &terms {
            if (t.pauli.coeff - C64::new(1.0, 0.0)).norm() > 1e-14 {
                return Err(Error::Structural(
                    "drive-term Pauli strings must carry unit coefficient; put the amplitude in the Fourier data"
                        .into(),
                ));
            }
            if t.pauli.ops().is_empty() {
                return Err(Error::Structural("drive term must act on at least one qubit".into()));
            }
        }
        let mut mults: Vec<i64> = terms.iter().flat_map(|t| t.fourier.iter().map(|&(m, _)| m)).collect();
        mults.sort_unstable();
        mults.dedup();
        let j_tilde = max_drive_amplitude(&terms, base_freq);
        Ok(Self { terms, base_freq, multiples: mults, j_tilde })
    }

    pub fn terms(&self) -> &[DriveTerm] {
        &self.terms
    }

    pub fn base_freq(&self) -> f64 {
        self.base_freq
    }

    /// The deduplicated shared frequency list (integer multiples of the base).
    pub fn frequency_multiples(&self) -> &[i64] {
        &self.multiples
    }

    pub fn fourier_component_count(&self) -> usize {
        self.multiples.len()
    }

    pub fn j_tilde(&self) -> f64 {
        self.j_tilde
    }

    pub fn qubit_count(&self) -> usize {
        self.terms
            .iter()
            .flat_map(|t| t.pauli.support())
            .max()
            .map_or(0, |q| q + 1)
    }

    /// Hermiticity defect of H(s) at a given s (max over terms of |Im J_a|
    /// is not enough since Paulis are Hermitian; J_a must be real).
    pub fn coefficient_imag_defect(&self, s: f64) -> f64 {
        self.terms
            .iter()
            .map(|t| t.coefficient(self.base_freq, s).im.abs())
            .fold(0.0, f64::max)
    }

    /// Dense matrix on `n` qubits at drive time `s`.
    pub fn dense_at(&self, n: usize, s: f64) -> Array2<C64> {
        let dim = 1usize << n;
        let mut m = Array2::zeros((dim, dim));
        for t in &self.terms {
            let c = t.coefficient(self.base_freq, s);
            let act = t.pauli.action_masks();
            for b in 0..dim as u64 {
                let b2 = b ^ act.flip;
                m[(b2 as usize, b as usize)] += act.amp_on(b) * c;
            }
        }
        m
    }

    /// The reversed drive `H'(s) = H(t - s)`: time-ordered evolution under it
    /// for time `t` reproduces `e^{-i t H_omega}` on Z-eigenstate inputs up
    /// to a global phase. Verified against the dense propagator in tests.
    pub fn evolution_drive(&self, t: f64) -> Self {
        let terms = self
            .terms
            .iter()
            .map(|dt| DriveTerm {
                pauli: dt.pauli.clone(),
                fourier: dt
                    .fourier
                    .iter()
                    .map(|&(m, c)| {
                        let phase = (-C64::i() * (m as f64) * self.base_freq * t).exp();
                        (-m, c * phase)
                    })
                    .collect(),
            })
            .collect();
        let mut out = Self::new(terms, self.base_freq).expect("reversal preserves validity");
        // sup_s |J_a(s)| is invariant under s -> t - s.
        out.j_tilde = self.j_tilde;
        out
    }
}

fn max_drive_amplitude(terms: &[DriveTerm], base: f64) -> f64 {
    // |J_a(s)| is periodic (or constant); sample one period densely.
    let period = if base.abs() > 0.0 { 2.0 * std::f64::consts::PI / base.abs() } else { 1.0 };
    let mut m: f64 = 0.0;
    for t in terms {
        if t.fourier.iter().all(|&(k, _)| k == 0) {
            let c: C64 = t.fourier.iter().map(|&(_, c)| c).sum();
            m = m.max(c.norm());
            continue;
        }
        for i in 0..2048 {
            let s = period * (i as f64) / 2048.0;
            m = m.max(t.coefficient(base, s).norm());
        }
    }
    m
}

/// Rewrites `V` in the interaction picture of `omega Z`:
/// `H(s) = V(t-s)` with `V(s) = e^{-i omega s Z} V e^{i omega s Z}`.
///
/// This returns `V(s)` itself (apply [`TimeDependentHamiltonian::time_reversed`]
/// for the `t-s` ordering). Every X or Y site of an input Pauli acquires the
/// rotation `X -> cos(2 omega s) X + sin(2 omega s) Y`,
/// `Y -> cos(2 omega s) Y - sin(2 omega s) X`, so the output frequencies are
/// integer multiples of `2 omega`.
pub fn interaction_picture(paulis: &[PauliString], omega: f64) -> Result<TimeDependentHamiltonian> {
    let base = 2.0 * omega;
    let mut merged: BTreeMap<Vec<(usize, Axis)>, BTreeMap<i64, C64>> = BTreeMap::new();

    for p in paulis {
        // Per rotated site, the two branches (axis, fourier-of-cos-or-sin).
        // cos(2ws) -> {+1: 1/2, -1: 1/2}; sin(2ws) -> {+1: i/2, -1: -i/2}
        // in the convention J(s) = sum_m c_m e^{-i m (2w) s}.
        let half = C64::new(0.5, 0.0);
        let ih = C64::new(0.0, 0.5);
        let mut partial: Vec<(Vec<(usize, Axis)>, BTreeMap<i64, C64>)> =
            vec![(Vec::new(), BTreeMap::from([(0i64, C64::new(1.0, 0.0))]))];
        for &(q, a) in p.ops() {
            let branches: Vec<(Axis, [(i64, C64); 2])> = match a {
                Axis::Z => vec![(Axis::Z, [(0, C64::new(1.0, 0.0)), (0, C64::new(0.0, 0.0))])],
                Axis::X => vec![
                    (Axis::X, [(1, half), (-1, half)]),
                    (Axis::Y, [(1, ih), (-1, -ih)]),
                ],
                Axis::Y => vec![
                    (Axis::Y, [(1, half), (-1, half)]),
                    (Axis::X, [(1, -ih), (-1, ih)]),
                ],
            };
            let mut next = Vec::with_capacity(partial.len() * branches.len());
            for (ops, freqs) in &partial {
                for (axis, comp) in &branches {
                    let mut ops2 = ops.clone();
                    ops2.push((q, *axis));
                    let mut freqs2: BTreeMap<i64, C64> = BTreeMap::new();
                    for (&m, &c) in freqs {
                        for &(dm, dc) in comp {
                            if dc.norm() == 0.0 {
                                continue;
                            }
                            *freqs2.entry(m + dm).or_insert(C64::new(0.0, 0.0)) += c * dc;
                        }
                    }
                    if !freqs2.is_empty() {
                        next.push((ops2, freqs2));
                    }
                }
            }
            partial = next;
        }
        for (ops, freqs) in partial {
            let entry = merged.entry(ops).or_default();
            for (m, c) in freqs {
                *entry.entry(m).or_insert(C64::new(0.0, 0.0)) += c * p.coeff;
            }
        }
    }

    let terms: Vec<DriveTerm> = merged
        .into_iter()
        .filter_map(|(ops, freqs)| {
            let fourier: Vec<(i64, C64)> =
                freqs.into_iter().filter(|(_, c)| c.norm() > 1e-15).collect();
            if fourier.is_empty() {
                return None;
            }
            Some(DriveTerm {
                pauli: PauliString::new(ops, C64::new(1.0, 0.0)),
                fourier,
            })
        })
        .collect();
    TimeDependentHamiltonian::new(terms, base)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dense::fro_norm;

    fn ps(ops: &[(usize, Axis)], c: f64) -> PauliString {
        PauliString::new(ops.iter().copied(), C64::new(c, 0.0))
    }

    #[test]
    fn z_term_is_static() {
        let tdh = interaction_picture(&[ps(&[(0, Axis::Z)], 1.0)], 0.7).unwrap();
        assert_eq!(tdh.frequency_multiples(), &[0]);
        assert_eq!(tdh.terms().len(), 1);
    }

    #[test]
    fn single_x_rotates_into_x_and_y() {
        let w = 0.9;
        let tdh = interaction_picture(&[ps(&[(0, Axis::X)], 1.0)], w).unwrap();
        assert_eq!(tdh.frequency_multiples(), &[-1, 1]);
        // cross-check against the 2x2 conjugation identity at sampled s
        for &s in &[0.0, 0.3, 1.1] {
            let m = tdh.dense_at(1, s);
            let (c, sn) = ((2.0 * w * s).cos(), (2.0 * w * s).sin());
            let expect = ndarray::array![
                [C64::new(0.0, 0.0), C64::new(c, -sn)],
                [C64::new(c, sn), C64::new(0.0, 0.0)]
            ];
            assert!(fro_norm(&(&m - &expect)) < 1e-12, "s={s}");
        }
    }

    #[test]
    fn xx_picks_up_zero_and_double_frequency() {
        let tdh = interaction_picture(&[ps(&[(0, Axis::X), (1, Axis::X)], 1.0)], 0.5).unwrap();
        assert_eq!(tdh.frequency_multiples(), &[-2, 0, 2]);
    }

    #[test]
    fn conjugation_identity_on_random_terms() {
        // || dense(V(s)) - e^{-i w s Z} V e^{i w s Z} || small, N = 3
        let w = 0.8;
        let n = 3;
        let paulis = vec![
            ps(&[(0, Axis::X), (1, Axis::X)], 0.4),
            ps(&[(1, Axis::Y), (2, Axis::Z)], -0.3),
            ps(&[(2, Axis::X)], 0.2),
        ];
        let tdh = interaction_picture(&paulis, w).unwrap();
        let dim = 1usize << n;
        let mut v: Array2<C64> = Array2::zeros((dim, dim));
        for p in &paulis {
            let act = p.action_masks();
            for b in 0..dim as u64 {
                v[((b ^ act.flip) as usize, b as usize)] += act.amp_on(b);
            }
        }
        for &s in &[0.17, 0.62, 1.31] {
            // e^{-iwsZ} is diagonal with entries e^{-iws * zsum(b)}
            let mut rot = v.clone();
            for bi in 0..dim {
                for bj in 0..dim {
                    let zi = n as f64 - 2.0 * (bi as u64).count_ones() as f64;
                    let zj = n as f64 - 2.0 * (bj as u64).count_ones() as f64;
                    rot[(bi, bj)] *= (-C64::i() * w * s * (zi - zj)).exp();
                }
            }
            let m = tdh.dense_at(n, s);
            assert!(fro_norm(&(&m - &rot)) < 1e-10, "s={s}");
        }
    }

    #[test]
    fn coefficients_are_real_for_hermitian_input() {
        let tdh = interaction_picture(
            &[ps(&[(0, Axis::X), (1, Axis::Y)], 0.7), ps(&[(0, Axis::Y)], 0.2)],
            1.3,
        )
        .unwrap();
        for &s in &[0.1, 0.45, 2.2] {
            assert!(tdh.coefficient_imag_defect(s) < 1e-12);
        }
    }

    #[test]
    fn evolution_drive_matches_shifted_coefficients() {
        let w = 0.6;
        let t = 0.9;
        let tdh = interaction_picture(&[ps(&[(0, Axis::X)], 1.0)], w).unwrap();
        let rev = tdh.evolution_drive(t);
        for &s in &[0.0, 0.2, 0.7] {
            let a = tdh.dense_at(1, t - s);
            let b = rev.dense_at(1, s);
            assert!(fro_norm(&(&a - &b)) < 1e-12);
        }
    }
}
