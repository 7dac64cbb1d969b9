//! Per-cluster derivatives and the inclusion-exclusion (Moebius) assembly of
//! the log-expansion over the multiset lattice. The production marginal sums
//! the identical series through the degree-tracked Dyson recursion; this
//! module recomputes small orders cluster-by-cluster so the two routes can be
//! checked against each other and against a brute-force Taylor oracle.

use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use super::clusters::Cluster;
use super::expansion::MeasuredQubit;
use crate::error::Result;
use crate::pauli_graph::TimeDependentHamiltonian;

/// Dense, ket-bra-resolved symbolic vector used by the per-cluster DP:
/// `(freq multiple, power) -> matrix`.
type SymMatrix = HashMap<(i64, u8), Array2<C64>>;

fn apply_drive_term(
    drive: &TimeDependentHamiltonian,
    term_idx: usize,
    w: &SymMatrix,
    dim: usize,
) -> SymMatrix {
    let term = &drive.terms()[term_idx];
    let act = term.pauli.action_masks();
    let mut out: SymMatrix = HashMap::new();
    for (&(freq, pow), mat) in w {
        // L_a applied to the matrix
        let mut lm: Array2<C64> = Array2::zeros((dim, dim));
        for k in 0..dim as u64 {
            let amp = act.amp_on(k);
            let k2 = (k ^ act.flip) as usize;
            for b in 0..dim {
                lm[(k2, b)] += -C64::i() * amp * mat[(k as usize, b)];
            }
        }
        for b in 0..dim as u64 {
            // (OH)[k, b2] = O[k, b] H[b, b2] with H[b, b2] = amp_on(b2)
            let amp = act.amp_on(b ^ act.flip);
            let b2 = (b ^ act.flip) as usize;
            for k in 0..dim {
                lm[(k, b2)] += C64::i() * amp * mat[(k, b as usize)];
            }
        }
        for &(m, c) in &term.fourier {
            let e = out
                .entry((freq + m, pow))
                .or_insert_with(|| Array2::zeros((dim, dim)));
            e.scaled_add(c, &lm);
        }
    }
    out
}

fn integrate_sym(w: SymMatrix, base: f64, eval_time: f64, dim: usize) -> SymMatrix {
    let mut out: SymMatrix = HashMap::new();
    for ((freq, pow), mat) in w {
        for (f2, p2, c) in
            super::dyson::integrate_monomial_pub(freq, pow, C64::new(1.0, 0.0), base, eval_time)
        {
            let e = out.entry((f2, p2)).or_insert_with(|| Array2::zeros((dim, dim)));
            e.scaled_add(c, &mat);
        }
    }
    out
}

fn eval_sym(w: &SymMatrix, base: f64, t: f64, dim: usize) -> Array2<C64> {
    let mut out: Array2<C64> = Array2::zeros((dim, dim));
    for (&(freq, pow), mat) in w {
        let c = t.powi(pow as i32) * (-C64::i() * freq as f64 * base * t).exp();
        out.scaled_add(c, mat);
    }
    out
}

/// The ordering-summed time-ordered Dyson value of exactly the multiset `V`:
/// `sum_{orderings} int_simplex prod J * (bra| L ... L |init)`, normalized by
/// the measured-qubit zeroth factors. Dense on the full register (validation
/// scale only).
pub struct ClusterDyson {
    drive: TimeDependentHamiltonian,
    n: usize,
    t: f64,
    /// per sub-multiset (keyed by multiplicity vector) the symbolic DP state
    states: HashMap<Vec<usize>, SymMatrix>,
    parts: Vec<usize>,
    max_mult: Vec<usize>,
}

impl ClusterDyson {
    pub fn new(
        drive: &TimeDependentHamiltonian,
        n: usize,
        cluster: &Cluster,
        init_ket: u64,
        init_bra: u64,
        t: f64,
    ) -> Self {
        let dim = 1usize << n;
        let parts: Vec<usize> = cluster.parts.iter().map(|&(t, _)| t).collect();
        let max_mult: Vec<usize> = cluster.parts.iter().map(|&(_, m)| m).collect();
        let mut states: HashMap<Vec<usize>, SymMatrix> = HashMap::new();
        let mut w0: SymMatrix = HashMap::new();
        let mut m0: Array2<C64> = Array2::zeros((dim, dim));
        m0[(init_ket as usize, init_bra as usize)] = C64::new(1.0, 0.0);
        w0.insert((0, 0), m0);
        states.insert(vec![0; parts.len()], w0);
        // fill sub-multisets in order of total size
        let total: usize = max_mult.iter().sum();
        for size in 1..=total {
            for mult in multiplicity_vectors(&max_mult, size) {
                let mut acc: SymMatrix = HashMap::new();
                for (i, &term) in parts.iter().enumerate() {
                    if mult[i] == 0 {
                        continue;
                    }
                    let mut sub = mult.clone();
                    sub[i] -= 1;
                    let prev = states.get(&sub).expect("smaller sub-multiset built");
                    let applied = apply_drive_term(drive, term, prev, dim);
                    for (k, v) in integrate_sym(applied, drive.base_freq(), t, dim) {
                        let e = acc.entry(k).or_insert_with(|| Array2::zeros((dim, dim)));
                        *e += &v;
                    }
                }
                states.insert(mult, acc);
            }
        }
        Self { drive: drive.clone(), n, t, states, parts: parts.clone(), max_mult }
    }

    /// Contract the full-multiset state (or any sub-multiset) against the bra
    /// defined by measured kets and an optional insertion at the target,
    /// normalized by the measured zeroth factors on the initial ket-bra.
    pub fn value(
        &self,
        mult: &[usize],
        measured: &[MeasuredQubit],
        target: usize,
        insertion: Option<&Array2<C64>>,
        init_ket: u64,
        init_bra: u64,
    ) -> C64 {
        let dim = 1usize << self.n;
        let w = self.states.get(mult).expect("sub-multiset exists");
        let mat = eval_sym(w, self.drive.base_freq(), self.t, dim);
        // product bra: per qubit measured/target/free (touched handling is
        // not needed densely; free qubits trace, and the "cancelled" factor
        // shows up through the normalization below)
        let mut acc = C64::new(0.0, 0.0);
        for k in 0..dim as u64 {
            for b in 0..dim as u64 {
                let c = mat[(k as usize, b as usize)];
                if c.norm() < 1e-300 {
                    continue;
                }
                let mut f = C64::new(1.0, 0.0);
                for q in 0..self.n {
                    let kq = ((k >> q) & 1) as usize;
                    let bq = ((b >> q) & 1) as usize;
                    if let Some((_, e)) = measured.iter().find(|&&(mq, _)| mq == q) {
                        f *= e[kq].conj() * e[bq];
                    } else if q == target {
                        if let Some(a) = insertion {
                            f *= a[(bq, kq)];
                        } else if kq != bq {
                            f = C64::new(0.0, 0.0);
                        }
                    } else {
                        // free qubit: trace, but untouched qubits must cancel
                        // against the denominator; densely this shows up as
                        // the initial ket-bra's trace, handled by treating
                        // diagonal as 1 and off-diagonal as 0 *relative to the
                        // initial pattern*:
                        let ik = ((init_ket >> q) & 1) as usize;
                        let ib = ((init_bra >> q) & 1) as usize;
                        if kq == ik && bq == ib {
                            // unchanged from the initial pattern: cancelled -> 1
                        } else if kq != bq {
                            f = C64::new(0.0, 0.0);
                        }
                        // changed but diagonal: traced -> 1
                    }
                    if f.norm() == 0.0 {
                        break;
                    }
                }
                acc += c * f;
            }
        }
        let mut norm = C64::new(1.0, 0.0);
        for &(q, e) in measured {
            let ik = ((init_ket >> q) & 1) as usize;
            let ib = ((init_bra >> q) & 1) as usize;
            norm *= e[ik].conj() * e[ib];
        }
        acc / norm
    }

    pub fn full_multiplicity(&self) -> Vec<usize> {
        self.max_mult.clone()
    }

    pub fn parts(&self) -> &[usize] {
        &self.parts
    }
}

/// All multiplicity vectors `0 <= v_i <= max_i` with the given total.
pub fn multiplicity_vectors(max: &[usize], total: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut cur = vec![0; max.len()];
    fn rec(max: &[usize], idx: usize, left: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if idx == max.len() {
            if left == 0 {
                out.push(cur.clone());
            }
            return;
        }
        for v in 0..=max[idx].min(left) {
            cur[idx] = v;
            rec(max, idx + 1, left - v, cur, out);
        }
        cur[idx] = 0;
    }
    rec(max, 0, total, &mut cur, &mut out);
    out
}

/// Moebius inversion on the multiset lattice: log-coefficients `g_W` from the
/// Dyson coefficients `n_W` (with insertion) and `c_W` (without), via
/// `n_W = sum_{U subseteq W} g_U c_{W - U}`.
#[allow(clippy::too_many_arguments)]
pub fn moebius_log_coefficients(
    drive: &TimeDependentHamiltonian,
    n_qubits: usize,
    cluster: &Cluster,
    measured: &[MeasuredQubit],
    target: usize,
    insertion: &Array2<C64>,
    init: (u64, u64),
    t: f64,
) -> Result<HashMap<Vec<usize>, C64>> {
    let dyson = ClusterDyson::new(drive, n_qubits, cluster, init.0, init.1, t);
    let max = dyson.full_multiplicity();
    let total: usize = max.iter().sum();
    let mut c_vals: HashMap<Vec<usize>, C64> = HashMap::new();
    let mut n_vals: HashMap<Vec<usize>, C64> = HashMap::new();
    for size in 0..=total {
        for mult in multiplicity_vectors(&max, size) {
            let c = dyson.value(&mult, measured, target, None, init.0, init.1);
            let nv = dyson.value(&mult, measured, target, Some(insertion), init.0, init.1);
            c_vals.insert(mult.clone(), c);
            n_vals.insert(mult, nv);
        }
    }
    // recursion in order of size
    let mut g: HashMap<Vec<usize>, C64> = HashMap::new();
    for size in 0..=total {
        for mult in multiplicity_vectors(&max, size) {
            let mut v = n_vals[&mult];
            // subtract g_U * c_{W-U} over proper sub-multisets U
            for usize_total in 0..size {
                for u in multiplicity_vectors(&mult, usize_total) {
                    let rest: Vec<usize> = mult.iter().zip(u.iter()).map(|(m, uu)| m - uu).collect();
                    v -= g[&u] * c_vals[&rest];
                }
            }
            g.insert(mult, v);
        }
    }
    Ok(g)
}
