//! Degree-tracked symbolic Dyson expansion in operator space.
//!
//! Operators reachable from a product ket-bra under nested commutators with
//! Pauli strings stay sums of basis ket-bras, so the order-m time-ordered
//! Dyson term is held exactly as a sparse map
//! `(ket, bra, touched, freq, pow) -> coeff`, where each entry stands for
//! `coeff * s^pow * e^{-i freq B s} |ket><bra|` and `touched` is the union of
//! the supports of the terms applied so far. Time-ordered simplex integrals
//! over the shared Fourier components are evaluated in closed form, with a
//! series branch below `|freq * t| < 1e-6` where the closed form would divide
//! by a near-vanishing frequency sum.

use std::collections::HashMap;

use ndarray::Array2;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::pauli_graph::TimeDependentHamiltonian;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct EntryKey {
    ket: u32,
    bra: u32,
    touched: u32,
    freq: i64,
    pow: u8,
}

type SymVector = HashMap<EntryKey, C64>;

/// A drive term restricted to the ball, in ball-local bit masks.
struct BallTerm {
    flip: u32,
    zmask: u32,
    y_phase: C64,
    support: u32,
    fourier: Vec<(i64, C64)>,
}

impl BallTerm {
    /// `H_a |bits> = amp |bits ^ flip>`
    fn amp_on(&self, bits: u32) -> C64 {
        let sign = if ((bits & self.zmask).count_ones() & 1) == 1 { -1.0 } else { 1.0 };
        self.y_phase * sign
    }
}

/// The per-order symbolic Dyson vectors for one initial product ket-bra on a
/// qubit ball, reusable across measurement prefixes (which only enter at
/// contraction time).
pub struct DysonExpansion {
    ball: Vec<usize>,
    orders: Vec<SymVector>,
    base_freq: f64,
    init_ket: u32,
    init_bra: u32,
}

impl DysonExpansion {
    /// Builds orders 0..=max_order of the expansion for the given drive,
    /// restricted to the terms supported on `ball` (global qubit indices,
    /// sorted). `init` gives the initial per-qubit ket-bra `|k><b|` bits.
    pub fn build(
        drive: &TimeDependentHamiltonian,
        ball: Vec<usize>,
        init: impl Fn(usize) -> (bool, bool),
        max_order: usize,
        eval_time: f64,
    ) -> Result<Self> {
        if ball.len() > 28 {
            return Err(Error::Resource(format!(
                "cluster ball of {} qubits is too large",
                ball.len()
            )));
        }
        let local_of = |q: usize| ball.binary_search(&q).ok();
        let mut terms = Vec::new();
        for dt in drive.terms() {
            let mut flip = 0u32;
            let mut zmask = 0u32;
            let mut support = 0u32;
            let mut y_count = 0u32;
            let mut inside = true;
            for &(q, a) in dt.pauli.ops() {
                match local_of(q) {
                    Some(l) => {
                        support |= 1 << l;
                        match a {
                            crate::pauli_graph::Axis::X => flip |= 1 << l,
                            crate::pauli_graph::Axis::Y => {
                                flip |= 1 << l;
                                zmask |= 1 << l;
                                y_count += 1;
                            }
                            crate::pauli_graph::Axis::Z => zmask |= 1 << l,
                        }
                    }
                    None => {
                        inside = false;
                        break;
                    }
                }
            }
            if !inside {
                continue;
            }
            let y_phase = match y_count % 4 {
                0 => C64::new(1.0, 0.0),
                1 => C64::new(0.0, 1.0),
                2 => C64::new(-1.0, 0.0),
                _ => C64::new(0.0, -1.0),
            };
            terms.push(BallTerm { flip, zmask, y_phase, support, fourier: dt.fourier.clone() });
        }
        let mut init_ket = 0u32;
        let mut init_bra = 0u32;
        for (l, &q) in ball.iter().enumerate() {
            let (k, b) = init(q);
            if k {
                init_ket |= 1 << l;
            }
            if b {
                init_bra |= 1 << l;
            }
        }
        let mut w0: SymVector = HashMap::new();
        w0.insert(
            EntryKey { ket: init_ket, bra: init_bra, touched: 0, freq: 0, pow: 0 },
            C64::new(1.0, 0.0),
        );
        let mut orders = vec![w0];
        for _ in 0..max_order {
            let next = dyson_step(orders.last().unwrap(), &terms, drive.base_freq(), eval_time);
            orders.push(next);
        }
        Ok(Self { ball, orders, base_freq: drive.base_freq(), init_ket, init_bra })
    }

    pub fn max_order(&self) -> usize {
        self.orders.len() - 1
    }

    pub fn ball(&self) -> &[usize] {
        &self.ball
    }

    /// Contracts every order against the product bra defined by the measured
    /// qubits (ball-external measured qubits cancel and may be omitted) and an
    /// optional 2x2 insertion at `target`. Measured-qubit factors are
    /// normalized by their value on the initial ket-bra, so the order-0 value
    /// of the no-insertion series is exactly 1.
    pub fn contract(
        &self,
        t: f64,
        measured: &[(usize, [C64; 2])],
        target: usize,
        insertion: Option<&Array2<C64>>,
    ) -> Result<Vec<C64>> {
        // per-ball-qubit role
        #[derive(Clone, Copy)]
        enum Role {
            Free,
            Measured([C64; 2]),
            Target,
        }
        let mut roles = vec![Role::Free; self.ball.len()];
        for &(q, ket) in measured {
            if let Ok(l) = self.ball.binary_search(&q) {
                roles[l] = Role::Measured(ket);
            }
        }
        let target_local = self.ball.binary_search(&target).ok();
        if let Some(l) = target_local {
            if matches!(roles[l], Role::Measured(_)) {
                return Err(Error::Structural("target qubit is already measured".into()));
            }
            roles[l] = Role::Target;
        } else if insertion.is_some() {
            return Err(Error::Structural("insertion target outside the ball".into()));
        }
        // normalization per measured qubit: value on the initial ket-bra
        let mut norm = C64::new(1.0, 0.0);
        for (l, role) in roles.iter().enumerate() {
            if let Role::Measured(e) = role {
                let k = (self.init_ket >> l) & 1;
                let b = (self.init_bra >> l) & 1;
                let f = e[k as usize].conj() * e[b as usize];
                if f.norm() < 1e-14 {
                    return Err(Error::Degenerate(
                        "measured basis orthogonal to the initial local state".into(),
                    ));
                }
                norm *= f;
            }
        }

        let mut series = vec![C64::new(0.0, 0.0); self.orders.len()];
        let mut factor_cache: HashMap<(u32, u32, u32), C64> = HashMap::new();
        for (m, w) in self.orders.iter().enumerate() {
            let mut acc = C64::new(0.0, 0.0);
            for (key, &c) in w {
                let geom = *factor_cache
                    .entry((key.ket, key.bra, key.touched))
                    .or_insert_with(|| {
                        let mut f = C64::new(1.0, 0.0);
                        for (l, role) in roles.iter().enumerate() {
                            let k = ((key.ket >> l) & 1) as usize;
                            let b = ((key.bra >> l) & 1) as usize;
                            match role {
                                Role::Measured(e) => f *= e[k].conj() * e[b],
                                Role::Target => {
                                    if let Some(a) = insertion {
                                        f *= a[(b, k)];
                                    } else {
                                        // denominator: the target is just an
                                        // unmeasured qubit
                                        let touched = (key.touched >> l) & 1 == 1;
                                        if touched && k != b {
                                            f = C64::new(0.0, 0.0);
                                        }
                                    }
                                }
                                Role::Free => {
                                    let touched = (key.touched >> l) & 1 == 1;
                                    if touched && k != b {
                                        f = C64::new(0.0, 0.0);
                                    }
                                    // untouched free qubits cancel against the
                                    // denominator factor (ratio 1), touched
                                    // diagonal ones trace to 1
                                }
                            }
                            if f.norm() == 0.0 {
                                break;
                            }
                        }
                        f
                    });
                if geom.norm() == 0.0 {
                    continue;
                }
                let time = t.powi(key.pow as i32)
                    * (-C64::i() * (key.freq as f64) * self.base_freq * t).exp();
                acc += c * geom * time;
            }
            series[m] = acc / norm;
            factor_cache.clear();
        }
        Ok(series)
    }
}

fn dyson_step(cur: &SymVector, terms: &[BallTerm], base: f64, eval_time: f64) -> SymVector {
    // apply sum_a J_a(u) L_a, then integrate over u in [0, s]
    let mut buffer: SymVector = HashMap::with_capacity(cur.len() * 4);
    for (key, &c) in cur {
        for term in terms {
            let touched = key.touched | term.support;
            // left product: -i H_a |ket><bra|
            let kl = key.ket ^ term.flip;
            let al = -C64::i() * term.amp_on(key.ket) * c;
            // right product: +i |ket><bra| H_a
            let br = key.bra ^ term.flip;
            let ar = C64::i() * term.amp_on(key.bra).conj() * c;
            for &(m, jc) in &term.fourier {
                let e = buffer
                    .entry(EntryKey { ket: kl, bra: key.bra, touched, freq: key.freq + m, pow: key.pow })
                    .or_insert(C64::new(0.0, 0.0));
                *e += al * jc;
                let e = buffer
                    .entry(EntryKey { ket: key.ket, bra: br, touched, freq: key.freq + m, pow: key.pow })
                    .or_insert(C64::new(0.0, 0.0));
                *e += ar * jc;
            }
        }
    }
    let mut next: SymVector = HashMap::with_capacity(buffer.len() * 2);
    for (key, c) in buffer {
        if c.norm() < 1e-300 {
            continue;
        }
        for (freq, pow, coeff) in integrate_monomial(key.freq, key.pow, c, base, eval_time) {
            let e = next
                .entry(EntryKey { ket: key.ket, bra: key.bra, touched: key.touched, freq, pow })
                .or_insert(C64::new(0.0, 0.0));
            *e += coeff;
        }
    }
    // relative prune to bound memory; far below every tolerance in use
    let max = next.values().map(|c| c.norm()).fold(0.0, f64::max);
    if max > 0.0 {
        next.retain(|_, c| c.norm() > 1e-24 * max);
    }
    next
}

/// Closed-form `int_0^s u^pow e^{-i freq B u} du`, emitted as monomials.
pub(crate) fn integrate_monomial_pub(
    freq: i64,
    pow: u8,
    c: C64,
    base: f64,
    eval_time: f64,
) -> Vec<(i64, u8, C64)> {
    integrate_monomial(freq, pow, c, base, eval_time)
}

fn integrate_monomial(
    freq: i64,
    pow: u8,
    c: C64,
    base: f64,
    eval_time: f64,
) -> Vec<(i64, u8, C64)> {
    let alpha = freq as f64 * base;
    let p = pow as usize;
    // The closed form divides by alpha^(q+1); below |alpha t| ~ 0.25 the
    // evaluation would cancel catastrophically for large powers, while the
    // power series in (-i alpha) converges in a few terms. The 1e-6 scale of
    // a genuinely removable singularity is covered by the same branch.
    if (alpha * eval_time).abs() < 0.25 {
        // sum_k (-i alpha)^k / k! * s^{p+k+1} / (p+k+1), truncated when the
        // evaluated contribution (|alpha| t)^k / k! is negligible
        let at = (alpha * eval_time).abs();
        let mut out = Vec::new();
        let mut coef = c;
        let mut rel = 1.0f64;
        for k in 0..=24usize {
            let q = p + k + 1;
            if q > 250 {
                break;
            }
            out.push((0, q as u8, coef / q as f64));
            if rel < 1e-22 {
                break;
            }
            coef *= C64::new(0.0, -alpha) / (k as f64 + 1.0);
            rel *= at / (k as f64 + 1.0);
        }
        return out;
    }
    // antiderivative e^{Au} sum_q g_q u^q with A = -i alpha
    let a = C64::new(0.0, -alpha);
    let mut g = vec![C64::new(0.0, 0.0); p + 1];
    g[p] = 1.0 / a;
    for q in (0..p).rev() {
        g[q] = -((q + 1) as f64) * g[q + 1] / a;
    }
    let mut out = Vec::with_capacity(p + 2);
    for (q, gq) in g.iter().enumerate() {
        out.push((freq, q as u8, c * gq));
    }
    out.push((0, 0, -c * g[0]));
    out
}
