//! The theory layer: quantum Fisher information, the phase function f(omega),
//! SQL/HL precision limits, and the weak-perturbation bounds that every
//! protocol is judged against.

use std::collections::HashMap;
use std::sync::RwLock;

use ndarray::Array1;
use num_complex::Complex64 as C64;

use crate::dense::gauss_legendre_on;
use crate::error::{Error, Result};
use crate::exact_engine::{z_total_dense, HamiltonianOperator, StateVector};
use crate::initial_states::SuperposedPair;
use crate::pauli_graph::PerturbedHamiltonian;

/// Prior knowledge: the "integer part" omega' of omega, with the true value
/// confined to `[omega' - pi/(4Nt), omega' + pi/(4Nt)]`.
#[derive(Debug, Clone, Copy)]
pub struct PriorInterval {
    pub omega_prime: f64,
    pub half_width: f64,
    pub n: usize,
    pub t: f64,
}

impl PriorInterval {
    /// Builds the interval containing the true omega:
    /// `omega' = pi/(2Nt) (floor(2 N omega t / pi) + 1/2)`.
    pub fn containing(omega_true: f64, n: usize, t: f64) -> Result<Self> {
        if n == 0 || t <= 0.0 {
            return Err(Error::Domain("prior interval needs n >= 1 and t > 0".into()));
        }
        let nt = n as f64 * t;
        let omega_prime =
            std::f64::consts::PI / (2.0 * nt) * ((2.0 * nt * omega_true / std::f64::consts::PI).floor() + 0.5);
        let half_width = std::f64::consts::PI / (4.0 * nt);
        let iv = Self { omega_prime, half_width, n, t };
        debug_assert!(iv.contains(omega_true));
        Ok(iv)
    }

    /// An interval centered on a known omega' value.
    pub fn centered(omega_prime: f64, n: usize, t: f64) -> Result<Self> {
        if n == 0 || t <= 0.0 {
            return Err(Error::Domain("prior interval needs n >= 1 and t > 0".into()));
        }
        Ok(Self { omega_prime, half_width: std::f64::consts::PI / (4.0 * n as f64 * t), n, t })
    }

    pub fn contains(&self, omega: f64) -> bool {
        (omega - self.omega_prime).abs() <= self.half_width * (1.0 + 1e-12)
    }

    pub fn lo(&self) -> f64 {
        self.omega_prime - self.half_width
    }

    pub fn hi(&self) -> f64 {
        self.omega_prime + self.half_width
    }
}

/// QFI value together with the two lower bounds it is judged against.
#[derive(Debug, Clone, serde::Serialize)]
pub struct QfiReport {
    pub value: f64,
    /// `4 t^2 N^2 (c_in - Jt)^2`, None outside its validity window `t < c_in/J`.
    pub lower_bound_thm1: Option<f64>,
    /// `4 t^2 N^2 (c'_in - 4Jt)` from the initial ZZ fluctuation.
    pub lower_bound_prop3: f64,
    pub n: usize,
    pub t: f64,
    pub j: f64,
}

/// Applies the time-averaged operator `Zbar = (1/t) int_0^t e^{isH} Z e^{-isH} ds`
/// to a state, evaluating the s-integral by Gauss-Legendre with node doubling
/// until 1e-8 relative convergence.
pub fn z_bar_apply(h: &HamiltonianOperator, psi: &StateVector, t: f64) -> Result<StateVector> {
    if h.hamiltonian().is_diagonal() {
        // [H, Z] = 0: Zbar = Z exactly.
        let n = psi.qubit_count();
        let mut amps = psi.amplitudes().clone();
        for (b, a) in amps.iter_mut().enumerate() {
            *a *= C64::new(n as f64 - 2.0 * (b as u64).count_ones() as f64, 0.0);
        }
        return StateVector::from_amplitudes(amps);
    }
    let eig = h.eigen()?;
    let n = psi.qubit_count();
    let z_eig = eig.operator_to_eigenbasis(&z_total_dense(n));
    let psi_e = eig.to_eigenbasis(psi.amplitudes());
    let quad = |nodes: usize| -> Array1<C64> {
        let (xs, ws) = gauss_legendre_on(nodes, 0.0, t);
        let mut acc: Array1<C64> = Array1::zeros(psi_e.len());
        for (&s, &w) in xs.iter().zip(ws.iter()) {
            // e^{isH} Z e^{-isH} psi in the eigenbasis
            let mut v: Array1<C64> = psi_e
                .iter()
                .zip(eig.vals.iter())
                .map(|(&a, &e)| a * (-C64::i() * e * s).exp())
                .collect();
            v = z_eig.dot(&v);
            for (vi, &e) in v.iter_mut().zip(eig.vals.iter()) {
                *vi *= (C64::i() * e * s).exp() * (w / t);
            }
            acc += &v;
        }
        acc
    };
    let mut nodes = 16;
    let mut prev = quad(nodes);
    loop {
        nodes *= 2;
        let cur = quad(nodes);
        let diff: f64 = (&cur - &prev).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        let scale: f64 = cur.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt().max(1e-300);
        if diff / scale <= 1e-8 {
            return Ok(StateVector::from_amplitudes(eig.from_eigenbasis(&cur))?);
        }
        if nodes >= 512 {
            return Err(Error::Numerical(format!(
                "Zbar quadrature did not converge at {nodes} nodes (rel {:.2e})",
                diff / scale
            )));
        }
        prev = cur;
    }
}

/// Exact QFI of `e^{-itH}|psi_in>` with respect to omega, through the
/// time-averaged-Z representation of the derivative.
pub fn qfi(psi_in: &StateVector, h: &HamiltonianOperator, t: f64) -> Result<f64> {
    if t == 0.0 {
        return Ok(0.0);
    }
    let zb = z_bar_apply(h, psi_in, t)?;
    let mean = psi_in.inner(&zb).re;
    let second: f64 = zb.amplitudes().iter().map(|z| z.norm_sqr()).sum();
    Ok(4.0 * t * t * (second - mean * mean))
}

/// ZZ-fluctuation constant `c'_in` of a state: `(<Z^2> - <Z>^2) / N^2`.
pub fn zz_fluctuation_constant(psi: &StateVector) -> f64 {
    let n = psi.qubit_count() as f64;
    let mut z1 = 0.0;
    let mut z2 = 0.0;
    for (b, a) in psi.amplitudes().iter().enumerate() {
        let z = n - 2.0 * (b as u64).count_ones() as f64;
        let p = a.norm_sqr();
        z1 += p * z;
        z2 += p * z * z;
    }
    (z2 - z1 * z1) / (n * n)
}

/// `4 t^2 N^2 (c_in - Jt)^2`, valid for `t < c_in / J`.
pub fn qfi_lower_bound_thm1(c_in: f64, j: f64, t: f64, n: usize) -> Result<f64> {
    if j > 0.0 && t >= c_in / j {
        return Err(Error::Domain(format!(
            "bound needs t < c_in/J = {:.4}, got t = {t}",
            c_in / j
        )));
    }
    let nt = n as f64 * t;
    Ok(4.0 * nt * nt * (c_in - j * t).powi(2))
}

/// `4 t^2 N^2 (c'_in - 4Jt)`; negative values are returned as-is.
pub fn qfi_lower_bound_prop3(c_prime_in: f64, j: f64, t: f64, n: usize) -> f64 {
    let nt = n as f64 * t;
    4.0 * nt * nt * (c_prime_in - 4.0 * j * t)
}

/// Full report for a GHZ-like pair evolving under `h` for time `t`.
pub fn qfi_report(pair: &SuperposedPair, h: &HamiltonianOperator, t: f64) -> Result<QfiReport> {
    let psi = pair.combined();
    let value = qfi(&psi, h, t)?;
    let n = pair.qubit_count();
    let j = h.hamiltonian().local_strength();
    let lower_bound_thm1 = qfi_lower_bound_thm1(pair.c_in, j, t, n).ok();
    let c_prime = zz_fluctuation_constant(&psi);
    let lower_bound_prop3 = qfi_lower_bound_prop3(c_prime, j, t, n);
    Ok(QfiReport { value, lower_bound_thm1, lower_bound_prop3, n, t, j })
}

/// `{sql, hl}` reference precisions.
#[derive(Debug, Clone, Copy, serde::Serialize)]
pub struct PrecisionLimits {
    pub sql: f64,
    pub hl: f64,
}

pub fn precision_limits(n: usize, m: usize, t: f64) -> PrecisionLimits {
    let (nf, mf) = (n as f64, m as f64);
    PrecisionLimits {
        sql: 1.0 / (mf * nf * t * t).sqrt(),
        hl: 1.0 / (4.0 * mf * nf * nf * t * t).sqrt(),
    }
}

/// Weak-perturbation regime (`2J < c_in omega`): the phase-rate lower bound
/// `c_omega >= t (c_in - 2J/omega)` and the slope interval for f.
pub fn weak_perturbation_slope_bound(
    c_in: f64,
    j: f64,
    omega: f64,
    t: f64,
    n: usize,
) -> Result<(f64, (f64, f64))> {
    if 2.0 * j >= c_in * omega {
        return Err(Error::Domain(format!(
            "weak-perturbation bound needs 2J < c_in * omega (2J = {}, c_in*omega = {})",
            2.0 * j,
            c_in * omega
        )));
    }
    let reduced = c_in - 2.0 * j / omega;
    let c_omega_lb = t * reduced;
    let nf = n as f64;
    Ok((c_omega_lb, (2.0 * reduced * t * nf, 2.0 * t * nf)))
}

/// Prethermalization time `J^{-1} exp(c_pre omega / J)`; the constant `c_pre`
/// is configuration input, not a claim.
pub fn prethermal_time(j: f64, omega: f64, c_pre: f64) -> Result<f64> {
    if j <= 0.0 {
        return Err(Error::Domain("prethermal time needs J > 0".into()));
    }
    Ok((c_pre * omega / j).exp() / j)
}

/// The phase function `f: I_{omega'} -> [-pi/2, pi/2]` with
/// `f(omega~) = int_{omega'}^{omega~} dw'' int_0^t ds [<Z(s)>_0 - <Z(s)>_1]`,
/// evaluated by nested Gauss-Legendre on the exact engine. Evaluations are
/// cached behind a read-mostly map (bisection readout re-queries points).
pub struct PhaseFunction {
    base: PerturbedHamiltonian,
    pair: SuperposedPair,
    pub prior: PriorInterval,
    nodes_omega: usize,
    nodes_s: usize,
    cache: RwLock<HashMap<u64, f64>>,
}

impl PhaseFunction {
    pub fn new(base: &PerturbedHamiltonian, pair: &SuperposedPair, prior: PriorInterval) -> Self {
        Self {
            base: base.clone(),
            pair: pair.clone(),
            prior,
            nodes_omega: 16,
            nodes_s: 16,
            cache: RwLock::new(HashMap::new()),
        }
    }

    pub fn with_nodes(mut self, nodes_omega: usize, nodes_s: usize) -> Self {
        self.nodes_omega = nodes_omega;
        self.nodes_s = nodes_s;
        self
    }

    /// Integrand of the outer integral: `t <Zbar>_0 - t <Zbar>_1` at omega''.
    /// This is also the slope `d f / d omega` at that point.
    pub fn slope_at(&self, omega: f64) -> Result<f64> {
        let h = HamiltonianOperator::new(self.base.with_omega(omega));
        let t = self.prior.t;
        let (xs, ws) = gauss_legendre_on(self.nodes_s, 0.0, t);
        let mut acc = 0.0;
        for (&s, &w) in xs.iter().zip(ws.iter()) {
            let z0 = h.evolve(&self.pair.branch0, s)?.z_total_expectation();
            let z1 = h.evolve(&self.pair.branch1, s)?.z_total_expectation();
            acc += w * (z0 - z1);
        }
        Ok(acc)
    }

    pub fn eval(&self, omega_tilde: f64) -> Result<f64> {
        if !self.prior.contains(omega_tilde) {
            return Err(Error::Domain(format!(
                "omega~ = {omega_tilde} outside the prior interval [{}, {}]",
                self.prior.lo(),
                self.prior.hi()
            )));
        }
        let key = omega_tilde.to_bits();
        if let Some(&v) = self.cache.read().expect("phase cache poisoned").get(&key) {
            return Ok(v);
        }
        let (lo, hi) = (self.prior.omega_prime.min(omega_tilde), self.prior.omega_prime.max(omega_tilde));
        let sign = if omega_tilde >= self.prior.omega_prime { 1.0 } else { -1.0 };
        let (xs, ws) = gauss_legendre_on(self.nodes_omega, lo, hi);
        let mut f = 0.0;
        for (&om, &w) in xs.iter().zip(ws.iter()) {
            f += w * self.slope_at(om)?;
        }
        f *= sign;
        let tol = 1e-6;
        if !(-std::f64::consts::FRAC_PI_2 - tol..=std::f64::consts::FRAC_PI_2 + tol).contains(&f) {
            return Err(Error::Numerical(format!(
                "phase function escaped its range: f({omega_tilde}) = {f}"
            )));
        }
        self.cache.write().expect("phase cache poisoned").insert(key, f);
        Ok(f)
    }

    /// Doubles both node counts and re-evaluates, as a convergence check.
    pub fn eval_refined(&self, omega_tilde: f64) -> Result<f64> {
        let refined = PhaseFunction {
            base: self.base.clone(),
            pair: self.pair.clone(),
            prior: self.prior,
            nodes_omega: self.nodes_omega * 2,
            nodes_s: self.nodes_s * 2,
            cache: RwLock::new(HashMap::new()),
        };
        refined.eval(omega_tilde)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::initial_states::make_ghz;
    use crate::pauli_graph::{build_graph, ising_chain, GraphKind};

    fn free_field(n: usize, w: f64) -> HamiltonianOperator {
        let g = build_graph(&GraphKind::Chain { n }).unwrap();
        HamiltonianOperator::new(PerturbedHamiltonian::new(g, vec![], w).unwrap())
    }

    #[test]
    fn prior_interval_centers_on_half_integer() {
        let (n, t, w) = (4, 1.0, 1.234);
        let iv = PriorInterval::containing(w, n, t).unwrap();
        assert!(iv.contains(w));
        // 2N omega' t is an odd multiple of pi/2
        let phase = 2.0 * n as f64 * iv.omega_prime * t / std::f64::consts::FRAC_PI_2;
        assert!((phase - phase.round()).abs() < 1e-10);
        assert_eq!(phase.round() as i64 % 2, 1);
        assert!((iv.half_width - std::f64::consts::PI / 16.0).abs() < 1e-12);
    }

    #[test]
    fn qfi_ghz_free_field_is_heisenberg() {
        for n in [2usize, 4, 6] {
            let t = 0.8;
            let h = free_field(n, 0.9);
            let pair = make_ghz(n).unwrap();
            let f = qfi(&pair.combined(), &h, t).unwrap();
            let expect = 4.0 * (n as f64 * t).powi(2);
            assert!((f - expect).abs() <= 1e-6 * expect, "n={n}: {f} vs {expect}");
        }
    }

    #[test]
    fn qfi_product_plus_state_is_sql() {
        let n = 5;
        let t = 0.6;
        let h = free_field(n, 1.1);
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        let plus = StateVector::product(&vec![[s, s]; n]);
        let f = qfi(&plus, &h, t).unwrap();
        let expect = 4.0 * n as f64 * t * t;
        assert!((f - expect).abs() <= 1e-8 * expect);
    }

    #[test]
    fn qfi_zero_time() {
        let h = free_field(3, 1.0);
        let pair = make_ghz(3).unwrap();
        assert_eq!(qfi(&pair.combined(), &h, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn qfi_matches_finite_difference_oracle_with_interaction() {
        // central-difference oracle on |psi_omega> at N = 4
        let n = 4;
        let t = 0.3;
        let h = ising_chain(n, 0.25, 1.0).unwrap();
        let pair = make_ghz(n).unwrap();
        let psi_in = pair.combined();
        let f = qfi(&psi_in, &HamiltonianOperator::new(h.clone()), t).unwrap();

        let dw = 1e-5;
        let plus = HamiltonianOperator::new(h.with_omega(h.omega() + dw))
            .evolve(&psi_in, t)
            .unwrap();
        let minus = HamiltonianOperator::new(h.with_omega(h.omega() - dw))
            .evolve(&psi_in, t)
            .unwrap();
        let center = HamiltonianOperator::new(h.clone()).evolve(&psi_in, t).unwrap();
        let dpsi_amps = (plus.amplitudes() - minus.amplitudes()) / C64::new(2.0 * dw, 0.0);
        let dpsi = StateVector::from_amplitudes(dpsi_amps).unwrap();
        let dd: f64 = dpsi.amplitudes().iter().map(|z| z.norm_sqr()).sum();
        let cross = center.inner(&dpsi);
        let f_fd = 4.0 * (dd - cross.norm_sqr());
        assert!((f - f_fd).abs() <= 1e-4 * f.max(f_fd), "{f} vs {f_fd}");
    }

    #[test]
    fn thm1_bound_values() {
        // J = 0: the bound is exactly 4 t^2 N^2
        let b = qfi_lower_bound_thm1(1.0, 0.0, 0.7, 3).unwrap();
        assert!((b - 4.0 * (3.0 * 0.7f64).powi(2)).abs() < 1e-12);
        // t = c_in/(2J): 4 t^2 N^2 (c_in/2)^2 = t^2 N^2 c_in^2
        let (c, j) = (0.8, 0.5);
        let t = c / (2.0 * j);
        let b = qfi_lower_bound_thm1(c, j, t, 4).unwrap();
        assert!((b - (t * 4.0).powi(2) * c * c).abs() < 1e-12);
        // frozen arithmetic case from direct evaluation
        let b = qfi_lower_bound_thm1(1.0, 0.5, 0.1, 8).unwrap();
        assert!((b - 2.3104).abs() < 1e-12);
        // domain error
        assert!(qfi_lower_bound_thm1(0.5, 1.0, 0.6, 4).is_err());
    }

    #[test]
    fn prop3_bound_values() {
        let pair = make_ghz(4).unwrap();
        let c_prime = zz_fluctuation_constant(&pair.combined());
        assert!((c_prime - 1.0).abs() < 1e-12);
        let b = qfi_lower_bound_prop3(1.0, 0.0, 0.7, 3);
        assert!((b - 4.0 * (3.0 * 0.7f64).powi(2)).abs() < 1e-12);
        let b = qfi_lower_bound_prop3(1.0, 1.0, 0.05, 6);
        assert!((b - 0.288).abs() < 1e-12);
    }

    #[test]
    fn prop3_bound_is_below_exact_qfi_on_ising() {
        let n = 4;
        let t = 0.05;
        let h = ising_chain_local_j(n, 1.0, 1.0);
        let pair = make_ghz(n).unwrap();
        let f = qfi(&pair.combined(), &HamiltonianOperator::new(h.clone()), t).unwrap();
        let b = qfi_lower_bound_prop3(1.0, h.local_strength(), t, n);
        assert!(f >= b - 1e-9, "QFI {f} below Prop-3 bound {b}");
    }

    fn ising_chain_local_j(n: usize, j: f64, omega: f64) -> PerturbedHamiltonian {
        crate::pauli_graph::ising_chain_with_local_strength(n, j, omega).unwrap()
    }

    #[test]
    fn precision_limit_formulas() {
        let p = precision_limits(1, 1, 1.0);
        assert!((p.sql - 1.0).abs() < 1e-15);
        assert!((p.hl - 0.5).abs() < 1e-15);
        // N quadrupled: hl quartered, sql halved
        let a = precision_limits(2, 10, 1.0);
        let b = precision_limits(8, 10, 1.0);
        assert!((a.hl / b.hl - 4.0).abs() < 1e-12);
        assert!((a.sql / b.sql - 2.0).abs() < 1e-12);
        let p = precision_limits(8, 10_000, 1.0);
        assert!((p.hl - 6.25e-4).abs() < 1e-15);
    }

    #[test]
    fn weak_perturbation_bound_cases() {
        let (_c, (lo, hi)) = weak_perturbation_slope_bound(1.0, 0.0, 1.0, 0.7, 5).unwrap();
        assert!((lo - hi).abs() < 1e-12);
        assert!((hi - 2.0 * 0.7 * 5.0).abs() < 1e-12);
        let (_c, (lo, _)) = weak_perturbation_slope_bound(1.0, 0.1, 1.0, 0.7, 5).unwrap();
        assert!((lo - 1.6 * 0.7 * 5.0).abs() < 1e-12);
        assert!(weak_perturbation_slope_bound(1.0, 0.6, 1.0, 0.7, 5).is_err());
    }

    #[test]
    fn prethermal_time_formula() {
        assert!((prethermal_time(2.0, 0.0, 1.0).unwrap() - 0.5).abs() < 1e-15);
        let t = prethermal_time(1.0, 2.0, 1.0).unwrap();
        assert!((t - (2.0f64).exp()).abs() < 1e-12);
        // doubling omega/J squares the exponential factor
        let a = prethermal_time(1.0, 3.0, 1.0).unwrap();
        let b = prethermal_time(1.0, 6.0, 1.0).unwrap();
        assert!((b / a - (3.0f64).exp()).abs() < 1e-9 * (3.0f64).exp());
        assert!(prethermal_time(0.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn phase_function_vanishes_at_anchor_and_is_linear_free() {
        let n = 4;
        let t = 0.8;
        let w_true = 1.07;
        let prior = PriorInterval::containing(w_true, n, t).unwrap();
        let g = build_graph(&GraphKind::Chain { n }).unwrap();
        let base = PerturbedHamiltonian::new(g, vec![], prior.omega_prime).unwrap();
        let pair = make_ghz(n).unwrap();
        let pf = PhaseFunction::new(&base, &pair, prior);
        assert!(pf.eval(prior.omega_prime).unwrap().abs() < 1e-12);
        // V = 0: f = 2 N t (omega - omega')
        for &frac in &[0.3, -0.6, 0.9] {
            let w = prior.omega_prime + frac * prior.half_width;
            let f = pf.eval(w).unwrap();
            let expect = 2.0 * n as f64 * t * frac * prior.half_width;
            assert!((f - expect).abs() < 1e-9, "{f} vs {expect}");
        }
    }

    #[test]
    fn phase_function_slope_within_thm1_interval_on_ising() {
        let n = 6;
        let jt = 0.2;
        let t = 0.2;
        let j = jt / t;
        let w_true = 1.0;
        let prior = PriorInterval::containing(w_true, n, t).unwrap();
        let base = ising_chain_local_j(n, j, prior.omega_prime);
        let pair = make_ghz(n).unwrap();
        let pf = PhaseFunction::new(&base, &pair, prior);
        // finite differences of f on a grid
        let lo_bound = 2.0 * t * (1.0 - jt) * n as f64;
        let hi_bound = 2.0 * t * n as f64;
        let pts = 5;
        let start = prior.omega_prime - prior.half_width * 0.8;
        let mut prev = pf.eval(start).unwrap();
        let step = prior.half_width * 1.6 / (pts - 1) as f64;
        for k in 1..pts {
            let w = start + step * k as f64;
            let cur = pf.eval(w).unwrap();
            let slope = (cur - prev) / step;
            assert!(slope >= lo_bound * 0.98 && slope <= hi_bound * 1.02, "slope {slope} outside [{lo_bound}, {hi_bound}]");
            prev = cur;
        }
        // quadrature convergence: doubling nodes moves f by < 1e-8
        let w = prior.omega_prime + 0.5 * prior.half_width;
        let a = pf.eval(w).unwrap();
        let b = pf.eval_refined(w).unwrap();
        assert!((a - b).abs() < 1e-8);
    }

    #[test]
    fn time_averaged_z_stays_close_to_z() {
        // || Zbar - Z || <= N J t over a (J, t) grid, N = 4, via the vector
        // route on a basis of states
        let n = 4;
        for &j in &[0.2, 0.5] {
            for &t in &[0.1, 0.4] {
                let h = HamiltonianOperator::new(ising_chain_local_j(n, j, 1.0));
                // || (Zbar - Z) ||_2 estimated by the max over basis columns of
                // the column norm is a lower bound; build the full matrix instead.
                let dim = 1usize << n;
                let mut m = ndarray::Array2::<C64>::zeros((dim, dim));
                for col in 0..dim {
                    let e = StateVector::basis_state(n, col as u64);
                    let zb = z_bar_apply(&h, &e, t).unwrap();
                    let z = n as f64 - 2.0 * (col as u64).count_ones() as f64;
                    for r in 0..dim {
                        m[(r, col)] = zb.amplitudes()[r] - if r == col { C64::new(z, 0.0) } else { C64::new(0.0, 0.0) };
                    }
                }
                let norm = crate::dense::operator_norm(&m).unwrap();
                assert!(norm <= n as f64 * j * t + 1e-9, "J={j} t={t}: {norm}");
            }
        }
    }
}
