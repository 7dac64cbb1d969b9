//! Sampler constants: the term-overlap graph data (d, k), the convergence
//! radius t*, and truncation-order bookkeeping.

use crate::error::{Error, Result};
use crate::pauli_graph::TimeDependentHamiltonian;

/// Overlap structure of a drive's terms: adjacency in the term-overlap graph
/// (two terms overlap when they act nontrivially on a shared qubit), the max
/// overlap degree, and the locality k.
#[derive(Debug, Clone)]
pub struct TermOverlapGraph {
    pub adjacency: Vec<Vec<usize>>,
    pub max_overlap_degree: usize,
    pub locality: usize,
}

pub fn term_overlap_graph(h: &TimeDependentHamiltonian) -> TermOverlapGraph {
    let masks: Vec<u64> = h.terms().iter().map(|t| t.pauli.support_mask()).collect();
    let n = masks.len();
    let mut adjacency = vec![Vec::new(); n];
    for i in 0..n {
        for j in (i + 1)..n {
            if masks[i] & masks[j] != 0 {
                adjacency[i].push(j);
                adjacency[j].push(i);
            }
        }
    }
    let max_overlap_degree = adjacency.iter().map(Vec::len).max().unwrap_or(0);
    let locality = h.terms().iter().map(|t| t.pauli.weight()).max().unwrap_or(1);
    TermOverlapGraph { adjacency, max_overlap_degree, locality }
}

/// `t* = [4 e^2 c_m^{-2k} d(d+1) J~]^{-1}`; the single-term limit `d = 0`
/// substitutes `d(d+1) -> 1`.
pub fn t_star(c_m: f64, locality: usize, overlap_degree: usize, j_tilde: f64) -> Result<f64> {
    if !(c_m > 0.0 && c_m <= std::f64::consts::FRAC_1_SQRT_2 + 1e-12) {
        return Err(Error::Domain(format!("c_m must lie in (0, 1/sqrt(2)], got {c_m}")));
    }
    if locality == 0 {
        return Err(Error::Domain("locality k must be >= 1".into()));
    }
    if j_tilde <= 0.0 {
        return Err(Error::Domain("J~ must be positive".into()));
    }
    let d = overlap_degree as f64;
    let dd = if overlap_degree == 0 { 1.0 } else { d * (d + 1.0) };
    let e2 = std::f64::consts::E * std::f64::consts::E;
    Ok(1.0 / (4.0 * e2 * c_m.powi(-2 * locality as i32) * dd * j_tilde))
}

/// All constants the expansion needs, with `t_star` derived exactly.
#[derive(Debug, Clone)]
pub struct SamplerParams {
    pub c_m: f64,
    pub locality: usize,
    pub overlap_degree: usize,
    pub j_tilde: f64,
    pub t_star: f64,
    pub truncation_order: usize,
    /// Allow evaluation at t >= t_star for diagnostics.
    pub allow_beyond_t_star: bool,
}

impl SamplerParams {
    pub fn for_drive(
        h: &TimeDependentHamiltonian,
        c_m: f64,
        truncation_order: usize,
    ) -> Result<Self> {
        if h.terms().is_empty() {
            // free evolution: the expansion terminates at order zero
            return Ok(Self {
                c_m,
                locality: 1,
                overlap_degree: 0,
                j_tilde: 0.0,
                t_star: f64::INFINITY,
                truncation_order,
                allow_beyond_t_star: false,
            });
        }
        let og = term_overlap_graph(h);
        let ts = t_star(c_m, og.locality, og.max_overlap_degree, h.j_tilde())?;
        Ok(Self {
            c_m,
            locality: og.locality,
            overlap_degree: og.max_overlap_degree,
            j_tilde: h.j_tilde(),
            t_star: ts,
            truncation_order,
            allow_beyond_t_star: false,
        })
    }

    pub fn with_order(mut self, order: usize) -> Self {
        self.truncation_order = order;
        self
    }

    pub fn allowing_beyond_t_star(mut self) -> Self {
        self.allow_beyond_t_star = true;
        self
    }

    /// Smallest truncation order M with `M (t/t*)^{M+1} / (1 - t/t*) <= tol`.
    pub fn order_for_tolerance(&self, t: f64, tol: f64) -> usize {
        let x = (t / self.t_star).abs();
        if x >= 1.0 {
            return 32; // beyond the certified radius; capped
        }
        for m in 1..=32 {
            if (m as f64) * x.powi(m as i32 + 1) / (1.0 - x) <= tol {
                return m;
            }
        }
        32
    }

    /// Certified tail bound `sum_{m > M} m (t/t*)^m`.
    pub fn tail_certificate(&self, t: f64, order: usize) -> f64 {
        let x = (t / self.t_star).abs();
        if x >= 1.0 {
            return f64::INFINITY;
        }
        let m = order as f64;
        x.powi(order as i32 + 1) * ((m + 1.0) - m * x) / ((1.0 - x) * (1.0 - x))
    }
}
