//! Binary-search readout: invert `-sin f(omega) = P_hat - P'` on the prior
//! interval using a monotone phase-function oracle.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::metrology::PriorInterval;

#[derive(Debug, Clone, Copy)]
pub struct EstimateOutcome {
    pub omega_est: f64,
    pub oracle_calls: usize,
    /// target fell outside [-1, 1] and was clamped
    pub clamped: bool,
}

/// Bisection solve of `-sin f(omega) = p_hat - p_prime`.
///
/// Terminates when the interval is narrower than `tol` or the oracle matches
/// the target within `stat_tol` (the statistical tolerance, `pi/(2 sqrt(M))`
/// for an M-trial parity estimate). Oracle calls are counted and bounded by
/// `ceil(log2(interval / tol)) + 2`.
pub fn estimate_omega(
    p_hat: f64,
    p_prime: f64,
    f_oracle: impl Fn(f64) -> Result<f64>,
    prior: &PriorInterval,
    tol: f64,
    stat_tol: f64,
) -> Result<EstimateOutcome> {
    if !(-1.0..=1.0).contains(&p_hat) || !(-1.0..=1.0).contains(&p_prime) {
        return Err(Error::Domain("parity estimates must lie in [-1, 1]".into()));
    }
    let raw_target = p_hat - p_prime;
    let clamped = !(-1.0..=1.0).contains(&raw_target);
    if clamped {
        log::warn!("parity difference {raw_target:.4} outside [-1, 1]; clamping");
    }
    let target = raw_target.clamp(-1.0, 1.0);
    // -sin f = target  =>  f = asin(-target), on f's principal range
    let f_target = (-target).asin();
    if f_target.abs() <= stat_tol {
        return Ok(EstimateOutcome { omega_est: prior.omega_prime, oracle_calls: 0, clamped });
    }
    let mut lo = prior.lo();
    let mut hi = prior.hi();
    let mut calls = 0usize;
    let mut seen: BTreeMap<u64, (f64, f64)> = BTreeMap::new();
    let check_monotone = |w: f64, f: f64, seen: &mut BTreeMap<u64, (f64, f64)>| -> Result<()> {
        let key = key_of(w);
        if let Some((_, prev)) = seen.range(..key).next_back().map(|(_, v)| *v) {
            if f < prev - 1e-9 {
                return Err(Error::Numerical(format!(
                    "phase oracle is not monotone near omega = {w}"
                )));
            }
        }
        if let Some((_, next)) = seen.range(key..).next().map(|(_, v)| *v) {
            if f > next + 1e-9 {
                return Err(Error::Numerical(format!(
                    "phase oracle is not monotone near omega = {w}"
                )));
            }
        }
        seen.insert(key, (w, f));
        Ok(())
    };
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let fm = f_oracle(mid)?;
        calls += 1;
        check_monotone(mid, fm, &mut seen)?;
        if (fm - f_target).abs() <= stat_tol {
            return Ok(EstimateOutcome { omega_est: mid, oracle_calls: calls, clamped });
        }
        if fm < f_target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(EstimateOutcome { omega_est: 0.5 * (lo + hi), oracle_calls: calls, clamped })
}

fn key_of(w: f64) -> u64 {
    // monotone map from f64 to u64 for ordered storage
    let bits = w.to_bits();
    if w >= 0.0 {
        bits ^ (1u64 << 63)
    } else {
        !bits
    }
}

/// The bisection call-count bound for a given interval and tolerance.
pub fn max_oracle_calls(interval: f64, tol: f64) -> usize {
    (interval / tol).log2().ceil() as usize + 2
}
