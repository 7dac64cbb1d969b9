//! Scaling studies: run campaigns across register sizes and fit the
//! log-log precision exponent.

use serde::Serialize;

use super::campaign::{run_campaigns, CampaignRow};
use super::config::ExperimentConfig;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Serialize)]
pub struct ScalingStudy {
    pub rows: Vec<CampaignRow>,
    pub exponent: f64,
    /// 95% confidence half-width from the fit residuals
    pub exponent_ci: f64,
}

pub fn scaling_study(config: &ExperimentConfig) -> Result<ScalingStudy> {
    if config.n_list.len() < 3 {
        return Err(Error::Validation("scaling study needs at least 3 register sizes".into()));
    }
    let mut rows = Vec::with_capacity(config.n_list.len());
    for &n in &config.n_list {
        rows.push(run_campaigns(config, n)?);
    }
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.n as f64).ln(), r.delta_omega.max(1e-300).ln()))
        .collect();
    let (slope, ci) = fit_with_ci(&pts);
    Ok(ScalingStudy { rows, exponent: slope, exponent_ci: ci })
}

pub fn fit_with_ci(pts: &[(f64, f64)]) -> (f64, f64) {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return (0.0, f64::INFINITY);
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    if pts.len() <= 2 {
        return (slope, f64::INFINITY);
    }
    let ss_res: f64 = pts
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    let xbar = sx / n;
    let sxx_c: f64 = pts.iter().map(|&(x, _)| (x - xbar) * (x - xbar)).sum();
    let se = (ss_res / (n - 2.0) / sxx_c).sqrt();
    (slope, 2.0 * se)
}

/// R^2 of a linear fit, used by the correlation-decay diagnostics.
pub fn r_squared(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    if pts.len() < 2 {
        return 0.0;
    }
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    let denom = n * sxx - sx * sx;
    if denom.abs() < 1e-300 {
        return 0.0;
    }
    let slope = (n * sxy - sx * sy) / denom;
    let intercept = (sy - slope * sx) / n;
    let ybar = sy / n;
    let ss_tot: f64 = pts.iter().map(|&(_, y)| (y - ybar) * (y - ybar)).sum();
    let ss_res: f64 = pts
        .iter()
        .map(|&(x, y)| {
            let r = y - (intercept + slope * x);
            r * r
        })
        .sum();
    if ss_tot < 1e-300 {
        return 1.0;
    }
    1.0 - ss_res / ss_tot
}
