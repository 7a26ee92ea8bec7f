//! Exploratory checks whose general form is open: log-convexity in `p` of
//! the Gaussian-normalized moments, and the density of centered sums at 0.

use std::f64::consts::E;

use serde::Serialize;

use crate::engines::{density_at, moment};
use crate::error::{domain, Result};
use crate::model::{GammaSumModel, MomentQuery};
use crate::specialfn::gaussian_abs_moment;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogConvexityReport {
    pub x: Vec<f64>,
    pub grid: Vec<f64>,
    /// `log(𝔼|S|^p / 𝔼|G|^p)` on the grid.
    pub log_ratio: Vec<f64>,
    pub second_differences: Vec<f64>,
    /// Weights symmetric under negation; only then is `S` a Gaussian mixture
    /// and log-convexity guaranteed.
    pub symmetric: bool,
    /// `Some(all second differences ≥ −1e−9)` for symmetric inputs, `None` otherwise.
    pub pass: Option<bool>,
}

fn is_symmetric(x: &[f64]) -> bool {
    let scale = x.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut pos: Vec<f64> = x.iter().filter(|v| **v > 0.0).copied().collect();
    let mut neg: Vec<f64> = x.iter().filter(|v| **v < 0.0).map(|v| -v).collect();
    pos.sort_by(f64::total_cmp);
    neg.sort_by(f64::total_cmp);
    pos.len() == neg.len() && pos.iter().zip(&neg).all(|(a, b)| (a - b).abs() <= 1e-12 * scale)
}

/// Second differences of `p ↦ log(𝔼|S_x|^p / 𝔼|G|^p)` on an equally spaced grid.
pub fn logconvexity_probe(x: &[f64], grid: &[f64]) -> Result<LogConvexityReport> {
    if x.iter().sum::<f64>().abs() > 1e-12 {
        return domain("the log-convexity probe needs weights summing to 0");
    }
    if grid.len() < 3 {
        return domain("the grid needs at least three points");
    }
    let model = GammaSumModel::exponential(x)?;
    let log_ratio = grid
        .iter()
        .map(|&p| Ok(moment(&model, &MomentQuery::abs(p)?, None)?.value.ln() - gaussian_abs_moment(p)?.ln()))
        .collect::<Result<Vec<f64>>>()?;
    let second_differences: Vec<f64> = log_ratio.windows(3).map(|w| w[0] - 2.0 * w[1] + w[2]).collect();
    let symmetric = is_symmetric(x);
    let pass = symmetric.then(|| second_differences.iter().all(|d| *d >= -1e-9));
    Ok(LogConvexityReport { x: x.to_vec(), grid: grid.to_vec(), log_ratio, second_differences, symmetric, pass })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TangReport {
    pub x: Vec<f64>,
    /// Density of `Σ x_j(𝓔_j − 1)` at 0.
    pub value: f64,
    /// `1/e`, the value for a single exponential.
    pub reference: f64,
    pub at_least_reference: bool,
}

/// Density of `Σ x_j(𝓔_j − 1)` at 0 for a nonnegative unit vector, compared with `1/e`.
pub fn tang_density_check(x: &[f64]) -> Result<TangReport> {
    if x.iter().any(|v| !(*v >= 0.0)) {
        return domain("the density check needs nonnegative weights");
    }
    let norm2: f64 = x.iter().map(|v| v * v).sum();
    if (norm2 - 1.0).abs() > 1e-9 {
        return domain(format!("the density check needs a unit vector, got squared norm {norm2}"));
    }
    let model = GammaSumModel::exponential(x)?;
    let value = density_at(&model, 0.0, x.iter().sum())?;
    let reference = 1.0 / E;
    Ok(TangReport { x: x.to_vec(), value, reference, at_least_reference: value >= reference * (1.0 - 1e-12) })
}
