//! Majorization on `ℝ₊ⁿ` and the moment function
//! `M_p(x) = 𝔼(Σ √x_j 𝓔_j)^p` whose Schur-monotonicity is studied here.

pub mod failure;
pub mod qk;
pub mod scan;

use serde::Serialize;

use crate::engines::{moment_with, EngineConfig, MomentEstimate};
use crate::error::{domain, Result};
use crate::model::{GammaSumModel, MomentQuery};

pub use failure::{failure_profile, FailureProfile};
pub use qk::{
    c_p_constant, claim_inequality_check, f_k, f_k_mc, mp_representation_check, ostrowski_differential, q_k,
};
pub use scan::{schur_scan, ScanReport, ScanRow, Verdict};

/// `x ≻ y`: equal totals and dominating sorted partial sums, both up to `tol`.
pub fn majorizes(x: &[f64], y: &[f64], tol: f64) -> bool {
    if x.len() != y.len() {
        return false;
    }
    let sorted = |v: &[f64]| {
        let mut s = v.to_vec();
        s.sort_by(|a, b| b.total_cmp(a));
        s
    };
    let (xs, ys) = (sorted(x), sorted(y));
    let (mut px, mut py) = (0.0, 0.0);
    for (a, b) in xs.iter().zip(&ys) {
        px += a;
        py += b;
        if px < py - tol {
            return false;
        }
    }
    (px - py).abs() <= tol
}

/// Ordered pair with `x ≻ y`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MajorizationPair {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl MajorizationPair {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self> {
        if x.iter().chain(&y).any(|v| !(*v >= 0.0) || !v.is_finite()) {
            return domain("majorization pairs live in the nonnegative orthant");
        }
        let tol = 1e-12 * x.iter().sum::<f64>().max(1.0);
        if !majorizes(&x, &y, tol) {
            return domain("x does not majorize y");
        }
        Ok(MajorizationPair { x, y })
    }

    /// `y = T(x)` for the T-transform on coordinates `i`, `j` with weight `lambda`.
    pub fn from_t_transform(x: Vec<f64>, i: usize, j: usize, lambda: f64) -> Result<Self> {
        let y = t_transform(&x, i, j, lambda)?;
        MajorizationPair::new(x, y)
    }
}

/// Replaces `(x_i, x_j)` by `(λx_i + (1−λ)x_j, (1−λ)x_i + λx_j)`.
///
/// The second entry is formed as `x_i + x_j − first` so the pair sum is kept
/// to within one rounding.
pub fn t_transform(x: &[f64], i: usize, j: usize, lambda: f64) -> Result<Vec<f64>> {
    if i >= x.len() || j >= x.len() || i == j {
        return domain(format!("t_transform needs two distinct indices below {}, got {i} and {j}", x.len()));
    }
    if !(0.0..=1.0).contains(&lambda) {
        return domain(format!("t_transform needs lambda in [0, 1], got {lambda}"));
    }
    let mut y = x.to_vec();
    if lambda == 1.0 {
        return Ok(y);
    }
    let first = lambda * x[i] + (1.0 - lambda) * x[j];
    let second = (x[i] + x[j]) - first;
    let (lo, hi) = (x[i].min(x[j]), x[i].max(x[j]));
    y[i] = first.clamp(lo, hi);
    y[j] = second.clamp(lo, hi);
    Ok(y)
}

/// `M_p(x) = 𝔼(Σ √x_j 𝓔_j)^p` for `x ≥ 0`, `p > −1`.
pub fn m_p(x: &[f64], p: f64) -> Result<MomentEstimate> {
    m_p_with(x, p, &EngineConfig::default())
}

pub fn m_p_with(x: &[f64], p: f64, cfg: &EngineConfig) -> Result<MomentEstimate> {
    if let Some(bad) = x.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return domain(format!("M_p needs nonnegative entries, got {bad}"));
    }
    let model = GammaSumModel::exponential(&x.iter().map(|v| v.sqrt()).collect::<Vec<_>>())?;
    moment_with(&model, &MomentQuery::abs(p)?, None, cfg)
}
