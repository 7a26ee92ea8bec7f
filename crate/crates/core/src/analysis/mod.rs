//! Verification suites for the moment inequalities, the constant solvers,
//! the constrained minimizer and the exploratory probes.

pub mod constants;
pub mod minimize;
pub mod probes;
pub mod reproduce;
pub mod suites;

use rand::Rng;
use serde::Serialize;
use serde_json::Value;

pub use constants::{
    centered_exp_abs_moment, kappa, laplace_abs_moment, solve_p0, solve_p0_in, solve_pstar, solve_pstar_in,
    RootResult,
};
pub use minimize::{crux_residual, gradient, minimize_sphere, MinimizerResult};
pub use reproduce::{reproduce, run_criterion, CriterionResult, ReproduceReport};
pub use probes::{logconvexity_probe, tang_density_check, LogConvexityReport, TangReport};
pub use suites::{
    balanced_ratio, verify_all_equal, verify_claim, verify_gamma_extension, verify_hunter_exact, verify_mrtt,
    verify_stepii_bound, verify_theorem1,
};

/// A single failed comparison.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    /// Model literal, or the vector for non-model suites.
    pub model: String,
    pub p: f64,
    pub lhs: f64,
    pub rhs: f64,
    /// Allowed shortfall before `lhs < rhs` counts.
    pub budget: f64,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub params: Value,
    pub trials: usize,
    pub violations: Vec<Violation>,
    /// Named quantities worth reporting that are not pass/fail by themselves.
    pub observations: Vec<(String, f64)>,
    pub notes: Vec<String>,
    pub pass: bool,
}

impl VerificationReport {
    pub(crate) fn new(suite: &str, params: Value, trials: usize, violations: Vec<Violation>) -> Self {
        let pass = violations.is_empty();
        VerificationReport {
            suite: suite.to_string(),
            params,
            trials,
            violations,
            observations: Vec::new(),
            notes: Vec::new(),
            pass,
        }
    }
}

/// `n` weights in `[−1, 1]`, each at least `0.05` in size, with same-sign
/// pairs at least 2% apart relative to the larger one.
pub(crate) fn random_weights<R: Rng>(rng: &mut R, n: usize, signed: bool) -> Vec<f64> {
    'draw: loop {
        let w: Vec<f64> = (0..n)
            .map(|_| {
                let v = 0.05 + 0.95 * rng.random::<f64>();
                if signed && rng.random::<bool>() {
                    -v
                } else {
                    v
                }
            })
            .collect();
        for (i, a) in w.iter().enumerate() {
            for b in &w[i + 1..] {
                if a * b > 0.0 && (a - b).abs() < 0.02 * a.abs().max(b.abs()) {
                    continue 'draw;
                }
            }
        }
        return w;
    }
}

pub(crate) fn literal(x: &[f64]) -> String {
    x.iter().map(|v| format!("{v}")).collect::<Vec<_>>().join(",")
}
