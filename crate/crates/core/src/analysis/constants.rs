//! Extremal moments and the two phase-transition exponents.

use std::f64::consts::E;

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::specialfn::{gaussian_abs_moment, ln_gamma};

/// `𝔼|𝓔 − 𝓔′|^p = Γ(p+1)`, the Laplace absolute moment.
pub fn laplace_abs_moment(p: f64) -> Result<f64> {
    if !(p > -1.0) || !p.is_finite() {
        return domain(format!("Laplace moments need p > -1, got {p}"));
    }
    Ok(ln_gamma(p + 1.0).exp())
}

/// `𝔼|𝓔 − 1|^p = e^{−1}(Γ(p+1) + Σ_{k≥0} 1/(k!(p+k+1)))`.
///
/// The Gamma term is the part above 1; the series is `∫_0^1 u^p e^{u} du`.
pub fn centered_exp_abs_moment(p: f64) -> Result<f64> {
    if !(p > -1.0) || !p.is_finite() {
        return domain(format!("centered moments need p > -1, got {p}"));
    }
    let mut sum = 0.0;
    let mut inv_fact = 1.0;
    let mut k = 0.0;
    loop {
        let term = inv_fact / (p + k + 1.0);
        sum += term;
        if term < 1e-16 * sum {
            break;
        }
        k += 1.0;
        inv_fact /= k;
    }
    Ok((ln_gamma(p + 1.0).exp() + sum) / E)
}

/// Scale with `‖κ(𝓔 − 1)‖₁ = 1`, i.e. `1/𝔼|𝓔 − 1| = e/2`.
pub fn kappa() -> f64 {
    E / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootResult {
    pub value: f64,
    pub bracket: (f64, f64),
    pub residual: f64,
    pub iterations: usize,
}

/// Brent's method (inverse quadratic interpolation guarded by bisection).
pub fn brent<F: FnMut(f64) -> f64>(mut f: F, lo: f64, hi: f64, tol: f64, max_iter: usize) -> Result<RootResult> {
    let (mut a, mut b) = (lo, hi);
    let (mut fa, mut fb) = (f(a), f(b));
    if !(fa * fb <= 0.0) {
        return Err(Error::NoSignChange { lo, hi, f_lo: fa, f_hi: fb });
    }
    if fa.abs() < fb.abs() {
        std::mem::swap(&mut a, &mut b);
        std::mem::swap(&mut fa, &mut fb);
    }
    let (mut c, mut fc) = (a, fa);
    let mut d = b - a;
    let mut bisected = true;
    for iter in 1..=max_iter {
        if fb == 0.0 || (b - a).abs() < tol {
            return Ok(RootResult { value: b, bracket: (lo, hi), residual: fb.abs(), iterations: iter });
        }
        let mut s = if fa != fc && fb != fc {
            a * fb * fc / ((fa - fb) * (fa - fc)) + b * fa * fc / ((fb - fa) * (fb - fc)) + c * fa * fb / ((fc - fa) * (fc - fb))
        } else {
            b - fb * (b - a) / (fb - fa)
        };
        let q = (3.0 * a + b) / 4.0;
        let outside = !((s > q.min(b)) && (s < q.max(b)));
        let slow = if bisected { (s - b).abs() >= (b - c).abs() / 2.0 } else { (s - b).abs() >= (c - d).abs() / 2.0 };
        let tiny = if bisected { (b - c).abs() < tol } else { (c - d).abs() < tol };
        bisected = outside || slow || tiny;
        if bisected {
            s = 0.5 * (a + b);
        }
        let fs = f(s);
        d = c;
        c = b;
        fc = fb;
        if fa * fs < 0.0 {
            b = s;
            fb = fs;
        } else {
            a = s;
            fa = fs;
        }
        if fa.abs() < fb.abs() {
            std::mem::swap(&mut a, &mut b);
            std::mem::swap(&mut fa, &mut fb);
        }
    }
    Err(Error::NonConvergence { value: b, error: (b - a).abs() })
}

/// `ln Γ(p+1)/p − ln(κ 𝔼|𝓔−1|^p)^{1/p}`: Laplace against the centered exponential.
fn pstar_gap(p: f64) -> f64 {
    ln_gamma(p + 1.0) / p - kappa().ln() - centered_exp_abs_moment(p).map_or(f64::NAN, f64::ln) / p
}

/// `ln ‖𝓔 − 1‖_p − ln ‖G‖_p`.
fn p0_gap(p: f64) -> f64 {
    let c = centered_exp_abs_moment(p).map_or(f64::NAN, f64::ln);
    let g = gaussian_abs_moment(p).map_or(f64::NAN, f64::ln);
    (c - g) / p
}

/// Exponent above which `κ(𝓔−1)` overtakes the Laplace law, on `[2, 4]`.
pub fn solve_pstar() -> Result<RootResult> {
    solve_pstar_in(2.0, 4.0)
}

pub fn solve_pstar_in(lo: f64, hi: f64) -> Result<RootResult> {
    brent(pstar_gap, lo, hi, 1e-13, 200)
}

/// Negative exponent where `𝓔 − 1` and the Gaussian have equal `L_p` norms.
pub fn solve_p0() -> Result<RootResult> {
    solve_p0_in(-0.99, -0.01)
}

pub fn solve_p0_in(lo: f64, hi: f64) -> Result<RootResult> {
    brent(p0_gap, lo, hi, 1e-13, 200)
}
