//! Taylor remainders `Q_k`, the constants `C_p`, the averaged remainders
//! `F_k(x) = 𝔼 Q_k(Σ √x_j 𝓔_j)` and the integral representation of `M_p`.

use serde::Serialize;

use super::m_p;
use crate::engines::{montecarlo_mean, Engine, MomentEstimate};
use crate::error::{domain, Result};
use crate::model::GammaSumModel;
use crate::par::ExecMode;
use crate::quadrature::{integrate, QuadratureConfig};

/// `Q_k(t) = (−1)^{k+1}(e^{−t} − Σ_{j≤k} (−t)^j/j!)`, positive for `t > 0`.
///
/// Below `t = k+1` the alternating Taylor tail `Σ_{j>k} (−1)^{k+1+j} t^j/j!` is
/// summed instead, since the direct formula cancels to nothing there.
pub fn q_k(k: u32, t: f64) -> Result<f64> {
    if !(t > 0.0) || !t.is_finite() {
        return domain(format!("Q_k needs t > 0, got {t}"));
    }
    Ok(q_k_unchecked(k, t))
}

fn q_k_unchecked(k: u32, t: f64) -> f64 {
    if t < f64::from(k) + 1.0 {
        return q_k_over_power(k, t) * t.powi(k as i32 + 1);
    }
    let mut poly = 0.0;
    let mut term = 1.0;
    for j in 0..=k {
        if j > 0 {
            term *= -t / f64::from(j);
        }
        poly += term;
    }
    let v = (-t).exp() - poly;
    if k % 2 == 0 {
        -v
    } else {
        v
    }
}

/// `Q_k(t)/t^{k+1}` by the Taylor tail, for `t < k+1`.
fn q_k_over_power(k: u32, t: f64) -> f64 {
    let mut term = 1.0;
    for j in 1..=k + 1 {
        term /= f64::from(j);
    }
    let mut sum = term;
    let mut j = f64::from(k) + 1.0;
    loop {
        j += 1.0;
        term *= -t / j;
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            return sum;
        }
    }
}

/// `Q_k(t) t^{−p−1}` without under- or overflow near zero.
fn q_k_weighted(k: u32, t: f64, p: f64) -> f64 {
    if t < f64::from(k) + 1.0 {
        q_k_over_power(k, t) * t.powf(f64::from(k) - p)
    } else {
        q_k_unchecked(k, t) * t.powf(-p - 1.0)
    }
}

/// `C_p = ∫_0^∞ Q_k(t) t^{−p−1} dt` for `k < p < k+1`, `k = ⌊p⌋`.
///
/// `[0, T]` is integrated numerically. Beyond `T` the polynomial part of
/// `Q_k` integrates in closed form and only `±e^{−t} t^{−p−1}` is left.
pub fn c_p_constant(p: f64) -> Result<f64> {
    if !(p > 0.0) || p.fract() == 0.0 || !p.is_finite() {
        return domain(format!("C_p needs a positive non-integer p, got {p}"));
    }
    let k = p.floor() as u32;
    let cfg = QuadratureConfig::default().with_tol(1e-13, 1e-300);
    let cut = 2.0 * (f64::from(k) + 1.0);
    let body = integrate(|t| q_k_weighted(k, t, p), 0.0, cut, &cfg, &[0.0])?;
    let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
    // (−1)^k Σ_{j≤k} (−1)^j/j! ∫_T^∞ t^{j−p−1} dt
    let mut poly = 0.0;
    let mut fact = 1.0;
    for j in 0..=k {
        if j > 0 {
            fact *= f64::from(j);
        }
        let alt = if j % 2 == 0 { 1.0 } else { -1.0 };
        poly += alt / fact * cut.powf(f64::from(j) - p) / (p - f64::from(j));
    }
    let expo = integrate(|t| (-t).exp() * t.powf(-p - 1.0), cut, f64::INFINITY, &cfg, &[])?;
    Ok(body.value + sign * poly - sign * expo.value)
}

/// `[h_0(b), …, h_L(b)]` in floating point.
fn chs_f64(b: &[f64], ell: usize) -> Vec<f64> {
    let mut h = vec![0.0; ell + 1];
    h[0] = 1.0;
    for &x in b {
        for l in 1..=ell {
            h[l] += x * h[l - 1];
        }
    }
    h
}

/// `F_k` evaluated on root weights `b_j = √x_j`.
///
/// With `P(b) = Π 1/(1+b_j) = Σ_ℓ (−1)^ℓ h_ℓ(b)` and `M_j = j! h_j(b)`,
/// `F_k = (−1)^{k+1}(P − Σ_{j≤k} (−1)^j h_j) = (−1)^{k+1} Σ_{ℓ>k} (−1)^ℓ h_ℓ`.
/// The tail series is used when `Σ b_j` is small, the closed form otherwise.
pub(crate) fn f_k_roots(b: &[f64], k: i32) -> f64 {
    let total: f64 = b.iter().sum();
    let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
    if k >= 0 && total <= 0.5 {
        return sign * tail_series(b, k as usize, 1.0);
    }
    let prod: f64 = b.iter().map(|v| 1.0 / (1.0 + v)).product();
    if k < 0 {
        return prod;
    }
    let h = chs_f64(b, k as usize);
    let poly: f64 = h.iter().enumerate().map(|(j, v)| if j % 2 == 0 { *v } else { -*v }).sum();
    sign * (prod - poly)
}

/// `Σ_{ℓ>k} (−1)^ℓ h_ℓ(b) t^{ℓ−k−1}`, for `t Σ b_j ≤ 1/2`.
fn tail_series(b: &[f64], k: usize, t: f64) -> f64 {
    let h = chs_f64(b, k + 400);
    let mut sum = 0.0;
    let mut power = 1.0;
    for (l, hl) in h.iter().enumerate().skip(k + 1) {
        let term = if l % 2 == 0 { hl * power } else { -hl * power };
        sum += term;
        if term.abs() <= 1e-17 * sum.abs() {
            break;
        }
        power *= t;
    }
    sum
}

/// `F_k(t b) t^{−p−1}` without under- or overflow near zero.
fn f_k_weighted(b: &[f64], k: i32, t: f64, p: f64) -> f64 {
    let total: f64 = b.iter().sum();
    if k >= 0 && t * total <= 0.5 {
        let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
        return sign * tail_series(b, k as usize, t) * t.powf(f64::from(k) - p);
    }
    let scaled: Vec<f64> = b.iter().map(|v| v * t).collect();
    f_k_roots(&scaled, k) * t.powf(-p - 1.0)
}

fn roots_of(x: &[f64]) -> Result<Vec<f64>> {
    if let Some(bad) = x.iter().find(|v| !(**v >= 0.0) || !v.is_finite()) {
        return domain(format!("F_k needs nonnegative entries, got {bad}"));
    }
    Ok(x.iter().map(|v| v.sqrt()).collect())
}

/// `F_k(x) = 𝔼 Q_k(Σ √x_j 𝓔_j)` in closed form for `k ≤ 3`.
pub fn f_k(x: &[f64], k: u32) -> Result<f64> {
    if k > 3 {
        return domain(format!("closed forms cover k = 0..3, got {k}; use f_k_mc"));
    }
    Ok(f_k_roots(&roots_of(x)?, k as i32))
}

/// Monte Carlo estimate of `F_k(x)` for any `k`.
pub fn f_k_mc(x: &[f64], k: u32, seed: u64, count: usize) -> Result<MomentEstimate> {
    let b = roots_of(x)?;
    let model = GammaSumModel::exponential(&b)?;
    let (value, error) =
        montecarlo_mean(&model, |s| if s > 0.0 { q_k_unchecked(k, s) } else { 0.0 }, count, seed, ExecMode::default());
    Ok(MomentEstimate {
        value,
        error,
        engine: Engine::MonteCarlo,
        p: f64::from(k),
        shift: 0.0,
        signed: false,
        fingerprint: model.fingerprint(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RepresentationCheck {
    pub moment: f64,
    pub representation: f64,
    pub residual: f64,
}

/// Compares `M_p(x)` with `C_p^{−1} ∫_0^∞ F_k(t²x) t^{−p−1} dt`, `k = ⌊p⌋`.
///
/// On `[T, ∞)` the integrand splits as `(−1)^{k+1}(P(t²x) − Σ_{j≤k} (−t)^j h_j(b))`;
/// the polynomial part integrates in closed form.
pub fn mp_representation_check(x: &[f64], p: f64) -> Result<RepresentationCheck> {
    if !(p > 0.0 && p < 4.0) || p.fract() == 0.0 {
        return domain(format!("the representation check needs a non-integer p in (0, 4), got {p}"));
    }
    let b = roots_of(x)?;
    let k = p.floor() as i32;
    let scale: f64 = b.iter().sum();
    if scale == 0.0 {
        return domain("the representation check needs a nonzero vector");
    }
    let cut = 4.0 * (f64::from(k) + 1.0) / scale;
    let cfg = QuadratureConfig::default().with_tol(1e-12, 1e-300);
    let body = integrate(|t| f_k_weighted(&b, k, t, p), 0.0, cut, &cfg, &[0.0])?;
    let sign = if k % 2 == 0 { -1.0 } else { 1.0 };
    let h = chs_f64(&b, k as usize);
    let mut poly = 0.0;
    for (j, hj) in h.iter().enumerate() {
        let alt = if j % 2 == 0 { 1.0 } else { -1.0 };
        poly += alt * hj * cut.powf(j as f64 - p) / (p - j as f64);
    }
    let prod_tail = integrate(
        |t| b.iter().map(|v| 1.0 / (1.0 + v * t)).product::<f64>() * t.powf(-p - 1.0),
        cut,
        f64::INFINITY,
        &cfg.with_tail_threshold(cut),
        &[],
    )?;
    let integral = body.value + sign * (prod_tail.value - poly);
    let representation = integral / c_p_constant(p)?;
    let moment = m_p(x, p)?.value;
    Ok(RepresentationCheck { moment, representation, residual: ((moment - representation) / moment).abs() })
}

/// `∂F_k/∂x_i − ∂F_k/∂x_j` for `k ≤ 3` and `x > 0`.
///
/// Written as `((b_j − b_i)/(2 b_i b_j))·B_k` with `K = (1+b_i+b_j)/((1+b_i)(1+b_j))`:
/// `B_0 = K P`, `B_1 = 1 − K P`, `B_2 = K P − 1 + M_1` and
/// `B_3 = h_2(b) − b_i b_j − K P + 1 − M_1`. The last bracket follows from
/// `∂M_2/∂x_i = 1 + M_1/b_i` and `∂M_3/∂x_i = 3 b_i + 3 Σx/b_i + (3/(2b_i)) Σ_{j≠k} b_j b_k`.
pub fn ostrowski_differential(x: &[f64], k: u32, i: usize, j: usize) -> Result<f64> {
    if k > 3 {
        return domain(format!("Ostrowski brackets are available for k = 0..3, got {k}"));
    }
    if i >= x.len() || j >= x.len() || i == j {
        return domain(format!("need two distinct indices below {}, got {i} and {j}", x.len()));
    }
    if x.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return domain("Ostrowski differentials need strictly positive entries");
    }
    let b: Vec<f64> = x.iter().map(|v| v.sqrt()).collect();
    let (bi, bj) = (b[i], b[j]);
    let prod: f64 = b.iter().map(|v| 1.0 / (1.0 + v)).product();
    let kp = (1.0 + bi + bj) / ((1.0 + bi) * (1.0 + bj)) * prod;
    let m1: f64 = b.iter().sum();
    let bracket = match k {
        0 => kp,
        1 => 1.0 - kp,
        2 => kp - 1.0 + m1,
        _ => chs_f64(&b, 2)[2] - bi * bj - kp + 1.0 - m1,
    };
    Ok((bj - bi) / (2.0 * bi * bj) * bracket)
}

/// `(1+b_1+b_2)/((1+b_1)(1+b_2)) > (1 − Σ b_j) Π (1+b_j)` for positive `b`.
pub fn claim_inequality_check(b: &[f64]) -> Result<bool> {
    if b.len() < 2 || b.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return domain("the claim needs at least two positive numbers");
    }
    let lhs = (1.0 + b[0] + b[1]) / ((1.0 + b[0]) * (1.0 + b[1]));
    let rhs = (1.0 - b.iter().sum::<f64>()) * b.iter().map(|v| 1.0 + v).product::<f64>();
    Ok(lhs > rhs)
}
