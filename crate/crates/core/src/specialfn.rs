//! Gamma-function kernel and the closed forms built on it: Gaussian absolute
//! moments, the Fourier constant `c_q`, the ratio functions `Ψ_β`, `R_β` and
//! the integral `I_{q,s}`.
//!
//! Gamma ratios are always formed in log space. `Γ` itself is only
//! exponentiated for arguments where it is representable.

use std::f64::consts::{LN_2, PI};

use crate::error::{domain, Result};

const LN_PI: f64 = 1.144_729_885_849_400_2;
const LN_2_SQRT_E_OVER_PI: f64 = 0.620_782_237_635_245_2;
const LANCZOS_G: f64 = 10.900511;

/// Lanczos coefficients (Pugh 2004, n = 10, g = 10.900511).
const LANCZOS_DK: [f64; 11] = [
    2.485_740_891_387_535_5e-5,
    1.051_423_785_817_219_7,
    -3.456_870_972_220_162_5,
    4.512_277_094_668_948,
    -2.982_852_253_235_766_4,
    1.056_397_115_771_267,
    -1.954_287_731_916_458_7e-1,
    1.709_705_434_044_412e-2,
    -5.719_261_174_043_057e-4,
    4.633_994_733_599_057e-6,
    -2.719_949_084_886_077_2e-9,
];

/// `B_{2k} / (2k (2k-1))` for the Stirling series, k = 1..7.
const STIRLING: [f64; 7] = [
    1.0 / 12.0,
    -1.0 / 360.0,
    1.0 / 1260.0,
    -1.0 / 1680.0,
    1.0 / 1188.0,
    -691.0 / 360_360.0,
    1.0 / 156.0,
];

fn lanczos_sum(x: f64) -> f64 {
    LANCZOS_DK
        .iter()
        .enumerate()
        .skip(1)
        .fold(LANCZOS_DK[0], |s, (k, d)| s + d / (x + k as f64 - 1.0))
}

/// `ln Γ(x)` for `x > 0`.
///
/// Lanczos approximation on `[0.5, ∞)`, reflection on `(0, 0.5)`.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma requires x > 0, got {x}");
    if x < 0.5 {
        LN_PI - (PI * x).sin().ln() - ln_gamma(1.0 - x)
    } else {
        lanczos_sum(x).ln()
            + LN_2_SQRT_E_OVER_PI
            + (x - 0.5) * ((x - 0.5 + LANCZOS_G) / std::f64::consts::E).ln()
    }
}

/// `(ln |Γ(x)|, sign Γ(x))` for any real `x` that is not a pole.
pub fn ln_gamma_signed(x: f64) -> (f64, f64) {
    if x > 0.0 {
        return (ln_gamma(x), 1.0);
    }
    // Γ(x) Γ(1-x) = π / sin(πx)
    let s = (PI * x).sin();
    let sign = if s < 0.0 { -1.0 } else { 1.0 };
    (LN_PI - s.abs().ln() - ln_gamma(1.0 - x), sign)
}

/// `Γ(x)` for real `x` away from the poles. Overflows to `±∞` past 171.6.
pub fn gamma(x: f64) -> f64 {
    let (lg, sign) = ln_gamma_signed(x);
    sign * lg.exp()
}

fn stirling_tail(z: f64) -> f64 {
    let z2 = z * z;
    let mut zp = z;
    let mut acc = 0.0;
    for c in STIRLING {
        acc += c / zp;
        zp *= z2;
    }
    acc
}

/// `ln Γ(x+a) − ln Γ(x+b) − (a−b) ln x` for `x > 0`, `x+a > 0`, `x+b > 0`.
///
/// For large arguments the leading `(a−b) ln x` growth is removed analytically
/// from a Stirling-series difference, so the result keeps full absolute
/// accuracy even when both gammas are astronomically large.
pub fn ln_gamma_ratio_scaled(x: f64, a: f64, b: f64) -> f64 {
    if x + a.min(b) >= 10.0 {
        let (z1, z2) = (x + a, x + b);
        (x + a - 0.5) * (a / x).ln_1p() - (x + b - 0.5) * (b / x).ln_1p() - (a - b)
            + stirling_tail(z1)
            - stirling_tail(z2)
    } else {
        ln_gamma(x + a) - ln_gamma(x + b) - (a - b) * x.ln()
    }
}

/// `(ℓ−1)!!` for even `ℓ ≥ 0` (the empty product gives 1 at `ℓ = 0`).
pub fn odd_double_factorial(ell: u32) -> f64 {
    debug_assert!(ell % 2 == 0);
    (1..ell).step_by(2).map(f64::from).product()
}

fn as_even_integer(p: f64) -> Option<u32> {
    if p >= 0.0 && p <= 340.0 && p.fract() == 0.0 && (p as u32) % 2 == 0 {
        Some(p as u32)
    } else {
        None
    }
}

/// `𝔼|G|^p = 2^{p/2} Γ((p+1)/2) / √π` for a standard Gaussian `G`, `p > −1`.
///
/// Even integers take an exact double-factorial path.
pub fn gaussian_abs_moment(p: f64) -> Result<f64> {
    if !(p > -1.0) || !p.is_finite() {
        return domain(format!("gaussian_abs_moment requires p > -1, got {p}"));
    }
    if let Some(ell) = as_even_integer(p) {
        return Ok(odd_double_factorial(ell));
    }
    Ok((0.5 * p * LN_2 + ln_gamma(0.5 * (p + 1.0)) - 0.5 * LN_PI).exp())
}

/// `c_q = (2/π) sin(πq/2) Γ(q+1)` for `0 < q < 2`.
pub fn fourier_constant(q: f64) -> Result<f64> {
    if !(q > 0.0 && q < 2.0) {
        return domain(format!("fourier_constant requires 0 < q < 2, got {q}"));
    }
    Ok(2.0 / PI * (0.5 * PI * q).sin() * ln_gamma(q + 1.0).exp())
}

fn check_positive(name: &str, beta: f64, x: f64) -> Result<()> {
    if !(beta > 0.0 && x > 0.0) || !beta.is_finite() || !x.is_finite() {
        return domain(format!("{name} requires beta > 0 and x > 0, got beta={beta}, x={x}"));
    }
    Ok(())
}

/// `Ψ_β(x) = Γ(x+β+½) / (x^β Γ(x+½))`.
pub fn psi(beta: f64, x: f64) -> Result<f64> {
    check_positive("psi", beta, x)?;
    Ok(ln_gamma_ratio_scaled(x, beta + 0.5, 0.5).exp())
}

/// `R_β(x) = (1+1/x)^β (x+½) / (x+β+½)`, the one-step ratio `Ψ_β(x)/Ψ_β(x+1)`.
pub fn ratio_r(beta: f64, x: f64) -> Result<f64> {
    check_positive("ratio_r", beta, x)?;
    Ok((beta * (1.0 / x).ln_1p() - (beta / (x + 0.5)).ln_1p()).exp())
}

/// `I_{q,s} = ∫₀^∞ (1 − (1+t²/s)^{−(1+s)/2}) t^{−q−1} dt` in closed form:
/// `(1/q) Γ(1−q/2) Γ((1+q+s)/2) / (s^{q/2} Γ((1+s)/2))`.
pub fn closed_integral_iqs(q: f64, s: f64) -> Result<f64> {
    if !(q > 0.0 && q < 2.0) || !(s > 0.0) || !s.is_finite() {
        return domain(format!("closed_integral_iqs requires 0 < q < 2 and s > 0, got q={q}, s={s}"));
    }
    // Γ((1+q+s)/2) / (s^{q/2} Γ((1+s)/2)) = 2^{-q/2} Ψ_{q/2}(s/2)
    let half = 0.5 * s;
    let ln_ratio = ln_gamma_ratio_scaled(half, 0.5 * (q + 1.0), 0.5) - 0.5 * q * LN_2;
    Ok((ln_gamma(1.0 - 0.5 * q) + ln_ratio).exp() / q)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn ln_gamma_at_known_points() {
        assert!(ln_gamma(1.0).abs() < 1e-15);
        assert!(ln_gamma(2.0).abs() < 1e-15);
        assert!(rel(ln_gamma(0.5), 0.5 * PI.ln()) < 1e-14);
        // 20! = 2432902008176640000
        assert!(rel(ln_gamma(21.0), 2_432_902_008_176_640_000f64.ln()) < 1e-15);
        assert!(rel(gamma(0.1), 9.513_507_698_668_732) < 1e-14);
        assert!(rel(gamma(-0.5), -2.0 * PI.sqrt()) < 1e-14);
        assert!(rel(gamma(-1.5), 4.0 / 3.0 * PI.sqrt()) < 1e-14);
    }

    #[test]
    fn ln_gamma_matches_factorials_far_out() {
        // ln Γ(n+1) = Σ ln k, summed exactly enough in f64 for a 1e-13 check
        let mut acc = 0.0f64;
        for k in 1..=100_000u32 {
            acc += f64::from(k).ln();
            if k % 9_973 == 0 {
                assert!(rel(ln_gamma(f64::from(k) + 1.0), acc) < 1e-13, "k={k}");
            }
        }
    }

    #[test]
    fn scaled_ratio_matches_high_precision_values() {
        // reference values from 40-digit arithmetic
        let cases = [
            (9.5, 0.5, 0.0, -0.013151840019046446658),
            (9.5, 3.0, 1.25, 0.27511463931456082032),
            (10.0, 1.7, 0.5, 0.069727006769758186586),
            (12.0, 3.0, 1.25, 0.2214391029080523468),
            (40.0, 0.5, 0.0, -0.003124918635043224429),
            (40.0, 1.7, 0.5, 0.017852988935794529165),
            (1000.0, 0.5, 0.0, -0.00012499999479166822917),
            (1000.0, 3.0, 1.25, 0.0028412920501183248221),
        ];
        for (x, a, b, want) in cases {
            let d = (ln_gamma_ratio_scaled(x, a, b) - want).abs();
            assert!(d < 5e-14, "x={x} a={a} b={b} diff={d:e}");
        }
    }

    #[test]
    fn gaussian_moment_examples() {
        assert_eq!(gaussian_abs_moment(2.0).unwrap(), 1.0);
        assert_eq!(gaussian_abs_moment(4.0).unwrap(), 3.0);
        assert_eq!(gaussian_abs_moment(8.0).unwrap(), 105.0);
        assert_eq!(gaussian_abs_moment(0.0).unwrap(), 1.0);
        assert!(rel(gaussian_abs_moment(1.0).unwrap(), (2.0 / PI).sqrt()) < 1e-14);
        assert!(rel(gaussian_abs_moment(3.0).unwrap(), 2.0 * 2f64.sqrt() / PI.sqrt()) < 1e-14);
        assert!(gaussian_abs_moment(-1.0).is_err());
        assert!(gaussian_abs_moment(-3.0).is_err());
    }

    #[test]
    fn gaussian_moment_identities() {
        let mut p = 1.05;
        while p < 30.0 {
            let g = gaussian_abs_moment(p).unwrap();
            let lower = gaussian_abs_moment(p - 2.0).unwrap();
            assert!(rel((p - 1.0) * lower, g) < 1e-12, "recurrence at p={p}");
            p += 0.37;
        }
        let mut p = -0.95;
        while p < 30.0 {
            let lhs = (0.5 * p * LN_2 + ln_gamma(0.5 * p + 1.0)).exp() * gaussian_abs_moment(p).unwrap();
            assert!(rel(lhs, ln_gamma(p + 1.0).exp()) < 1e-12, "duplication at p={p}");
            p += 0.29;
        }
    }

    #[test]
    fn fourier_constant_examples() {
        assert!(rel(fourier_constant(1.0).unwrap(), 2.0 / PI) < 1e-15);
        assert!(rel(fourier_constant(0.5).unwrap(), 0.398_942_280_401_432_7) < 1e-7);
        for &q in &[1e-4, 1e-6, 1e-8] {
            assert!((fourier_constant(q).unwrap() / q - 1.0).abs() < 10.0 * q);
        }
        let mut q = 0.01;
        while q < 2.0 {
            assert!(fourier_constant(q).unwrap() > 0.0);
            q += 0.01;
        }
        assert!(fourier_constant(0.0).is_err());
        assert!(fourier_constant(2.0).is_err());
    }

    #[test]
    fn psi_and_r_examples() {
        assert!(rel(psi(1.0, 1.0).unwrap(), 1.5) < 1e-14);
        assert!(rel(psi(1.0, 2.0).unwrap(), 1.25) < 1e-14);
        let v = psi(0.5, 100.0).unwrap();
        assert!(v > 1.0 && v < 1.01);
        assert!(rel(ratio_r(1.0, 1.0).unwrap(), 1.2) < 1e-15);
        assert!((ratio_r(0.7, 1e12).unwrap() - 1.0).abs() < 1e-11);
        assert!(psi(0.0, 1.0).is_err());
        assert!(ratio_r(1.0, -1.0).is_err());
    }

    #[test]
    fn psi_is_the_telescoped_product_of_r() {
        // Ψ_β(x) = Ψ_β(x+K+1) Π_{k=0}^{K} R_β(x+k) and Ψ_β → 1
        let mut prod = 1.0;
        let mut k = 0;
        while k <= 200_000 {
            prod *= ratio_r(1.0, 1.0 + f64::from(k)).unwrap();
            k += 1;
        }
        assert!((prod - 1.5).abs() < 1e-5);
        let exact = prod * psi(1.0, 1.0 + f64::from(k)).unwrap();
        assert!(rel(exact, 1.5) < 1e-11);
    }

    #[test]
    fn psi_and_r_strictly_decrease() {
        for &beta in &[0.1, 0.5, 1.0, 2.5] {
            let grid: Vec<f64> = (0..200).map(|i| 1e-2 * 1e6f64.powf(f64::from(i) / 199.0)).collect();
            for w in grid.windows(2) {
                assert!(psi(beta, w[1]).unwrap() < psi(beta, w[0]).unwrap(), "psi beta={beta} x={}", w[1]);
                assert!(ratio_r(beta, w[1]).unwrap() < ratio_r(beta, w[0]).unwrap(), "R beta={beta} x={}", w[1]);
            }
            let tail = psi(beta, 1e4).unwrap();
            assert!(tail > 1.0 && tail < 1.001);
        }
    }

    #[test]
    fn iqs_examples_and_monotonicity() {
        assert!(rel(closed_integral_iqs(1.0, 1.0).unwrap(), PI / 2.0) < 1e-14);
        for &q in &[0.25, 1.0, 1.75] {
            let mut prev = f64::INFINITY;
            for i in 0..60 {
                let s = 0.05 * 1.3f64.powi(i);
                let v = closed_integral_iqs(q, s).unwrap();
                assert!(v < prev, "q={q} s={s}");
                prev = v;
            }
            // s → ∞ limit is ∫(1−e^{−t²/2})t^{−q−1} = 𝔼|G|^q / c_q
            let limit = gaussian_abs_moment(q).unwrap() / fourier_constant(q).unwrap();
            assert!(rel(closed_integral_iqs(q, 1e12).unwrap(), limit) < 1e-9);
        }
        assert!(closed_integral_iqs(2.0, 1.0).is_err());
        assert!(closed_integral_iqs(1.0, 0.0).is_err());
    }
}
