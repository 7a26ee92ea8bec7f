//! Complete homogeneous symmetric polynomials and exact raw moments in
//! arbitrary-precision rational arithmetic.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use crate::error::{domain, Result};

/// `h_ℓ(x)`: the sum of all degree-`ℓ` monomials in `x` with repetition.
///
/// Uses `h_ℓ(x_1..x_n) = h_ℓ(x_1..x_{n-1}) + x_n h_{ℓ-1}(x_1..x_n)`, so the
/// table after processing `x_n` holds `h_0..h_ℓ` of the first `n` variables.
pub fn chs(x: &[BigRational], ell: usize) -> BigRational {
    chs_table(x, ell).pop().unwrap_or_else(BigRational::one)
}

/// `[h_0(x), …, h_ℓ(x)]`.
pub fn chs_table(x: &[BigRational], ell: usize) -> Vec<BigRational> {
    let mut h = vec![BigRational::zero(); ell + 1];
    h[0] = BigRational::one();
    for xn in x {
        for l in 1..=ell {
            let add = xn * &h[l - 1];
            h[l] += add;
        }
    }
    h
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `𝔼(Σ x_j 𝓔_j)^ℓ = ℓ! h_ℓ(x)` for even `ℓ`, which is also `𝔼|Σ x_j 𝓔_j|^ℓ`.
pub fn even_moment_exact(x: &[BigRational], ell: usize) -> Result<BigRational> {
    if ell % 2 != 0 {
        return domain(format!(
            "even_moment_exact needs an even order, got {ell}; odd raw moments are not absolute moments"
        ));
    }
    Ok(chs(x, ell) * BigRational::from_integer(factorial(ell)))
}

/// `𝔼(Σ x_j Γ(γ_j))^ℓ` for rational weights and shapes, exactly.
///
/// Cumulants of the sum are `κ_r = (r−1)! Σ γ_j x_j^r`; raw moments follow
/// from `μ_n = Σ_{k=1}^{n} C(n−1, k−1) κ_k μ_{n−k}`.
pub fn raw_moment_exact(x: &[BigRational], shapes: &[BigRational], ell: usize) -> BigRational {
    debug_assert_eq!(x.len(), shapes.len());
    let mut kappa = vec![BigRational::zero(); ell + 1];
    let mut powers: Vec<BigRational> = x.to_vec();
    let mut fact = BigInt::one();
    for (r, k) in kappa.iter_mut().enumerate().skip(1) {
        if r > 1 {
            fact *= BigInt::from(r - 1);
            for (p, xj) in powers.iter_mut().zip(x) {
                *p *= xj;
            }
        }
        let s = powers.iter().zip(shapes).fold(BigRational::zero(), |acc, (p, g)| acc + p * g);
        *k = s * BigRational::from_integer(fact.clone());
    }
    let mut mu = vec![BigRational::zero(); ell + 1];
    mu[0] = BigRational::one();
    for n in 1..=ell {
        let mut binom = BigInt::one();
        let mut acc = BigRational::zero();
        for k in 1..=n {
            // binom = C(n−1, k−1)
            acc += &kappa[k] * &mu[n - k] * BigRational::from_integer(binom.clone());
            binom = binom * BigInt::from(n - k) / BigInt::from(k);
        }
        mu[n] = acc;
    }
    mu.pop().unwrap_or_else(BigRational::one)
}

/// Exact rational value of a finite `f64`.
pub fn rational_from_f64(v: f64) -> Result<BigRational> {
    BigRational::from_float(v).map_or_else(|| domain(format!("{v} has no rational value")), Ok)
}

/// Nearest `f64` to a rational (through a scaled integer quotient).
pub fn rational_to_f64(r: &BigRational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    let n = r.numer().to_f64().unwrap_or(f64::NAN);
    let d = r.denom().to_f64().unwrap_or(f64::NAN);
    n / d
}
