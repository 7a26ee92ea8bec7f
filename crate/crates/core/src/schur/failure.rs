//! Two-point profile `f(x) = ((1−x²)^{(p+1)/2} − x^{p+1})/(√(1−x²) − x)` on
//! `[0, 1/√2]`, proportional to `M_p(1−x², x²)`. For `p > 4` it rises from
//! `f(0) = 1` to an interior maximum and comes back down to a local minimum at
//! the balanced point.

use std::f64::consts::FRAC_1_SQRT_2;

use serde::Serialize;

use crate::error::{domain, Result};

const GRID: usize = 512;
/// Width under which `√(1−x²) − x` is replaced by its series.
const PATCH: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FailureProfile {
    pub p: f64,
    /// `true` for `p ≤ 4`, where no interior maximum exists.
    pub monotone: bool,
    pub f_samples: Vec<(f64, f64)>,
    /// `(x, f(x))` at the interior maximum.
    pub critical_point: Option<(f64, f64)>,
    pub f_at_ends: (f64, f64),
    pub d1_at_0: f64,
    pub d1_at_right: f64,
    pub d2_at_right: f64,
    /// `(1/3) 2^{1−p/2} p(p+1)(p−4)`.
    pub d2_closed_form: f64,
}

/// `(a^{p+1} − b^{p+1})/(a − b)`; near `a = b` this is
/// `c^p((p+1) + C(p+1,3)e² + C(p+1,5)e⁴)` with `c = (a+b)/2`, `e = (a−b)/(a+b)`.
fn divided_power(a: f64, b: f64, p: f64) -> f64 {
    if (a - b).abs() < PATCH {
        let c = 0.5 * (a + b);
        let e = (a - b) / (a + b);
        let q = p + 1.0;
        let c3 = q * (q - 1.0) * (q - 2.0) / 6.0;
        let c5 = c3 * (q - 3.0) * (q - 4.0) / 20.0;
        return c.powf(p) * (q + c3 * e * e + c5 * e.powi(4));
    }
    (a.powf(p + 1.0) - b.powf(p + 1.0)) / (a - b)
}

/// `f(x)`; symmetric under `x ↦ √(1−x²)`, so points past `1/√2` are fine.
pub fn profile_value(x: f64, p: f64) -> f64 {
    divided_power((1.0 - x * x).max(0.0).sqrt(), x, p)
}

fn golden_max<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64) -> f64 {
    let r = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - r * (hi - lo);
    let mut d = lo + r * (hi - lo);
    let (mut fc, mut fd) = (f(c), f(d));
    while hi - lo > 1e-12 {
        if fc > fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - r * (hi - lo);
            fc = f(c);
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + r * (hi - lo);
            fd = f(d);
        }
    }
    0.5 * (lo + hi)
}

/// Samples, end derivatives and the interior maximum of the profile.
pub fn failure_profile(p: f64) -> Result<FailureProfile> {
    if !(p > -1.0) || !p.is_finite() {
        return domain(format!("the profile needs p > -1, got {p}"));
    }
    let f = |x: f64| profile_value(x, p);
    let right = FRAC_1_SQRT_2;
    let f_samples: Vec<(f64, f64)> = (0..=GRID).map(|i| right * i as f64 / GRID as f64).map(|x| (x, f(x))).collect();
    let h0 = 1e-4;
    let d1_at_0 = (-3.0 * f(0.0) + 4.0 * f(h0) - f(2.0 * h0)) / (2.0 * h0);
    let h1 = 1e-5;
    let d1_at_right = (f(right + h1) - f(right - h1)) / (2.0 * h1);
    let h = 1e-3;
    let d2_at_right = (f(right + h) - 2.0 * f(right) + f(right - h)) / (h * h);
    let d2_closed_form = 2f64.powf(1.0 - p / 2.0) * p * (p + 1.0) * (p - 4.0) / 3.0;
    let f_at_ends = (f(0.0), f(right));

    let mut critical_point = None;
    if p > 4.0 {
        let dh = 1e-7;
        let slope = |x: f64| (f(x + dh) - f(x - dh)) / (2.0 * dh);
        let step = right / GRID as f64;
        // the slope also vanishes at the right end, so stop one cell short
        for i in 1..GRID - 1 {
            let (a, b) = (step * i as f64, step * (i + 1) as f64);
            if slope(a) > 0.0 && slope(b) <= 0.0 {
                let x = golden_max(f, a - step, b + step);
                critical_point = Some((x, f(x)));
                break;
            }
        }
    }
    Ok(FailureProfile {
        p,
        monotone: p <= 4.0,
        f_samples,
        critical_point,
        f_at_ends,
        d1_at_0,
        d1_at_right,
        d2_at_right,
        d2_closed_form,
    })
}
