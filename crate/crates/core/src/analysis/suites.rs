//! Randomized and exhaustive checks of the moment inequalities.
//!
//! Floating-point suites compare at the level of `p`-th powers and count a
//! violation only when the shortfall exceeds three times the engine error.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::Rng;
use serde_json::json;

use super::constants::{centered_exp_abs_moment, kappa, solve_pstar};
use super::{literal, random_weights, VerificationReport, Violation};
use crate::engines::{moment_with, EngineConfig, MomentEstimate};
use crate::error::{domain, Error, Result};
use crate::model::sampling::partition_rng;
use crate::model::chs::rational_to_f64;
use crate::model::{chs, GammaSumModel, MomentQuery};
use crate::par::{map_indexed, ExecMode};
use crate::schur::claim_inequality_check;
use crate::specialfn::{closed_integral_iqs, fourier_constant, gaussian_abs_moment, ln_gamma};

const SLACK: f64 = 4.0 * f64::EPSILON;

fn trial_config(seed: u64, trial: usize) -> EngineConfig {
    EngineConfig::default()
        .with_seed(seed ^ (trial as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15))
        .with_samples(400_000)
        .with_mode(ExecMode::Sequential)
}

/// Retries `draw` while the engine reports coincident weights.
fn with_resample<R, T, F>(rng: &mut R, mut draw: F) -> Result<T>
where
    R: Rng,
    F: FnMut(&mut R) -> Result<T>,
{
    let mut last = None;
    for _ in 0..32 {
        match draw(rng) {
            Err(e @ Error::NearCoincident { .. }) => last = Some(e),
            other => return other,
        }
    }
    Err(last.unwrap_or_else(|| Error::Domain("resampling exhausted".into())))
}

fn collect(outcomes: Vec<Result<Vec<Violation>>>) -> Result<Vec<Violation>> {
    let mut all = Vec::new();
    for o in outcomes {
        all.extend(o?);
    }
    Ok(all)
}

/// `(𝔼|S|^p / 𝔼|G|^p)^{1/p}` for the balanced `±1/√n` vector, `n` even, with
/// the propagated error of the ratio.
pub fn balanced_ratio(n: usize, p: f64) -> Result<(f64, f64)> {
    if n < 2 || n % 2 == 1 {
        return domain(format!("balanced vectors need an even n >= 2, got {n}"));
    }
    let w = 1.0 / (n as f64).sqrt();
    let half = (n / 2) as f64;
    let model = GammaSumModel::gamma(&[w, -w], &[half, half])?;
    let e = moment_with(&model, &MomentQuery::abs(p)?, None, &EngineConfig::default())?;
    let g = gaussian_abs_moment(p)?;
    let ratio = (e.value / g).powf(1.0 / p);
    Ok((ratio, ratio * e.error / (p * e.value)))
}

/// `‖X‖_p ≥ ‖G‖_p √(Σx_j²)` on random mixed-sign exponential sums with up to
/// `n_max` terms, plus the balanced `±` vectors for `n ∈ {2, 4, 8, 16}`.
pub fn verify_theorem1(p: f64, trials: usize, n_max: usize, seed: u64) -> Result<VerificationReport> {
    if !(p >= 2.0 - 1e-6) || !p.is_finite() {
        return domain(format!("the L_p-L_2 bound is checked for p >= 2, got {p}"));
    }
    if n_max == 0 {
        return domain("n_max must be positive");
    }
    let p = if p < 2.0 + 1e-6 { 2.0 } else { p };
    let g = gaussian_abs_moment(p)?;
    let q = MomentQuery::abs(p)?;
    let outcomes = map_indexed(trials, ExecMode::default(), |t| -> Result<Vec<Violation>> {
        let mut rng = partition_rng(seed, t);
        let n = rng.random_range(1..=n_max);
        let cfg = trial_config(seed, t);
        let (x, e) = with_resample(&mut rng, |rng| {
            let x = random_weights(rng, n, true);
            let e = moment_with(&GammaSumModel::exponential(&x)?, &q, None, &cfg)?;
            Ok((x, e))
        })?;
        let rhs = g * x.iter().map(|v| v * v).sum::<f64>().powf(p / 2.0);
        let budget = 3.0 * e.error + SLACK * rhs;
        Ok(if e.value < rhs - budget {
            vec![Violation { model: literal(&x), p, lhs: e.value, rhs, budget, detail: format!("engine {}", e.engine) }]
        } else {
            Vec::new()
        })
    });
    let mut violations = collect(outcomes)?;
    let mut observations = Vec::new();
    for n in [2usize, 4, 8, 16] {
        let (ratio, err) = balanced_ratio(n, p)?;
        observations.push((format!("balanced_ratio_n{n}"), ratio));
        if ratio < 1.0 - 3.0 * err - SLACK {
            violations.push(Violation {
                model: format!("balanced n={n}"),
                p,
                lhs: ratio,
                rhs: 1.0,
                budget: 3.0 * err,
                detail: "balanced vector below the Gaussian norm".into(),
            });
        }
    }
    let mut report =
        VerificationReport::new("theorem1", json!({"p": p, "n_max": n_max, "seed": seed}), trials, violations);
    report.observations = observations;
    report.notes.push("variance is taken as Σx_j² for the uncentered sum, as the bound is literally stated".into());
    Ok(report)
}

fn factorial(n: usize) -> BigInt {
    (1..=n).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

fn odd_double_factorial_big(ell: usize) -> BigInt {
    (1..ell).step_by(2).fold(BigInt::one(), |acc, k| acc * BigInt::from(k))
}

/// `(ℓ! h_ℓ(x))² ≥ ((ℓ−1)!!)² (Σx_j²)^ℓ` with `h_ℓ(x) > 0`, exactly, for random
/// rational vectors and even `ℓ`.
pub fn verify_hunter_exact(trials: usize, ells: &[usize], seed: u64) -> Result<VerificationReport> {
    if let Some(bad) = ells.iter().find(|l| **l == 0 || **l % 2 == 1) {
        return domain(format!("Hunter's inequality needs even degrees >= 2, got {bad}"));
    }
    let outcomes = map_indexed(trials, ExecMode::default(), |t| -> Result<Vec<Violation>> {
        let mut rng = partition_rng(seed, t);
        let n = rng.random_range(1..=8);
        let mut x: Vec<BigRational> = (0..n)
            .map(|_| {
                let num: i64 = rng.random_range(-20..=20);
                let den: i64 = rng.random_range(1..=12);
                BigRational::new(num.into(), den.into())
            })
            .collect();
        if x.iter().all(Zero::is_zero) {
            x[0] = BigRational::one();
        }
        let norm2: BigRational = x.iter().map(|v| v * v).fold(BigRational::zero(), |a, b| a + b);
        let mut out = Vec::new();
        for &ell in ells {
            let h = chs(&x, ell);
            let lhs = BigRational::from(factorial(ell)) * &h;
            let lhs2 = &lhs * &lhs;
            let c = BigRational::from(odd_double_factorial_big(ell));
            let mut rhs2 = &c * &c;
            for _ in 0..ell {
                rhs2 *= &norm2;
            }
            if !h.is_positive() || lhs2 < rhs2 {
                let xf: Vec<f64> = x.iter().map(rational_to_f64).collect();
                out.push(Violation {
                    model: literal(&xf),
                    p: ell as f64,
                    lhs: rational_to_f64(&lhs2),
                    rhs: rational_to_f64(&rhs2),
                    budget: 0.0,
                    detail: format!("h_{ell} = {h}"),
                });
            }
        }
        Ok(out)
    });
    let violations = collect(outcomes)?;
    Ok(VerificationReport::new("hunter", json!({"ells": ells, "seed": seed}), trials, violations))
}

fn root_error(e: &MomentEstimate, p: f64) -> f64 {
    e.error / (p.abs() * e.value.abs())
}

/// `r = ‖X − 𝔼X‖_p / ‖X − 𝔼X‖₁` against the Laplace and centered-exponential
/// extremes: `r ≥ Γ(p+1)^{1/p}` for `p ≤ 1`, `r ≤ Γ(p+1)^{1/p}` up to `p⋆` and
/// `r ≤ κ ‖𝓔 − 1‖_p` beyond.
pub fn verify_mrtt(p: f64, trials: usize, seed: u64) -> Result<VerificationReport> {
    if !(p > -1.0) || !p.is_finite() {
        return domain(format!("the centered ratio needs p > -1, got {p}"));
    }
    if p == 0.0 {
        return domain("p = 0 is excluded (the ratio is a limit there)");
    }
    let pstar = solve_pstar()?.value;
    let laplace = ln_gamma(p + 1.0) / p;
    let (bound, lower) = if p <= 1.0 {
        (laplace.exp(), true)
    } else if p <= pstar {
        (laplace.exp(), false)
    } else {
        (kappa() * centered_exp_abs_moment(p)?.powf(1.0 / p), false)
    };
    let outcomes = map_indexed(trials, ExecMode::default(), |t| -> Result<Vec<Violation>> {
        let mut rng = partition_rng(seed, t);
        let n = rng.random_range(1..=6);
        let cfg = trial_config(seed, t);
        let (x, ep, e1) = with_resample(&mut rng, |rng| {
            let x = random_weights(rng, n, true);
            let model = GammaSumModel::exponential(&x)?;
            let mean = model.mean_variance().0;
            let ep = moment_with(&model, &MomentQuery::shifted(p, mean)?, None, &cfg)?;
            let e1 = moment_with(&model, &MomentQuery::shifted(1.0, mean)?, None, &cfg)?;
            Ok((x, ep, e1))
        })?;
        let r = ep.value.powf(1.0 / p) / e1.value;
        let budget = 3.0 * r * (root_error(&ep, p) + root_error(&e1, 1.0)) + 1e-12 * r;
        let bad = if lower { r < bound - budget } else { r > bound + budget };
        Ok(if bad {
            vec![Violation {
                model: literal(&x),
                p,
                lhs: r,
                rhs: bound,
                budget,
                detail: if lower { "ratio below the Laplace value" } else { "ratio above the extremal value" }.into(),
            }]
        } else {
            Vec::new()
        })
    });
    let violations = collect(outcomes)?;
    let mut report = VerificationReport::new(
        "mrtt",
        json!({"p": p, "seed": seed, "branch": if lower { "lower" } else if p <= pstar { "laplace" } else { "centered-exponential" }}),
        trials,
        violations,
    );
    report.observations.push(("bound".into(), bound));
    report.observations.push(("pstar".into(), pstar));
    if !lower && p > pstar {
        report
            .notes
            .push("the centered-exponential branch uses the L1-normalizing scale e/2, not the printed factor 2/e".into());
    }
    Ok(report)
}

/// `n^{−p/2} Γ(n+p)/Γ(n) ≥ 2^{p/2} 𝔼|G|^p` for `n = 1..n_max`.
pub fn verify_all_equal(n_max: usize, ps: &[f64]) -> Result<VerificationReport> {
    let mut violations = Vec::new();
    let mut observations = Vec::new();
    for &p in ps {
        let rhs = 2f64.powf(p / 2.0) * gaussian_abs_moment(p)?;
        for n in 1..=n_max {
            let nf = n as f64;
            let lhs = (ln_gamma(nf + p) - ln_gamma(nf) - 0.5 * p * nf.ln()).exp();
            let budget = 1e-13 * rhs;
            if lhs < rhs - budget {
                violations.push(Violation {
                    model: format!("{n} equal weights"),
                    p,
                    lhs,
                    rhs,
                    budget,
                    detail: String::new(),
                });
            }
            if n == n_max {
                observations.push((format!("ratio_p{p}_n{n}"), lhs / rhs));
            }
        }
    }
    let mut report =
        VerificationReport::new("all-equal", json!({"n_max": n_max, "ps": ps}), n_max * ps.len(), violations);
    report.observations = observations;
    Ok(report)
}

/// Gamma-sum analogue `‖X‖_p ≥ ‖G‖_p √(Σx_j²γ_j)` and the identity
/// `𝔼[X^{p+1}] = γ 𝔼(X + 𝓔)^p` for `X ~ Γ(γ)`.
pub fn verify_gamma_extension(ps: &[f64], trials: usize, seed: u64) -> Result<VerificationReport> {
    if let Some(bad) = ps.iter().find(|p| !(**p >= 2.0)) {
        return domain(format!("the gamma extension is checked for p >= 2, got {bad}"));
    }
    let outcomes = map_indexed(trials, ExecMode::default(), |t| -> Result<Vec<Violation>> {
        let mut rng = partition_rng(seed, t);
        let n = rng.random_range(1..=5);
        let cfg = trial_config(seed, t);
        let integer = t % 2 == 0;
        let mut out = Vec::new();
        for &p in ps {
            let q = MomentQuery::abs(p)?;
            let (model, e) = with_resample(&mut rng, |rng| {
                let x = random_weights(rng, n, true);
                let shapes: Vec<f64> = (0..n)
                    .map(|_| if integer { f64::from(rng.random_range(1..=3u32)) } else { 0.5 + 2.5 * rng.random::<f64>() })
                    .collect();
                let model = GammaSumModel::gamma(&x, &shapes)?;
                let e = moment_with(&model, &q, None, &cfg)?;
                Ok((model, e))
            })?;
            let var = model.mean_variance().1;
            let rhs = gaussian_abs_moment(p)? * var.powf(p / 2.0);
            let budget = 3.0 * e.error + SLACK * rhs;
            if e.value < rhs - budget {
                out.push(Violation {
                    model: model.to_string(),
                    p,
                    lhs: e.value,
                    rhs,
                    budget,
                    detail: format!("engine {}", e.engine),
                });
            }
            // size-bias identity on a single gamma variable
            let gamma = model.shapes()[0];
            let single = GammaSumModel::gamma(&[1.0], &[gamma])?;
            let lhs = moment_with(&single, &MomentQuery::abs(p + 1.0)?, None, &cfg)?;
            let shifted = GammaSumModel::gamma(&[1.0, 1.0], &[gamma, 1.0])?;
            let rhs = match moment_with(&shifted, &q, None, &cfg) {
                Ok(r) => r,
                Err(Error::NearCoincident { .. }) => {
                    moment_with(&GammaSumModel::gamma(&[1.0], &[gamma + 1.0])?, &q, None, &cfg)?
                }
                Err(e) => return Err(e),
            };
            let gap = (lhs.value - gamma * rhs.value).abs();
            let budget = 3.0 * (lhs.error + gamma * rhs.error) + 1e-12 * lhs.value;
            if gap > budget {
                out.push(Violation {
                    model: single.to_string(),
                    p,
                    lhs: lhs.value,
                    rhs: gamma * rhs.value,
                    budget,
                    detail: format!("size-bias identity ({} vs {})", lhs.engine, rhs.engine),
                });
            }
        }
        Ok(out)
    });
    let violations = collect(outcomes)?;
    Ok(VerificationReport::new("gamma", json!({"ps": ps, "seed": seed}), trials, violations))
}

/// The positivity claim behind the Ostrowski brackets on random positive vectors.
pub fn verify_claim(trials: usize, seed: u64) -> Result<VerificationReport> {
    let outcomes = map_indexed(trials, ExecMode::default(), |t| -> Result<Vec<Violation>> {
        let mut rng = partition_rng(seed, t);
        let n = rng.random_range(2..=6);
        let scale = 10f64.powf(rng.random_range(-3.0..0.5));
        let b: Vec<f64> = (0..n).map(|_| scale * rng.random::<f64>() + 1e-12).collect();
        Ok(if claim_inequality_check(&b)? {
            Vec::new()
        } else {
            let lhs = (1.0 + b[0] + b[1]) / ((1.0 + b[0]) * (1.0 + b[1]));
            let rhs = (1.0 - b.iter().sum::<f64>()) * b.iter().map(|v| 1.0 + v).product::<f64>();
            vec![Violation { model: literal(&b), p: 0.0, lhs, rhs, budget: 0.0, detail: String::new() }]
        })
    });
    let violations = collect(outcomes)?;
    Ok(VerificationReport::new("claim", json!({"seed": seed}), trials, violations))
}

/// The chain used for `2 < p < 4` on unit vectors with `x₁ = max|x_j|`,
/// `s = x₁^{−2}`, `q = p − 2` and `Y = S + x₁𝓔 + x₂𝓔′`:
/// `Re φ_Y ≤ |φ_Y| ≤ (1+x₁²t²)^{−(1+s)/2}` on a grid, and
/// `𝔼|Y|^q ≥ c_q I_{q,s} ≥ 𝔼|G|^q`.
pub fn verify_stepii_bound(p: f64, trials: usize, seed: u64) -> Result<VerificationReport> {
    if !(p > 2.0 && p < 4.0) {
        return domain(format!("the Fourier bound chain needs 2 < p < 4, got {p}"));
    }
    let q = p - 2.0;
    let cq = fourier_constant(q)?;
    let gq = gaussian_abs_moment(q)?;
    let query = MomentQuery::abs(q)?;
    let outcomes = map_indexed(trials, ExecMode::default(), |t| -> Result<Vec<Violation>> {
        let mut rng = partition_rng(seed, t);
        let n = rng.random_range(2..=6);
        let cfg = trial_config(seed, t);
        let (x, y_model, e) = with_resample(&mut rng, |rng| {
            let mut x = random_weights(rng, n, true);
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            x.iter_mut().for_each(|v| *v /= norm);
            x.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
            let y_model = GammaSumModel::exponential(&x)?.with_extra(x[0], 1.0)?.with_extra(x[1], 1.0)?;
            let e = moment_with(&y_model, &query, None, &cfg)?;
            Ok((x, y_model, e))
        })?;
        let x1 = x[0].abs();
        let s = 1.0 / (x1 * x1);
        let mut out = Vec::new();
        for k in 0..200 {
            let tt = 0.05 * f64::from(k) * s.sqrt();
            let phi = y_model.charfn(tt);
            let envelope = (1.0 + x1 * x1 * tt * tt).powf(-(1.0 + s) / 2.0);
            let modulus = phi.norm();
            if phi.re > modulus + 1e-15 || modulus > envelope * (1.0 + 1e-12) + 1e-300 {
                out.push(Violation {
                    model: literal(&x),
                    p,
                    lhs: envelope,
                    rhs: modulus,
                    budget: 1e-12 * envelope,
                    detail: format!("characteristic-function envelope at t = {tt}"),
                });
                break;
            }
        }
        let bound = cq * closed_integral_iqs(q, s)?;
        let budget = 3.0 * e.error + SLACK * bound;
        if e.value < bound - budget {
            out.push(Violation {
                model: literal(&x),
                p,
                lhs: e.value,
                rhs: bound,
                budget,
                detail: "moment of Y below the Fourier lower bound".into(),
            });
        }
        if bound < gq * (1.0 - 1e-12) {
            out.push(Violation {
                model: literal(&x),
                p,
                lhs: bound,
                rhs: gq,
                budget: 1e-12 * gq,
                detail: "Fourier lower bound below the Gaussian moment".into(),
            });
        }
        Ok(out)
    });
    let violations = collect(outcomes)?;
    Ok(VerificationReport::new("stepII-bound", json!({"p": p, "seed": seed}), trials, violations))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn theorem1_examples() {
        let r = verify_theorem1(3.0, 60, 8, 1).unwrap();
        assert!(r.pass, "{:?}", r.violations);
        let lhs = (6.0 / 2f64.powf(1.5)).powf(1.0 / 3.0);
        assert!((lhs - 1.2849).abs() < 1e-4);
        assert!(lhs > gaussian_abs_moment(3.0).unwrap().powf(1.0 / 3.0));
        let (ratio, _) = balanced_ratio(16, 2.5).unwrap();
        assert!((1.0..=1.1).contains(&ratio), "{ratio}");
        assert!((balanced_ratio(2, 2.0).unwrap().0 - 1.0).abs() < 1e-14);
        assert!(verify_theorem1(1.5, 10, 4, 0).is_err());
    }

    #[test]
    fn hunter_examples() {
        let r = verify_hunter_exact(200, &[2, 4, 6, 8], 3).unwrap();
        assert!(r.pass);
        let x = [BigRational::one(), -BigRational::one()];
        assert_eq!(chs(&x, 2), BigRational::one());
        assert!(verify_hunter_exact(1, &[3], 0).is_err());
    }

    #[test]
    fn mrtt_branches() {
        for &p in &[-0.5, 0.5, 2.0, 4.0] {
            let r = verify_mrtt(p, 40, 5).unwrap();
            assert!(r.pass, "p={p}: {:?}", r.violations);
        }
        assert!(verify_mrtt(0.0, 1, 0).is_err());
    }

    #[test]
    fn mrtt_extremisers_saturate() {
        // Laplace at p = 0.5 and 𝓔 − 1 at p = 4 reach the bounds.
        let cfg = EngineConfig::default();
        let lap = GammaSumModel::exponential(&[1.0, -1.0]).unwrap();
        let e = moment_with(&lap, &MomentQuery::abs(0.5).unwrap(), None, &cfg).unwrap();
        assert!((e.value.powf(2.0) - ln_gamma(1.5).exp().powf(2.0)).abs() < 1e-9);
        let exp = GammaSumModel::exponential(&[1.0]).unwrap();
        let ep = moment_with(&exp, &MomentQuery::shifted(4.0, 1.0).unwrap(), None, &cfg).unwrap();
        let e1 = moment_with(&exp, &MomentQuery::shifted(1.0, 1.0).unwrap(), None, &cfg).unwrap();
        let r = ep.value.powf(0.25) / e1.value;
        let bound = kappa() * centered_exp_abs_moment(4.0).unwrap().powf(0.25);
        assert!((r - bound).abs() < 1e-9 * bound);
    }

    #[test]
    fn all_equal_examples() {
        let r = verify_all_equal(20, &[2.0, 3.0, 4.0, 6.0]).unwrap();
        assert!(r.pass);
        let two = (ln_gamma(4.0) - ln_gamma(2.0)).exp() / 2.0;
        assert!((two - 3.0).abs() < 1e-13);
        // the normalized Erlang moment grows like n^{p/2}, so the ratio does too
        let ratio = r.observations.iter().find(|o| o.0 == "ratio_p6_n20").unwrap().1;
        assert!((ratio - 132.825).abs() < 1e-9);
    }

    #[test]
    fn gamma_examples() {
        let cfg = EngineConfig::default();
        let x = GammaSumModel::gamma(&[1.0], &[2.0]).unwrap();
        let lhs = moment_with(&x, &MomentQuery::abs(3.0).unwrap(), None, &cfg).unwrap();
        assert!((lhs.value - 24.0).abs() < 1e-10);
        let y = GammaSumModel::gamma(&[1.0], &[3.0]).unwrap();
        let rhs = moment_with(&y, &MomentQuery::abs(2.0).unwrap(), None, &cfg).unwrap();
        assert_eq!(2.0 * rhs.value, 24.0);
        let r = verify_gamma_extension(&[2.0, 3.0], 20, 2).unwrap();
        assert!(r.pass, "{:?}", r.violations);
    }

    #[test]
    fn claim_and_stepii() {
        assert!(verify_claim(2000, 1).unwrap().pass);
        let r = verify_stepii_bound(3.0, 30, 4).unwrap();
        assert!(r.pass, "{:?}", r.violations);
        assert!(verify_stepii_bound(4.5, 1, 0).is_err());
    }
}
