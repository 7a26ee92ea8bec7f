//! The full acceptance battery as one report.

use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::Rng;
use serde::Serialize;

use super::constants::{solve_p0, solve_pstar};
use super::minimize::{gradient, minimize_sphere};
use super::probes::logconvexity_probe;
use super::random_weights;
use super::suites::{balanced_ratio, verify_all_equal, verify_hunter_exact, verify_theorem1};
use crate::engines::{moment, moment_with, Engine, EngineConfig};
use crate::error::{Error, Result};
use crate::model::chs::rational_to_f64;
use crate::model::sampling::partition_rng;
use crate::model::{even_moment_exact, GammaSumModel, MomentQuery};
use crate::quadrature::{integrate, QuadratureConfig};
use crate::schur::{failure_profile, mp_representation_check, schur_scan, Verdict};
use crate::specialfn::{closed_integral_iqs, gamma, gaussian_abs_moment, ln_gamma, psi};

pub const CRITERIA: usize = 16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionResult {
    pub id: usize,
    pub name: &'static str,
    pub pass: bool,
    /// What was measured, against which threshold.
    pub detail: String,
    /// Wall time; left out of serialized output so reports stay byte-stable.
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReproduceReport {
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub pass: bool,
    pub notes: Vec<String>,
}

fn name(id: usize) -> &'static str {
    match id {
        1 => "pstar solver",
        2 => "p0 solver",
        3 => "closed-form integral vs quadrature",
        4 => "Fourier engine on the Laplace model",
        5 => "density engine vs exact even moments",
        6 => "exact Hunter-type suite",
        7 => "L_p-L_2 suite",
        8 => "Schur phase map",
        9 => "failure profile at p = 5",
        10 => "all-equal closed form",
        11 => "M_p integral representation",
        12 => "Psi monotonicity and limit",
        13 => "sphere minimizer certificate",
        14 => "gradient identity vs finite differences",
        15 => "log-convexity for balanced models",
        16 => "Monte Carlo interval coverage",
        _ => "unknown",
    }
}

fn check(id: usize, seed: u64) -> Result<(bool, String)> {
    match id {
        1 => {
            let t = Instant::now();
            let r = solve_pstar()?;
            let s = t.elapsed().as_secs_f64();
            Ok(((r.value - 2.9414).abs() <= 5e-3 && s < 1.0, format!("pstar = {:.10} (2.9414 +- 5e-3), runtime under 1s: {}", r.value, s < 1.0)))
        }
        2 => {
            let t = Instant::now();
            let r = solve_p0()?;
            let s = t.elapsed().as_secs_f64();
            Ok(((r.value + 0.565).abs() <= 5e-3 && s < 1.0, format!("p0 = {:.10} (-0.565 +- 5e-3), runtime under 1s: {}", r.value, s < 1.0)))
        }
        3 => {
            let cfg = QuadratureConfig::default().with_tol(1e-12, 1e-300);
            let mut worst: f64 = 0.0;
            for &q in &[0.25, 0.75, 1.0, 1.25, 1.75] {
                for &s in &[0.5, 1.0, 2.0, 10.0, 100.0] {
                    let f = |t: f64| {
                        let gap = -(-0.5 * (1.0 + s) * (t * t / s).ln_1p()).exp_m1();
                        if gap == 0.0 {
                            0.0
                        } else {
                            (gap.ln() - (q + 1.0) * t.ln()).exp()
                        }
                    };
                    let num = integrate(f, 0.0, f64::INFINITY, &cfg, &[0.0])?.value;
                    let closed = closed_integral_iqs(q, s)?;
                    worst = worst.max(((num - closed) / closed).abs());
                }
            }
            let unit = (closed_integral_iqs(1.0, 1.0)? - std::f64::consts::FRAC_PI_2).abs();
            Ok((worst < 1e-8 && unit < 1e-10, format!("max rel err {worst:.2e} (< 1e-8); |I(1,1) - pi/2| = {unit:.2e} (< 1e-10)")))
        }
        4 => {
            let model = GammaSumModel::exponential(&[1.0, -1.0])?;
            let mut worst: f64 = 0.0;
            for &p in &[0.25, 0.75, 1.25, 1.75] {
                let e = moment(&model, &MomentQuery::abs(p)?, Some(Engine::Fourier))?;
                let want = gamma(p + 1.0);
                worst = worst.max(((e.value - want) / want).abs());
            }
            Ok((worst < 1e-6, format!("max rel err {worst:.2e} (< 1e-6)")))
        }
        5 => {
            let mut worst: f64 = 0.0;
            for t in 0..100 {
                let mut rng = partition_rng(seed ^ 0x5, t);
                let x = distinct_rationals(&mut rng, 1 + t % 6);
                let xf: Vec<f64> = x.iter().map(rational_to_f64).collect();
                let model = GammaSumModel::exponential(&xf)?;
                for ell in [2usize, 4, 6] {
                    let exact = rational_to_f64(&even_moment_exact(&x, ell)?);
                    let e = moment(&model, &MomentQuery::abs(ell as f64)?, Some(Engine::Density))?;
                    worst = worst.max(((e.value - exact) / exact).abs());
                }
            }
            Ok((worst < 1e-9, format!("max rel err {worst:.2e} over 100 vectors (< 1e-9)")))
        }
        6 => {
            let r = verify_hunter_exact(1000, &[2, 4, 6, 8], seed)?;
            Ok((r.pass, format!("{} violations in {} exact trials", r.violations.len(), r.trials)))
        }
        7 => {
            let mut violations = 0;
            let mut ratios = Vec::new();
            for &p in &[2.0, 2.5, 3.0, 4.0, 5.0, 6.0] {
                violations += verify_theorem1(p, 200, 8, seed)?.violations.len();
                ratios.push(balanced_ratio(16, p)?.0);
            }
            // p = 2 is exact equality; allow its rounding
            let in_band = ratios.iter().all(|r| *r >= 1.0 - 1e-12 && *r <= 1.1);
            Ok((violations == 0 && in_band, format!("{violations} violations; n=16 balanced ratios {ratios:.6?} (in [1, 1.1])")))
        }
        8 => {
            let expected = [
                (-0.75, Verdict::Convex),
                (-0.25, Verdict::Convex),
                (0.5, Verdict::Concave),
                (2.0, Verdict::Concave),
                (3.9, Verdict::Concave),
                (4.5, Verdict::Neither),
                (5.0, Verdict::Neither),
                (6.0, Verdict::Neither),
            ];
            let mut wrong = Vec::new();
            for (p, want) in expected {
                for n in 2..=4 {
                    let got = schur_scan(p, n, 500, seed)?.verdict;
                    if got != want {
                        wrong.push(format!("p={p} n={n}: {got}, expected {want}"));
                    }
                }
            }
            let detail = if wrong.is_empty() { "24 scans as prescribed".to_string() } else { wrong.join("; ") };
            Ok((wrong.is_empty(), detail))
        }
        9 => {
            let f = failure_profile(5.0)?;
            let ends = f.f_at_ends.0.max(f.f_at_ends.1);
            let crit = f.critical_point.map_or(f64::NAN, |c| c.1);
            let d2 = ((f.d2_at_right - f.d2_closed_form) / f.d2_closed_form).abs();
            let d1 = (f.d1_at_0 - 1.0).abs();
            let pass = crit > ends && d2 < 1e-4 && d1 < 1e-6;
            Ok((pass, format!("interior max {crit:.6} vs ends {ends:.6}; f'' rel err {d2:.2e} (< 1e-4); |f'(0) - 1| = {d1:.2e} (< 1e-6)")))
        }
        10 => {
            let r = verify_all_equal(20, &[2.0, 3.0, 4.0, 6.0])?;
            let lhs = (ln_gamma(3.0) - ln_gamma(1.0)).exp();
            let rhs = 2.0 * gaussian_abs_moment(2.0)?;
            let eq = (lhs - rhs).abs();
            Ok((r.pass && eq < 1e-14, format!("{} violations; n=1, p=2 gap {eq:.1e}", r.violations.len())))
        }
        11 => {
            let mut worst: f64 = 0.0;
            for (x, p) in [(vec![1.0], 1.5), (vec![1.0, 1.0], 0.5), (vec![2.0, 3.0], 2.5)] {
                worst = worst.max(mp_representation_check(&x, p)?.residual);
            }
            Ok((worst < 1e-4, format!("max residual {worst:.2e} (< 1e-4)")))
        }
        12 => {
            let grid: Vec<f64> = (0..200).map(|k| 0.05 * 1.06f64.powi(k)).take_while(|x| *x <= 1e4).collect();
            let mut monotone = true;
            let mut limits = Vec::new();
            for &beta in &[0.1, 0.5, 1.0, 2.5] {
                let vals = grid.iter().map(|&x| psi(beta, x)).collect::<Result<Vec<f64>>>()?;
                monotone &= vals.windows(2).all(|w| w[1] < w[0]);
                limits.push(psi(beta, 1e4)?);
            }
            let limit_ok = limits.iter().all(|v| *v > 1.0 && *v < 1.001);
            Ok((monotone && limit_ok, format!("strictly decreasing on {} points: {monotone}; Psi(1e4) = {limits:.8?}", grid.len())))
        }
        13 => {
            let r = minimize_sphere(2, 3.0, 8, seed)?;
            let h = std::f64::consts::FRAC_1_SQRT_2;
            let coords = r.x_min.iter().all(|v| (v.abs() - h).abs() < 1e-4) && r.x_min[0] * r.x_min[1] < 0.0;
            let above = r.value >= gaussian_abs_moment(3.0)?;
            let pass = coords && r.crux_residual < 1e-3 && above;
            Ok((pass, format!("x = {:.8?}, value {:.8}, crux residual {:.2e} (< 1e-3)", r.x_min, r.value, r.crux_residual)))
        }
        14 => {
            let mut worst: f64 = 0.0;
            for t in 0..50 {
                let mut rng = partition_rng(seed ^ 0xE, t);
                let n = rng.random_range(2..=4);
                let x = random_weights(&mut rng, n, true);
                let p = rng.random_range(2.0..6.0);
                let g = (0..n).map(|j| gradient(&x, p, j, Some(Engine::Density)).map(|e| e.value)).collect::<Result<Vec<f64>>>()?;
                let fd = finite_gradient(&x, p)?;
                let diff = g.iter().zip(&fd).map(|(a, b)| (a - b).powi(2)).sum::<f64>().sqrt();
                let norm = fd.iter().map(|b| b * b).sum::<f64>().sqrt();
                worst = worst.max(diff / norm);
            }
            Ok((worst < 1e-3, format!("max relative gradient error {worst:.2e} (< 1e-3)")))
        }
        15 => {
            let grid: Vec<f64> = (0..9).map(|k| 2.0 + 0.5 * f64::from(k)).collect();
            let mut min_d2 = f64::INFINITY;
            let mut pass = true;
            for x in balanced_models() {
                let r = logconvexity_probe(&x, &grid)?;
                pass &= r.pass == Some(true);
                min_d2 = r.second_differences.iter().fold(min_d2, |m, v| m.min(*v));
            }
            Ok((pass, format!("min second difference {min_d2:.3e} (>= -1e-9)")))
        }
        16 => {
            let model = GammaSumModel::exponential(&[1.0, 2.0])?;
            let q = MomentQuery::abs(2.0)?;
            let mut covered = 0;
            for run in 0..200u64 {
                let cfg = EngineConfig::default().with_seed(seed.wrapping_add(run)).with_samples(20_000);
                let e = moment_with(&model, &q, Some(Engine::MonteCarlo), &cfg)?;
                if (e.value - 14.0).abs() <= e.error {
                    covered += 1;
                }
            }
            Ok((covered >= 190, format!("{covered}/200 intervals cover 14 (>= 190)")))
        }
        _ => Err(Error::Domain(format!("no acceptance criterion {id}"))),
    }
}

/// Nonzero rationals `a/b` with `|a| ≤ 20`, `1 ≤ b ≤ 12`, pairwise distinct.
fn distinct_rationals<R: Rng>(rng: &mut R, n: usize) -> Vec<BigRational> {
    let mut out: Vec<BigRational> = Vec::with_capacity(n);
    while out.len() < n {
        let a = rng.random_range(1..=20i64) * if rng.random::<bool>() { 1 } else { -1 };
        let b = rng.random_range(1..=12i64);
        let r = BigRational::new(BigInt::from(a), BigInt::from(b));
        if !out.contains(&r) {
            out.push(r);
        }
    }
    out
}

fn finite_gradient(x: &[f64], p: f64) -> Result<Vec<f64>> {
    let f = |v: &[f64]| -> Result<f64> {
        Ok(moment(&GammaSumModel::exponential(v)?, &MomentQuery::abs(p)?, Some(Engine::Density))?.value)
    };
    (0..x.len())
        .map(|j| {
            let h = 1e-5;
            let (mut up, mut dn) = (x.to_vec(), x.to_vec());
            up[j] += h;
            dn[j] -= h;
            Ok((f(&up)? - f(&dn)?) / (2.0 * h))
        })
        .collect()
}

fn balanced_models() -> Vec<Vec<f64>> {
    vec![
        vec![1.0, -1.0],
        vec![0.5, 0.5, -0.5, -0.5],
        vec![0.8, -0.8, 0.3, -0.3],
        vec![0.9, -0.9, 0.6, -0.6, 0.2, -0.2],
    ]
}

/// Runs criterion `id` (1-based); errors count as failures.
pub fn run_criterion(id: usize, seed: u64) -> CriterionResult {
    let t = Instant::now();
    let (pass, detail) = match check(id, seed) {
        Ok(v) => v,
        Err(e) => (false, format!("error: {e}")),
    };
    CriterionResult { id, name: name(id), pass, detail, seconds: t.elapsed().as_secs_f64() }
}

pub fn reproduce(seed: u64) -> ReproduceReport {
    let criteria: Vec<CriterionResult> = (1..=CRITERIA).map(|id| run_criterion(id, seed)).collect();
    let pass = criteria.iter().all(|c| c.pass);
    ReproduceReport {
        seed,
        criteria,
        pass,
        notes: vec![
            "the L1-normalizing scale of the centered exponential is e/2; the printed factor 2/e does not normalize".into(),
            "the n-equal-weights ratio against 2^{p/2} E|G|^p grows like n^{p/2}; it does not tend to 1".into(),
            "the balanced +- ratio at p = 2 equals 1 up to rounding, so the lower band edge carries 1e-12 slack".into(),
            "F_0..F_3 are certified Schur-concave (nonpositive Ostrowski differentials when x_i > x_j); a Schur-convex reading of that statement is not what the concave range needs".into(),
            "the density lower bound for centered sums is read at the point 0 and reported by the density probe, not asserted".into(),
            "the L_p-L_2 suite uses the uncentered variance sum x_j^2, as the bound is literally stated".into(),
            "asymptotic sharpness at fixed n and the conjecture for general centered sums are probed only".into(),
        ],
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cheap_criteria_pass() {
        for id in [1, 2, 4, 10, 11, 12] {
            let r = run_criterion(id, 0);
            assert!(r.pass, "{id}: {}", r.detail);
        }
    }

    #[test]
    fn unknown_criterion_fails() {
        let r = run_criterion(17, 0);
        assert!(!r.pass && r.detail.starts_with("error"));
    }

    #[test]
    fn rationals_are_distinct() {
        let mut rng = partition_rng(3, 0);
        let x = distinct_rationals(&mut rng, 6);
        for (i, a) in x.iter().enumerate() {
            assert!(x[i + 1..].iter().all(|b| b != a));
        }
    }
}
