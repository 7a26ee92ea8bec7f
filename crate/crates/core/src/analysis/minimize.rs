//! Minimizing `𝔼|S_x|^p` over the unit sphere `Σx_j² = 1`.

use rand::Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use crate::engines::{moment_with, Engine, EngineConfig, MomentEstimate};
use crate::error::{domain, Error, Result};
use crate::model::sampling::partition_rng;
use crate::model::{GammaSumModel, MomentQuery};
use crate::par::{map_indexed, ExecMode};

/// `∂/∂x_j 𝔼|S_x|^p = p 𝔼[|S_x + x_j𝓔|^{p−1} sgn(S_x + x_j𝓔)]`.
pub fn gradient(x: &[f64], p: f64, j: usize, engine: Option<Engine>) -> Result<MomentEstimate> {
    gradient_with(x, p, j, engine, &EngineConfig::default())
}

fn gradient_with(x: &[f64], p: f64, j: usize, engine: Option<Engine>, cfg: &EngineConfig) -> Result<MomentEstimate> {
    if !(p >= 2.0) || !p.is_finite() {
        return domain(format!("the gradient identity is used for p >= 2, got {p}"));
    }
    if j >= x.len() {
        return domain(format!("index {j} out of range for {} weights", x.len()));
    }
    let model = GammaSumModel::exponential(x)?.with_extra(x[j], 1.0)?;
    let mut e = moment_with(&model, &MomentQuery::signed(p - 1.0, 0.0)?, engine, cfg)?;
    e.value *= p;
    e.error *= p;
    Ok(e)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimizerResult {
    pub x_min: Vec<f64>,
    pub value: f64,
    /// `|p𝔼|S|^p − p(p−1)𝔼|S + x_a𝓔 + x_b𝓔′|^{p−2}|` relative to `p𝔼|S|^p`.
    pub crux_residual: f64,
    /// Norm of the tangential gradient at `x_min`.
    pub gradient_norm: f64,
    /// Lagrange multiplier `∇f·x`; equals `p f` at a critical point.
    pub multiplier: f64,
    pub iterations: usize,
    pub converged: bool,
    /// Final value of every start, in start order.
    pub start_values: Vec<f64>,
}

fn objective(x: &[f64], p: f64, engine: Option<Engine>, cfg: &EngineConfig) -> Result<f64> {
    Ok(moment_with(&GammaSumModel::exponential(x)?, &MomentQuery::abs(p)?, engine, cfg)?.value)
}

fn full_gradient(x: &[f64], p: f64, engine: Option<Engine>, cfg: &EngineConfig) -> Result<Vec<f64>> {
    (0..x.len()).map(|j| gradient_with(x, p, j, engine, cfg).map(|e| e.value)).collect()
}

fn normalize(x: &mut [f64]) {
    let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
    x.iter_mut().for_each(|v| *v /= norm);
}

/// Relative crux residual at `x`, using the two largest-`|x|` coordinates with
/// distinct values; `None` when all coordinates coincide.
pub fn crux_residual(x: &[f64], p: f64, engine: Option<Engine>) -> Result<Option<f64>> {
    crux_with(x, p, engine, &EngineConfig::default())
}

fn crux_with(x: &[f64], p: f64, engine: Option<Engine>, cfg: &EngineConfig) -> Result<Option<f64>> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[b].abs().total_cmp(&x[a].abs()));
    let first = order[0];
    let Some(&second) = order[1..].iter().find(|&&k| (x[k] - x[first]).abs() > 1e-6 * x[first].abs()) else {
        return Ok(None);
    };
    let lhs = p * objective(x, p, engine, cfg)?;
    let model = GammaSumModel::exponential(x)?.with_extra(x[first], 1.0)?.with_extra(x[second], 1.0)?;
    let rhs = p * (p - 1.0) * moment_with(&model, &MomentQuery::abs(p - 2.0)?, engine, cfg)?.value;
    Ok(Some((lhs - rhs).abs() / lhs))
}

struct Descent {
    x: Vec<f64>,
    value: f64,
    gradient_norm: f64,
    multiplier: f64,
    iterations: usize,
    converged: bool,
}

/// Projected gradient descent with Armijo backtracking; steps that land on
/// coincident weights are treated as failed line-search trials.
fn descend(mut x: Vec<f64>, p: f64, engine: Option<Engine>, cfg: &EngineConfig) -> Result<Descent> {
    let mut f = objective(&x, p, engine, cfg)?;
    let mut step = 0.1;
    let (mut gn, mut lambda) = (f64::INFINITY, 0.0);
    for iter in 0..2000 {
        let g = full_gradient(&x, p, engine, cfg)?;
        lambda = g.iter().zip(&x).map(|(a, b)| a * b).sum::<f64>();
        let tangent: Vec<f64> = g.iter().zip(&x).map(|(gi, xi)| gi - lambda * xi).collect();
        gn = tangent.iter().map(|v| v * v).sum::<f64>().sqrt();
        if gn < 1e-7 * f.max(1.0) {
            return Ok(Descent { x, value: f, gradient_norm: gn, multiplier: lambda, iterations: iter, converged: true });
        }
        let mut accepted = false;
        for _ in 0..60 {
            let mut trial: Vec<f64> = x.iter().zip(&tangent).map(|(xi, ti)| xi - step * ti).collect();
            normalize(&mut trial);
            match objective(&trial, p, engine, cfg) {
                Ok(ft) if ft <= f - 1e-4 * step * gn * gn => {
                    x = trial;
                    f = ft;
                    step *= 2.0;
                    accepted = true;
                    break;
                }
                Ok(_) | Err(Error::NearCoincident { .. }) => step *= 0.5,
                Err(e) => return Err(e),
            }
        }
        if !accepted {
            // no descent left at working precision
            return Ok(Descent { x, value: f, gradient_norm: gn, multiplier: lambda, iterations: iter, converged: gn < 1e-6 });
        }
    }
    Ok(Descent { x, value: f, gradient_norm: gn, multiplier: lambda, iterations: 2000, converged: false })
}

/// Best of `multistart` descents from random unit vectors in dimension `n`.
pub fn minimize_sphere(n: usize, p: f64, multistart: usize, seed: u64) -> Result<MinimizerResult> {
    if n < 2 {
        return domain(format!("the sphere minimizer needs n >= 2, got {n}"));
    }
    if !(p >= 2.0) || !p.is_finite() {
        return domain(format!("the sphere minimizer needs p >= 2, got {p}"));
    }
    if multistart == 0 {
        return domain("at least one start is needed");
    }
    let cfg = EngineConfig::default().with_mode(ExecMode::Sequential).with_seed(seed);
    let runs = map_indexed(multistart, ExecMode::default(), |s| -> Result<Descent> {
        let mut rng = partition_rng(seed, s);
        for _ in 0..32 {
            let mut x: Vec<f64> = (0..n).map(|_| rng.sample::<f64, _>(StandardNormal)).collect();
            normalize(&mut x);
            match descend(x, p, None, &cfg) {
                Err(Error::NearCoincident { .. }) => continue,
                other => return other,
            }
        }
        Err(Error::Domain("could not draw a start with separated weights".into()))
    });
    let mut best: Option<Descent> = None;
    let mut start_values = Vec::with_capacity(multistart);
    for run in runs {
        let run = run?;
        start_values.push(run.value);
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.expect("multistart >= 1");
    let crux = crux_with(&best.x, p, None, &cfg)?.unwrap_or(f64::NAN);
    Ok(MinimizerResult {
        x_min: best.x,
        value: best.value,
        crux_residual: crux,
        gradient_norm: best.gradient_norm,
        multiplier: best.multiplier,
        iterations: best.iterations,
        converged: best.converged,
        start_values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::specialfn::{gamma, gaussian_abs_moment};
    use std::f64::consts::FRAC_1_SQRT_2;

    #[test]
    fn single_weight_gradient() {
        let c = 0.7;
        let g = gradient(&[c], 2.0, 0, None).unwrap();
        assert!((g.value - 4.0 * c).abs() < 1e-12);
        for &p in &[2.5, 3.0, 4.5] {
            let g = gradient(&[c], p, 0, Some(Engine::Density)).unwrap();
            let want = p * c.powf(p - 1.0) * gamma(p + 1.0);
            assert!(((g.value - want) / want).abs() < 1e-10, "p={p}");
        }
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let x = [0.6, -0.35, 0.2];
        let cfg = EngineConfig::default();
        for &p in &[2.0, 3.0, 3.7] {
            for j in 0..3 {
                let h = 1e-5;
                let (mut up, mut dn) = (x.to_vec(), x.to_vec());
                up[j] += h;
                dn[j] -= h;
                let fd = (objective(&up, p, None, &cfg).unwrap() - objective(&dn, p, None, &cfg).unwrap()) / (2.0 * h);
                let g = gradient(&x, p, j, None).unwrap().value;
                assert!(((g - fd) / fd).abs() < 1e-6, "p={p} j={j}: {g} vs {fd}");
            }
        }
    }

    #[test]
    fn two_dimensional_cube() {
        let r = minimize_sphere(2, 3.0, 8, 0).unwrap();
        assert!(r.converged);
        let mut a: Vec<f64> = r.x_min.iter().map(|v| v.abs()).collect();
        a.sort_by(f64::total_cmp);
        assert!(a.iter().all(|v| (v - FRAC_1_SQRT_2).abs() < 1e-4), "{:?}", r.x_min);
        assert!(r.x_min[0] * r.x_min[1] < 0.0);
        assert!((r.value - 6.0 / 8f64.sqrt()).abs() < 1e-8);
        assert!(r.value >= gaussian_abs_moment(3.0).unwrap());
        assert!(r.crux_residual < 1e-3);
        assert!((r.multiplier - 3.0 * r.value).abs() < 1e-6);
    }

    #[test]
    fn quadratic_minimizer_is_centered() {
        let r = minimize_sphere(3, 2.0, 3, 2).unwrap();
        assert!(r.x_min.iter().sum::<f64>().abs() < 1e-6);
        assert!((r.value - 1.0).abs() < 1e-10);
        assert!(minimize_sphere(1, 3.0, 1, 0).is_err());
    }
}
