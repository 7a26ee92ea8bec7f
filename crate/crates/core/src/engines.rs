//! Moment engines for `𝔼|S − m|^p` and the signed variant
//! `𝔼|S − m|^p sgn(S − m)`.
//!
//! * `exact`: rational raw moments, for integer `p` of matching parity.
//! * `density`: closed-form partial-fraction density (integer shapes), term-wise
//!   moments when `m = 0` and quadrature otherwise.
//! * `fourier`: `c_p ∫_0^∞ (1 − Re 𝔼e^{it(S−m)}) t^{−p−1} dt` for `0 < p < 2`.
//! * `montecarlo`: seeded antithetic sampling with a 99% confidence half-width.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::chs::{rational_from_f64, rational_to_f64, raw_moment_exact};
use crate::model::sampling::{partition_rng, Sampler, PARTITION};
use crate::model::{GammaSumModel, MomentQuery, PartialFractionDensity};
use crate::par::{map_indexed, ExecMode};
use crate::quadrature::{integrate, integrate_lenient, Integral, QuadratureConfig};
use crate::specialfn::fourier_constant;

/// Two-sided 99% standard normal quantile.
pub const Z99: f64 = 2.575_829_303_548_901;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Exact,
    Density,
    Fourier,
    MonteCarlo,
}

impl Engine {
    pub const ALL: [Engine; 4] = [Engine::Exact, Engine::Density, Engine::Fourier, Engine::MonteCarlo];

    pub fn name(self) -> &'static str {
        match self {
            Engine::Exact => "exact",
            Engine::Density => "density",
            Engine::Fourier => "fourier",
            Engine::MonteCarlo => "montecarlo",
        }
    }
}

impl fmt::Display for Engine {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Engine {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "exact" => Ok(Engine::Exact),
            "density" => Ok(Engine::Density),
            "fourier" => Ok(Engine::Fourier),
            "montecarlo" | "mc" => Ok(Engine::MonteCarlo),
            other => Err(Error::Parse(format!(
                "unknown engine `{other}` (expected exact, density, fourier or montecarlo)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentEstimate {
    pub value: f64,
    /// Absolute error bound, or the 99% half-width for Monte Carlo.
    pub error: f64,
    pub engine: Engine,
    pub p: f64,
    pub shift: f64,
    pub signed: bool,
    pub fingerprint: u64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EngineConfig {
    pub quadrature: QuadratureConfig,
    pub mc_samples: usize,
    pub seed: u64,
    pub mode: ExecMode,
}

impl Default for EngineConfig {
    fn default() -> Self {
        EngineConfig {
            quadrature: QuadratureConfig::default(),
            mc_samples: 1_000_000,
            seed: 0,
            mode: ExecMode::default(),
        }
    }
}

impl EngineConfig {
    pub fn with_seed(mut self, seed: u64) -> Self {
        self.seed = seed;
        self
    }

    pub fn with_samples(mut self, n: usize) -> Self {
        self.mc_samples = n;
        self
    }

    pub fn with_mode(mut self, mode: ExecMode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_rel_tol(mut self, rel_tol: f64) -> Self {
        self.quadrature.rel_tol = rel_tol;
        self
    }
}

fn is_even_integer(p: f64) -> bool {
    p >= 0.0 && p.fract() == 0.0 && p % 2.0 == 0.0 && p <= 64.0
}

fn is_odd_integer(p: f64) -> bool {
    p >= 0.0 && p.fract() == 0.0 && p % 2.0 == 1.0 && p <= 63.0
}

/// Engine chosen when the caller does not name one.
pub fn auto_engine(model: &GammaSumModel, q: &MomentQuery) -> Engine {
    if !q.signed && q.shift == 0.0 && is_even_integer(q.p) {
        Engine::Exact
    } else if model.integer_shapes().is_some() {
        Engine::Density
    } else if !q.signed && q.p > 0.0 && q.p < 2.0 {
        Engine::Fourier
    } else {
        Engine::MonteCarlo
    }
}

/// `𝔼|S − m|^p` (or the signed variant) with default settings.
pub fn moment(model: &GammaSumModel, q: &MomentQuery, engine: Option<Engine>) -> Result<MomentEstimate> {
    moment_with(model, q, engine, &EngineConfig::default())
}

pub fn moment_with(
    model: &GammaSumModel,
    q: &MomentQuery,
    engine: Option<Engine>,
    cfg: &EngineConfig,
) -> Result<MomentEstimate> {
    let q = MomentQuery::new(q.p, q.shift, q.signed)?;
    let fingerprint = model.fingerprint();
    let estimate = |value: f64, error: f64, engine: Engine| MomentEstimate {
        value,
        error,
        engine,
        p: q.p,
        shift: q.shift,
        signed: q.signed,
        fingerprint,
    };

    let Some(reduced) = model.without_zero_weights() else {
        // S ≡ 0, so the moment is |m|^p (times sgn(−m)).
        let d = -q.shift;
        if d == 0.0 && q.p < 0.0 {
            return domain("negative moments of a point mass at the shift point are infinite");
        }
        let mut v = d.abs().powf(q.p);
        if q.signed {
            v *= if d > 0.0 { 1.0 } else if d < 0.0 { -1.0 } else { 0.0 };
        }
        return Ok(estimate(v, 0.0, engine.unwrap_or(Engine::Exact)));
    };

    let engine = engine.unwrap_or_else(|| auto_engine(&reduced, &q));
    let (value, error) = match engine {
        Engine::Exact => exact_engine(&reduced, &q)?,
        Engine::Density => density_engine(&reduced, &q, cfg)?,
        Engine::Fourier => fourier_engine(&reduced, &q, cfg)?,
        Engine::MonteCarlo => montecarlo_engine(&reduced, &q, cfg),
    };
    Ok(estimate(value, error, engine))
}

/// `𝔼|S − m|^p sgn(S − m)`; routes to the density engine for integer shapes
/// and to Monte Carlo otherwise.
pub fn signed_moment(model: &GammaSumModel, q: &MomentQuery) -> Result<MomentEstimate> {
    signed_moment_with(model, q, &EngineConfig::default())
}

pub fn signed_moment_with(model: &GammaSumModel, q: &MomentQuery, cfg: &EngineConfig) -> Result<MomentEstimate> {
    let q = MomentQuery::signed(q.p, q.shift)?;
    moment_with(model, &q, None, cfg)
}

/// Density of `S − shift` at `t`.
pub fn density_at(model: &GammaSumModel, t: f64, shift: f64) -> Result<f64> {
    let Some(reduced) = model.without_zero_weights() else {
        return domain("the all-zero model is a point mass and has no density");
    };
    Ok(PartialFractionDensity::new(&reduced)?.density(t + shift))
}

fn exact_engine(model: &GammaSumModel, q: &MomentQuery) -> Result<(f64, f64)> {
    let parity_ok = if q.signed { is_odd_integer(q.p) } else { is_even_integer(q.p) };
    if !parity_ok {
        return Err(Error::EngineUnavailable {
            engine: "exact",
            reason: format!(
                "needs an {} integer exponent for a{} query, got p = {}",
                if q.signed { "odd" } else { "even" },
                if q.signed { " signed" } else { "n absolute" },
                q.p
            ),
        });
    }
    let ell = q.p as usize;
    let x: Vec<BigRational> = model.weights().iter().map(|&v| rational_from_f64(v)).collect::<Result<_>>()?;
    let g: Vec<BigRational> = model.shapes().iter().map(|&v| rational_from_f64(v)).collect::<Result<_>>()?;
    let value = if q.shift == 0.0 {
        raw_moment_exact(&x, &g, ell)
    } else {
        // 𝔼(S − m)^ℓ = Σ_k C(ℓ,k) 𝔼S^k (−m)^{ℓ−k}
        let minus_m = -rational_from_f64(q.shift)?;
        let mut acc = BigRational::zero();
        let mut binom = BigRational::one();
        for k in 0..=ell {
            let mk = num_traits::pow(minus_m.clone(), ell - k);
            acc += &binom * raw_moment_exact(&x, &g, k) * mk;
            binom = binom * BigRational::from_integer((ell - k).into()) / BigRational::from_integer((k + 1).into());
        }
        acc
    };
    Ok((rational_to_f64(&value), 0.0))
}

fn density_engine(model: &GammaSumModel, q: &MomentQuery, cfg: &EngineConfig) -> Result<(f64, f64)> {
    let pfd = PartialFractionDensity::new(model)?;
    if q.shift == 0.0 {
        return if q.signed { pfd.signed_power_moment(q.p) } else { pfd.abs_power_moment(q.p) };
    }
    shifted_density_moment(&pfd, q, &cfg.quadrature)
}

/// `∫ |s|^p f(m+s) ds` side by side. On each side `u = |s|^{p+1}` makes the
/// integrand `f(m ± u^{1/(p+1)})/(p+1)` bounded for every `p > −1`.
fn shifted_density_moment(pfd: &PartialFractionDensity, q: &MomentQuery, qcfg: &QuadratureConfig) -> Result<(f64, f64)> {
    let (p, m) = (q.p, q.shift);
    let a = p + 1.0;
    let alpha = 1.0 / a;
    let reach = m.abs() + 40.0 * pfd.max_scale() * (f64::from(pfd.max_order()) + p).max(1.0);
    let qcfg = qcfg.with_tail_threshold(reach.powf(a).max(1e-300));
    let mixed = pfd.terms.iter().any(|t| t.coefficient < 0.0);

    let mut value = 0.0;
    let mut error = 0.0;
    let mut magnitude = 0.0;
    for side in [-1.0f64, 1.0] {
        let sign = if q.signed { side } else { 1.0 };
        let mut singular = vec![0.0];
        // the density has a kink (or jump) where m + s crosses 0
        if (-m) * side > 0.0 {
            singular.push(m.abs().powf(a));
        }
        let f = |u: f64| pfd.density(m + side * u.powf(alpha)) * alpha;
        let r = integrate(f, 0.0, f64::INFINITY, &qcfg, &singular)?;
        value += sign * r.value;
        error += r.error;
        if mixed {
            let loose = qcfg.with_tol(1e-3, qcfg.abs_tol);
            let g = |u: f64| pfd.density_magnitude(m + side * u.powf(alpha)) * alpha;
            let r = integrate_lenient(g, 0.0, f64::INFINITY, &loose, &singular, f64::INFINITY)?;
            magnitude += r.value;
        } else {
            magnitude += r.value.abs();
        }
    }
    error += (4.0 * pfd.terms.len() as f64 + 32.0) * f64::EPSILON * magnitude;
    Ok((value, error))
}

/// `1 − Re e^{L}` without cancellation, where `L = ReL + i ImL`.
fn one_minus_re_exp(l: Complex64) -> f64 {
    let h = 0.5 * l.im;
    -l.re.exp_m1() * l.im.cos() + 2.0 * h.sin() * h.sin()
}

fn fourier_engine(model: &GammaSumModel, q: &MomentQuery, cfg: &EngineConfig) -> Result<(f64, f64)> {
    if q.signed {
        return Err(Error::EngineUnavailable {
            engine: "fourier",
            reason: "signed moments are not given by the Fourier formula".into(),
        });
    }
    if !(q.p > 0.0 && q.p < 2.0) {
        return Err(Error::EngineUnavailable {
            engine: "fourier",
            reason: format!("needs 0 < p < 2, got p = {}", q.p),
        });
    }
    let p = q.p;
    let m = q.shift;
    let weights = model.weights();
    let shapes = model.shapes();
    // log of 𝔼e^{it(S−m)}, with Re and Im assembled separately for accuracy
    let log_psi = |t: f64| {
        let mut re = 0.0;
        let mut im = -m * t;
        for (&x, &g) in weights.iter().zip(shapes) {
            re -= 0.5 * g * (x * t).powi(2).ln_1p();
            im += g * (x * t).atan();
        }
        Complex64::new(re, im)
    };
    let (mean, var) = model.mean_variance();
    let spread = (var + (mean - m).powi(2)).sqrt();
    let cut = 2.0 / spread;
    let qcfg = cfg.quadrature.with_tail_threshold(50.0 * cut);

    // 1 − Re ψ(t) = a t² + O(t⁴) with a = 𝔼(S−m)²/2. The quadratic part is
    // integrated in closed form so that the remainder is smooth at 0 even
    // when p is close to 2.
    let a = 0.5 * spread * spread;
    let integrand = |t: f64| {
        let rest = one_minus_re_exp(log_psi(t)) - a * t * t;
        if rest == 0.0 {
            0.0
        } else {
            rest.signum() * (rest.abs().ln() - (p + 1.0) * t.ln()).exp()
        }
    };
    let rest = integrate(integrand, 0.0, cut, &qcfg, &[0.0])?;
    let quadratic = a * cut.powf(2.0 - p) / (2.0 - p);
    let body = Integral { value: quadratic + rest.value, error: rest.error, evaluations: rest.evaluations };

    // ∫_T^∞ (1 − Re ψ) t^{−p−1} = T^{−p}/p − Re ∫_T^∞ ψ(t) t^{−p−1} dt, and the
    // last integral runs along t = T − iσs where e^{−imt} decays; no factor
    // (1 − i x t) reaches its branch cut there because T > 0.
    let sigma = if m < 0.0 { -1.0 } else { 1.0 };
    let rotated = |s: f64| {
        let t = Complex64::new(cut, -sigma * s);
        let mut l = Complex64::new(0.0, 0.0);
        for (&x, &g) in weights.iter().zip(shapes) {
            l -= g * (Complex64::new(1.0, 0.0) - Complex64::i() * x * t).ln();
        }
        l -= Complex64::i() * m * t;
        let z = (l - (p + 1.0) * t.ln()).exp() * Complex64::new(0.0, -sigma);
        z.re
    };
    let tail = integrate(rotated, 0.0, f64::INFINITY, &qcfg, &[0.0])?;
    let lead = cut.powf(-p) / p;

    let c = fourier_constant(p)?;
    let value = c * (body.value + lead - tail.value);
    let roundoff = 64.0 * f64::EPSILON * c * (quadratic + rest.value.abs() + lead + tail.value.abs());
    let error = c * (body.error + tail.error) + roundoff;
    Ok((value, error))
}

#[derive(Debug, Clone, Copy, Default)]
struct Accumulator {
    n: f64,
    mean: f64,
    m2: f64,
}

impl Accumulator {
    fn push(&mut self, x: f64) {
        self.n += 1.0;
        let d = x - self.mean;
        self.mean += d / self.n;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    fn merge(self, o: Accumulator) -> Accumulator {
        if self.n == 0.0 {
            return o;
        }
        if o.n == 0.0 {
            return self;
        }
        let n = self.n + o.n;
        let d = o.mean - self.mean;
        Accumulator { n, mean: self.mean + d * o.n / n, m2: self.m2 + o.m2 + d * d * self.n * o.n / n }
    }
}

/// Monte Carlo mean of `phi(S)` from `samples` draws taken as antithetic
/// pairs, with the 99% half-width computed from the pair averages.
pub fn montecarlo_mean<F>(model: &GammaSumModel, phi: F, samples: usize, seed: u64, mode: ExecMode) -> (f64, f64)
where
    F: Fn(f64) -> f64 + Sync + Send,
{
    let sampler = Sampler::new(model);
    let pairs = samples.div_ceil(2).max(2);
    let parts = pairs.div_ceil(PARTITION);
    let accs = map_indexed(parts, mode, |i| {
        let mut rng = partition_rng(seed, i);
        let n = PARTITION.min(pairs - i * PARTITION);
        let mut acc = Accumulator::default();
        for _ in 0..n {
            let (a, b) = sampler.draw_pair(&mut rng);
            acc.push(0.5 * (phi(a) + phi(b)));
        }
        acc
    });
    let total = accs.into_iter().fold(Accumulator::default(), Accumulator::merge);
    let var = total.m2 / (total.n - 1.0);
    (total.mean, Z99 * (var / total.n).sqrt())
}

fn montecarlo_engine(model: &GammaSumModel, q: &MomentQuery, cfg: &EngineConfig) -> (f64, f64) {
    let (p, m, signed) = (q.p, q.shift, q.signed);
    let phi = |x: f64| {
        let d = x - m;
        let v = d.abs().powf(p);
        if signed {
            v * d.signum()
        } else {
            v
        }
    };
    montecarlo_mean(model, phi, cfg.mc_samples, cfg.seed, cfg.mode)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Discrepancy {
    pub first: Engine,
    pub second: Engine,
    pub gap: f64,
    pub budget: f64,
    pub flagged: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossValidation {
    pub p: f64,
    pub fingerprint: u64,
    pub estimates: Vec<MomentEstimate>,
    pub unavailable: Vec<(Engine, String)>,
    pub discrepancies: Vec<Discrepancy>,
    pub consistent: bool,
}

/// Runs every engine that accepts `𝔼|S|^p` and compares all pairs; a pair is
/// flagged when the gap exceeds the sum of both error budgets.
pub fn cross_validate(model: &GammaSumModel, p: f64, seed: u64) -> Result<CrossValidation> {
    let q = MomentQuery::abs(p)?;
    let cfg = EngineConfig::default().with_seed(seed);
    let mut estimates = Vec::new();
    let mut unavailable = Vec::new();
    for engine in Engine::ALL {
        match moment_with(model, &q, Some(engine), &cfg) {
            Ok(e) => estimates.push(e),
            Err(err) => unavailable.push((engine, err.to_string())),
        }
    }
    let mut discrepancies = Vec::new();
    for (i, a) in estimates.iter().enumerate() {
        for b in &estimates[i + 1..] {
            let gap = (a.value - b.value).abs();
            let budget = a.error + b.error + 4.0 * f64::EPSILON * a.value.abs().max(b.value.abs());
            discrepancies.push(Discrepancy { first: a.engine, second: b.engine, gap, budget, flagged: gap > budget });
        }
    }
    let consistent = discrepancies.iter().all(|d| !d.flagged);
    Ok(CrossValidation { p, fingerprint: model.fingerprint(), estimates, unavailable, discrepancies, consistent })
}
