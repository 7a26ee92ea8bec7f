//! Seeded sampling of `Σ x_j Γ(γ_j)`.
//!
//! Draws are organised in fixed-size partitions; partition `i` uses the
//! ChaCha8 stream `i` of the base seed, so the output does not depend on how
//! partitions are scheduled.

use rand::distr::Open01;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use super::GammaSumModel;
use crate::par::{map_indexed, ExecMode};

/// Draws per partition.
pub const PARTITION: usize = 1 << 15;

pub fn partition_rng(seed: u64, index: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    rng
}

#[derive(Debug, Clone, Copy)]
enum Summand {
    /// Sum of `k` exponentials.
    Erlang(u32),
    /// Non-integer shape.
    Gamma(f64),
}

/// Precomputed sampling plan for one model.
#[derive(Debug, Clone)]
pub struct Sampler {
    weights: Vec<f64>,
    summands: Vec<Summand>,
}

fn uniform<R: Rng>(rng: &mut R) -> f64 {
    rng.sample(Open01)
}

/// Marsaglia–Tsang squeeze for shape `a ≥ 1`; shapes below 1 are boosted by
/// `Γ(a) = Γ(a+1) U^{1/a}`.
fn gamma_variate<R: Rng>(rng: &mut R, a: f64) -> f64 {
    if a < 1.0 {
        let boost = uniform(rng).powf(1.0 / a);
        return gamma_variate(rng, a + 1.0) * boost;
    }
    let d = a - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u = uniform(rng);
        if u.ln() < 0.5 * x * x + d - d * v + d * v.ln() {
            return d * v;
        }
    }
}

impl Sampler {
    pub fn new(model: &GammaSumModel) -> Self {
        let summands = model
            .shapes()
            .iter()
            .map(|&g| {
                if g.fract() == 0.0 && g <= 64.0 {
                    Summand::Erlang(g as u32)
                } else {
                    Summand::Gamma(g)
                }
            })
            .collect();
        Sampler { weights: model.weights().to_vec(), summands }
    }

    /// One realisation; exponentials by inversion `−ln U`.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> f64 {
        let mut s = 0.0;
        for (&x, summand) in self.weights.iter().zip(&self.summands) {
            let g = match *summand {
                Summand::Erlang(k) => (0..k).map(|_| -uniform(rng).ln()).sum(),
                Summand::Gamma(a) => gamma_variate(rng, a),
            };
            s += x * g;
        }
        s
    }

    /// Two identically distributed realisations. Exponential components use
    /// `U` and `1 − U` (antithetic); non-integer shapes are drawn independently.
    pub fn draw_pair<R: Rng>(&self, rng: &mut R) -> (f64, f64) {
        let (mut s, mut t) = (0.0, 0.0);
        for (&x, summand) in self.weights.iter().zip(&self.summands) {
            match *summand {
                Summand::Erlang(k) => {
                    for _ in 0..k {
                        let u = uniform(rng);
                        s -= x * u.ln();
                        t -= x * (-u).ln_1p();
                    }
                }
                Summand::Gamma(a) => {
                    s += x * gamma_variate(rng, a);
                    t += x * gamma_variate(rng, a);
                }
            }
        }
        (s, t)
    }
}

/// `count` realisations of the model, identical for a given seed.
pub fn sample(model: &GammaSumModel, seed: u64, count: usize) -> Vec<f64> {
    sample_with(model, seed, count, ExecMode::default())
}

pub fn sample_with(model: &GammaSumModel, seed: u64, count: usize, mode: ExecMode) -> Vec<f64> {
    let sampler = Sampler::new(model);
    let parts = count.div_ceil(PARTITION);
    map_indexed(parts, mode, |i| {
        let mut rng = partition_rng(seed, i);
        let n = PARTITION.min(count - i * PARTITION);
        (0..n).map(|_| sampler.draw(&mut rng)).collect::<Vec<f64>>()
    })
    .concat()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_sd(v: &[f64]) -> (f64, f64) {
        let n = v.len() as f64;
        let m = v.iter().sum::<f64>() / n;
        let var = v.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (n - 1.0);
        (m, (var / n).sqrt())
    }

    #[test]
    fn deterministic_for_a_seed() {
        let m = GammaSumModel::gamma(&[1.0, -0.5], &[1.0, 2.5]).unwrap();
        let a = sample(&m, 7, 100_000);
        let b = sample_with(&m, 7, 100_000, ExecMode::Sequential);
        assert_eq!(a, b);
        assert_ne!(a, sample(&m, 8, 100_000));
    }

    #[test]
    fn exponential_mean() {
        let m = GammaSumModel::exponential(&[1.0]).unwrap();
        let (mean, se) = mean_sd(&sample(&m, 1, 1_000_000));
        assert!((mean - 1.0).abs() < 5.0 * se);
    }

    #[test]
    fn laplace_first_absolute_moment() {
        let m = GammaSumModel::exponential(&[1.0, -1.0]).unwrap();
        let abs: Vec<f64> = sample(&m, 2, 1_000_000).into_iter().map(f64::abs).collect();
        let (mean, se) = mean_sd(&abs);
        assert!((mean - 1.0).abs() < 5.0 * se);
    }

    #[test]
    fn fractional_shapes_have_gamma_moments() {
        for &a in &[0.3, 1.7, 4.25] {
            let m = GammaSumModel::gamma(&[1.0], &[a]).unwrap();
            let v = sample(&m, 3, 400_000);
            let (mean, se) = mean_sd(&v);
            assert!((mean - a).abs() < 5.0 * se, "shape {a}: {mean}");
            let sq: Vec<f64> = v.iter().map(|x| x * x).collect();
            let (m2, se2) = mean_sd(&sq);
            assert!((m2 - a * (a + 1.0)).abs() < 5.0 * se2, "shape {a}: {m2}");
        }
    }

    #[test]
    fn antithetic_pairs_share_the_law() {
        let m = GammaSumModel::exponential(&[1.0, 2.0]).unwrap();
        let s = Sampler::new(&m);
        let mut rng = partition_rng(0, 0);
        let pairs: Vec<(f64, f64)> = (0..200_000).map(|_| s.draw_pair(&mut rng)).collect();
        let (ma, sa) = mean_sd(&pairs.iter().map(|p| p.0).collect::<Vec<_>>());
        let (mb, sb) = mean_sd(&pairs.iter().map(|p| p.1).collect::<Vec<_>>());
        assert!((ma - 3.0).abs() < 5.0 * sa && (mb - 3.0).abs() < 5.0 * sb);
    }
}
