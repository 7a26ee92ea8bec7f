//! Weighted sums `S = Σ x_j Γ_j` of independent gamma variables with unit
//! scale and shapes `γ_j` (exponential when every shape is 1).

pub mod chs;
pub mod density;
pub mod sampling;

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

pub use chs::{chs, even_moment_exact, raw_moment_exact};
pub use density::{ErlangTerm, PartialFractionDensity};
pub use sampling::sample;

/// Real coefficients `x_1, …, x_n` of a weighted sum, `n ≥ 1`, all finite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        if entries.is_empty() {
            return domain("a weight vector needs at least one entry");
        }
        if let Some(bad) = entries.iter().find(|v| !v.is_finite()) {
            return domain(format!("weights must be finite, got {bad}"));
        }
        Ok(WeightVector(entries))
    }

    pub fn entries(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn squared_norm(&self) -> f64 {
        self.0.iter().map(|v| v * v).sum()
    }

    pub fn max_abs(&self) -> f64 {
        self.0.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn sum(&self) -> f64 {
        self.0.iter().sum()
    }
}

/// `S = Σ x_j Γ(γ_j)` with independent unit-scale gamma variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GammaSumModel {
    weights: WeightVector,
    shapes: Vec<f64>,
}

impl GammaSumModel {
    pub fn new(weights: WeightVector, shapes: Vec<f64>) -> Result<Self> {
        if shapes.len() != weights.len() {
            return domain(format!("{} weights but {} shapes", weights.len(), shapes.len()));
        }
        if let Some(bad) = shapes.iter().find(|s| !(s.is_finite() && **s > 0.0)) {
            return domain(format!("shapes must be positive and finite, got {bad}"));
        }
        Ok(GammaSumModel { weights, shapes })
    }

    /// Sum of exponentials `Σ x_j 𝓔_j`.
    pub fn exponential(weights: &[f64]) -> Result<Self> {
        let w = WeightVector::new(weights.to_vec())?;
        let n = w.len();
        GammaSumModel::new(w, vec![1.0; n])
    }

    pub fn gamma(weights: &[f64], shapes: &[f64]) -> Result<Self> {
        GammaSumModel::new(WeightVector::new(weights.to_vec())?, shapes.to_vec())
    }

    pub fn weights(&self) -> &[f64] {
        self.weights.entries()
    }

    pub fn weight_vector(&self) -> &WeightVector {
        &self.weights
    }

    pub fn shapes(&self) -> &[f64] {
        &self.shapes
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `(Σ x_j γ_j, Σ x_j² γ_j)`.
    pub fn mean_variance(&self) -> (f64, f64) {
        self.weights()
            .iter()
            .zip(&self.shapes)
            .fold((0.0, 0.0), |(m, v), (x, g)| (m + x * g, v + x * x * g))
    }

    /// Shapes as integers when every shape is a positive integer.
    pub fn integer_shapes(&self) -> Option<Vec<u32>> {
        self.shapes
            .iter()
            .map(|&s| (s.fract() == 0.0 && s >= 1.0 && s <= f64::from(u32::MAX)).then_some(s as u32))
            .collect()
    }

    /// Same model with zero weights removed; `None` when nothing is left.
    pub fn without_zero_weights(&self) -> Option<GammaSumModel> {
        let (w, s): (Vec<f64>, Vec<f64>) = self
            .weights()
            .iter()
            .zip(&self.shapes)
            .filter(|(x, _)| **x != 0.0)
            .map(|(x, g)| (*x, *g))
            .unzip();
        if w.is_empty() {
            None
        } else {
            Some(GammaSumModel { weights: WeightVector(w), shapes: s })
        }
    }

    /// Appends one more independent summand `weight · Γ(shape)`.
    pub fn with_extra(&self, weight: f64, shape: f64) -> Result<GammaSumModel> {
        let mut w = self.weights().to_vec();
        let mut s = self.shapes.clone();
        w.push(weight);
        s.push(shape);
        GammaSumModel::gamma(&w, &s)
    }

    /// Every weight multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<GammaSumModel> {
        let w: Vec<f64> = self.weights().iter().map(|x| x * factor).collect();
        GammaSumModel::gamma(&w, &self.shapes)
    }

    /// `Σ_j −γ_j Log(1 − i x_j t)`, the principal logarithm of the
    /// characteristic function.
    pub fn log_charfn(&self, t: f64) -> Complex64 {
        self.weights()
            .iter()
            .zip(&self.shapes)
            .map(|(&x, &g)| -g * Complex64::new(1.0, -x * t).ln())
            .sum()
    }

    /// `𝔼 e^{itS} = Π_j (1 − i x_j t)^{−γ_j}`.
    pub fn charfn(&self, t: f64) -> Complex64 {
        self.log_charfn(t).exp()
    }

    /// Stable 64-bit FNV-1a fingerprint of the weights and shapes.
    pub fn fingerprint(&self) -> u64 {
        let mut h: u64 = 0xcbf2_9ce4_8422_2325;
        for v in self.weights().iter().chain(&self.shapes) {
            for b in v.to_bits().to_le_bytes() {
                h ^= u64::from(b);
                h = h.wrapping_mul(0x0100_0000_01b3);
            }
        }
        h
    }
}

impl fmt::Display for GammaSumModel {
    /// Writes the model literal accepted by [`FromStr`].
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (x, g)) in self.weights().iter().zip(&self.shapes).enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            write!(f, "{x}")?;
            if *g != 1.0 {
                write!(f, "^{g}")?;
            }
        }
        Ok(())
    }
}

impl FromStr for GammaSumModel {
    type Err = Error;

    /// Parses `w1[^s1],w2[^s2],…`, e.g. `1,2^3,-0.5` or `1e-3,2.5^2`.
    fn from_str(s: &str) -> Result<Self> {
        let parse_num = |tok: &str, what: &str| {
            tok.trim()
                .parse::<f64>()
                .map_err(|_| Error::Parse(format!("invalid {what} `{}` in model `{s}`", tok.trim())))
        };
        let mut weights = Vec::new();
        let mut shapes = Vec::new();
        for item in s.split(',') {
            if item.trim().is_empty() {
                return Err(Error::Parse(format!("empty entry in model `{s}`")));
            }
            let (w, g) = match item.split_once('^') {
                Some((w, g)) => (parse_num(w, "weight")?, parse_num(g, "shape")?),
                None => (parse_num(item, "weight")?, 1.0),
            };
            if !w.is_finite() {
                return Err(Error::Parse(format!("weight `{}` is not finite", item.trim())));
            }
            if !(g.is_finite() && g > 0.0) {
                return Err(Error::Parse(format!("shape in `{}` must be positive", item.trim())));
            }
            weights.push(w);
            shapes.push(g);
        }
        GammaSumModel::gamma(&weights, &shapes)
    }
}

/// `𝔼|S − shift|^p`, or `𝔼|S − shift|^p sgn(S − shift)` when `signed`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentQuery {
    pub p: f64,
    pub shift: f64,
    pub signed: bool,
}

impl MomentQuery {
    pub fn new(p: f64, shift: f64, signed: bool) -> Result<Self> {
        if !(p > -1.0) || !p.is_finite() {
            return domain(format!("moment exponent must satisfy p > -1, got {p}"));
        }
        if !shift.is_finite() {
            return domain(format!("shift must be finite, got {shift}"));
        }
        Ok(MomentQuery { p, shift, signed })
    }

    pub fn abs(p: f64) -> Result<Self> {
        MomentQuery::new(p, 0.0, false)
    }

    pub fn shifted(p: f64, shift: f64) -> Result<Self> {
        MomentQuery::new(p, shift, false)
    }

    pub fn signed(p: f64, shift: f64) -> Result<Self> {
        MomentQuery::new(p, shift, true)
    }
}
