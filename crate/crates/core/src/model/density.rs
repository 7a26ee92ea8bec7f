//! Closed-form density of `Σ x_j Γ(γ_j)` for integer shapes, as a signed
//! mixture of Erlang densities on the two half-lines.

use serde::{Deserialize, Serialize};

use super::GammaSumModel;
use crate::error::{domain, Error, Result};
use crate::specialfn::ln_gamma;

/// Distinct weights closer than this (relative) are refused: the partial
/// fraction coefficients would be dominated by cancellation.
pub const COINCIDENCE_GAP: f64 = 1e-10;

/// `coefficient · |t|^{order−1} e^{−t/scale} / ((order−1)! |scale|^order)`
/// on the half-line `sign(scale)·t > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErlangTerm {
    pub coefficient: f64,
    pub scale: f64,
    pub order: u32,
}

impl ErlangTerm {
    fn ln_norm(&self) -> f64 {
        ln_gamma(f64::from(self.order)) + f64::from(self.order) * self.scale.abs().ln()
    }

    /// Term density at `t`, zero off its half-line. At `t = 0` only
    /// positive-scale order-1 terms are nonzero (right-continuous convention).
    pub fn density(&self, t: f64) -> f64 {
        let on_side = if t == 0.0 { self.scale > 0.0 } else { t * self.scale > 0.0 };
        if !on_side {
            return 0.0;
        }
        let a = t.abs();
        if self.order == 1 {
            return self.coefficient * (-a / self.scale.abs()).exp() / self.scale.abs();
        }
        if a == 0.0 {
            return 0.0;
        }
        let ln = f64::from(self.order - 1) * a.ln() - a / self.scale.abs() - self.ln_norm();
        self.coefficient * ln.exp()
    }

    /// `∫ |t|^p` against the term: `coefficient · Γ(order+p)/Γ(order) · |scale|^p`.
    pub fn abs_power_moment(&self, p: f64) -> f64 {
        let r = f64::from(self.order);
        let ln = ln_gamma(r + p) - ln_gamma(r) + p * self.scale.abs().ln();
        self.coefficient * ln.exp()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PartialFractionDensity {
    pub terms: Vec<ErlangTerm>,
}

/// Equal weights merged into one pole of order `Σ shapes`.
fn merged_poles(model: &GammaSumModel) -> Result<Vec<(f64, u32)>> {
    let Some(shapes) = model.integer_shapes() else {
        return Err(Error::EngineUnavailable {
            engine: "density",
            reason: "partial fractions need positive integer shapes".into(),
        });
    };
    let mut poles: Vec<(f64, u32)> = Vec::new();
    for (&w, &m) in model.weights().iter().zip(&shapes) {
        if w == 0.0 {
            return domain("partial_fraction_density needs nonzero weights; drop zero weights first");
        }
        match poles.iter_mut().find(|(v, _)| *v == w) {
            Some((_, order)) => *order += m,
            None => poles.push((w, m)),
        }
    }
    poles.sort_by(|a, b| a.0.total_cmp(&b.0));
    for pair in poles.windows(2) {
        let (a, b) = (pair[0].0, pair[1].0);
        let gap = (a - b).abs() / a.abs().max(b.abs());
        if gap < COINCIDENCE_GAP {
            return Err(Error::NearCoincident { a, b, gap });
        }
    }
    Ok(poles)
}

/// Power series of `(1 + ρy)^{−m}` up to `y^{deg}`.
fn neg_power_series(rho: f64, m: u32, deg: usize) -> Vec<f64> {
    let mut c = Vec::with_capacity(deg + 1);
    let mut term = 1.0;
    c.push(term);
    for j in 1..=deg {
        // C(m+j−1, j)(−ρ)^j from the previous coefficient
        term *= -rho * (f64::from(m) + j as f64 - 1.0) / j as f64;
        c.push(term);
    }
    c
}

fn series_mul(a: &[f64], b: &[f64]) -> Vec<f64> {
    let deg = a.len().min(b.len());
    (0..deg).map(|k| (0..=k).map(|i| a[i] * b[k - i]).sum()).collect()
}

impl PartialFractionDensity {
    /// Expands `Π (1 − x_j s)^{−γ_j}` into partial fractions over the poles
    /// `1/x_j`. Near the pole of weight `w_k` (order `m_k`), with
    /// `y = 1 − w_k s`, the other factors become
    /// `Π_{l≠k} d_l^{−m_l} (1 + ρ_l y)^{−m_l}`, `d_l = (w_k − w_l)/w_k`,
    /// `ρ_l = w_l/(w_k − w_l)`, and the coefficient of `(1 − w_k s)^{−r}`
    /// is the `y^{m_k − r}` Taylor coefficient of that product.
    pub fn new(model: &GammaSumModel) -> Result<Self> {
        let poles = merged_poles(model)?;
        let mut terms = Vec::new();
        for (k, &(wk, mk)) in poles.iter().enumerate() {
            let deg = mk as usize - 1;
            let mut series = vec![0.0; deg + 1];
            series[0] = 1.0;
            let mut ln_scale = 0.0;
            let mut sign = 1.0;
            for (l, &(wl, ml)) in poles.iter().enumerate() {
                if l == k {
                    continue;
                }
                let d = (wk - wl) / wk;
                ln_scale -= f64::from(ml) * d.abs().ln();
                if d < 0.0 && ml % 2 == 1 {
                    sign = -sign;
                }
                series = series_mul(&series, &neg_power_series(wl / (wk - wl), ml, deg));
            }
            let prefactor = sign * ln_scale.exp();
            for r in 1..=mk {
                let coefficient = prefactor * series[(mk - r) as usize];
                terms.push(ErlangTerm { coefficient, scale: wk, order: r });
            }
        }
        Ok(PartialFractionDensity { terms })
    }

    /// Density at `t` (right-continuous at 0).
    pub fn density(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.density(t)).sum()
    }

    /// `Σ |term|` at `t`, the scale of the cancellation in [`Self::density`].
    pub fn density_magnitude(&self, t: f64) -> f64 {
        self.terms.iter().map(|term| term.density(t).abs()).sum()
    }

    /// `𝔼|X|^p` in closed form, with an absolute error estimate that accounts
    /// for cancellation between signed terms.
    pub fn abs_power_moment(&self, p: f64) -> Result<(f64, f64)> {
        self.power_moment(p, false)
    }

    /// `𝔼|X|^p sgn X` in closed form with its error estimate.
    pub fn signed_power_moment(&self, p: f64) -> Result<(f64, f64)> {
        self.power_moment(p, true)
    }

    fn power_moment(&self, p: f64, signed: bool) -> Result<(f64, f64)> {
        if !(p > -1.0) || !p.is_finite() {
            return domain(format!("absolute moments need p > -1, got {p}"));
        }
        let mut sum = 0.0;
        let mut mag = 0.0;
        for term in &self.terms {
            let mut v = term.abs_power_moment(p);
            if signed && term.scale < 0.0 {
                v = -v;
            }
            sum += v;
            mag += v.abs();
        }
        let err = (4.0 * self.terms.len() as f64 + 32.0) * f64::EPSILON * mag;
        Ok((sum, err))
    }

    /// Total mass, `Σ coefficients`; equals 1 up to rounding.
    pub fn total_mass(&self) -> f64 {
        self.terms.iter().map(|t| t.coefficient).sum()
    }

    /// Largest `|scale|`, which sets how far the density reaches.
    pub fn max_scale(&self) -> f64 {
        self.terms.iter().fold(0.0, |m, t| m.max(t.scale.abs()))
    }

    pub fn max_order(&self) -> u32 {
        self.terms.iter().map(|t| t.order).max().unwrap_or(1)
    }
}

/// Weights are merged when closer than `rel_gap` (relative); the merged
/// weight is the shape-weighted mean. Used by scans that sample weights at
/// random and would otherwise trip the coincidence guard.
pub fn merge_close_weights(model: &GammaSumModel, rel_gap: f64) -> Result<GammaSumModel> {
    let mut items: Vec<(f64, f64)> = model.weights().iter().copied().zip(model.shapes().iter().copied()).collect();
    items.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut merged: Vec<(f64, f64)> = Vec::with_capacity(items.len());
    for (w, g) in items {
        if let Some(last) = merged.last_mut() {
            let scale = last.0.abs().max(w.abs());
            if scale > 0.0 && (w - last.0).abs() <= rel_gap * scale && w.signum() == last.0.signum() {
                let total = last.1 + g;
                last.0 = (last.0 * last.1 + w * g) / total;
                last.1 = total;
                continue;
            }
        }
        merged.push((w, g));
    }
    let (w, s): (Vec<f64>, Vec<f64>) = merged.into_iter().unzip();
    GammaSumModel::gamma(&w, &s)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    fn pfd(w: &[f64]) -> PartialFractionDensity {
        PartialFractionDensity::new(&GammaSumModel::exponential(w).unwrap()).unwrap()
    }

    #[test]
    fn hypoexponential_pair() {
        let d = pfd(&[2.0, 1.0]);
        for &t in &[0.1f64, 1.0, 3.7] {
            let want = (-t / 2.0).exp() - (-t).exp();
            assert!((d.density(t) - want).abs() < 1e-15);
        }
        assert!((d.density(1.0) - 0.238_651_218_541_191_07).abs() < 1e-15);
        assert_eq!(d.density(-1.0), 0.0);
        let (m2, e2) = d.abs_power_moment(2.0).unwrap();
        assert!((m2 - 14.0).abs() < 1e-12 && e2 < 1e-12);
        let (m3, _) = d.abs_power_moment(3.0).unwrap();
        assert!((m3 - 90.0).abs() < 1e-11);
    }

    #[test]
    fn laplace() {
        let d = pfd(&[1.0, -1.0]);
        let mut coefs: Vec<(f64, f64)> = d.terms.iter().map(|t| (t.scale, t.coefficient)).collect();
        coefs.sort_by(|a, b| a.0.total_cmp(&b.0));
        assert_eq!(coefs.len(), 2);
        assert!((coefs[0].1 - 0.5).abs() < 1e-15 && (coefs[1].1 - 0.5).abs() < 1e-15);
        assert_eq!(d.density(0.0), 0.5);
        assert!((d.density(-2.0) - 0.5 * (-2.0f64).exp()).abs() < 1e-16);
        let (m1, _) = d.abs_power_moment(1.0).unwrap();
        assert!((m1 - 1.0).abs() < 1e-15);
        let (s, _) = d.signed_power_moment(1.3).unwrap();
        assert!(s.abs() < 1e-15);
    }

    #[test]
    fn merged_equal_weights_give_erlang() {
        let d = pfd(&[1.0, 1.0]);
        assert_eq!(d.terms.len(), 2);
        for &t in &[0.2f64, 1.0, 5.0] {
            assert!((d.density(t) - t * (-t).exp()).abs() < 1e-15);
        }
        let d = PartialFractionDensity::new(&GammaSumModel::gamma(&[1.0, 1.0], &[2.0, 1.0]).unwrap()).unwrap();
        assert!((d.density(2.0) - 2.0 * (-2.0f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn shifted_exponential_density_at_one() {
        assert!((pfd(&[1.0]).density(1.0) - 1.0 / E).abs() < 1e-16);
    }

    #[test]
    fn guards() {
        let e = PartialFractionDensity::new(&GammaSumModel::exponential(&[1.0, 1.0 + 1e-12]).unwrap()).unwrap_err();
        assert!(matches!(e, Error::NearCoincident { .. }), "{e}");
        assert!(e.to_string().contains("merge or perturb"));
        assert!(PartialFractionDensity::new(&GammaSumModel::exponential(&[1.0, 0.0]).unwrap()).is_err());
        let e = PartialFractionDensity::new(&GammaSumModel::gamma(&[1.0], &[0.5]).unwrap()).unwrap_err();
        assert!(matches!(e, Error::EngineUnavailable { .. }));
        assert!(pfd(&[1.0]).abs_power_moment(-1.0).is_err());
    }

    #[test]
    fn mass_and_moments_with_mixed_orders() {
        let m = GammaSumModel::gamma(&[0.5, -1.25, 2.0], &[2.0, 1.0, 3.0]).unwrap();
        let d = PartialFractionDensity::new(&m).unwrap();
        assert!((d.total_mass() - 1.0).abs() < 1e-13);
        let (mean, var) = m.mean_variance();
        let (m2, _) = d.abs_power_moment(2.0).unwrap();
        assert!((m2 - (var + mean * mean)).abs() < 1e-12 * m2);
        let (m1s, _) = d.signed_power_moment(1.0).unwrap();
        assert!((m1s - mean).abs() < 1e-12);
    }

    #[test]
    fn merging_close_weights() {
        let m = GammaSumModel::exponential(&[1.0, 1.0 + 1e-13, -2.0]).unwrap();
        let merged = merge_close_weights(&m, 1e-9).unwrap();
        assert_eq!(merged.len(), 2);
        assert_eq!(merged.shapes(), &[1.0, 2.0]);
        assert!(PartialFractionDensity::new(&merged).is_ok());
    }
}
