//! Randomized search for Schur-monotonicity of `M_p` along T-transforms.

use std::fmt;
use std::fmt::Write as _;

use rand::{Rng, RngCore};
use serde::Serialize;

use super::{m_p_with, t_transform};
use crate::engines::EngineConfig;
use crate::error::{Error, Result};
use crate::model::sampling::partition_rng;
use crate::par::{map_indexed, ExecMode};

/// Resamples allowed per trial when the weights collide.
const MAX_RESAMPLES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// `M_p(x) ≥ M_p(y)` whenever `x ≻ y`.
    Convex,
    /// `M_p(x) ≤ M_p(y)` whenever `x ≻ y`.
    Concave,
    /// Strict violations in both directions.
    Neither,
    /// Every comparison within the error budget.
    Inconclusive,
}

impl Verdict {
    pub fn name(self) -> &'static str {
        match self {
            Verdict::Convex => "convex",
            Verdict::Concave => "concave",
            Verdict::Neither => "neither",
            Verdict::Inconclusive => "inconclusive",
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// One trial: `x ≻ y` with both moments and their error bounds.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanRow {
    pub trial: usize,
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub mx: f64,
    pub my: f64,
    pub ex: f64,
    pub ey: f64,
    /// `+1` if the trial shows `M_p(x) > M_p(y)` beyond budget, `−1` for the
    /// reverse, `0` otherwise.
    pub direction: i8,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScanReport {
    pub p: f64,
    pub n: usize,
    pub trials: usize,
    pub seed: u64,
    pub verdict: Verdict,
    pub convex_hits: usize,
    pub concave_hits: usize,
    pub within_budget: usize,
    pub resamples: usize,
    /// Trials whose moments could not be computed.
    pub failures: usize,
    /// Largest-gap witness of each direction.
    pub convex_witness: Option<ScanRow>,
    pub concave_witness: Option<ScanRow>,
    pub rows: Vec<ScanRow>,
}

fn join(v: &[f64]) -> String {
    v.iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(";")
}

impl ScanReport {
    /// One line per trial; vectors are `;`-separated.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("trial,x,y,m_x,m_y,err_x,err_y,direction\n");
        for r in &self.rows {
            let _ = writeln!(
                out,
                "{},{},{},{:.17e},{:.17e},{:.3e},{:.3e},{}",
                r.trial,
                join(&r.x),
                join(&r.y),
                r.mx,
                r.my,
                r.ex,
                r.ey,
                r.direction
            );
        }
        out
    }
}

/// Draws `x` and a T-transform `(i, j, λ)`.
///
/// Trials rotate through three samplers: i.i.d. uniform entries, fourth
/// powers of uniforms (a few dominant coordinates), and a near two-point
/// vector whose other entries are below `10⁻²`.
fn draw_trial<R: RngCore>(rng: &mut R, n: usize, kind: usize) -> (Vec<f64>, usize, usize, f64) {
    let i = rng.random_range(0..n);
    let mut j = rng.random_range(0..n - 1);
    if j >= i {
        j += 1;
    }
    let x: Vec<f64> = match kind {
        0 => (0..n).map(|_| rng.random::<f64>() + 1e-3).collect(),
        1 => (0..n).map(|_| rng.random::<f64>().powi(4) + 1e-4).collect(),
        _ => (0..n)
            .map(|k| if k == i || k == j { rng.random::<f64>() + 0.05 } else { 1e-2 * rng.random::<f64>() + 1e-5 })
            .collect(),
    };
    let lambda = rng.random::<f64>();
    (x, i, j, lambda)
}

enum Outcome {
    Row(ScanRow, usize),
    Failed(usize),
}

fn run_trial(p: f64, n: usize, seed: u64, trial: usize, cfg: &EngineConfig) -> Outcome {
    let mut rng = partition_rng(seed, trial);
    for attempt in 0..MAX_RESAMPLES {
        let (x, i, j, lambda) = draw_trial(&mut rng, n, trial % 3);
        let y = match t_transform(&x, i, j, lambda) {
            Ok(y) => y,
            Err(_) => continue,
        };
        let (ex, ey) = match (m_p_with(&x, p, cfg), m_p_with(&y, p, cfg)) {
            (Ok(a), Ok(b)) => (a, b),
            (Err(Error::NearCoincident { .. }), _) | (_, Err(Error::NearCoincident { .. })) => continue,
            _ => return Outcome::Failed(attempt),
        };
        let budget = 3.0 * (ex.error + ey.error) + 1e-12 * ex.value.abs().max(ey.value.abs());
        let gap = ex.value - ey.value;
        let direction = if gap > budget {
            1
        } else if -gap > budget {
            -1
        } else {
            0
        };
        let row = ScanRow { trial, x, y, mx: ex.value, my: ey.value, ex: ex.error, ey: ey.error, direction };
        return Outcome::Row(row, attempt);
    }
    Outcome::Failed(MAX_RESAMPLES)
}

/// Scans `trials` random T-transform pairs in dimension `n ≥ 2`.
///
/// A pair counts toward a direction only when `|M_p(x) − M_p(y)|` exceeds three
/// times the combined engine error. Trial `i` draws from stream `i` of `seed`,
/// so the report does not depend on the execution mode.
pub fn schur_scan(p: f64, n: usize, trials: usize, seed: u64) -> Result<ScanReport> {
    schur_scan_with(p, n, trials, seed, ExecMode::default())
}

pub fn schur_scan_with(p: f64, n: usize, trials: usize, seed: u64, mode: ExecMode) -> Result<ScanReport> {
    if !(p > -1.0) || !p.is_finite() {
        return Err(Error::Domain(format!("schur_scan needs p > -1, got {p}")));
    }
    if n < 2 {
        return Err(Error::Domain(format!("schur_scan needs n >= 2, got {n}")));
    }
    // inner engines stay sequential; the fan-out is over trials
    let cfg = EngineConfig::default().with_seed(seed).with_samples(200_000).with_mode(ExecMode::Sequential);
    let outcomes = map_indexed(trials, mode, |t| run_trial(p, n, seed, t, &cfg));
    let mut report = ScanReport {
        p,
        n,
        trials,
        seed,
        verdict: Verdict::Inconclusive,
        convex_hits: 0,
        concave_hits: 0,
        within_budget: 0,
        resamples: 0,
        failures: 0,
        convex_witness: None,
        concave_witness: None,
        rows: Vec::with_capacity(trials),
    };
    for outcome in outcomes {
        match outcome {
            Outcome::Failed(r) => {
                report.failures += 1;
                report.resamples += r;
            }
            Outcome::Row(row, r) => {
                report.resamples += r;
                let gap = (row.mx - row.my).abs();
                let slot = match row.direction {
                    1 => {
                        report.convex_hits += 1;
                        Some(&mut report.convex_witness)
                    }
                    -1 => {
                        report.concave_hits += 1;
                        Some(&mut report.concave_witness)
                    }
                    _ => {
                        report.within_budget += 1;
                        None
                    }
                };
                if let Some(slot) = slot {
                    if slot.as_ref().is_none_or(|w| (w.mx - w.my).abs() < gap) {
                        *slot = Some(row.clone());
                    }
                }
                report.rows.push(row);
            }
        }
    }
    report.verdict = match (report.convex_hits > 0, report.concave_hits > 0) {
        (true, true) => Verdict::Neither,
        (true, false) => Verdict::Convex,
        (false, true) => Verdict::Concave,
        (false, false) => Verdict::Inconclusive,
    };
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::schur::m_p;

    #[test]
    fn quadratic_pair_goes_concave() {
        let x = [1.0, 0.0];
        let y = t_transform(&x, 0, 1, 0.5).unwrap();
        assert_eq!(m_p(&x, 2.0).unwrap().value, 2.0);
        assert!((m_p(&y, 2.0).unwrap().value - 3.0).abs() < 1e-15);
    }

    #[test]
    fn phase_verdicts_in_two_dimensions() {
        assert_eq!(schur_scan(-0.5, 2, 500, 1).unwrap().verdict, Verdict::Convex);
        assert_eq!(schur_scan(2.0, 2, 300, 1).unwrap().verdict, Verdict::Concave);
        assert_eq!(schur_scan(5.0, 2, 500, 1).unwrap().verdict, Verdict::Neither);
        assert_eq!(schur_scan(0.0, 2, 50, 1).unwrap().verdict, Verdict::Inconclusive);
    }

    #[test]
    fn modes_agree() {
        let a = schur_scan_with(1.5, 3, 60, 11, ExecMode::Parallel).unwrap();
        let b = schur_scan_with(1.5, 3, 60, 11, ExecMode::Sequential).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.to_csv().lines().count(), 61);
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(schur_scan(-1.0, 2, 10, 0).is_err());
        assert!(schur_scan(2.0, 1, 10, 0).is_err());
    }
}
