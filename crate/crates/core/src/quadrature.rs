//! Globally adaptive Gauss–Kronrod integration on finite, semi-infinite and
//! doubly infinite intervals.
//!
//! The interval is cut at every caller-declared singular point. Segments
//! touching a singular point are remapped by `t = c ± L e^{-w}`, `w = u/(1-u)`,
//! which turns an integrable power singularity `|t-c|^{α}` (α > −1) into an
//! exponentially decaying integrand in `w`. Infinite ends are remapped by
//! `t = A ± S (e^{w} − 1)`. All pieces share one priority queue keyed on their
//! error estimate, so refinement effort goes wherever the error is.
//!
//! Precision caveat: the graded map resolves `t − c` only to the relative
//! precision of `c`. Integrands with a strong singularity at a point far from
//! the origin should be reparametrised by the caller first (the shifted-moment
//! path in the engines does this).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    /// Maximum bisection depth of any single piece.
    pub max_depth: u32,
    /// Length of the finite stretch kept before an infinite end is remapped;
    /// also the scale of the tail map.
    pub tail_threshold: f64,
    /// Hard cap on the number of pieces alive at once.
    pub max_pieces: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        QuadratureConfig {
            rel_tol: 1e-10,
            abs_tol: 1e-14,
            max_depth: 60,
            tail_threshold: 1e3,
            max_pieces: 20_000,
        }
    }
}

impl QuadratureConfig {
    pub fn with_tol(mut self, rel_tol: f64, abs_tol: f64) -> Self {
        self.rel_tol = rel_tol;
        self.abs_tol = abs_tol;
        self
    }

    pub fn with_tail_threshold(mut self, t: f64) -> Self {
        self.tail_threshold = t;
        self
    }

    fn validate(&self) -> Result<()> {
        if !(self.rel_tol > 0.0 && self.abs_tol > 0.0) || self.max_depth < 10 || !(self.tail_threshold > 0.0) {
            return Err(Error::Domain(format!("invalid quadrature configuration {self:?}")));
        }
        Ok(())
    }
}

/// Value of an integral with its estimated absolute error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error: f64,
    pub evaluations: usize,
}

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

struct Rule {
    value: f64,
    error: f64,
    /// Error estimate sits at the roundoff floor; bisecting will not help.
    at_floor: bool,
}

fn qk21<G: Fn(f64) -> f64>(g: &G, lo: f64, hi: f64) -> Rule {
    let center = 0.5 * (lo + hi);
    let half = 0.5 * (hi - lo);
    let fc = g(center);
    let mut res_g = 0.0;
    let mut res_k = WGK[10] * fc;
    let mut res_abs = res_k.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let dx = half * XGK[j];
        let f1 = g(center - dx);
        let f2 = g(center + dx);
        fv1[j] = f1;
        fv2[j] = f2;
        res_k += WGK[j] * (f1 + f2);
        res_abs += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            res_g += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * res_k;
    let mut res_asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        res_asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = res_k * half;
    let res_abs = res_abs * half.abs();
    let res_asc = res_asc * half.abs();
    let mut error = ((res_k - res_g) * half).abs();
    if res_asc != 0.0 && error != 0.0 {
        error = res_asc * (200.0 * error / res_asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * res_abs;
    let at_floor = floor > f64::MIN_POSITIVE && error <= floor;
    if at_floor {
        error = floor;
    }
    Rule { value, error, at_floor }
}

#[derive(Debug, Clone, Copy)]
enum Map {
    /// `t = u`.
    Identity,
    /// `t = c + sign·len·e^{-w}`, `w = u/(1-u)`, `u ∈ [0,1)`.
    Graded { c: f64, len: f64, sign: f64 },
    /// `t = a + sign·s·(e^{w} − 1)`, `w = u/(1-u)`, `u ∈ [0,1)`.
    Tail { a: f64, s: f64, sign: f64 },
}

impl Map {
    fn domain(&self, lo: f64, hi: f64) -> (f64, f64) {
        match self {
            Map::Identity => (lo, hi),
            _ => (0.0, 1.0),
        }
    }

    /// Evaluates `f(t(u)) t'(u)`; points that map outside the representable
    /// range or onto a collapsed Jacobian contribute zero.
    fn eval<F: Fn(f64) -> f64>(&self, f: &F, u: f64) -> f64 {
        match *self {
            Map::Identity => f(u),
            Map::Graded { c, len, sign } => {
                let v = 1.0 - u;
                let w = u / v;
                let d = len * (-w).exp();
                let jac = d / (v * v);
                if jac == 0.0 || !jac.is_finite() {
                    return 0.0;
                }
                let t = c + sign * d;
                if t == c {
                    return 0.0;
                }
                f(t) * jac
            }
            Map::Tail { a, s, sign } => {
                let v = 1.0 - u;
                let w = u / v;
                let ew = w.exp();
                let t = a + sign * s * (ew - 1.0);
                let jac = s * ew / (v * v);
                if !t.is_finite() || !jac.is_finite() || jac == 0.0 {
                    return 0.0;
                }
                let y = f(t);
                if y == 0.0 {
                    0.0
                } else {
                    y * jac
                }
            }
        }
    }
}

struct Piece {
    seg: usize,
    lo: f64,
    hi: f64,
    depth: u32,
    value: f64,
    error: f64,
    at_floor: bool,
}

impl PartialEq for Piece {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}
impl Eq for Piece {}
impl PartialOrd for Piece {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Piece {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn segments(a: f64, b: f64, cfg: &QuadratureConfig, singular: &[f64]) -> Vec<(Map, f64, f64)> {
    let is_singular = |t: f64| singular.iter().any(|&s| s == t);
    let mut cuts: Vec<f64> = singular.iter().copied().filter(|&s| s > a && s < b && s.is_finite()).collect();
    cuts.sort_by(f64::total_cmp);
    cuts.dedup();

    let mut segs = Vec::new();
    let thr = cfg.tail_threshold;
    let mut pts = Vec::with_capacity(cuts.len() + 4);
    if a == f64::NEG_INFINITY {
        let first = cuts.first().copied().unwrap_or(if b.is_finite() { b } else { 0.0 });
        let start = first - thr;
        segs.push((Map::Tail { a: start, s: thr, sign: -1.0 }, 0.0, 1.0));
        pts.push(start);
    } else {
        pts.push(a);
    }
    pts.extend(cuts.iter().copied());
    let tail_end = if b == f64::INFINITY {
        let last = *pts.last().unwrap_or(&0.0);
        let end = last + thr;
        pts.push(end);
        Some(end)
    } else {
        if *pts.last().unwrap() != b {
            pts.push(b);
        }
        None
    };

    for w in pts.windows(2) {
        let (l, r) = (w[0], w[1]);
        if r <= l {
            continue;
        }
        match (is_singular(l), is_singular(r)) {
            (false, false) => segs.push((Map::Identity, l, r)),
            (true, false) => segs.push((Map::Graded { c: l, len: r - l, sign: 1.0 }, 0.0, 1.0)),
            (false, true) => segs.push((Map::Graded { c: r, len: r - l, sign: -1.0 }, 0.0, 1.0)),
            (true, true) => {
                let mid = 0.5 * (l + r);
                let half = mid - l;
                segs.push((Map::Graded { c: l, len: half, sign: 1.0 }, 0.0, 1.0));
                segs.push((Map::Graded { c: r, len: r - mid, sign: -1.0 }, 0.0, 1.0));
            }
        }
    }
    if let Some(end) = tail_end {
        segs.push((Map::Tail { a: end, s: thr, sign: 1.0 }, 0.0, 1.0));
    }
    segs
}

/// `∫_a^b f(t) dt` with `a` possibly `−∞` and `b` possibly `+∞`.
///
/// `singular` lists points where `f` may blow up (integrably) or lose
/// smoothness; those inside `[a, b]` become breakpoints with graded meshes.
/// Nodes are passed to `f` as absolute abscissae, so a blow-up at `c ≠ 0` is
/// only resolved down to the float spacing near `c`; for `|t − c|^{−α}` that
/// drops about `ulp(c)^{1−α}` of mass. Strong singularities belong at 0.
/// Fails with [`Error::NonConvergence`] when the tolerance is out of reach
/// within the depth and piece budgets; the error carries the best estimate.
pub fn integrate<F>(f: F, a: f64, b: f64, cfg: &QuadratureConfig, singular: &[f64]) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    cfg.validate()?;
    if a.is_nan() || b.is_nan() || a == f64::INFINITY || b == f64::NEG_INFINITY {
        return Err(Error::Domain(format!("invalid integration range [{a}, {b}]")));
    }
    if a > b {
        let r = integrate(f, b, a, cfg, singular)?;
        return Ok(Integral { value: -r.value, ..r });
    }
    if a == b {
        return Ok(Integral { value: 0.0, error: 0.0, evaluations: 0 });
    }

    let segs = segments(a, b, cfg, singular);
    let mut heap = BinaryHeap::new();
    let mut frozen: Vec<Piece> = Vec::new();
    let mut evaluations = 0usize;
    let eval_piece = |seg: usize, lo: f64, hi: f64, depth: u32| {
        let map = segs[seg].0;
        let rule = qk21(&|u| map.eval(&f, u), lo, hi);
        Piece { seg, lo, hi, depth, value: rule.value, error: rule.error, at_floor: rule.at_floor }
    };
    for (i, (map, lo, hi)) in segs.iter().enumerate() {
        let (lo, hi) = map.domain(*lo, *hi);
        heap.push(eval_piece(i, lo, hi, 0));
        evaluations += 21;
    }

    // Running sums are refreshed exactly every so often to contain drift.
    let exact_totals = |heap: &BinaryHeap<Piece>, frozen: &[Piece]| {
        heap.iter().chain(frozen.iter()).fold((0.0, 0.0), |(v, e), p| (v + p.value, e + p.error))
    };
    let (mut value, mut error) = exact_totals(&heap, &frozen);
    let mut exhausted = false;
    let mut step = 0usize;
    loop {
        step += 1;
        if step % 256 == 0 {
            (value, error) = exact_totals(&heap, &frozen);
        }
        if !value.is_finite() || !error.is_finite() {
            return Err(Error::NonConvergence { value, error });
        }
        let target = cfg.abs_tol.max(cfg.rel_tol * value.abs());
        if error <= target {
            let (value, error) = exact_totals(&heap, &frozen);
            return Ok(Integral { value, error, evaluations });
        }
        let Some(worst) = heap.pop() else {
            // Everything left is either at the roundoff floor or too deep.
            let (value, error) = exact_totals(&heap, &frozen);
            if exhausted {
                return Err(Error::NonConvergence { value, error });
            }
            return Ok(Integral { value, error, evaluations });
        };
        if worst.at_floor {
            frozen.push(worst);
            continue;
        }
        let mid = 0.5 * (worst.lo + worst.hi);
        if worst.depth >= cfg.max_depth
            || heap.len() + frozen.len() + 2 > cfg.max_pieces
            || mid <= worst.lo
            || mid >= worst.hi
        {
            exhausted = true;
            frozen.push(worst);
            continue;
        }
        let left = eval_piece(worst.seg, worst.lo, mid, worst.depth + 1);
        let right = eval_piece(worst.seg, mid, worst.hi, worst.depth + 1);
        evaluations += 42;
        value += left.value + right.value - worst.value;
        error += left.error + right.error - worst.error;
        heap.push(left);
        heap.push(right);
    }
}

/// Like [`integrate`], but accepts a non-converged result whose achieved error
/// is still below `accept_error`. Callers use this where a looser result is
/// preferable to no result and the error is propagated anyway.
pub fn integrate_lenient<F>(
    f: F,
    a: f64,
    b: f64,
    cfg: &QuadratureConfig,
    singular: &[f64],
    accept_error: f64,
) -> Result<Integral>
where
    F: Fn(f64) -> f64,
{
    match integrate(f, a, b, cfg, singular) {
        Err(Error::NonConvergence { value, error }) if error <= accept_error => {
            Ok(Integral { value, error, evaluations: 0 })
        }
        other => other,
    }
}
