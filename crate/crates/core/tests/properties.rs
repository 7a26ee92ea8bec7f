use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;

use expmoments_core::engines::{moment, moment_with, Engine, EngineConfig};
use expmoments_core::model::{chs, even_moment_exact, GammaSumModel, MomentQuery};
use expmoments_core::schur::{claim_inequality_check, majorizes, ostrowski_differential, q_k, t_transform};
use expmoments_core::specialfn::{closed_integral_iqs, gamma, gaussian_abs_moment, psi, ratio_r};
use expmoments_core::ExecMode;

fn weights(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(prop_oneof![0.05..1.0f64, -1.0..-0.05f64], n)
}

fn separated(x: &[f64]) -> bool {
    x.iter().enumerate().all(|(i, a)| x[i + 1..].iter().all(|b| (a - b).abs() > 0.02))
}

fn rationals(n: std::ops::RangeInclusive<usize>) -> impl Strategy<Value = Vec<BigRational>> {
    prop::collection::vec((-30i64..=30, 1i64..=15), n)
        .prop_map(|v| v.into_iter().map(|(a, b)| BigRational::new(BigInt::from(a), BigInt::from(b))).collect())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(256))]

    #[test]
    fn t_transform_is_majorized(x in prop::collection::vec(-5.0..5.0f64, 2..8), lambda in 0.0..=1.0f64, a in 0usize..8, b in 0usize..8) {
        let n = x.len();
        let (i, j) = (a % n, b % n);
        prop_assume!(i != j);
        let y = t_transform(&x, i, j, lambda).unwrap();
        prop_assert!(majorizes(&x, &y, 1e-12));
        let (sx, sy): (f64, f64) = (x.iter().sum(), y.iter().sum());
        prop_assert!((sx - sy).abs() <= 1e-12 * (1.0 + sx.abs()));
    }

    #[test]
    fn chs_sign_symmetry(x in rationals(1..=6), ell in 0usize..9) {
        let neg: Vec<BigRational> = x.iter().map(|v| -v.clone()).collect();
        let h = chs(&x, ell);
        let want = if ell % 2 == 0 { h } else { -h };
        prop_assert_eq!(chs(&neg, ell), want);
    }

    #[test]
    fn second_moment_expansion(x in rationals(1..=6)) {
        // E S^2 = Σx² + (Σx)²
        let sum: BigRational = x.iter().sum();
        let sq: BigRational = x.iter().map(|v| v * v).sum();
        prop_assert_eq!(even_moment_exact(&x, 2).unwrap(), sq + &sum * &sum);
    }

    #[test]
    fn gaussian_recurrence_and_duplication(p in 1.0001..30.0f64, r in -0.99..20.0f64) {
        let lhs = (p - 1.0) * gaussian_abs_moment(p - 2.0).unwrap();
        let rhs = gaussian_abs_moment(p).unwrap();
        prop_assert!(((lhs - rhs) / rhs).abs() < 1e-12);
        let dup = 2f64.powf(r / 2.0) * gamma(r / 2.0 + 1.0) * gaussian_abs_moment(r).unwrap();
        prop_assert!(((dup - gamma(r + 1.0)) / gamma(r + 1.0)).abs() < 1e-12);
    }

    #[test]
    fn psi_and_ratio_decrease(beta in 0.05..5.0f64, x in 0.01..5e3f64, step in 1.001..3.0f64) {
        let y = x * step;
        prop_assert!(psi(beta, y).unwrap() < psi(beta, x).unwrap());
        prop_assert!(ratio_r(beta, y).unwrap() < ratio_r(beta, x).unwrap());
        prop_assert!(psi(beta, x).unwrap() > 1.0);
    }

    #[test]
    fn integral_decreases_in_s(q in 0.05..1.95f64, s in 0.05..500.0f64, step in 1.01..4.0f64) {
        prop_assert!(closed_integral_iqs(q, s * step).unwrap() < closed_integral_iqs(q, s).unwrap());
    }

    #[test]
    fn q_k_is_positive(k in 0u32..=6, t in 1e-6..50.0f64) {
        prop_assert!(q_k(k, t).unwrap() > 0.0);
    }

    #[test]
    fn claim_holds(b in prop::collection::vec(1e-6..3.0f64, 2..=6)) {
        prop_assert!(claim_inequality_check(&b).unwrap());
    }

    #[test]
    fn norms_increase_with_p(x in weights(1..=4), p in 0.3..5.0f64, dp in 0.05..1.5f64) {
        prop_assume!(separated(&x));
        let m = GammaSumModel::exponential(&x).unwrap();
        let a = moment(&m, &MomentQuery::abs(p).unwrap(), Some(Engine::Density)).unwrap();
        let b = moment(&m, &MomentQuery::abs(p + dp).unwrap(), Some(Engine::Density)).unwrap();
        let (na, nb) = (a.value.powf(1.0 / p), b.value.powf(1.0 / (p + dp)));
        prop_assert!(nb >= na * (1.0 - 1e-10), "{na} {nb}");
    }

    #[test]
    fn charfn_modulus_bound(x in weights(1..=6), t in -40.0..40.0f64) {
        // Y = S + x1 E + x2 E' for a unit vector with x1 = max |x_j|
        let norm = x.iter().map(|w| w * w).sum::<f64>().sqrt();
        let mut unit: Vec<f64> = x.iter().map(|v| v / norm).collect();
        unit.sort_by(|a, b| b.abs().total_cmp(&a.abs()));
        let u1 = unit[0].abs();
        let u2 = unit.get(1).copied().unwrap_or(0.0);
        let s = u1.powi(-2);
        let mut y = GammaSumModel::exponential(&unit).unwrap().with_extra(unit[0], 1.0).unwrap();
        if u2 != 0.0 {
            y = y.with_extra(u2, 1.0).unwrap();
        }
        let phi = y.charfn(t);
        let bound = (1.0 + u1 * u1 * t * t).powf(-(1.0 + s) / 2.0);
        prop_assert!(phi.re <= phi.norm() + 1e-15);
        prop_assert!(phi.norm() <= bound * (1.0 + 1e-12), "{} > {bound}", phi.norm());
    }

    #[test]
    fn model_literal_round_trip(x in prop::collection::vec(-1e3..1e3f64, 1..6), shapes in prop::collection::vec(1u32..5, 6)) {
        prop_assume!(x.iter().all(|v| *v != 0.0));
        let g: Vec<f64> = shapes[..x.len()].iter().map(|s| f64::from(*s)).collect();
        let m = GammaSumModel::gamma(&x, &g).unwrap();
        let back: GammaSumModel = m.to_string().parse().unwrap();
        prop_assert_eq!(back.weights(), m.weights());
        prop_assert_eq!(back.shapes(), m.shapes());
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn monte_carlo_mode_independent(x in weights(1..=3), p in 0.5..4.0f64, seed in any::<u64>()) {
        let m = GammaSumModel::exponential(&x).unwrap();
        let q = MomentQuery::abs(p).unwrap();
        let cfg = EngineConfig::default().with_seed(seed).with_samples(20_000);
        let a = moment_with(&m, &q, Some(Engine::MonteCarlo), &cfg.with_mode(ExecMode::Parallel)).unwrap();
        let b = moment_with(&m, &q, Some(Engine::MonteCarlo), &cfg.with_mode(ExecMode::Sequential)).unwrap();
        prop_assert_eq!(a.value.to_bits(), b.value.to_bits());
        prop_assert_eq!(a.error.to_bits(), b.error.to_bits());
    }
}

/// Ostrowski differentials are `≤ 0` whenever `x_i > x_j`, on 10⁴ vectors.
#[test]
fn ostrowski_sign_on_random_vectors() {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let n = rng.random_range(2..=6);
        let scale = 10f64.powf(rng.random_range(-2.0..1.0));
        let x: Vec<f64> = (0..n).map(|_| scale * (rng.random::<f64>() + 1e-3)).collect();
        let i = rng.random_range(0..n);
        let j = (i + rng.random_range(1..n)) % n;
        let (i, j) = if x[i] > x[j] { (i, j) } else { (j, i) };
        for k in 0..=3 {
            let d = ostrowski_differential(&x, k, i, j).unwrap();
            let size = x.iter().sum::<f64>().powi(k as i32 + 1).max(1.0);
            worst = worst.max(d / size);
        }
    }
    assert!(worst <= 1e-12, "largest scaled differential {worst}");
}
