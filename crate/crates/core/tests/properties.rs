use brl_core::asymptotics::{
    fit_decay_exponent, predicted_minimal_remainder, sharp_minimal_remainder, RemainderBranch,
};
use brl_core::charpoly::{decaying_exponents, mean_roots_closed, solve_quartic, Quartic};
use brl_core::params::{
    admissible, classify_beta_branch, derive_constants, mean_discriminant, singular_coefficient,
    BetaBranch, Parameters,
};
use brl_core::spectra::{eigenvalue_exact, multiplicity};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn admissible_params() -> impl Strategy<Value = Parameters> {
    (3u32..=20, 0.0f64..1.0).prop_filter_map("inadmissible", |(n, t)| {
        let p = if n == 3 { 1.0 + 2.0 * t } else { 1.0 + 60.0 * t * t };
        let params = Parameters::raw(n, p);
        admissible(&params).then_some(params)
    })
}

proptest! {
    #[test]
    fn singular_coefficient_identity(params in admissible_params()) {
        let dc = derive_constants(&params).unwrap();
        let lhs = dc.l.powf(-(params.p + 1.0));
        let rhs = singular_coefficient(&params);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.abs());
    }

    #[test]
    fn alpha_range(params in admissible_params()) {
        let a = params.alpha();
        if params.n == 3 {
            prop_assert!(a > 1.0 && a < 2.0);
        } else {
            prop_assert!(a > 0.0 && a < 2.0);
        }
    }

    #[test]
    fn branch_follows_discriminant_sign(params in admissible_params()) {
        let h = mean_discriminant(&params);
        prop_assume!(h.abs() > 1e-9);
        let complex = classify_beta_branch(&params).unwrap().is_complex();
        prop_assert_eq!(complex, h < 0.0);
    }

    #[test]
    fn remainder_selection_is_coherent(params in admissible_params()) {
        prop_assume!(mean_discriminant(&params).abs() > 1e-6);
        let dc = derive_constants(&params).unwrap();
        let pred = predicted_minimal_remainder(&params, &dc).unwrap();
        let slowest = decaying_exponents(&mean_roots_closed(&params).unwrap())[0];
        prop_assert!((pred.sharp_exponent - dc.alpha - slowest.re).abs() < 1e-10);
        match (pred.branch, classify_beta_branch(&params).unwrap()) {
            (RemainderBranch::Complex, BetaBranch::ComplexPair { ell, .. }) => {
                prop_assert!((pred.exponent - dc.alpha - ell).abs() < 1e-10);
            }
            (RemainderBranch::RealBeta3, _) => {
                prop_assert_eq!(params.n, 3);
                prop_assert!((pred.exponent - pred.sharp_exponent).abs() < 1e-10);
            }
            (RemainderBranch::Real, b) => {
                prop_assert!(!b.is_complex());
                prop_assert!(pred.exponent >= pred.sharp_exponent - 1e-10);
            }
            (branch, beta) => prop_assert!(false, "{:?} with {:?}", branch, beta),
        }
        prop_assert!((sharp_minimal_remainder(&params).unwrap() - pred.sharp_exponent).abs() == 0.0);
    }

    #[test]
    fn eigenvalue_gaps(n in 3i64..40, k in 0i64..500) {
        let gap = eigenvalue_exact(k + 1, n).unwrap() - eigenvalue_exact(k, n).unwrap();
        prop_assert_eq!(gap as i64, n + 2 * k - 1);
    }

    #[test]
    fn first_multiplicity_is_dimension(n in 3i64..200) {
        prop_assert_eq!(multiplicity(1, n).unwrap(), n as u128);
        prop_assert_eq!(multiplicity(0, n).unwrap(), 1);
    }

    #[test]
    fn vieta_relations(r in prop::array::uniform4(-20.0f64..20.0)) {
        let q = Quartic::from_roots(r);
        let rs = solve_quartic(&q).unwrap();
        let sum: num_complex::Complex64 = rs.roots.iter().sum();
        let prod: num_complex::Complex64 = rs.roots.iter().product();
        let scale_sum = r.iter().map(|x| x.abs()).sum::<f64>().max(1.0);
        let scale_prod = r.iter().map(|x| x.abs().max(1.0)).product::<f64>();
        prop_assert!((sum.re + q.c3).abs() <= 1e-10 * scale_sum);
        prop_assert!((prod.re - q.c0).abs() <= 1e-10 * scale_prod);
    }

    #[test]
    fn conjugate_pairs(re in -5.0f64..5.0, im in 0.1f64..5.0, r1 in -5.0f64..5.0, r2 in -5.0f64..5.0) {
        // (z² - 2re z + re² + im²)(z - r1)(z - r2)
        let (a1, a0) = (-2.0 * re, re * re + im * im);
        let (b1, b0) = (-(r1 + r2), r1 * r2);
        let q = Quartic::monic(a1 + b1, a0 + a1 * b1 + b0, a0 * b1 + a1 * b0, a0 * b0);
        let rs = solve_quartic(&q).unwrap();
        let complex: Vec<_> = rs.roots.iter().filter(|z| z.im != 0.0).collect();
        prop_assert_eq!(complex.len(), 2);
        prop_assert_eq!(complex[0].re, complex[1].re);
        prop_assert_eq!(complex[0].im, -complex[1].im);
    }

    #[test]
    fn noiseless_power_recovered(e in -4.0f64..4.0, amp in 0.01f64..100.0) {
        let s: Vec<(f64, f64)> = (0..50)
            .map(|j| {
                let x = 10f64.powf(j as f64 / 49.0 * 2.0);
                (x, amp * x.powf(e))
            })
            .collect();
        let f = fit_decay_exponent(&s, (1.0, 100.0), false).unwrap();
        prop_assert!((f.exponent - e).abs() < 1e-10);
    }

    #[test]
    fn noisy_power_recovered(e in -4.0f64..4.0, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let s: Vec<(f64, f64)> = (0..200)
            .map(|j| {
                let x = 10f64.powf(j as f64 / 199.0 * 2.0);
                (x, x.powf(e) * (1.0 + 0.01 * rng.random_range(-1.0..1.0)))
            })
            .collect();
        let f = fit_decay_exponent(&s, (1.0, 100.0), false).unwrap();
        prop_assert!((f.exponent - e).abs() < 0.05);
    }
}

#[test]
fn n3_multiplicities() {
    for k in 0..=50 {
        assert_eq!(multiplicity(k, 3).unwrap(), (2 * k + 1) as u128);
    }
}

#[test]
fn weighted_multiplicity_ratio_tends_to_one() {
    for n in 3..=10 {
        for k in 200..260 {
            let a = (k + 1) as f64 * multiplicity(k + 1, n).unwrap() as f64;
            let b = k as f64 * multiplicity(k, n).unwrap() as f64;
            let ratio = a / b;
            assert!(ratio > 0.9 && ratio < 1.1, "N={n} k={k} ratio={ratio}");
        }
    }
}

#[test]
fn n3_sign_table() {
    let p3 = derive_constants(&Parameters::raw(3, 2.0)).unwrap().p3.unwrap();
    for j in 1..200 {
        let p = 1.0 + 2.0 * j as f64 / 200.0;
        let params = Parameters::raw(3, p);
        if !admissible(&params) || (p - p3[0]).abs() < 1e-9 || (p - p3[1]).abs() < 1e-9 {
            continue;
        }
        let complex = classify_beta_branch(&params).unwrap().is_complex();
        assert_eq!(complex, p > p3[0] && p < p3[1], "p = {p}");
    }
}
