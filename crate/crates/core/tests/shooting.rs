use brl_core::params::Parameters;
use brl_core::shooting::{
    classify_b, find_b_tilde, find_b_tilde_many, find_b_tilde_many_seq, singular_ratio,
    Classification, ShootingConfig,
};

fn pr(n: u32, p: f64) -> Parameters {
    Parameters::new(n, p).unwrap()
}

#[test]
fn classification_is_monotone_in_b() {
    for (n, p) in [(5, 2.0), (4, 2.0), (13, 2.0), (3, 2.5)] {
        let params = pr(n, p);
        let bt = find_b_tilde(1.0, &params, &ShootingConfig::default()).unwrap().b_hi;
        let mut seen_survivor = false;
        for j in 0..=40 {
            let b = bt * (0.5 + j as f64 / 40.0);
            let (c, _) = classify_b(1.0, b, &params, 1e-10).unwrap();
            if c == Classification::Survives {
                seen_survivor = true;
            } else {
                assert!(!seen_survivor, "Extinct above a survivor at N={n} p={p} b={b}");
            }
        }
        assert!(seen_survivor);
    }
}

#[test]
fn critical_value_is_positive_and_bracketed() {
    let cfg = ShootingConfig::default();
    for (n, p, a) in [(5, 2.0, 1.0), (6, 3.0, 0.5), (3, 1.5, 2.0), (12, 9.0, 1.0), (20, 1.5, 1.0)] {
        let res = find_b_tilde(a, &pr(n, p), &cfg).unwrap();
        assert!(res.b_tilde_est > 0.0);
        assert!(res.b_lo < res.b_hi);
        assert!(res.relative_width() <= cfg.rel_tol);
        let (lo, _) = classify_b(a, res.b_lo, &pr(n, p), cfg.tol).unwrap();
        assert_eq!(lo, Classification::Extinct);
    }
}

#[test]
fn r_max_does_not_move_the_estimate() {
    let cfg = ShootingConfig::default();
    let doubled = ShootingConfig { r_max: 2.0 * cfg.r_max, ..cfg };
    for (n, p) in [(5, 2.0), (6, 3.0)] {
        let a = find_b_tilde(1.0, &pr(n, p), &cfg).unwrap();
        let b = find_b_tilde(1.0, &pr(n, p), &doubled).unwrap();
        let shift = (a.b_tilde_est - b.b_tilde_est).abs() / a.b_tilde_est;
        assert!(shift < 10.0 * cfg.rel_tol, "{shift:e}");
        assert_eq!(b.minimal_traj.r_end(), doubled.r_max);
    }
}

#[test]
fn minimal_proxy_tracks_singular_profile() {
    let res = find_b_tilde(1.0, &pr(5, 2.0), &ShootingConfig::default()).unwrap();
    let ratios = singular_ratio(&res.minimal_traj).unwrap();
    for (r, q) in ratios.iter().filter(|(r, _)| *r >= 50.0) {
        assert!((0.9..=1.1).contains(q), "r={r} ratio={q}");
    }
}

#[test]
fn scaling_law() {
    let cfg = ShootingConfig::default();
    let params = pr(5, 2.0);
    let alpha = params.alpha();
    let lambda = 2.0f64;
    let base = find_b_tilde(1.0, &params, &cfg).unwrap().b_tilde_est;
    let scaled = find_b_tilde(lambda.powf(-alpha), &params, &cfg).unwrap().b_tilde_est;
    let expected = lambda.powf(2.0 - alpha) * base;
    assert!((scaled - expected).abs() < 1e-4 * expected);
}

#[test]
fn batch_matches_sequential() {
    let cfg = ShootingConfig::default();
    let points: Vec<(f64, Parameters)> = [(5, 2.0), (6, 3.0), (4, 2.0), (7, 1.5)]
        .into_iter()
        .map(|(n, p)| (1.0, pr(n, p)))
        .collect();
    let par = find_b_tilde_many(&points, &cfg);
    let seq = find_b_tilde_many_seq(&points, &cfg);
    for (x, y) in par.iter().zip(&seq) {
        let (x, y) = (x.as_ref().unwrap(), y.as_ref().unwrap());
        assert_eq!(x.b_lo, y.b_lo);
        assert_eq!(x.b_hi, y.b_hi);
    }
}

#[test]
fn result_serialises_with_summary_fields() {
    let res = find_b_tilde(1.0, &pr(5, 2.0), &ShootingConfig::default()).unwrap();
    let v = serde_json::to_value(&res).unwrap();
    for key in ["a", "N", "p", "b_lo", "b_hi", "b_tilde_est", "r_max", "tol", "diagnostics"] {
        assert!(v.get(key).is_some(), "{key}");
    }
    assert!(v["diagnostics"]["ratio_at_rmax"].is_number());
    assert!(v["diagnostics"]["v_at_rmax"].is_number());
}
