use brl_core::asymptotics::{
    d_monotonicity_scan, ef_residual, ef_transform, kelvin_profile, minimal_rate,
    nonminimal_diagnostics,
};
use brl_core::params::{derive_constants, Parameters};
use brl_core::radial_ode::{integrate_state, singular_state, IntegrateOptions};
use brl_core::shooting::{find_b_tilde, nonminimal_solution, ShootingConfig};

fn pr(n: u32, p: f64) -> Parameters {
    Parameters::new(n, p).unwrap()
}

#[test]
fn singular_shadow_has_flat_kelvin_profile() {
    let params = pr(5, 2.0);
    let dc = derive_constants(&params).unwrap();
    let start = singular_state(&params, 1.0).unwrap();
    let traj = integrate_state(&params, start, dc.l, 10.0, 1e-10, &IntegrateOptions::default()).unwrap();
    for (_, v) in kelvin_profile(&traj, &dc).unwrap() {
        assert!(v.abs() < 1e-4 * dc.l);
    }
}

#[test]
fn kelvin_and_emden_fowler_agree() {
    let params = pr(5, 2.0);
    let dc = derive_constants(&params).unwrap();
    let res = find_b_tilde(1.0, &params, &ShootingConfig::default()).unwrap();
    let k = kelvin_profile(&res.minimal_traj, &dc).unwrap();
    let mut e = ef_transform(&res.minimal_traj, dc.alpha).unwrap();
    e.reverse();
    assert_eq!(k.len(), e.len());
    for ((s, kv), (t, ev)) in k.iter().zip(&e) {
        assert!((s - (-t).exp()).abs() <= 1e-12 * s);
        assert!((kv - ev).abs() <= 1e-12);
    }
    // m → 0 along the minimal proxy
    let tail: Vec<f64> = e.iter().filter(|(t, _)| *t > 5.0).map(|p| p.1.abs()).collect();
    assert!(tail.iter().all(|m| *m < 1e-2));
}

#[test]
fn nonminimal_profile_diverges() {
    let params = pr(5, 2.0);
    let dc = derive_constants(&params).unwrap();
    let traj = nonminimal_solution(1.0, 4.0, &params, &ShootingConfig::default()).unwrap();
    let k = kelvin_profile(&traj, &dc).unwrap();
    let fit = brl_core::asymptotics::fit_decay_exponent(&k, (1.0 / 500.0, 1.0 / 50.0), false).unwrap();
    assert!((fit.exponent - (dc.alpha - 2.0)).abs() < 0.05, "{fit:?}");
}

#[test]
fn emden_fowler_residual_is_small() {
    let params = pr(5, 2.0);
    let res = find_b_tilde(1.0, &params, &ShootingConfig::precise()).unwrap();
    let m: Vec<(f64, f64)> = ef_transform(&res.minimal_traj, params.alpha())
        .unwrap()
        .into_iter()
        .filter(|(t, _)| (2.0..=5.0).contains(t))
        .collect();
    assert!(ef_residual(&m, &params).unwrap() < 0.05);
}

#[test]
fn complex_branch_rate() {
    let params = pr(10, 5.0);
    let res = find_b_tilde(1.0, &params, &ShootingConfig::precise()).unwrap();
    let rep = minimal_rate(&res.minimal_traj, (50.0, 500.0)).unwrap();
    assert!((rep.fitted_exponent - rep.prediction.exponent).abs() < 0.3, "{rep:?}");
    assert!(rep.oscillation_fit.unwrap().q > 0.5);
}

#[test]
fn quadratic_regime_diagnostics() {
    let params = pr(6, 3.0);
    let bt = find_b_tilde(1.0, &params, &ShootingConfig::default()).unwrap().b_hi;
    let cfg = ShootingConfig { r_max: 1000.0, ..ShootingConfig::precise() };
    let traj = nonminimal_solution(1.0, 2.0 * bt, &params, &cfg).unwrap();
    let d = nonminimal_diagnostics(&traj, &params).unwrap();
    assert!(d.d_from_laplacian > 0.0);
    assert!(d.d_relative_gap() < 0.02);
    assert!((d.kappa() - d.kappa_predicted).abs() < 0.5);
    let json = serde_json::to_value(d).unwrap();
    assert_eq!(json["kappa_fitted"]["window"].as_array().unwrap().len(), 2);
}

#[test]
fn scan_single_point() {
    let params = pr(5, 2.0);
    let out = d_monotonicity_scan(1.0, &params, &[5.0], &ShootingConfig::default()).unwrap();
    assert_eq!(out.len(), 1);
    assert!(out[0].1 > 0.0);
    let err = d_monotonicity_scan(1.0, &params, &[0.5], &ShootingConfig::default()).unwrap_err();
    assert_eq!(err.kind(), "NotAboveCritical");
}
