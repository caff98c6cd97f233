use brl_core::charpoly::{
    match_roots, mode_quartic, mode_roots_closed, nonminimal_quartic, nonminimal_roots_closed,
    solve_quartic, verify_claims, NmFamily,
};
use brl_core::params::{admissible_p_grid, special_p_values, Parameters};

fn grid() -> Vec<(u32, f64)> {
    (3..=15)
        .flat_map(|n| admissible_p_grid(n, 20).into_iter().map(move |p| (n, p)))
        .collect()
}

#[test]
fn closed_forms_match_numeric_roots() {
    let mut worst = 0.0f64;
    for (n, p) in grid() {
        let params = Parameters::new(n, p).unwrap();
        for k in 0..=12 {
            let closed = mode_roots_closed(&params, k).unwrap();
            let q = mode_quartic(&params, k).unwrap();
            let numeric = solve_quartic(&q).unwrap();
            let m = match_roots(&closed.roots, &numeric.roots);
            let tol = if closed.degenerate || numeric.degenerate {
                1e-6
            } else {
                1e-9
            };
            assert!(
                m.max_distance <= tol,
                "N={n} p={p} k={k}: {}",
                m.max_distance
            );
            worst = worst.max(m.max_distance);
            for z in closed.roots {
                assert!(
                    q.eval(z).norm() <= 1e-9 * (1.0 + z.norm().powi(4)),
                    "N={n} p={p} k={k} z={z}"
                );
            }
        }
    }
    assert!(worst < 1e-9);
}

#[test]
fn vieta_and_conjugates() {
    for (n, p) in grid() {
        let params = Parameters::new(n, p).unwrap();
        for k in 0..=12 {
            let q = mode_quartic(&params, k).unwrap();
            let rs = mode_roots_closed(&params, k).unwrap();
            let sum: num_complex::Complex64 = rs.roots.iter().sum();
            let prod: num_complex::Complex64 = rs.roots.iter().product();
            assert!((sum.re + q.c3).abs() <= 1e-10 * q.c3.abs().max(1.0));
            assert!(sum.im.abs() <= 1e-12);
            assert!(
                (prod.re - q.c0).abs() <= 1e-10 * q.c0.abs().max(1.0),
                "N={n} p={p} k={k}"
            );
            let numeric = solve_quartic(&q).unwrap();
            for z in numeric.roots {
                assert!(numeric.roots.contains(&z.conj()));
            }
            if k >= 1 {
                assert!(rs.rho.unwrap() > 0.0);
            }
        }
    }
}

#[test]
fn degenerate_points_are_flagged() {
    for &(n, p) in &[(3, 5.0 / 3.0), (4, 3.0), (5, 7.0)] {
        let params = Parameters::new(n, p).unwrap();
        let rs = mode_roots_closed(&params, 1).unwrap();
        assert!(rs.degenerate);
        let numeric = solve_quartic(&mode_quartic(&params, 1).unwrap()).unwrap();
        assert!(match_roots(&rs.roots, &numeric.roots).max_distance < 1e-6);
    }
}

#[test]
fn integer_families_match_oracle() {
    for fam in [NmFamily::NmMode, NmFamily::NmMean, NmFamily::NmTilde] {
        for n in 3..=12 {
            for i in 1..=8 {
                let closed = nonminimal_roots_closed(n, i, fam).unwrap();
                let numeric = solve_quartic(&nonminimal_quartic(n, i, fam).unwrap()).unwrap();
                let m = match_roots(&closed.roots, &numeric.roots);
                assert!(
                    m.max_distance <= 1e-10,
                    "{fam:?} N={n} i={i}: {}",
                    m.max_distance
                );
            }
        }
    }
}

#[test]
fn claims_hold_on_grid_and_boundaries() {
    for n in 3..=15 {
        let mut ps = admissible_p_grid(n, 20);
        ps.extend(special_p_values(n));
        for p in ps {
            let report = verify_claims(&Parameters::new(n, p).unwrap(), 100).unwrap();
            assert!(report.passed, "N={n} p={p}: {:?}", report.failures());
        }
    }
}
