use nalgebra::{Matrix4, Schur};
use num_complex::Complex64;
use serde::Serialize;

use super::{snap, Quartic, RootSet, DEGENERACY_REL};
use crate::error::{Error, Result};

const CLUSTER_REL: f64 = 1e-5;

/// Numerical roots of `q`: companion-matrix eigenvalues followed by Newton
/// polishing. Clustered roots are polished as a multiple root on the
/// appropriate derivative.
pub fn solve_quartic(q: &Quartic) -> Result<RootSet> {
    if !q.is_finite() || q.c4 == 0.0 {
        return Err(Error::NumericalFailure(format!(
            "quartic coefficients must be finite with c4 != 0: {:?}",
            q.coefficients()
        )));
    }
    let (c3, c2, c1, c0) = (q.c3 / q.c4, q.c2 / q.c4, q.c1 / q.c4, q.c0 / q.c4);
    let companion = Matrix4::new(
        -c3, -c2, -c1, -c0, //
        1.0, 0.0, 0.0, 0.0, //
        0.0, 1.0, 0.0, 0.0, //
        0.0, 0.0, 1.0, 0.0,
    );
    let mut roots = match Schur::try_new(companion, f64::EPSILON, 500) {
        Some(schur) => {
            let eig = schur.complex_eigenvalues();
            [eig[0], eig[1], eig[2], eig[3]]
        }
        None => aberth([c3, c2, c1, c0]),
    };

    let mut assigned = [false; 4];
    let mut degenerate = false;
    for i in 0..4 {
        if assigned[i] {
            continue;
        }
        let cluster: Vec<usize> = (i..4)
            .filter(|&j| !assigned[j] && close(roots[i], roots[j]))
            .collect();
        let polished_cluster = if cluster.len() > 1 {
            let mean = cluster.iter().map(|&j| roots[j]).sum::<Complex64>() / cluster.len() as f64;
            let z = newton(q, mean, cluster.len() - 1);
            if q.eval(z).norm() <= 1e-3 * Quartic::residual_tolerance(z) {
                Some(z)
            } else {
                None
            }
        } else {
            None
        };
        match polished_cluster {
            Some(z) => {
                degenerate = true;
                for &j in &cluster {
                    roots[j] = z;
                    assigned[j] = true;
                }
            }
            None => {
                roots[i] = newton(q, roots[i], 0);
                assigned[i] = true;
            }
        }
    }

    let mut roots = roots.map(snap);
    enforce_conjugates(&mut roots);
    roots.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));

    for z in &roots {
        let res = q.eval(*z).norm();
        if !(res <= Quartic::residual_tolerance(*z)) {
            return Err(Error::NumericalFailure(format!(
                "root {z} leaves residual {res:e} for {:?}",
                q.coefficients()
            )));
        }
    }
    if !degenerate {
        degenerate = (0..4).any(|i| {
            (i + 1..4)
                .any(|j| (roots[i] - roots[j]).norm() <= DEGENERACY_REL * (1.0 + roots[i].norm()))
        });
    }
    Ok(RootSet {
        roots,
        family: q.family,
        rho: None,
        degenerate,
    })
}

/// Aberth–Ehrlich simultaneous iteration for the monic quartic with lower
/// coefficients `c`. Used when the QR iteration stalls (e.g. orthogonal
/// companion matrices).
fn aberth(c: [f64; 4]) -> [Complex64; 4] {
    let q = Quartic::monic(c[0], c[1], c[2], c[3]);
    let radius = 1.0 + c.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let mut z: [Complex64; 4] = std::array::from_fn(|j| {
        Complex64::from_polar(0.5 * radius, 0.4 + j as f64 * std::f64::consts::FRAC_PI_2)
    });
    for _ in 0..500 {
        let mut moved = 0.0f64;
        for i in 0..4 {
            let f = q.eval(z[i]);
            if f.norm() == 0.0 {
                continue;
            }
            let ratio = f / q.eval_derivative(z[i], 1);
            let repulsion: Complex64 = (0..4)
                .filter(|&j| j != i)
                .map(|j| 1.0 / (z[i] - z[j]))
                .sum();
            let w = ratio / (1.0 - ratio * repulsion);
            z[i] -= w;
            moved = moved.max(w.norm() / (1.0 + z[i].norm()));
        }
        if moved < 1e-15 {
            break;
        }
    }
    z
}

fn close(a: Complex64, b: Complex64) -> bool {
    (a - b).norm() <= CLUSTER_REL * (1.0 + a.norm().max(b.norm()))
}

/// Newton iteration on the `order`-th derivative of `q`, accepting a step
/// only while it reduces the residual.
fn newton(q: &Quartic, start: Complex64, order: usize) -> Complex64 {
    let mut z = start;
    let mut fz = q.eval_derivative(z, order);
    for _ in 0..50 {
        let d = q.eval_derivative(z, order + 1);
        if d.norm() == 0.0 || fz.norm() == 0.0 {
            break;
        }
        let step = fz / d;
        let trial = z - step;
        let ft = q.eval_derivative(trial, order);
        if ft.norm() >= fz.norm() {
            break;
        }
        z = trial;
        fz = ft;
        if step.norm() <= 1e-16 * (1.0 + z.norm()) {
            break;
        }
    }
    z
}

/// Makes non-real roots appear in exact conjugate pairs.
fn enforce_conjugates(roots: &mut [Complex64; 4]) {
    let mut used = [false; 4];
    for i in 0..4 {
        if used[i] || roots[i].im <= 0.0 {
            continue;
        }
        let partner = (0..4)
            .filter(|&j| !used[j] && j != i && roots[j].im < 0.0)
            .min_by(|&a, &b| {
                (roots[a] - roots[i].conj())
                    .norm()
                    .total_cmp(&(roots[b] - roots[i].conj()).norm())
            });
        if let Some(j) = partner {
            let z = 0.5 * (roots[i] + roots[j].conj());
            roots[i] = z;
            roots[j] = z.conj();
            used[i] = true;
            used[j] = true;
        }
    }
}

/// Bijective pairing of two root lists minimising the total distance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RootMatch {
    /// `perm[i]` is the index in the second list paired with `i` in the first.
    pub perm: [usize; 4],
    pub max_distance: f64,
}

pub fn match_roots(a: &[Complex64; 4], b: &[Complex64; 4]) -> RootMatch {
    let mut best = RootMatch {
        perm: [0, 1, 2, 3],
        max_distance: f64::INFINITY,
    };
    let mut best_sum = f64::INFINITY;
    for p0 in 0..4 {
        for p1 in (0..4).filter(|&x| x != p0) {
            for p2 in (0..4).filter(|&x| x != p0 && x != p1) {
                let p3 = 6 - p0 - p1 - p2;
                let perm = [p0, p1, p2, p3];
                let dists: Vec<f64> = (0..4).map(|i| (a[i] - b[perm[i]]).norm()).collect();
                let sum: f64 = dists.iter().sum();
                if sum < best_sum {
                    best_sum = sum;
                    best = RootMatch {
                        perm,
                        max_distance: dists.iter().copied().fold(0.0, f64::max),
                    };
                }
            }
        }
    }
    best
}
