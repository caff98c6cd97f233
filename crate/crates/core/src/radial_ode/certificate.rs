//! Sufficient condition for a radial solution to stay positive forever.
//!
//! Suppose at radius `R` we have `u' ≥ 0` and `Δu = V > 0`. As long as
//! `Δu ≥ V/2`, `u` is bounded below by the radial solution of `Δw = V/2`
//! with the same data, and the total future decrease of `Δu` is bounded by
//!
//! ```text
//! D = max(0, -(Δu)'(R)) R/(N-2) + 1/(N-2) ∫_R^∞ τ u(τ)^(-p) dτ.
//! ```
//!
//! If `D < V/2` the assumption `Δu ≥ V/2` can never fail, so `u → ∞`.

use super::RadialState;
use crate::params::Parameters;

const SIMPSON_INTERVALS: usize = 800;
/// Safety factor on the quadrature.
const SAFETY: f64 = 1.05;

/// Lower bound for `u(τ)`, `τ ≥ R`, valid while `Δu ≥ V/2`.
fn u_lower(n: f64, s: &RadialState, tau: f64) -> f64 {
    let r = s.r;
    let growth = 0.5 * (tau * tau - r * r) - r * r * (1.0 - (r / tau).powf(n - 2.0)) / (n - 2.0);
    s.u + s.v / (2.0 * n) * growth
}

/// True when the state certifies that the solution is entire.
pub fn survival_certificate(params: &Parameters, s: &RadialState) -> bool {
    if !(s.du >= 0.0 && s.v > 0.0 && s.u > 0.0 && s.is_finite()) {
        return false;
    }
    let n = params.nf();
    let p = params.p;
    let r = s.r;
    // Beyond T the lower bound dominates (V/8N) τ².
    let t_end = (r * (2.0 + 4.0 / (n - 2.0)).sqrt()).max(1e3 * r);
    let len = (t_end / r).ln();
    let h = len / SIMPSON_INTERVALS as f64;
    let integrand = |x: f64| {
        let tau = r * x.exp();
        tau * tau * u_lower(n, s, tau).powf(-p)
    };
    let mut acc = integrand(0.0) + integrand(len);
    for j in 1..SIMPSON_INTERVALS {
        let w = if j % 2 == 1 { 4.0 } else { 2.0 };
        acc += w * integrand(j as f64 * h);
    }
    let body = acc * h / 3.0;
    let tail = (8.0 * n / s.v).powf(p) * t_end.powf(2.0 - 2.0 * p) / (2.0 * p - 2.0);
    let decrease = (-s.dv).max(0.0) * r / (n - 2.0) + (body + tail) / (n - 2.0);
    SAFETY * decrease < 0.5 * s.v
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn large_laplacian_certifies() {
        let params = Parameters::raw(5, 2.0);
        let s = RadialState {
            r: 10.0,
            u: 100.0,
            du: 20.0,
            v: 10.0,
            dv: -1e-3,
        };
        assert!(survival_certificate(&params, &s));
    }

    #[test]
    fn preconditions_are_required() {
        let params = Parameters::raw(5, 2.0);
        let s = RadialState {
            r: 10.0,
            u: 100.0,
            du: -1.0,
            v: 10.0,
            dv: 0.0,
        };
        assert!(!survival_certificate(&params, &s));
        let s = RadialState {
            r: 10.0,
            u: 100.0,
            du: 1.0,
            v: -1.0,
            dv: 0.0,
        };
        assert!(!survival_certificate(&params, &s));
    }

    #[test]
    fn singular_profile_is_not_certified() {
        let params = Parameters::new(5, 2.0).unwrap();
        for r in [1.0, 10.0, 1e3] {
            let s = crate::radial_ode::singular_state(&params, r).unwrap();
            assert!(!survival_certificate(&params, &s), "r = {r}");
        }
    }
}
