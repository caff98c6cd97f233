//! Far-field behaviour of radial solutions: Kelvin and Emden–Fowler profiles,
//! remainder exponents of the minimal solution, and the quadratic regime of
//! non-minimal solutions.

mod fit;

use std::io::Write;

use serde::Serialize;

pub use fit::{
    fit_damped_oscillation, fit_decay_exponent, fornberg_weights, is_uniform, linear_fit,
    resample_uniform, CubicSpline, OscillationFit, RateFit, FIT_FLOOR, MIN_EXTREMA,
    MIN_FIT_POINTS,
};

use crate::charpoly::{decaying_exponents, mean_quartic, mean_roots_closed};
use crate::error::{Error, Result};
use crate::par;
use crate::params::{classify_beta_branch, derive_constants, BetaBranch, DerivedConstants, Parameters};
use crate::radial_ode::Trajectory;
use crate::shooting::{classify, nonminimal_solution, Classification, ShootingConfig};

/// Samples used by [`ef_residual`] after resampling.
pub const EF_GRID_POINTS: usize = 65;
/// Width of the finite-difference stencil in [`ef_residual`].
pub const EF_STENCIL: usize = 9;

fn require_survivor(traj: &Trajectory) -> Result<()> {
    if classify(traj)? != Classification::Survives {
        return Err(Error::InvalidTrajectory(format!(
            "trajectory does not survive ({:?})",
            traj.termination
        )));
    }
    if !traj.u_positive() {
        return Err(Error::InvalidTrajectory("u is not positive throughout".into()));
    }
    Ok(())
}

/// `(s, r^(-α) u - L)` with `s = 1/r`, ordered by increasing `s`.
pub fn kelvin_profile(traj: &Trajectory, dc: &DerivedConstants) -> Result<Vec<(f64, f64)>> {
    require_survivor(traj)?;
    let mut out: Vec<(f64, f64)> = traj
        .samples
        .iter()
        .filter(|s| s.r > 0.0)
        .map(|s| (1.0 / s.r, s.r.powf(-dc.alpha) * s.u - dc.l))
        .collect();
    out.reverse();
    Ok(out)
}

/// `(t, m)` with `t = ln r` and `m = e^(-αt) u(e^t) - L`.
pub fn ef_transform(traj: &Trajectory, alpha: f64) -> Result<Vec<(f64, f64)>> {
    require_survivor(traj)?;
    let l = derive_constants(&traj.params)?.l;
    Ok(ef_samples(traj, alpha, l))
}

fn ef_samples(traj: &Trajectory, alpha: f64, l: f64) -> Vec<(f64, f64)> {
    traj.samples
        .iter()
        .filter(|s| s.r > 0.0)
        .map(|s| (s.r.ln(), s.r.powf(-alpha) * s.u - l))
        .collect()
}

/// Relative residual of the Emden–Fowler form of the equation,
///
/// `m'''' + c₃m''' + c₂m'' + c₁m' + c₀m + g(m) = 0`,
/// `g(m) = (m+L)^(-p) - L^(-p) + pL^(-(p+1))m`,
///
/// where `c₀..c₃` are the mean-mode quartic coefficients. Derivatives come
/// from 9-point stencils on a 65-point uniform resampling. Returns the RMS of
/// the residual divided by the largest RMS among the individual terms.
pub fn ef_residual(m_samples: &[(f64, f64)], params: &Parameters) -> Result<f64> {
    if m_samples.len() < EF_STENCIL {
        return Err(Error::InsufficientSamples {
            needed: EF_STENCIL,
            got: m_samples.len(),
        });
    }
    let mut pts = m_samples.to_vec();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    pts.dedup_by(|a, b| a.0 == b.0);
    let xs: Vec<f64> = pts.iter().map(|p| p.0).collect();
    let grid = if is_uniform(&xs) {
        pts
    } else {
        resample_uniform(&pts, EF_GRID_POINTS)?
    };
    if grid.len() < EF_STENCIL {
        return Err(Error::InsufficientSamples {
            needed: EF_STENCIL,
            got: grid.len(),
        });
    }
    let q = mean_quartic(params)?;
    let dc = derive_constants(params)?;
    let (l, p) = (dc.l, params.p);
    let h = grid[1].0 - grid[0].0;
    let half = EF_STENCIL / 2;
    let offsets: Vec<f64> = (0..EF_STENCIL).map(|j| (j as f64 - half as f64) * h).collect();
    let w = fornberg_weights(0.0, &offsets, 4);
    let coeffs = [q.c0 / q.c4, q.c1 / q.c4, q.c2 / q.c4, q.c3 / q.c4, 1.0];

    let mut sum_sq = [0.0f64; 6];
    let mut res_sq = 0.0;
    let count = grid.len() - 2 * half;
    for i in half..grid.len() - half {
        let window = &grid[i - half..=i + half];
        let m = grid[i].1;
        let mut terms = [0.0f64; 6];
        terms[0] = coeffs[0] * m;
        for (order, row) in w.iter().enumerate().skip(1) {
            let d: f64 = row.iter().zip(window).map(|(c, s)| c * s.1).sum();
            terms[order] = coeffs[order] * d;
        }
        terms[5] = (m + l).powf(-p) - l.powf(-p) + p * l.powf(-(p + 1.0)) * m;
        let res: f64 = terms.iter().sum();
        res_sq += res * res;
        for (acc, t) in sum_sq.iter_mut().zip(terms) {
            *acc += t * t;
        }
    }
    let n = count as f64;
    let largest = sum_sq.iter().map(|s| (s / n).sqrt()).fold(0.0, f64::max);
    if largest == 0.0 {
        return Ok(0.0);
    }
    Ok((res_sq / n).sqrt() / largest)
}

/// Which rate governs `u - L r^α` for the minimal solution.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum RemainderBranch {
    /// `β₃,₄` complex: `O(r^(2-N/2))`.
    Complex,
    /// `β₃,₄` real, `N ≥ 5`: `O(r^(-1+α))`.
    Real,
    /// `N = 3` with real `β₃,₄`: `O(r^(β₃+α))`.
    RealBeta3,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RemainderPrediction {
    /// Exponent `γ` in `u - L r^α = O(r^γ)` from the table.
    pub exponent: f64,
    pub branch: RemainderBranch,
    /// `α` plus the slowest decaying mean-mode rate (`ℓ` or `β₃`).
    pub sharp_exponent: f64,
    /// `N = 3`, `p ≤ p₃¹`: the table has no entry; the exponent comes from
    /// the `e^(β₃t)` rate instead.
    pub table_gap: bool,
}

/// `α` plus the largest real part among the decaying mean-mode exponents.
pub fn sharp_minimal_remainder(params: &Parameters) -> Result<f64> {
    let roots = mean_roots_closed(params)?;
    let slowest = decaying_exponents(&roots)
        .first()
        .copied()
        .ok_or_else(|| Error::NumericalFailure("no decaying mean-mode exponent".into()))?;
    Ok(params.alpha() + slowest.re)
}

pub fn predicted_minimal_remainder(params: &Parameters, dc: &DerivedConstants) -> Result<RemainderPrediction> {
    params.ensure_admissible()?;
    let sharp = sharp_minimal_remainder(params)?;
    let nf = params.nf();
    let complex = classify_beta_branch(params)?.is_complex();
    let (exponent, branch) = if complex {
        (2.0 - nf / 2.0, RemainderBranch::Complex)
    } else if params.n >= 5 {
        (-1.0 + dc.alpha, RemainderBranch::Real)
    } else {
        (sharp, RemainderBranch::RealBeta3)
    };
    let table_gap = params.n == 3 && !complex && dc.p3.is_some_and(|p3| params.p <= p3[0]);
    Ok(RemainderPrediction {
        exponent,
        branch,
        sharp_exponent: sharp,
        table_gap,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NonminimalDiagnostics {
    /// `Δu(r_max)`.
    pub d_from_laplacian: f64,
    /// `2N u(r_max) / r_max²`.
    pub d_from_quadratic: f64,
    /// `min{2, N-2, 2(p-1)}`.
    pub kappa_predicted: f64,
    /// The rate carries a `ln r` factor.
    pub log_correction: bool,
    /// Fit of `|r^(-2)u - d/2N|` over the last decade; `κ = -exponent`.
    pub kappa_fitted: RateFit,
}

impl NonminimalDiagnostics {
    pub fn kappa(&self) -> f64 {
        -self.kappa_fitted.exponent
    }

    pub fn d_relative_gap(&self) -> f64 {
        (self.d_from_laplacian - self.d_from_quadratic).abs() / self.d_from_laplacian
    }
}

const CASE_EPS: f64 = 1e-12;

pub fn kappa_predicted(params: &Parameters) -> f64 {
    let nf = params.nf();
    2f64.min(nf - 2.0).min(2.0 * (params.p - 1.0))
}

pub fn log_correction(params: &Parameters) -> bool {
    let nf = params.nf();
    (params.p - nf / 2.0).abs() <= CASE_EPS
        || ((nf - 2.0).min(2.0 * (params.p - 1.0)) - 2.0).abs() <= CASE_EPS
}

pub fn nonminimal_diagnostics(traj: &Trajectory, params: &Parameters) -> Result<NonminimalDiagnostics> {
    require_survivor(traj)?;
    let last = traj.last();
    let r_max = last.r;
    let nf = params.nf();
    let d = last.v;
    if !(d > 0.0) {
        return Err(Error::InvalidTrajectory(format!(
            "Δu(r_max) = {d} is not positive"
        )));
    }
    let series: Vec<(f64, f64)> = traj
        .window(r_max / 10.0, r_max)
        .map(|s| (s.r, s.u / (s.r * s.r) - d / (2.0 * nf)))
        .collect();
    let kappa_fitted = fit_decay_exponent(&series, (r_max / 10.0, r_max), false)?;
    Ok(NonminimalDiagnostics {
        d_from_laplacian: d,
        d_from_quadratic: 2.0 * nf * last.u / (r_max * r_max),
        kappa_predicted: kappa_predicted(params),
        log_correction: log_correction(params),
        kappa_fitted,
    })
}

/// `|r^(-2)u - d/2N|` over the last decade, the series behind `κ`.
pub fn quadratic_remainder_series(traj: &Trajectory) -> Vec<(f64, f64)> {
    let last = traj.last();
    let nf = traj.params.nf();
    traj.window(last.r / 10.0, last.r)
        .map(|s| (s.r, (s.u / (s.r * s.r) - last.v / (2.0 * nf)).abs()))
        .collect()
}

/// `(b, Δu(r_max))` for each `b`, integrated independently.
pub fn d_monotonicity_scan(
    a: f64,
    params: &Parameters,
    b_values: &[f64],
    cfg: &ShootingConfig,
) -> Result<Vec<(f64, f64)>> {
    par::map(b_values, |&b| {
        nonminimal_solution(a, b, params, cfg).map(|t| (b, t.last().v))
    })
    .into_iter()
    .collect()
}

/// Two-column CSV with 17 significant digits.
pub fn write_series_csv<W: Write>(samples: &[(f64, f64)], header: (&str, &str), mut w: W) -> std::io::Result<()> {
    writeln!(w, "{},{}", header.0, header.1)?;
    for (x, v) in samples {
        writeln!(w, "{x:.16e},{v:.16e}")?;
    }
    Ok(())
}

pub fn series_csv_string(samples: &[(f64, f64)], header: (&str, &str)) -> String {
    let mut buf = Vec::new();
    write_series_csv(samples, header, &mut buf).expect("writing to memory");
    String::from_utf8(buf).expect("CSV is ASCII")
}

/// Estimated remainder exponent of a minimal-solution proxy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MinimalRateReport {
    pub prediction: RemainderPrediction,
    /// Exponent of `u - L r^α` in `r`.
    pub fitted_exponent: f64,
    /// Log–log fit of the Kelvin profile in `s` (non-oscillatory branches),
    /// or of its local maxima (oscillatory branches, may be absent).
    pub kelvin_fit: Option<RateFit>,
    /// Linear-prediction fit of `m(t)` on a uniform `ln r` grid.
    pub oscillation_fit: Option<OscillationFit>,
    pub window: (f64, f64),
}

/// Fits the remainder exponent of `traj`, a minimal-solution proxy, over
/// `window` in `r`. Complex branches use the damped-oscillation fit of
/// `m(t)`; real branches use log–log regression on the Kelvin profile.
pub fn minimal_rate(traj: &Trajectory, window: (f64, f64)) -> Result<MinimalRateReport> {
    let params = traj.params;
    let dc = derive_constants(&params)?;
    let prediction = predicted_minimal_remainder(&params, &dc)?;
    let kelvin = kelvin_profile(traj, &dc)?;
    let s_window = (1.0 / window.1, 1.0 / window.0);
    let complex = matches!(classify_beta_branch(&params)?, BetaBranch::ComplexPair { .. });
    if complex {
        let m: Vec<(f64, f64)> = traj
            .window(window.0, window.1)
            .map(|s| (s.r, s.r.powf(-dc.alpha) * s.u - dc.l))
            .collect();
        let osc = fit_damped_oscillation(&m, window, 129)?;
        let env = fit_decay_exponent(&kelvin, s_window, true).ok();
        Ok(MinimalRateReport {
            prediction,
            fitted_exponent: dc.alpha + osc.ell,
            kelvin_fit: env,
            oscillation_fit: Some(osc),
            window,
        })
    } else {
        let f = fit_decay_exponent(&kelvin, s_window, false)?;
        Ok(MinimalRateReport {
            prediction,
            fitted_exponent: dc.alpha - f.exponent,
            kelvin_fit: Some(f),
            oscillation_fit: None,
            window,
        })
    }
}
