//! Bisection on `b = Δu(0)` for the critical value `b̃(a)` separating
//! solutions that reach zero (`b < b̃`) from entire solutions with quadratic
//! growth (`b > b̃`).
//!
//! Each trial is classified by integrating out to a decision horizon with two
//! certificates: `Δu < 0` (the Laplacian is decreasing, so `u` must reach
//! zero) and the survival certificate of [`survival_certificate`]. The result
//! does not depend on how far the minimal-solution proxy is later integrated.
//!
//! [`survival_certificate`]: crate::radial_ode::survival_certificate

use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::par;
use crate::params::{derive_constants, Parameters};
use crate::radial_ode::{
    integrate, integrate_with, IntegrateOptions, Ivp, Record, Termination, Trajectory, TOL_MAX,
    TOL_MIN,
};

/// Largest `|b|` tried during bracket expansion.
pub const B_CAP: f64 = 1e12;
/// Radius at which an undecided classification run stops.
pub const DECISION_HORIZON: f64 = 1e16;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootingConfig {
    /// Length of the returned minimal-solution proxy.
    pub r_max: f64,
    /// Integrator tolerance.
    pub tol: f64,
    /// Relative bracket width at which bisection stops.
    pub rel_tol: f64,
    /// First trial value; `a^((α-2)/α)` when absent.
    pub b_seed: Option<f64>,
    /// Multiplicative step of the bracket search.
    pub growth: f64,
    /// Permits `rel_tol < 100·tol` (down to machine precision). The
    /// certified classifier is deterministic, so finer bisection still
    /// converges to a well-defined point of the discretised flow.
    pub fine_bisection: bool,
}

impl Default for ShootingConfig {
    fn default() -> Self {
        Self {
            r_max: 500.0,
            tol: 1e-10,
            rel_tol: 1e-8,
            b_seed: None,
            growth: 2.0,
            fine_bisection: false,
        }
    }
}

impl ShootingConfig {
    /// Tight setting for rate fits, where the residual growing mode of an
    /// inexact `b̃` would otherwise swamp the decaying remainder.
    pub fn precise() -> Self {
        Self {
            tol: 1e-12,
            rel_tol: 1e-15,
            fine_bisection: true,
            ..Self::default()
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if !(self.r_max >= 50.0 && self.r_max.is_finite()) {
            return bad(format!("r_max = {} must be at least 50", self.r_max));
        }
        if !(TOL_MIN..=TOL_MAX).contains(&self.tol) {
            return bad(format!(
                "tol = {:e} outside [{TOL_MIN:e}, {TOL_MAX:e}]",
                self.tol
            ));
        }
        if !(self.growth > 1.0 && self.growth.is_finite()) {
            return bad(format!("growth factor {} must exceed 1", self.growth));
        }
        if let Some(seed) = self.b_seed {
            if !(seed > 0.0 && seed.is_finite()) {
                return bad(format!("b_seed = {seed} must be positive"));
            }
        }
        let floor = if self.fine_bisection {
            f64::EPSILON
        } else {
            100.0 * self.tol
        };
        if !(self.rel_tol >= floor) {
            return bad(format!(
                "bisection rel-tol {:e} below {floor:e} (integrator tol {:e})",
                self.rel_tol, self.tol
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Classification {
    Extinct,
    Survives,
}

/// Extinct iff the trajectory reached zero or was certified to.
pub fn classify(traj: &Trajectory) -> Result<Classification> {
    match traj.termination {
        Termination::Extinct { .. } | Termination::NegativeLaplacian { .. } => {
            Ok(Classification::Extinct)
        }
        Termination::ReachedRmax | Termination::CertifiedEntire { .. } => {
            Ok(Classification::Survives)
        }
        Termination::Overflow { r } => {
            if traj.u_positive() {
                Ok(Classification::Survives)
            } else {
                Err(Error::UnclassifiableTrajectory(format!(
                    "overflow at r = {r} with a non-positive sample"
                )))
            }
        }
        Termination::StepFailure { r } => Err(Error::UnclassifiableTrajectory(format!(
            "step size underflow at r = {r}"
        ))),
    }
}

/// Classifies `(a, b)` by integrating to the decision horizon.
pub fn classify_b(
    a: f64,
    b: f64,
    params: &Parameters,
    tol: f64,
) -> Result<(Classification, Termination)> {
    let ivp = Ivp::new(a, b, *params)?;
    let opts = IntegrateOptions {
        record: Record::Ends,
        decide: true,
        ..IntegrateOptions::default()
    };
    let traj = integrate_with(&ivp, DECISION_HORIZON, tol, &opts)?;
    Ok((classify(&traj)?, traj.termination))
}

/// Pass/fail-free diagnostics of the minimal-solution proxy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShootingDiagnostics {
    /// `r^(-α) u / L` at `r_max`.
    pub ratio_at_rmax: f64,
    /// `Δu(r_max)`.
    pub v_at_rmax: f64,
    /// Range of `r^(-α) u / L` over `[r_max/10, r_max]`.
    pub ratio_min_last_decade: f64,
    pub ratio_max_last_decade: f64,
    pub classifications: usize,
    pub lo_termination: Termination,
    pub hi_termination: Termination,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ShootingResult {
    pub a: f64,
    pub params: Parameters,
    pub b_lo: f64,
    pub b_hi: f64,
    pub b_tilde_est: f64,
    pub r_max: f64,
    pub tol: f64,
    pub rel_tol: f64,
    /// Trajectory at `b_hi`, the proxy for the minimal solution.
    pub minimal_traj: Trajectory,
    pub diagnostics: ShootingDiagnostics,
}

impl ShootingResult {
    pub fn relative_width(&self) -> f64 {
        (self.b_hi - self.b_lo) / self.b_hi.abs().max(1.0)
    }
}

impl Serialize for ShootingResult {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        #[derive(Serialize)]
        struct Summary<'a> {
            a: f64,
            #[serde(rename = "N")]
            n: u32,
            p: f64,
            b_lo: f64,
            b_hi: f64,
            b_tilde_est: f64,
            r_max: f64,
            tol: f64,
            diagnostics: &'a ShootingDiagnostics,
        }
        Summary {
            a: self.a,
            n: self.params.n,
            p: self.params.p,
            b_lo: self.b_lo,
            b_hi: self.b_hi,
            b_tilde_est: self.b_tilde_est,
            r_max: self.r_max,
            tol: self.tol,
            diagnostics: &self.diagnostics,
        }
        .serialize(serializer)
    }
}

/// `r^(-α) u / L` at each sample.
pub fn singular_ratio(traj: &Trajectory) -> Result<Vec<(f64, f64)>> {
    let dc = derive_constants(&traj.params)?;
    Ok(traj
        .samples
        .iter()
        .map(|s| (s.r, s.r.powf(-dc.alpha) * s.u / dc.l))
        .collect())
}

pub fn find_b_tilde(a: f64, params: &Parameters, cfg: &ShootingConfig) -> Result<ShootingResult> {
    cfg.validate()?;
    params.ensure_admissible()?;
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!(
            "a = {a} must be positive and finite"
        )));
    }
    let alpha = params.alpha();
    let seed = cfg.b_seed.unwrap_or_else(|| a.powf((alpha - 2.0) / alpha));
    let mut calls = 0usize;
    let mut run = |b: f64| {
        calls += 1;
        classify_b(a, b, params, cfg.tol)
    };

    let (mut lo, mut hi, mut lo_term, mut hi_term);
    let (first, term) = run(seed)?;
    match first {
        Classification::Survives => {
            hi = seed;
            hi_term = term;
            let mut b = seed;
            loop {
                b = next_down(b, seed, cfg.growth);
                if b < -B_CAP {
                    return Err(Error::BracketFailure(format!(
                        "no extinct trajectory found above b = {}",
                        -B_CAP
                    )));
                }
                let (c, t) = run(b)?;
                if c == Classification::Extinct {
                    lo = b;
                    lo_term = t;
                    break;
                }
                hi = b;
                hi_term = t;
            }
        }
        Classification::Extinct => {
            lo = seed;
            lo_term = term;
            let mut b = seed;
            loop {
                b *= cfg.growth;
                if b > B_CAP {
                    return Err(Error::BracketFailure(format!(
                        "no surviving trajectory found below b = {B_CAP}"
                    )));
                }
                let (c, t) = run(b)?;
                if c == Classification::Survives {
                    hi = b;
                    hi_term = t;
                    break;
                }
                lo = b;
                lo_term = t;
            }
        }
    }

    while (hi - lo) / hi.abs().max(1.0) > cfg.rel_tol {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (c, t) = run(mid)?;
        match c {
            Classification::Extinct => {
                lo = mid;
                lo_term = t;
            }
            Classification::Survives => {
                hi = mid;
                hi_term = t;
            }
        }
    }

    let ivp = Ivp::new(a, hi, *params)?;
    let minimal_traj = integrate(&ivp, cfg.r_max, cfg.tol)?;
    if classify(&minimal_traj)? != Classification::Survives {
        return Err(Error::NumericalFailure(format!(
            "minimal proxy at b = {hi} did not reach r_max: {:?}",
            minimal_traj.termination
        )));
    }
    let ratio = singular_ratio(&minimal_traj)?;
    let last = *minimal_traj.last();
    let decade: Vec<f64> = ratio
        .iter()
        .filter(|(r, _)| *r >= cfg.r_max / 10.0)
        .map(|(_, q)| *q)
        .collect();
    let diagnostics = ShootingDiagnostics {
        ratio_at_rmax: ratio.last().map(|x| x.1).unwrap_or(f64::NAN),
        v_at_rmax: last.v,
        ratio_min_last_decade: decade.iter().copied().fold(f64::INFINITY, f64::min),
        ratio_max_last_decade: decade.iter().copied().fold(f64::NEG_INFINITY, f64::max),
        classifications: calls,
        lo_termination: lo_term,
        hi_termination: hi_term,
    };
    Ok(ShootingResult {
        a,
        params: *params,
        b_lo: lo,
        b_hi: hi,
        b_tilde_est: 0.5 * (lo + hi),
        r_max: cfg.r_max,
        tol: cfg.tol,
        rel_tol: cfg.rel_tol,
        minimal_traj,
        diagnostics,
    })
}

/// Downward bracket sequence: `seed/g, seed/g², …`, then `0`, then
/// `-1, -g, -g², …`.
fn next_down(b: f64, seed: f64, growth: f64) -> f64 {
    if b > 0.0 {
        let next = b / growth;
        if next < 1e-12 * seed {
            0.0
        } else {
            next
        }
    } else if b == 0.0 {
        -1.0
    } else {
        b * growth
    }
}

/// Independent shooting runs, in parallel when the `parallel` feature is on.
pub fn find_b_tilde_many(
    points: &[(f64, Parameters)],
    cfg: &ShootingConfig,
) -> Vec<Result<ShootingResult>> {
    par::map(points, |(a, params)| find_b_tilde(*a, params, cfg))
}

/// Sequential counterpart of [`find_b_tilde_many`].
pub fn find_b_tilde_many_seq(
    points: &[(f64, Parameters)],
    cfg: &ShootingConfig,
) -> Vec<Result<ShootingResult>> {
    par::map_seq(points, |(a, params)| find_b_tilde(*a, params, cfg))
}

/// Entire solution with `Δu(0) = b > b̃(a)`, integrated to `cfg.r_max`.
pub fn nonminimal_solution(
    a: f64,
    b: f64,
    params: &Parameters,
    cfg: &ShootingConfig,
) -> Result<Trajectory> {
    cfg.validate()?;
    let (class, term) = classify_b(a, b, params, cfg.tol)?;
    let extinct_at = |t: Termination| match t {
        Termination::Extinct { r } | Termination::NegativeLaplacian { r } => r,
        _ => f64::NAN,
    };
    if class == Classification::Extinct {
        return Err(Error::NotAboveCritical {
            b,
            r: extinct_at(term),
        });
    }
    let traj = integrate(&Ivp::new(a, b, *params)?, cfg.r_max, cfg.tol)?;
    match classify(&traj)? {
        Classification::Survives => Ok(traj),
        Classification::Extinct => Err(Error::NotAboveCritical {
            b,
            r: extinct_at(traj.termination),
        }),
    }
}
