//! Radial form of `-Δ²u = u^(-p)` as the first-order system in
//! `(u, u', v, v')` with `v = Δu`:
//!
//! ```text
//! u'' + (N-1)/r u' = v,    v'' + (N-1)/r v' = -u^(-p)
//! ```
//!
//! Here `v = Δu`, so formulations in terms of `w = -Δu` correspond to `-v`.

mod certificate;
mod dopri;

use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::params::Parameters;

pub use certificate::survival_certificate;
pub use dopri::DenseSegment;
use dopri::State;

/// Largest allowed Taylor handoff radius.
pub const R0_MAX: f64 = 1e-3;
pub const DEFAULT_R0: f64 = 1e-3;
/// Extinction is declared once `u ≤ U_FLOOR_REL · a`.
pub const U_FLOOR_REL: f64 = 1e-8;
pub const OVERFLOW_GUARD: f64 = 1e300;
/// A step below `STEP_FLOOR_REL · r` is a step failure.
pub const STEP_FLOOR_REL: f64 = 1e-14;
pub const TOL_MIN: f64 = 1e-12;
pub const TOL_MAX: f64 = 1e-4;
/// Radius growth factor between survival certificate attempts.
pub const CERTIFICATE_STRIDE: f64 = 1.3;

/// Initial data `u(0) = a`, `u'(0) = 0`, `Δu(0) = b`, `(Δu)'(0) = 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Ivp {
    pub a: f64,
    pub b: f64,
    pub params: Parameters,
}

impl Ivp {
    pub fn new(a: f64, b: f64, params: Parameters) -> Result<Self> {
        params.ensure_admissible()?;
        if !(a > 0.0 && a.is_finite()) {
            return Err(Error::Domain(format!(
                "u(0) = {a} must be positive and finite"
            )));
        }
        if !b.is_finite() {
            return Err(Error::Domain(format!("Δu(0) = {b} must be finite")));
        }
        Ok(Self { a, b, params })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RadialState {
    pub r: f64,
    pub u: f64,
    pub du: f64,
    /// `Δu`.
    pub v: f64,
    /// `(Δu)'`.
    pub dv: f64,
}

impl RadialState {
    fn from_parts(r: f64, y: &State) -> Self {
        Self {
            r,
            u: y[0],
            du: y[1],
            v: y[2],
            dv: y[3],
        }
    }

    fn state(&self) -> State {
        [self.u, self.du, self.v, self.dv]
    }

    pub fn is_finite(&self) -> bool {
        [self.r, self.u, self.du, self.v, self.dv]
            .iter()
            .all(|x| x.is_finite())
    }
}

/// Why an integration stopped.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum Termination {
    ReachedRmax,
    /// `u` reached the extinction floor at `r`.
    Extinct {
        r: f64,
    },
    /// A field exceeded the overflow guard at `r`.
    Overflow {
        r: f64,
    },
    StepFailure {
        r: f64,
    },
    /// `Δu < 0` at `r`; since `Δu` is decreasing, `u` must reach zero later.
    NegativeLaplacian {
        r: f64,
    },
    /// The survival certificate holds at `r`, so the solution is entire.
    CertifiedEntire {
        r: f64,
    },
}

/// Which states an integration keeps.
#[derive(Debug, Clone, PartialEq)]
pub enum Record {
    /// Every accepted step, plus dense output between them.
    Steps,
    /// Exactly the listed radii (steps are shortened to land on them).
    Grid(Vec<f64>),
    /// Only the first and last state.
    Ends,
}

#[derive(Debug, Clone, PartialEq)]
pub struct IntegrateOptions {
    /// Taylor handoff radius.
    pub r0: f64,
    pub record: Record,
    /// Stop early on `Δu < 0` or a passed survival certificate.
    pub decide: bool,
    pub max_steps: usize,
}

impl Default for IntegrateOptions {
    fn default() -> Self {
        Self {
            r0: DEFAULT_R0,
            record: Record::Steps,
            decide: false,
            max_steps: 5_000_000,
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct StepStats {
    pub accepted: usize,
    pub rejected: usize,
}

/// A sampled radial solution.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub params: Parameters,
    /// Absent when the integration started from an arbitrary state.
    pub ivp: Option<Ivp>,
    pub tol: f64,
    pub samples: Vec<RadialState>,
    pub termination: Termination,
    pub stats: StepStats,
    dense: Vec<DenseSegment>,
}

impl Trajectory {
    /// Wraps externally produced samples (no dense output).
    pub fn from_samples(params: Parameters, tol: f64, samples: Vec<RadialState>, termination: Termination) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidTrajectory("no samples".into()));
        }
        if samples.windows(2).any(|w| !(w[1].r > w[0].r)) {
            return Err(Error::InvalidTrajectory("radii must increase strictly".into()));
        }
        Ok(Self {
            params,
            ivp: None,
            tol,
            samples,
            termination,
            stats: StepStats::default(),
            dense: Vec::new(),
        })
    }

    pub fn first(&self) -> &RadialState {
        &self.samples[0]
    }

    pub fn last(&self) -> &RadialState {
        self.samples
            .last()
            .expect("trajectories hold at least one sample")
    }

    pub fn r_start(&self) -> f64 {
        self.first().r
    }

    pub fn r_end(&self) -> f64 {
        self.last().r
    }

    pub fn u_positive(&self) -> bool {
        self.samples.iter().all(|s| s.u > 0.0)
    }

    pub fn has_dense_output(&self) -> bool {
        !self.dense.is_empty()
    }

    /// State at `r` from the continuous extension; `None` outside the
    /// integrated range or when dense output was not kept.
    pub fn state_at(&self, r: f64) -> Option<RadialState> {
        let first = self.dense.first()?;
        let last = self.dense.last()?;
        if r < first.r0 || r > last.r1() {
            return None;
        }
        let idx = self.dense.partition_point(|seg| seg.r1() < r);
        let seg = self.dense.get(idx).unwrap_or(last);
        Some(RadialState::from_parts(r, &seg.eval(r)))
    }

    /// Samples with `lo ≤ r ≤ hi`.
    pub fn window(&self, lo: f64, hi: f64) -> impl Iterator<Item = &RadialState> {
        self.samples.iter().filter(move |s| s.r >= lo && s.r <= hi)
    }

    /// CSV with header `r,u,du,v,dv` and 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "r,u,du,v,dv")?;
        for s in &self.samples {
            writeln!(
                w,
                "{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                s.r, s.u, s.du, s.v, s.dv
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// `γ(γ-2)(γ+N-2)(γ+N-4)`, so that `Δ²(r^γ) = c·r^(γ-4)` in `R^N`.
pub fn biharmonic_of_power(gamma: f64, n: u32) -> f64 {
    let n = f64::from(n);
    gamma * (gamma - 2.0) * (gamma + n - 2.0) * (gamma + n - 4.0)
}

/// State of the singular solution `U_s = L r^α` at `r`.
pub fn singular_state(params: &Parameters, r: f64) -> Result<RadialState> {
    let dc = crate::params::derive_constants(params)?;
    let (a, l, n) = (dc.alpha, dc.l, params.nf());
    let c = l * a * (a + n - 2.0);
    Ok(RadialState {
        r,
        u: l * r.powf(a),
        du: l * a * r.powf(a - 1.0),
        v: c * r.powf(a - 2.0),
        dv: c * (a - 2.0) * r.powf(a - 3.0),
    })
}

/// Series start at `r0`:
/// `u = a + b r²/(2N) - a^(-p) r⁴/(8N(N+2))`, `v = b - a^(-p) r²/(2N)`.
pub fn taylor_start(ivp: &Ivp, r0: f64) -> Result<RadialState> {
    if !(r0 > 0.0 && r0 <= R0_MAX) {
        return Err(Error::Domain(format!(
            "handoff radius r0 = {r0} must lie in (0, {R0_MAX}]"
        )));
    }
    let n = ivp.params.nf();
    let (a, b) = (ivp.a, ivp.b);
    let ap = a.powf(-ivp.params.p);
    let r2 = r0 * r0;
    Ok(RadialState {
        r: r0,
        u: a + b / (2.0 * n) * r2 - ap / (8.0 * n * (n + 2.0)) * r2 * r2,
        du: b / n * r0 - ap / (2.0 * n * (n + 2.0)) * r2 * r0,
        v: b - ap / (2.0 * n) * r2,
        dv: -ap / n * r0,
    })
}

fn check_tol(tol: f64) -> Result<()> {
    if (TOL_MIN..=TOL_MAX).contains(&tol) {
        Ok(())
    } else {
        Err(Error::InvalidConfig(format!(
            "tolerance {tol:e} outside [{TOL_MIN:e}, {TOL_MAX:e}]"
        )))
    }
}

/// Integrates from the origin to `r_max`, keeping every accepted step.
pub fn integrate(ivp: &Ivp, r_max: f64, tol: f64) -> Result<Trajectory> {
    integrate_with(ivp, r_max, tol, &IntegrateOptions::default())
}

pub fn integrate_with(
    ivp: &Ivp,
    r_max: f64,
    tol: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    let start = taylor_start(ivp, opts.r0)?;
    let mut traj = integrate_state(&ivp.params, start, ivp.a, r_max, tol, opts)?;
    traj.ivp = Some(*ivp);
    Ok(traj)
}

/// Integrates from an arbitrary state. `scale` sets the absolute tolerance
/// (`tol·max(1, scale)`) and the extinction floor (`U_FLOOR_REL·scale`).
pub fn integrate_state(
    params: &Parameters,
    start: RadialState,
    scale: f64,
    r_max: f64,
    tol: f64,
    opts: &IntegrateOptions,
) -> Result<Trajectory> {
    params.ensure_admissible()?;
    check_tol(tol)?;
    if !start.is_finite() || start.r <= 0.0 {
        return Err(Error::Domain(format!("invalid start state {start:?}")));
    }
    if !(r_max > start.r) || !r_max.is_finite() {
        return Err(Error::Domain(format!(
            "r_max = {r_max} must exceed the start radius {}",
            start.r
        )));
    }
    if !(scale > 0.0 && scale.is_finite()) {
        return Err(Error::Domain(format!("scale = {scale} must be positive")));
    }
    Ok(Integrator::new(params, scale, tol, opts).run(start, r_max))
}

/// Integrates from the Taylor start at `r0` to `r_max` with `steps`
/// geometrically spaced fixed steps and no error control.
pub fn integrate_fixed(ivp: &Ivp, r0: f64, r_max: f64, steps: usize) -> Result<RadialState> {
    if steps == 0 || !(r_max > r0) {
        return Err(Error::Domain(format!(
            "need steps > 0 and r_max > r0 (steps = {steps}, r0 = {r0}, r_max = {r_max})"
        )));
    }
    let start = taylor_start(ivp, r0)?;
    let opts = IntegrateOptions::default();
    let it = Integrator::new(&ivp.params, ivp.a, TOL_MAX, &opts);
    let f = |r: f64, y: &State| it.rhs(r, y);
    let ratio = (r_max / r0).powf(1.0 / steps as f64);
    let mut r = r0;
    let mut y = start.state();
    for j in 1..=steps {
        let r_new = if j == steps { r_max } else { r0 * ratio.powi(j as i32) };
        let k1 = f(r, &y);
        y = dopri::step(&f, r, &y, &k1, r_new - r).y_new;
        r = r_new;
    }
    let end = RadialState::from_parts(r, &y);
    if !end.is_finite() {
        return Err(Error::NumericalFailure(format!(
            "fixed-step integration blew up with {steps} steps"
        )));
    }
    Ok(end)
}

/// Error reduction factors of `u(r_max)` under successive halvings.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OrderCheck {
    /// Tolerances (adaptive) or step counts (fixed) of each run.
    pub levels: Vec<f64>,
    pub errors: Vec<f64>,
    /// `errors[i] / errors[i+1]`.
    pub ratios: Vec<f64>,
}

impl OrderCheck {
    fn from_errors(levels: Vec<f64>, errors: Vec<f64>) -> Self {
        let ratios = errors.windows(2).map(|w| w[0] / w[1]).collect();
        Self { levels, errors, ratios }
    }

    pub fn min_ratio(&self) -> f64 {
        self.ratios.iter().copied().fold(f64::INFINITY, f64::min)
    }

    /// `log2` of the geometric mean ratio.
    pub fn observed_order(&self) -> f64 {
        let n = self.ratios.len() as f64;
        self.ratios.iter().map(|r| r.log2()).sum::<f64>() / n
    }
}

/// Halves the adaptive tolerance `halvings` times starting at `tol0` and
/// compares `u(r_max)` with a run at [`TOL_MIN`].
pub fn tolerance_order_check(ivp: &Ivp, r_max: f64, tol0: f64, halvings: usize) -> Result<OrderCheck> {
    let end = |tol: f64| -> Result<f64> {
        let opts = IntegrateOptions {
            record: Record::Grid(vec![r_max]),
            ..IntegrateOptions::default()
        };
        Ok(integrate_with(ivp, r_max, tol, &opts)?.last().u)
    };
    let reference = end(TOL_MIN)?;
    let levels: Vec<f64> = (0..=halvings).map(|k| tol0 / 2f64.powi(k as i32)).collect();
    let errors = levels
        .iter()
        .map(|&t| end(t).map(|u| (u - reference).abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok(OrderCheck::from_errors(levels, errors))
}

/// Doubles the number of fixed steps `halvings` times starting at
/// `steps0`, against a run with `64·steps0·2^halvings` steps.
pub fn step_order_check(ivp: &Ivp, r_max: f64, steps0: usize, halvings: usize) -> Result<OrderCheck> {
    let r0 = DEFAULT_R0;
    let reference = integrate_fixed(ivp, r0, r_max, steps0 << (halvings + 6))?.u;
    let levels: Vec<f64> = (0..=halvings).map(|k| (steps0 << k) as f64).collect();
    let errors = levels
        .iter()
        .map(|&n| integrate_fixed(ivp, r0, r_max, n as usize).map(|s| (s.u - reference).abs()))
        .collect::<Result<Vec<_>>>()?;
    Ok(OrderCheck::from_errors(levels, errors))
}

struct Integrator<'a> {
    n1: f64,
    p: f64,
    atol: f64,
    rtol: f64,
    u_floor: f64,
    params: &'a Parameters,
    opts: &'a IntegrateOptions,
    tol: f64,
}

impl<'a> Integrator<'a> {
    fn new(params: &'a Parameters, scale: f64, tol: f64, opts: &'a IntegrateOptions) -> Self {
        Self {
            n1: params.nf() - 1.0,
            p: params.p,
            atol: tol * scale.max(1.0),
            rtol: tol,
            u_floor: U_FLOOR_REL * scale,
            params,
            opts,
            tol,
        }
    }

    fn rhs(&self, r: f64, y: &State) -> State {
        let c = self.n1 / r;
        [
            y[1],
            y[2] - c * y[1],
            y[3],
            -y[0].max(f64::MIN_POSITIVE).powf(-self.p) - c * y[3],
        ]
    }

    fn error_norm(&self, y0: &State, y1: &State, err: &State) -> f64 {
        let mut acc = 0.0;
        for i in 0..4 {
            let sc = self.atol + self.rtol * y0[i].abs().max(y1[i].abs());
            acc += (err[i] / sc).powi(2);
        }
        (acc / 4.0).sqrt()
    }

    fn run(&self, start: RadialState, r_max: f64) -> Trajectory {
        let f = |r: f64, y: &State| self.rhs(r, y);
        let keep_dense = matches!(self.opts.record, Record::Steps | Record::Grid(_));
        let grid: &[f64] = match &self.opts.record {
            Record::Grid(g) => g,
            _ => &[],
        };
        let mut next_grid = grid.partition_point(|&g| g <= start.r);

        let mut samples = vec![start];
        let mut dense = Vec::new();
        let mut stats = StepStats::default();
        let mut r = start.r;
        let mut y = start.state();
        let mut k1 = f(r, &y);
        let mut h = 0.1 * r;
        let mut last_rejected = false;
        let mut next_certificate = r * CERTIFICATE_STRIDE;

        let termination = loop {
            if r >= r_max {
                break Termination::ReachedRmax;
            }
            if stats.accepted + stats.rejected >= self.opts.max_steps {
                break Termination::StepFailure { r };
            }
            let mut target = r_max;
            if next_grid < grid.len() {
                target = target.min(grid[next_grid]);
            }
            let mut h_try = h.min(target - r);
            if target - r - h_try <= 1e-12 * r {
                h_try = target - r;
            }
            if h_try < STEP_FLOOR_REL * r {
                break Termination::StepFailure { r };
            }
            let s = dopri::step(&f, r, &y, &k1, h_try);
            let err = self.error_norm(&y, &s.y_new, &s.err);
            if !(err <= 1.0) {
                stats.rejected += 1;
                let fac = if err.is_finite() {
                    (0.9 * err.powf(-0.2)).clamp(0.1, 0.9)
                } else {
                    0.1
                };
                h = h_try * fac;
                last_rejected = true;
                continue;
            }
            stats.accepted += 1;
            let r_new = if h_try == target - r {
                target
            } else {
                r + h_try
            };
            let y_new = s.y_new;
            if keep_dense {
                dense.push(s.dense);
            }

            if y_new[0] <= self.u_floor {
                let r_hit = self.locate_floor(&s.dense, r, r_new);
                let hit = RadialState::from_parts(r_hit, &s.dense.eval(r_hit));
                samples.push(hit);
                break Termination::Extinct { r: r_hit };
            }
            let state_new = RadialState::from_parts(r_new, &y_new);
            if y_new
                .iter()
                .any(|v| !v.is_finite() || v.abs() > OVERFLOW_GUARD)
            {
                samples.push(state_new);
                break Termination::Overflow { r: r_new };
            }

            let on_grid = next_grid < grid.len() && r_new == grid[next_grid];
            if on_grid {
                next_grid += 1;
            }
            let record = match self.opts.record {
                Record::Steps => true,
                Record::Grid(_) => on_grid,
                Record::Ends => false,
            };
            if record || r_new >= r_max {
                samples.push(state_new);
            }

            if self.opts.decide {
                if y_new[2] < 0.0 {
                    push_last(&mut samples, state_new);
                    break Termination::NegativeLaplacian { r: r_new };
                }
                if r_new >= next_certificate {
                    next_certificate = r_new * CERTIFICATE_STRIDE;
                    if survival_certificate(self.params, &state_new) {
                        push_last(&mut samples, state_new);
                        break Termination::CertifiedEntire { r: r_new };
                    }
                }
            }

            r = r_new;
            y = y_new;
            k1 = s.k_new;
            let mut fac = if err == 0.0 {
                5.0
            } else {
                (0.9 * err.powf(-0.2)).clamp(0.2, 5.0)
            };
            if last_rejected {
                fac = fac.min(1.0);
            }
            last_rejected = false;
            h = h_try * fac;
        };

        Trajectory {
            params: *self.params,
            ivp: None,
            tol: self.tol,
            samples,
            termination,
            stats,
            dense,
        }
    }

    /// Bisection on the dense output for `u = u_floor` to relative `1e-10`.
    fn locate_floor(&self, seg: &DenseSegment, mut lo: f64, mut hi: f64) -> f64 {
        while hi - lo > 1e-10 * hi {
            let mid = 0.5 * (lo + hi);
            if seg.eval(mid)[0] <= self.u_floor {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        hi
    }
}

fn push_last(samples: &mut Vec<RadialState>, s: RadialState) {
    if samples.last().map(|l| l.r) != Some(s.r) {
        samples.push(s);
    }
}
