use serde::Serialize;

use super::dd::Dd;
use super::{mean_roots_closed, mode_roots_closed, radicands};
use crate::error::Result;
use crate::params::{
    classify_beta_branch, classify_theorem_regime, cross_validate_thresholds, mean_discriminant,
    p3_closed_form, p_c_closed_form, p_threshold, BetaBranch, Parameters, TheoremBranch,
    THRESHOLD_EPS,
};

/// Minimum gap required for a strict inequality to count as satisfied.
pub const DEFAULT_STRICT_MARGIN: f64 = 1e-10;

/// Tolerance for equalities and non-strict inequalities.
const EQ_TOL: f64 = 1e-10;

/// Largest allowed deviation in the `√ρ₁` identity.
const IDENTITY_TOL: f64 = 1e-12;

/// Largest allowed distance of the root increments from `±1` at large `k`.
const INCREMENT_TOL: f64 = 0.05;

/// `k_max` needed before the increment limits are checked.
const INCREMENT_K_MIN: u32 = 100;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PointOutcome {
    pub k: u32,
    pub passed: bool,
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimCheck {
    pub id: &'static str,
    pub grid: String,
    pub skipped: bool,
    pub passed: bool,
    pub worst_margin: f64,
    pub points: Vec<PointOutcome>,
}

/// Which ordering of the `k = 1` roots applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim4Case {
    /// `β₂ < β₄ ≤ β₃ = -1 < 0 < β₁`.
    Beta4LeBeta3EqMinus1,
    /// `β₂ < β₄ = -1 < β₃ < 0 < β₁`.
    Beta4EqMinus1LtBeta3Lt0,
    /// `β₂ < β₄ = -1 < β₃ = 0 < β₁`.
    Beta3Eq0,
    /// `β₂ < β₄ = -1 < 0 < β₃ < β₁`.
    Beta3In0To1,
}

/// Which description of the mean-mode pair `β₃, β₄` applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Claim5Case {
    RealBeta3AtMostMinus1,
    RealBeta3InMinus1To0,
    ComplexEllAtMostMinus1,
    ComplexEllInMinus1To0,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClaimReport {
    pub params: Parameters,
    pub k_max: u32,
    pub strict_margin: f64,
    pub theorem_branch: TheoremBranch,
    pub claim4_case: Claim4Case,
    pub claim5_case: Claim5Case,
    pub checks: Vec<ClaimCheck>,
    pub notes: Vec<String>,
    pub passed: bool,
}

impl ClaimReport {
    pub fn check(&self, id: &str) -> Option<&ClaimCheck> {
        self.checks.iter().find(|c| c.id == id)
    }

    pub fn failures(&self) -> Vec<&'static str> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.id)
            .collect()
    }
}

/// Accumulates the conditions tested at one grid point.
struct Point {
    k: u32,
    strict_margin: f64,
    margin: f64,
    passed: bool,
}

impl Point {
    fn new(k: u32, strict_margin: f64) -> Self {
        Self {
            k,
            strict_margin,
            margin: f64::INFINITY,
            passed: true,
        }
    }

    fn record(&mut self, margin: f64, ok: bool) {
        self.margin = self.margin.min(margin);
        self.passed &= ok && !margin.is_nan();
    }

    /// `a < b`.
    fn lt(&mut self, a: f64, b: f64) {
        self.record(b - a, b - a > self.strict_margin);
    }

    /// `a ≤ b`.
    fn le(&mut self, a: f64, b: f64) {
        self.record(b - a, b - a >= -EQ_TOL);
    }

    /// `a = b`.
    fn eq(&mut self, a: f64, b: f64) {
        let d = (a - b).abs();
        self.record(-d, d <= EQ_TOL * (1.0 + b.abs()));
    }

    /// `value ≤ bound` for a non-negative deviation measure.
    fn within(&mut self, value: f64, bound: f64) {
        self.record(bound - value, value <= bound);
    }

    fn outcome(&self) -> PointOutcome {
        PointOutcome {
            k: self.k,
            passed: self.passed,
            margin: self.margin,
        }
    }
}

fn check(id: &'static str, grid: String, points: Vec<PointOutcome>) -> ClaimCheck {
    let passed = points.iter().all(|p| p.passed);
    let worst_margin = points
        .iter()
        .map(|p| p.margin)
        .fold(f64::INFINITY, f64::min);
    ClaimCheck {
        id,
        grid,
        skipped: false,
        passed,
        worst_margin,
        points,
    }
}

fn skipped(id: &'static str, grid: String) -> ClaimCheck {
    ClaimCheck {
        id,
        grid,
        skipped: true,
        passed: true,
        worst_margin: f64::INFINITY,
        points: Vec::new(),
    }
}

pub fn claim4_case(params: &Parameters) -> Result<Claim4Case> {
    params.ensure_admissible()?;
    let p = params.p;
    let case = match (params.n, p_threshold(params.n)) {
        (4, _) if (p - 7.0).abs() <= THRESHOLD_EPS => Claim4Case::Beta3Eq0,
        (4, _) if p > 7.0 => Claim4Case::Beta3In0To1,
        (_, Some(thr)) if p > thr + THRESHOLD_EPS => Claim4Case::Beta4EqMinus1LtBeta3Lt0,
        _ => Claim4Case::Beta4LeBeta3EqMinus1,
    };
    Ok(case)
}

pub fn claim5_case(params: &Parameters) -> Result<Claim5Case> {
    params.ensure_admissible()?;
    let p = params.p;
    let le = |a: f64, b: f64| a <= b + THRESHOLD_EPS;
    let case = match params.n {
        3 => {
            let [p1, p2, ..] = p3_closed_form();
            if le(p, p1) {
                Claim5Case::RealBeta3AtMostMinus1
            } else if le(p2, p) {
                Claim5Case::RealBeta3InMinus1To0
            } else if le(p, 5.0 / 3.0) {
                Claim5Case::ComplexEllAtMostMinus1
            } else {
                Claim5Case::ComplexEllInMinus1To0
            }
        }
        4 if le(p, 3.0) => Claim5Case::ComplexEllAtMostMinus1,
        4 => Claim5Case::ComplexEllInMinus1To0,
        5..=12 => {
            let pc = p_c_closed_form(params.n).expect("5 <= N <= 12");
            if le(p, pc) {
                Claim5Case::RealBeta3AtMostMinus1
            } else if params.n == 5 && p > 7.0 + THRESHOLD_EPS {
                Claim5Case::ComplexEllInMinus1To0
            } else {
                Claim5Case::ComplexEllAtMostMinus1
            }
        }
        _ => Claim5Case::RealBeta3AtMostMinus1,
    };
    Ok(case)
}

/// `|√(4+N²-4√ρ₁) - |N-6+2α||`, evaluated in double-double precision.
pub fn rho1_identity_deviation(params: &Parameters) -> Result<f64> {
    params.ensure_admissible()?;
    let (_, _, inner) = radicands(params.n, params.alpha(), 1);
    let lhs = Dd::new(inner).sqrt().to_f64();
    let rhs = Dd::new(params.nf() - 6.0)
        .add(Dd::new(params.alpha()).scale(2.0))
        .abs()
        .to_f64();
    Ok((lhs - rhs).abs())
}

/// Evaluates Claims 1–5, the ordering remarks and the `√ρ₁` identity for
/// `1 ≤ k ≤ k_max` at one parameter point.
pub fn verify_claims(params: &Parameters, k_max: u32) -> Result<ClaimReport> {
    verify_claims_with_margin(params, k_max, DEFAULT_STRICT_MARGIN)
}

pub fn verify_claims_with_margin(
    params: &Parameters,
    k_max: u32,
    strict_margin: f64,
) -> Result<ClaimReport> {
    params.ensure_admissible()?;
    let k_max = k_max.max(2);
    let n = params.nf();
    let alpha = params.alpha();
    let theorem_branch = classify_theorem_regime(params)?;
    let c4 = claim4_case(params)?;
    let c5 = claim5_case(params)?;
    let mut notes = Vec::new();

    let roots: Vec<[f64; 4]> = (0..=k_max)
        .map(|k| mode_roots_closed(params, k).map(|rs| rs.real_parts()))
        .collect::<Result<_>>()?;
    let inner: Vec<f64> = (0..=k_max)
        .map(|k| radicands(params.n, alpha, k).2)
        .collect();
    let range = |lo: u32, hi: u32| format!("k = {lo}..={hi}");

    let per_k = |lo: u32, hi: u32, f: &dyn Fn(&mut Point, u32)| -> Vec<PointOutcome> {
        (lo..=hi)
            .map(|k| {
                let mut pt = Point::new(k, strict_margin);
                f(&mut pt, k);
                pt.outcome()
            })
            .collect()
    };

    let mut checks = Vec::new();

    checks.push(check(
        "claim1_real",
        range(1, k_max),
        per_k(1, k_max, &|pt, k| pt.le(0.0, inner[k as usize])),
    ));
    checks.push(check(
        "claim1_order",
        range(1, k_max),
        per_k(1, k_max, &|pt, k| {
            let [b1, b2, b3, b4] = roots[k as usize];
            pt.lt(b2, b4);
            pt.le(b4, b3);
            pt.lt(b3, b1);
        }),
    ));
    checks.push(check(
        "remark_negative_pair",
        range(1, k_max),
        per_k(1, k_max, &|pt, k| {
            let [b1, b2, _, b4] = roots[k as usize];
            pt.lt(b2, b4);
            pt.lt(b4, 0.0);
            pt.lt(0.0, b1);
        }),
    ));
    checks.push(check(
        "rho_positive",
        range(1, k_max),
        per_k(1, k_max, &|pt, k| {
            pt.lt(0.0, radicands(params.n, alpha, k).0)
        }),
    ));
    checks.push(check(
        "claim2",
        range(2, k_max),
        per_k(2, k_max, &|pt, k| pt.lt(0.0, roots[k as usize][2])),
    ));
    checks.push(check(
        "claim3",
        range(2, k_max),
        per_k(2, k_max, &|pt, k| pt.lt(roots[k as usize][3], -1.0)),
    ));
    checks.push(check(
        "ordering_k_ge_2",
        range(2, k_max),
        per_k(2, k_max, &|pt, k| {
            let [b1, b2, b3, b4] = roots[k as usize];
            pt.lt(b2, b4);
            pt.lt(b4, -1.0);
            pt.lt(0.0, b3);
            pt.lt(b3, b1);
        }),
    ));
    checks.push(if k_max >= 3 {
        check(
            "monotone_in_k",
            range(2, k_max - 1),
            per_k(2, k_max - 1, &|pt, k| {
                let [b1, b2, b3, b4] = roots[k as usize];
                let [c1, c2, c3, c4] = roots[k as usize + 1];
                pt.lt(c2, b2);
                pt.lt(c4, b4);
                pt.lt(b3, c3);
                pt.lt(b1, c1);
            }),
        )
    } else {
        skipped("monotone_in_k", "needs k_max >= 3".into())
    });
    checks.push(if k_max >= INCREMENT_K_MIN {
        check(
            "increment_limits",
            format!("k = {} -> {k_max}", k_max - 1),
            per_k(k_max - 1, k_max - 1, &|pt, k| {
                let [_, b2, b3, b4] = roots[k as usize];
                let [_, c2, c3, c4] = roots[k as usize + 1];
                pt.within((c2 - b2 + 1.0).abs(), INCREMENT_TOL);
                pt.within((c4 - b4 + 1.0).abs(), INCREMENT_TOL);
                pt.within((c3 - b3 - 1.0).abs(), INCREMENT_TOL);
            }),
        )
    } else {
        skipped(
            "increment_limits",
            format!("needs k_max >= {INCREMENT_K_MIN}"),
        )
    });

    let [b1, b2, b3, b4] = roots[1];
    let shifted = 5.0 - n - 2.0 * alpha;
    let mut pt = Point::new(1, strict_margin);
    pt.lt(b2, b4);
    pt.lt(0.0, b1);
    match c4 {
        Claim4Case::Beta4LeBeta3EqMinus1 => {
            pt.le(b4, b3);
            pt.eq(b3, -1.0);
            pt.eq(b4, shifted);
            if let Some(thr) = p_threshold(params.n) {
                if (params.p - thr).abs() <= THRESHOLD_EPS {
                    notes.push(format!(
                        "p = (N+2)/(6-N) = {thr} is a boundary point; it is assigned to the \
                         beta4 <= beta3 = -1 case, where beta4 = beta3 = -1"
                    ));
                }
            }
        }
        Claim4Case::Beta4EqMinus1LtBeta3Lt0 => {
            pt.eq(b4, -1.0);
            pt.lt(-1.0, b3);
            pt.lt(b3, 0.0);
            pt.eq(b3, shifted);
        }
        Claim4Case::Beta3Eq0 => {
            pt.eq(b4, -1.0);
            pt.eq(b3, 0.0);
        }
        Claim4Case::Beta3In0To1 => {
            pt.eq(b4, -1.0);
            pt.lt(0.0, b3);
            pt.lt(b3, 1.0);
            pt.lt(b3, b1);
            pt.eq(b3, shifted);
        }
    }
    checks.push(check(
        "claim4",
        format!("k = 1, {c4:?}"),
        vec![pt.outcome()],
    ));

    let mut pt = Point::new(1, strict_margin);
    pt.within(rho1_identity_deviation(params)?, IDENTITY_TOL);
    checks.push(check("rho1_identity", "k = 1".into(), vec![pt.outcome()]));

    checks.push(if theorem_branch == TheoremBranch::LittleOCondition {
        let mut pt = Point::new(1, strict_margin);
        let beta_hat = b3.abs();
        pt.eq(beta_hat, n + 2.0 * alpha - 5.0);
        pt.lt(0.0, beta_hat);
        pt.lt(beta_hat, 1.0);
        notes.push(format!(
            "little-o regime: beta_hat = |beta3^(1)| = {beta_hat}"
        ));
        check("beta_hat", "k = 1".into(), vec![pt.outcome()])
    } else {
        skipped("beta_hat", "only in the little-o regime".into())
    });

    let mean = mean_roots_closed(params)?;
    let [m1, m2, m3, m4] = mean.real_parts();
    let mut pt = Point::new(0, strict_margin);
    pt.lt(m2, 2.0 - n - alpha);
    pt.lt(0.0, m1);
    checks.push(check("mean_beta12", "k = 0".into(), vec![pt.outcome()]));

    let mut pt = Point::new(0, strict_margin);
    let inner0 = inner[0];
    let ell = 2.0 - alpha - n / 2.0;
    match c5 {
        Claim5Case::RealBeta3AtMostMinus1 | Claim5Case::RealBeta3InMinus1To0 => {
            pt.le(0.0, inner0);
            pt.le(m4, m3);
            if c5 == Claim5Case::RealBeta3AtMostMinus1 {
                pt.le(m3, -1.0);
            } else {
                pt.lt(-1.0, m3);
                pt.lt(m3, 0.0);
            }
        }
        Claim5Case::ComplexEllAtMostMinus1 | Claim5Case::ComplexEllInMinus1To0 => {
            pt.lt(inner0, 0.0);
            pt.eq(m3, ell);
            pt.eq(mean.roots[2].im, -mean.roots[3].im);
            if c5 == Claim5Case::ComplexEllAtMostMinus1 {
                pt.le(ell, -1.0);
            } else {
                pt.lt(-1.0, ell);
                pt.lt(ell, 0.0);
            }
        }
    }
    let predicate_complex = classify_beta_branch(params)?.is_complex();
    let table_complex = matches!(
        c5,
        Claim5Case::ComplexEllAtMostMinus1 | Claim5Case::ComplexEllInMinus1To0
    );
    let disc = mean_discriminant(params);
    let disc_scale = (4.0 + (n - 2.0) * (n - 2.0)).powi(2);
    if disc.abs() <= 1e-9 * disc_scale {
        notes.push(format!(
            "mean-mode discriminant {disc:e} vanishes to rounding; real/complex decided by the \
             threshold table"
        ));
    } else {
        pt.record(0.0, predicate_complex == table_complex);
        if let BetaBranch::ComplexPair { q, .. } = classify_beta_branch(params)? {
            pt.eq(mean.roots[2].im, q);
        }
    }
    checks.push(check(
        "claim5",
        format!("k = 0, {c5:?}"),
        vec![pt.outcome()],
    ));

    let validations = cross_validate_thresholds(params.n);
    checks.push(if validations.is_empty() {
        skipped("claim5_thresholds", "only N = 3 and 5 <= N <= 12".into())
    } else {
        let pts = validations
            .iter()
            .map(|v| {
                let mut pt = Point::new(0, strict_margin);
                pt.within(v.deviation(), 1e-8);
                pt.outcome()
            })
            .collect();
        let names: Vec<&str> = validations.iter().map(|v| v.name).collect();
        check("claim5_thresholds", names.join(", "), pts)
    });

    let passed = checks.iter().all(|c| c.passed);
    Ok(ClaimReport {
        params: *params,
        k_max,
        strict_margin,
        theorem_branch,
        claim4_case: c4,
        claim5_case: c5,
        checks,
        notes,
        passed,
    })
}
