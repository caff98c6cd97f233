//! Problem parameters `(N, p)`, the derived constants `α` and `L`, and the
//! classification of `(N, p)` into the regimes that decide which asymptotic
//! condition characterises the minimal radial solution.

use serde::{Deserialize, Serialize, Serializer};

use crate::error::{Error, Result};

/// Default distance kept from the ends of the admissible `p` interval.
pub const DEFAULT_ADMISSIBILITY_MARGIN: f64 = 1e-6;

/// Tolerance used when testing `p` against an exact threshold such as `p = 7`.
pub const THRESHOLD_EPS: f64 = 1e-12;

/// Space dimension and exponent of `-Δ²u = u^(-p)` in `R^N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Parameters {
    #[serde(rename = "N")]
    pub n: u32,
    pub p: f64,
}

impl Parameters {
    /// Builds parameters, rejecting pairs outside the admissible range.
    pub fn new(n: u32, p: f64) -> Result<Self> {
        let params = Self { n, p };
        params.ensure_admissible()?;
        Ok(params)
    }

    /// Builds parameters without any validation.
    pub const fn raw(n: u32, p: f64) -> Self {
        Self { n, p }
    }

    pub fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    /// `α = 4/(p+1)`.
    pub fn alpha(&self) -> f64 {
        4.0 / (self.p + 1.0)
    }

    pub fn ensure_admissible(&self) -> Result<()> {
        self.ensure_admissible_with(DEFAULT_ADMISSIBILITY_MARGIN)
    }

    pub fn ensure_admissible_with(&self, margin: f64) -> Result<()> {
        if admissible_with_margin(self, margin) {
            return Ok(());
        }
        let reason = if self.n < 3 {
            "N must be at least 3".to_string()
        } else if !self.p.is_finite() {
            "p must be finite".to_string()
        } else if self.n == 3 {
            format!("N = 3 requires 1 < p < 3 (margin {margin:e})")
        } else {
            format!("N >= 4 requires p > 1 (margin {margin:e})")
        };
        Err(Error::InadmissibleParameters {
            n: self.n,
            p: self.p,
            reason,
        })
    }
}

/// Admissibility with the default margin.
pub fn admissible(params: &Parameters) -> bool {
    admissible_with_margin(params, DEFAULT_ADMISSIBILITY_MARGIN)
}

pub fn admissible_with_margin(params: &Parameters, margin: f64) -> bool {
    let p = params.p;
    if !p.is_finite() {
        return false;
    }
    match params.n {
        0..=2 => false,
        3 => p > 1.0 + margin && p < 3.0 - margin,
        _ => p > 1.0 + margin,
    }
}

/// Either a finite threshold or `+∞`; serialises as a number or the string `"inf"`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Bound {
    Finite(f64),
    Infinite,
}

impl Bound {
    pub fn value(self) -> f64 {
        match self {
            Bound::Finite(v) => v,
            Bound::Infinite => f64::INFINITY,
        }
    }
}

impl Serialize for Bound {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Bound::Finite(v) => serializer.serialize_f64(*v),
            Bound::Infinite => serializer.serialize_str("inf"),
        }
    }
}

/// Constants derived from `(N, p)`. Thresholds that do not apply to the given
/// dimension are `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DerivedConstants {
    pub alpha: f64,
    #[serde(rename = "L")]
    pub l: f64,
    /// `(N+3)/(5-N)` for `N ∈ {3, 4}`, `+∞` for `N = 5`.
    pub p_star: Option<Bound>,
    /// `(N+2)/(6-N)` for `N ∈ {3, 4, 5}`.
    pub p_threshold: Option<f64>,
    /// Real/complex transition of the mean-mode exponents, `5 ≤ N ≤ 12`.
    pub p_c: Option<f64>,
    /// The four zeros of the mean-mode discriminant for `N = 3`, ordered as
    /// `[p₃¹, p₃², p₃³, p₃⁴]`.
    pub p3: Option<[f64; 4]>,
}

/// `α(2-α)(N-2+α)(N-4+α)`, which equals `L^(-(p+1))`.
pub fn singular_coefficient(params: &Parameters) -> f64 {
    let a = params.alpha();
    let n = params.nf();
    a * (2.0 - a) * (n - 2.0 + a) * (n - 4.0 + a)
}

/// `ρ_k = (N-2+2k)² + pα(2-α)(N-2+α)(N-4+α)`.
pub fn rho(params: &Parameters, k: u32) -> f64 {
    let m = params.nf() - 2.0 + 2.0 * f64::from(k);
    m * m + params.p * singular_coefficient(params)
}

/// Discriminant of the mean-mode exponents: `[4+(N-2)²]² - 16ρ₀`.
/// `β₃, β₄` are real iff it is non-negative.
pub fn mean_discriminant(params: &Parameters) -> f64 {
    let n = params.nf();
    let s = 4.0 + (n - 2.0) * (n - 2.0);
    s * s - 16.0 * rho(params, 0)
}

pub fn p_threshold(n: u32) -> Option<f64> {
    matches!(n, 3..=5).then(|| f64::from(n + 2) / f64::from(6 - n))
}

pub fn p_star(n: u32) -> Option<Bound> {
    match n {
        3 | 4 => Some(Bound::Finite(f64::from(n + 3) / f64::from(5 - n))),
        5 => Some(Bound::Infinite),
        _ => None,
    }
}

/// Closed form of the transition exponent for `5 ≤ N ≤ 12`.
pub fn p_c_closed_form(n: u32) -> Option<f64> {
    if !(5..=12).contains(&n) {
        return None;
    }
    let nf = f64::from(n);
    let h = (nf * (nf - 4.0) / 4.0).powi(2);
    let root = (4.0 + nf * nf - 4.0 * (nf * nf + h).sqrt()).sqrt();
    Some((nf + 2.0 - root) / (6.0 - nf + root))
}

/// Closed forms of the zeros of the mean-mode discriminant at `N = 3`.
pub fn p3_closed_form() -> [f64; 4] {
    let s17 = 17f64.sqrt();
    let lo = (13.0 - 3.0 * s17).sqrt();
    let hi = (13.0 + 3.0 * s17).sqrt();
    [
        (5.0 - lo) / (3.0 + lo),
        (5.0 + lo) / (3.0 - lo),
        (5.0 + hi) / (3.0 - hi),
        (5.0 - hi) / (3.0 + hi),
    ]
}

pub fn derive_constants(params: &Parameters) -> Result<DerivedConstants> {
    params.ensure_admissible()?;
    let alpha = params.alpha();
    let l = singular_coefficient(params).powf(-1.0 / (params.p + 1.0));
    Ok(DerivedConstants {
        alpha,
        l,
        p_star: p_star(params.n),
        p_threshold: p_threshold(params.n),
        p_c: p_c_closed_form(params.n),
        p3: (params.n == 3).then(p3_closed_form),
    })
}

/// Which of the three characterisations of the minimal solution applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum TheoremBranch {
    /// `|x|^(-α)u - L → 0` suffices.
    #[serde(rename = "Thm1_main")]
    Main,
    /// `N = 4, p = 7`: needs `o(|x|^(-ε₀))`.
    #[serde(rename = "Thm2_eps_condition")]
    EpsCondition,
    /// `N ∈ {3,4,5}`, `p ∈ ((N+2)/(6-N), p*)`: needs `o(|x|^(5-N-2α))`.
    #[serde(rename = "Thm3_little_o_condition")]
    LittleOCondition,
}

/// Nature of the mean-mode exponents `β₃, β₄`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "kind")]
pub enum BetaBranch {
    /// Real with `β₃ ∈ (-1, 0)`.
    RealDistinct,
    /// Real with `β₄ ≤ β₃ ≤ -1`.
    RealAtMostMinus1,
    /// `β₃,₄ = ℓ ± qi`.
    ComplexPair { ell: f64, q: f64 },
}

impl BetaBranch {
    pub fn is_complex(&self) -> bool {
        matches!(self, BetaBranch::ComplexPair { .. })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Regime {
    pub theorem_branch: TheoremBranch,
    pub beta34_branch: BetaBranch,
}

pub fn classify_theorem_regime(params: &Parameters) -> Result<TheoremBranch> {
    params.ensure_admissible()?;
    let p = params.p;
    if params.n == 4 && (p - 7.0).abs() <= THRESHOLD_EPS {
        return Ok(TheoremBranch::EpsCondition);
    }
    if let (Some(lo), Some(hi)) = (p_threshold(params.n), p_star(params.n)) {
        if p > lo + THRESHOLD_EPS && p < hi.value() - THRESHOLD_EPS {
            return Ok(TheoremBranch::LittleOCondition);
        }
    }
    Ok(TheoremBranch::Main)
}

pub fn classify_beta_branch(params: &Parameters) -> Result<BetaBranch> {
    params.ensure_admissible()?;
    let n = params.nf();
    let alpha = params.alpha();
    let inner = 4.0 + (n - 2.0) * (n - 2.0) - 4.0 * rho(params, 0).sqrt();
    if mean_discriminant(params) >= 0.0 {
        let beta3 = 0.5 * (4.0 - n - 2.0 * alpha + inner.max(0.0).sqrt());
        if beta3 <= -1.0 {
            Ok(BetaBranch::RealAtMostMinus1)
        } else {
            Ok(BetaBranch::RealDistinct)
        }
    } else {
        Ok(BetaBranch::ComplexPair {
            ell: 2.0 - alpha - n / 2.0,
            q: 0.5 * (-inner).sqrt(),
        })
    }
}

pub fn classify(params: &Parameters) -> Result<Regime> {
    Ok(Regime {
        theorem_branch: classify_theorem_regime(params)?,
        beta34_branch: classify_beta_branch(params)?,
    })
}

/// `count` admissible exponents spread over the admissible range of `N`:
/// evenly inside `(1, 3)` for `N = 3`, geometrically in `p - 1` up to about
/// `p = 61` otherwise.
pub fn admissible_p_grid(n: u32, count: usize) -> Vec<f64> {
    let count = count.max(1);
    (0..count)
        .map(|j| {
            if n == 3 {
                1.0 + 2.0 * (j as f64 + 0.5) / count as f64
            } else if count == 1 {
                2.0
            } else {
                1.0 + 0.05 * 1200f64.powf(j as f64 / (count - 1) as f64)
            }
        })
        .collect()
}

/// Exponents where the regime inequalities become equalities or the
/// mean-mode exponents change nature.
pub fn special_p_values(n: u32) -> Vec<f64> {
    let mut out = Vec::new();
    out.extend(p_threshold(n));
    if let Some(Bound::Finite(v)) = p_star(n) {
        if n != 3 {
            out.push(v);
        }
    }
    out.extend(p_c_closed_form(n));
    if n == 3 {
        out.extend_from_slice(&p3_closed_form()[..2]);
    }
    out
}

/// Bisection on a sign change of `f` inside `[lo, hi]`.
pub fn bisect_sign_change<F: Fn(f64) -> f64>(f: F, mut lo: f64, mut hi: f64, tol: f64) -> f64 {
    let mut f_lo = f(lo);
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        let f_mid = f(mid);
        if f_mid == 0.0 {
            return mid;
        }
        if (f_mid > 0.0) == (f_lo > 0.0) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

/// A closed-form threshold next to the value recovered by bisecting the sign
/// of the mean-mode discriminant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ThresholdCheck {
    pub name: &'static str,
    #[serde(rename = "N")]
    pub n: u32,
    pub closed_form: f64,
    pub bisected: f64,
}

impl ThresholdCheck {
    pub fn deviation(&self) -> f64 {
        (self.closed_form - self.bisected).abs()
    }
}

/// Recovers `p_c` (5 ≤ N ≤ 12) or `p₃¹, p₃²` (N = 3) by bisection on the
/// branch predicate and pairs them with the closed forms.
pub fn cross_validate_thresholds(n: u32) -> Vec<ThresholdCheck> {
    let disc = |p: f64| mean_discriminant(&Parameters::raw(n, p));
    let tol = 1e-13;
    match n {
        3 => {
            let closed = p3_closed_form();
            vec![
                ThresholdCheck {
                    name: "p3_1",
                    n,
                    closed_form: closed[0],
                    bisected: bisect_sign_change(disc, 1.0, 2.0, tol),
                },
                ThresholdCheck {
                    name: "p3_2",
                    n,
                    closed_form: closed[1],
                    bisected: bisect_sign_change(disc, 2.0, 3.0, tol),
                },
            ]
        }
        5..=12 => {
            let mut hi = 2.0;
            while disc(hi) >= 0.0 {
                hi *= 2.0;
            }
            let closed = p_c_closed_form(n).expect("5 <= N <= 12");
            vec![ThresholdCheck {
                name: "p_c",
                n,
                closed_form: closed,
                bisected: bisect_sign_change(disc, 1.0, hi, tol * hi),
            }]
        }
        _ => Vec::new(),
    }
}
