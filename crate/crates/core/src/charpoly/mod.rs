//! Characteristic quartics of the linearised problem: the angular-mode
//! family, its `k = 0` member (the mean mode), and the three integer-root
//! families that govern non-minimal solutions. Closed-form roots are kept
//! separate from the numerical solver so the two can be checked against
//! each other.

mod claims;
mod dd;
mod nonminimal;
mod solve;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::Result;
use crate::params::{singular_coefficient, Parameters};
use crate::spectra;
use dd::Dd;

pub use claims::{
    claim4_case, claim5_case, rho1_identity_deviation, verify_claims, Claim4Case, Claim5Case,
    ClaimCheck, ClaimReport, PointOutcome, DEFAULT_STRICT_MARGIN,
};
pub use nonminimal::{nonminimal_quartic, nonminimal_roots_closed, NmFamily};
pub use solve::{match_roots, solve_quartic, RootMatch};

/// Relative width below which the inner square root of the `β₃, β₄` pair is
/// treated as a double root.
pub const DEGENERACY_REL: f64 = 1e-6;

/// Imaginary parts below `SNAP_REL·(1+|re|)` are rounded to zero.
pub const SNAP_REL: f64 = 1e-10;

/// Which quartic a root set belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(tag = "family", content = "index")]
pub enum Family {
    /// Angular mode `k` of the minimal-solution linearisation.
    Mode(u32),
    /// The `k = 0` mode.
    Mean,
    /// Angular mode `i` of the non-minimal linearisation.
    NmMode(u32),
    NmMean,
    /// Shifted non-minimal family with roots `ν + 1`.
    NmTilde(u32),
    Generic,
}

/// Monic quartic `c4 β⁴ + c3 β³ + c2 β² + c1 β + c0` with `c4 = 1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Quartic {
    pub c4: f64,
    pub c3: f64,
    pub c2: f64,
    pub c1: f64,
    pub c0: f64,
    #[serde(flatten)]
    pub family: Family,
}

impl Quartic {
    pub fn monic(c3: f64, c2: f64, c1: f64, c0: f64) -> Self {
        Self::with_family(c3, c2, c1, c0, Family::Generic)
    }

    pub fn with_family(c3: f64, c2: f64, c1: f64, c0: f64, family: Family) -> Self {
        Self {
            c4: 1.0,
            c3,
            c2,
            c1,
            c0,
            family,
        }
    }

    /// Expands `∏ (β - r_j)`.
    pub fn from_roots(r: [f64; 4]) -> Self {
        let e1 = r[0] + r[1] + r[2] + r[3];
        let e2 = r[0] * r[1] + r[0] * r[2] + r[0] * r[3] + r[1] * r[2] + r[1] * r[3] + r[2] * r[3];
        let e3 = r[0] * r[1] * r[2] + r[0] * r[1] * r[3] + r[0] * r[2] * r[3] + r[1] * r[2] * r[3];
        let e4 = r[0] * r[1] * r[2] * r[3];
        Self::monic(-e1, e2, -e3, e4)
    }

    pub fn coefficients(&self) -> [f64; 5] {
        [self.c4, self.c3, self.c2, self.c1, self.c0]
    }

    pub fn is_finite(&self) -> bool {
        self.coefficients().iter().all(|c| c.is_finite())
    }

    pub fn eval(&self, z: Complex64) -> Complex64 {
        (((z * self.c4 + self.c3) * z + self.c2) * z + self.c1) * z + self.c0
    }

    /// `j`-th derivative, `0 ≤ j ≤ 4`.
    pub fn eval_derivative(&self, z: Complex64, j: usize) -> Complex64 {
        let c = self.coefficients();
        let mut acc = Complex64::new(0.0, 0.0);
        for (idx, &coef) in c.iter().enumerate() {
            let power = 4 - idx;
            if power < j {
                continue;
            }
            let falling: f64 = (power - j + 1..=power).map(|v| v as f64).product();
            acc += z.powu((power - j) as u32) * (coef * falling);
        }
        acc
    }

    /// Residual budget `10⁻⁹·(1+|z|⁴)` used for root acceptance.
    pub fn residual_tolerance(z: Complex64) -> f64 {
        1e-9 * (1.0 + z.norm().powi(4))
    }
}

/// Four roots of a quartic.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RootSet {
    pub roots: [Complex64; 4],
    #[serde(flatten)]
    pub family: Family,
    /// `ρ_k` for the angular-mode families.
    pub rho: Option<f64>,
    /// Set when two roots coincide to within the degeneracy tolerance.
    pub degenerate: bool,
}

impl RootSet {
    pub fn all_real(&self) -> bool {
        self.roots.iter().all(|z| z.im == 0.0)
    }

    pub fn real_parts(&self) -> [f64; 4] {
        self.roots.map(|z| z.re)
    }
}

pub(crate) fn snap(z: Complex64) -> Complex64 {
    if z.im.abs() < SNAP_REL * (1.0 + z.re.abs()) {
        Complex64::new(z.re, 0.0)
    } else {
        z
    }
}

/// Coefficients of the angular-mode quartic for mode `k`.
pub fn mode_quartic(params: &Parameters, k: u32) -> Result<Quartic> {
    params.ensure_admissible()?;
    let n = params.nf();
    let a = params.alpha();
    let lam = spectra::eigenvalue(i64::from(k), i64::from(params.n))?;
    let c3 = 2.0 * (n - 4.0 + 2.0 * a);
    let c2 = n * n + 6.0 * a * n + 6.0 * a * a - 10.0 * n - 24.0 * a + 20.0 - 2.0 * lam;
    let c1 = 2.0 * (n - 4.0 + 2.0 * a) * (n * a - n - 4.0 * a + a * a + 2.0 - lam);
    let c0 = lam * lam
        - 2.0 * (n * a + a * a - n - 4.0 * a + 4.0) * lam
        - (params.p + 1.0) * singular_coefficient(params);
    let family = if k == 0 {
        Family::Mean
    } else {
        Family::Mode(k)
    };
    Ok(Quartic::with_family(c3, c2, c1, c0, family))
}

pub fn mean_quartic(params: &Parameters) -> Result<Quartic> {
    mode_quartic(params, 0)
}

/// `(ρ_k, 4+(N-2+2k)²+4√ρ_k, 4+(N-2+2k)²-4√ρ_k)` in double-double precision,
/// with `pα` written as `4-α` so that every quantity is a function of `α`.
pub(crate) fn radicands(n: u32, alpha: f64, k: u32) -> (f64, f64, f64) {
    let a = Dd::new(alpha);
    let nf = f64::from(n);
    let prod = Dd::new(4.0)
        .sub(a)
        .mul(Dd::new(2.0).sub(a))
        .mul(Dd::new(nf - 2.0).add(a))
        .mul(Dd::new(nf - 4.0).add(a));
    let m = nf - 2.0 + 2.0 * f64::from(k);
    let m2 = Dd::new(m).mul(Dd::new(m));
    let rho_k = m2.add(prod);
    let four_sr = rho_k.sqrt().scale(4.0);
    let s = m2.add(Dd::new(4.0));
    (
        rho_k.to_f64(),
        s.add(four_sr).to_f64(),
        s.sub(four_sr).to_f64(),
    )
}

/// Closed-form roots `[β₁, β₂, β₃, β₄]` of the angular-mode quartic.
pub fn mode_roots_closed(params: &Parameters, k: u32) -> Result<RootSet> {
    params.ensure_admissible()?;
    let n = params.nf();
    let a = params.alpha();
    let m = n - 2.0 + 2.0 * f64::from(k);
    let (rho_k, outer_arg, inner_arg) = radicands(params.n, a, k);
    let base = Complex64::new(0.5 * (4.0 - n - 2.0 * a), 0.0);
    let outer = 0.5 * outer_arg.sqrt();
    let inner = if inner_arg >= 0.0 {
        Complex64::new(0.5 * inner_arg.sqrt(), 0.0)
    } else {
        Complex64::new(0.0, 0.5 * (-inner_arg).sqrt())
    };
    let family = if k == 0 {
        Family::Mean
    } else {
        Family::Mode(k)
    };
    Ok(RootSet {
        roots: [base + outer, base - outer, base + inner, base - inner],
        family,
        rho: Some(rho_k),
        degenerate: inner_arg.abs() <= DEGENERACY_REL * (4.0 + m * m),
    })
}

/// Closed-form roots of the mean-mode quartic, `β_j = β_j⁽⁰⁾`.
pub fn mean_roots_closed(params: &Parameters) -> Result<RootSet> {
    mode_roots_closed(params, 0)
}

/// Roots with negative real part, sorted by descending real part (ties by
/// descending imaginary part).
pub fn decaying_exponents(rs: &RootSet) -> Vec<Complex64> {
    let mut out: Vec<Complex64> = rs.roots.iter().copied().filter(|z| z.re < 0.0).collect();
    out.sort_by(|x, y| y.re.total_cmp(&x.re).then(y.im.total_cmp(&x.im)));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn mode_quartic_examples() {
        let q = mode_quartic(&Parameters::raw(5, 3.0), 0).unwrap();
        assert_relative_eq!(q.c3, 6.0, epsilon = 1e-14);
        assert_relative_eq!(q.c2, 7.0, epsilon = 1e-13);
        assert_relative_eq!(q.c1, -6.0, epsilon = 1e-13);
        assert_relative_eq!(q.c0, -32.0, epsilon = 1e-12);
        assert_eq!(q.family, Family::Mean);
        let m = mean_quartic(&Parameters::raw(7, 2.5)).unwrap();
        assert_eq!(m, mode_quartic(&Parameters::raw(7, 2.5), 0).unwrap());
    }

    /// The quartic factors as a product of two Euler-operator symbols, shifted
    /// by the linearised nonlinearity.
    fn factored(params: &Parameters, k: u32, b: f64) -> f64 {
        let n = params.nf();
        let a = params.alpha();
        let lam = spectra::eigenvalue(i64::from(k), i64::from(params.n)).unwrap();
        let x = b + a;
        ((x * (x + n - 2.0)) - lam) * ((x - 2.0) * (x + n - 4.0) - lam)
            - params.p * singular_coefficient(params)
    }

    #[test]
    fn coefficients_agree_with_factored_form() {
        for &(n, p, k) in &[
            (3, 2.0, 0),
            (4, 7.0, 1),
            (6, 2.0, 3),
            (13, 40.0, 5),
            (9, 1.3, 12),
        ] {
            let params = Parameters::raw(n, p);
            let q = mode_quartic(&params, k).unwrap();
            for &b in &[-3.7, -1.0, 0.0, 0.4, 2.5] {
                let lhs = q.eval(c(b, 0.0)).re;
                assert_relative_eq!(
                    lhs,
                    factored(&params, k, b),
                    epsilon = 1e-9,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn closed_form_examples() {
        use crate::params::rho;
        let rs = mode_roots_closed(&Parameters::raw(6, 2.0), 1).unwrap();
        assert_relative_eq!(rs.roots[3].re, -11.0 / 3.0, epsilon = 1e-13);
        assert_relative_eq!(rs.roots[2].re, -1.0, epsilon = 1e-13);
        assert_relative_eq!(rs.roots[0].re, 1.935_416_158_288_566, epsilon = 1e-13);
        assert_relative_eq!(rs.roots[1].re, -6.602_082_824_955_232, epsilon = 1e-13);

        let rs = mode_roots_closed(&Parameters::raw(4, 7.0), 1).unwrap();
        assert_relative_eq!(rs.roots[3].re, -1.0, epsilon = 1e-13);
        assert!(rs.roots[2].re.abs() < 1e-13);

        let params = Parameters::raw(5, 3.0);
        assert_relative_eq!(rho(&params, 1), 49.0, epsilon = 1e-12);
        let rs = mean_roots_closed(&params).unwrap();
        assert_relative_eq!(rs.roots[0].re, 1.499_093_637_507_510, epsilon = 1e-13);
        assert_relative_eq!(rs.roots[1].re, -4.499_093_637_507_510, epsilon = 1e-13);
        assert_relative_eq!(rs.roots[2].re, -1.5, epsilon = 1e-14);
        assert_relative_eq!(rs.roots[2].im, 1.579_418_452_006_316, epsilon = 1e-13);
        assert_eq!(rs.roots[3], rs.roots[2].conj());
        assert!(rs.roots[1].re < 2.0 - 5.0 - 1.0);
    }

    #[test]
    fn mean_roots_frozen() {
        // mpmath, 40 digits
        let cases: [(u32, f64, [f64; 4], f64); 4] = [
            (
                13,
                2.0,
                [
                    1.230_176_633_128_634,
                    -12.896_843_299_795_300,
                    -2.282_723_955_537_395,
                    -9.383_942_711_129_272,
                ],
                0.0,
            ),
            (
                10,
                5.0,
                [
                    2.241_853_861_039_055,
                    -9.575_187_194_372_388,
                    -11.0 / 3.0,
                    -11.0 / 3.0,
                ],
                0.954_261_403_557_692_5,
            ),
            (
                5,
                2.0,
                [
                    1.072_484_271_443_542,
                    -4.739_150_938_110_209,
                    -11.0 / 6.0,
                    -11.0 / 6.0,
                ],
                1.394_193_656_645_740,
            ),
            (
                4,
                2.0,
                [
                    1.001_150_892_179_637,
                    -3.667_817_558_846_304,
                    -4.0 / 3.0,
                    -4.0 / 3.0,
                ],
                1.204_083_302_420_931,
            ),
        ];
        for (n, p, re, q) in cases {
            let rs = mean_roots_closed(&Parameters::raw(n, p)).unwrap();
            for j in 0..4 {
                assert_relative_eq!(rs.roots[j].re, re[j], epsilon = 1e-12);
            }
            assert_relative_eq!(rs.roots[2].im, q, epsilon = 1e-12);
        }
    }

    #[test]
    fn decaying_exponent_examples() {
        let rs = mean_roots_closed(&Parameters::raw(5, 3.0)).unwrap();
        let d = decaying_exponents(&rs);
        assert_eq!(d.len(), 3);
        assert!(d[0].im > 0.0 && d[1].im < 0.0 && d[0].re == -1.5);
        assert_relative_eq!(d[2].re, -4.499_093_637_507_51, epsilon = 1e-12);

        let pos = solve_quartic(&Quartic::from_roots([1.0, 2.0, 3.0, 4.0])).unwrap();
        assert!(decaying_exponents(&pos).is_empty());

        let nm = nonminimal_roots_closed(5, 0, NmFamily::NmMean).unwrap();
        let d: Vec<f64> = decaying_exponents(&nm).iter().map(|z| z.re).collect();
        assert_eq!(d, vec![-2.0, -3.0, -5.0]);
    }

    #[test]
    fn derivative_evaluation() {
        let q = Quartic::from_roots([1.0, -2.0, 0.5, 3.0]);
        let z = c(0.3, -0.7);
        let h = 1e-6;
        let fd = (q.eval(z + h) - q.eval(z - h)) / (2.0 * h);
        assert!((q.eval_derivative(z, 1) - fd).norm() < 1e-7);
        assert_eq!(q.eval_derivative(z, 4), c(24.0, 0.0));
        assert!((q.eval_derivative(z, 0) - q.eval(z)).norm() < 1e-14);
    }
}
