use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{Family, Quartic, RootSet};
use crate::error::{Error, Result};
use crate::spectra;

/// The three quartic families of the non-minimal linearisation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum NmFamily {
    NmMode,
    NmMean,
    NmTilde,
}

fn check(n: i64, i: i64, family: NmFamily) -> Result<(f64, f64, Family)> {
    if n < 3 {
        return Err(Error::Domain(format!(
            "dimension N = {n} must be at least 3"
        )));
    }
    let fam = match family {
        NmFamily::NmMean => Family::NmMean,
        _ if i < 1 => {
            return Err(Error::Domain(format!(
                "mode index i = {i} must be at least 1 for {family:?}"
            )))
        }
        NmFamily::NmMode => Family::NmMode(i as u32),
        NmFamily::NmTilde => Family::NmTilde(i as u32),
    };
    let lam = match family {
        NmFamily::NmMean => 0.0,
        _ => spectra::eigenvalue(i, n)?,
    };
    Ok((n as f64, lam, fam))
}

/// Quartic of the requested family; `i` is ignored for [`NmFamily::NmMean`].
pub fn nonminimal_quartic(n: i64, i: i64, family: NmFamily) -> Result<Quartic> {
    let (nf, lam, fam) = check(n, i, family)?;
    let q = match family {
        NmFamily::NmMode | NmFamily::NmMean => Quartic::with_family(
            2.0 * nf,
            nf * nf + 2.0 * nf - 4.0 - 2.0 * lam,
            2.0 * nf * (nf - 2.0 - lam),
            -lam * (2.0 * nf - lam),
            fam,
        ),
        NmFamily::NmTilde => Quartic::with_family(
            2.0 * (nf - 2.0),
            nf * nf - 4.0 * nf + 2.0 - 2.0 * lam,
            -2.0 * (nf - 2.0 + (nf - 2.0) * lam),
            -(nf - 1.0) * (nf - 3.0) - 2.0 * lam + lam * lam,
            fam,
        ),
    };
    Ok(q)
}

/// Integer closed-form roots `[ν₁, ν₂, ν₃, ν₄]`.
pub fn nonminimal_roots_closed(n: i64, i: i64, family: NmFamily) -> Result<RootSet> {
    let (_, _, fam) = check(n, i, family)?;
    let i = if family == NmFamily::NmMean { 0 } else { i };
    let base = [i, 2 - n - i, i - 2, -n - i];
    let shift = if family == NmFamily::NmTilde { 1 } else { 0 };
    let roots = base.map(|v| Complex64::new((v + shift) as f64, 0.0));
    let degenerate = (0..4).any(|a| (a + 1..4).any(|b| roots[a] == roots[b]));
    Ok(RootSet {
        roots,
        family: fam,
        rho: None,
        degenerate,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn re(rs: &RootSet) -> Vec<f64> {
        rs.roots.iter().map(|z| z.re).collect()
    }

    #[test]
    fn closed_form_examples() {
        assert_eq!(
            re(&nonminimal_roots_closed(5, 0, NmFamily::NmMean).unwrap()),
            [0.0, -3.0, -2.0, -5.0]
        );
        assert_eq!(
            re(&nonminimal_roots_closed(4, 2, NmFamily::NmMode).unwrap()),
            [2.0, -4.0, 0.0, -6.0]
        );
        assert_eq!(
            re(&nonminimal_roots_closed(4, 2, NmFamily::NmTilde).unwrap()),
            [3.0, -3.0, 1.0, -5.0]
        );
        assert_eq!(
            re(&nonminimal_roots_closed(7, 1, NmFamily::NmMode).unwrap()),
            [1.0, -6.0, -1.0, -8.0]
        );
        assert_eq!(
            re(&nonminimal_roots_closed(3, 9, NmFamily::NmMean).unwrap()),
            [0.0, -1.0, -2.0, -3.0]
        );
        assert_eq!(
            re(&nonminimal_roots_closed(5, 3, NmFamily::NmTilde).unwrap()),
            [4.0, -5.0, 2.0, -7.0]
        );
    }

    #[test]
    fn closed_forms_are_roots() {
        for fam in [NmFamily::NmMode, NmFamily::NmMean, NmFamily::NmTilde] {
            for n in 3..=12 {
                for i in 1..=8 {
                    let q = nonminimal_quartic(n, i, fam).unwrap();
                    for z in nonminimal_roots_closed(n, i, fam).unwrap().roots {
                        assert_eq!(q.eval(z).norm(), 0.0, "{fam:?} N={n} i={i} z={z}");
                    }
                }
            }
        }
    }

    #[test]
    fn domain_errors() {
        assert_eq!(
            nonminimal_quartic(2, 1, NmFamily::NmMode)
                .unwrap_err()
                .kind(),
            "DomainError"
        );
        assert_eq!(
            nonminimal_quartic(5, 0, NmFamily::NmTilde)
                .unwrap_err()
                .kind(),
            "DomainError"
        );
        assert!(nonminimal_quartic(5, 0, NmFamily::NmMean).is_ok());
    }
}
