//! Spherical harmonic spectrum on `S^(N-1)`: eigenvalues `λ_k = k(N+k-2)` of
//! the Laplace–Beltrami operator, their multiplicities, and the eigenvalues
//! `λ_k²` of its square.

use serde::Serialize;

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SphereMode {
    pub k: u64,
    pub lambda_k: u64,
    pub m_k: u128,
}

fn check(k: i64, n: i64) -> Result<(u64, u64)> {
    if k < 0 {
        return Err(Error::Domain(format!(
            "mode index k = {k} must be non-negative"
        )));
    }
    if n < 3 {
        return Err(Error::Domain(format!(
            "dimension N = {n} must be at least 3"
        )));
    }
    Ok((k as u64, n as u64))
}

/// `k(N+k-2)` in exact integer arithmetic.
pub fn eigenvalue_exact(k: i64, n: i64) -> Result<u64> {
    let (k, n) = check(k, n)?;
    k.checked_mul(n + k - 2)
        .ok_or_else(|| Error::Overflow(format!("lambda_{k} for N = {n}")))
}

pub fn eigenvalue(k: i64, n: i64) -> Result<f64> {
    eigenvalue_exact(k, n).map(|v| v as f64)
}

pub fn bilap_eigenvalue(k: i64, n: i64) -> Result<f64> {
    eigenvalue(k, n).map(|l| l * l)
}

fn gcd(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `(N-2+2k)(N-3+k)! / (k!(N-2)!)`, evaluated as
/// `(N-2+2k)/(N-2) · C(N-3+k, k)` without factorials.
pub fn multiplicity(k: i64, n: i64) -> Result<u128> {
    let (k, n) = check(k, n)?;
    let overflow = || Error::Overflow(format!("multiplicity m_{k} for N = {n}"));
    let top = u128::from(n - 3 + k);
    let j_max = u128::from(k.min(n - 3));
    let mut binom: u128 = 1;
    for j in 1..=j_max {
        // binom = C(top - j_max + j, j) after this step; each step stays integral.
        let num = top - j_max + j;
        let g = gcd(binom, j);
        binom = (binom / g)
            .checked_mul(num / (j / g))
            .ok_or_else(overflow)?;
    }
    let lead = u128::from(n - 2 + 2 * k);
    let den = u128::from(n - 2);
    let g = gcd(lead, den);
    let (lead, den) = (lead / g, den / g);
    // den divides binom because the multiplicity is an integer.
    lead.checked_mul(binom / den).ok_or_else(overflow)
}

pub fn sphere_mode(k: i64, n: i64) -> Result<SphereMode> {
    Ok(SphereMode {
        k: k as u64,
        lambda_k: eigenvalue_exact(k, n)?,
        m_k: multiplicity(k, n)?,
    })
}
