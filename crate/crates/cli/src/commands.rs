use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use brl_core::asymptotics::{
    ef_transform, kelvin_profile, minimal_rate, nonminimal_diagnostics, quadratic_remainder_series,
    write_series_csv,
};
use brl_core::charpoly::{
    match_roots, mode_quartic, mode_roots_closed, nonminimal_quartic, nonminimal_roots_closed,
    solve_quartic, NmFamily, RootSet,
};
use brl_core::params::{classify, derive_constants, Parameters};
use brl_core::shooting::{find_b_tilde, nonminimal_solution, ShootingConfig};
use brl_core::{Error, Result};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::report::Status;
use crate::{ClaimsArgs, ConstantsArgs, FamilyArg, RateMode, RatesArgs, RootsArgs, ShootArgs};

/// Tolerance on fitted remainder exponents.
const RATE_TOL: f64 = 0.3;
/// Tolerance on fitted κ when the rate carries a logarithm.
const RATE_TOL_LOG: f64 = 0.5;

fn params(n: u32, p: Option<f64>) -> Result<Parameters> {
    if n < 3 {
        return Err(Error::Domain(format!("N = {n}: the dimension must be at least 3")));
    }
    let p = p.ok_or_else(|| Error::Domain("--p (or --grid) is required".into()))?;
    Parameters::new(n, p)
}

fn to_value<T: Serialize>(v: &T) -> Value {
    serde_json::to_value(v).expect("report types serialise")
}

fn csv_error(path: &Path, e: std::io::Error) -> Error {
    Error::InvalidConfig(format!("cannot write {}: {e}", path.display()))
}

fn write_csv_file(path: &Path, f: impl FnOnce(BufWriter<File>) -> std::io::Result<()>) -> Result<()> {
    let file = File::create(path).map_err(|e| csv_error(path, e))?;
    f(BufWriter::new(file)).map_err(|e| csv_error(path, e))
}

pub fn constants(args: &ConstantsArgs) -> Result<(Value, Status)> {
    let params = params(args.n, args.p)?;
    let out = json!({
        "constants": derive_constants(&params)?,
        "regime": classify(&params)?,
    });
    Ok((out, Status::Ok))
}

#[derive(Serialize)]
struct RootRow {
    #[serde(skip_serializing_if = "Option::is_none")]
    k: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    i: Option<i64>,
    closed: [Complex64; 4],
    /// Numeric roots, paired with `closed` entry by entry.
    oracle: [Complex64; 4],
    max_deviation: f64,
    degenerate: bool,
}

fn row(k: Option<u32>, i: Option<i64>, closed: &RootSet, numeric: &RootSet) -> RootRow {
    let m = match_roots(&closed.roots, &numeric.roots);
    RootRow {
        k,
        i,
        closed: closed.roots,
        oracle: m.perm.map(|j| numeric.roots[j]),
        max_deviation: m.max_distance,
        degenerate: closed.degenerate || numeric.degenerate,
    }
}

pub fn roots(args: &RootsArgs) -> Result<(Value, Status)> {
    let nm = match args.family {
        FamilyArg::Mode => None,
        FamilyArg::NmMode => Some(NmFamily::NmMode),
        FamilyArg::NmMean => Some(NmFamily::NmMean),
        FamilyArg::NmTilde => Some(NmFamily::NmTilde),
    };
    let rows = match nm {
        None => {
            let params = params(args.n, args.p)?;
            (0..=args.k_max)
                .map(|k| {
                    let closed = mode_roots_closed(&params, k)?;
                    let numeric = solve_quartic(&mode_quartic(&params, k)?)?;
                    Ok(row(Some(k), None, &closed, &numeric))
                })
                .collect::<Result<Vec<_>>>()?
        }
        Some(fam) => {
            if args.n < 3 {
                return Err(Error::Domain(format!("N = {}: the dimension must be at least 3", args.n)));
            }
            let i = match (fam, args.i) {
                (NmFamily::NmMean, i) => i.unwrap_or(0),
                (_, Some(i)) => i,
                (_, None) => return Err(Error::Domain("--i is required for this family".into())),
            };
            let n = i64::from(args.n);
            let closed = nonminimal_roots_closed(n, i, fam)?;
            let numeric = solve_quartic(&nonminimal_quartic(n, i, fam)?)?;
            vec![row(None, Some(i), &closed, &numeric)]
        }
    };
    let worst = rows.iter().map(|r| r.max_deviation).fold(0.0, f64::max);
    Ok((json!({ "family": args.family, "rows": rows, "max_deviation": worst }), Status::Ok))
}

pub fn verify_claims(args: &ClaimsArgs) -> Result<(Value, Status)> {
    let params = params(args.n, args.p)?;
    let report = brl_core::charpoly::verify_claims(&params, args.k_max)?;
    let status = if report.passed { Status::Ok } else { Status::CheckFailed };
    Ok((to_value(&report), status))
}

pub fn shoot(args: &ShootArgs) -> Result<(Value, Status)> {
    let params = params(args.n, args.p)?;
    let cfg = ShootingConfig {
        r_max: args.r_max,
        tol: args.tol,
        rel_tol: args.rel_tol,
        ..ShootingConfig::default()
    };
    let res = find_b_tilde(args.a, &params, &cfg)?;
    if let Some(path) = &args.emit_csv {
        write_csv_file(path, |w| res.minimal_traj.write_csv(w))?;
    }
    let mut out = to_value(&res);
    out["relative_width"] = json!(res.relative_width());
    out["csv"] = json!(args.emit_csv);
    Ok((out, Status::Ok))
}

pub fn rates(args: &RatesArgs) -> Result<(Value, Status)> {
    let params = params(args.n, args.p)?;
    match args.mode {
        RateMode::Minimal => minimal(args, &params),
        RateMode::Nonminimal => nonminimal(args, &params),
    }
}

fn minimal(args: &RatesArgs, params: &Parameters) -> Result<(Value, Status)> {
    let cfg = ShootingConfig {
        r_max: args.r_max.unwrap_or(500.0),
        ..ShootingConfig::precise()
    };
    let res = find_b_tilde(args.a, params, &cfg)?;
    let window = (cfg.r_max / 10.0, cfg.r_max);
    let rep = minimal_rate(&res.minimal_traj, window)?;
    let deviation = (rep.fitted_exponent - rep.prediction.exponent).abs();
    let passed = deviation <= RATE_TOL;
    if let Some(path) = &args.emit_csv {
        let dc = derive_constants(params)?;
        let (series, header) = if rep.oscillation_fit.is_some() {
            let m = ef_transform(&res.minimal_traj, dc.alpha)?;
            let (lo, hi) = (window.0.ln(), window.1.ln());
            (m.into_iter().filter(|(t, _)| *t >= lo && *t <= hi).collect::<Vec<_>>(), ("t", "m"))
        } else {
            let k = kelvin_profile(&res.minimal_traj, &dc)?;
            let (lo, hi) = (1.0 / window.1, 1.0 / window.0);
            (k.into_iter().filter(|(s, _)| *s >= lo && *s <= hi).collect(), ("s", "value"))
        };
        write_csv_file(path, |w| write_series_csv(&series, header, w))?;
    }
    let out = json!({
        "mode": "minimal",
        "b_lo": res.b_lo,
        "b_hi": res.b_hi,
        "predicted_exponent": rep.prediction.exponent,
        "fitted_exponent": rep.fitted_exponent,
        "deviation": deviation,
        "tolerance": RATE_TOL,
        "passed": passed,
        "fit": rep,
        "csv": args.emit_csv,
    });
    Ok((out, if passed { Status::Ok } else { Status::CheckFailed }))
}

fn nonminimal(args: &RatesArgs, params: &Parameters) -> Result<(Value, Status)> {
    if !(args.b_mult > 1.0 && args.b_mult.is_finite()) {
        return Err(Error::Domain(format!("--b-mult = {} must exceed 1", args.b_mult)));
    }
    let b_tilde = find_b_tilde(args.a, params, &ShootingConfig::default())?.b_hi;
    let b = args.b_mult * b_tilde;
    let cfg = ShootingConfig {
        r_max: args.r_max.unwrap_or(1000.0),
        ..ShootingConfig::precise()
    };
    let traj = nonminimal_solution(args.a, b, params, &cfg)?;
    let diag = nonminimal_diagnostics(&traj, params)?;
    let tolerance = if diag.log_correction { RATE_TOL_LOG } else { RATE_TOL };
    let deviation = (diag.kappa() - diag.kappa_predicted).abs();
    let passed = deviation <= tolerance;
    if let Some(path) = &args.emit_csv {
        let series = quadratic_remainder_series(&traj);
        write_csv_file(path, |w| write_series_csv(&series, ("r", "value"), w))?;
    }
    let out = json!({
        "mode": "nonminimal",
        "b_tilde": b_tilde,
        "b": b,
        "kappa_predicted": diag.kappa_predicted,
        "kappa_fitted": diag.kappa(),
        "log_correction": diag.log_correction,
        "deviation": deviation,
        "tolerance": tolerance,
        "passed": passed,
        "diagnostics": diag,
        "csv": args.emit_csv,
    });
    Ok((out, if passed { Status::Ok } else { Status::CheckFailed }))
}
