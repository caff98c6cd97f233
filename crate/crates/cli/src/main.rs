//! `brl`: constants, characteristic roots, claim checks, shooting and rate
//! fits for radial solutions of `-Δ²u = u^(-p)`.

mod commands;
mod report;

use std::process::ExitCode;
use std::time::Instant;

use brl_core::{par, Error};
use clap::{Args, Parser, Subcommand};
use serde::Serialize;
use serde_json::Value;

use report::{ErrorReport, Line, RunReport, Status, SCHEMA_VERSION};

#[derive(Parser)]
#[command(name = "brl", version, about = "Radial biharmonic laboratory")]
struct Cli {
    #[command(flatten)]
    output: Output,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Derived constants and regime classification.
    Constants(ConstantsArgs),
    /// Characteristic roots, closed form against the numeric oracle.
    Roots(RootsArgs),
    /// Ordering and branch claims for the characteristic roots.
    VerifyClaims(ClaimsArgs),
    /// Critical shooting parameter b̃(a).
    Shoot(ShootArgs),
    /// Remainder exponents of minimal and non-minimal solutions.
    Rates(RatesArgs),
}

#[derive(Args, Clone)]
struct Output {
    /// Emit compact JSON (one line per report).
    #[arg(long, global = true)]
    json: bool,
    /// Sweep p over `start:stop:count` (inclusive), one JSON line per point.
    #[arg(long, value_parser = parse_grid, global = true)]
    grid: Option<Grid>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Grid {
    start: f64,
    stop: f64,
    count: usize,
}

impl Grid {
    fn points(&self) -> Vec<f64> {
        if self.count == 1 {
            return vec![self.start];
        }
        let h = (self.stop - self.start) / (self.count - 1) as f64;
        (0..self.count)
            .map(|j| if j + 1 == self.count { self.stop } else { self.start + j as f64 * h })
            .collect()
    }
}

fn parse_grid(s: &str) -> Result<Grid, String> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err("expected start:stop:count".into());
    }
    let num = |x: &str| x.trim().parse::<f64>().map_err(|e| format!("{x}: {e}"));
    let (start, stop) = (num(parts[0])?, num(parts[1])?);
    let count: usize = parts[2].trim().parse().map_err(|e| format!("{}: {e}", parts[2]))?;
    if count == 0 || !start.is_finite() || !stop.is_finite() {
        return Err("count must be positive and bounds finite".into());
    }
    Ok(Grid { start, stop, count })
}

#[derive(Args, Clone, Serialize)]
pub struct ConstantsArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub p: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FamilyArg {
    Mode,
    NmMode,
    NmMean,
    NmTilde,
}

#[derive(Args, Clone, Serialize)]
pub struct RootsArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub k_max: u32,
    #[arg(long, value_enum, default_value_t = FamilyArg::Mode)]
    pub family: FamilyArg,
    /// Index of the non-minimal family.
    #[arg(long)]
    pub i: Option<i64>,
}

#[derive(Args, Clone, Serialize)]
pub struct ClaimsArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 50)]
    pub k_max: u32,
}

#[derive(Args, Clone, Serialize)]
pub struct ShootArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, default_value_t = 500.0)]
    pub r_max: f64,
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, default_value_t = 1e-8)]
    pub rel_tol: f64,
    /// Write the minimal-proxy trajectory as CSV (r,u,du,v,dv).
    #[arg(long)]
    pub emit_csv: Option<std::path::PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum RateMode {
    Minimal,
    Nonminimal,
}

#[derive(Args, Clone, Serialize)]
pub struct RatesArgs {
    #[arg(long = "N")]
    #[serde(rename = "N")]
    pub n: u32,
    #[arg(long)]
    pub p: Option<f64>,
    #[arg(long, default_value_t = 1.0)]
    pub a: f64,
    #[arg(long, value_enum, default_value_t = RateMode::Minimal)]
    pub mode: RateMode,
    /// b = b_mult · b̃(a) in non-minimal mode.
    #[arg(long, default_value_t = 2.0)]
    pub b_mult: f64,
    /// Defaults to 500 (minimal) or 1000 (non-minimal).
    #[arg(long)]
    pub r_max: Option<f64>,
    /// Write the fitted series as CSV (x,value).
    #[arg(long)]
    pub emit_csv: Option<std::path::PathBuf>,
}

/// Runs `f` once per p value and wraps each outcome.
fn run_points<A, F>(name: &'static str, args: &A, ps: &[Option<f64>], f: F) -> Vec<Line>
where
    A: Serialize + Clone + Sync + WithP,
    F: Fn(&A) -> brl_core::Result<(Value, Status)> + Sync + Send,
{
    par::map(ps, |p| {
        let mut a = args.clone();
        a.set_p(*p);
        let inputs = serde_json::to_value(&a).unwrap_or(Value::Null);
        let start = Instant::now();
        match f(&a) {
            Ok((outputs, status)) => Line::Report(
                RunReport {
                    command: name.to_string(),
                    inputs,
                    outputs,
                    wall_time_ms: start.elapsed().as_millis() as u64,
                    version: SCHEMA_VERSION,
                },
                status,
            ),
            Err(e) => Line::Error(ErrorReport::new(name, inputs, &e), Status::of_error(&e)),
        }
    })
}

pub trait WithP {
    fn set_p(&mut self, p: Option<f64>);
}

macro_rules! with_p {
    ($($t:ty),*) => {$(
        impl WithP for $t {
            fn set_p(&mut self, p: Option<f64>) {
                if p.is_some() {
                    self.p = p;
                }
            }
        }
    )*};
}
with_p!(ConstantsArgs, RootsArgs, ClaimsArgs, ShootArgs, RatesArgs);

fn configure_threads() -> Result<(), Error> {
    let Ok(raw) = std::env::var("BRL_THREADS") else {
        return Ok(());
    };
    let n: usize = raw
        .trim()
        .parse()
        .ok()
        .filter(|n| *n > 0)
        .ok_or_else(|| Error::InvalidConfig(format!("BRL_THREADS = {raw:?} is not a positive integer")))?;
    #[cfg(feature = "parallel")]
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Error::InvalidConfig(format!("thread pool: {e}")))?;
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let output = cli.output.clone();
    if let Err(e) = configure_threads() {
        let line = Line::Error(ErrorReport::new("brl", Value::Null, &e), Status::InputError);
        let _ = line.emit(output.json);
        return ExitCode::from(Status::InputError as u8);
    }
    let ps: Vec<Option<f64>> = match output.grid {
        Some(g) => g.points().into_iter().map(Some).collect(),
        None => vec![None],
    };
    let json = output.json || output.grid.is_some();
    let lines = match &cli.command {
        Command::Constants(a) => run_points("constants", a, &ps, commands::constants),
        Command::Roots(a) => run_points("roots", a, &ps, commands::roots),
        Command::VerifyClaims(a) => run_points("verify-claims", a, &ps, commands::verify_claims),
        Command::Shoot(a) => run_points("shoot", a, &ps, commands::shoot),
        Command::Rates(a) => run_points("rates", a, &ps, commands::rates),
    };
    let mut status = Status::Ok;
    for line in &lines {
        if line.emit(json).is_err() {
            return ExitCode::from(Status::NumericalFailure as u8);
        }
        status = status.max(line.status());
    }
    ExitCode::from(status as u8)
}
