//! Numerical laboratory for radial solutions of `-Δ²u = u^(-p)` in `R^N`.
//!
//! The crate computes the closed-form constants and characteristic exponents
//! of the problem, locates the critical shooting parameter `b̃(a)` that
//! separates minimal, non-minimal and non-entire radial solutions, and
//! measures asymptotic decay rates on numerical trajectories.

pub mod asymptotics;
pub mod charpoly;
pub mod error;
pub mod par;
pub mod params;
pub mod radial_ode;
pub mod shooting;
pub mod spectra;

pub use error::{Error, Result};
pub use params::{DerivedConstants, Parameters, Regime};
