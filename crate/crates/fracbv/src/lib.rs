//! Numerical laboratory for fractional total variation and 1D scalar
//! conservation laws.
//!
//! The crate computes the s-total variation `TV^s` of step functions exactly,
//! solves `u_t + f(u)_x = 0` by wave-front tracking (piecewise-affine flux)
//! and by the Lax-Oleinik variational formula (smooth degenerate convex flux),
//! and verifies stability, smoothing and decay estimates as executable checks.
//!
//! The numeric core is generic over the scalar type (f32/f64) via
//! [`scalar::Scalar`]; `f64` aliases are exported at the crate root.

pub mod error;
pub mod front_tracking;
pub mod funcs;
pub mod scalar;
pub mod variation;

pub use error::{Error, Result};
pub use scalar::Scalar;

/// CLI entry point; returns the process exit code.
pub fn run_cli() -> i32 {
    // replaced by the real dispatcher once the cli module lands
    eprintln!("fracbv: CLI not yet wired");
    2
}

/// f64 step function (the default precision used by the CLI).
pub type StepFn = funcs::StepFunction<f64>;
/// f64 grid function.
pub type GridFn = funcs::GridFunction<f64>;
/// f64 interval.
pub type Iv = funcs::Interval<f64>;
/// f64 variation exponent.
pub type SExp = variation::SExponent<f64>;
