//! Tools for studying `a`-subadditive functions: the inequality
//! `f(a*x + y) <= a*f(x) + f(y)`.
//!
//! * [`analytic`] and [`hp`] evaluate the perturbed family
//!   `f = g + alpha * (h - h(0))` in `f64` and in software high precision.
//! * [`interval`] and [`certificate`] check sufficient conditions for order 2
//!   with outward-rounded interval arithmetic.
//! * [`search`] scans the gap and certifies violations.
//! * [`oracles`] executes the auxiliary lemmas as numerical checks.
//! * [`suite`] runs the analytic and oracle invariants as named checks.
//! * [`cone`] builds, in exact rational arithmetic, a subadditive bijection of
//!   a positive rational cone with `liminf 0` and `limsup 1` at the origin.

pub mod analytic;
pub mod certificate;
pub mod cone;
pub mod error;
pub mod hp;
pub mod interval;
pub mod oracles;
pub mod search;
pub mod suite;

pub use analytic::{FnHandle, Order, Params, Point, RegionFlags};
pub use error::{Error, IntervalError, Result};
pub use interval::{Interval, Tri};
