//! Scalar functions behind the perturbed family
//!
//! `f(x) = g(x) + alpha * (h(x) - h(0))` with `g(x) = |x| + log(1 + |x|)` and the
//! Gaussian ring `h(x) = exp(-((|x| - mu) / sigma)^2)`, together with the
//! auxiliary functions used to bound the gap `a*w(x) + w(y) - w(a*x + y)`.
//!
//! Everything here is evaluated in `f64`. The [`crate::hp`] module mirrors the
//! functions that need an independent high-precision route.
//!
//! `h(0)` underflows to `0.0` once `mu / sigma` exceeds roughly 27; this is
//! accepted silently, the true value being below `1e-300`.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The triple `(mu, sigma, alpha)`: ring center, ring width and perturbation
/// amplitude. All three are positive and finite.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawParams")]
pub struct Params {
    mu: f64,
    sigma: f64,
    alpha: f64,
}

#[derive(Deserialize)]
struct RawParams {
    mu: f64,
    sigma: f64,
    alpha: f64,
}

impl TryFrom<RawParams> for Params {
    type Error = Error;

    fn try_from(raw: RawParams) -> Result<Self> {
        Params::new(raw.mu, raw.sigma, raw.alpha)
    }
}

impl Params {
    pub fn new(mu: f64, sigma: f64, alpha: f64) -> Result<Self> {
        for (name, v) in [("mu", mu), ("sigma", sigma), ("alpha", alpha)] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidParams(format!(
                    "{name} must be a positive finite real, got {v}"
                )));
            }
        }
        Ok(Self { mu, sigma, alpha })
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    /// Same ring, different amplitude.
    pub fn with_alpha(&self, alpha: f64) -> Result<Self> {
        Self::new(self.mu, self.sigma, alpha)
    }
}

impl fmt::Display for Params {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "(mu={}, sigma={}, alpha={})",
            self.mu, self.sigma, self.alpha
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Point {
    pub x: f64,
    pub y: f64,
}

impl Point {
    pub fn new(x: f64, y: f64) -> Result<Self> {
        if !(x.is_finite() && y.is_finite()) {
            return Err(Error::Input(format!("point ({x}, {y}) is not finite")));
        }
        Ok(Self { x, y })
    }
}

/// The order `a > 0` of the inequality `f(a*x + y) <= a*f(x) + f(y)`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Order(f64);

impl Order {
    pub const ONE: Order = Order(1.0);
    pub const TWO: Order = Order(2.0);
    pub const THREE: Order = Order(3.0);

    pub fn new(a: f64) -> Result<Self> {
        if !(a.is_finite() && a > 0.0) {
            return Err(Error::Input(format!(
                "order must be a positive finite real, got {a}"
            )));
        }
        Ok(Self(a))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Order {
    type Error = Error;

    fn try_from(a: f64) -> Result<Self> {
        Order::new(a)
    }
}

impl From<Order> for f64 {
    fn from(a: Order) -> f64 {
        a.0
    }
}

impl fmt::Display for Order {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Which function the gap is taken of.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FnHandle {
    F,
    G,
    H,
    /// `h - h(0)`, the normalized perturbation.
    HShifted,
}

impl FnHandle {
    pub fn eval(self, x: f64, p: &Params) -> f64 {
        match self {
            FnHandle::F => eval_f(x, p),
            FnHandle::G => eval_g(x),
            FnHandle::H => eval_h(x, p),
            FnHandle::HShifted => eval_h(x, p) - eval_h(0.0, p),
        }
    }
}

impl FromStr for FnHandle {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "f" => Ok(FnHandle::F),
            "g" => Ok(FnHandle::G),
            "h" => Ok(FnHandle::H),
            "h-h0" | "h_shifted" => Ok(FnHandle::HShifted),
            other => Err(Error::Input(format!("unknown function handle '{other}'"))),
        }
    }
}

/// Membership in the three closed regions covering the plane.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionFlags {
    pub in_a: bool,
    pub in_b: bool,
    pub in_c: bool,
}

impl RegionFlags {
    pub fn any(&self) -> bool {
        self.in_a || self.in_b || self.in_c
    }
}

pub fn eval_g(x: f64) -> f64 {
    let ax = x.abs();
    ax + ax.ln_1p()
}

pub fn eval_h(x: f64, p: &Params) -> f64 {
    let z = (x.abs() - p.mu) / p.sigma;
    (-(z * z)).exp()
}

pub fn eval_f(x: f64, p: &Params) -> f64 {
    eval_g(x) + p.alpha * (eval_h(x, p) - eval_h(0.0, p))
}

/// `a*w(x) + w(y) - w(a*x + y)`. Nonnegative exactly where the order-`a`
/// inequality holds at `(x, y)`.
pub fn gap(a: Order, w: FnHandle, x: f64, y: f64, p: &Params) -> f64 {
    let a = a.value();
    a * w.eval(x, p) + w.eval(y, p) - w.eval(a * x + y, p)
}

/// `(4z^2 - 2) exp(-z^2)`, for `z >= 0`. Even in `z`.
pub fn eval_phi(z: f64) -> f64 {
    let z2 = z * z;
    (4.0 * z2 - 2.0) * (-z2).exp()
}

/// `2 log(1 + z) - log(1 + 2z)`, for `z >= 0`.
pub fn eval_lambda(z: f64) -> f64 {
    2.0 * z.ln_1p() - (2.0 * z).ln_1p()
}

/// `log((1 + z)^2 (1 - z))` on `[0, 1)`.
pub fn eval_psi(z: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&z) {
        return Err(Error::Domain(format!("psi is defined on [0, 1), got {z}")));
    }
    Ok(2.0 * z.ln_1p() + (-z).ln_1p())
}

/// `log(9/8)`, the lower bound of the `g`-gap on the region `|x| >= 1/2`.
pub fn eval_c() -> f64 {
    1.125_f64.ln()
}

pub fn classify_region(x: f64, y: f64) -> RegionFlags {
    let ax = x.abs();
    let s = 2.0 * ax + y.abs();
    RegionFlags {
        in_a: ax >= 0.5,
        in_b: s <= 1.0,
        in_c: ax <= 0.5 && s >= 1.0,
    }
}

/// Derivative of `f` on `t > 0`.
pub fn f_prime(t: f64, p: &Params) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::Domain(format!(
            "f' is evaluated on t > 0 only, got {t}"
        )));
    }
    let slope = 2.0 * p.alpha / (p.sigma * p.sigma);
    Ok(1.0 + 1.0 / (1.0 + t) + slope * (p.mu - t) * eval_h(t, p))
}

/// `h'(x)` for `x != 0`; odd in `x`.
pub fn h_prime(x: f64, p: &Params) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Domain("h is not differentiable at 0".into()));
    }
    let ax = x.abs();
    let d = 2.0 * eval_h(ax, p) * (p.mu - ax) / (p.sigma * p.sigma);
    Ok(if x > 0.0 { d } else { -d })
}

/// `sup |h'| = sqrt(2/e) / sigma`, attained at `||x| - mu| = sigma / sqrt(2)`.
pub fn h_prime_sup(p: &Params) -> f64 {
    (2.0 / std::f64::consts::E).sqrt() / p.sigma
}

/// `h''(x) = phi((|x| - mu) / sigma) / sigma^2` for `x != 0`.
pub fn h_second(x: f64, p: &Params) -> Result<f64> {
    if x == 0.0 {
        return Err(Error::Domain("h is not twice differentiable at 0".into()));
    }
    Ok(eval_phi((x.abs() - p.mu) / p.sigma) / (p.sigma * p.sigma))
}

/// `g''(u) = -1 / (1 + |u|)^2` away from the origin.
pub fn g_second(u: f64) -> f64 {
    let d = 1.0 + u.abs();
    -1.0 / (d * d)
}

/// `f'' = g'' + alpha * h''` away from the origin.
pub fn f_second(u: f64, p: &Params) -> Result<f64> {
    Ok(g_second(u) + p.alpha * h_second(u, p)?)
}
