//! Closed intervals with outward rounding.
//!
//! Endpoints are computed in round-to-nearest and then pushed outward by a
//! fixed number of representable steps: two for the field operations, four for
//! the elementary functions. The standard library's `exp`, `ln` and `sqrt` are
//! faithful to well under one step, so the enclosure always holds.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::IntervalError;

const ARITH_STEPS: u32 = 2;
const ELEM_STEPS: u32 = 4;

type Result<T> = std::result::Result<T, IntervalError>;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    lo: f64,
    hi: f64,
}

/// Outcome of comparing two enclosures.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Tri {
    True,
    False,
    Unknown,
}

impl Tri {
    pub fn is_true(self) -> bool {
        self == Tri::True
    }
}

impl fmt::Display for Tri {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Tri::True => "TRUE",
            Tri::False => "FALSE",
            Tri::Unknown => "UNKNOWN",
        })
    }
}

fn down(mut v: f64, steps: u32) -> f64 {
    for _ in 0..steps {
        v = v.next_down();
    }
    v
}

fn up(mut v: f64, steps: u32) -> f64 {
    for _ in 0..steps {
        v = v.next_up();
    }
    v
}

// the operations are fallible, so they are methods rather than operator impls
#[allow(clippy::should_implement_trait)]
impl Interval {
    pub fn new(lo: f64, hi: f64) -> Result<Self> {
        if lo.is_finite() && hi.is_finite() && lo <= hi {
            Ok(Self { lo, hi })
        } else {
            Err(IntervalError::Malformed { lo, hi })
        }
    }

    /// The degenerate interval `[v, v]`; `v` must be finite.
    pub fn point(v: f64) -> Result<Self> {
        Self::new(v, v)
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }

    pub fn hi(&self) -> f64 {
        self.hi
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }

    pub fn mid(&self) -> f64 {
        self.lo + 0.5 * (self.hi - self.lo)
    }

    pub fn contains(&self, v: f64) -> bool {
        self.lo <= v && v <= self.hi
    }

    pub fn contains_zero(&self) -> bool {
        self.contains(0.0)
    }

    fn widened(lo: f64, hi: f64, steps: u32, op: &'static str) -> Result<Self> {
        let (lo, hi) = (down(lo, steps), up(hi, steps));
        if !(lo.is_finite() && hi.is_finite()) {
            return Err(IntervalError::Range { op });
        }
        Ok(Self { lo, hi })
    }

    pub fn add(self, o: Self) -> Result<Self> {
        Self::widened(self.lo + o.lo, self.hi + o.hi, ARITH_STEPS, "add")
    }

    pub fn sub(self, o: Self) -> Result<Self> {
        Self::widened(self.lo - o.hi, self.hi - o.lo, ARITH_STEPS, "sub")
    }

    pub fn mul(self, o: Self) -> Result<Self> {
        let c = [
            self.lo * o.lo,
            self.lo * o.hi,
            self.hi * o.lo,
            self.hi * o.hi,
        ];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::widened(lo, hi, ARITH_STEPS, "mul")
    }

    pub fn div(self, o: Self) -> Result<Self> {
        if o.contains_zero() {
            return Err(IntervalError::Singularity);
        }
        let c = [
            self.lo / o.lo,
            self.lo / o.hi,
            self.hi / o.lo,
            self.hi / o.hi,
        ];
        let lo = c.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = c.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        Self::widened(lo, hi, ARITH_STEPS, "div")
    }

    pub fn neg(self) -> Self {
        Self {
            lo: -self.hi,
            hi: -self.lo,
        }
    }

    /// Image of `x -> x^2`; splits at zero.
    pub fn sq(self) -> Result<Self> {
        let (a, b) = (self.lo.abs(), self.hi.abs());
        let (small, large) = if self.contains_zero() {
            (0.0, a.max(b))
        } else {
            (a.min(b), a.max(b))
        };
        let out = Self::widened(small * small, large * large, ELEM_STEPS, "sq")?;
        Ok(Self {
            lo: out.lo.max(0.0),
            hi: out.hi,
        })
    }

    /// Exponentials that underflow keep `0` as lower bound and at least the
    /// smallest positive subnormal as upper bound.
    pub fn exp(self) -> Result<Self> {
        let lo = down(self.lo.exp(), ELEM_STEPS).max(0.0);
        let hi = up(self.hi.exp(), ELEM_STEPS);
        if !hi.is_finite() {
            return Err(IntervalError::Range { op: "exp" });
        }
        Ok(Self { lo, hi })
    }

    pub fn ln(self) -> Result<Self> {
        if !(self.lo > 0.0) {
            return Err(IntervalError::Domain {
                op: "ln",
                lo: self.lo,
                hi: self.hi,
            });
        }
        Self::widened(self.lo.ln(), self.hi.ln(), ELEM_STEPS, "ln")
    }

    pub fn sqrt(self) -> Result<Self> {
        if !(self.lo >= 0.0) {
            return Err(IntervalError::Domain {
                op: "sqrt",
                lo: self.lo,
                hi: self.hi,
            });
        }
        let out = Self::widened(self.lo.sqrt(), self.hi.sqrt(), ELEM_STEPS, "sqrt")?;
        Ok(Self {
            lo: out.lo.max(0.0),
            hi: out.hi,
        })
    }

    /// `TRUE` iff every element of `self` is `<=` every element of `o`,
    /// `FALSE` iff every element of `self` is `>` every element of `o`.
    pub fn certainly_le(self, o: Self) -> Tri {
        if self.hi <= o.lo {
            Tri::True
        } else if self.lo > o.hi {
            Tri::False
        } else {
            Tri::Unknown
        }
    }
}

impl fmt::Display for Interval {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{:e}, {:e}]", self.lo, self.hi)
    }
}
