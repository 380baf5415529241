//! Interval-checked sufficient conditions for order-2 subadditivity of `f`.
//!
//! Five conditions are checked, one per region bound:
//!
//! | region | condition |
//! |---|---|
//! | A | `alpha <= C / (1 + 2 exp(-(mu/sigma)^2))` |
//! | B | `1 + sigma * sqrt(3/2) <= mu` |
//! | B | `alpha <= 17 sigma^2 / (54 phi((mu - 1)/sigma))` |
//! | C | `1/2 <= mu` |
//! | C | `alpha <= sigma * sqrt(e/2)` |
//!
//! Each side is enclosed in an [`Interval`] and compared with
//! [`Interval::certainly_le`]. A certified report means every bound holds; a
//! report that is not certified only says the bounds could not be
//! established.
//!
//! The region-C bound does not by itself keep the gap nonnegative on that
//! region: at `(mu, sigma, alpha) = (1.2, 0.05, 0.05)`, which passes all five
//! checks, the order-2 gap is about `-0.0103` at `(0.0245, 1.137)`. See
//! [`crate::search::find_violation`].

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::analytic::Params;
use crate::error::IntervalError;
use crate::interval::{Interval, Tri};

pub const REGION_A: &str = "A: alpha <= C / (1 + 2 exp(-(mu/sigma)^2))";
pub const REGION_B_RING: &str = "B: 1 + sigma sqrt(3/2) <= mu";
pub const REGION_B_ALPHA: &str = "B: alpha <= 17 sigma^2 / (54 phi((mu-1)/sigma))";
/// Same inequality as [`REGION_B_ALPHA`], multiplied through by the positive
/// `phi`; used when `phi` underflows or the quotient overflows.
pub const REGION_B_ALPHA_SCALED: &str = "B: 54 alpha phi((mu-1)/sigma) <= 17 sigma^2";
pub const REGION_C_RING: &str = "C: 1/2 <= mu";
pub const REGION_C_ALPHA: &str = "C: alpha <= sigma sqrt(e/2)";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionResult {
    pub name: String,
    /// `None` when the side could not be evaluated; the verdict is then
    /// `Unknown`.
    pub lhs: Option<Interval>,
    pub rhs: Option<Interval>,
    pub verdict: Tri,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl ConditionResult {
    fn compare(name: &str, lhs: Interval, rhs: Interval) -> Self {
        Self {
            name: name.to_owned(),
            lhs: Some(lhs),
            rhs: Some(rhs),
            verdict: lhs.certainly_le(rhs),
            detail: None,
        }
    }

    fn undecided(name: &str, detail: String) -> Self {
        Self {
            name: name.to_owned(),
            lhs: None,
            rhs: None,
            verdict: Tri::Unknown,
            detail: Some(detail),
        }
    }

    fn from_eval(name: &str, sides: Result<(Interval, Interval), IntervalError>) -> Self {
        match sides {
            Ok((l, r)) => Self::compare(name, l, r),
            Err(e) => Self::undecided(name, e.to_string()),
        }
    }

    /// The verdict agrees with the stored enclosures.
    pub fn is_consistent(&self) -> bool {
        match (self.lhs, self.rhs) {
            (Some(l), Some(r)) => l.certainly_le(r) == self.verdict,
            _ => self.verdict == Tri::Unknown,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    Certified,
    NotCertified,
    Unknown,
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::Certified => "CERTIFIED",
            Verdict::NotCertified => "NOT_CERTIFIED",
            Verdict::Unknown => "UNKNOWN",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateReport {
    pub params: Params,
    pub conditions: Vec<ConditionResult>,
    pub verdict: Verdict,
    pub note: String,
}

impl CertificateReport {
    pub fn condition(&self, name: &str) -> Option<&ConditionResult> {
        self.conditions.iter().find(|c| c.name == name)
    }
}

fn pt(v: f64) -> Result<Interval, IntervalError> {
    Interval::point(v)
}

/// `log(9/8)`, enclosed from the exactly representable `1.125`.
pub fn c_enclosure() -> Result<Interval, IntervalError> {
    pt(1.125)?.ln()
}

/// `(4 z^2 - 2) exp(-z^2)` as a pair (polynomial factor, exponential factor).
fn phi_factors(z: Interval) -> Result<(Interval, Interval), IntervalError> {
    let z2 = z.sq()?;
    let poly = pt(4.0)?.mul(z2)?.sub(pt(2.0)?)?;
    Ok((poly, z2.neg().exp()?))
}

pub fn check_region_a(p: &Params) -> ConditionResult {
    let sides = (|| {
        let ratio = pt(p.mu())?.div(pt(p.sigma())?)?;
        let tail = ratio.sq()?.neg().exp()?;
        let denom = pt(1.0)?.add(pt(2.0)?.mul(tail)?)?;
        Ok((pt(p.alpha())?, c_enclosure()?.div(denom)?))
    })();
    ConditionResult::from_eval(REGION_A, sides)
}

pub fn check_region_b(p: &Params) -> (ConditionResult, ConditionResult) {
    let ring = (|| {
        let lhs = pt(1.0)?.add(pt(p.sigma())?.mul(pt(1.5)?.sqrt()?)?)?;
        Ok((lhs, pt(p.mu())?))
    })();
    let ring = ConditionResult::from_eval(REGION_B_RING, ring);

    let factors = (|| {
        let z = pt(p.mu())?.sub(pt(1.0)?)?.div(pt(p.sigma())?)?;
        phi_factors(z)
    })();
    let (poly, expo) = match factors {
        Ok(f) => f,
        Err(e) => {
            return (
                ring,
                ConditionResult::undecided(REGION_B_ALPHA, e.to_string()),
            )
        }
    };
    if !(poly.lo() > 0.0) {
        return (
            ring,
            ConditionResult::undecided(
                REGION_B_ALPHA,
                format!("phi((mu-1)/sigma) is not certainly positive: 4z^2 - 2 in {poly}"),
            ),
        );
    }

    let seventeen_s2 = || pt(17.0)?.mul(pt(p.sigma())?.sq()?);
    let direct = (|| {
        if !(expo.lo() > 0.0) {
            return Err(IntervalError::Range { op: "phi" });
        }
        let phi = poly.mul(expo)?;
        let bound = seventeen_s2()?.div(pt(54.0)?.mul(phi)?)?;
        Ok((pt(p.alpha())?, bound))
    })();
    let alpha = match direct {
        Ok((l, r)) => ConditionResult::compare(REGION_B_ALPHA, l, r),
        Err(_) => {
            let scaled = (|| {
                let phi = poly.mul(expo)?;
                let lhs = pt(54.0)?.mul(pt(p.alpha())?)?.mul(phi)?;
                Ok((lhs, seventeen_s2()?))
            })();
            ConditionResult::from_eval(REGION_B_ALPHA_SCALED, scaled)
        }
    };
    (ring, alpha)
}

pub fn check_region_c(p: &Params) -> (ConditionResult, ConditionResult) {
    let ring = ConditionResult::from_eval(REGION_C_RING, (|| Ok((pt(0.5)?, pt(p.mu())?)))());
    let alpha = (|| {
        let half_e = pt(1.0)?.exp()?.div(pt(2.0)?)?;
        Ok((pt(p.alpha())?, pt(p.sigma())?.mul(half_e.sqrt()?)?))
    })();
    (ring, ConditionResult::from_eval(REGION_C_ALPHA, alpha))
}

pub fn certify_s2(p: &Params) -> CertificateReport {
    let a = check_region_a(p);
    let (b1, b2) = check_region_b(p);
    let (c1, c2) = check_region_c(p);
    let conditions = vec![a, b1, b2, c1, c2];

    let verdict = if conditions.iter().all(|c| c.verdict == Tri::True) {
        Verdict::Certified
    } else if conditions.iter().any(|c| c.verdict == Tri::False) {
        Verdict::NotCertified
    } else {
        Verdict::Unknown
    };
    let note = match verdict {
        Verdict::Certified => "all five sufficient conditions hold".to_owned(),
        Verdict::NotCertified => "at least one sufficient condition fails; this does not \
                                  show that f violates order-2 subadditivity"
            .to_owned(),
        Verdict::Unknown => "interval enclosures could not decide every condition".to_owned(),
    };
    CertificateReport {
        params: *p,
        conditions,
        verdict,
        note,
    }
}
