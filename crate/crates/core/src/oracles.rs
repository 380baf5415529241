//! Executable checks of the auxiliary statements: the Rolle-type midpoint
//! identity, monotonicity of `f` on `(0, 1]`, symmetrization on the region
//! `2|x| + |y| <= 1`, concavity of the slice `x -> gap(x, t - 2x)`, bounded
//! semigroup membership, and the rational-indicator example.

use std::collections::BTreeSet;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{self, eval_f, gap, FnHandle, Order, Params};
use crate::certificate::check_region_b;
use crate::error::{Error, Result};

pub const ROLLE_SAMPLES: usize = 10_000;
pub const ROLLE_SLACK: f64 = 1e-8;
pub const MONOTONE_SAMPLES: usize = 10_000;
pub const SYMMETRIZATION_SLACK: f64 = 1e-12;
pub const TAU_POINTS: usize = 1_000;
pub const TAU_SLACK: f64 = 1e-8;

/// Functions the midpoint identity is checked for.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SmoothFn {
    F,
    G,
    H,
}

impl SmoothFn {
    fn value(self, u: f64, p: &Params) -> f64 {
        match self {
            SmoothFn::F => FnHandle::F.eval(u, p),
            SmoothFn::G => FnHandle::G.eval(u, p),
            SmoothFn::H => FnHandle::H.eval(u, p),
        }
    }

    fn second(self, u: f64, p: &Params) -> Result<f64> {
        match self {
            SmoothFn::F => analytic::f_second(u, p),
            SmoothFn::G => Ok(analytic::g_second(u)),
            SmoothFn::H => analytic::h_second(u, p),
        }
    }
}

/// `4 (r(0) - 2 r(t/2) + r(t)) / t^2`, the value `r''` must take somewhere
/// in `(0, t)`.
pub fn midpoint_second_difference(r: impl Fn(f64) -> f64, t: f64) -> f64 {
    4.0 * (r(0.0) - 2.0 * r(0.5 * t) + r(t)) / (t * t)
}

/// Checks that the midpoint second difference lies in the sampled range of
/// `r''` over `(0, t)`, which by the intermediate value theorem exhibits the
/// existence of the point `xi_t`.
pub fn rolle_identity_holds(
    r: impl Fn(f64) -> f64,
    r2: impl Fn(f64) -> Result<f64>,
    t: f64,
) -> Result<bool> {
    if !(t > 0.0 && t.is_finite()) {
        return Err(Error::Domain(format!("t must be positive, got {t}")));
    }
    let v = midpoint_second_difference(r, t);
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for k in 1..=ROLLE_SAMPLES {
        let u = t * k as f64 / (ROLLE_SAMPLES + 1) as f64;
        let s = r2(u)?;
        lo = lo.min(s);
        hi = hi.max(s);
    }
    Ok(lo - ROLLE_SLACK <= v && v <= hi + ROLLE_SLACK)
}

pub fn check_rolle_identity(w: SmoothFn, t: f64, p: &Params) -> Result<bool> {
    rolle_identity_holds(|u| w.value(u, p), |u| w.second(u, p), t)
}

fn require_ring_outside_unit(p: &Params) -> Result<()> {
    if p.mu() < 1.0 {
        return Err(Error::Precondition(format!(
            "requires mu >= 1, got mu = {}",
            p.mu()
        )));
    }
    Ok(())
}

/// `f' > 0` on a uniform sample of `(0, 1]`; requires `mu >= 1`.
pub fn check_monotone_f(p: &Params) -> Result<bool> {
    require_ring_outside_unit(p)?;
    for k in 1..=MONOTONE_SAMPLES {
        let t = k as f64 / MONOTONE_SAMPLES as f64;
        if !(analytic::f_prime(t, p)? > 0.0) {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `gap(2, f, x, y) >= gap(2, f, |x|, |y|)` on `n` random points of
/// `2|x| + |y| <= 1`; requires `mu >= 1`.
pub fn check_symmetrization(p: &Params, n: usize, seed: u64) -> Result<bool> {
    require_ring_outside_unit(p)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..n {
        let x: f64 = rng.gen_range(-0.5..=0.5);
        let reach = 1.0 - 2.0 * x.abs();
        let y: f64 = if reach > 0.0 {
            rng.gen_range(-reach..=reach)
        } else {
            0.0
        };
        let signed = gap(Order::TWO, FnHandle::F, x, y, p);
        let folded = gap(Order::TWO, FnHandle::F, x.abs(), y.abs(), p);
        if signed < folded - SYMMETRIZATION_SLACK {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `tau_t(x) = gap(2, f, x, t - 2x)` on `[0, t/2]`.
pub fn tau(p: &Params, t: f64, x: f64) -> f64 {
    gap(Order::TWO, FnHandle::F, x, t - 2.0 * x, p)
}

/// Concavity of `tau_t` through second central differences at interior
/// points of `(0, t/2)`. Requires both region-B conditions to be certified.
pub fn check_tau_concavity(p: &Params, t: f64) -> Result<bool> {
    if !(t > 0.0 && t <= 1.0) {
        return Err(Error::Domain(format!("t must lie in (0, 1], got {t}")));
    }
    let (ring, alpha) = check_region_b(p);
    if !(ring.verdict.is_true() && alpha.verdict.is_true()) {
        return Err(Error::Precondition(format!(
            "region-B hypotheses are not certified for {p}"
        )));
    }
    let step = 0.5 * t / (TAU_POINTS + 1) as f64;
    for k in 1..=TAU_POINTS {
        let x = step * k as f64;
        let d2 = tau(p, t, x + step) - 2.0 * tau(p, t, x) + tau(p, t, x - step);
        if d2 > TAU_SLACK {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Answer of a bounded semigroup search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Membership {
    Member,
    /// No sum of generators can equal the target, by a divisibility or
    /// exhaustion argument.
    ProvenAbsent,
    /// Not reached within the term budget.
    NotFound,
}

impl Membership {
    pub fn is_member(self) -> bool {
        self == Membership::Member
    }
}

/// Whether `target` is a sum of at most `max_terms` generators (with
/// repetition), searched breadth-first over exact rationals.
pub fn semigroup_member(
    target: &BigRational,
    generators: &[BigRational],
    max_terms: usize,
) -> Result<Membership> {
    if generators.is_empty() {
        return Err(Error::Input("generator set is empty".into()));
    }
    if !target.is_positive() || generators.iter().any(|g| !g.is_positive()) {
        return Err(Error::Input(
            "target and generators must be positive rationals".into(),
        ));
    }

    // over a common denominator every sum is a multiple of the numerator gcd
    let den = generators
        .iter()
        .chain(std::iter::once(target))
        .fold(BigInt::one(), |acc, r| acc.lcm(r.denom()));
    let scaled = |r: &BigRational| (r * BigRational::from(den.clone())).to_integer();
    let step = generators
        .iter()
        .map(scaled)
        .fold(BigInt::zero(), |acc, g| acc.gcd(&g));
    if !scaled(target).is_multiple_of(&step) {
        return Ok(Membership::ProvenAbsent);
    }

    let gens: BTreeSet<BigRational> = generators.iter().cloned().collect();
    let mut frontier: BTreeSet<BigRational> = BTreeSet::from([BigRational::zero()]);
    for _ in 0..max_terms {
        let mut next = BTreeSet::new();
        for s in &frontier {
            for g in &gens {
                let sum = s + g;
                if &sum == target {
                    return Ok(Membership::Member);
                }
                if &sum < target {
                    next.insert(sum);
                }
            }
        }
        if next.is_empty() {
            return Ok(Membership::ProvenAbsent);
        }
        frontier = next;
    }
    Ok(Membership::NotFound)
}

/// Rationality of `x`, `y` and of `a*x + y` for an integer `a`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RationalityCase {
    pub x_rational: bool,
    pub y_rational: bool,
    /// `Some` when forced by the other two, `None` when either is possible.
    pub sum_rational: Option<bool>,
}

impl RationalityCase {
    pub fn new(x_rational: bool, y_rational: bool) -> Self {
        let sum_rational = match (x_rational, y_rational) {
            (true, true) => Some(true),
            (true, false) | (false, true) => Some(false),
            (false, false) => None,
        };
        Self {
            x_rational,
            y_rational,
            sum_rational,
        }
    }

    pub fn all() -> [Self; 4] {
        [
            Self::new(true, true),
            Self::new(true, false),
            Self::new(false, true),
            Self::new(false, false),
        ]
    }
}

/// `1 + 2 * [x is rational]`.
fn indicator_value(rational: bool) -> u32 {
    if rational {
        3
    } else {
        1
    }
}

/// Whether `1 + 2 * 1_Q` is `a`-subadditive, by exhausting the rationality
/// cases and taking the worst admissible choice where the sum is free.
pub fn indicator_example_check(a: u32) -> Result<bool> {
    if !(1..=3).contains(&a) {
        return Err(Error::Input(format!("order must be 1, 2 or 3, got {a}")));
    }
    Ok(RationalityCase::all().iter().all(|case| {
        let rhs = a * indicator_value(case.x_rational) + indicator_value(case.y_rational);
        let worst = match case.sum_rational {
            Some(r) => indicator_value(r),
            None => indicator_value(true).max(indicator_value(false)),
        };
        worst <= rhs
    }))
}

/// `f(2|x| + |y|) - f(2x + y)`, which equals
/// `gap(2, f, x, y) - gap(2, f, |x|, |y|)` because `f` is even.
pub fn fold_difference(p: &Params, x: f64, y: f64) -> f64 {
    eval_f(2.0 * x.abs() + y.abs(), p) - eval_f(2.0 * x + y, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn reference() -> Params {
        Params::new(1.2, 0.05, 0.05).unwrap()
    }

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn rolle_examples() {
        let p = reference();
        assert!(check_rolle_identity(SmoothFn::H, 1.0, &p).unwrap());
        assert!(check_rolle_identity(SmoothFn::G, 0.5, &p).unwrap());
        let v = midpoint_second_difference(analytic::eval_g, 0.5);
        assert!((-1.0..=-4.0 / 9.0).contains(&v));
        assert!(check_rolle_identity(SmoothFn::F, 0.0, &p).is_err());
    }

    #[test]
    fn rolle_is_exact_for_quadratics() {
        let v = midpoint_second_difference(|u| u * u, 0.75);
        assert_eq!(v, 2.0);
        assert!(rolle_identity_holds(|u| u * u, |_| Ok(2.0), 0.75).unwrap());
        // a wrong second derivative is caught
        assert!(!rolle_identity_holds(|u| u * u, |_| Ok(3.0), 0.75).unwrap());
    }

    #[test]
    fn monotone_f() {
        assert!(check_monotone_f(&reference()).unwrap());
        assert!(check_monotone_f(&Params::new(1.0, 0.3, 1.0).unwrap()).unwrap());
        assert!(matches!(
            check_monotone_f(&Params::new(0.9, 0.05, 0.05).unwrap()),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn symmetrization() {
        let p = reference();
        assert!(check_symmetrization(&p, 10_000, 7).unwrap());
        let (x, y) = (0.1, 0.3);
        assert_eq!(
            gap(Order::TWO, FnHandle::F, x, y, &p),
            gap(Order::TWO, FnHandle::F, x.abs(), y.abs(), &p)
        );
        assert_eq!(
            gap(Order::TWO, FnHandle::F, -x, -y, &p),
            gap(Order::TWO, FnHandle::F, x, y, &p)
        );
        assert!(fold_difference(&p, -0.2, 0.3) >= 0.0);
    }

    #[test]
    fn tau_concavity() {
        let p = reference();
        assert!(check_tau_concavity(&p, 1.0).unwrap());
        assert!(check_tau_concavity(&p, 0.2).unwrap());
        for t in [0.1, 0.5, 1.0] {
            assert_eq!(tau(&p, t, 0.0), 0.0);
        }
        let bad = Params::new(1.05, 0.05, 0.05).unwrap();
        assert!(matches!(
            check_tau_concavity(&bad, 1.0),
            Err(Error::Precondition(_))
        ));
    }

    #[test]
    fn semigroup() {
        let m = |t, g: &[BigRational], k| semigroup_member(&t, g, k).unwrap();
        assert_eq!(m(q(3, 1), &[q(1, 1), q(2, 1)], 5), Membership::Member);
        assert_eq!(
            m(q(5, 1), &[q(2, 1), q(4, 1)], 10),
            Membership::ProvenAbsent
        );
        assert_eq!(m(q(2, 1), &[q(1, 1)], 5), Membership::Member);
        assert_eq!(m(q(7, 6), &[q(1, 2), q(1, 3)], 4), Membership::Member);
        assert_eq!(m(q(100, 1), &[q(1, 1)], 5), Membership::NotFound);
        // sums overshoot before reaching 1/2 + something
        assert_eq!(m(q(1, 4), &[q(1, 2)], 5), Membership::ProvenAbsent);
        assert!(semigroup_member(&q(1, 1), &[], 3).is_err());
        assert!(semigroup_member(&q(1, 1), &[q(-1, 1)], 3).is_err());
    }

    #[test]
    fn indicator() {
        assert!(indicator_example_check(2).unwrap());
        assert!(!indicator_example_check(1).unwrap());
        assert!(indicator_example_check(3).unwrap());
        assert!(indicator_example_check(4).is_err());
        assert_eq!(RationalityCase::new(true, false).sum_rational, Some(false));
        assert_eq!(RationalityCase::new(false, false).sum_rational, None);
    }
}
