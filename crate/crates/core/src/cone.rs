//! A subadditive bijection on a positive rational cone.
//!
//! The cone is spanned over the positive rationals by the independent family
//!
//! * base generators `p_n = 2^-n / sqrt(P_{2n-1})`, `n >= 1`,
//! * reserve generators `r_k = 1 / sqrt(P_{2k})`, `k >= 1`,
//!
//! where `P_i` is the `i`-th prime; reciprocal square roots of distinct primes
//! are linearly independent over the rationals. Elements are stored as sparse
//! positive coefficient vectors, so membership in a ray `{ r p_n : r > 0 }` is
//! a property of the support.
//!
//! On each base ray the map is `r p_n -> q_n r p_n` for `r <= 1` and
//! `(r + q_n - 1) p_n` beyond the knee, with `q_n` the least integer such that
//! `1 - 2^-n < q_n p_n < 1`. Off the base rays it is the identity. All
//! subadditivity and bijectivity checks run on exact coefficients; real
//! values are only needed for the limit sequences, and those are enclosed
//! between rationals.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Starting precision for rational enclosures of generator values.
pub const ENCLOSURE_BITS: u32 = 64;
/// Enclosures are refined up to this many bits before giving up.
pub const MAX_ENCLOSURE_BITS: u32 = 1 << 14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum GeneratorKind {
    Base,
    Reserve,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct GeneratorId {
    pub kind: GeneratorKind,
    pub index: u32,
}

impl GeneratorId {
    pub fn base(index: u32) -> Self {
        Self {
            kind: GeneratorKind::Base,
            index,
        }
    }

    pub fn reserve(index: u32) -> Self {
        Self {
            kind: GeneratorKind::Reserve,
            index,
        }
    }
}

impl fmt::Display for GeneratorId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            GeneratorKind::Base => write!(f, "p{}", self.index),
            GeneratorKind::Reserve => write!(f, "r{}", self.index),
        }
    }
}

/// `2^-scale_exp / sqrt(prime)`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Generator {
    pub id: GeneratorId,
    pub scale_exp: u32,
    pub prime: u64,
}

impl Generator {
    /// Rational enclosure of the value at `bits` bits of `sqrt(prime)`.
    pub fn enclose(&self, bits: u32) -> RationalInterval {
        let (lo, hi) = inv_sqrt_enclosure(self.prime, bits);
        let scale = BigRational::new(BigInt::one(), BigInt::one() << self.scale_exp);
        RationalInterval {
            lo: lo * &scale,
            hi: hi * scale,
        }
    }

    pub fn value_f64(&self) -> f64 {
        self.enclose(ENCLOSURE_BITS).mid_f64()
    }
}

/// Closed interval with exact rational endpoints.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RationalInterval {
    pub lo: BigRational,
    pub hi: BigRational,
}

impl RationalInterval {
    pub fn width(&self) -> BigRational {
        &self.hi - &self.lo
    }

    pub fn mid_f64(&self) -> f64 {
        ((&self.lo + &self.hi) / BigRational::from_integer(2.into()))
            .to_f64()
            .unwrap_or(f64::NAN)
    }

    /// Midpoint in fixed-point decimal with `digits` fractional digits.
    pub fn mid_decimal(&self, digits: usize) -> String {
        let mid = (&self.lo + &self.hi) / BigRational::from_integer(2.into());
        to_fixed(&mid, digits)
    }
}

/// `floor(r * 10^digits)` rendered as a decimal with `digits` fractional
/// digits (truncated toward negative infinity).
pub fn to_fixed(r: &BigRational, digits: usize) -> String {
    let scale = BigInt::from(10u32).pow(digits as u32);
    let scaled = (r * BigRational::from_integer(scale)).floor().to_integer();
    let neg = scaled.is_negative();
    let mut s = scaled.abs().to_string();
    if s.len() <= digits {
        s = format!("{}{}", "0".repeat(digits + 1 - s.len()), s);
    }
    let (int, frac) = s.split_at(s.len() - digits);
    format!("{}{}.{}", if neg { "-" } else { "" }, int, frac)
}

/// `1/sqrt(p)` between two rationals, from `s = isqrt(p * 4^bits)`:
/// `s < 2^bits sqrt(p) < s + 1` for any non-square `p`.
fn inv_sqrt_enclosure(p: u64, bits: u32) -> (BigRational, BigRational) {
    let two_k = BigInt::one() << bits;
    let s = (BigInt::from(p) << (2 * bits)).sqrt();
    let lo = BigRational::new(two_k.clone(), &s + BigInt::one());
    let hi = BigRational::new(two_k, s);
    (lo, hi)
}

fn first_primes(count: usize) -> Vec<u64> {
    let mut primes: Vec<u64> = Vec::with_capacity(count);
    let mut c = 2u64;
    while primes.len() < count {
        if primes
            .iter()
            .take_while(|&&p| p * p <= c)
            .all(|&p| !c.is_multiple_of(p))
        {
            primes.push(c);
        }
        c += 1;
    }
    primes
}

/// Generators and knee multipliers, built once and shared read-only.
#[derive(Debug, Clone)]
pub struct GeneratorTable {
    base: Vec<Generator>,
    reserve: Vec<Generator>,
    q: Vec<BigInt>,
}

/// Least integer `q` with `1 - 2^-n < q 2^-n / sqrt(prime) < 1`, i.e.
/// `(2^n - 1)^2 prime < q^2 < 4^n prime`. The window for `q` has length
/// `sqrt(prime) > 1`, so it always contains an integer.
fn knee_multiplier(n: u32, prime: u64) -> Result<BigInt> {
    let two_n = BigInt::one() << n;
    let lower = (&two_n - 1u32).pow(2) * prime;
    let upper = &two_n * &two_n * prime;
    let q = lower.sqrt() + 1u32;
    let q2 = &q * &q;
    if !(q2 > lower && q2 < upper) {
        return Err(Error::ConstructionBug(format!(
            "no integer knee multiplier for n = {n}, prime = {prime}"
        )));
    }
    Ok(q)
}

pub fn make_generators(n_base: u32, n_reserve: u32) -> Result<GeneratorTable> {
    if n_base == 0 || n_reserve == 0 {
        return Err(Error::Input(
            "generator counts must both be at least 1".into(),
        ));
    }
    // base n takes the (2n-1)-th prime, reserve k the 2k-th
    let needed = (2 * n_base - 1).max(2 * n_reserve) as usize;
    let primes = first_primes(needed);
    let base: Vec<Generator> = (1..=n_base)
        .map(|n| Generator {
            id: GeneratorId::base(n),
            scale_exp: n,
            prime: primes[(2 * n - 2) as usize],
        })
        .collect();
    let reserve = (1..=n_reserve)
        .map(|k| Generator {
            id: GeneratorId::reserve(k),
            scale_exp: 0,
            prime: primes[(2 * k - 1) as usize],
        })
        .collect();
    let q = base
        .iter()
        .map(|g| knee_multiplier(g.scale_exp, g.prime))
        .collect::<Result<_>>()?;
    Ok(GeneratorTable { base, reserve, q })
}

impl GeneratorTable {
    pub fn n_base(&self) -> u32 {
        self.base.len() as u32
    }

    pub fn n_reserve(&self) -> u32 {
        self.reserve.len() as u32
    }

    pub fn generator(&self, id: GeneratorId) -> Result<&Generator> {
        let list = match id.kind {
            GeneratorKind::Base => &self.base,
            GeneratorKind::Reserve => &self.reserve,
        };
        (id.index as usize)
            .checked_sub(1)
            .and_then(|i| list.get(i))
            .ok_or_else(|| Error::UnknownGenerator(id.to_string()))
    }

    pub fn generators(&self) -> impl Iterator<Item = &Generator> {
        self.base.iter().chain(self.reserve.iter())
    }

    pub fn q_of(&self, n: u32) -> Result<&BigInt> {
        (n as usize)
            .checked_sub(1)
            .and_then(|i| self.q.get(i))
            .ok_or_else(|| Error::UnknownGenerator(GeneratorId::base(n).to_string()))
    }

    fn q_rational(&self, n: u32) -> Result<BigRational> {
        Ok(BigRational::from_integer(self.q_of(n)?.clone()))
    }

    /// Enclosure of the real value of `x` with every generator refined to
    /// `bits` bits.
    pub fn enclose(&self, x: &ConeElement, bits: u32) -> Result<RationalInterval> {
        let mut lo = BigRational::zero();
        let mut hi = BigRational::zero();
        for (id, c) in x.terms() {
            let e = self.generator(*id)?.enclose(bits);
            lo += c * e.lo;
            hi += c * e.hi;
        }
        Ok(RationalInterval { lo, hi })
    }

    pub fn value_f64(&self, x: &ConeElement) -> Result<f64> {
        Ok(self.enclose(x, ENCLOSURE_BITS)?.mid_f64())
    }

    /// Decides `value(x) < bound`, refining the enclosure until it is
    /// certain. Values are irrational combinations, so equality with a
    /// rational bound cannot occur.
    pub fn certainly_below(&self, x: &ConeElement, bound: &BigRational) -> Result<bool> {
        self.decide(x, |e| {
            if &e.hi < bound {
                Some(true)
            } else if &e.lo >= bound {
                Some(false)
            } else {
                None
            }
        })
    }

    /// Decides `value(x) > bound`.
    pub fn certainly_above(&self, x: &ConeElement, bound: &BigRational) -> Result<bool> {
        self.decide(x, |e| {
            if &e.lo > bound {
                Some(true)
            } else if &e.hi <= bound {
                Some(false)
            } else {
                None
            }
        })
    }

    fn decide(
        &self,
        x: &ConeElement,
        verdict: impl Fn(&RationalInterval) -> Option<bool>,
    ) -> Result<bool> {
        let mut bits = ENCLOSURE_BITS;
        while bits <= MAX_ENCLOSURE_BITS {
            if let Some(v) = verdict(&self.enclose(x, bits)?) {
                return Ok(v);
            }
            bits *= 2;
        }
        Err(Error::ConstructionBug(format!(
            "comparison for {x} undecided at {MAX_ENCLOSURE_BITS} bits"
        )))
    }
}

/// A positive element of the cone: a nonempty sparse vector of strictly
/// positive rational coefficients.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ConeElement {
    coeffs: BTreeMap<GeneratorId, BigRational>,
}

impl ConeElement {
    /// Builds an element, summing repeated generators.
    pub fn new(terms: impl IntoIterator<Item = (GeneratorId, BigRational)>) -> Result<Self> {
        let mut coeffs: BTreeMap<GeneratorId, BigRational> = BTreeMap::new();
        for (id, c) in terms {
            if !c.is_positive() {
                return Err(Error::Input(format!(
                    "coefficient of {id} must be positive, got {c}"
                )));
            }
            if id.index == 0 {
                return Err(Error::UnknownGenerator(id.to_string()));
            }
            *coeffs.entry(id).or_insert_with(BigRational::zero) += c;
        }
        if coeffs.is_empty() {
            return Err(Error::Input("cone elements must be nonzero".into()));
        }
        Ok(Self { coeffs })
    }

    pub fn ray(id: GeneratorId, c: BigRational) -> Result<Self> {
        Self::new([(id, c)])
    }

    pub fn terms(&self) -> impl Iterator<Item = (&GeneratorId, &BigRational)> {
        self.coeffs.iter()
    }

    pub fn coeff(&self, id: GeneratorId) -> Option<&BigRational> {
        self.coeffs.get(&id)
    }

    pub fn support_len(&self) -> usize {
        self.coeffs.len()
    }

    /// `Some((n, r))` when the element is `r p_n`.
    pub fn base_ray(&self) -> Option<(u32, &BigRational)> {
        match self.coeffs.iter().next() {
            Some((id, c)) if self.coeffs.len() == 1 && id.kind == GeneratorKind::Base => {
                Some((id.index, c))
            }
            _ => None,
        }
    }

    pub fn add(&self, o: &Self) -> Self {
        let mut coeffs = self.coeffs.clone();
        for (id, c) in &o.coeffs {
            *coeffs.entry(*id).or_insert_with(BigRational::zero) += c;
        }
        Self { coeffs }
    }

    pub fn scale(&self, s: &BigRational) -> Result<Self> {
        if !s.is_positive() {
            return Err(Error::Input(format!("scale must be positive, got {s}")));
        }
        Ok(Self {
            coeffs: self.coeffs.iter().map(|(id, c)| (*id, c * s)).collect(),
        })
    }
}

impl fmt::Display for ConeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (id, c)) in self.coeffs.iter().enumerate() {
            if i > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*{id}")?;
        }
        Ok(())
    }
}

impl FromStr for GeneratorId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        let bad = || Error::Input(format!("generator must look like p3 or r2, got {s:?}"));
        let (kind, rest) = match s.chars().next() {
            Some('p') => (GeneratorKind::Base, &s[1..]),
            Some('r') => (GeneratorKind::Reserve, &s[1..]),
            _ => return Err(bad()),
        };
        let index: u32 = rest.parse().map_err(|_| bad())?;
        if index == 0 {
            return Err(bad());
        }
        Ok(Self { kind, index })
    }
}

/// Parses the [`Display`](fmt::Display) form: `+`-separated terms, each a
/// generator optionally preceded by `coeff*`.
impl FromStr for ConeElement {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut terms = Vec::new();
        for term in s.split('+') {
            let (c, id) = match term.split_once('*') {
                Some((c, id)) => {
                    let c: BigRational = c.trim().parse().map_err(|_| {
                        Error::Input(format!("bad rational coefficient {:?}", c.trim()))
                    })?;
                    (c, id)
                }
                None => (BigRational::one(), term),
            };
            terms.push((id.parse()?, c));
        }
        Self::new(terms)
    }
}

impl Serialize for ConeElement {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        s.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for ConeElement {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let s = String::deserialize(d)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// The map: piecewise linear with a knee at `p_n` on each base ray,
/// identity elsewhere.
pub fn apply_f(table: &GeneratorTable, x: &ConeElement) -> Result<ConeElement> {
    for (id, _) in x.terms() {
        table.generator(*id)?;
    }
    match x.base_ray() {
        Some((n, r)) => {
            let q = table.q_rational(n)?;
            let image = if r <= &BigRational::one() {
                q * r
            } else {
                r + q - BigRational::one()
            };
            ConeElement::ray(GeneratorId::base(n), image)
        }
        None => Ok(x.clone()),
    }
}

pub fn apply_f_inv(table: &GeneratorTable, y: &ConeElement) -> Result<ConeElement> {
    for (id, _) in y.terms() {
        table.generator(*id)?;
    }
    match y.base_ray() {
        Some((n, s)) => {
            let q = table.q_rational(n)?;
            let pre = if s <= &q {
                s / q
            } else {
                s - q + BigRational::one()
            };
            ConeElement::ray(GeneratorId::base(n), pre)
        }
        None => Ok(y.clone()),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum PairCase {
    /// Both on the same base ray.
    SameRay,
    /// On two different base rays.
    CrossRay,
    /// One on a base ray, the other off every base ray.
    RayPlusOffray,
    BothOffray,
}

/// Exact certificate of `f(x + y) <= f(x) + f(y)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SubadditivityWitness {
    pub case: PairCase,
    /// Coefficients of `f(x) + f(y) - f(x + y)`; all nonnegative, zeros
    /// omitted. Nonnegative coefficients on positive generators give a
    /// nonnegative real value.
    pub slack: BTreeMap<GeneratorId, BigRational>,
}

impl SubadditivityWitness {
    pub fn is_tight(&self) -> bool {
        self.slack.is_empty()
    }
}

pub fn check_subadditive_pair(
    table: &GeneratorTable,
    x: &ConeElement,
    y: &ConeElement,
) -> Result<SubadditivityWitness> {
    let case = match (x.base_ray(), y.base_ray()) {
        (Some((n, _)), Some((m, _))) if n == m => PairCase::SameRay,
        (Some(_), Some(_)) => PairCase::CrossRay,
        (Some(_), None) | (None, Some(_)) => PairCase::RayPlusOffray,
        (None, None) => PairCase::BothOffray,
    };
    let sum = x.add(y);
    if case != PairCase::SameRay && sum.base_ray().is_some() {
        return Err(Error::ConstructionBug(format!(
            "{x} + {y} landed on a base ray"
        )));
    }

    let fs = apply_f(table, &sum)?;
    let mut slack: BTreeMap<GeneratorId, BigRational> = BTreeMap::new();
    for (id, c) in apply_f(table, x)?.terms().chain(apply_f(table, y)?.terms()) {
        *slack.entry(*id).or_insert_with(BigRational::zero) += c;
    }
    for (id, c) in fs.terms() {
        *slack.entry(*id).or_insert_with(BigRational::zero) -= c;
    }
    if let Some((id, c)) = slack.iter().find(|(_, c)| c.is_negative()) {
        return Err(Error::ConstructionBug(format!(
            "f(x+y) exceeds f(x)+f(y) on {id} by {} for x = {x}, y = {y}",
            -c.clone()
        )));
    }
    slack.retain(|_, c| !c.is_zero());
    Ok(SubadditivityWitness { case, slack })
}

/// `(n, p_n, f(p_n))` with certified facts about the knee.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimsupRow {
    pub n: u32,
    pub p: RationalInterval,
    pub fp: RationalInterval,
    /// `p_n < 2^-n`, certified.
    pub below_scale: bool,
    /// `1 - 2^-n < f(p_n) < 1`, certified.
    pub knee_certified: bool,
}

pub const SEQUENCE_BITS: u32 = 128;

pub fn limsup_sequence(table: &GeneratorTable, n_max: u32) -> Result<Vec<LimsupRow>> {
    if n_max == 0 || n_max > table.n_base() {
        return Err(Error::Input(format!(
            "n must lie in 1..={}, got {n_max}",
            table.n_base()
        )));
    }
    (1..=n_max)
        .map(|n| {
            let pn = ConeElement::ray(GeneratorId::base(n), BigRational::one())?;
            let fpn = apply_f(table, &pn)?;
            let scale = BigRational::new(BigInt::one(), BigInt::one() << n);
            let one = BigRational::one();
            let below_scale = table.certainly_below(&pn, &scale)?;
            let knee_certified = table.certainly_above(&fpn, &(&one - &scale))?
                && table.certainly_below(&fpn, &one)?;
            Ok(LimsupRow {
                n,
                p: table.enclose(&pn, SEQUENCE_BITS)?,
                fp: table.enclose(&fpn, SEQUENCE_BITS)?,
                below_scale,
                knee_certified,
            })
        })
        .collect()
}

/// `(k, x_k, f(x_k))` for `x_k = r_1 / k`, which stays off the base rays.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiminfRow {
    pub k: u32,
    pub x: RationalInterval,
    pub fx: RationalInterval,
    /// `f(x_k) = x_k` exactly.
    pub fixed: bool,
}

pub fn liminf_element(k: u32) -> Result<ConeElement> {
    ConeElement::ray(
        GeneratorId::reserve(1),
        BigRational::new(BigInt::one(), BigInt::from(k)),
    )
}

pub fn liminf_sequence(table: &GeneratorTable, k_max: u32) -> Result<Vec<LiminfRow>> {
    if k_max == 0 {
        return Err(Error::Input("sequence length must be at least 1".into()));
    }
    (1..=k_max)
        .map(|k| {
            let x = liminf_element(k)?;
            let fx = apply_f(table, &x)?;
            Ok(LiminfRow {
                k,
                x: table.enclose(&x, SEQUENCE_BITS)?,
                fx: table.enclose(&fx, SEQUENCE_BITS)?,
                fixed: fx == x,
            })
        })
        .collect()
}

fn random_rational(rng: &mut impl Rng, max_num: u32, max_den: u32) -> BigRational {
    BigRational::new(
        BigInt::from(rng.gen_range(1..=max_num)),
        BigInt::from(rng.gen_range(1..=max_den)),
    )
}

/// Random element mixing every shape the map distinguishes: base rays on
/// either side of the knee (and exactly at it), reserve rays, and mixtures.
pub fn sample_element<R: Rng>(table: &GeneratorTable, rng: &mut R) -> ConeElement {
    let n_base = table.n_base();
    let n_reserve = table.n_reserve();
    let base = |rng: &mut R| GeneratorId::base(rng.gen_range(1..=n_base));
    let reserve = |rng: &mut R| GeneratorId::reserve(rng.gen_range(1..=n_reserve));
    let terms: Vec<(GeneratorId, BigRational)> = match rng.gen_range(0..5) {
        0 | 1 => vec![(base(rng), sample_coeff(rng))],
        2 => vec![(reserve(rng), sample_coeff(rng))],
        3 => vec![
            (base(rng), sample_coeff(rng)),
            (base(rng), sample_coeff(rng)),
        ],
        _ => vec![
            (base(rng), sample_coeff(rng)),
            (reserve(rng), sample_coeff(rng)),
        ],
    };
    ConeElement::new(terms).expect("positive coefficients on table generators")
}

fn sample_coeff(rng: &mut impl Rng) -> BigRational {
    match rng.gen_range(0..4) {
        0 => BigRational::one(),
        1 => random_rational(rng, 9, 9),
        _ => random_rational(rng, 40, 12),
    }
}

/// Draws `samples` elements of value below `eps` and checks
/// `f(x) < 1 + eps` for each through certified enclosures.
pub fn upper_bound_check(
    table: &GeneratorTable,
    eps: &BigRational,
    samples: usize,
    rng: &mut impl Rng,
) -> Result<bool> {
    if !(eps.is_positive() && eps < &BigRational::one()) {
        return Err(Error::Input(format!("eps must lie in (0, 1), got {eps}")));
    }
    let bound = BigRational::one() + eps;
    for _ in 0..samples {
        let raw = sample_element(table, rng);
        let upper = table.enclose(&raw, ENCLOSURE_BITS)?.hi;
        // shrink below eps: value(raw) <= upper, so value(x) < eps * u
        let u = BigRational::new(
            BigInt::from(rng.gen_range(1..1000u32)),
            BigInt::from(1000u32),
        );
        let x = raw.scale(&(eps * u / upper))?;
        if !table.certainly_below(&x, eps)? {
            return Err(Error::ConstructionBug(format!(
                "sample {x} is not below eps"
            )));
        }
        if !table.certainly_below(&apply_f(table, &x)?, &bound)? {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Outcome of [`audit`].
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConeAudit {
    pub n_base: u32,
    pub n_reserve: u32,
    /// `1 - 2^-n < p_n q_n < 1` certified for every base generator.
    pub knees_certified: bool,
    pub pairs: usize,
    pub pair_failures: usize,
    pub round_trips: usize,
    pub round_trip_failures: usize,
    /// `1 - f(p_N) < 2^-N` certified at the last base generator.
    pub limsup_certified: bool,
    /// First `k` with `x_k < 10^-3` certified, if within `liminf_len`.
    pub liminf_below_milli: Option<u32>,
    pub liminf_len: u32,
}

impl ConeAudit {
    pub fn passed(&self) -> bool {
        self.knees_certified
            && self.pair_failures == 0
            && self.round_trip_failures == 0
            && self.limsup_certified
            && self.liminf_below_milli.is_some()
    }
}

/// Runs every construction check on `table`: knee certification, random
/// subadditive pairs, exact inverse round trips and both limit sequences.
pub fn audit(
    table: &GeneratorTable,
    pairs: usize,
    round_trips: usize,
    liminf_len: u32,
    seed: u64,
) -> Result<ConeAudit> {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);

    let rows = limsup_sequence(table, table.n_base())?;
    let knees_certified = rows.iter().all(|r| r.knee_certified && r.below_scale);
    let limsup_certified = rows.last().is_some_and(|r| r.knee_certified);

    let mut pair_failures = 0;
    for _ in 0..pairs {
        let x = sample_element(table, &mut rng);
        let y = sample_element(table, &mut rng);
        match check_subadditive_pair(table, &x, &y) {
            Ok(_) => {}
            Err(Error::ConstructionBug(_)) => pair_failures += 1,
            Err(e) => return Err(e),
        }
    }

    let mut round_trip_failures = 0;
    for _ in 0..round_trips {
        let x = sample_element(table, &mut rng);
        if apply_f_inv(table, &apply_f(table, &x)?)? != x {
            round_trip_failures += 1;
        }
    }

    let milli = BigRational::new(BigInt::one(), BigInt::from(1000));
    let mut liminf_below_milli = None;
    for k in 1..=liminf_len {
        if table.certainly_below(&liminf_element(k)?, &milli)? {
            liminf_below_milli = Some(k);
            break;
        }
    }

    Ok(ConeAudit {
        n_base: table.n_base(),
        n_reserve: table.n_reserve(),
        knees_certified,
        pairs,
        pair_failures,
        round_trips,
        round_trip_failures,
        limsup_certified,
        liminf_below_milli,
        liminf_len,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn q(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    fn table() -> GeneratorTable {
        make_generators(20, 5).unwrap()
    }

    #[test]
    fn generator_layout() {
        let t = table();
        let g = |id| t.generator(id).unwrap().clone();
        assert_eq!(g(GeneratorId::base(1)).prime, 2);
        assert_eq!(g(GeneratorId::reserve(1)).prime, 3);
        assert_eq!(g(GeneratorId::base(2)).prime, 5);
        assert_eq!(g(GeneratorId::reserve(2)).prime, 7);
        assert!((g(GeneratorId::base(1)).value_f64() - 0.353_553_390_593_273_8).abs() < 1e-15);
        assert!((g(GeneratorId::base(2)).value_f64() - 0.111_803_398_874_989_48).abs() < 1e-15);
        assert!((g(GeneratorId::reserve(1)).value_f64() - 3f64.sqrt().recip()).abs() < 1e-15);
        let primes: std::collections::BTreeSet<u64> = t.generators().map(|g| g.prime).collect();
        assert_eq!(primes.len(), 25);
        assert!(make_generators(0, 1).is_err());
        assert!(t.generator(GeneratorId::base(21)).is_err());
    }

    #[test]
    fn knee_multipliers() {
        let t = table();
        assert_eq!(t.q_of(1).unwrap(), &BigInt::from(2));
        assert_eq!(t.q_of(2).unwrap(), &BigInt::from(7));
        for n in 1..=20u32 {
            let qn = t.q_of(n).unwrap();
            assert!(qn >= &(BigInt::one() << n));
        }
        assert!(t.q_of(0).is_err());
    }

    #[test]
    fn map_examples() {
        let t = table();
        let p1 = |c| ConeElement::ray(GeneratorId::base(1), c).unwrap();
        assert_eq!(apply_f(&t, &p1(q(1, 2))).unwrap(), p1(q(1, 1)));
        assert_eq!(apply_f(&t, &p1(q(3, 1))).unwrap(), p1(q(4, 1)));
        let r1 = ConeElement::ray(GeneratorId::reserve(1), q(7, 3)).unwrap();
        assert_eq!(apply_f(&t, &r1).unwrap(), r1);

        assert_eq!(apply_f_inv(&t, &p1(q(1, 1))).unwrap(), p1(q(1, 2)));
        assert_eq!(apply_f_inv(&t, &p1(q(4, 1))).unwrap(), p1(q(3, 1)));
    }

    #[test]
    fn knee_is_continuous() {
        let t = table();
        for n in 1..=20 {
            let qn = t.q_rational(n).unwrap();
            assert_eq!(
                &qn * BigRational::one(),
                BigRational::one() + &qn - BigRational::one()
            );
        }
    }

    #[test]
    fn pair_examples() {
        let t = table();
        let half = ConeElement::ray(GeneratorId::base(1), q(1, 2)).unwrap();
        let w = check_subadditive_pair(&t, &half, &half).unwrap();
        assert_eq!(w.case, PairCase::SameRay);
        assert!(w.is_tight());

        let x = ConeElement::ray(GeneratorId::base(1), q(1, 1)).unwrap();
        let y = ConeElement::ray(GeneratorId::base(2), q(1, 1)).unwrap();
        let w = check_subadditive_pair(&t, &x, &y).unwrap();
        assert_eq!(w.case, PairCase::CrossRay);
        assert_eq!(w.slack[&GeneratorId::base(1)], q(1, 1));
        assert_eq!(w.slack[&GeneratorId::base(2)], q(6, 1));

        let r = ConeElement::ray(GeneratorId::reserve(1), q(1, 1)).unwrap();
        let w = check_subadditive_pair(&t, &r, &r).unwrap();
        assert_eq!(w.case, PairCase::BothOffray);
        assert!(w.is_tight());

        let w = check_subadditive_pair(&t, &x, &r).unwrap();
        assert_eq!(w.case, PairCase::RayPlusOffray);
    }

    #[test]
    fn element_validation() {
        assert!(ConeElement::new(Vec::new()).is_err());
        assert!(ConeElement::ray(GeneratorId::base(1), q(0, 1)).is_err());
        assert!(ConeElement::ray(GeneratorId::base(1), q(-1, 2)).is_err());
        assert!(ConeElement::ray(GeneratorId::base(0), q(1, 2)).is_err());
        let e = ConeElement::new([
            (GeneratorId::base(1), q(1, 2)),
            (GeneratorId::base(1), q(1, 2)),
        ])
        .unwrap();
        assert_eq!(e.base_ray(), Some((1, &q(1, 1))));
        let far = ConeElement::ray(GeneratorId::base(99), q(1, 1)).unwrap();
        assert!(apply_f(&table(), &far).is_err());
    }

    #[test]
    fn text_round_trip() {
        let e: ConeElement = "1/2*p1 + 3*r2 + p4".parse().unwrap();
        assert_eq!(e.to_string(), "1/2*p1 + 1*p4 + 3*r2");
        assert_eq!(e.to_string().parse::<ConeElement>().unwrap(), e);
        let json = serde_json::to_string(&e).unwrap();
        assert_eq!(serde_json::from_str::<ConeElement>(&json).unwrap(), e);
        for bad in ["", "q1", "p0", "-1*p1", "x*p1", "0*p2"] {
            assert!(bad.parse::<ConeElement>().is_err(), "{bad}");
        }
    }

    #[test]
    fn sequences() {
        let t = table();
        let rows = limsup_sequence(&t, 20).unwrap();
        assert!((rows[0].p.mid_f64() - 0.353_55).abs() < 1e-5);
        assert!((rows[0].fp.mid_f64() - std::f64::consts::FRAC_1_SQRT_2).abs() < 1e-15);
        assert!(rows.iter().all(|r| r.below_scale && r.knee_certified));
        assert!(rows[9].p.mid_f64() < 2f64.powi(-10));
        assert!(limsup_sequence(&t, 21).is_err());

        let rows = liminf_sequence(&t, 10).unwrap();
        assert!((rows[0].x.mid_f64() - 3f64.sqrt().recip()).abs() < 1e-15);
        assert!((rows[9].x.mid_f64() - 0.057_735).abs() < 1e-6);
        assert!(rows.iter().all(|r| r.fixed && r.x == r.fx));
        assert!(rows.windows(2).all(|w| w[1].x.hi < w[0].x.lo));
    }

    #[test]
    fn enclosures_are_tight_and_ordered() {
        let t = table();
        let x = ConeElement::ray(GeneratorId::base(3), q(5, 7)).unwrap();
        let e = t.enclose(&x, SEQUENCE_BITS).unwrap();
        assert!(e.lo < e.hi);
        assert!(e.width() < BigRational::new(BigInt::one(), BigInt::one() << 120));
        assert_eq!(to_fixed(&q(1, 8), 4), "0.1250");
        assert_eq!(to_fixed(&q(-3, 2), 2), "-1.50");
        assert_eq!(to_fixed(&q(123, 1), 1), "123.0");
    }

    #[test]
    fn audit_small() {
        let a = audit(&table(), 500, 100, 600, 1).unwrap();
        assert!(a.passed(), "{a:?}");
        // 1 / (k sqrt 3) < 1/1000 first at k = 578
        assert_eq!(a.liminf_below_milli, Some(578));
        let short = audit(&table(), 1, 1, 100, 1).unwrap();
        assert!(!short.passed());
    }

    #[test]
    fn upper_bound() {
        let t = table();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        assert!(upper_bound_check(&t, &q(1, 2), 1000, &mut rng).unwrap());
        assert!(upper_bound_check(&t, &q(1, 100), 200, &mut rng).unwrap());
        assert!(upper_bound_check(&t, &q(1, 1), 1, &mut rng).is_err());
    }
}
