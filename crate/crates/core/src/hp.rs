//! Software arbitrary-precision evaluation of `f`, `g`, `h` and the gap.
//!
//! This route shares no code with the `f64` evaluators in [`crate::analytic`];
//! it backs violation margins and the oracle values frozen in tests.

use astro_float::{BigFloat, Consts, RoundingMode};

use crate::analytic::{FnHandle, Order, Params};
use crate::error::{Error, Result};

const RM: RoundingMode = RoundingMode::ToEven;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct HighPrecision {
    bits: usize,
}

impl Default for HighPrecision {
    fn default() -> Self {
        Self {
            bits: Self::DEFAULT_BITS,
        }
    }
}

impl HighPrecision {
    pub const DEFAULT_BITS: usize = 128;
    pub const MIN_BITS: usize = 64;

    pub fn new(bits: usize) -> Result<Self> {
        if bits < Self::MIN_BITS {
            return Err(Error::Input(format!(
                "precision must be at least {} bits, got {bits}",
                Self::MIN_BITS
            )));
        }
        Ok(Self { bits })
    }

    pub fn bits(&self) -> usize {
        self.bits
    }

    fn ctx(&self) -> Ctx {
        Ctx {
            p: self.bits,
            cc: Consts::new().expect("astro-float constant cache"),
        }
    }

    pub fn eval(&self, w: FnHandle, x: f64, params: &Params) -> BigFloat {
        let mut c = self.ctx();
        let hp = HpParams::new(&c, params);
        let x = c.num(x);
        c.eval(w, &x, &hp)
    }

    /// `a*w(x) + w(y) - w(a*x + y)` with every step rounded at `bits`.
    pub fn gap(&self, a: Order, w: FnHandle, x: f64, y: f64, params: &Params) -> BigFloat {
        let mut c = self.ctx();
        let hp = HpParams::new(&c, params);
        let a = c.num(a.value());
        let x = c.num(x);
        let y = c.num(y);
        let shifted = a.mul(&x, c.p, RM).add(&y, c.p, RM);
        let wx = c.eval(w, &x, &hp);
        let wy = c.eval(w, &y, &hp);
        let ws = c.eval(w, &shifted, &hp);
        a.mul(&wx, c.p, RM).add(&wy, c.p, RM).sub(&ws, c.p, RM)
    }

    pub fn gap_f64(&self, a: Order, w: FnHandle, x: f64, y: f64, params: &Params) -> f64 {
        to_f64(&self.gap(a, w, x, y, params))
    }

    /// `log(p/q)` for small positive integers, rounded to `f64`.
    pub fn ln_ratio(&self, num: u64, den: u64) -> f64 {
        let mut c = self.ctx();
        let r = BigFloat::from_u64(num, c.p).div(&BigFloat::from_u64(den, c.p), c.p, RM);
        to_f64(&r.ln(c.p, RM, &mut c.cc))
    }
}

/// Nearest `f64` to a big float. Goes through the decimal rendering, which
/// carries more than enough digits at any supported precision.
pub fn to_f64(v: &BigFloat) -> f64 {
    if v.is_zero() {
        return 0.0;
    }
    let s = format!("{v}");
    s.parse::<f64>().unwrap_or(f64::NAN)
}

struct Ctx {
    p: usize,
    cc: Consts,
}

struct HpParams {
    mu: BigFloat,
    sigma: BigFloat,
    alpha: BigFloat,
}

impl HpParams {
    fn new(c: &Ctx, p: &Params) -> Self {
        Self {
            mu: c.num(p.mu()),
            sigma: c.num(p.sigma()),
            alpha: c.num(p.alpha()),
        }
    }
}

impl Ctx {
    fn num(&self, v: f64) -> BigFloat {
        BigFloat::from_f64(v, self.p)
    }

    fn abs(v: &BigFloat) -> BigFloat {
        if v.is_negative() {
            v.neg()
        } else {
            v.clone()
        }
    }

    fn g(&mut self, x: &BigFloat) -> BigFloat {
        let ax = Self::abs(x);
        let one = BigFloat::from_u8(1, self.p);
        let l = one.add(&ax, self.p, RM).ln(self.p, RM, &mut self.cc);
        ax.add(&l, self.p, RM)
    }

    fn h(&mut self, x: &BigFloat, hp: &HpParams) -> BigFloat {
        let z = Self::abs(x)
            .sub(&hp.mu, self.p, RM)
            .div(&hp.sigma, self.p, RM);
        z.mul(&z, self.p, RM).neg().exp(self.p, RM, &mut self.cc)
    }

    fn eval(&mut self, w: FnHandle, x: &BigFloat, hp: &HpParams) -> BigFloat {
        match w {
            FnHandle::G => self.g(x),
            FnHandle::H => self.h(x, hp),
            FnHandle::HShifted => {
                let zero = BigFloat::from_u8(0, self.p);
                let h0 = self.h(&zero, hp);
                self.h(x, hp).sub(&h0, self.p, RM)
            }
            FnHandle::F => {
                let zero = BigFloat::from_u8(0, self.p);
                let h0 = self.h(&zero, hp);
                let bump = self.h(x, hp).sub(&h0, self.p, RM);
                self.g(x).add(&hp.alpha.mul(&bump, self.p, RM), self.p, RM)
            }
        }
    }
}
