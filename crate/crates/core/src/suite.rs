//! The invariant suite for the analytic layer and the statement oracles,
//! each run at its stated sample size and tolerance.

use num_bigint::BigInt;
use num_rational::BigRational;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::analytic::{
    classify_region, eval_c, eval_f, eval_h, eval_lambda, eval_psi, gap, FnHandle, Order, Params,
};
use crate::certificate::{certify_s2, Verdict};
use crate::error::{Error, Result};
use crate::oracles::{
    check_monotone_f, check_rolle_identity, check_symmetrization, check_tau_concavity,
    indicator_example_check, semigroup_member, Membership, SmoothFn,
};

pub const PAIR_SAMPLES: usize = 10_000;
pub const REGION_SAMPLES: usize = 100_000;
pub const LAMBDA_GRID: usize = 10_000;
pub const ROLLE_TUPLES: usize = 100;
pub const GAP_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleOutcome {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl OracleOutcome {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Tracks the worst value of a quantity that must stay nonnegative.
struct Worst {
    value: f64,
    at: (f64, f64),
}

impl Worst {
    fn new() -> Self {
        Self {
            value: f64::INFINITY,
            at: (f64::NAN, f64::NAN),
        }
    }

    fn see(&mut self, v: f64, x: f64, y: f64) {
        if v < self.value {
            self.value = v;
            self.at = (x, y);
        }
    }

    fn outcome(&self, name: &str) -> OracleOutcome {
        OracleOutcome::new(
            name,
            self.value >= -GAP_SLACK,
            format!(
                "worst slack {:e} at ({}, {})",
                self.value, self.at.0, self.at.1
            ),
        )
    }
}

/// Draws `n` points from `sample` that satisfy `keep`.
fn sample_region(
    rng: &mut ChaCha8Rng,
    n: usize,
    mut sample: impl FnMut(&mut ChaCha8Rng) -> (f64, f64),
    keep: impl Fn(f64, f64) -> bool,
) -> Vec<(f64, f64)> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let (x, y) = sample(rng);
        if keep(x, y) {
            out.push((x, y));
        }
    }
    out
}

fn plane_point(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (rng.gen_range(-10.0..=10.0), rng.gen_range(-10.0..=10.0))
}

fn strip_point(rng: &mut ChaCha8Rng) -> (f64, f64) {
    (rng.gen_range(-0.5..=0.5), rng.gen_range(-10.0..=10.0))
}

/// Random parameters from a broad box, with no certification requirement.
pub fn random_params(rng: &mut impl Rng) -> Params {
    let mu = rng.gen_range(0.5..=5.0);
    let sigma = rng.gen_range(0.01..=1.0);
    let alpha = rng.gen_range(0.0..=1.0);
    Params::new(mu, sigma, alpha).expect("sampling box lies in the valid domain")
}

/// Random perturbation of `(1.2, 0.05, 0.05)` that the certificate accepts.
pub fn random_certified_params(rng: &mut impl Rng) -> Params {
    loop {
        let mu = rng.gen_range(1.1..=1.4);
        let sigma = rng.gen_range(0.03..=0.07);
        let alpha = rng.gen_range(0.005..=0.06);
        let p = Params::new(mu, sigma, alpha).expect("sampling box lies in the valid domain");
        if certify_s2(&p).verdict == Verdict::Certified {
            return p;
        }
    }
}

fn analytic_checks(rng: &mut ChaCha8Rng) -> Result<Vec<OracleOutcome>> {
    let params = Params::new(1.2, 0.05, 0.05)?;
    let g = |a: Order, x: f64, y: f64| gap(a, FnHandle::G, x, y, &params);
    let mut out = Vec::new();

    let plane = sample_region(rng, PAIR_SAMPLES, plane_point, |_, _| true);
    let mut w = Worst::new();
    for &(x, y) in &plane {
        w.see(g(Order::ONE, x, y), x, y);
    }
    out.push(w.outcome("analytic.g_subadditive"));

    let mut w = Worst::new();
    for &(x, y) in &plane {
        w.see(g(Order::TWO, x, y) - eval_lambda(x.abs()), x, y);
    }
    out.push(w.outcome("analytic.gap_g_ge_lambda"));

    let in_a = sample_region(rng, PAIR_SAMPLES, plane_point, |x, _| x.abs() >= 0.5);
    let mut w = Worst::new();
    for &(x, y) in &in_a {
        w.see(g(Order::TWO, x, y) - eval_c(), x, y);
    }
    out.push(w.outcome("analytic.gap_g_ge_c_in_a"));

    let in_bc = sample_region(rng, PAIR_SAMPLES, strip_point, |x, y| {
        let r = classify_region(x, y);
        r.in_b || r.in_c
    });
    let mut w = Worst::new();
    for &(x, y) in &in_bc {
        w.see(g(Order::TWO, x, y) - 0.375 * x * x, x, y);
    }
    out.push(w.outcome("analytic.gap_g_ge_three_eighths_x2_in_b_or_c"));

    let in_c = sample_region(rng, PAIR_SAMPLES, strip_point, |x, y| {
        classify_region(x, y).in_c
    });
    let mut to_psi = Worst::new();
    let mut psi_lin = Worst::new();
    for &(x, y) in &in_c {
        let psi = eval_psi(x.abs())?;
        to_psi.see(g(Order::TWO, x, y) - psi, x, y);
        psi_lin.see(psi - 2.0 * x.abs(), x, y);
    }
    out.push(to_psi.outcome("analytic.gap_g_ge_psi_in_c"));
    out.push(psi_lin.outcome("analytic.psi_ge_two_abs_x_in_c"));

    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &(x, y) in &plane {
        let p = random_params(rng);
        let d = gap(Order::TWO, FnHandle::H, x, y, &p);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    out.push(OracleOutcome::new(
        "analytic.gap_h_in_minus_one_three",
        lo >= -1.0 - GAP_SLACK && hi <= 3.0 + GAP_SLACK,
        format!("observed range [{lo}, {hi}]"),
    ));

    let mut prev = eval_lambda(0.0);
    let mut monotone = true;
    for k in 1..=LAMBDA_GRID {
        let v = eval_lambda(100.0 * k as f64 / LAMBDA_GRID as f64);
        monotone &= v >= prev;
        prev = v;
    }
    out.push(OracleOutcome::new(
        "analytic.lambda_nondecreasing",
        monotone,
        format!("{} grid points on [0, 100]", LAMBDA_GRID + 1),
    ));

    let mut even = true;
    for _ in 0..PAIR_SAMPLES {
        let x: f64 = rng.gen_range(-10.0..=10.0);
        even &= eval_f(x, &params) == eval_f(-x, &params);
    }
    out.push(OracleOutcome::new(
        "analytic.f_even",
        even,
        format!("{PAIR_SAMPLES} random x, exact equality"),
    ));

    let mut uncovered = 0usize;
    for _ in 0..REGION_SAMPLES {
        let (x, y) = plane_point(rng);
        if !classify_region(x, y).any() {
            uncovered += 1;
        }
    }
    out.push(OracleOutcome::new(
        "analytic.regions_cover_plane",
        uncovered == 0,
        format!("{uncovered} of {REGION_SAMPLES} points uncovered"),
    ));

    let mut worst = 0.0f64;
    for &(x, y) in &plane {
        let p = random_params(rng);
        let lhs = gap(Order::TWO, FnHandle::F, x, y, &p);
        let rhs = gap(Order::TWO, FnHandle::G, x, y, &p)
            + p.alpha() * (gap(Order::TWO, FnHandle::H, x, y, &p) - 2.0 * eval_h(0.0, &p));
        worst = worst.max((lhs - rhs).abs());
    }
    out.push(OracleOutcome::new(
        "analytic.gap_decomposition",
        worst <= GAP_SLACK,
        format!("max deviation {worst:e}"),
    ));
    Ok(out)
}

fn statement_checks(rng: &mut ChaCha8Rng) -> Result<Vec<OracleOutcome>> {
    let mut out = Vec::new();

    let mut failures = Vec::new();
    for i in 0..ROLLE_TUPLES {
        let w = [SmoothFn::F, SmoothFn::G, SmoothFn::H][i % 3];
        let t = rng.gen_range(0.01..=3.0);
        let p = random_certified_params(rng);
        if !check_rolle_identity(w, t, &p)? {
            failures.push(format!("{w:?} t={t} {p}"));
        }
    }
    out.push(OracleOutcome::new(
        "oracles.rolle_identity",
        failures.is_empty(),
        if failures.is_empty() {
            format!("{ROLLE_TUPLES} random tuples")
        } else {
            format!("failed: {}", failures.join("; "))
        },
    ));

    let mut monotone = true;
    let mut cases = 0;
    for _ in 0..50 {
        let k = rng.gen_range(1..=3);
        let gens: Vec<BigRational> = (0..k)
            .map(|_| {
                BigRational::new(
                    BigInt::from(rng.gen_range(1..=12)),
                    BigInt::from(rng.gen_range(1..=4)),
                )
            })
            .collect();
        let target = BigRational::new(
            BigInt::from(rng.gen_range(1..=40)),
            BigInt::from(rng.gen_range(1..=4)),
        );
        let mut found = false;
        for budget in 1..=8 {
            let m = semigroup_member(&target, &gens, budget)?;
            if found && !m.is_member() {
                monotone = false;
            }
            found |= m.is_member();
            cases += 1;
        }
    }
    out.push(OracleOutcome::new(
        "oracles.semigroup_monotone_in_budget",
        monotone,
        format!("{cases} searches over budgets 1..=8"),
    ));

    let two = indicator_example_check(2)?;
    let one = indicator_example_check(1)?;
    out.push(OracleOutcome::new(
        "oracles.indicator_example",
        two && !one,
        format!("a=2 -> {two}, a=1 -> {one}"),
    ));

    let refused = matches!(
        check_monotone_f(&Params::new(0.9, 0.05, 0.05)?),
        Err(Error::Precondition(_))
    ) && matches!(
        check_symmetrization(&Params::new(0.9, 0.05, 0.05)?, 10, 0),
        Err(Error::Precondition(_))
    );
    out.push(OracleOutcome::new(
        "oracles.monotone_refuses_mu_below_one",
        refused,
        "mu = 0.9",
    ));

    // the operations' stated examples, run at full size
    let reference = Params::new(1.2, 0.05, 0.05)?;
    let monotone_f =
        check_monotone_f(&reference)? && check_monotone_f(&Params::new(1.0, 0.3, 1.0)?)?;
    out.push(OracleOutcome::new(
        "oracles.f_increasing_on_unit_interval",
        monotone_f,
        "(1.2, 0.05, 0.05) and (1.0, 0.3, 1.0)",
    ));
    out.push(OracleOutcome::new(
        "oracles.symmetrization",
        check_symmetrization(&reference, PAIR_SAMPLES, rng.gen())?,
        format!("{PAIR_SAMPLES} points of region B"),
    ));
    let tau_ok = check_tau_concavity(&reference, 1.0)? && check_tau_concavity(&reference, 0.2)?;
    out.push(OracleOutcome::new(
        "oracles.tau_concavity",
        tau_ok,
        "t = 1 and t = 0.2",
    ));
    let absent = semigroup_member(
        &BigRational::from_integer(5.into()),
        &[
            BigRational::from_integer(2.into()),
            BigRational::from_integer(4.into()),
        ],
        10,
    )? == Membership::ProvenAbsent;
    out.push(OracleOutcome::new(
        "oracles.semigroup_parity",
        absent,
        "5 from {2, 4}",
    ));
    Ok(out)
}

/// Runs every invariant. The outcome list is deterministic for a given seed.
pub fn run_oracle_suite(seed: u64) -> Result<Vec<OracleOutcome>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = analytic_checks(&mut rng)?;
    out.extend(statement_checks(&mut rng)?);
    Ok(out)
}
