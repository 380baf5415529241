//! Acceptance criteria. Runs without the test harness so that every
//! criterion prints its `criterion N: PASS|FAIL` line, passing or not, and
//! runs alone for its timing bound. Exits nonzero if any criterion fails.

use std::panic;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use subadd_core::certificate::{self, certify_s2, Verdict};
use subadd_core::cone::{audit, make_generators};
use subadd_core::search::{
    find_violation, reproduce_table_with, scan_gap_min, verify_point, ScanConfig, PRINTED_TABLE,
    SCAN_FLOOR, TABLE_MARGIN_TOLERANCE,
};
use subadd_core::suite::run_oracle_suite;
use subadd_core::{Order, Params, Tri};

const PAIRS: usize = 10_000;
const ROUND_TRIPS: usize = 1_000;
const LIMINF_K: u32 = 600;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn reference_triple() -> Params {
    Params::new(1.2, 0.05, 0.05).unwrap()
}

fn secs(s: u64) -> Duration {
    Duration::from_secs(s)
}

fn certifies_triple() -> Outcome {
    let t = Instant::now();
    let r = certify_s2(&reference_triple());
    let elapsed = t.elapsed();
    let all_true = r.conditions.len() == 5 && r.conditions.iter().all(|c| c.verdict == Tri::True);
    outcome(
        r.verdict == Verdict::Certified && all_true && elapsed < secs(1),
        format!("verdict {}, five conditions TRUE: {all_true}", r.verdict),
    )
}

fn order_three_witness() -> Outcome {
    let t = Instant::now();
    let m = verify_point(Order::THREE, &reference_triple(), 0.016, 1.137);
    let elapsed = t.elapsed();
    outcome(
        m > 0.0100 && m < 0.0102 && m > 0.01 && elapsed < secs(1),
        format!("margin {m:.10} at (0.016, 1.137)"),
    )
}

fn table_margins() -> Outcome {
    let t = Instant::now();
    let rows = reproduce_table_with(None).unwrap();
    let elapsed = t.elapsed();
    let worst = rows.iter().map(|r| r.margin_error()).fold(0.0, f64::max);
    let rows_text: Vec<String> = rows
        .iter()
        .map(|r| {
            format!(
                "mu={} got {:.9} printed {:.9}",
                r.mu, r.margin, r.printed_margin
            )
        })
        .collect();
    outcome(
        rows.len() == PRINTED_TABLE.len() && worst <= TABLE_MARGIN_TOLERANCE && elapsed < secs(10),
        format!(
            "worst |error| {worst:.3e} against {TABLE_MARGIN_TOLERANCE:e}; {}",
            rows_text.join("; ")
        ),
    )
}

fn order_two_scans() -> Outcome {
    let cfg = ScanConfig::plane();
    let mut pass = true;
    let mut detail = Vec::new();
    let configs =
        std::iter::once(reference_triple()).chain(PRINTED_TABLE.iter().map(|r| r.params()));
    for p in configs {
        let t = Instant::now();
        let r = scan_gap_min(Order::TWO, &p, &cfg).unwrap();
        let dt = t.elapsed();
        pass &= r.min_gap >= SCAN_FLOOR && dt < secs(60);
        detail.push(format!(
            "(mu={}, sigma={}) min {:.3e} at ({:.5}, {:.5}) in {:.2} s",
            p.mu(),
            p.sigma(),
            r.min_gap,
            r.argmin.x,
            r.argmin.y,
            dt.as_secs_f64()
        ));
    }
    outcome(pass, detail.join("; "))
}

fn not_subadditive() -> Outcome {
    let p = reference_triple();
    match find_violation(Order::ONE, &p, &ScanConfig::near_ring(&p)).unwrap() {
        Some(v) => outcome(
            v.margin > 1e-4,
            format!(
                "violation at ({}, {}) margin {:.6e}",
                v.point.x, v.point.y, v.margin
            ),
        ),
        None => outcome(false, "no violation found"),
    }
}

fn oracle_suite() -> Outcome {
    let t = Instant::now();
    let out = run_oracle_suite(0).unwrap();
    let elapsed = t.elapsed();
    let failed: Vec<String> = out
        .iter()
        .filter(|o| !o.passed)
        .map(|o| format!("{} ({})", o.name, o.detail))
        .collect();
    outcome(
        failed.is_empty() && elapsed < secs(30),
        format!(
            "{} of {} checks pass; failed: [{}]",
            out.len() - failed.len(),
            out.len(),
            failed.join(", ")
        ),
    )
}

fn cone_construction() -> Outcome {
    let t = Instant::now();
    let table = make_generators(20, 5).unwrap();
    let a = audit(&table, PAIRS, ROUND_TRIPS, LIMINF_K, 0).unwrap();
    let elapsed = t.elapsed();
    outcome(
        a.passed()
            && a.pairs == PAIRS
            && a.round_trips == ROUND_TRIPS
            && a.liminf_below_milli.is_some_and(|k| k <= LIMINF_K)
            && elapsed < secs(30),
        format!(
            "knees {}, pair failures {}/{}, round-trip failures {}/{}, limsup {}, liminf below 1e-3 from k = {:?}",
            a.knees_certified,
            a.pair_failures,
            a.pairs,
            a.round_trip_failures,
            a.round_trips,
            a.limsup_certified,
            a.liminf_below_milli
        ),
    )
}

fn negative_certificate() -> Outcome {
    let r = certify_s2(&Params::new(1.5, 0.05, 0.117783036).unwrap());
    let c = r.condition(certificate::REGION_C_ALPHA).map(|c| c.verdict);
    outcome(
        r.verdict == Verdict::NotCertified && c == Some(Tri::False),
        format!("verdict {}, region-C alpha bound {c:?}", r.verdict),
    )
}

fn main() -> ExitCode {
    let criteria: [(u32, fn() -> Outcome); 8] = [
        (1, certifies_triple),
        (2, order_three_witness),
        (3, table_margins),
        (4, order_two_scans),
        (5, not_subadditive),
        (6, oracle_suite),
        (7, cone_construction),
        (8, negative_certificate),
    ];
    let mut failed = 0;
    for (n, run) in criteria {
        let t = Instant::now();
        let o = panic::catch_unwind(run).unwrap_or_else(|_| outcome(false, "panicked"));
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!(
            "criterion {n}: {tag} ({:.3} s) {}",
            t.elapsed().as_secs_f64(),
            o.detail
        );
        failed += usize::from(!o.pass);
    }
    println!(
        "acceptance: {} of {} criteria pass",
        criteria.len() - failed,
        criteria.len()
    );
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
