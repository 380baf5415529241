use std::process::{Command, Output};

use subadd_core::certificate::{CertificateReport, Verdict};
use subadd_core::cone::ConeAudit;
use subadd_core::search::{ScanReport, TableRow, Violation};
use subadd_core::suite::OracleOutcome;

fn subadd(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_subadd"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

const TRIPLE: [&str; 6] = ["--mu", "1.2", "--sigma", "0.05", "--alpha", "0.05"];

#[test]
fn certify_triple_round_trips() {
    let mut args = vec!["certify", "--format", "json"];
    args.extend(TRIPLE);
    let o = subadd(&args);
    assert_eq!(o.status.code(), Some(0));
    let r: CertificateReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.verdict, Verdict::Certified);
    let again = serde_json::to_string_pretty(&r).unwrap();
    assert_eq!(again.trim(), stdout(&o).trim());
}

#[test]
fn certify_outside_hypotheses_is_negative() {
    let o = subadd(&[
        "certify",
        "--mu",
        "1.5",
        "--sigma",
        "0.05",
        "--alpha",
        "0.117783036",
    ]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("NOT_CERTIFIED"));
}

#[test]
fn violate_order_three() {
    let mut args = vec!["violate", "--a", "3", "--format", "json"];
    args.extend(TRIPLE);
    let o = subadd(&args);
    assert_eq!(o.status.code(), Some(1));
    let v: Option<Violation> = serde_json::from_str(&stdout(&o)).unwrap();
    let v = v.unwrap();
    assert!((v.point.x - 0.016).abs() < 0.005 && (v.point.y - 1.137).abs() < 0.005);
    assert!(v.margin > 0.01);
}

#[test]
fn violate_tiny_alpha_finds_nothing() {
    let o = subadd(&[
        "violate", "--a", "2", "--mu", "1.2", "--sigma", "0.05", "--alpha", "1e-9", "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let v: Option<Violation> = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(v.is_none());
}

#[test]
fn scan_round_trips() {
    let mut args = vec![
        "scan",
        "--a",
        "2",
        "--format",
        "json",
        "--grid-n",
        "101",
        "--refine-depth",
        "2",
        "--x-lo",
        "0",
        "--x-hi",
        "0.1",
        "--y-lo",
        "1.0",
        "--y-hi",
        "1.3",
    ];
    args.extend(TRIPLE);
    let o = subadd(&args);
    let r: ScanReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(
        serde_json::to_string_pretty(&r).unwrap().trim(),
        stdout(&o).trim()
    );
    // the order-2 gap goes negative just inside the ring
    assert!(r.min_gap < -0.01);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn table_csv_columns() {
    let o = subadd(&["table", "--skip-scan"]);
    let out = stdout(&o);
    let mut lines = out.lines();
    assert_eq!(lines.next(), Some("mu,sigma,alpha,x_star,y_star,margin"));
    assert_eq!(lines.count(), 5);
    assert!(matches!(o.status.code(), Some(0 | 1)));

    let o = subadd(&["table", "--skip-scan", "--format", "json"]);
    let rows: Vec<TableRow> = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(rows.len(), 5);
}

#[test]
fn config_file_is_overridden_by_flags() {
    let dir = std::env::temp_dir().join(format!("subadd-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("run.cfg");
    std::fs::write(
        &path,
        "mu = 1.5\nsigma = 0.05\nalpha = 0.117783036\nformat = json\n",
    )
    .unwrap();
    let cfg = path.to_str().unwrap();

    let o = subadd(&["certify", "--config", cfg]);
    assert_eq!(o.status.code(), Some(1));
    let r: CertificateReport = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(r.params.mu(), 1.5);

    let o = subadd(&["certify", "--config", cfg, "--mu", "1.2", "--alpha", "0.05"]);
    assert_eq!(o.status.code(), Some(0));

    std::fs::write(&path, "nu = 1\n").unwrap();
    assert_eq!(subadd(&["certify", "--config", cfg]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn input_errors_exit_two() {
    for args in [
        vec!["certify", "--mu", "1.2", "--sigma", "0", "--alpha", "0.05"],
        vec!["certify", "--mu", "1.2"],
        vec!["nonsense"],
        vec![
            "violate", "--a", "-1", "--mu", "1.2", "--sigma", "0.05", "--alpha", "0.05",
        ],
        vec![
            "scan", "--a", "2", "--mu", "1.2", "--sigma", "0.05", "--alpha", "0.05", "--x-lo", "1",
            "--x-hi", "0",
        ],
        vec![
            "certify",
            "--mu",
            "1.2",
            "--sigma",
            "0.05",
            "--alpha",
            "0.05",
            "--precision-bits",
            "8",
        ],
        vec!["cone", "apply", "--element", "2*q1"],
        vec!["cone", "apply", "--element", "1*p30"],
        vec!["cone", "bound", "--eps", "2"],
        vec!["cone", "limsup", "--n", "21"],
    ] {
        let o = subadd(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn oracles_report_round_trips() {
    let o = subadd(&["oracles", "--format", "json"]);
    let out: Vec<OracleOutcome> = serde_json::from_str(&stdout(&o)).unwrap();
    let all = out.iter().all(|o| o.passed);
    assert_eq!(o.status.code(), Some(if all { 0 } else { 1 }));
}

#[test]
fn cone_commands() {
    let o = subadd(&["cone", "limsup", "--n", "2"]);
    assert_eq!(o.status.code(), Some(0));
    let out = stdout(&o);
    let rows: Vec<&str> = out.lines().collect();
    assert_eq!(rows[0], "n,x,f_x");
    assert!(rows[1].starts_with("1,0.35355339059327376220"));
    assert!(rows[2].starts_with("2,0.11180339887498948482"));

    let o = subadd(&["cone", "liminf", "--n", "10"]);
    assert!(stdout(&o)
        .lines()
        .last()
        .unwrap()
        .starts_with("10,0.0577350269189625764"));

    let o = subadd(&["cone", "apply", "--element", "1/2*p1"]);
    assert_eq!(stdout(&o).trim(), "1*p1");
    let o = subadd(&["cone", "apply", "--element", "4*p1", "--inverse"]);
    assert_eq!(stdout(&o).trim(), "3*p1");

    let o = subadd(&[
        "cone", "pair", "--x", "1/2*p1", "--y", "1/2*p1", "--format", "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let w: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(w["case"], "SAME_RAY");
    assert_eq!(w["slack"], serde_json::json!({}));

    let o = subadd(&["cone", "bound", "--eps", "1/100", "--samples", "100"]);
    assert_eq!(o.status.code(), Some(0));

    let o = subadd(&[
        "cone",
        "check",
        "--pairs",
        "200",
        "--round-trips",
        "50",
        "--format",
        "json",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let a: ConeAudit = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(a.passed());
}
