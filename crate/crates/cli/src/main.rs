//! `subadd`: certification, gap scans, violation search, the printed table,
//! the lemma oracles and the cone construction from the command line.
//!
//! Exit status is 0 for an affirmative answer, 1 for a negative one and 2
//! for unusable input.

mod config;

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_rational::BigRational;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use subadd_core::certificate::{certify_s2, CertificateReport, Verdict};
use subadd_core::cone::{self, ConeElement, GeneratorTable, PairCase};
use subadd_core::hp::HighPrecision;
use subadd_core::search::{
    find_violation, reproduce_table_with, scan_gap_min, verify_point_with, ScanConfig, TableRow,
    SCAN_FLOOR, TABLE_MARGIN_TOLERANCE,
};
use subadd_core::suite::run_oracle_suite;
use subadd_core::{Order, Params};

use config::FileConfig;

/// Fractional digits printed for cone values (about 100 bits).
const CONE_DIGITS: usize = 30;

#[derive(Parser, Debug)]
#[command(
    name = "subadd",
    version,
    about = "Numerical and exact checks of a-subadditivity"
)]
struct Cli {
    /// Output format; defaults to csv for `table` and cone sequences, text otherwise.
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Significand bits for high-precision margins.
    #[arg(long, global = true)]
    precision_bits: Option<usize>,
    /// Flat key=value file; explicit flags win.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
    Text,
}

impl std::str::FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        <Format as ValueEnum>::from_str(s, true)
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Check the five sufficient conditions for 2-subadditivity.
    Certify(ParamArgs),
    /// Grid-scan the gap of order a for its minimum.
    Scan(ScanArgs),
    /// Search for a point where the order-a inequality fails.
    Violate(ScanArgs),
    /// Recompute the printed table of margins.
    Table {
        /// Only recompute the margins at the printed points.
        #[arg(long)]
        skip_scan: bool,
    },
    /// Run the analytic and statement oracle suite.
    Oracles {
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Exact subadditive bijection on a rational cone.
    Cone(ConeArgs),
}

#[derive(Args, Debug, Clone)]
struct ParamArgs {
    #[arg(long, allow_negative_numbers = true)]
    mu: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    sigma: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    alpha: Option<f64>,
}

#[derive(Args, Debug, Clone)]
struct ScanArgs {
    /// Order of the inequality.
    #[arg(long, allow_negative_numbers = true)]
    a: Option<f64>,
    #[command(flatten)]
    params: ParamArgs,
    #[arg(long, allow_negative_numbers = true)]
    x_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    x_hi: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y_lo: Option<f64>,
    #[arg(long, allow_negative_numbers = true)]
    y_hi: Option<f64>,
    #[arg(long)]
    grid_n: Option<usize>,
    #[arg(long)]
    refine_depth: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    tolerance: Option<f64>,
}

#[derive(Args, Debug)]
struct ConeArgs {
    #[arg(long, default_value_t = 20)]
    n_base: u32,
    #[arg(long, default_value_t = 5)]
    n_reserve: u32,
    #[command(subcommand)]
    command: ConeCommand,
}

#[derive(Subcommand, Debug)]
enum ConeCommand {
    /// (n, p_n, f(p_n)) for n = 1..N.
    Limsup {
        #[arg(long)]
        n: Option<u32>,
    },
    /// (k, x_k, f(x_k)) with x_k = r1 / k.
    Liminf {
        #[arg(long, default_value_t = 10)]
        n: u32,
    },
    /// Image (or preimage) of one element, e.g. "1/2*p1 + 3*r2".
    Apply {
        #[arg(long)]
        element: String,
        #[arg(long)]
        inverse: bool,
    },
    /// Exact subadditivity witness for a pair.
    Pair {
        #[arg(long)]
        x: String,
        #[arg(long)]
        y: String,
    },
    /// f(x) < 1 + eps for random x below eps.
    Bound {
        #[arg(long, default_value = "1/2")]
        eps: String,
        #[arg(long, default_value_t = 1000)]
        samples: usize,
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Every construction check at once.
    Check {
        #[arg(long, default_value_t = 10_000)]
        pairs: usize,
        #[arg(long, default_value_t = 1_000)]
        round_trips: usize,
        #[arg(long, default_value_t = 600)]
        liminf_len: u32,
        #[arg(long)]
        seed: Option<u64>,
    },
}

struct Ctx {
    file: FileConfig,
    format: Option<Format>,
    hp: HighPrecision,
}

impl Ctx {
    fn format(&self, default: Format) -> Format {
        self.format.unwrap_or(default)
    }

    fn params(&self, a: &ParamArgs) -> Result<Params> {
        let get = |flag, key: &str| -> Result<f64> {
            self.file
                .pick(flag, key)?
                .with_context(|| format!("missing --{key}"))
        };
        Ok(Params::new(
            get(a.mu, "mu")?,
            get(a.sigma, "sigma")?,
            get(a.alpha, "alpha")?,
        )?)
    }

    fn order(&self, a: Option<f64>) -> Result<Order> {
        let a = self.file.pick(a, "a")?.context("missing --a")?;
        Ok(Order::new(a)?)
    }

    fn scan_config(&self, s: &ScanArgs, base: ScanConfig) -> Result<ScanConfig> {
        let f = &self.file;
        let cfg = ScanConfig {
            x_lo: f.pick(s.x_lo, "x_lo")?.unwrap_or(base.x_lo),
            x_hi: f.pick(s.x_hi, "x_hi")?.unwrap_or(base.x_hi),
            y_lo: f.pick(s.y_lo, "y_lo")?.unwrap_or(base.y_lo),
            y_hi: f.pick(s.y_hi, "y_hi")?.unwrap_or(base.y_hi),
            grid_n: f.pick(s.grid_n, "grid_n")?.unwrap_or(base.grid_n),
            refine_depth: f
                .pick(s.refine_depth, "refine_depth")?
                .unwrap_or(base.refine_depth),
            tolerance: f.pick(s.tolerance, "tolerance")?.unwrap_or(base.tolerance),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    fn seed(&self, flag: Option<u64>) -> Result<u64> {
        Ok(self.file.pick(flag, "seed")?.unwrap_or(0))
    }
}

fn csv_out() -> csv::Writer<std::io::Stdout> {
    csv::Writer::from_writer(std::io::stdout())
}

fn json_out<T: Serialize>(v: &T) -> Result<()> {
    let mut out = std::io::stdout().lock();
    serde_json::to_writer_pretty(&mut out, v)?;
    writeln!(out)?;
    Ok(())
}

fn fmt_interval(i: &Option<subadd_core::Interval>) -> (String, String) {
    match i {
        Some(i) => (format!("{:e}", i.lo()), format!("{:e}", i.hi())),
        None => (String::new(), String::new()),
    }
}

fn run_certify(ctx: &Ctx, a: &ParamArgs) -> Result<bool> {
    let p = ctx.params(a)?;
    let r: CertificateReport = certify_s2(&p);
    match ctx.format(Format::Text) {
        Format::Json => json_out(&r)?,
        Format::Csv => {
            let mut w = csv_out();
            w.write_record([
                "condition",
                "lhs_lo",
                "lhs_hi",
                "rhs_lo",
                "rhs_hi",
                "verdict",
            ])?;
            for c in &r.conditions {
                let (ll, lh) = fmt_interval(&c.lhs);
                let (rl, rh) = fmt_interval(&c.rhs);
                w.write_record([c.name.clone(), ll, lh, rl, rh, c.verdict.to_string()])?;
            }
            w.flush()?;
        }
        Format::Text => {
            println!("params  {}", r.params);
            for c in &r.conditions {
                println!("{:<8}{}", c.verdict.to_string(), c.name);
                if let (Some(l), Some(rh)) = (&c.lhs, &c.rhs) {
                    println!("        lhs {l}  rhs {rh}");
                }
                if let Some(d) = &c.detail {
                    println!("        {d}");
                }
            }
            println!("verdict {}", r.verdict);
            println!("note    {}", r.note);
        }
    }
    Ok(r.verdict == Verdict::Certified)
}

fn run_scan(ctx: &Ctx, s: &ScanArgs) -> Result<bool> {
    let p = ctx.params(&s.params)?;
    let a = ctx.order(s.a)?;
    let cfg = ctx.scan_config(s, ScanConfig::plane())?;
    let r = scan_gap_min(a, &p, &cfg)?;
    let ok = r.min_gap >= -cfg.tolerance;
    match ctx.format(Format::Text) {
        Format::Json => json_out(&r)?,
        Format::Csv => {
            let mut w = csv_out();
            w.write_record([
                "a",
                "mu",
                "sigma",
                "alpha",
                "min_gap",
                "x",
                "y",
                "evaluations",
            ])?;
            w.write_record([
                r.order.value().to_string(),
                p.mu().to_string(),
                p.sigma().to_string(),
                p.alpha().to_string(),
                r.min_gap.to_string(),
                r.argmin.x.to_string(),
                r.argmin.y.to_string(),
                r.evaluations.to_string(),
            ])?;
            w.flush()?;
        }
        Format::Text => {
            println!("order       {}", r.order.value());
            println!("params      {p}");
            println!(
                "box         [{}, {}] x [{}, {}], {} points per axis, {} refinements",
                cfg.x_lo, cfg.x_hi, cfg.y_lo, cfg.y_hi, cfg.grid_n, cfg.refine_depth
            );
            println!("min gap     {:e}", r.min_gap);
            println!("argmin      ({}, {})", r.argmin.x, r.argmin.y);
            println!("evaluations {}", r.evaluations);
            println!("note        a finite scan corroborates, it does not prove");
        }
    }
    Ok(ok)
}

fn run_violate(ctx: &Ctx, s: &ScanArgs) -> Result<bool> {
    let p = ctx.params(&s.params)?;
    let a = ctx.order(s.a)?;
    let cfg = ctx.scan_config(s, ScanConfig::near_ring(&p))?;
    let mut v = find_violation(a, &p, &cfg)?;
    if let Some(v) = v.as_mut() {
        v.margin = verify_point_with(&ctx.hp, a, &p, v.point.x, v.point.y);
    }
    match ctx.format(Format::Text) {
        Format::Json => json_out(&v)?,
        Format::Csv => {
            let mut w = csv_out();
            w.write_record(["a", "mu", "sigma", "alpha", "x", "y", "margin"])?;
            if let Some(v) = &v {
                w.write_record([
                    a.value().to_string(),
                    p.mu().to_string(),
                    p.sigma().to_string(),
                    p.alpha().to_string(),
                    v.point.x.to_string(),
                    v.point.y.to_string(),
                    v.margin.to_string(),
                ])?;
            }
            w.flush()?;
        }
        Format::Text => match &v {
            Some(v) => {
                println!("violation of order {} for {p}", a.value());
                println!("point  ({}, {})", v.point.x, v.point.y);
                println!(
                    "margin {} (a f(x) + f(y) - f(ax+y) = {:e}, {} bits)",
                    v.margin,
                    -v.margin,
                    ctx.hp.bits()
                );
            }
            None => println!(
                "no violation of order {} for {p} in [{}, {}] x [{}, {}]",
                a.value(),
                cfg.x_lo,
                cfg.x_hi,
                cfg.y_lo,
                cfg.y_hi
            ),
        },
    }
    Ok(v.is_none())
}

fn run_table(ctx: &Ctx, skip_scan: bool) -> Result<bool> {
    let scan = ScanConfig::plane();
    let mut rows: Vec<TableRow> = reproduce_table_with((!skip_scan).then_some(&scan))?;
    for r in &mut rows {
        let p = Params::new(r.mu, r.sigma, r.alpha)?;
        r.margin = verify_point_with(&ctx.hp, Order::THREE, &p, r.x_star, r.y_star);
    }
    let ok = rows.iter().all(|r| {
        r.margin_error() <= TABLE_MARGIN_TOLERANCE && r.scan_min_gap.is_none_or(|m| m >= SCAN_FLOOR)
    });
    match ctx.format(Format::Csv) {
        Format::Json => json_out(&rows)?,
        Format::Csv => {
            let mut w = csv_out();
            w.write_record(["mu", "sigma", "alpha", "x_star", "y_star", "margin"])?;
            for r in &rows {
                w.write_record([
                    r.mu.to_string(),
                    r.sigma.to_string(),
                    r.alpha.to_string(),
                    r.x_star.to_string(),
                    r.y_star.to_string(),
                    format!("{:.9}", r.margin),
                ])?;
            }
            w.flush()?;
        }
        Format::Text => {
            println!(
                "{:>5} {:>6} {:>12} {:>8} {:>8} {:>13} {:>13} {:>13}",
                "mu", "sigma", "alpha", "x*", "y*", "margin", "printed", "scan min"
            );
            for r in &rows {
                let scan = r
                    .scan_min_gap
                    .map_or("-".to_string(), |m| format!("{m:.3e}"));
                println!(
                    "{:>5} {:>6} {:>12} {:>8} {:>8} {:>13.9} {:>13.9} {:>13}",
                    r.mu, r.sigma, r.alpha, r.x_star, r.y_star, r.margin, r.printed_margin, scan
                );
            }
        }
    }
    Ok(ok)
}

fn run_oracles(ctx: &Ctx, seed: Option<u64>) -> Result<bool> {
    let out = run_oracle_suite(ctx.seed(seed)?)?;
    match ctx.format(Format::Text) {
        Format::Json => json_out(&out)?,
        Format::Csv => {
            let mut w = csv_out();
            w.write_record(["name", "passed", "detail"])?;
            for o in &out {
                w.write_record([o.name.clone(), o.passed.to_string(), o.detail.clone()])?;
            }
            w.flush()?;
        }
        Format::Text => {
            for o in &out {
                let tag = if o.passed { "PASS" } else { "FAIL" };
                println!("{tag} {:<44} {}", o.name, o.detail);
            }
        }
    }
    Ok(out.iter().all(|o| o.passed))
}

/// One row of a limit sequence, values as fixed-point decimals.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SequenceRow {
    pub n: u32,
    pub x: String,
    pub f_x: String,
    pub certified: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct WitnessReport {
    pub x: ConeElement,
    pub y: ConeElement,
    pub f_x: ConeElement,
    pub f_y: ConeElement,
    pub f_sum: ConeElement,
    pub case: PairCase,
    /// Per-generator coefficients of `f(x) + f(y) - f(x + y)`.
    pub slack: BTreeMap<String, String>,
}

fn emit_sequence(ctx: &Ctx, rows: &[SequenceRow], label: &str) -> Result<bool> {
    match ctx.format(Format::Csv) {
        Format::Json => json_out(&rows)?,
        Format::Csv => {
            let mut w = csv_out();
            w.write_record([label, "x", "f_x"])?;
            for r in rows {
                w.write_record([r.n.to_string(), r.x.clone(), r.f_x.clone()])?;
            }
            w.flush()?;
        }
        Format::Text => {
            for r in rows {
                let tag = if r.certified {
                    "certified"
                } else {
                    "NOT certified"
                };
                println!("{label}={:<4} x={} f(x)={} {tag}", r.n, r.x, r.f_x);
            }
        }
    }
    Ok(rows.iter().all(|r| r.certified))
}

fn parse_element(s: &str) -> Result<ConeElement> {
    s.parse()
        .with_context(|| format!("cannot parse cone element {s:?}"))
}

fn run_cone(ctx: &Ctx, c: &ConeArgs) -> Result<bool> {
    let table: GeneratorTable = cone::make_generators(c.n_base, c.n_reserve)?;
    match &c.command {
        ConeCommand::Limsup { n } => {
            let rows = cone::limsup_sequence(&table, n.unwrap_or(c.n_base))?;
            let rows: Vec<SequenceRow> = rows
                .iter()
                .map(|r| SequenceRow {
                    n: r.n,
                    x: r.p.mid_decimal(CONE_DIGITS),
                    f_x: r.fp.mid_decimal(CONE_DIGITS),
                    certified: r.below_scale && r.knee_certified,
                })
                .collect();
            emit_sequence(ctx, &rows, "n")
        }
        ConeCommand::Liminf { n } => {
            let rows = cone::liminf_sequence(&table, *n)?;
            let rows: Vec<SequenceRow> = rows
                .iter()
                .map(|r| SequenceRow {
                    n: r.k,
                    x: r.x.mid_decimal(CONE_DIGITS),
                    f_x: r.fx.mid_decimal(CONE_DIGITS),
                    certified: r.fixed,
                })
                .collect();
            emit_sequence(ctx, &rows, "k")
        }
        ConeCommand::Apply { element, inverse } => {
            let x = parse_element(element)?;
            let y = if *inverse {
                cone::apply_f_inv(&table, &x)?
            } else {
                cone::apply_f(&table, &x)?
            };
            match ctx.format(Format::Text) {
                Format::Json => json_out(&y)?,
                Format::Csv => {
                    let mut w = csv_out();
                    w.write_record(["input", "output", "value"])?;
                    let v = table
                        .enclose(&y, cone::SEQUENCE_BITS)?
                        .mid_decimal(CONE_DIGITS);
                    w.write_record([x.to_string(), y.to_string(), v])?;
                    w.flush()?;
                }
                Format::Text => println!("{y}"),
            }
            Ok(true)
        }
        ConeCommand::Pair { x, y } => {
            let (x, y) = (parse_element(x)?, parse_element(y)?);
            let w = cone::check_subadditive_pair(&table, &x, &y)?;
            let report = WitnessReport {
                f_x: cone::apply_f(&table, &x)?,
                f_y: cone::apply_f(&table, &y)?,
                f_sum: cone::apply_f(&table, &x.add(&y))?,
                x,
                y,
                case: w.case,
                slack: w
                    .slack
                    .iter()
                    .map(|(id, c)| (id.to_string(), c.to_string()))
                    .collect(),
            };
            match ctx.format(Format::Text) {
                Format::Json => json_out(&report)?,
                Format::Csv => {
                    let mut out = csv_out();
                    out.write_record(["generator", "slack"])?;
                    for (id, c) in &report.slack {
                        out.write_record([id, c])?;
                    }
                    out.flush()?;
                }
                Format::Text => {
                    println!(
                        "case        {}",
                        serde_json::to_value(report.case)?.as_str().unwrap_or("?")
                    );
                    println!("f(x)        {}", report.f_x);
                    println!("f(y)        {}", report.f_y);
                    println!("f(x+y)      {}", report.f_sum);
                    if report.slack.is_empty() {
                        println!("slack       0 (equality)");
                    }
                    for (id, c) in &report.slack {
                        println!("slack       {c} on {id}");
                    }
                }
            }
            Ok(true)
        }
        ConeCommand::Bound { eps, samples, seed } => {
            let eps: BigRational = eps
                .parse()
                .map_err(|_| anyhow::anyhow!("eps must be a rational like 1/100, got {eps:?}"))?;
            let mut rng = ChaCha8Rng::seed_from_u64(ctx.seed(*seed)?);
            let ok = cone::upper_bound_check(&table, &eps, *samples, &mut rng)?;
            match ctx.format(Format::Text) {
                Format::Json => json_out(&ok)?,
                Format::Csv => {
                    let mut w = csv_out();
                    w.write_record(["eps", "samples", "passed"])?;
                    w.write_record([eps.to_string(), samples.to_string(), ok.to_string()])?;
                    w.flush()?;
                }
                Format::Text => println!(
                    "f(x) < 1 + {eps} for {samples} samples below {eps}: {}",
                    if ok { "yes" } else { "no" }
                ),
            }
            Ok(ok)
        }
        ConeCommand::Check {
            pairs,
            round_trips,
            liminf_len,
            seed,
        } => {
            let a = cone::audit(&table, *pairs, *round_trips, *liminf_len, ctx.seed(*seed)?)?;
            match ctx.format(Format::Text) {
                Format::Json => json_out(&a)?,
                Format::Csv => {
                    let mut w = csv_out();
                    w.write_record(["check", "passed", "detail"])?;
                    for (name, ok, detail) in audit_lines(&a) {
                        w.write_record([name.to_string(), ok.to_string(), detail])?;
                    }
                    w.flush()?;
                }
                Format::Text => {
                    for (name, ok, detail) in audit_lines(&a) {
                        println!("{} {name:<12} {detail}", if ok { "PASS" } else { "FAIL" });
                    }
                }
            }
            Ok(a.passed())
        }
    }
}

fn audit_lines(a: &cone::ConeAudit) -> Vec<(&'static str, bool, String)> {
    vec![
        (
            "knees",
            a.knees_certified,
            format!("1 - 2^-n < p_n q_n < 1 for n = 1..{}", a.n_base),
        ),
        (
            "subadditive",
            a.pair_failures == 0,
            format!("{} failures in {} random pairs", a.pair_failures, a.pairs),
        ),
        (
            "bijective",
            a.round_trip_failures == 0,
            format!(
                "{} failures in {} round trips",
                a.round_trip_failures, a.round_trips
            ),
        ),
        (
            "limsup",
            a.limsup_certified,
            format!("1 - f(p_{0}) < 2^-{0}", a.n_base),
        ),
        (
            "liminf",
            a.liminf_below_milli.is_some(),
            match a.liminf_below_milli {
                Some(k) => format!("x_k < 1e-3 from k = {k}"),
                None => format!("x_k >= 1e-3 for all k <= {}", a.liminf_len),
            },
        ),
    ]
}

fn run(cli: Cli) -> Result<bool> {
    let file = match &cli.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let format = file.pick(cli.format, "format")?;
    let bits = file
        .pick(cli.precision_bits, "precision_bits")?
        .unwrap_or(HighPrecision::DEFAULT_BITS);
    let ctx = Ctx {
        hp: HighPrecision::new(bits)?,
        file,
        format,
    };
    match &cli.command {
        Command::Certify(a) => run_certify(&ctx, a),
        Command::Scan(s) => run_scan(&ctx, s),
        Command::Violate(s) => run_violate(&ctx, s),
        Command::Table { skip_scan } => run_table(&ctx, *skip_scan),
        Command::Oracles { seed } => run_oracles(&ctx, *seed),
        Command::Cone(c) => run_cone(&ctx, c),
    }
}

/// A broken construction invariant is a negative answer; everything else
/// that stops a run is an input problem.
fn exit_status(e: &anyhow::Error) -> u8 {
    match e.downcast_ref::<subadd_core::Error>() {
        Some(subadd_core::Error::ConstructionBug(_)) => 1,
        _ => 2,
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 2 } else { 0 });
        }
    };
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_status(&e))
        }
    }
}
