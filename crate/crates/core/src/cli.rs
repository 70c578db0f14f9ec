//! Command-line front end.
//!
//! Exit status: 0 on success, 1 when a verification or comparison fails,
//! 2 on usage or input errors.

use std::fmt::Write as _;
use std::io::{self, Read, Write};
use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::gamma::{self, is_pole};
use crate::lifted::LiftedSeq;
use crate::oracle::{self, fmt_sig17, QuadratureConfig};
use crate::parser::{parse, to_series, Expr};
use crate::rl::{self, kernel_index};
use crate::series::{same_lattice, GenSeries, SeriesFile, Term};
use crate::verify::{self, Suite, SuiteReport, VerifyConfig};

/// Environment variable overriding the integer-detection tolerance.
pub const TOLERANCE_ENV: &str = "FRACLIFT_TOL";

#[derive(Debug, Parser)]
#[command(
    name = "fraclift",
    version,
    about = "Fractional derivatives of power series: the Riemann-Liouville power rule and its commutative lift"
)]
struct Cli {
    /// Integer-detection tolerance for Gamma poles and lattices [default: 1e-9, or $FRACLIFT_TOL]
    #[arg(long, global = true, value_name = "TOL")]
    tol: Option<f64>,

    /// Multiply every Gamma ratio by (1 + REL); for sensitivity testing
    #[arg(long, global = true, hide = true, value_name = "REL", allow_negative_numbers = true)]
    perturb_gamma: Option<f64>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Differentiate or integrate to real order k, termwise or through the lifted sequence
    Deriv(DerivArgs),
    /// Lift a series to a shifted sequence and print it
    Lift(LiftArgs),
    /// Project a lifted sequence (JSON) back to a series
    Project(ProjectArgs),
    /// Run identity suites
    Verify(VerifyArgs),
    /// Compare the termwise derivative against numerical quadrature
    OracleCompare(OracleArgs),
    /// Report which terms order k annihilates
    KernelCheck(KernelArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Pretty,
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Via {
    Rl,
    Lifted,
}

#[derive(Debug, Args)]
struct InputArgs {
    /// Closed-form expression in x
    #[arg(long, required_unless_present = "file", conflicts_with = "file")]
    expr: Option<String>,

    /// Series JSON file ("-" for stdin)
    #[arg(long)]
    file: Option<PathBuf>,

    /// Expansion point a (ignored with --file)
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    basepoint: f64,

    /// Truncation order of the expansion (ignored with --file)
    #[arg(long, default_value_t = 16)]
    order: usize,
}

#[derive(Debug, Args)]
struct DerivArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Order; repeat to apply several orders in sequence
    #[arg(long = "k", required = true, allow_negative_numbers = true)]
    k: Vec<f64>,

    /// Evaluate the result at these points
    #[arg(long = "at", allow_negative_numbers = true)]
    at: Vec<f64>,

    #[arg(long, value_enum, default_value_t = Via::Rl)]
    via: Via,

    /// Print both paths with a per-term difference
    #[arg(long)]
    compare_paths: bool,

    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
}

#[derive(Debug, Args)]
struct LiftArgs {
    #[command(flatten)]
    input: InputArgs,

    /// Apply the shift operator of this order after lifting; repeatable
    #[arg(long = "shift", allow_negative_numbers = true)]
    shift: Vec<f64>,

    #[arg(long, value_enum, default_value_t = Format::Json)]
    format: Format,
}

#[derive(Debug, Args)]
struct ProjectArgs {
    /// Lifted sequence JSON file ("-" for stdin)
    #[arg(long)]
    file: PathBuf,

    /// Apply the shift operator of this order before projecting; repeatable
    #[arg(long = "shift", allow_negative_numbers = true)]
    shift: Vec<f64>,

    #[arg(long = "at", allow_negative_numbers = true)]
    at: Vec<f64>,

    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
}

#[derive(Debug, Args)]
struct VerifyArgs {
    /// Suite name (r1p, r2, linearity, d1..d8, i1..i4, d6p, d8p, kernel-repair, semigroup) or "all"; repeatable
    #[arg(long = "suite", default_value = "all")]
    suite: Vec<String>,

    /// Jet order of transcendental inputs
    #[arg(long, default_value_t = 16)]
    order: usize,

    /// Random instances per suite
    #[arg(long, default_value_t = 200)]
    cases: usize,

    /// Base seed for the generated cases [default: 0x5eedf00d]
    #[arg(long)]
    seed: Option<u64>,

    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
}

#[derive(Debug, Args)]
struct OracleArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long = "k", allow_negative_numbers = true)]
    k: f64,

    /// Evaluation points, all above the basepoint
    #[arg(long = "at", required = true, allow_negative_numbers = true)]
    at: Vec<f64>,

    #[arg(long, default_value_t = 1e-9)]
    abs_tol: f64,

    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,

    #[arg(long, default_value_t = 200)]
    max_subdivisions: usize,

    #[arg(long, default_value_t = 1e-3)]
    fd_step: f64,

    /// Exit with status 1 when any |termwise - oracle| exceeds this
    #[arg(long)]
    max_diff: Option<f64>,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,
}

#[derive(Debug, Args)]
struct KernelArgs {
    #[command(flatten)]
    input: InputArgs,

    #[arg(long = "k", allow_negative_numbers = true)]
    k: f64,

    #[arg(long, value_enum, default_value_t = Format::Pretty)]
    format: Format,
}

enum Failure {
    Usage(String),
    Failed(String),
}

impl Failure {
    fn usage(e: impl std::fmt::Display) -> Failure {
        Failure::Usage(e.to_string())
    }

    fn failed(e: impl std::fmt::Display) -> Failure {
        Failure::Failed(e.to_string())
    }
}

type CmdResult = Result<i32, Failure>;

/// Parses `argv` (program name first) and runs the command, writing to the
/// process's standard streams.
pub fn run<I, T>(argv: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let stdout = io::stdout();
    let stderr = io::stderr();
    run_with(argv, &mut stdout.lock(), &mut stderr.lock())
}

/// [`run`] with explicit output streams.
pub fn run_with<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(argv) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(err, "{text}")
            } else {
                write!(out, "{text}")
            };
            return code;
        }
    };
    let mut text = String::new();
    let result = configure(&cli).and_then(|_| dispatch(&cli.command, &mut text));
    if cli.perturb_gamma.is_some() {
        gamma::set_ratio_perturbation(0.0);
    }
    let _ = out.write_all(text.as_bytes());
    let _ = out.flush();
    match result {
        Ok(code) => code,
        Err(Failure::Usage(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            2
        }
        Err(Failure::Failed(msg)) => {
            let _ = writeln!(err, "error: {msg}");
            1
        }
    }
}

fn configure(cli: &Cli) -> Result<(), Failure> {
    let tol = match cli.tol {
        Some(t) => Some(t),
        None => match std::env::var(TOLERANCE_ENV) {
            Ok(v) => Some(v.trim().parse::<f64>().map_err(|_| {
                Failure::Usage(format!("{TOLERANCE_ENV}='{v}' is not a number"))
            })?),
            Err(_) => None,
        },
    };
    if let Some(t) = tol {
        if !(t.is_finite() && (0.0..0.5).contains(&t)) {
            return Err(Failure::Usage(format!(
                "tolerance {t} must lie in [0, 0.5)"
            )));
        }
        gamma::set_integer_tolerance(t);
    }
    if let Some(p) = cli.perturb_gamma {
        if !p.is_finite() {
            return Err(Failure::Usage(format!("perturbation {p} is not finite")));
        }
        gamma::set_ratio_perturbation(p);
    }
    Ok(())
}

fn dispatch(cmd: &Command, out: &mut String) -> CmdResult {
    match cmd {
        Command::Deriv(a) => deriv(a, out),
        Command::Lift(a) => lift(a, out),
        Command::Project(a) => project(a, out),
        Command::Verify(a) => run_verify(a, out),
        Command::OracleCompare(a) => oracle_compare(a, out),
        Command::KernelCheck(a) => kernel_check(a, out),
    }
}

fn read_text(path: &PathBuf) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        let mut s = String::new();
        io::stdin()
            .read_to_string(&mut s)
            .map_err(|e| Failure::Usage(format!("reading stdin: {e}")))?;
        Ok(s)
    } else {
        std::fs::read_to_string(path)
            .map_err(|e| Failure::Usage(format!("reading {}: {e}", path.display())))
    }
}

struct Input {
    series: GenSeries,
    expr: Option<Expr>,
}

fn load(input: &InputArgs) -> Result<Input, Failure> {
    match (&input.expr, &input.file) {
        (Some(text), _) => {
            let e = parse(text).map_err(Failure::usage)?;
            let series = to_series(&e, input.basepoint, input.order).map_err(Failure::usage)?;
            Ok(Input {
                series,
                expr: Some(e),
            })
        }
        (None, Some(path)) => {
            let series = GenSeries::from_json(&read_text(path)?).map_err(Failure::usage)?;
            Ok(Input { series, expr: None })
        }
        (None, None) => Err(Failure::Usage("one of --expr or --file is required".into())),
    }
}

fn check_finite(name: &str, values: &[f64]) -> Result<(), Failure> {
    match values.iter().find(|v| !v.is_finite()) {
        Some(v) => Err(Failure::Usage(format!("{name} {v} is not finite"))),
        None => Ok(()),
    }
}

fn fmt_term(a: f64, t: &Term) -> String {
    GenSeries::monomial(a, t.coef, t.exp)
        .map(|s| s.to_string())
        .unwrap_or_else(|_| format!("{}*(x-a)^{}", t.coef, t.exp))
}

fn fmt_order(ks: &[f64]) -> String {
    ks.iter().map(|k| format!("D^{k}")).collect::<Vec<_>>().join(" ")
}

fn kernel_note(alpha: f64, k: f64) -> String {
    format!("0 (kernel: α+1−k = {})", kernel_index(alpha, k))
}

fn opt_trunc(s: &GenSeries) -> Option<f64> {
    Some(s.truncation_order()).filter(|t| t.is_finite())
}

#[derive(Serialize)]
struct Point {
    x: f64,
    value: f64,
}

#[derive(Serialize)]
struct Annihilated {
    step: usize,
    exp: f64,
    coef: f64,
    kernel_index: f64,
}

#[derive(Serialize)]
struct PathJson {
    path: &'static str,
    result: SeriesFile,
    truncation_order: Option<f64>,
    annihilated: Vec<Annihilated>,
    values: Vec<Point>,
}

#[derive(Serialize)]
struct DerivJson<'a> {
    basepoint: f64,
    orders: &'a [f64],
    input: SeriesFile,
    #[serde(flatten)]
    single: Option<PathJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    rl: Option<PathJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    lifted: Option<PathJson>,
    #[serde(skip_serializing_if = "Option::is_none")]
    diff: Option<Vec<DiffRow>>,
}

#[derive(Serialize)]
struct DiffRow {
    exp: f64,
    rl: f64,
    lifted: f64,
    abs_diff: f64,
}

struct PathResult {
    series: GenSeries,
    /// Human-readable trace, one line per input term and step.
    trace: Vec<String>,
    annihilated: Vec<Annihilated>,
}

fn rl_path(f: &GenSeries, ks: &[f64]) -> Result<PathResult, Failure> {
    let a = f.basepoint();
    let mut trace = Vec::new();
    let mut annihilated = Vec::new();
    let mut cur = f.clone();
    for (step, &k) in ks.iter().enumerate() {
        if ks.len() > 1 {
            trace.push(format!("step {}: D^{k}", step + 1));
        }
        for t in cur.terms() {
            let image = rl::power_term(t.coef, t.exp, k).map_err(Failure::usage)?;
            let shown = match image {
                Some(img) => fmt_term(a, &img),
                None => {
                    annihilated.push(Annihilated {
                        step,
                        exp: t.exp,
                        coef: t.coef,
                        kernel_index: kernel_index(t.exp, k),
                    });
                    kernel_note(t.exp, k)
                }
            };
            trace.push(format!("  {}  ->  {shown}", fmt_term(a, t)));
        }
        cur = rl::differintegrate(&cur, k).map_err(Failure::usage)?;
    }
    Ok(PathResult {
        series: cur,
        trace,
        annihilated,
    })
}

fn lifted_path(f: &GenSeries, ks: &[f64]) -> Result<PathResult, Failure> {
    let a = f.basepoint();
    let mut rho = LiftedSeq::from_series(f).map_err(Failure::usage)?;
    for &k in ks {
        rho = rho.shift(k);
    }
    let series = rho.project();
    let mut trace = Vec::new();
    let mut annihilated = Vec::new();
    for (j, v) in rho.values() {
        let t = rho.exponent(j);
        let coef = v * gamma::recip_gamma(t + 1.0);
        let shown = if coef == 0.0 {
            annihilated.push(Annihilated {
                step: ks.len().saturating_sub(1),
                exp: t,
                coef: v,
                kernel_index: kernel_index(t, 0.0),
            });
            format!("0 (hidden: slot kept, t+1 = {} is a pole)", kernel_index(t, 0.0))
        } else {
            fmt_term(a, &Term::new(t, coef))
        };
        trace.push(format!("  slot {j} value {v} at exponent {t}  ->  {shown}"));
    }
    Ok(PathResult {
        series,
        trace,
        annihilated,
    })
}

fn eval_points(s: &GenSeries, xs: &[f64]) -> Result<Vec<Point>, Failure> {
    xs.iter()
        .map(|&x| {
            s.eval(x)
                .map(|value| Point { x, value })
                .map_err(Failure::usage)
        })
        .collect()
}

fn path_json(name: &'static str, p: PathResult, values: Vec<Point>) -> PathJson {
    PathJson {
        path: name,
        truncation_order: opt_trunc(&p.series),
        result: SeriesFile::from(&p.series),
        annihilated: p.annihilated,
        values,
    }
}

fn result_line(p: &PathResult) -> String {
    if p.series.is_zero() && !p.annihilated.is_empty() {
        let notes: Vec<String> = p
            .annihilated
            .iter()
            .map(|an| format!("α+1−k = {}", an.kernel_index))
            .collect::<std::collections::BTreeSet<_>>()
            .into_iter()
            .collect();
        format!("0 (kernel: {})", notes.join(", "))
    } else {
        p.series.to_string()
    }
}

fn diff_rows(l: &GenSeries, r: &GenSeries) -> Vec<DiffRow> {
    let mut exps: Vec<f64> = l.terms().iter().chain(r.terms()).map(|t| t.exp).collect();
    exps.sort_by(f64::total_cmp);
    exps.dedup_by(|x, y| same_lattice(*x, *y) && (*x - *y).abs() <= gamma::integer_tolerance());
    exps.into_iter()
        .map(|exp| {
            let (a, b) = (l.coef(exp), r.coef(exp));
            DiffRow {
                exp,
                rl: a,
                lifted: b,
                abs_diff: (a - b).abs(),
            }
        })
        .collect()
}

fn deriv(args: &DerivArgs, out: &mut String) -> CmdResult {
    check_finite("order", &args.k)?;
    check_finite("point", &args.at)?;
    let input = load(&args.input)?;
    let f = &input.series;
    let a = f.basepoint();
    let paths: Vec<(&'static str, PathResult)> = if args.compare_paths {
        vec![("rl", rl_path(f, &args.k)?), ("lifted", lifted_path(f, &args.k)?)]
    } else {
        match args.via {
            Via::Rl => vec![("rl", rl_path(f, &args.k)?)],
            Via::Lifted => vec![("lifted", lifted_path(f, &args.k)?)],
        }
    };
    let diff = args
        .compare_paths
        .then(|| diff_rows(&paths[0].1.series, &paths[1].1.series));

    match args.format {
        Format::Pretty => {
            let _ = writeln!(out, "f = {f}");
            for (name, p) in &paths {
                let _ = writeln!(out, "{} via {name}:", fmt_order(&args.k));
                for line in &p.trace {
                    let _ = writeln!(out, "{line}");
                }
                let _ = writeln!(out, "result ({name}): {}", result_line(p));
                for pt in eval_points(&p.series, &args.at)? {
                    let _ = writeln!(out, "value at x = {}: {}", pt.x, pt.value);
                }
            }
            if let Some(rows) = &diff {
                let _ = writeln!(out, "{:>24} {:>24} {:>24} {:>12}", "exp", "rl", "lifted", "abs_diff");
                for r in rows {
                    let _ = writeln!(
                        out,
                        "{:>24} {:>24} {:>24} {:>12.3e}",
                        r.exp, r.rl, r.lifted, r.abs_diff
                    );
                }
            }
        }
        Format::Json => {
            let mut named: Vec<(&'static str, PathJson)> = Vec::new();
            for (name, p) in paths {
                let values = eval_points(&p.series, &args.at)?;
                named.push((name, path_json(name, p, values)));
            }
            let mut doc = DerivJson {
                basepoint: a,
                orders: &args.k,
                input: SeriesFile::from(f),
                single: None,
                rl: None,
                lifted: None,
                diff,
            };
            if args.compare_paths {
                let mut it = named.into_iter();
                doc.rl = it.next().map(|p| p.1);
                doc.lifted = it.next().map(|p| p.1);
            } else {
                doc.single = named.pop().map(|p| p.1);
            }
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).map_err(Failure::failed)?);
        }
        Format::Csv => {
            if args.compare_paths {
                let (l, r) = (&paths[0].1.series, &paths[1].1.series);
                if args.at.is_empty() {
                    let _ = writeln!(out, "exp,rl,lifted,abs_diff");
                    for row in diff.unwrap_or_default() {
                        let _ = writeln!(
                            out,
                            "{},{},{},{}",
                            fmt_sig17(row.exp),
                            fmt_sig17(row.rl),
                            fmt_sig17(row.lifted),
                            fmt_sig17(row.abs_diff)
                        );
                    }
                } else {
                    let _ = writeln!(out, "x,rl,lifted,abs_diff");
                    let (pl, pr) = (eval_points(l, &args.at)?, eval_points(r, &args.at)?);
                    for (p, q) in pl.iter().zip(&pr) {
                        let _ = writeln!(
                            out,
                            "{},{},{},{}",
                            fmt_sig17(p.x),
                            fmt_sig17(p.value),
                            fmt_sig17(q.value),
                            fmt_sig17((p.value - q.value).abs())
                        );
                    }
                }
            } else {
                let s = &paths[0].1.series;
                if args.at.is_empty() {
                    write_terms_csv(s, out);
                } else {
                    let _ = writeln!(out, "x,value");
                    for p in eval_points(s, &args.at)? {
                        let _ = writeln!(out, "{},{}", fmt_sig17(p.x), fmt_sig17(p.value));
                    }
                }
            }
        }
    }
    Ok(0)
}

fn write_terms_csv(s: &GenSeries, out: &mut String) {
    let _ = writeln!(out, "exp,coef");
    for t in s.terms() {
        let _ = writeln!(out, "{},{}", fmt_sig17(t.exp), fmt_sig17(t.coef));
    }
}

fn write_lifted(rho: &LiftedSeq, format: Format, out: &mut String) {
    match format {
        Format::Json => {
            let _ = writeln!(out, "{}", rho.to_json_pretty());
        }
        Format::Csv => {
            let _ = writeln!(out, "index,exponent,value");
            for (j, v) in rho.values() {
                let _ = writeln!(out, "{},{},{}", j, fmt_sig17(rho.exponent(j)), fmt_sig17(v));
            }
        }
        Format::Pretty => {
            let _ = writeln!(out, "basepoint {}, offset {}", rho.basepoint(), rho.offset());
            for (j, v) in rho.values() {
                let _ = writeln!(out, "  slot {j:>4}  exponent {:<22} value {v}", rho.exponent(j));
            }
        }
    }
}

fn lift(args: &LiftArgs, out: &mut String) -> CmdResult {
    check_finite("shift", &args.shift)?;
    let input = load(&args.input)?;
    let mut rho = LiftedSeq::from_series(&input.series).map_err(Failure::usage)?;
    for &k in &args.shift {
        rho = rho.shift(k);
    }
    write_lifted(&rho, args.format, out);
    Ok(0)
}

fn project(args: &ProjectArgs, out: &mut String) -> CmdResult {
    check_finite("shift", &args.shift)?;
    check_finite("point", &args.at)?;
    let mut rho = LiftedSeq::from_json(&read_text(&args.file)?).map_err(Failure::usage)?;
    for &k in &args.shift {
        rho = rho.shift(k);
    }
    let s = rho.project();
    let points = eval_points(&s, &args.at)?;
    match args.format {
        Format::Pretty => {
            let _ = writeln!(out, "{s}");
            for p in points {
                let _ = writeln!(out, "value at x = {}: {}", p.x, p.value);
            }
        }
        Format::Json => {
            let _ = writeln!(out, "{}", s.to_json_pretty());
        }
        Format::Csv => {
            if points.is_empty() {
                write_terms_csv(&s, out);
            } else {
                let _ = writeln!(out, "x,value");
                for p in points {
                    let _ = writeln!(out, "{},{}", fmt_sig17(p.x), fmt_sig17(p.value));
                }
            }
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct SuiteJson<'a> {
    suite: &'static str,
    label: &'static str,
    passed: bool,
    cases: usize,
    max_residual: f64,
    tolerance: f64,
    failure: &'a Option<String>,
}

#[derive(Serialize)]
struct VerifyJson<'a> {
    all_passed: bool,
    max_residual: f64,
    suites: Vec<SuiteJson<'a>>,
}

fn run_verify(args: &VerifyArgs, out: &mut String) -> CmdResult {
    let mut suites = Vec::new();
    for name in &args.suite {
        if name.eq_ignore_ascii_case("all") {
            suites.extend(Suite::ALL);
        } else {
            suites.push(name.parse::<Suite>().map_err(Failure::usage)?);
        }
    }
    let mut seen = Vec::new();
    suites.retain(|s| {
        let fresh = !seen.contains(s);
        seen.push(*s);
        fresh
    });
    let mut cfg = VerifyConfig {
        order: args.order,
        cases: args.cases,
        ..VerifyConfig::default()
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if cfg.order > 150 {
        return Err(Failure::Usage(format!(
            "order {} is too large; factorials overflow beyond 170",
            cfg.order
        )));
    }
    let reports: Vec<SuiteReport> = suites
        .iter()
        .map(|&s| verify::run_suite(s, &cfg))
        .collect::<Result<_, _>>()
        .map_err(Failure::failed)?;
    let all = reports.iter().all(SuiteReport::passed);
    let worst = reports.iter().map(|r| r.max_residual).fold(0.0, f64::max);
    match args.format {
        Format::Pretty => {
            for r in &reports {
                let _ = writeln!(out, "{r}");
            }
            let failed = reports.iter().filter(|r| !r.passed()).count();
            if all {
                let _ = writeln!(out, "all identities pass, max residual {worst:.3e}");
            } else {
                let _ = writeln!(
                    out,
                    "{failed} of {} suites failed, max residual {worst:.3e}",
                    reports.len()
                );
            }
        }
        Format::Json => {
            let doc = VerifyJson {
                all_passed: all,
                max_residual: worst,
                suites: reports
                    .iter()
                    .map(|r| SuiteJson {
                        suite: r.suite.name(),
                        label: r.suite.label(),
                        passed: r.passed(),
                        cases: r.cases,
                        max_residual: r.max_residual,
                        tolerance: r.tolerance,
                        failure: &r.failure,
                    })
                    .collect(),
            };
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&doc).map_err(Failure::failed)?);
        }
        Format::Csv => {
            let _ = writeln!(out, "suite,passed,cases,max_residual,tolerance");
            for r in &reports {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    r.suite.name(),
                    r.passed(),
                    r.cases,
                    fmt_sig17(r.max_residual),
                    fmt_sig17(r.tolerance)
                );
            }
        }
    }
    Ok(if all { 0 } else { 1 })
}

#[derive(Serialize)]
struct RowJson {
    x: f64,
    termwise: f64,
    oracle: f64,
    abs_diff: f64,
}

fn oracle_compare(args: &OracleArgs, out: &mut String) -> CmdResult {
    check_finite("order", &[args.k])?;
    check_finite("point", &args.at)?;
    let input = load(&args.input)?;
    let cfg = QuadratureConfig {
        abs_tol: args.abs_tol,
        rel_tol: args.rel_tol,
        max_subdivisions: args.max_subdivisions,
        fd_step: args.fd_step,
        ..QuadratureConfig::default()
    };
    cfg.validate().map_err(Failure::usage)?;
    let table = match &input.expr {
        Some(e) => {
            let pointwise = |t: f64| e.eval(t);
            oracle::compare_with(&input.series, &pointwise, args.k, &args.at, &cfg)
        }
        None => oracle::compare(&input.series, args.k, &args.at, &cfg),
    }
    .map_err(|e| match e {
        oracle::OracleError::Domain { .. }
        | oracle::OracleError::OrderTooHigh { .. }
        | oracle::OracleError::InvalidConfig(_) => Failure::usage(e),
        other => Failure::failed(other),
    })?;
    match args.format {
        Format::Csv => out.push_str(&table.to_csv()),
        Format::Json => {
            let rows: Vec<RowJson> = table
                .rows
                .iter()
                .map(|r| RowJson {
                    x: r.x,
                    termwise: r.termwise,
                    oracle: r.oracle,
                    abs_diff: r.abs_diff,
                })
                .collect();
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&rows).map_err(Failure::failed)?);
        }
        Format::Pretty => {
            let _ = writeln!(out, "{:>12} {:>24} {:>24} {:>12}", "x", "termwise", "oracle", "abs_diff");
            for r in &table.rows {
                let _ = writeln!(
                    out,
                    "{:>12} {:>24} {:>24} {:>12.3e}",
                    r.x, r.termwise, r.oracle, r.abs_diff
                );
            }
        }
    }
    match args.max_diff {
        Some(m) if table.max_abs_diff() > m => Err(Failure::Failed(format!(
            "max |termwise - oracle| = {:e} exceeds {m:e}",
            table.max_abs_diff()
        ))),
        _ => Ok(0),
    }
}

#[derive(Serialize)]
struct KernelRow {
    exp: f64,
    coef: f64,
    kernel_index: f64,
    annihilated: bool,
    numerator_pole: bool,
}

fn kernel_check(args: &KernelArgs, out: &mut String) -> CmdResult {
    check_finite("order", &[args.k])?;
    let input = load(&args.input)?;
    let f = &input.series;
    let k = args.k;
    let rows: Vec<KernelRow> = f
        .terms()
        .iter()
        .map(|t| KernelRow {
            exp: t.exp,
            coef: t.coef,
            kernel_index: kernel_index(t.exp, k),
            annihilated: rl::is_annihilated(t.exp, k),
            numerator_pole: is_pole(t.exp + 1.0) && gamma::as_integer(k).is_none(),
        })
        .collect();
    match args.format {
        Format::Pretty => {
            let _ = writeln!(out, "D^{k} about {}", f.basepoint());
            for (t, r) in f.terms().iter().zip(&rows) {
                let status = if r.annihilated {
                    "annihilated"
                } else if r.numerator_pole {
                    "undefined (numerator pole)"
                } else {
                    "survives"
                };
                let _ = writeln!(
                    out,
                    "  {:<32} α+1−k = {:<24} {status}",
                    fmt_term(f.basepoint(), t),
                    r.kernel_index
                );
            }
            let n = rows.iter().filter(|r| r.annihilated).count();
            let _ = writeln!(out, "{n} of {} terms annihilated", rows.len());
        }
        Format::Json => {
            let _ = writeln!(out, "{}", serde_json::to_string_pretty(&rows).map_err(Failure::failed)?);
        }
        Format::Csv => {
            let _ = writeln!(out, "exp,coef,kernel_index,annihilated,numerator_pole");
            for r in &rows {
                let _ = writeln!(
                    out,
                    "{},{},{},{},{}",
                    fmt_sig17(r.exp),
                    fmt_sig17(r.coef),
                    fmt_sig17(r.kernel_index),
                    r.annihilated,
                    r.numerator_pole
                );
            }
        }
    }
    Ok(0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn call(args: &[&str]) -> (i32, String, String) {
        let mut out = Vec::new();
        let mut err = Vec::new();
        let argv = std::iter::once("fraclift").chain(args.iter().copied());
        let code = run_with(argv, &mut out, &mut err);
        (
            code,
            String::from_utf8(out).unwrap(),
            String::from_utf8(err).unwrap(),
        )
    }

    #[test]
    fn half_derivative_of_x() {
        let (code, out, _) = call(&["deriv", "--expr", "x", "--k", "0.5", "--at", "1"]);
        assert_eq!(code, 0);
        assert!(out.contains("result (rl): 1.1283791670955126*x^0.5"), "{out}");
        assert!(out.contains("value at x = 1: 1.1283791670955126"), "{out}");
    }

    #[test]
    fn kernel_is_reported() {
        let (code, out, _) = call(&["deriv", "--expr", "(x-0)^(-0.5)", "--k", "0.5"]);
        assert_eq!(code, 0);
        assert!(out.contains("0 (kernel: α+1−k = 0)"), "{out}");
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(call(&["deriv", "--expr", "x"]).0, 2);
        assert_eq!(call(&["deriv", "--expr", "x +", "--k", "1"]).0, 2);
        assert_eq!(call(&["bogus"]).0, 2);
        assert_eq!(call(&["verify", "--suite", "d9"]).0, 2);
        assert_eq!(call(&["deriv", "--expr", "x", "--k", "inf"]).0, 2);
        assert_eq!(call(&["--help"]).0, 0);
    }

    #[test]
    fn negative_orders_parse() {
        let (code, out, _) = call(&["deriv", "--expr", "1", "--k", "-1", "--format", "csv"]);
        assert_eq!(code, 0);
        assert_eq!(out, "exp,coef\n1.0000000000000000e0,1.0000000000000000e0\n");
    }

    #[test]
    fn lifted_path_repairs_the_kernel() {
        let args = [
            "deriv", "--expr", "x^(-0.5)", "--k", "0.5", "--k", "0.5", "--compare-paths",
        ];
        let (code, out, _) = call(&args);
        assert_eq!(code, 0);
        assert!(out.contains("result (rl): 0 (kernel"), "{out}");
        assert!(out.contains("result (lifted): -0.4999999999999999"), "{out}");
    }

    #[test]
    fn verify_single_suite() {
        let (code, out, _) = call(&["verify", "--suite", "d1", "--cases", "10"]);
        assert_eq!(code, 0);
        assert!(out.starts_with("PASS (D1)"), "{out}");
        assert!(out.contains("all identities pass"));
    }

    #[test]
    fn kernel_check_rows() {
        let (code, out, _) = call(&[
            "kernel-check", "--expr", "x^(-0.5) + x^0.5", "--k", "0.5", "--format", "csv",
        ]);
        assert_eq!(code, 0);
        let lines: Vec<&str> = out.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[1].ends_with(",true,false"));
        assert!(lines[2].ends_with(",false,false"));
    }
}
