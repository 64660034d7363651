//! `cks-verify`: transforms, condition checks and verification suites from
//! the command line. Exit codes: 0 pass, 1 violation or failed check,
//! 2 usage or configuration error.

mod config;
mod range;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::{SystemTime, UNIX_EPOCH};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use cks_core::growth::{
    check_condition, dual_legendre, l_function, l_sharp_function, legendre_table, GrowthCondition, GrowthFunction,
};
use cks_core::numeric::TruncationPolicy;
use cks_core::parallel::Execution;
use cks_core::report::{CheckResult, VerificationReport};
use cks_core::sequences::{check, SequenceCondition, WeightSequence};
use cks_core::suites::{catalog, find, SuiteConfig};

use config::FileConfig;

#[derive(Parser)]
#[command(name = "cks-verify", version, about = "Growth-function transforms, weight-sequence checks and Fock-model verification suites")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate a Legendre transform, dual transform or L-function.
    Transform(TransformArgs),
    /// Decide a growth or sequence condition on a finite grid.
    Check(CheckArgs),
    /// Run verification suites ("all" runs every suite).
    Verify(VerifyArgs),
    /// List the suite keys with their statements.
    List,
    /// Export log alpha(n) of a weight sequence as CSV.
    Sequence(SequenceArgs),
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum Format {
    Json,
    Csv,
}

#[derive(Args)]
struct TransformArgs {
    /// Growth function, e.g. `exp`, `beta_exp:0.5`, `exp_2`, `w_3`, `dual:exp`.
    #[arg(long = "fn")]
    function: Option<String>,
    #[arg(long)]
    config: Option<PathBuf>,
    /// `log l(t)` at the orders given by `--t`.
    #[arg(long, group = "what")]
    legendre: bool,
    /// `log u*(r)` at the arguments given by `--r`.
    #[arg(long, group = "what")]
    dual: bool,
    /// `log L_u(r)`.
    #[arg(long, group = "what")]
    lfn: bool,
    /// `log L#_u(r)`.
    #[arg(long, group = "what")]
    lsharp: bool,
    /// Orders: `1..10`, `0.5,1,2` or `0..2/5` (five evenly spaced points).
    #[arg(long)]
    t: Option<String>,
    /// Arguments, same syntax as `--t`.
    #[arg(long)]
    r: Option<String>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct CheckArgs {
    #[arg(long = "fn")]
    function: Option<String>,
    /// Weight sequence: `ones`, `factorial_power:b`, `bell:k`, `from-growth:<fn>`.
    #[arg(long)]
    seq: Option<String>,
    /// Growth condition (`U0`..`U3`, `C_plus_log`, `C_plus_half`, `log_exp_convex`,
    /// `log_xk_convex:k`) or sequence condition (`A1`, `B2`, `nearB2`, `C2`, ...).
    #[arg(long)]
    cond: String,
    /// Largest sequence index examined.
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct VerifyArgs {
    /// Suite keys, or `all`.
    keys: Vec<String>,
    /// Further suite keys.
    #[arg(long = "suite")]
    suites: Vec<String>,
    /// Growth functions replacing the suite defaults.
    #[arg(long = "fn")]
    functions: Vec<String>,
    /// Weight sequences replacing the suite defaults.
    #[arg(long = "seq")]
    sequences: Vec<String>,
    #[arg(long)]
    trials: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    d: Option<usize>,
    #[arg(long)]
    degree: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    tolerance: Option<f64>,
    /// Run trial sweeps on one thread.
    #[arg(long)]
    sequential: bool,
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for one report per suite plus `summary.json`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Format of the summary on stdout and in `--out`.
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Args)]
struct SequenceArgs {
    #[arg(long)]
    seq: String,
    #[arg(long, default_value_t = 40)]
    n: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// A failure mapped to exit code 2.
struct UsageError(String);

impl<E: std::fmt::Display> From<E> for UsageError {
    fn from(e: E) -> Self {
        UsageError(e.to_string())
    }
}

type CliResult = Result<ExitCode, UsageError>;

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Transform(a) => transform(a),
        Command::Check(a) => check_cmd(a),
        Command::Verify(a) => verify(a),
        Command::List => list(),
        Command::Sequence(a) => sequence(a),
    };
    match outcome {
        Ok(code) => code,
        Err(UsageError(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}

fn load_config(path: &Option<PathBuf>) -> Result<FileConfig, UsageError> {
    match path {
        Some(p) => FileConfig::load(p).map_err(UsageError),
        None => Ok(FileConfig::default()),
    }
}

fn resolve_function(flag: &Option<String>, cfg: &FileConfig) -> Result<GrowthFunction, UsageError> {
    match (flag, &cfg.function) {
        (Some(spec), _) => Ok(spec.parse()?),
        (None, Some(f)) => f.build().map_err(UsageError),
        (None, None) => Err(UsageError("no growth function given (--fn or [function])".into())),
    }
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<(), UsageError> {
    match out {
        Some(p) => fs::write(p, text)?,
        None => std::io::stdout().write_all(text.as_bytes())?,
    }
    Ok(())
}

#[derive(Serialize)]
struct Row {
    x: f64,
    log_value: f64,
    witness: f64,
}

fn transform(a: TransformArgs) -> CliResult {
    let cfg = load_config(&a.config)?;
    let u = resolve_function(&a.function, &cfg)?;
    let (header, rows) = if a.legendre || !(a.dual || a.lfn || a.lsharp) {
        let ts = range::parse(a.t.as_deref().ok_or("--legendre needs --t")?)?;
        let table = legendre_table(&u, &ts)?;
        let rows = table.values.iter().zip(&table.argmin_witnesses).map(|(&(t, v), &w)| Row { x: t, log_value: v, witness: w }).collect();
        (["t", "log_ell", "r_star"], rows)
    } else {
        let rs = range::parse(a.r.as_deref().ok_or("this transform needs --r")?)?;
        let mut rows = Vec::with_capacity(rs.len());
        let policy = TruncationPolicy::default();
        for r in rs {
            rows.push(if a.dual {
                let p = dual_legendre(&u, r)?;
                Row { x: r, log_value: p.log_value, witness: p.s_star }
            } else {
                let s = if a.lfn { l_function(&u, r, &policy)? } else { l_sharp_function(&u, r, &policy)? };
                Row { x: r, log_value: s.log_value, witness: s.log_tail_bound }
            });
        }
        let header = if a.dual { ["r", "log_value", "s_star"] } else { ["r", "log_value", "log_tail_bound"] };
        (header, rows)
    };
    let text = match a.format {
        Format::Csv => {
            let mut s = header.join(",") + "\n";
            for r in &rows {
                s += &format!("{},{:.17e},{:.17e}\n", r.x, r.log_value, r.witness);
            }
            s
        }
        Format::Json => {
            let objs: Vec<serde_json::Value> = rows
                .iter()
                .map(|r| serde_json::json!({ header[0]: r.x, header[1]: r.log_value, header[2]: r.witness }))
                .collect();
            serde_json::to_string_pretty(&objs)? + "\n"
        }
    };
    write_output(&a.out, &text)?;
    Ok(ExitCode::SUCCESS)
}

fn check_cmd(a: CheckArgs) -> CliResult {
    let cfg = load_config(&a.config)?;
    let result: CheckResult = match &a.seq {
        Some(spec) => {
            let seq: WeightSequence = spec.parse()?;
            if let Ok(cond) = a.cond.parse::<SequenceCondition>() {
                check(&seq, cond, a.n)
            } else {
                let cond: GrowthCondition = a.cond.parse()?;
                let u = seq.growth().ok_or("growth conditions apply only to from-growth sequences")?;
                check_condition(u, cond)
            }
        }
        None => {
            let u = resolve_function(&a.function, &cfg)?;
            check_condition(&u, a.cond.parse()?)
        }
    };
    write_output(&a.out, &(serde_json::to_string_pretty(&result)? + "\n"))?;
    Ok(if result.passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn list() -> CliResult {
    let mut out = std::io::stdout().lock();
    for s in catalog() {
        if writeln!(out, "{:30} {}", s.key, s.statement).is_err() {
            break;
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn sequence(a: SequenceArgs) -> CliResult {
    let seq: WeightSequence = a.seq.parse()?;
    let mut buf = Vec::new();
    seq.write_csv(a.n, &mut buf)?;
    write_output(&a.out, &String::from_utf8(buf)?)?;
    Ok(ExitCode::SUCCESS)
}

#[derive(Serialize)]
struct SummaryLine {
    suite: String,
    passed: bool,
    trials: usize,
    violations: usize,
    worst_margin: f64,
    tolerance: f64,
}

#[derive(Serialize)]
struct Summary {
    seed: u64,
    passed: bool,
    suites: Vec<SummaryLine>,
}

fn suite_keys(a: &VerifyArgs, cfg: &FileConfig) -> Result<Vec<&'static str>, UsageError> {
    let mut requested: Vec<String> = a.keys.iter().chain(&a.suites).cloned().collect();
    if requested.is_empty() {
        requested = cfg.suites.keys.clone();
    }
    if requested.is_empty() {
        return Err(UsageError("no suites given; use a key, --suite or `all`".into()));
    }
    let mut keys = Vec::new();
    for k in &requested {
        if k == "all" {
            keys.extend(catalog().iter().map(|s| s.key));
        } else {
            keys.push(find(k).ok_or_else(|| UsageError(format!("unknown suite {k:?}; see `cks-verify list`")))?.key);
        }
    }
    let mut seen = std::collections::HashSet::new();
    keys.retain(|k| seen.insert(*k));
    Ok(keys)
}

fn timestamp() -> String {
    let secs = SystemTime::now().duration_since(UNIX_EPOCH).map(|d| d.as_secs()).unwrap_or(0);
    format!("unix:{secs}")
}

fn verify(a: VerifyArgs) -> CliResult {
    let cfg = load_config(&a.config)?;
    let keys = suite_keys(&a, &cfg)?;
    let mut functions = a.functions.iter().map(|s| s.parse::<GrowthFunction>()).collect::<Result<Vec<_>, _>>()?;
    if functions.is_empty() {
        if let Some(f) = &cfg.function {
            functions.push(f.build().map_err(UsageError)?);
        }
    }
    let sequences = a.sequences.iter().map(|s| s.parse::<WeightSequence>()).collect::<Result<Vec<_>, _>>()?;
    let sequential = a.sequential || cfg.suites.sequential.unwrap_or(false);
    let suite_cfg = SuiteConfig {
        seed: a.seed.or(cfg.suites.seed).unwrap_or(0),
        trials: a.trials.or(cfg.suites.trials),
        tolerance: a.tolerance.or(cfg.suites.tolerance),
        d: a.d.or(cfg.model.d),
        degree: a.degree.or(cfg.model.degree),
        functions: (!functions.is_empty()).then_some(functions),
        sequences: (!sequences.is_empty()).then_some(sequences),
        exec: if sequential { Execution::Sequential } else { Execution::default() },
    };
    if let Some(dir) = &a.out {
        fs::create_dir_all(dir)?;
    }
    let mut reports: Vec<VerificationReport> = Vec::new();
    for key in keys {
        let desc = find(key).expect("key validated");
        let mut report = desc.run(&suite_cfg);
        eprintln!(
            "{:30} {} trials = {}, violations = {}",
            key,
            if report.passed() { "pass" } else { "FAIL" },
            report.trials,
            report.violations
        );
        if let Some(dir) = &a.out {
            report.timestamp = Some(timestamp());
            write_report(dir, &report)?;
        }
        reports.push(report);
    }
    let summary = Summary {
        seed: suite_cfg.seed,
        passed: reports.iter().all(|r| r.passed()),
        suites: reports
            .iter()
            .map(|r| SummaryLine {
                suite: r.suite.clone(),
                passed: r.passed(),
                trials: r.trials,
                violations: r.violations,
                worst_margin: r.worst_margin,
                tolerance: r.tolerance,
            })
            .collect(),
    };
    let text = match a.format {
        Format::Json => serde_json::to_string_pretty(&summary)? + "\n",
        Format::Csv => {
            let mut s = String::from("suite,passed,trials,violations,worst_margin,tolerance\n");
            for l in &summary.suites {
                s += &format!("{},{},{},{},{:e},{:e}\n", l.suite, l.passed, l.trials, l.violations, l.worst_margin, l.tolerance);
            }
            s
        }
    };
    if let Some(dir) = &a.out {
        let name = if a.format == Format::Json { "summary.json" } else { "summary.csv" };
        fs::write(dir.join(name), &text)?;
    }
    std::io::stdout().write_all(text.as_bytes())?;
    Ok(if summary.passed { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn write_report(dir: &Path, report: &VerificationReport) -> Result<(), UsageError> {
    let path = dir.join(format!("{}.json", report.suite));
    fs::write(path, serde_json::to_string_pretty(report)? + "\n")?;
    Ok(())
}
