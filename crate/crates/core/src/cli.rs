//! Command line front end.
//!
//! Exit codes: 0 success, 1 bad flags or I/O failure, 2 trajectory left
//! undetermined by the caps, 3 verification or rule-table mismatch, 4 shared
//! grid collision.

use std::ffi::OsString;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use clap::builder::TypedValueParser;
use clap::{Args, Parser, Subcommand, ValueEnum};
use num_bigint::BigUint;
use num_traits::Zero;
use rayon::prelude::*;
use serde::Serialize;

use crate::engine::{self, BatchConfig, BatchMode, EngineError, RunConfig, TrajectoryRecord};
use crate::grid::{Grid, Mode};
use crate::rules::{self, DEFAULT_LEARN_MAX};
use crate::{metrics, render, Variant};

/// Environment variable fixing the worker count (0 keeps the default).
pub const THREADS_ENV: &str = "COLLATZ_CA_THREADS";

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_UNDETERMINED: i32 = 2;
pub const EXIT_MISMATCH: i32 = 3;
pub const EXIT_COLLISION: i32 = 4;

#[derive(Debug, Parser)]
#[command(name = "collatz-ca", version, about = "Collatz trajectories computed by cellular automata")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one input and print its trajectory.
    Run(RunArgs),
    /// Compare automaton rows with arithmetic over a range of inputs.
    Verify(VerifyArgs),
    /// Per-input n-efficiency as CSV, with the mean per variant.
    Efficiency(EfficiencyArgs),
    /// Run every input listed in a file, one JSON record per line.
    Batch(BatchArgs),
    /// Learn rule tables, check them against the closed forms and dump them.
    Rules(RulesArgs),
    /// Draw the stable grid of one input as text or PGM.
    Render(RenderArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Text,
    Jsonl,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SchedulerArg {
    Frontier,
    Synchronous,
}

impl From<SchedulerArg> for Mode {
    fn from(m: SchedulerArg) -> Self {
        match m {
            SchedulerArg::Frontier => Mode::Frontier,
            SchedulerArg::Synchronous => Mode::Synchronous,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum BatchModeArg {
    Stacked,
    Shared,
}

/// One variant or all three.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Selection {
    All,
    One(Variant),
}

impl Selection {
    fn variants(self) -> Vec<Variant> {
        match self {
            Selection::All => Variant::ALL.to_vec(),
            Selection::One(v) => vec![v],
        }
    }
}

impl FromStr for Selection {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("all") {
            Ok(Selection::All)
        } else {
            s.parse().map(Selection::One)
        }
    }
}

/// `auto` or a comma-separated list of column gaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Spacing {
    Auto,
    List(Vec<u64>),
}

impl FromStr for Spacing {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s == "auto" {
            return Ok(Spacing::Auto);
        }
        s.split(',')
            .filter(|p| !p.trim().is_empty())
            .map(|p| p.trim().parse::<u64>().map_err(|e| format!("bad spacing `{p}`: {e}")))
            .collect::<Result<Vec<_>, _>>()
            .map(Spacing::List)
    }
}

fn parse_positive(s: &str) -> Result<BigUint, String> {
    let n = BigUint::from_str(s.trim()).map_err(|e| format!("`{s}` is not a positive integer: {e}"))?;
    if n.is_zero() {
        return Err("inputs must be positive".into());
    }
    Ok(n)
}

#[derive(Debug, Args)]
pub struct Caps {
    /// Rows to compute before giving up.
    #[arg(long, default_value_t = engine::DEFAULT_MAX_ROWS, value_parser = clap::value_parser!(u64).range(1..).map(|v| v as usize))]
    pub max_rows: usize,
    /// Ticks to run before giving up.
    #[arg(long, default_value_t = engine::DEFAULT_TICK_CAP, value_parser = clap::value_parser!(u64).range(1..))]
    pub tick_cap: u64,
    #[arg(long, value_enum, default_value_t = SchedulerArg::Frontier)]
    pub mode: SchedulerArg,
}

impl Caps {
    fn config(&self, variant: Variant) -> RunConfig {
        RunConfig::new(variant).with_caps(self.max_rows, self.tick_cap).with_mode(self.mode.into())
    }
}

#[derive(Debug, Args)]
pub struct RunArgs {
    #[arg(value_parser = parse_positive)]
    pub n: BigUint,
    #[arg(long, default_value = "ca1")]
    pub variant: Variant,
    #[command(flatten)]
    pub caps: Caps,
    #[arg(long, value_enum, default_value_t = Format::Text)]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub from: u64,
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..))]
    pub to: u64,
    #[arg(long, default_value = "all")]
    pub variant: Selection,
    #[arg(long, value_enum, default_value_t = SchedulerArg::Frontier)]
    pub mode: SchedulerArg,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(2..))]
    pub from: u64,
    #[arg(long, default_value_t = 1 << 14)]
    pub to: u64,
    #[arg(long, default_value = "all")]
    pub variant: Selection,
}

#[derive(Debug, Args)]
pub struct BatchArgs {
    /// File with one positive integer per line.
    #[arg(long)]
    pub inputs: PathBuf,
    #[arg(long = "mode", value_enum, default_value_t = BatchModeArg::Stacked)]
    pub batch_mode: BatchModeArg,
    #[arg(long, default_value = "auto")]
    pub spacing: Spacing,
    #[arg(long, default_value_t = engine::DEFAULT_GUARD_GAP)]
    pub guard_gap: u64,
    #[arg(long, default_value = "ca3")]
    pub variant: Variant,
    #[arg(long, default_value_t = engine::DEFAULT_MAX_ROWS, value_parser = clap::value_parser!(u64).range(1..).map(|v| v as usize))]
    pub max_rows: usize,
    #[arg(long, default_value_t = engine::DEFAULT_TICK_CAP, value_parser = clap::value_parser!(u64).range(1..))]
    pub tick_cap: u64,
}

#[derive(Debug, Args)]
pub struct RulesArgs {
    #[arg(long)]
    pub variant: Variant,
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Largest input whose trajectory feeds the learned table.
    #[arg(long, default_value_t = DEFAULT_LEARN_MAX, value_parser = clap::value_parser!(u64).range(2..))]
    pub n_max: u64,
}

#[derive(Debug, Args)]
pub struct RenderArgs {
    #[arg(value_parser = parse_positive)]
    pub n: BigUint,
    #[arg(long, default_value = "ca1")]
    pub variant: Variant,
    /// Rows to draw; defaults to the rows up to the first 1 plus the tail.
    #[arg(long, value_parser = clap::value_parser!(u64).range(1..).map(|v| v as usize))]
    pub rows: Option<usize>,
    /// Output file; `.pgm` selects the image format, anything else text.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// JSON line for one trajectory. Integers are written as exact JSON numbers of
/// any size.
#[derive(Serialize)]
struct JsonRecord {
    input: serde_json::Number,
    variant: Variant,
    iterates: Vec<serde_json::Number>,
    reached_one: bool,
    ca_steps_to_one: Option<usize>,
    ticks_used: u64,
}

fn number(n: &BigUint) -> serde_json::Number {
    serde_json::Number::from_str(&n.to_string()).expect("decimal digits form a JSON number")
}

/// One JSONL line (without newline) for a record.
pub fn jsonl_line(r: &TrajectoryRecord) -> String {
    let json = JsonRecord {
        input: number(&r.input),
        variant: r.variant,
        iterates: r.iterates.iter().map(number).collect(),
        reached_one: r.reached_one,
        ca_steps_to_one: r.ca_steps_to_one,
        ticks_used: r.ticks_used,
    };
    serde_json::to_string(&json).expect("record serializes")
}

/// Iterates up to and including the first 1, space separated.
pub fn text_line(r: &TrajectoryRecord) -> String {
    let end = r.ca_steps_to_one.map_or(r.iterates.len(), |k| k + 1);
    r.iterates[..end].iter().map(BigUint::to_string).collect::<Vec<_>>().join(" ")
}

/// CSV with header `input,variant,row,value`, one line per row.
pub fn csv_lines(r: &TrajectoryRecord) -> String {
    let mut out = String::from("input,variant,row,value\n");
    for (k, v) in r.iterates.iter().enumerate() {
        out.push_str(&format!("{},{},{},{}\n", r.input, r.variant, k, v));
    }
    out
}

/// Parses arguments and runs a command, writing to the given streams.
/// Returns the process exit code.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let stream: &mut dyn Write = if e.use_stderr() { err } else { out };
            let _ = write!(stream, "{}", e.render());
            return code;
        }
    };
    if let Err(msg) = configure_threads() {
        let _ = writeln!(err, "error: {msg}");
        return EXIT_USAGE;
    }
    let result = match cli.command {
        Command::Run(a) => cmd_run(a, out),
        Command::Verify(a) => cmd_verify(a, out),
        Command::Efficiency(a) => cmd_efficiency(a, out, err),
        Command::Batch(a) => cmd_batch(a, out),
        Command::Rules(a) => cmd_rules(a, out),
        Command::Render(a) => cmd_render(a, out),
    };
    match result {
        Ok(code) => code,
        Err(Failure { code, message }) => {
            let _ = writeln!(err, "error: {message}");
            code
        }
    }
}

struct Failure {
    code: i32,
    message: String,
}

impl Failure {
    fn usage(message: impl ToString) -> Self {
        Failure { code: EXIT_USAGE, message: message.to_string() }
    }
}

impl From<io::Error> for Failure {
    fn from(e: io::Error) -> Self {
        Failure::usage(e)
    }
}

impl From<EngineError> for Failure {
    fn from(e: EngineError) -> Self {
        let code = if matches!(e, EngineError::Collision(_)) { EXIT_COLLISION } else { EXIT_USAGE };
        Failure { code, message: e.to_string() }
    }
}

type CmdResult = Result<i32, Failure>;

fn configure_threads() -> Result<(), String> {
    let Ok(raw) = std::env::var(THREADS_ENV) else { return Ok(()) };
    let threads: usize = raw.trim().parse().map_err(|_| format!("{THREADS_ENV} must be a number, got `{raw}`"))?;
    if threads > 0 {
        // A pool set up by an earlier call in the same process stays in place.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    }
    Ok(())
}

fn cmd_run(a: RunArgs, out: &mut dyn Write) -> CmdResult {
    let record = engine::run_single(&a.n, &a.caps.config(a.variant))?;
    match a.format {
        Format::Text => writeln!(out, "{}", text_line(&record))?,
        Format::Jsonl => writeln!(out, "{}", jsonl_line(&record))?,
        Format::Csv => write!(out, "{}", csv_lines(&record))?,
    }
    Ok(if record.reached_one { EXIT_OK } else { EXIT_UNDETERMINED })
}

fn cmd_verify(a: VerifyArgs, out: &mut dyn Write) -> CmdResult {
    if a.from > a.to {
        return Err(Failure::usage(format!("empty range {}..={}", a.from, a.to)));
    }
    let mut total = 0;
    for variant in a.variant.variants() {
        let cfg = RunConfig::new(variant).with_mode(a.mode.into());
        let reports = (a.from..=a.to)
            .into_par_iter()
            .map(|n| engine::verify_against_oracle(&BigUint::from(n), &cfg))
            .collect::<Result<Vec<_>, _>>()?;
        let failed: Vec<_> = reports.iter().filter(|r| !r.matched).collect();
        for r in &failed {
            let (row, expected, found) = r.first_divergence.as_ref().map_or((0, None, None), |d| {
                (d.row, d.expected.as_ref().map(ToString::to_string), d.found.as_ref().map(ToString::to_string))
            });
            writeln!(
                out,
                "mismatch {variant} n={} row={row} expected={} found={}",
                r.input,
                expected.as_deref().unwrap_or("-"),
                found.as_deref().unwrap_or("-")
            )?;
        }
        writeln!(out, "{variant} inputs {} mismatches {}", reports.len(), failed.len())?;
        total += failed.len();
    }
    writeln!(out, "mismatches {total}")?;
    Ok(if total == 0 { EXIT_OK } else { EXIT_MISMATCH })
}

fn cmd_efficiency(a: EfficiencyArgs, out: &mut dyn Write, err: &mut dyn Write) -> CmdResult {
    if a.from > a.to {
        return Err(Failure::usage(format!("empty range {}..={}", a.from, a.to)));
    }
    writeln!(err, "note: ranges start at n = 2; n = 1 has total stopping time 0 and no defined ratio")?;
    writeln!(out, "{}", metrics::CSV_HEADER)?;
    let mut means = Vec::new();
    for variant in a.variant.variants() {
        let records = metrics::efficiency_range(a.from, a.to, variant).map_err(Failure::usage)?;
        for r in &records {
            writeln!(out, "{}", r.csv_line())?;
        }
        means.push((variant, metrics::mean(&records)));
    }
    for (variant, mean) in &means {
        writeln!(out, "{}", metrics::aggregate_line(*variant, mean))?;
    }
    Ok(EXIT_OK)
}

fn read_inputs(path: &Path) -> Result<Vec<BigUint>, Failure> {
    let text = fs::read_to_string(path).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?;
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(k, l)| parse_positive(l).map_err(|e| Failure::usage(format!("{}:{}: {e}", path.display(), k + 1))))
        .collect()
}

fn cmd_batch(a: BatchArgs, out: &mut dyn Write) -> CmdResult {
    let inputs = read_inputs(&a.inputs)?;
    let run = RunConfig::new(a.variant).with_caps(a.max_rows, a.tick_cap);
    let mode = match a.batch_mode {
        BatchModeArg::Stacked => BatchMode::Stacked,
        BatchModeArg::Shared => BatchMode::Shared,
    };
    let mut cfg = BatchConfig::new(inputs, mode);
    cfg.guard_gap = a.guard_gap;
    if let Spacing::List(list) = a.spacing {
        cfg.spacings = Some(list);
    }
    let records = engine::run_batch(&cfg, &run)?;
    for r in &records {
        writeln!(out, "{}", jsonl_line(r))?;
    }
    Ok(if records.iter().all(|r| r.reached_one) { EXIT_OK } else { EXIT_UNDETERMINED })
}

fn cmd_rules(a: RulesArgs, out: &mut dyn Write) -> CmdResult {
    let tables = rules::learn_rule_tables(a.variant, a.n_max)
        .map_err(|e| Failure { code: EXIT_MISMATCH, message: e.to_string() })?;
    let mut text = String::new();
    let mut consistent = true;
    for t in &tables {
        consistent &= rules::check_rule_consistency(t).is_consistent();
        text.push_str(&t.dump());
    }
    match &a.out {
        Some(path) => fs::write(path, &text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(if consistent { EXIT_OK } else { EXIT_MISMATCH })
}

fn cmd_render(a: RenderArgs, out: &mut dyn Write) -> CmdResult {
    let rows = match a.rows {
        Some(r) => r,
        None => {
            let record = engine::run_single(&a.n, &RunConfig::new(a.variant))?;
            if !record.reached_one {
                return Ok(EXIT_UNDETERMINED);
            }
            record.iterates.len()
        }
    };
    let mut grid = Grid::new(a.variant, &a.n, 0);
    grid.run_until_rows_stable(rows - 1, engine::DEFAULT_TICK_CAP).map_err(Failure::usage)?;
    let pgm = a.out.as_ref().is_some_and(|p| p.extension().is_some_and(|e| e.eq_ignore_ascii_case("pgm")));
    let text = if pgm { render::pgm(&grid, rows) } else { render::snapshot(&grid, rows) }.map_err(Failure::usage)?;
    match &a.out {
        Some(path) => fs::write(path, text).map_err(|e| Failure::usage(format!("{}: {e}", path.display())))?,
        None => out.write_all(text.as_bytes())?,
    }
    Ok(EXIT_OK)
}
