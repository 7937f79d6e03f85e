//! Acceptance suite. Every criterion runs to completion and prints one
//! `PASS`/`FAIL` line with the measured values; the binary exits non-zero if
//! any criterion failed.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use collatz_ca::digits::{self, MapVariant};
use collatz_ca::engine::{self, BatchConfig, BatchMode, EngineError, RunConfig};
use collatz_ca::grid::{Grid, Mode};
use collatz_ca::metrics;
use collatz_ca::render;
use collatz_ca::rules::{self, inferred_carry, Category, Cell, Neighborhood, Parity, RuleKind, DEFAULT_LEARN_MAX};
use collatz_ca::Variant;
use num_bigint::BigUint;
use num_traits::ToPrimitive;
use rayon::prelude::*;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome { pass, detail: detail.into() }
}

fn big(n: u64) -> BigUint {
    BigUint::from(n)
}

fn values(v: &[BigUint]) -> Vec<u64> {
    v.iter().map(|x| x.to_u64().expect("small value")).collect()
}

/// Iterates of a run up to and including the first 1.
fn to_first_one(n: u64, variant: Variant) -> Vec<u64> {
    let r = engine::run_single(&big(n), &RunConfig::new(variant)).expect("run succeeds");
    let end = r.ca_steps_to_one.map_or(r.iterates.len(), |k| k + 1);
    values(&r.iterates[..end])
}

fn golden_sequences() -> Outcome {
    let start = Instant::now();
    let ca1 = values(&engine::run_single(&big(7), &RunConfig::new(Variant::Ca1)).unwrap().iterates);
    let ca3 = values(&engine::run_single(&big(7), &RunConfig::new(Variant::Ca3)).unwrap().iterates);
    let elapsed = start.elapsed();
    let want1 = [7, 11, 17, 26, 13, 20, 10, 5, 8, 4, 2, 1, 2, 1, 2, 1];
    let want3 = [7, 11, 17, 13, 5, 1, 1];
    let pass = ca1 == want1 && ca3 == want3 && elapsed < Duration::from_secs(1);
    outcome(pass, format!("ca1 {ca1:?} ca3 {ca3:?} in {elapsed:?}"))
}

fn ca2_oracle_equivalence() -> Outcome {
    let got = to_first_one(7, Variant::Ca2);
    let oracle = values(&digits::oracle_trajectory(MapVariant::T2, &big(7), 1000).iterates);
    let fixture = include_str!("fixtures/ca2_seven.txt");
    let line = |key: &str| -> Vec<u64> {
        fixture
            .lines()
            .find_map(|l| l.strip_prefix(key))
            .map(|rest| rest.split_whitespace().map(|t| t.parse().unwrap()).collect())
            .unwrap_or_default()
    };
    let documented = line("published:") != line("oracle:") && line("oracle:") == oracle;
    let pass = got == oracle && oracle == [7, 22, 11, 34, 17, 13, 10, 5, 1] && documented;
    outcome(pass, format!("automaton {got:?} oracle {oracle:?} discrepancy documented {documented}"))
}

fn range_verification() -> Outcome {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut pass = true;
    for variant in Variant::ALL {
        let cfg = RunConfig::new(variant);
        let mismatches = (2..=1u64 << 12)
            .into_par_iter()
            .filter(|&n| !engine::verify_against_oracle(&big(n), &cfg).map(|r| r.matched).unwrap_or(false))
            .count();
        pass &= mismatches == 0;
        detail.push(format!("{variant} mismatches {mismatches}"));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(60);
    outcome(pass, format!("{} in {elapsed:?}", detail.join(", ")))
}

fn efficiency_averages() -> Outcome {
    let start = Instant::now();
    let mut detail = Vec::new();
    let mut pass = true;
    for (variant, target) in [(Variant::Ca1, 0.694), (Variant::Ca2, 0.637), (Variant::Ca3, 0.322)] {
        let mean = metrics::average_efficiency(2, 1 << 14, variant).expect("range converges");
        let value = mean.to_f64().expect("finite mean");
        let ok = (value - target).abs() <= 0.015;
        pass &= ok;
        detail.push(format!(
            "{variant} {} (target {target}, {})",
            metrics::decimal(&mean, 6),
            if ok { "ok" } else { "out of band" }
        ));
    }
    let elapsed = start.elapsed();
    pass &= elapsed < Duration::from_secs(30);
    outcome(pass, format!("{} in {elapsed:?}", detail.join(", ")))
}

fn rule_cardinalities() -> Outcome {
    let wanted = [
        (RuleKind::Ca3, Category::Inner, 16),
        (RuleKind::Ca2, Category::EvenInner, 32),
        (RuleKind::Ca2, Category::OddInnerToOdd, 64),
        (RuleKind::Ca2, Category::OddInnerToEven, 64),
        (RuleKind::Ca1Bottom, Category::Inner, 18),
        (RuleKind::Ca1Top, Category::ParitySweep, 6),
        (RuleKind::Ca1Top, Category::ParityStart, 3),
    ];
    let reports: Vec<_> = [RuleKind::Ca3, RuleKind::Ca2, RuleKind::Ca1Bottom, RuleKind::Ca1Top]
        .into_par_iter()
        .map(|kind| rules::check_rule_consistency(&rules::learn_rule_table(kind, DEFAULT_LEARN_MAX).unwrap()))
        .collect();
    let mut pass = true;
    let mut detail = Vec::new();
    for r in &reports {
        pass &= r.mismatches.is_empty();
        detail.push(format!("{} mismatches {}", r.kind, r.mismatches.len()));
    }
    for (kind, category, want) in wanted {
        let got = reports.iter().find(|r| r.kind == kind).unwrap().count(category);
        pass &= got == want;
        detail.push(format!("{kind} {} {got}/{want}", category.name()));
    }
    outcome(pass, detail.join(", "))
}

/// Base-`radix` digit `p` of `v`, least significant first.
fn digit(v: u64, radix: u64, p: u32) -> u64 {
    (v / radix.pow(p)) % radix
}

/// Result cell at position `p` of `s` as stored: trailing zeros and positions
/// past the leading digit are empty.
fn stored(s: u64, radix: u64, p: u32, tag: impl Fn(u8) -> Cell) -> Cell {
    if s.is_multiple_of(radix.pow(p + 1)) || s < radix.pow(p) {
        Cell::Empty
    } else {
        tag(digit(s, radix, p) as u8)
    }
}

/// Operand cell at position `p`; negative positions and positions past the
/// leading digit are empty.
fn operand(x: u64, radix: u64, p: i64, tag: impl Fn(u8) -> Cell) -> Cell {
    if p < 0 || x < radix.pow(p as u32) {
        Cell::Empty
    } else {
        tag(digit(x, radix, p as u32) as u8)
    }
}

fn carry_soundness() -> Outcome {
    // Base 2: 3x+1 = (2x+1) + x. The carry into position p is read off the
    // low p bits of both summands.
    let bin = |d: u8| Cell::Digit(d);
    let ca3_failures: usize = (1..=1u64 << 16)
        .into_par_iter()
        .filter(|x| x % 2 == 1)
        .map(|x| {
            let (a, s) = (2 * x + 1, 3 * x + 1);
            let width = 64 - x.leading_zeros() + 2;
            (1..=width)
                .filter(|&p| {
                    let mask = (1u64 << p) - 1;
                    let truth = (((a & mask) + (x & mask)) >> p) as u8;
                    let n = Neighborhood::Ca3 {
                        above: operand(x, 2, p as i64, bin),
                        above_right: operand(x, 2, p as i64 - 1, bin),
                        above_right2: operand(x, 2, p as i64 - 2, bin),
                        right: stored(s, 2, p - 1, bin),
                    };
                    inferred_carry(&n) != Some(truth)
                })
                .count()
        })
        .sum();
    // Base 4: 3x+1 = (4x+1) - x. The borrow into position p is whether the low
    // p digits of the minuend are smaller than those of x.
    let quad = |d: u8| Cell::Tagged(d, Parity::Odd);
    let ca2_failures: usize = (1..=1u64 << 16)
        .into_par_iter()
        .filter(|x| x % 2 == 1)
        .map(|x| {
            let (m, s) = (4 * x + 1, 3 * x + 1);
            // Past the leading digit of x both operand cells are empty and no
            // rule fires, so only positions 0..=len are checked.
            let len = (64 - x.leading_zeros()).div_ceil(2);
            (0..=len)
                .filter(|&p| {
                    let modulus = 4u64.pow(p);
                    let truth = u8::from(m % modulus < x % modulus);
                    let n = Neighborhood::Ca2 {
                        above: operand(x, 4, p as i64, quad),
                        above_right: operand(x, 4, p as i64 - 1, quad),
                        right: if p == 0 { Cell::Empty } else { stored(s, 4, p - 1, quad) },
                    };
                    inferred_carry(&n) != Some(truth)
                })
                .count()
        })
        .sum();
    outcome(
        ca3_failures == 0 && ca2_failures == 0,
        format!("carry failures {ca3_failures} (odd x <= 2^16), borrow failures {ca2_failures} (odd x <= 4^8)"),
    )
}

fn stabilized(variant: Variant, n: u64, mode: Mode) -> String {
    let rows = engine::expected_rows(&big(n), variant, 100_000).len();
    let mut grid = Grid::new(variant, &big(n), 0).with_mode(mode);
    grid.run_until_rows_stable(rows - 1, engine::DEFAULT_TICK_CAP).expect("rows stabilize");
    render::snapshot(&grid, rows).expect("rows are final")
}

fn mode_equivalence() -> Outcome {
    let mut detail = Vec::new();
    let mut pass = true;
    for variant in Variant::ALL {
        let differing = (2..=1u64 << 10)
            .into_par_iter()
            .filter(|&n| stabilized(variant, n, Mode::Synchronous) != stabilized(variant, n, Mode::Frontier))
            .count();
        pass &= differing == 0;
        detail.push(format!("{variant} differing {differing}"));
    }
    outcome(pass, detail.join(", "))
}

fn parallel_modes() -> Outcome {
    let run = RunConfig::new(Variant::Ca3);
    let inputs: Vec<BigUint> = (2..=1001u64).map(big).collect();
    let stacked: Vec<_> = engine::run_batch_stacked(&inputs, &run).into_iter().map(Result::unwrap).collect();
    let sequential: Vec<_> = inputs.iter().map(|n| engine::run_single(n, &run).unwrap()).collect();
    let stacked_ok = stacked == sequential;

    let trio: Vec<BigUint> = [183u64, 120_767, 53_132_499].map(big).to_vec();
    let shared = engine::run_batch(&BatchConfig::new(trio.clone(), BatchMode::Shared), &run);
    let reference = engine::run_batch(&BatchConfig::new(trio, BatchMode::Stacked), &run).unwrap();
    let shared_ok = match &shared {
        Ok(records) => {
            records.len() == reference.len()
                && records.iter().zip(&reference).all(|(a, b)| a.iterates == b.iterates && a.reached_one)
        }
        Err(_) => false,
    };

    let pair = BatchConfig::new(vec![big(27), big(31)], BatchMode::Shared).with_spacings(vec![0]);
    let collision = matches!(engine::run_batch(&pair, &run), Err(EngineError::Collision(_)));
    outcome(
        stacked_ok && shared_ok && collision,
        format!("stacked == sequential {stacked_ok}, shared == stacked {shared_ok}, zero spacing collides {collision}"),
    )
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 8] = [
        ("golden sequences", golden_sequences),
        ("base-4 oracle equivalence", ca2_oracle_equivalence),
        ("range verification [2, 2^12]", range_verification),
        ("efficiency averages [2, 2^14]", efficiency_averages),
        ("rule-table cardinalities", rule_cardinalities),
        ("carry and borrow soundness", carry_soundness),
        ("execution-mode equivalence [2, 2^10]", mode_equivalence),
        ("parallel batch modes", parallel_modes),
    ];
    let mut failed = 0;
    for (k, (name, check)) in criteria.iter().enumerate() {
        let o = check();
        failed += usize::from(!o.pass);
        println!("criterion {} {name}: {} ({})", k + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
    }
    println!("acceptance: {} passed, {failed} failed", criteria.len() - failed);
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
