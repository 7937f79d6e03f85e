//! Complete runs: single inputs, oracle verification, stacked batches and the
//! shared-grid mode where several inputs evolve side by side on one grid.

use num_bigint::BigUint;
use num_traits::{One, Zero};
use rayon::prelude::*;
use thiserror::Error;

use crate::digits::{self, DEFAULT_CAP};
use crate::grid::{Grid, GridError, Mode, Row};
use crate::Variant;

pub const DEFAULT_MAX_ROWS: usize = 100_000;
pub const DEFAULT_TICK_CAP: u64 = 10_000_000;
pub const DEFAULT_GUARD_GAP: u64 = 2;
/// Spacing doublings attempted by [`run_shared_auto`] after a collision.
pub const AUTO_RETRIES: usize = 3;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EngineError {
    #[error("inputs must be positive")]
    NotPositive,
    #[error("row and tick caps must be positive")]
    ZeroCap,
    #[error("expected {expected} spacings for {inputs} inputs, got {got}")]
    Spacings { inputs: usize, expected: usize, got: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Collision(#[from] CollisionError),
}

/// Two trajectories came within the guard gap of each other on a shared grid.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("inputs {left_input} and {right_input} collide at row {row}, columns {}..={}", columns.0, columns.1)]
pub struct CollisionError {
    pub row: usize,
    pub left_input: BigUint,
    pub right_input: BigUint,
    /// Columns between (or shared by) the two trajectories.
    pub columns: (i64, i64),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RunConfig {
    pub variant: Variant,
    pub max_rows: usize,
    pub tick_cap: u64,
    pub mode: Mode,
}

impl RunConfig {
    pub fn new(variant: Variant) -> Self {
        RunConfig { variant, max_rows: DEFAULT_MAX_ROWS, tick_cap: DEFAULT_TICK_CAP, mode: Mode::Frontier }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.mode = mode;
        self
    }

    pub fn with_caps(mut self, max_rows: usize, tick_cap: u64) -> Self {
        self.max_rows = max_rows;
        self.tick_cap = tick_cap;
        self
    }

    fn validate(&self) -> Result<(), EngineError> {
        if self.max_rows == 0 || self.tick_cap == 0 {
            return Err(EngineError::ZeroCap);
        }
        Ok(())
    }
}

/// Result of one input's run.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryRecord {
    pub input: BigUint,
    pub variant: Variant,
    /// Row values, up to the first 1 plus the variant's tail rows.
    pub iterates: Vec<BigUint>,
    pub reached_one: bool,
    pub rows_computed: usize,
    /// Index of the first row equal to 1.
    pub ca_steps_to_one: Option<usize>,
    pub ticks_used: u64,
}

/// Collects stable rows of one trajectory and decides when it is finished.
struct Tracker {
    input: BigUint,
    iterates: Vec<BigUint>,
    first_one: Option<usize>,
    tail: usize,
}

impl Tracker {
    fn new(input: BigUint, variant: Variant) -> Self {
        Tracker { input, iterates: Vec::new(), first_one: None, tail: variant.tail_rows() }
    }

    fn push(&mut self, value: BigUint) {
        if self.done() {
            return;
        }
        if self.first_one.is_none() && value.is_one() {
            self.first_one = Some(self.iterates.len());
        }
        self.iterates.push(value);
    }

    fn done(&self) -> bool {
        self.first_one.is_some_and(|f| self.iterates.len() > f + self.tail)
    }

    fn finish(self, variant: Variant, ticks: u64) -> TrajectoryRecord {
        TrajectoryRecord {
            input: self.input,
            variant,
            rows_computed: self.iterates.len(),
            iterates: self.iterates,
            reached_one: self.first_one.is_some(),
            ca_steps_to_one: self.first_one,
            ticks_used: ticks,
        }
    }
}

/// Evolves one input until a row equals 1 (plus the tail rows) or a cap is hit.
pub fn run_single(n: &BigUint, cfg: &RunConfig) -> Result<TrajectoryRecord, EngineError> {
    cfg.validate()?;
    if n.is_zero() {
        return Err(EngineError::NotPositive);
    }
    let mut grid = Grid::new(cfg.variant, n, 0).with_mode(cfg.mode);
    grid.ensure_rows(cfg.max_rows - 1);
    let mut tracker = Tracker::new(n.clone(), cfg.variant);
    let mut read = 0;
    loop {
        while read < grid.rows_final() && !tracker.done() {
            let value = grid.extract_row(read)?.ok_or(GridError::NonContiguous { row: read })?;
            tracker.push(value);
            read += 1;
        }
        if tracker.done() || read >= cfg.max_rows || grid.ticks() >= cfg.tick_cap {
            break;
        }
        grid.step();
    }
    Ok(tracker.finish(cfg.variant, grid.ticks()))
}

/// Where a verification run first disagreed with the arithmetic trajectory.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Divergence {
    pub row: usize,
    pub expected: Option<BigUint>,
    pub found: Option<BigUint>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MatchReport {
    pub input: BigUint,
    pub variant: Variant,
    pub rows_compared: usize,
    pub matched: bool,
    pub first_divergence: Option<Divergence>,
}

/// Arithmetic trajectory the automaton should reproduce: the compressed map
/// from the row-0 value up to 1, then the variant's tail.
pub fn expected_rows(n: &BigUint, variant: Variant, cap: u64) -> Vec<BigUint> {
    let map = variant.map();
    let report = digits::oracle_trajectory(map, &variant.start(n), cap);
    let mut rows = report.iterates;
    if report.reached_one {
        for _ in 0..variant.tail_rows() {
            let next = map.apply(rows.last().expect("trajectory is non-empty"));
            rows.push(next);
        }
    }
    rows
}

/// Compares every row of a run against [`expected_rows`].
pub fn verify_against_oracle(n: &BigUint, cfg: &RunConfig) -> Result<MatchReport, EngineError> {
    let record = run_single(n, cfg)?;
    Ok(compare(&record, &expected_rows(n, cfg.variant, DEFAULT_CAP)))
}

fn compare(record: &TrajectoryRecord, expected: &[BigUint]) -> MatchReport {
    let len = record.iterates.len().max(expected.len());
    let first_divergence = (0..len).find_map(|row| {
        let (e, f) = (expected.get(row), record.iterates.get(row));
        (e != f).then(|| Divergence { row, expected: e.cloned(), found: f.cloned() })
    });
    MatchReport {
        input: record.input.clone(),
        variant: record.variant,
        rows_compared: len,
        matched: first_divergence.is_none() && record.reached_one,
        first_divergence,
    }
}

/// One independent grid per input, evolved on the worker pool. Output order
/// follows input order.
pub fn run_batch_stacked(inputs: &[BigUint], run: &RunConfig) -> Vec<Result<TrajectoryRecord, EngineError>> {
    inputs.par_iter().map(|n| run_single(n, run)).collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum BatchMode {
    #[default]
    Stacked,
    Shared,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BatchConfig {
    pub inputs: Vec<BigUint>,
    pub mode: BatchMode,
    /// Empty columns between consecutive inputs on a shared grid; `None`
    /// chooses them automatically.
    pub spacings: Option<Vec<u64>>,
    pub guard_gap: u64,
}

impl BatchConfig {
    pub fn new(inputs: Vec<BigUint>, mode: BatchMode) -> Self {
        BatchConfig { inputs, mode, spacings: None, guard_gap: DEFAULT_GUARD_GAP }
    }

    pub fn with_spacings(mut self, spacings: Vec<u64>) -> Self {
        self.spacings = Some(spacings);
        self
    }
}

/// Runs a batch in its configured mode. Shared mode without explicit spacings
/// uses [`run_shared_auto`].
pub fn run_batch(cfg: &BatchConfig, run: &RunConfig) -> Result<Vec<TrajectoryRecord>, EngineError> {
    match (cfg.mode, &cfg.spacings) {
        (BatchMode::Stacked, _) => run_batch_stacked(&cfg.inputs, run).into_iter().collect(),
        (BatchMode::Shared, Some(_)) => run_shared_grid(cfg, run),
        (BatchMode::Shared, None) => run_shared_auto(cfg, run),
    }
}

/// Column of each input's least significant stored digit. Input 0 sits at
/// column 0 and each later input starts `spacing` empty columns to the left of
/// the previous one.
pub fn origins(inputs: &[BigUint], variant: Variant, spacings: &[u64]) -> Vec<i64> {
    let mut out = Vec::with_capacity(inputs.len());
    let mut next = 0i64;
    for (k, n) in inputs.iter().enumerate() {
        if k > 0 {
            next += spacings[k - 1] as i64;
        }
        out.push(next);
        next += crate::grid::initial_digits(variant, n).len() as i64;
    }
    out
}

/// Evolves all inputs on one grid with the configured spacings.
///
/// After each stable row the digit runs are matched to inputs in order; the
/// run aborts when the count of runs changes or two neighbouring runs, in the
/// same row or in consecutive rows, come closer than the guard gap.
pub fn run_shared_grid(cfg: &BatchConfig, run: &RunConfig) -> Result<Vec<TrajectoryRecord>, EngineError> {
    run.validate()?;
    let inputs = &cfg.inputs;
    if inputs.iter().any(Zero::is_zero) {
        return Err(EngineError::NotPositive);
    }
    if inputs.is_empty() {
        return Ok(Vec::new());
    }
    let spacings = cfg.spacings.clone().unwrap_or_else(|| vec![0; inputs.len() - 1]);
    if spacings.len() != inputs.len() - 1 {
        return Err(EngineError::Spacings { inputs: inputs.len(), expected: inputs.len() - 1, got: spacings.len() });
    }
    let origins = origins(inputs, run.variant, &spacings);
    let placed: Vec<(BigUint, i64)> = inputs.iter().cloned().zip(origins).collect();
    let mut grid = Grid::with_inputs(run.variant, &placed).with_mode(run.mode);
    grid.ensure_rows(run.max_rows - 1);
    let mut trackers: Vec<Tracker> = inputs.iter().map(|n| Tracker::new(n.clone(), run.variant)).collect();
    let mut previous: Option<Vec<(i64, i64)>> = None;
    let mut read = 0;
    loop {
        while read < grid.rows_final() && !trackers.iter().all(Tracker::done) {
            let row = grid.row(read).expect("final rows exist");
            let segments = row.segments();
            check_row(read, &segments, previous.as_deref(), inputs, cfg.guard_gap)?;
            for (tracker, &(lo, hi)) in trackers.iter_mut().zip(&segments) {
                tracker.push(segment_value(row, run.variant, lo, hi));
            }
            previous = Some(segments);
            read += 1;
        }
        if trackers.iter().all(Tracker::done) || read >= run.max_rows || grid.ticks() >= run.tick_cap {
            break;
        }
        grid.step();
    }
    let ticks = grid.ticks();
    Ok(trackers.into_iter().map(|t| t.finish(run.variant, ticks)).collect())
}

fn segment_value(row: &Row, variant: Variant, lo: i64, hi: i64) -> BigUint {
    BigUint::from_radix_le(&row.digits_between(lo, hi), variant.base().radix()).expect("cells hold in-range digits")
}

fn check_row(
    row: usize,
    segments: &[(i64, i64)],
    previous: Option<&[(i64, i64)]>,
    inputs: &[BigUint],
    guard: u64,
) -> Result<(), CollisionError> {
    let collision = |k: usize, columns: (i64, i64)| CollisionError {
        row,
        left_input: inputs[(k + 1).min(inputs.len() - 1)].clone(),
        right_input: inputs[k].clone(),
        columns,
    };
    if segments.len() != inputs.len() {
        // Runs merged or split: blame the first pair whose gap vanished.
        let k = segments.len().min(inputs.len()).saturating_sub(1).min(inputs.len().saturating_sub(2));
        let cols = segments.get(k).copied().unwrap_or((0, 0));
        return Err(collision(k, cols));
    }
    let too_close = |right: (i64, i64), left: (i64, i64)| left.0 - right.1 - 1 < guard as i64;
    for k in 0..segments.len().saturating_sub(1) {
        let (right, left) = (segments[k], segments[k + 1]);
        if too_close(right, left) {
            return Err(collision(k, (right.1, left.0)));
        }
        if let Some(prev) = previous {
            if too_close(prev[k], left) {
                return Err(collision(k, (prev[k].1, left.0)));
            }
            if too_close(right, prev[k + 1]) {
                return Err(collision(k, (right.1, prev[k + 1].0)));
            }
        }
    }
    Ok(())
}

/// Initial spacing for automatic placement: an estimate of the rows the
/// longest trajectory needs (each row can close the gap between neighbours by
/// about one column) plus a guard gap on each side.
pub fn auto_spacing(inputs: &[BigUint], variant: Variant, guard: u64) -> u64 {
    let rows = inputs
        .iter()
        .map(|n| {
            digits::steps_to_one(variant.map(), &variant.start(n), DEFAULT_CAP).unwrap_or(4 * n.bits() + 16)
                + variant.tail_rows() as u64
        })
        .max()
        .unwrap_or(0);
    rows + 2 * guard
}

/// Shared-grid run with automatic spacing, doubling the spacing after each
/// collision up to [`AUTO_RETRIES`] times.
pub fn run_shared_auto(cfg: &BatchConfig, run: &RunConfig) -> Result<Vec<TrajectoryRecord>, EngineError> {
    let mut spacing = auto_spacing(&cfg.inputs, run.variant, cfg.guard_gap);
    let gaps = cfg.inputs.len().saturating_sub(1);
    let mut attempt = 0;
    loop {
        let trial = BatchConfig { spacings: Some(vec![spacing; gaps]), ..cfg.clone() };
        match run_shared_grid(&trial, run) {
            Err(EngineError::Collision(_)) if attempt < AUTO_RETRIES => {
                attempt += 1;
                spacing *= 2;
            }
            other => return other,
        }
    }
}

/// Outcome of following a trajectory with cycle detection.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum TrajectoryClass {
    Convergent,
    /// A cycle avoiding 1 was found; `witness` is its smallest member.
    Cycle {
        witness: BigUint,
    },
    Undetermined,
}

/// Follows the compressed map from the row-0 value with tortoise and hare,
/// for at most `cap` hare steps.
pub fn classify_trajectory(n: &BigUint, variant: Variant, cap: u64) -> TrajectoryClass {
    let map = variant.map();
    let start = variant.start(n);
    if start.is_one() {
        return TrajectoryClass::Convergent;
    }
    let mut tortoise = start.clone();
    let mut hare = start;
    let mut steps = 0;
    while steps < cap {
        for _ in 0..2 {
            hare = map.apply(&hare);
            steps += 1;
            if hare.is_one() {
                return TrajectoryClass::Convergent;
            }
        }
        tortoise = map.apply(&tortoise);
        if tortoise == hare {
            let mut witness = tortoise.clone();
            let mut x = map.apply(&tortoise);
            while x != tortoise {
                witness = witness.min(x.clone());
                x = map.apply(&x);
            }
            return TrajectoryClass::Cycle { witness };
        }
    }
    TrajectoryClass::Undetermined
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn values(r: &TrajectoryRecord) -> Vec<u64> {
        r.iterates.iter().map(|v| u64::try_from(v).unwrap()).collect()
    }

    #[test]
    fn golden_runs() {
        let r = run_single(&big(7), &RunConfig::new(Variant::Ca2)).unwrap();
        assert_eq!(&values(&r)[..5], &[7, 22, 11, 34, 17]);
        let r = run_single(&big(1), &RunConfig::new(Variant::Ca3)).unwrap();
        assert_eq!(r.ca_steps_to_one, Some(0));
        assert!(r.reached_one);
        let r = run_single(&big(7), &RunConfig::new(Variant::Ca1)).unwrap();
        assert_eq!(values(&r), vec![7, 11, 17, 26, 13, 20, 10, 5, 8, 4, 2, 1, 2, 1, 2, 1]);
        assert_eq!(r.ca_steps_to_one, Some(11));
    }

    #[test]
    fn caps_leave_record_undetermined() {
        let cfg = RunConfig::new(Variant::Ca3).with_caps(3, 1_000);
        let r = run_single(&big(27), &cfg).unwrap();
        assert!(!r.reached_one);
        assert_eq!(r.iterates.len(), 3);
        let cfg = RunConfig::new(Variant::Ca3).with_caps(1_000, 2);
        assert!(!run_single(&big(27), &cfg).unwrap().reached_one);
    }

    #[test]
    fn verify_small_range() {
        for variant in Variant::ALL {
            for n in 1..200u64 {
                let report = verify_against_oracle(&big(n), &RunConfig::new(variant)).unwrap();
                assert!(report.matched, "{variant} {n}: {report:?}");
            }
        }
    }

    #[test]
    fn shared_single_input_equals_run_single() {
        let run = RunConfig::new(Variant::Ca3);
        let cfg = BatchConfig::new(vec![big(27)], BatchMode::Shared);
        let shared = run_shared_grid(&cfg, &run).unwrap();
        assert_eq!(shared, vec![run_single(&big(27), &run).unwrap()]);
    }

    #[test]
    fn zero_spacing_collides() {
        let run = RunConfig::new(Variant::Ca3);
        let cfg = BatchConfig::new(vec![big(7), big(9)], BatchMode::Shared).with_spacings(vec![0]);
        let err = run_shared_grid(&cfg, &run).unwrap_err();
        assert!(matches!(err, EngineError::Collision(CollisionError { row: 0, .. })), "{err:?}");
    }

    #[test]
    fn spacing_count_is_checked() {
        let run = RunConfig::new(Variant::Ca3);
        let cfg = BatchConfig::new(vec![big(7), big(9)], BatchMode::Shared).with_spacings(vec![]);
        assert!(matches!(run_shared_grid(&cfg, &run), Err(EngineError::Spacings { .. })));
    }

    #[test]
    fn classification() {
        assert_eq!(classify_trajectory(&big(7), Variant::Ca1, 1_000), TrajectoryClass::Convergent);
        assert_eq!(classify_trajectory(&big(1), Variant::Ca3, 1_000), TrajectoryClass::Convergent);
        assert_eq!(classify_trajectory(&big(27), Variant::Ca3, 5), TrajectoryClass::Undetermined);
    }
}
