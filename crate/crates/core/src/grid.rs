//! Grid state and evolution.
//!
//! Each row owns a dense window of columns `lo..=hi`; every cell outside a
//! row's window is the layer default. Rows are materialized lazily, a few at a
//! time ahead of the last finished row, with windows sized from that row's
//! content and the per-row growth bound of the automaton.
//!
//! Two schedulers are provided. [`Mode::Synchronous`] recomputes every cell of
//! every unfinished row from the previous tick's states. [`Mode::Frontier`]
//! evaluates a cell once, as soon as every cell it reads is final.

use std::fmt;
use std::mem;
use std::str::FromStr;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::digits::{to_digits, DigitString};
use crate::rules::{Cell, Neighborhood, Parity, RuleKind, State, TopState};
use crate::Variant;

/// Rows materialized beyond the last finished row.
pub const LOOKAHEAD: usize = 8;

const FINAL_BOTTOM: u8 = 1;
const FINAL_TOP: u8 = 2;
const QUEUED_BOTTOM: u8 = 4;
const QUEUED_TOP: u8 = 8;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GridError {
    #[error("row {row} did not stabilize within {ticks} ticks")]
    TickCap { row: usize, ticks: u64 },
    #[error("row {row} is not stable yet")]
    Unstable { row: usize },
    #[error("row {row} holds non-contiguous digits")]
    NonContiguous { row: usize },
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    #[default]
    Frontier,
    Synchronous,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.pad(match self {
            Mode::Frontier => "frontier",
            Mode::Synchronous => "synchronous",
        })
    }
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "frontier" => Ok(Mode::Frontier),
            "synchronous" | "sync" => Ok(Mode::Synchronous),
            other => Err(format!("unknown mode `{other}`, expected frontier or synchronous")),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Layer {
    Bottom,
    Top,
}

/// One grid row: a dense window of cells starting at column `lo`.
///
/// `top` is empty for the single-layer automata.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Row {
    lo: i64,
    bottom: Vec<Cell>,
    top: Vec<TopState>,
}

impl Row {
    fn blank(variant: Variant, lo: i64, hi: i64) -> Self {
        let len = (hi - lo + 1).max(0) as usize;
        let top = if variant == Variant::Ca1 { vec![TopState::UnknownParity; len] } else { Vec::new() };
        Row { lo, bottom: vec![Cell::Empty; len], top }
    }

    /// Row holding the digits of `ds` at their offsets, with a one-column margin.
    ///
    /// Base-4 digits are tagged with the parity of the value. With `tops`, the
    /// parity layer holds the finished partial-sum sweep.
    pub fn from_digits(variant: Variant, ds: &DigitString, tops: bool) -> Self {
        let mut row = Row::blank(variant, ds.offset() - 1, ds.top_column() + 1);
        let parity = Parity::of(ds.digits().first().copied().unwrap_or(0));
        for (k, &d) in ds.digits().iter().enumerate() {
            row.bottom[k + 1] = match variant {
                Variant::Ca2 => Cell::Tagged(d, parity),
                _ => Cell::Digit(d),
            };
        }
        if tops && variant == Variant::Ca1 {
            row.top = parity_sweep(&row.bottom);
        }
        row
    }

    pub fn lo(&self) -> i64 {
        self.lo
    }

    pub fn hi(&self) -> i64 {
        self.lo + self.bottom.len() as i64 - 1
    }

    pub fn len(&self) -> usize {
        self.bottom.len()
    }

    pub fn is_empty(&self) -> bool {
        self.bottom.is_empty()
    }

    fn index(&self, j: i64) -> Option<usize> {
        let idx = j - self.lo;
        (idx >= 0 && (idx as usize) < self.bottom.len()).then_some(idx as usize)
    }

    pub fn bottom(&self, j: i64) -> Cell {
        self.index(j).map_or(Cell::Empty, |k| self.bottom[k])
    }

    pub fn top(&self, j: i64) -> TopState {
        self.index(j).and_then(|k| self.top.get(k).copied()).unwrap_or_default()
    }

    pub fn bottom_cells(&self) -> &[Cell] {
        &self.bottom
    }

    pub fn top_cells(&self) -> &[TopState] {
        &self.top
    }

    /// Column range of non-default cells in either layer.
    pub fn content(&self) -> Option<(i64, i64)> {
        let occupied =
            |k: usize| !self.bottom[k].is_empty() || self.top.get(k).is_some_and(|&t| t != TopState::UnknownParity);
        let first = (0..self.len()).find(|&k| occupied(k))?;
        let last = (0..self.len()).rev().find(|&k| occupied(k))?;
        Some((self.lo + first as i64, self.lo + last as i64))
    }

    /// Column range of non-empty bottom cells.
    pub fn digit_extent(&self) -> Option<(i64, i64)> {
        let first = self.bottom.iter().position(|c| !c.is_empty())?;
        let last = self.bottom.iter().rposition(|c| !c.is_empty())?;
        Some((self.lo + first as i64, self.lo + last as i64))
    }

    /// Maximal runs of non-empty bottom cells as `(lo, hi)` column pairs,
    /// rightmost run first.
    pub fn segments(&self) -> Vec<(i64, i64)> {
        let mut out = Vec::new();
        let mut start = None;
        for (k, c) in self.bottom.iter().enumerate() {
            match (c.is_empty(), start) {
                (false, None) => start = Some(k),
                (true, Some(s)) => {
                    out.push((self.lo + s as i64, self.lo + k as i64 - 1));
                    start = None;
                }
                _ => {}
            }
        }
        if let Some(s) = start {
            out.push((self.lo + s as i64, self.hi()));
        }
        out
    }

    /// Digits of the bottom cells in `lo..=hi`, least significant first.
    pub fn digits_between(&self, lo: i64, hi: i64) -> Vec<u8> {
        (lo..=hi).map(|j| self.bottom(j).digit().unwrap_or(0)).collect()
    }
}

/// Finished parity layer for a row of base-3 digits stored right to left.
fn parity_sweep(bottom: &[Cell]) -> Vec<TopState> {
    let mut top = vec![TopState::UnknownParity; bottom.len()];
    let mut acc: Option<u8> = None;
    for k in (0..bottom.len()).rev() {
        match bottom[k].digit() {
            Some(d) => {
                let p = (acc.unwrap_or(0) + d) % 2;
                acc = Some(p);
                top[k] = if p == 1 { TopState::OddNormal } else { TopState::Even };
            }
            None => {
                if acc == Some(1) && bottom.get(k + 1).is_some_and(|c| !c.is_empty()) {
                    top[k] = TopState::OddSpecial;
                }
                acc = None;
            }
        }
    }
    top
}

/// Relative position and layer of the cells a cell reads.
fn dependencies(kind: RuleKind) -> &'static [(i64, i64, Layer)] {
    use Layer::{Bottom as B, Top as T};
    match kind {
        RuleKind::Ca3 => &[(-1, 0, B), (-1, -1, B), (-1, -2, B), (0, -1, B)],
        RuleKind::Ca2 => &[(-1, 0, B), (-1, -1, B), (0, -1, B)],
        RuleKind::Ca1Bottom => &[(-1, 0, B), (-1, 0, T), (-1, -1, B), (-1, -1, T), (0, -1, B)],
        RuleKind::Ca1Top => &[(0, 0, B), (0, 1, T)],
    }
}

/// Neighbourhood of the cell at column `j` of `cur`, whose predecessor row is `prev`.
pub fn neighborhood(kind: RuleKind, prev: Option<&Row>, cur: &Row, j: i64) -> Neighborhood {
    let above = |dj: i64| prev.map_or(Cell::Empty, |p| p.bottom(j + dj));
    let above_top = |dj: i64| prev.map_or(TopState::UnknownParity, |p| p.top(j + dj));
    match kind {
        RuleKind::Ca3 => Neighborhood::Ca3 {
            above: above(0),
            above_right: above(-1),
            above_right2: above(-2),
            right: cur.bottom(j - 1),
        },
        RuleKind::Ca2 => Neighborhood::Ca2 { above: above(0), above_right: above(-1), right: cur.bottom(j - 1) },
        RuleKind::Ca1Bottom => Neighborhood::Ca1Bottom {
            above: above(0),
            above_top: above_top(0),
            above_right: above(-1),
            above_right_top: above_top(-1),
            right: cur.bottom(j - 1),
        },
        RuleKind::Ca1Top => Neighborhood::Ca1Top { below: cur.bottom(j), left: cur.top(j + 1) },
    }
}

fn bottom_kind(variant: Variant) -> RuleKind {
    match variant {
        Variant::Ca1 => RuleKind::Ca1Bottom,
        Variant::Ca2 => RuleKind::Ca2,
        Variant::Ca3 => RuleKind::Ca3,
    }
}

fn bottom_state(kind: RuleKind, prev: Option<&Row>, cur: &Row, j: i64) -> Cell {
    match neighborhood(kind, prev, cur, j).transition() {
        State::Cell(c) => c,
        State::Top(_) => Cell::Empty,
    }
}

fn top_state(cur: &Row, j: i64) -> TopState {
    match neighborhood(RuleKind::Ca1Top, None, cur, j).transition() {
        State::Top(t) => t,
        State::Cell(_) => TopState::UnknownParity,
    }
}

/// Counters returned by one tick.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct StepStats {
    pub tick: u64,
    /// Synchronous mode: cells whose state changed. Frontier mode: cells
    /// finalized during the tick.
    pub cells_changed: usize,
    /// Number of leading rows known to be final.
    pub rows_stable: usize,
}

#[derive(Clone, Debug, Default)]
struct Frontier {
    flags: Vec<Vec<u8>>,
    pending: Vec<usize>,
    queue: Vec<(usize, i64, Layer)>,
    complete: usize,
}

/// Evolving state of one automaton, possibly holding several inputs in row 0.
#[derive(Clone, Debug)]
pub struct Grid {
    variant: Variant,
    mode: Mode,
    rows: Vec<Row>,
    target_rows: usize,
    tick: u64,
    evaluations: u64,
    rows_stable: usize,
    frontier: Frontier,
}

impl Grid {
    /// Grid with `n` in row 0, its least significant stored digit at `origin`.
    pub fn new(variant: Variant, n: &BigUint, origin: i64) -> Self {
        Self::with_inputs(variant, &[(n.clone(), origin)])
    }

    /// Grid with several inputs in row 0, each placed at its own origin column.
    pub fn with_inputs(variant: Variant, inputs: &[(BigUint, i64)]) -> Self {
        let placed: Vec<DigitString> = inputs
            .iter()
            .filter(|(n, _)| !n.is_zero())
            .map(|(n, origin)| initial_digits(variant, n).with_offset(*origin))
            .collect();
        let mut grid = Grid::empty(variant);
        if placed.is_empty() {
            return grid;
        }
        let lo = placed.iter().map(|d| d.offset()).min().unwrap() - 2;
        let hi = placed.iter().map(|d| d.top_column()).max().unwrap() + 2;
        let mut row = Row::blank(variant, lo, hi);
        for ds in &placed {
            let parity = Parity::of(ds.digits()[0]);
            for (k, &d) in ds.digits().iter().enumerate() {
                let idx = (ds.offset() - lo) as usize + k;
                row.bottom[idx] = match variant {
                    Variant::Ca2 => Cell::Tagged(d, parity),
                    _ => Cell::Digit(d),
                };
            }
        }
        grid.rows.push(row);
        grid.rows_stable = usize::from(variant != Variant::Ca1);
        grid.target_rows = 1;
        grid.reset_frontier();
        grid
    }

    /// Grid with no rows at all.
    pub fn empty(variant: Variant) -> Self {
        Grid {
            variant,
            mode: Mode::Frontier,
            rows: Vec::new(),
            target_rows: 0,
            tick: 0,
            evaluations: 0,
            rows_stable: 0,
            frontier: Frontier::default(),
        }
    }

    pub fn variant(&self) -> Variant {
        self.variant
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    /// Switches scheduler. Rows already final stay final; every other cell is
    /// re-evaluated by the new scheduler.
    pub fn set_mode(&mut self, mode: Mode) {
        if mode != self.mode {
            self.rows_stable = self.rows_final();
            self.mode = mode;
            self.reset_frontier();
        }
    }

    pub fn with_mode(mut self, mode: Mode) -> Self {
        self.set_mode(mode);
        self
    }

    pub fn ticks(&self) -> u64 {
        self.tick
    }

    /// Total cell evaluations performed so far.
    pub fn evaluations(&self) -> u64 {
        self.evaluations
    }

    pub fn rows(&self) -> &[Row] {
        &self.rows
    }

    pub fn row(&self, k: usize) -> Option<&Row> {
        self.rows.get(k)
    }

    /// Number of leading rows whose cells are final.
    pub fn rows_final(&self) -> usize {
        match self.mode {
            Mode::Synchronous => self.rows_stable,
            Mode::Frontier => self.frontier.complete,
        }
    }

    /// Requests that rows `0..=m` be materialized as evolution proceeds.
    pub fn ensure_rows(&mut self, m: usize) {
        if !self.rows.is_empty() {
            self.target_rows = self.target_rows.max(m + 1);
        }
    }

    /// Window for row `rows.len()`, grown from the content of the last final row.
    fn next_window(&self) -> (i64, i64) {
        let base = self.rows_final().saturating_sub(1).min(self.rows.len() - 1);
        let source = &self.rows[base];
        let (clo, chi) = source.digit_extent().unwrap_or((source.lo(), source.hi()));
        let s = (self.rows.len() - base) as i64;
        match self.variant {
            Variant::Ca3 => (clo - 2, chi + 2 * s + 2),
            Variant::Ca2 => (clo - 2, chi + s + 2),
            Variant::Ca1 => (clo - s - 2, chi + 2),
        }
    }

    fn materialize(&mut self) {
        while self.rows.len() < self.target_rows && self.rows.len() < self.rows_final() + 1 + LOOKAHEAD {
            let (lo, hi) = self.next_window();
            let row = Row::blank(self.variant, lo, hi);
            let i = self.rows.len();
            let len = row.len();
            self.rows.push(row);
            if self.mode == Mode::Frontier {
                self.frontier.flags.push(vec![0; len]);
                self.frontier.pending.push(len * self.layers());
                for j in lo..=hi {
                    self.enqueue(i, j, Layer::Bottom);
                    if self.variant == Variant::Ca1 {
                        self.enqueue(i, j, Layer::Top);
                    }
                }
            }
        }
    }

    fn layers(&self) -> usize {
        if self.variant == Variant::Ca1 {
            2
        } else {
            1
        }
    }

    /// Advances one tick with the current scheduler.
    pub fn step(&mut self) -> StepStats {
        match self.mode {
            Mode::Synchronous => self.step_synchronous(),
            Mode::Frontier => self.step_frontier(),
        }
    }

    /// One synchronous tick: every cell of every unfinished row is recomputed
    /// from the states before the tick.
    pub fn step_synchronous(&mut self) -> StepStats {
        self.set_mode(Mode::Synchronous);
        self.materialize();
        self.tick += 1;
        let kind = bottom_kind(self.variant);
        let first = if self.variant == Variant::Ca1 { self.rows_stable } else { self.rows_stable.max(1) };
        let mut changed = 0;
        let mut first_changed = None;
        let mut updated = Vec::with_capacity(self.rows.len().saturating_sub(first));
        for i in first..self.rows.len() {
            let cur = &self.rows[i];
            let prev = i.checked_sub(1).map(|p| &self.rows[p]);
            let mut next = cur.clone();
            let mut row_changed = 0;
            for (k, j) in (cur.lo()..=cur.hi()).enumerate() {
                if i > 0 {
                    next.bottom[k] = bottom_state(kind, prev, cur, j);
                    row_changed += usize::from(next.bottom[k] != cur.bottom[k]);
                }
                if self.variant == Variant::Ca1 {
                    next.top[k] = top_state(cur, j);
                    row_changed += usize::from(next.top[k] != cur.top[k]);
                }
            }
            self.evaluations += (cur.len() * self.layers()) as u64;
            if row_changed > 0 && first_changed.is_none() {
                first_changed = Some(i);
            }
            changed += row_changed;
            updated.push(next);
        }
        for (k, row) in updated.into_iter().enumerate() {
            self.rows[first + k] = row;
        }
        let stable = first_changed.unwrap_or(self.rows.len());
        debug_assert!(
            (self.rows_stable.max(1)..stable).all(|i| self.margins_clear(i)),
            "row content reached the window edge"
        );
        self.rows_stable = stable;
        StepStats { tick: self.tick, cells_changed: changed, rows_stable: self.rows_stable }
    }

    /// One frontier tick: cells whose inputs were all final before the tick
    /// are evaluated once and become final.
    pub fn step_frontier(&mut self) -> StepStats {
        self.set_mode(Mode::Frontier);
        self.materialize();
        self.tick += 1;
        let queue = mem::take(&mut self.frontier.queue);
        let mut ready = Vec::new();
        for (i, j, layer) in queue {
            let k = (j - self.rows[i].lo()) as usize;
            let (fin, queued) = flag_bits(layer);
            let flags = &mut self.frontier.flags[i][k];
            *flags &= !queued;
            if *flags & fin != 0 {
                continue;
            }
            if self.inputs_final(i, j, layer) {
                ready.push((i, j, layer));
            }
        }
        let kind = bottom_kind(self.variant);
        let mut values = Vec::with_capacity(ready.len());
        for &(i, j, layer) in &ready {
            let cur = &self.rows[i];
            let prev = i.checked_sub(1).map(|p| &self.rows[p]);
            values.push(match layer {
                Layer::Bottom => State::Cell(bottom_state(kind, prev, cur, j)),
                Layer::Top => State::Top(top_state(cur, j)),
            });
        }
        self.evaluations += ready.len() as u64;
        for (&(i, j, layer), value) in ready.iter().zip(values) {
            let k = (j - self.rows[i].lo()) as usize;
            match value {
                State::Cell(c) => self.rows[i].bottom[k] = c,
                State::Top(t) => self.rows[i].top[k] = t,
            }
            self.mark_final(i, k, layer);
            self.enqueue_dependents(i, j, layer);
        }
        self.advance_complete();
        StepStats { tick: self.tick, cells_changed: ready.len(), rows_stable: self.frontier.complete }
    }

    fn mark_final(&mut self, i: usize, k: usize, layer: Layer) {
        let (fin, _) = flag_bits(layer);
        let flags = &mut self.frontier.flags[i][k];
        if *flags & fin == 0 {
            *flags |= fin;
            self.frontier.pending[i] -= 1;
        }
    }

    fn advance_complete(&mut self) {
        while self.frontier.complete < self.rows.len() && self.frontier.pending[self.frontier.complete] == 0 {
            debug_assert!(self.margins_clear(self.frontier.complete), "row content reached the window edge");
            self.frontier.complete += 1;
        }
    }

    fn is_final(&self, i: usize, j: i64, layer: Layer) -> bool {
        let row = &self.rows[i];
        match row.index(j) {
            None => true,
            Some(k) => self.frontier.flags[i][k] & flag_bits(layer).0 != 0,
        }
    }

    fn inputs_final(&self, i: usize, j: i64, layer: Layer) -> bool {
        let kind = match layer {
            Layer::Bottom => bottom_kind(self.variant),
            Layer::Top => RuleKind::Ca1Top,
        };
        dependencies(kind).iter().all(|&(di, dj, dl)| self.is_final((i as i64 + di) as usize, j + dj, dl))
    }

    fn enqueue(&mut self, i: usize, j: i64, layer: Layer) {
        let Some(k) = self.rows.get(i).and_then(|r| r.index(j)) else { return };
        let (fin, queued) = flag_bits(layer);
        let flags = &mut self.frontier.flags[i][k];
        if *flags & (fin | queued) == 0 {
            *flags |= queued;
            self.frontier.queue.push((i, j, layer));
        }
    }

    fn enqueue_dependents(&mut self, i: usize, j: i64, layer: Layer) {
        let kinds: &[(RuleKind, Layer)] = match self.variant {
            Variant::Ca1 => &[(RuleKind::Ca1Bottom, Layer::Bottom), (RuleKind::Ca1Top, Layer::Top)],
            v => &[(bottom_kind(v), Layer::Bottom)],
        };
        for &(kind, target) in kinds {
            for &(di, dj, dl) in dependencies(kind) {
                if dl == layer {
                    let ti = i as i64 - di;
                    if ti >= 0 && !(ti == 0 && target == Layer::Bottom) {
                        self.enqueue(ti as usize, j - dj, target);
                    }
                }
            }
        }
    }

    /// Rebuilds frontier bookkeeping: rows before `rows_stable` are final,
    /// every other cell is queued.
    fn reset_frontier(&mut self) {
        let done = self.rows_stable.min(self.rows.len());
        let ca1 = self.variant == Variant::Ca1;
        let mut frontier = Frontier { complete: done, ..Frontier::default() };
        for (i, row) in self.rows.iter().enumerate() {
            let mut flags = vec![0u8; row.len()];
            let mut pending = 0;
            for f in flags.iter_mut() {
                if i < done || i == 0 {
                    *f |= FINAL_BOTTOM;
                } else {
                    pending += 1;
                }
                if ca1 {
                    if i < done {
                        *f |= FINAL_TOP;
                    } else {
                        pending += 1;
                    }
                }
            }
            frontier.flags.push(flags);
            frontier.pending.push(pending);
        }
        self.frontier = frontier;
        if self.mode == Mode::Frontier {
            for i in done..self.rows.len() {
                let (lo, hi) = (self.rows[i].lo(), self.rows[i].hi());
                for j in lo..=hi {
                    if i > 0 {
                        self.enqueue(i, j, Layer::Bottom);
                    }
                    if ca1 {
                        self.enqueue(i, j, Layer::Top);
                    }
                }
            }
            self.advance_complete();
        }
    }

    /// True when the outermost column on each side of row `i` is default.
    fn margins_clear(&self, i: usize) -> bool {
        let row = &self.rows[i];
        match row.content() {
            None => true,
            Some((lo, hi)) => lo > row.lo() && hi < row.hi(),
        }
    }

    /// Checks that every final row keeps a default column on each side of its
    /// content, so no content can have been cut off by its window.
    pub fn check_window_margins(&self) -> bool {
        (0..self.rows_final()).all(|i| i == 0 || self.margins_clear(i))
    }

    /// Steps until rows `0..=m` are final.
    pub fn run_until_rows_stable(&mut self, m: usize, tick_cap: u64) -> Result<(), GridError> {
        if self.rows.is_empty() {
            return Ok(());
        }
        self.ensure_rows(m);
        let start = self.tick;
        while self.rows_final() <= m {
            if self.tick - start >= tick_cap {
                return Err(GridError::TickCap { row: self.rows_final(), ticks: tick_cap });
            }
            self.step();
        }
        Ok(())
    }

    /// Digits of row `k` with the offset of its least significant digit.
    pub fn row_digits(&self, k: usize) -> Result<Option<DigitString>, GridError> {
        if k >= self.rows_final() {
            return Err(GridError::Unstable { row: k });
        }
        let row = &self.rows[k];
        match row.segments().as_slice() {
            [] => Ok(None),
            [(lo, hi)] => {
                let ds = DigitString::new(self.variant.base(), row.digits_between(*lo, *hi), *lo)
                    .expect("cells hold in-range digits");
                Ok(Some(ds))
            }
            _ => Err(GridError::NonContiguous { row: k }),
        }
    }

    /// Value of the digits in row `k`, or `None` for an all-empty row.
    pub fn extract_row(&self, k: usize) -> Result<Option<BigUint>, GridError> {
        Ok(self.row_digits(k)?.map(|ds| ds.value()))
    }

    /// Content bounding box `(lo, hi)` over rows `0..rows`.
    pub fn bounding_box(&self, rows: usize) -> Option<(i64, i64)> {
        self.rows.iter().take(rows).filter_map(Row::content).reduce(|a, b| (a.0.min(b.0), a.1.max(b.1)))
    }
}

fn flag_bits(layer: Layer) -> (u8, u8) {
    match layer {
        Layer::Bottom => (FINAL_BOTTOM, QUEUED_BOTTOM),
        Layer::Top => (FINAL_TOP, QUEUED_TOP),
    }
}

/// Digits stored in row 0 for input `n`, at offset 0.
pub fn initial_digits(variant: Variant, n: &BigUint) -> DigitString {
    to_digits(&variant.start(n), variant.base().radix()).expect("start value is positive")
}

/// Next row computed by arithmetic, placed where the automaton puts it.
///
/// Base 2: odd part of `3x+1`, shifted left by the number of zero bits removed.
/// Base 4: odd rows give `3x+1` with zero digits removed, shifted the same way;
/// even rows give `x/2` one column to the left. Base 3: `(3x+1)/2` one column
/// to the right of `x` for odd `x`, `x/2` in place otherwise, with leading
/// zeros kept so that the leftmost column never moves.
pub fn row_oracle(x: &DigitString, variant: Variant) -> DigitString {
    let value = x.value();
    let radix = variant.base().radix();
    let odd = value.is_odd();
    let place = |v: &BigUint, offset: i64| {
        to_digits(v, radix)
            .map(|d| d.with_offset(offset))
            .unwrap_or_else(|_| DigitString::new(variant.base(), vec![0], offset).expect("zero is a digit"))
    };
    match variant {
        Variant::Ca1 => {
            if odd {
                let y = (&value * 3u32 + 1u32) >> 1;
                place(&y, x.offset() - 1).padded(x.len() + 1)
            } else {
                place(&(&value >> 1), x.offset()).padded(x.len())
            }
        }
        Variant::Ca2 if !odd => place(&(&value >> 1), x.offset() + 1),
        Variant::Ca2 | Variant::Ca3 => place(&(&value * 3u32 + 1u32), x.offset()).strip_trailing_zeros().0,
    }
}

/// Rows `0..=last` as the automaton would hold them once stable, computed by
/// arithmetic only. `last` is the first row equal to 1 plus the variant's tail,
/// or `cap` if that comes first.
pub fn oracle_rows(variant: Variant, n: &BigUint, cap: usize) -> Vec<Row> {
    let mut ds = initial_digits(variant, n);
    let mut rows = vec![Row::from_digits(variant, &ds, true)];
    let mut remaining = None;
    while rows.len() <= cap {
        if remaining.is_none() && ds.value().is_one() {
            remaining = Some(variant.tail_rows());
        }
        if remaining == Some(0) {
            break;
        }
        remaining = remaining.map(|r| r - 1);
        ds = row_oracle(&ds, variant);
        rows.push(Row::from_digits(variant, &ds, true));
    }
    rows
}

#[cfg(test)]
mod tests {
    use super::*;

    fn big(n: u64) -> BigUint {
        BigUint::from(n)
    }

    fn stable_values(variant: Variant, n: u64, rows: usize, mode: Mode) -> Vec<u64> {
        let mut g = Grid::new(variant, &big(n), 0).with_mode(mode);
        g.run_until_rows_stable(rows - 1, 100_000).unwrap();
        (0..rows).map(|k| g.extract_row(k).unwrap().map(|v| u64::try_from(v).unwrap()).unwrap_or(0)).collect()
    }

    #[test]
    fn init_places_stripped_digits() {
        let g = Grid::new(Variant::Ca3, &big(7), 0);
        let row = g.row(0).unwrap();
        assert_eq!((0..3).map(|j| row.bottom(j)).collect::<Vec<_>>(), vec![Cell::Digit(1); 3]);
        assert_eq!(row.bottom(3), Cell::Empty);

        let g = Grid::new(Variant::Ca3, &big(40), 0);
        assert_eq!(g.row_digits(0).unwrap().unwrap().digits(), &[1, 0, 1]);

        let g = Grid::new(Variant::Ca1, &big(7), 0);
        let row = g.row(0).unwrap();
        assert_eq!(row.bottom(0), Cell::Digit(1));
        assert_eq!(row.bottom(1), Cell::Digit(2));
        assert!(row.top_cells().iter().all(|&t| t == TopState::UnknownParity));
    }

    #[test]
    fn golden_rows() {
        for mode in [Mode::Frontier, Mode::Synchronous] {
            assert_eq!(stable_values(Variant::Ca3, 7, 7, mode), vec![7, 11, 17, 13, 5, 1, 1]);
            assert_eq!(
                stable_values(Variant::Ca1, 7, 16, mode),
                vec![7, 11, 17, 26, 13, 20, 10, 5, 8, 4, 2, 1, 2, 1, 2, 1]
            );
            assert_eq!(stable_values(Variant::Ca2, 7, 9, mode), vec![7, 22, 11, 34, 17, 13, 10, 5, 1]);
            assert_eq!(stable_values(Variant::Ca3, 1, 4, mode), vec![1, 1, 1, 1]);
        }
    }

    #[test]
    fn empty_grid_is_a_fixpoint() {
        let mut g = Grid::empty(Variant::Ca3);
        assert_eq!(g.step().cells_changed, 0);
        assert_eq!(g.step_synchronous().cells_changed, 0);
    }

    #[test]
    fn first_synchronous_tick_starts_units_region() {
        let mut g = Grid::new(Variant::Ca3, &big(7), 0);
        g.ensure_rows(1);
        let stats = g.step_synchronous();
        assert!(stats.cells_changed > 0);
        // 3*7+1 = 10110b: the bit at column 1 is decided without a carry history.
        assert_eq!(g.row(1).unwrap().bottom(1), Cell::Digit(1));
    }

    #[test]
    fn placement_matches_oracle() {
        for variant in Variant::ALL {
            for n in 2..300u64 {
                let expected = oracle_rows(variant, &big(n), 500);
                let mut g = Grid::new(variant, &big(n), 0);
                g.run_until_rows_stable(expected.len() - 1, 1_000_000).unwrap();
                for (k, want) in expected.iter().enumerate() {
                    let got = g.row(k).unwrap();
                    for j in want.lo()..=want.hi() {
                        assert_eq!(got.bottom(j), want.bottom(j), "{variant} n={n} row={k} col={j}");
                        assert_eq!(got.top(j), want.top(j), "{variant} n={n} row={k} col={j}");
                    }
                    assert_eq!(got.content(), want.content(), "{variant} n={n} row={k}");
                }
                assert!(g.check_window_margins());
            }
        }
    }

    #[test]
    fn row_oracle_placements() {
        let x = to_digits(&big(7), 3).unwrap();
        let y = row_oracle(&x, Variant::Ca1);
        assert_eq!((y.value(), y.offset()), (big(11), -1));

        let x = to_digits(&big(5), 2).unwrap();
        let y = row_oracle(&x, Variant::Ca3);
        assert_eq!((y.value(), y.offset()), (big(1), 4));

        let x = to_digits(&big(22), 4).unwrap();
        let y = row_oracle(&x, Variant::Ca2);
        assert_eq!((y.value(), y.offset()), (big(11), 1));
    }

    #[test]
    fn frontier_needs_fewer_evaluations() {
        let mut f = Grid::new(Variant::Ca3, &big(27), 0);
        let mut s = Grid::new(Variant::Ca3, &big(27), 0).with_mode(Mode::Synchronous);
        f.run_until_rows_stable(42, 1_000_000).unwrap();
        s.run_until_rows_stable(42, 1_000_000).unwrap();
        for k in 0..=42 {
            assert_eq!(f.row_digits(k).unwrap(), s.row_digits(k).unwrap());
        }
        assert!(f.evaluations() < s.evaluations());
    }

    #[test]
    fn mode_switch_mid_run() {
        let mut g = Grid::new(Variant::Ca1, &big(27), 0).with_mode(Mode::Synchronous);
        g.ensure_rows(30);
        for _ in 0..25 {
            g.step();
        }
        g.set_mode(Mode::Frontier);
        g.run_until_rows_stable(30, 100_000).unwrap();
        let expected = oracle_rows(Variant::Ca1, &big(27), 30);
        for (k, row) in expected.iter().enumerate() {
            assert_eq!(g.row_digits(k).unwrap().map(|d| d.value()), Some(digit_value(row)));
        }
    }

    fn digit_value(row: &Row) -> BigUint {
        let (lo, hi) = row.digit_extent().unwrap();
        DigitString::new(Variant::Ca1.base(), row.digits_between(lo, hi), lo).unwrap().value()
    }

    #[test]
    fn unstable_rows_are_refused() {
        let g = Grid::new(Variant::Ca3, &big(7), 0);
        assert_eq!(g.extract_row(3), Err(GridError::Unstable { row: 3 }));
    }
}
