//! Text snapshots and PGM images of stable grid rows.
//!
//! Both formats cover the bounding box of non-default cells over the rendered
//! rows, leftmost (highest) column first.
//!
//! Snapshot: a header line `<variant> <rows> <cols> <origin>` where `origin`
//! is the column of the rightmost token, then one line of space-separated
//! tokens per row (`0`..`3`, `E`, base-4 digits with `:o`/`:e`). The base-3
//! automaton adds a `# top` line followed by its parity-layer rows (`ON`,
//! `OS`, `EV`, `UP`).
//!
//! PGM: plain `P2` with maxval 255. The base-3 automaton is drawn as its digit
//! layer, one separator row, then its parity layer. Gray levels are listed in
//! the image's comment lines.

use std::fmt::Write as _;

use crate::grid::{Grid, GridError, Row};
use crate::rules::{Cell, Parity, TopState};
use crate::Variant;

const SEPARATOR: u8 = 128;

fn cell_level(c: Cell) -> u8 {
    match c {
        Cell::Empty => 255,
        Cell::Digit(d) => 192 - 64 * d.min(2),
        Cell::Tagged(d, Parity::Even) => 200 - 40 * d,
        Cell::Tagged(d, Parity::Odd) => 180 - 40 * d,
    }
}

fn top_level(t: TopState) -> u8 {
    match t {
        TopState::UnknownParity => 255,
        TopState::Even => 200,
        TopState::OddNormal => 96,
        TopState::OddSpecial => 0,
    }
}

fn legend(variant: Variant) -> &'static str {
    match variant {
        Variant::Ca3 => "E=255 0=192 1=128",
        Variant::Ca2 => "E=255 0:e=200 1:e=160 2:e=120 3:e=80 0:o=180 1:o=140 2:o=100 3:o=60",
        Variant::Ca1 => "E=255 0=192 1=128 2=64 separator=128 UP=255 EV=200 ON=96 OS=0",
    }
}

/// Columns `hi..=lo` (leftmost first) covering the content of the first `rows` rows.
fn columns(grid: &Grid, rows: usize) -> Result<Vec<i64>, GridError> {
    if rows > grid.rows_final() {
        return Err(GridError::Unstable { row: grid.rows_final() });
    }
    Ok(match grid.bounding_box(rows) {
        Some((lo, hi)) => (lo..=hi).rev().collect(),
        None => Vec::new(),
    })
}

fn rows_of(grid: &Grid, rows: usize) -> impl Iterator<Item = &Row> {
    grid.rows().iter().take(rows)
}

/// Text snapshot of the first `rows` rows, which must be stable.
pub fn snapshot(grid: &Grid, rows: usize) -> Result<String, GridError> {
    let cols = columns(grid, rows)?;
    let origin = cols.last().copied().unwrap_or(0);
    let mut out = format!("{} {} {} {}\n", grid.variant(), rows, cols.len(), origin);
    let line = |tokens: Vec<String>| tokens.join(" ");
    for row in rows_of(grid, rows) {
        let _ = writeln!(out, "{}", line(cols.iter().map(|&j| row.bottom(j).to_string()).collect()));
    }
    if grid.variant() == Variant::Ca1 {
        out.push_str("# top\n");
        for row in rows_of(grid, rows) {
            let _ = writeln!(out, "{}", line(cols.iter().map(|&j| row.top(j).to_string()).collect()));
        }
    }
    Ok(out)
}

/// Plain PGM image of the first `rows` rows, which must be stable.
pub fn pgm(grid: &Grid, rows: usize) -> Result<String, GridError> {
    let cols = columns(grid, rows)?;
    let origin = cols.last().copied().unwrap_or(0);
    let ca1 = grid.variant() == Variant::Ca1;
    let height = if ca1 { 2 * rows + 1 } else { rows };
    let mut out = String::from("P2\n");
    let _ = writeln!(out, "# {} rows {} origin {}", grid.variant(), rows, origin);
    let _ = writeln!(out, "# levels {}", legend(grid.variant()));
    let _ = writeln!(out, "{} {}\n255", cols.len(), height);
    let line = |levels: Vec<u8>| levels.iter().map(u8::to_string).collect::<Vec<_>>().join(" ");
    for row in rows_of(grid, rows) {
        let _ = writeln!(out, "{}", line(cols.iter().map(|&j| cell_level(row.bottom(j))).collect()));
    }
    if ca1 {
        let _ = writeln!(out, "{}", line(vec![SEPARATOR; cols.len()]));
        for row in rows_of(grid, rows) {
            let _ = writeln!(out, "{}", line(cols.iter().map(|&j| top_level(row.top(j))).collect()));
        }
    }
    Ok(out)
}
