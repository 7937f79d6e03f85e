//! Rule tables learned from arithmetic, and their cross-check against the
//! closed-form transitions.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use num_bigint::BigUint;
use num_integer::Integer;
use rayon::prelude::*;
use thiserror::Error;

use super::{Cell, Neighborhood, Parity, RuleKind, State, TopState};
use crate::digits::DigitString;
use crate::grid::{self, Row};
use crate::Variant;

/// Largest input used when learning tables unless told otherwise.
pub const DEFAULT_LEARN_MAX: u64 = 4096;

/// Rows scanned per input before giving up on reaching 1.
const ROW_CAP: usize = 100_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum RuleError {
    #[error("learning needs n_max >= 2, got {0}")]
    Bound(u64),
    #[error("neighbourhood {neighborhood} maps to both {first} and {second}")]
    Conflict { neighborhood: String, first: String, second: String },
}

/// Groups of neighbourhoods, following the case split of the correctness
/// arguments for each automaton.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Category {
    Inner,
    RightEnd,
    LeftEnd,
    EvenInner,
    OddInnerToOdd,
    OddInnerToEven,
    EvenRight,
    OddRight,
    EvenLeft,
    OddLeft,
    Units,
    Leading,
    ParityStart,
    ParitySweep,
    RowEnd,
    Background,
}

impl Category {
    pub fn name(self) -> &'static str {
        match self {
            Category::Inner => "inner",
            Category::RightEnd => "right-end",
            Category::LeftEnd => "left-end",
            Category::EvenInner => "even-inner",
            Category::OddInnerToOdd => "odd-inner-odd",
            Category::OddInnerToEven => "odd-inner-even",
            Category::EvenRight => "even-right",
            Category::OddRight => "odd-right",
            Category::EvenLeft => "even-left",
            Category::OddLeft => "odd-left",
            Category::Units => "units",
            Category::Leading => "leading",
            Category::ParityStart => "parity-start",
            Category::ParitySweep => "parity-sweep",
            Category::RowEnd => "row-end",
            Category::Background => "background",
        }
    }

    /// Categories of a rule family, in dump order.
    pub fn for_kind(kind: RuleKind) -> &'static [Category] {
        use Category::*;
        match kind {
            RuleKind::Ca3 => &[Inner, RightEnd, LeftEnd, Background],
            RuleKind::Ca2 => {
                &[EvenInner, OddInnerToOdd, OddInnerToEven, EvenRight, OddRight, EvenLeft, OddLeft, Background]
            }
            RuleKind::Ca1Bottom => &[Inner, Units, Leading, Background],
            RuleKind::Ca1Top => &[ParityStart, ParitySweep, RowEnd, Background],
        }
    }

    pub fn of(n: &Neighborhood) -> Category {
        match *n {
            Neighborhood::Ca3 { above, above_right, above_right2, right } => {
                if above.is_empty() && above_right.is_empty() && above_right2.is_empty() {
                    Category::Background
                } else if ![above, above_right, above_right2, right].iter().any(|c| c.is_empty()) {
                    Category::Inner
                } else if right.is_empty() {
                    Category::RightEnd
                } else {
                    Category::LeftEnd
                }
            }
            Neighborhood::Ca2 { above, above_right, right } => {
                let parity = match (above, above_right) {
                    (Cell::Tagged(_, p), _) | (_, Cell::Tagged(_, p)) => p,
                    _ => return Category::Background,
                };
                let inner = ![above, above_right, right].iter().any(|c| c.is_empty());
                match (parity, inner, right) {
                    (Parity::Even, true, _) => Category::EvenInner,
                    (Parity::Odd, true, Cell::Tagged(_, Parity::Even)) => Category::OddInnerToEven,
                    (Parity::Odd, true, _) => Category::OddInnerToOdd,
                    (Parity::Even, false, Cell::Empty) => Category::EvenRight,
                    (Parity::Odd, false, Cell::Empty) => Category::OddRight,
                    (Parity::Even, false, _) => Category::EvenLeft,
                    (Parity::Odd, false, _) => Category::OddLeft,
                }
            }
            Neighborhood::Ca1Bottom { above, above_top, above_right, above_right_top, right } => {
                let marked = above_top == TopState::OddSpecial || above_right_top == TopState::OddSpecial;
                if above.is_empty() && above_right.is_empty() && !marked {
                    Category::Background
                } else if ![above, above_right, right].iter().any(|c| c.is_empty()) {
                    Category::Inner
                } else if right.is_empty() {
                    Category::Units
                } else {
                    Category::Leading
                }
            }
            Neighborhood::Ca1Top { below, left } => match (below, left) {
                (Cell::Empty, TopState::OddNormal) => Category::RowEnd,
                (Cell::Empty, _) => Category::Background,
                (_, TopState::UnknownParity) => Category::ParityStart,
                (_, l) if l.is_resolved() => Category::ParitySweep,
                _ => Category::Background,
            },
        }
    }
}

/// Number of distinct evolution laws a category must contain, where the
/// correctness arguments pin it down.
pub fn expected_law_count(kind: RuleKind, category: Category) -> Option<usize> {
    match (kind, category) {
        (RuleKind::Ca3, Category::Inner) => Some(16),
        (RuleKind::Ca2, Category::EvenInner) => Some(32),
        (RuleKind::Ca2, Category::OddInnerToOdd | Category::OddInnerToEven) => Some(64),
        (RuleKind::Ca1Bottom, Category::Inner) => Some(18),
        (RuleKind::Ca1Top, Category::ParitySweep) => Some(6),
        (RuleKind::Ca1Top, Category::ParityStart) => Some(3),
        _ => None,
    }
}

/// The carry (base 2, base-4 even rows, base 3) or borrow (base-4 odd rows)
/// into the evolving cell's position, as the local rule infers it from the
/// neighbourhood alone.
pub fn inferred_carry(n: &Neighborhood) -> Option<u8> {
    match *n {
        Neighborhood::Ca3 { above_right, above_right2, right, .. } => {
            Some(u8::from(right.value() < above_right.value() + above_right2.value()))
        }
        Neighborhood::Ca2 { above, above_right, right } => {
            let parity = match (above, above_right) {
                (Cell::Tagged(_, p), _) | (_, Cell::Tagged(_, p)) => p,
                _ => return None,
            };
            Some(match parity {
                Parity::Even => u8::from(above_right.value() >= 2),
                Parity::Odd if above_right.is_empty() => 0,
                Parity::Odd => u8::from(right.value() + above_right.value() >= 4),
            })
        }
        Neighborhood::Ca1Bottom { above_right, above_right_top, right, .. } => {
            let x_right = match above_right {
                Cell::Empty if above_right_top == TopState::OddSpecial => 1,
                c => c.value(),
            };
            let y_right = right.value();
            let carry_in = (x_right + 3 - (2 * y_right) % 3) % 3;
            (carry_in <= 1).then(|| (2 * y_right + carry_in) / 3)
        }
        Neighborhood::Ca1Top { .. } => None,
    }
}

/// Carries into each column of the step from row `x` to row `y`, computed by
/// rippling through whole digit strings.
///
/// Base 2: `(2x+1) + x`. Base 4: `2x` for even rows and `(4x+1) - x` (borrows)
/// for odd rows. Base 3: the doubling `2y` that reproduces the row above.
pub fn carry_profile(variant: Variant, x: &DigitString, y: &DigitString) -> BTreeMap<i64, u8> {
    let digit = |ds: &DigitString, p: i64| if p < 0 { 0 } else { ds.digits().get(p as usize).copied().unwrap_or(0) };
    let u = x.offset();
    let mut out = BTreeMap::new();
    let odd = x.value().is_odd();
    match variant {
        Variant::Ca3 => {
            let mut c = 0;
            for p in 0..=x.len() as i64 + 2 {
                out.insert(u + p, c);
                let a = if p == 0 { 1 } else { digit(x, p - 1) };
                c = (a + digit(x, p) + c) / 2;
            }
        }
        Variant::Ca2 if odd => {
            let mut b = 0i8;
            for p in 0..=x.len() as i64 + 2 {
                out.insert(u + p, b as u8);
                let m = if p == 0 { 1 } else { digit(x, p - 1) } as i8;
                b = i8::from(m - digit(x, p) as i8 - b < 0);
            }
        }
        Variant::Ca2 => {
            let mut c = 0;
            for p in 0..=x.len() as i64 + 2 {
                out.insert(u + p, c);
                c = (2 * digit(x, p) + c) / 4;
            }
        }
        Variant::Ca1 => {
            let mut c = 0;
            for q in 0..=y.len() as i64 + 2 {
                out.insert(y.offset() + q, c);
                c = (2 * digit(y, q) + c) / 3;
            }
        }
    }
    out
}

/// One learned evolution law with the carry observed by ripple arithmetic.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RuleEntry {
    pub neighborhood: Neighborhood,
    pub successor: State,
    pub carry: Option<u8>,
}

/// Finite map from neighbourhood to successor, falling back to the layer
/// default for neighbourhoods it does not contain.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RuleTable {
    kind: RuleKind,
    entries: BTreeMap<Neighborhood, (State, Option<u8>)>,
    carry_conflicts: usize,
    n_max: u64,
}

impl RuleTable {
    pub fn new(kind: RuleKind) -> Self {
        RuleTable { kind, entries: BTreeMap::new(), carry_conflicts: 0, n_max: 0 }
    }

    pub fn kind(&self) -> RuleKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Largest input the table was learned from.
    pub fn n_max(&self) -> u64 {
        self.n_max
    }

    pub fn default_state(&self) -> State {
        self.kind.default_state()
    }

    pub fn get(&self, n: &Neighborhood) -> State {
        self.entries.get(n).map_or(self.default_state(), |e| e.0)
    }

    pub fn entries(&self) -> impl Iterator<Item = RuleEntry> + '_ {
        self.entries.iter().map(|(n, &(successor, carry))| RuleEntry { neighborhood: *n, successor, carry })
    }

    /// Adds a law, rejecting a second successor for a known neighbourhood.
    pub fn insert(&mut self, entry: RuleEntry) -> Result<(), RuleError> {
        match self.entries.get_mut(&entry.neighborhood) {
            None => {
                self.entries.insert(entry.neighborhood, (entry.successor, entry.carry));
            }
            Some((s, _)) if *s != entry.successor => {
                return Err(RuleError::Conflict {
                    neighborhood: entry.neighborhood.to_string(),
                    first: s.to_string(),
                    second: entry.successor.to_string(),
                });
            }
            Some((_, c)) => {
                if *c != entry.carry {
                    self.carry_conflicts += 1;
                }
            }
        }
        Ok(())
    }

    pub fn merge(mut self, other: RuleTable) -> Result<RuleTable, RuleError> {
        self.carry_conflicts += other.carry_conflicts;
        self.n_max = self.n_max.max(other.n_max);
        for entry in other.entries() {
            self.insert(entry)?;
        }
        Ok(self)
    }

    /// Text dump: `#` header lines with the consistency result and category
    /// sizes, then one `<kind> <cells> -> <cell>` line per law.
    pub fn dump(&self) -> String {
        let report = check_rule_consistency(self);
        let mut out = String::new();
        let _ = writeln!(out, "# rules {} inputs 2..={}", self.kind, self.n_max);
        let _ = writeln!(
            out,
            "# consistency {} mismatches {}",
            if report.is_consistent() { "ok" } else { "failed" },
            report.mismatches.len()
        );
        let _ = writeln!(out, "# coverage {}", if report.coverage_ok { "ok" } else { "insufficient" });
        for count in &report.categories {
            let lines = self.category_lines(count.category);
            if count.laws == count.raw {
                let _ = writeln!(out, "# category {} {}", count.category.name(), count.laws);
            } else {
                let _ = writeln!(out, "# category {} {} raw {}", count.category.name(), count.laws, count.raw);
            }
            for line in lines {
                let _ = writeln!(out, "{} {}", self.kind, line);
            }
        }
        out
    }

    fn category_lines(&self, category: Category) -> Vec<String> {
        let laws: BTreeSet<String> = self
            .entries()
            .filter(|e| Category::of(&e.neighborhood) == category)
            .map(|e| format!("{} -> {}", law_key(&e.neighborhood), e.successor))
            .collect();
        laws.into_iter().collect()
    }
}

/// Text of a neighbourhood as counted for law cardinalities. Inner base-3
/// digit-layer laws ignore which resolved parity the row above carries.
fn law_key(n: &Neighborhood) -> String {
    match *n {
        Neighborhood::Ca1Bottom { above, above_right, right, above_top, above_right_top }
            if Category::of(n) == Category::Inner && above_top.is_resolved() && above_right_top.is_resolved() =>
        {
            format!("{above},*,{above_right},*,{right}")
        }
        _ => n.to_string(),
    }
}

/// Learns the tables of every rule family used by `variant`.
pub fn learn_rule_tables(variant: Variant, n_max: u64) -> Result<Vec<RuleTable>, RuleError> {
    RuleKind::for_variant(variant).iter().map(|&k| learn_rule_table(k, n_max)).collect()
}

/// Records every neighbourhood and realized successor in the stable rows of
/// the arithmetic placement for inputs `2..=n_max`.
pub fn learn_rule_table(kind: RuleKind, n_max: u64) -> Result<RuleTable, RuleError> {
    if n_max < 2 {
        return Err(RuleError::Bound(n_max));
    }
    let mut table = (2..=n_max)
        .into_par_iter()
        .try_fold(|| RuleTable::new(kind), |mut t, n| record_input(&mut t, n).map(|_| t))
        .try_reduce(|| RuleTable::new(kind), RuleTable::merge)?;
    table.n_max = n_max;
    Ok(table)
}

fn record_input(table: &mut RuleTable, n: u64) -> Result<(), RuleError> {
    let kind = table.kind;
    let variant = kind.variant();
    let rows = grid::oracle_rows(variant, &BigUint::from(n), ROW_CAP);
    let digits: Vec<DigitString> = rows.iter().map(|r| row_string(r, variant)).collect();
    for i in 0..rows.len() {
        let cur = &rows[i];
        let prev = i.checked_sub(1).map(|p| &rows[p]);
        if kind != RuleKind::Ca1Top && prev.is_none() {
            continue;
        }
        let carries = match (kind, i) {
            (RuleKind::Ca1Top, _) | (_, 0) => BTreeMap::new(),
            _ => carry_profile(variant, &digits[i - 1], &digits[i]),
        };
        let lo = prev.map_or(cur.lo(), |p| p.lo().min(cur.lo())) - 3;
        let hi = prev.map_or(cur.hi(), |p| p.hi().max(cur.hi())) + 3;
        for j in lo..=hi {
            let neighborhood = grid::neighborhood(kind, prev, cur, j);
            let successor = match kind {
                RuleKind::Ca1Top => State::Top(cur.top(j)),
                _ => State::Cell(cur.bottom(j)),
            };
            let carry = if kind == RuleKind::Ca1Top { None } else { Some(carries.get(&j).copied().unwrap_or(0)) };
            table.insert(RuleEntry { neighborhood, successor, carry })?;
        }
    }
    Ok(())
}

fn row_string(row: &Row, variant: Variant) -> DigitString {
    let (lo, hi) = row.digit_extent().expect("arithmetic rows are never empty");
    DigitString::new(variant.base(), row.digits_between(lo, hi), lo).expect("cells hold in-range digits")
}

/// A learned law that the closed form contradicts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Mismatch {
    pub neighborhood: Neighborhood,
    pub learned: State,
    pub closed_form: State,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CategoryCount {
    pub category: Category,
    /// Distinct evolution laws.
    pub laws: usize,
    /// Distinct full neighbourhoods.
    pub raw: usize,
}

/// Outcome of comparing a learned table with the closed-form transitions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ConsistencyReport {
    pub kind: RuleKind,
    pub entries: usize,
    pub mismatches: Vec<Mismatch>,
    /// Laws whose observed carry differs from the carry the rule infers, or
    /// whose neighbourhood was seen with two different carries.
    pub carry_mismatches: usize,
    /// Base-4 odd-row laws with a true borrow although the right neighbour
    /// and the digit above-right sum to 3.
    pub zero_chain: usize,
    pub categories: Vec<CategoryCount>,
    /// False for an empty table or when a category with a known size differs.
    pub coverage_ok: bool,
}

impl ConsistencyReport {
    pub fn is_consistent(&self) -> bool {
        self.mismatches.is_empty() && self.carry_mismatches == 0 && self.zero_chain == 0
    }

    pub fn count(&self, category: Category) -> usize {
        self.categories.iter().find(|c| c.category == category).map_or(0, |c| c.laws)
    }
}

pub fn check_rule_consistency(t: &RuleTable) -> ConsistencyReport {
    let mut mismatches = Vec::new();
    let mut carry_mismatches = t.carry_conflicts;
    let mut zero_chain = 0;
    let mut laws: BTreeMap<Category, (BTreeSet<String>, usize)> = BTreeMap::new();
    for e in t.entries() {
        let closed_form = e.neighborhood.transition();
        if closed_form != e.successor {
            mismatches.push(Mismatch { neighborhood: e.neighborhood, learned: e.successor, closed_form });
        }
        if let (Some(seen), Some(inferred)) = (e.carry, inferred_carry(&e.neighborhood)) {
            if seen != inferred {
                carry_mismatches += 1;
            }
        }
        if let Neighborhood::Ca2 { above_right, right, .. } = e.neighborhood {
            let odd = matches!(Category::of(&e.neighborhood), Category::OddInnerToOdd | Category::OddInnerToEven);
            if odd && right.value() + above_right.value() == 3 && e.carry == Some(1) {
                zero_chain += 1;
            }
        }
        let slot = laws.entry(Category::of(&e.neighborhood)).or_default();
        slot.0.insert(law_key(&e.neighborhood));
        slot.1 += 1;
    }
    let categories: Vec<CategoryCount> = Category::for_kind(t.kind)
        .iter()
        .map(|&category| {
            let (l, raw) = laws.get(&category).map_or((0, 0), |(s, raw)| (s.len(), *raw));
            CategoryCount { category, laws: l, raw }
        })
        .collect();
    let coverage_ok = !t.is_empty()
        && categories.iter().all(|c| expected_law_count(t.kind, c.category).is_none_or(|want| want == c.laws));
    ConsistencyReport {
        kind: t.kind,
        entries: t.len(),
        mismatches,
        carry_mismatches,
        zero_chain,
        categories,
        coverage_ok,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_table_is_consistent_but_uncovered() {
        let report = check_rule_consistency(&RuleTable::new(RuleKind::Ca3));
        assert!(report.is_consistent());
        assert!(!report.coverage_ok);
    }

    #[test]
    fn small_tables_agree_with_closed_forms() {
        for kind in [RuleKind::Ca3, RuleKind::Ca2, RuleKind::Ca1Bottom, RuleKind::Ca1Top] {
            let t = learn_rule_table(kind, 256).unwrap();
            let report = check_rule_consistency(&t);
            assert!(report.is_consistent(), "{kind}: {report:?}");
        }
    }

    #[test]
    fn conflicting_laws_are_rejected() {
        let n = Neighborhood::Ca1Top { below: Cell::Digit(1), left: TopState::UnknownParity };
        let mut t = RuleTable::new(RuleKind::Ca1Top);
        t.insert(RuleEntry { neighborhood: n, successor: State::Top(TopState::OddNormal), carry: None }).unwrap();
        let err = t.insert(RuleEntry { neighborhood: n, successor: State::Top(TopState::Even), carry: None });
        assert!(matches!(err, Err(RuleError::Conflict { .. })));
    }

    #[test]
    fn bound_is_checked() {
        assert_eq!(learn_rule_table(RuleKind::Ca3, 1), Err(RuleError::Bound(1)));
    }

    #[test]
    fn dump_is_stable() {
        let t = learn_rule_table(RuleKind::Ca1Top, 64).unwrap();
        let dump = t.dump();
        assert_eq!(dump, learn_rule_table(RuleKind::Ca1Top, 64).unwrap().dump());
        assert!(dump.contains("# category parity-start 3\n"));
        assert!(dump.contains("ca1-top 0,ON -> ON\n"));
    }
}
