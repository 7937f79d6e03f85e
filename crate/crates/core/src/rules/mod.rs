//! Cell alphabets, neighbourhoods and closed-form transition functions.
//!
//! Columns grow to the left, so `j - 1` is the right-hand neighbour of `j` and
//! row `i - 1` is the row above. Every transition is total: neighbourhoods that
//! cannot arise in a real computation fall back to the layer default (`E` for
//! digit layers, `UP` for the parity layer).

use std::fmt;

use serde::{Deserialize, Serialize};

mod table;

pub use table::{
    carry_profile, check_rule_consistency, expected_law_count, inferred_carry, learn_rule_table, learn_rule_tables,
    Category, CategoryCount, ConsistencyReport, Mismatch, RuleEntry, RuleError, RuleTable, DEFAULT_LEARN_MAX,
};

use crate::Variant;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(v: u8) -> Self {
        if v.is_multiple_of(2) {
            Parity::Even
        } else {
            Parity::Odd
        }
    }
}

/// State of a digit-layer cell.
///
/// Bases 2 and 3 use [`Cell::Digit`]; base 4 uses [`Cell::Tagged`], whose
/// attribute is the parity of the whole row the digit belongs to.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Cell {
    #[default]
    Empty,
    Digit(u8),
    Tagged(u8, Parity),
}

impl Cell {
    pub fn is_empty(self) -> bool {
        self == Cell::Empty
    }

    pub fn digit(self) -> Option<u8> {
        match self {
            Cell::Empty => None,
            Cell::Digit(d) | Cell::Tagged(d, _) => Some(d),
        }
    }

    /// Digit value with `E` read as 0.
    fn value(self) -> u8 {
        self.digit().unwrap_or(0)
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cell::Empty => f.write_str("E"),
            Cell::Digit(d) => write!(f, "{d}"),
            Cell::Tagged(d, Parity::Odd) => write!(f, "{d}:o"),
            Cell::Tagged(d, Parity::Even) => write!(f, "{d}:e"),
        }
    }
}

/// State of a cell in the parity layer of the base-3 automaton.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TopState {
    OddNormal,
    /// Sits just right of an odd row's units digit; the row below reads the
    /// empty cell under it as an appended `1`.
    OddSpecial,
    Even,
    #[default]
    UnknownParity,
}

impl TopState {
    /// Parity sums that have been computed (`EV` or `ON`).
    pub fn is_resolved(self) -> bool {
        matches!(self, TopState::Even | TopState::OddNormal)
    }

    fn from_parity(p: Parity) -> Self {
        match p {
            Parity::Even => TopState::Even,
            Parity::Odd => TopState::OddNormal,
        }
    }

    fn parity(self) -> Option<Parity> {
        match self {
            TopState::Even => Some(Parity::Even),
            TopState::OddNormal => Some(Parity::Odd),
            _ => None,
        }
    }
}

impl fmt::Display for TopState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            TopState::OddNormal => "ON",
            TopState::OddSpecial => "OS",
            TopState::Even => "EV",
            TopState::UnknownParity => "UP",
        })
    }
}

/// A successor produced by a rule: a digit-layer cell or a parity-layer cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum State {
    Cell(Cell),
    Top(TopState),
}

impl fmt::Display for State {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            State::Cell(c) => c.fmt(f),
            State::Top(t) => t.fmt(f),
        }
    }
}

/// The four neighbourhood geometries. Field names are relative to the
/// evolving cell at `(i, j)`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Neighborhood {
    /// `(i-1,j)`, `(i-1,j-1)`, `(i-1,j-2)`, `(i,j-1)`.
    Ca3 { above: Cell, above_right: Cell, above_right2: Cell, right: Cell },
    /// `(i-1,j)`, `(i-1,j-1)`, `(i,j-1)`.
    Ca2 { above: Cell, above_right: Cell, right: Cell },
    /// `(i-1,j,0)`, `(i-1,j,1)`, `(i-1,j-1,0)`, `(i-1,j-1,1)`, `(i,j-1,0)`.
    Ca1Bottom { above: Cell, above_top: TopState, above_right: Cell, above_right_top: TopState, right: Cell },
    /// `(i,j,0)`, `(i,j+1,1)`.
    Ca1Top { below: Cell, left: TopState },
}

impl Neighborhood {
    pub fn kind(&self) -> RuleKind {
        match self {
            Neighborhood::Ca3 { .. } => RuleKind::Ca3,
            Neighborhood::Ca2 { .. } => RuleKind::Ca2,
            Neighborhood::Ca1Bottom { .. } => RuleKind::Ca1Bottom,
            Neighborhood::Ca1Top { .. } => RuleKind::Ca1Top,
        }
    }

    pub fn arity(&self) -> usize {
        match self {
            Neighborhood::Ca3 { .. } => 4,
            Neighborhood::Ca2 { .. } => 3,
            Neighborhood::Ca1Bottom { .. } => 5,
            Neighborhood::Ca1Top { .. } => 2,
        }
    }

    /// Evaluates the closed-form rule.
    pub fn transition(&self) -> State {
        match *self {
            Neighborhood::Ca3 { above, above_right, above_right2, right } => {
                State::Cell(transition_ca3(above, above_right, above_right2, right))
            }
            Neighborhood::Ca2 { above, above_right, right } => State::Cell(transition_ca2(above, above_right, right)),
            Neighborhood::Ca1Bottom { above, above_top, above_right, above_right_top, right } => {
                State::Cell(transition_ca1_bottom(above, above_top, above_right, above_right_top, right))
            }
            Neighborhood::Ca1Top { below, left } => State::Top(transition_ca1_top(below, left)),
        }
    }
}

impl fmt::Display for Neighborhood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Neighborhood::Ca3 { above, above_right, above_right2, right } => {
                write!(f, "{above},{above_right},{above_right2},{right}")
            }
            Neighborhood::Ca2 { above, above_right, right } => write!(f, "{above},{above_right},{right}"),
            Neighborhood::Ca1Bottom { above, above_top, above_right, above_right_top, right } => {
                write!(f, "{above},{above_top},{above_right},{above_right_top},{right}")
            }
            Neighborhood::Ca1Top { below, left } => write!(f, "{below},{left}"),
        }
    }
}

/// Which rule family a table or neighbourhood belongs to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RuleKind {
    Ca1Bottom,
    Ca1Top,
    Ca2,
    Ca3,
}

impl RuleKind {
    pub fn for_variant(v: Variant) -> &'static [RuleKind] {
        match v {
            Variant::Ca1 => &[RuleKind::Ca1Bottom, RuleKind::Ca1Top],
            Variant::Ca2 => &[RuleKind::Ca2],
            Variant::Ca3 => &[RuleKind::Ca3],
        }
    }

    pub fn variant(self) -> Variant {
        match self {
            RuleKind::Ca1Bottom | RuleKind::Ca1Top => Variant::Ca1,
            RuleKind::Ca2 => Variant::Ca2,
            RuleKind::Ca3 => Variant::Ca3,
        }
    }

    pub fn default_state(self) -> State {
        match self {
            RuleKind::Ca1Top => State::Top(TopState::UnknownParity),
            _ => State::Cell(Cell::Empty),
        }
    }
}

impl fmt::Display for RuleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RuleKind::Ca1Bottom => "ca1-bottom",
            RuleKind::Ca1Top => "ca1-top",
            RuleKind::Ca2 => "ca2",
            RuleKind::Ca3 => "ca3",
        })
    }
}

/// Base-2 rule: one digit of `(2x+1) + x` where `x` is the row above.
///
/// The result bit under `above` is `above + above_right + carry`. The carry out
/// of the right neighbour's position is recovered from that neighbour's result:
/// it happened exactly when `right < above_right + above_right2`. Zero bits with
/// nothing but empties to their right are trailing zeros and stay empty, and a
/// zero above the old leading bit is a leading zero.
pub fn transition_ca3(above: Cell, above_right: Cell, above_right2: Cell, right: Cell) -> Cell {
    if [above, above_right, above_right2, right].iter().any(|c| matches!(c, Cell::Tagged(..))) {
        return Cell::Empty;
    }
    if above.is_empty() && above_right.is_empty() {
        // Two columns past the old leading bit only a final carry can land.
        if above_right2.is_empty() {
            return Cell::Empty;
        }
        let carry = right.value() < above_right2.value();
        return if carry { Cell::Digit(1) } else { Cell::Empty };
    }
    if above_right.is_empty() {
        // Units position: x0 plus the appended 1, always even for odd rows.
        if !right.is_empty() {
            return Cell::Empty;
        }
        let bit = (above.value() + 1) % 2;
        return if bit == 0 { Cell::Empty } else { Cell::Digit(bit) };
    }
    let carry = right.value() < above_right.value() + above_right2.value();
    let bit = (above.value() + above_right.value() + u8::from(carry)) % 2;
    if bit == 0 && right.is_empty() {
        Cell::Empty
    } else {
        Cell::Digit(bit)
    }
}

/// Base-4 rule.
///
/// Even rows are halved as `2x/4`: the digit under `above` is
/// `2*above + [above_right >= 2]`, the units zero of `2x` falling into the
/// empty cell under the old units digit. Odd rows become `(4x+1) - x`: the
/// digit is `above_right - above - borrow` where the borrow out of the right
/// neighbour's position is `right + above_right >= 4`. The attribute is copied
/// from the right neighbour, or taken from the digit itself at the units
/// position.
pub fn transition_ca2(above: Cell, above_right: Cell, right: Cell) -> Cell {
    let row_parity = match (above, above_right) {
        (Cell::Empty, Cell::Empty) => return Cell::Empty,
        (Cell::Tagged(_, p), Cell::Empty) | (Cell::Empty, Cell::Tagged(_, p)) => p,
        (Cell::Tagged(_, p), Cell::Tagged(_, q)) if p == q => p,
        _ => return Cell::Empty,
    };
    if matches!(right, Cell::Digit(_)) {
        return Cell::Empty;
    }
    let a = above.value();
    let digit = match row_parity {
        Parity::Even => {
            // Halving an even row always yields an odd row, and the right
            // neighbour must be a digit of `2x` for some carry in {0, 1}.
            let b = match above_right {
                Cell::Empty => return Cell::Empty,
                c => c.value(),
            };
            match right {
                Cell::Empty if b != 2 => return Cell::Empty,
                Cell::Tagged(r, Parity::Odd) if (4 + r - (2 * b) % 4) % 4 > 1 => return Cell::Empty,
                Cell::Tagged(_, Parity::Even) => return Cell::Empty,
                _ => {}
            }
            (2 * a + u8::from(b >= 2)) % 4
        }
        Parity::Odd => {
            let (b, borrow) = if above_right.is_empty() {
                // Units position: subtract from the appended 1.
                (1, 0)
            } else {
                let b = above_right.value();
                (b, u8::from(right.value() + b >= 4))
            };
            (4 + b - a - borrow) % 4
        }
    };
    if digit == 0 && (right.is_empty() || above.is_empty()) {
        return Cell::Empty;
    }
    let attribute = match right {
        Cell::Tagged(_, p) => p,
        _ => Parity::of(digit),
    };
    Cell::Tagged(digit, attribute)
}

/// Base-3 digit-layer rule: one digit of `y = X/2`, worked from the right.
///
/// `X` is the row above, extended by a `1` in the cell under an `OS` marker.
/// With `right = y_{j-1}` and `above_right = X_{j-1}`, the carry into `j-1` of
/// the doubling `2y` is `X_{j-1} - 2 y_{j-1} (mod 3)`, which fixes the carry
/// into `j` and hence `y_j = 2 (X_j - carry) (mod 3)`. Digit cells above must
/// carry a resolved parity before any rule fires.
pub fn transition_ca1_bottom(
    above: Cell,
    above_top: TopState,
    above_right: Cell,
    above_right_top: TopState,
    right: Cell,
) -> Cell {
    let x = match above {
        Cell::Digit(d) if above_top.is_resolved() => d,
        Cell::Empty if above_top == TopState::OddSpecial => 1,
        _ => return Cell::Empty,
    };
    let x_right = match above_right {
        Cell::Digit(d) if above_right_top.is_resolved() => d,
        Cell::Empty if above_right_top == TopState::OddSpecial => 1,
        Cell::Empty => 0,
        _ => return Cell::Empty,
    };
    let y_right = match right {
        Cell::Digit(d) => d,
        Cell::Empty => 0,
        Cell::Tagged(..) => return Cell::Empty,
    };
    let carry_in = (x_right + 3 - (2 * y_right) % 3) % 3;
    if carry_in > 1 {
        return Cell::Empty;
    }
    let carry = (2 * y_right + carry_in) / 3;
    Cell::Digit((2 * (x + 3 - carry)) % 3)
}

/// Base-3 parity-layer rule: partial digit sums mod 2, swept from the leading
/// digit rightwards, with `OS` placed just right of an odd row's units digit.
pub fn transition_ca1_top(below: Cell, left: TopState) -> TopState {
    match (below, left) {
        (Cell::Digit(d), TopState::UnknownParity) => TopState::from_parity(Parity::of(d)),
        (Cell::Digit(d), l) if l.is_resolved() => {
            let sum = l.parity().map(|p| p as u8).unwrap_or(0) + d;
            TopState::from_parity(Parity::of(sum))
        }
        (Cell::Empty, TopState::OddNormal) => TopState::OddSpecial,
        _ => TopState::UnknownParity,
    }
}
