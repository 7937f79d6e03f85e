//! Collatz trajectories computed by cellular automata in bases 3, 4 and 2.
//!
//! Three automata turn the global map `n -> 3n+1 | n/2` into local rules over
//! neighbouring digits:
//!
//! * [`Variant::Ca1`] works in base 3 on two layers. The top layer sweeps digit
//!   parities from the most significant digit down, the bottom layer halves the
//!   row above (with a `1` appended when the row is odd). It realizes
//!   `T1(n) = (3n+1)/2 | n/2`.
//! * [`Variant::Ca2`] works in base 4. Each digit carries the parity of its row;
//!   even rows are halved, odd rows become `(4x+1)-x` with trailing zero digits
//!   dropped. It realizes `T2`.
//! * [`Variant::Ca3`] works in base 2. Odd rows become `(2x+1)+x` and trailing
//!   zero bits are never stored, so halving costs nothing. It realizes `T3`.
//!
//! [`digits`] holds the arithmetic oracles, [`rules`] the transition functions
//! and learned rule tables, [`grid`] the evolving state, [`engine`] complete
//! runs and batches, [`metrics`] the efficiency statistics and [`cli`] the
//! command line front end and file formats.

use std::fmt;
use std::str::FromStr;

use num_bigint::BigUint;
use serde::{Deserialize, Serialize};

pub mod cli;
pub mod digits;
pub mod engine;
pub mod grid;
pub mod metrics;
pub mod render;
pub mod rules;

pub use digits::{Base, DigitString, MapVariant};
pub use engine::{RunConfig, TrajectoryRecord};
pub use grid::{Grid, Mode};

/// One of the three automata.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Variant {
    Ca1,
    Ca2,
    Ca3,
}

impl Variant {
    pub const ALL: [Variant; 3] = [Variant::Ca1, Variant::Ca2, Variant::Ca3];

    pub fn base(self) -> Base {
        match self {
            Variant::Ca1 => Base::Three,
            Variant::Ca2 => Base::Four,
            Variant::Ca3 => Base::Two,
        }
    }

    /// The compressed map whose orbit the automaton traces.
    pub fn map(self) -> MapVariant {
        match self {
            Variant::Ca1 => MapVariant::T1,
            Variant::Ca2 => MapVariant::T2,
            Variant::Ca3 => MapVariant::T3,
        }
    }

    /// Value held by row 0 for input `n`. The base-4 and base-2 automata never
    /// store trailing zero digits, so their first row is `n` with those removed.
    pub fn start(self, n: &BigUint) -> BigUint {
        match self {
            Variant::Ca1 => n.clone(),
            Variant::Ca2 => digits::strip_powers_of_four(n),
            Variant::Ca3 => digits::odd_part(n),
        }
    }

    /// Rows kept after the first row equal to 1. The base-3 automaton cycles
    /// 1, 2, 1, ... so two full periods are kept; the others repeat 1 once.
    pub fn tail_rows(self) -> usize {
        match self {
            Variant::Ca1 => 4,
            Variant::Ca2 | Variant::Ca3 => 1,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Variant::Ca1 => "ca1",
            Variant::Ca2 => "ca2",
            Variant::Ca3 => "ca3",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.to_ascii_lowercase().as_str() {
            "ca1" => Ok(Variant::Ca1),
            "ca2" => Ok(Variant::Ca2),
            "ca3" => Ok(Variant::Ca3),
            other => Err(format!("unknown variant `{other}`, expected ca1, ca2 or ca3")),
        }
    }
}
