//! Positional digit strings and direct arithmetic implementations of the
//! Collatz map and its compressed variants.
//!
//! Everything here works on [`BigUint`] and is independent of the automata;
//! the grid and engine modules use these functions as ground truth.

use std::fmt;

use num_bigint::BigUint;
use num_integer::Integer;
use num_traits::{One, Zero};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Default step cap for oracle iteration.
pub const DEFAULT_CAP: u64 = 1_000_000;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DigitError {
    #[error("unsupported base {0}, expected 2, 3 or 4")]
    UnsupportedBase(u32),
    #[error("digit {digit} is out of range for base {base}")]
    DigitOutOfRange { digit: u8, base: u32 },
    #[error("expected a positive integer")]
    NotPositive,
}

/// Radix of a digit string. Only the three bases the automata work in exist.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Base {
    Two,
    Three,
    Four,
}

impl Base {
    pub fn new(radix: u32) -> Result<Self, DigitError> {
        match radix {
            2 => Ok(Base::Two),
            3 => Ok(Base::Three),
            4 => Ok(Base::Four),
            other => Err(DigitError::UnsupportedBase(other)),
        }
    }

    pub fn radix(self) -> u32 {
        match self {
            Base::Two => 2,
            Base::Three => 3,
            Base::Four => 4,
        }
    }
}

/// Digits of a non-negative integer, least significant first, together with
/// the grid column of the least significant stored digit.
///
/// Strings built by [`to_digits`] carry no leading zeros. Rows of the base-3
/// automaton keep the leading zeros the automaton leaves behind; those are
/// built with [`DigitString::padded`].
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct DigitString {
    base: Base,
    digits: Vec<u8>,
    offset: i64,
}

impl DigitString {
    /// Builds a string from raw digits, checking only the digit range.
    pub fn new(base: Base, digits: Vec<u8>, offset: i64) -> Result<Self, DigitError> {
        if let Some(&digit) = digits.iter().find(|&&d| u32::from(d) >= base.radix()) {
            return Err(DigitError::DigitOutOfRange { digit, base: base.radix() });
        }
        Ok(Self { base, digits, offset })
    }

    pub fn base(&self) -> Base {
        self.base
    }

    pub fn digits(&self) -> &[u8] {
        &self.digits
    }

    pub fn offset(&self) -> i64 {
        self.offset
    }

    pub fn len(&self) -> usize {
        self.digits.len()
    }

    pub fn is_empty(&self) -> bool {
        self.digits.is_empty()
    }

    /// Column of the most significant stored digit.
    pub fn top_column(&self) -> i64 {
        self.offset + self.digits.len() as i64 - 1
    }

    /// Digit stored at `column`, if the column lies inside the string.
    pub fn digit_at(&self, column: i64) -> Option<u8> {
        let idx = column - self.offset;
        if idx < 0 {
            return None;
        }
        self.digits.get(idx as usize).copied()
    }

    pub fn value(&self) -> BigUint {
        from_digits(self)
    }

    pub fn with_offset(mut self, offset: i64) -> Self {
        self.offset = offset;
        self
    }

    /// Removes trailing zero digits, moving the offset up by the number removed.
    pub fn strip_trailing_zeros(mut self) -> (Self, usize) {
        let zeros = self.digits.iter().take_while(|&&d| d == 0).count();
        if zeros == self.digits.len() {
            return (self, 0);
        }
        self.digits.drain(..zeros);
        self.offset += zeros as i64;
        (self, zeros)
    }

    /// Pads with leading zeros up to `width` digits.
    pub fn padded(mut self, width: usize) -> Self {
        if self.digits.len() < width {
            self.digits.resize(width, 0);
        }
        self
    }

    /// True when the most significant stored digit is nonzero.
    pub fn is_normalized(&self) -> bool {
        self.digits.last().is_none_or(|&d| d != 0)
    }
}

impl fmt::Display for DigitString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for d in self.digits.iter().rev() {
            write!(f, "{d}")?;
        }
        write!(f, "_{}@{}", self.base.radix(), self.offset)
    }
}

/// Digits of `n` in the given radix, offset 0, no leading zeros.
pub fn to_digits(n: &BigUint, radix: u32) -> Result<DigitString, DigitError> {
    let base = Base::new(radix)?;
    if n.is_zero() {
        return Err(DigitError::NotPositive);
    }
    Ok(DigitString { base, digits: n.to_radix_le(radix), offset: 0 })
}

/// Value of a digit string, ignoring its offset.
pub fn from_digits(d: &DigitString) -> BigUint {
    if d.digits.is_empty() {
        return BigUint::zero();
    }
    BigUint::from_radix_le(&d.digits, d.base.radix()).expect("digits are range-checked on construction")
}

/// The Collatz map and the three compressed maps realized by the automata.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum MapVariant {
    /// `3n+1` / `n/2`.
    T,
    /// `(3n+1)/2` / `n/2`.
    T1,
    /// `(3n+1)` with every factor of four removed / `n/2`.
    T2,
    /// `(3n+1)` with every factor of two removed / `n/2`.
    T3,
}

impl MapVariant {
    pub fn apply(self, n: &BigUint) -> BigUint {
        apply_map(self, n)
    }

    /// The value an orbit starts from. T3 orbits begin at the odd part, matching
    /// the binary automaton which never stores trailing zero bits.
    pub fn start(self, n: &BigUint) -> BigUint {
        match self {
            MapVariant::T3 => odd_part(n),
            _ => n.clone(),
        }
    }
}

impl fmt::Display for MapVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            MapVariant::T => "T",
            MapVariant::T1 => "T1",
            MapVariant::T2 => "T2",
            MapVariant::T3 => "T3",
        };
        f.write_str(name)
    }
}

pub fn apply_map(v: MapVariant, n: &BigUint) -> BigUint {
    if n.is_even() {
        return n >> 1u32;
    }
    let up: BigUint = n * 3u32 + 1u32;
    match v {
        MapVariant::T => up,
        MapVariant::T1 => up >> 1u32,
        MapVariant::T2 => strip_powers_of_four(&up),
        MapVariant::T3 => odd_part(&up),
    }
}

/// `n` divided by the largest power of two dividing it.
pub fn odd_part(n: &BigUint) -> BigUint {
    match n.trailing_zeros() {
        Some(tz) => n >> tz,
        None => BigUint::zero(),
    }
}

/// `n` divided by the largest power of four dividing it.
pub fn strip_powers_of_four(n: &BigUint) -> BigUint {
    match n.trailing_zeros() {
        Some(tz) => n >> (tz - tz % 2),
        None => BigUint::zero(),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Classification {
    Convergent,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TrajectoryReport {
    pub input: BigUint,
    pub iterates: Vec<BigUint>,
    pub reached_one: bool,
    pub steps_to_one: Option<usize>,
    pub classification: Classification,
}

/// Iterates `v` from its start value, stopping at the first 1 or after `cap`
/// entries.
pub fn oracle_trajectory(v: MapVariant, n: &BigUint, cap: u64) -> TrajectoryReport {
    let cap = cap.max(1) as usize;
    let mut current = v.start(n);
    let mut iterates = Vec::new();
    let mut steps_to_one = None;
    while iterates.len() < cap {
        let is_one = current.is_one();
        iterates.push(current.clone());
        if is_one {
            steps_to_one = Some(iterates.len() - 1);
            break;
        }
        current = v.apply(&current);
    }
    let reached_one = steps_to_one.is_some();
    TrajectoryReport {
        input: n.clone(),
        iterates,
        reached_one,
        steps_to_one,
        classification: if reached_one { Classification::Convergent } else { Classification::Undetermined },
    }
}

/// Number of applications of `v` needed to reach 1 from its start value.
pub fn steps_to_one(v: MapVariant, n: &BigUint, cap: u64) -> Option<u64> {
    let mut current = v.start(n);
    for k in 0..=cap {
        if current.is_one() {
            return Some(k);
        }
        if current.is_zero() {
            return None;
        }
        current = v.apply(&current);
    }
    None
}

/// Smallest `k` with `T^k(n) = 1`.
pub fn total_stopping_time(n: &BigUint, cap: u64) -> Option<u64> {
    steps_to_one(MapVariant::T, n, cap)
}

/// Smallest `k >= 1` with `T^k(n) < n`. Absent for `n = 1`.
pub fn stopping_time(n: &BigUint, cap: u64) -> Option<u64> {
    if n <= &BigUint::one() {
        return None;
    }
    let mut current = n.clone();
    for k in 1..=cap {
        current = apply_map(MapVariant::T, &current);
        if &current < n {
            return Some(k);
        }
    }
    None
}
