//! n-efficiency: map applications an automaton needs to reach 1, divided by
//! the total stopping time under the plain Collatz map.

use std::fmt::Write as _;

use num_bigint::{BigInt, BigUint};
use num_rational::{BigRational, Ratio};
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;
use serde::Serialize;
use thiserror::Error;

use crate::digits::{self, DEFAULT_CAP};
use crate::Variant;

pub const CSV_HEADER: &str = "n,variant,ca_steps,tst,ratio";

/// Digits after the decimal point in rendered ratios.
pub const DECIMAL_PLACES: usize = 6;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MetricsError {
    #[error("efficiency is defined for n >= 2, got {0}")]
    TooSmall(u64),
    #[error("empty range {lo}..={hi}")]
    EmptyRange { lo: u64, hi: u64 },
    #[error("trajectory of {n} did not reach 1 within {cap} steps")]
    Undetermined { n: u64, cap: u64 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EfficiencyRecord {
    pub n: u64,
    pub variant: Variant,
    pub ca_steps: u64,
    pub tst: u64,
    #[serde(skip)]
    pub ratio: Ratio<u64>,
}

impl EfficiencyRecord {
    pub fn csv_line(&self) -> String {
        format!(
            "{},{},{},{},{}",
            self.n,
            self.variant,
            self.ca_steps,
            self.tst,
            decimal(&to_big(self.ratio), DECIMAL_PLACES)
        )
    }
}

fn to_big(r: Ratio<u64>) -> BigRational {
    BigRational::new(BigInt::from(*r.numer()), BigInt::from(*r.denom()))
}

/// Steps of the variant's map from its start value to 1, over the plain
/// map's total stopping time. The start value is `n` for the base-3 and base-4
/// automata and the odd part of `n` for base 2.
pub fn n_efficiency(n: u64, variant: Variant) -> Result<EfficiencyRecord, MetricsError> {
    if n < 2 {
        return Err(MetricsError::TooSmall(n));
    }
    let big = BigUint::from(n);
    let map = variant.map();
    let undetermined = MetricsError::Undetermined { n, cap: DEFAULT_CAP };
    let ca_steps = digits::steps_to_one(map, &map.start(&big), DEFAULT_CAP).ok_or(undetermined.clone())?;
    let tst = digits::total_stopping_time(&big, DEFAULT_CAP).ok_or(undetermined)?;
    Ok(EfficiencyRecord { n, variant, ca_steps, tst, ratio: Ratio::new(ca_steps, tst) })
}

/// Per-input records for `lo..=hi`, in input order.
pub fn efficiency_range(lo: u64, hi: u64, variant: Variant) -> Result<Vec<EfficiencyRecord>, MetricsError> {
    if lo < 2 {
        return Err(MetricsError::TooSmall(lo));
    }
    if lo > hi {
        return Err(MetricsError::EmptyRange { lo, hi });
    }
    (lo..=hi).into_par_iter().map(|n| n_efficiency(n, variant)).collect()
}

/// Exact mean of the ratios.
pub fn mean(records: &[EfficiencyRecord]) -> BigRational {
    if records.is_empty() {
        return BigRational::zero();
    }
    let sum = records.par_iter().map(|r| to_big(r.ratio)).reduce(BigRational::zero, |a, b| a + b);
    sum / BigRational::from_integer(BigInt::from(records.len()))
}

/// Exact mean n-efficiency over `lo..=hi`.
pub fn average_efficiency(lo: u64, hi: u64, variant: Variant) -> Result<BigRational, MetricsError> {
    Ok(mean(&efficiency_range(lo, hi, variant)?))
}

/// Decimal rendering rounded half up to `places` digits.
pub fn decimal(r: &BigRational, places: usize) -> String {
    let scale = BigInt::from(10u32).pow(places as u32);
    let scaled = (r * BigRational::from_integer(scale.clone()) + BigRational::new(1.into(), 2.into())).floor();
    let q = scaled.to_integer();
    let int = &q / &scale;
    let frac = (&q % &scale).to_u64().unwrap_or(0);
    let mut out = int.to_string();
    if places > 0 {
        let _ = write!(out, ".{frac:0places$}");
    }
    out
}

/// Aggregate CSV line for a variant: `mean,<variant>,,,<mean>`.
pub fn aggregate_line(variant: Variant, mean: &BigRational) -> String {
    format!("mean,{variant},,,{}", decimal(mean, DECIMAL_PLACES))
}
