// Checks every input in a range against the arithmetic trajectories, in both
// scheduling modes. Pass the upper bound as the first argument (default 512).

use collatz_ca::engine::{self, RunConfig};
use collatz_ca::{Mode, Variant};
use num_bigint::BigUint;
use rayon::prelude::*;

pub fn verify_range(hi: u64) -> Result<usize, Box<dyn std::error::Error>> {
    let mut failures = 0;
    for variant in Variant::ALL {
        for mode in [Mode::Frontier, Mode::Synchronous] {
            let cfg = RunConfig::new(variant).with_mode(mode);
            let reports = (2..=hi)
                .into_par_iter()
                .map(|n| engine::verify_against_oracle(&BigUint::from(n), &cfg))
                .collect::<Result<Vec<_>, _>>()?;
            let bad: Vec<_> = reports.iter().filter(|r| !r.matched).collect();
            let rows: usize = reports.iter().map(|r| r.rows_compared).sum();
            println!("{variant} {mode}: {} inputs, {rows} rows, {} mismatches", reports.len(), bad.len());
            for r in bad.iter().take(5) {
                println!("  {} diverges at {:?}", r.input, r.first_divergence);
            }
            failures += bad.len();
        }
    }
    Ok(failures)
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let failures = verify_range(128)?;
    assert_eq!(failures, 0);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hi = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(512);
    let failures = verify_range(hi)?;
    if failures > 0 {
        return Err(format!("{failures} mismatches").into());
    }
    Ok(())
}
