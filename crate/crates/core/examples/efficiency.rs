// Average n-efficiency of each automaton: steps of its map to reach 1 over
// the plain map's total stopping time. Pass the upper bound as the first
// argument (default 2^14).

use collatz_ca::metrics;
use collatz_ca::Variant;

pub fn report(hi: u64) -> Result<(), Box<dyn std::error::Error>> {
    for variant in Variant::ALL {
        let records = metrics::efficiency_range(2, hi, variant)?;
        let mean = metrics::mean(&records);
        let best = records.iter().min_by_key(|r| r.ratio).ok_or("empty range")?;
        println!(
            "{variant}: mean {} over [2, {hi}], lowest ratio {} at n = {}",
            metrics::decimal(&mean, 4),
            best.ratio,
            best.n
        );
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    println!("{}", metrics::CSV_HEADER);
    for variant in Variant::ALL {
        println!("{}", metrics::n_efficiency(27, variant)?.csv_line());
    }
    report(1000)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let hi = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(1 << 14);
    report(hi)
}
