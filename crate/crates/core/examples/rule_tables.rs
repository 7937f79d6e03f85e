// Learns the evolution laws from arithmetic trajectories and compares them
// with the closed-form transition functions.

use collatz_ca::rules::{self, expected_law_count, Cell, Neighborhood, Parity};
use collatz_ca::Variant;

pub fn summarize(n_max: u64) -> Result<(), Box<dyn std::error::Error>> {
    for variant in Variant::ALL {
        for table in rules::learn_rule_tables(variant, n_max)? {
            let report = rules::check_rule_consistency(&table);
            println!(
                "{}: {} neighbourhoods, {} mismatches, coverage {}",
                table.kind(),
                report.entries,
                report.mismatches.len(),
                if report.coverage_ok { "ok" } else { "insufficient" }
            );
            for c in &report.categories {
                let want =
                    expected_law_count(table.kind(), c.category).map_or(String::new(), |w| format!(" (want {w})"));
                println!("  {:<15} {:>4} laws{want}", c.category.name(), c.laws);
            }
        }
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    // A single base-4 law: the even row 4*1+2 = 6 doubles to 12 = 30 in base 4.
    let law = Neighborhood::Ca2 {
        above: Cell::Tagged(1, Parity::Even),
        above_right: Cell::Tagged(2, Parity::Even),
        right: Cell::Tagged(0, Parity::Odd),
    };
    println!("{law} -> {}", law.transition());
    summarize(512)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let n_max = std::env::args().nth(1).map(|a| a.parse()).transpose()?.unwrap_or(rules::DEFAULT_LEARN_MAX);
    summarize(n_max)
}
