// Runs each automaton on 7 and prints the rows it computes, next to the
// compressed map it is meant to follow.

use collatz_ca::engine::{self, RunConfig};
use collatz_ca::render;
use collatz_ca::{Grid, Variant};
use num_bigint::BigUint;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let n = BigUint::from(7u32);
    for variant in Variant::ALL {
        let record = engine::run_single(&n, &RunConfig::new(variant))?;
        let rows: Vec<String> = record.iterates.iter().map(ToString::to_string).collect();
        println!("{variant} ({:?}, base {}): {}", variant.map(), variant.base().radix(), rows.join(", "));

        let expected = engine::expected_rows(&n, variant, 1_000);
        assert_eq!(record.iterates, expected, "{variant} left its map");
    }

    // The base-2 grid itself: every row is 3x+1 with its trailing zeros gone.
    let mut grid = Grid::new(Variant::Ca3, &n, 0);
    grid.run_until_rows_stable(6, engine::DEFAULT_TICK_CAP)?;
    print!("{}", render::snapshot(&grid, 7)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
