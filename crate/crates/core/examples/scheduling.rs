// Synchronous stepping against frontier scheduling: both reach the same
// grid, the frontier evaluates each cell once.

use collatz_ca::engine;
use collatz_ca::{Grid, Mode, Variant};
use num_bigint::BigUint;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let n = BigUint::from(27u32);
    for variant in Variant::ALL {
        let rows = engine::expected_rows(&n, variant, 10_000).len();
        let mut results = Vec::new();
        for mode in [Mode::Synchronous, Mode::Frontier] {
            let mut grid = Grid::new(variant, &n, 0).with_mode(mode);
            grid.run_until_rows_stable(rows - 1, engine::DEFAULT_TICK_CAP)?;
            println!(
                "{variant} {mode:<11}: {rows} rows final after {} ticks, {} cell evaluations",
                grid.ticks(),
                grid.evaluations()
            );
            results.push(grid.rows()[..rows].to_vec());
        }
        assert_eq!(results[0], results[1]);
    }

    // Watching a single grid settle row by row.
    let mut grid = Grid::new(Variant::Ca2, &BigUint::from(7u32), 0);
    grid.ensure_rows(8);
    while grid.rows_final() < 9 {
        let s = grid.step();
        println!("tick {:>2}: {:>2} cells final this tick, {} rows final", s.tick, s.cells_changed, s.rows_stable);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
