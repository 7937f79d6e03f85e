// Writes stabilized grids as text snapshots and PGM images. The first
// argument is the output directory (default: the system temp directory).

use std::path::Path;

use collatz_ca::engine::{self, RunConfig};
use collatz_ca::render;
use collatz_ca::{Grid, Variant};
use num_bigint::BigUint;

pub fn write_images(n: u32, dir: &Path) -> Result<(), Box<dyn std::error::Error>> {
    let n = BigUint::from(n);
    for variant in Variant::ALL {
        let rows = engine::run_single(&n, &RunConfig::new(variant))?.iterates.len();
        let mut grid = Grid::new(variant, &n, 0);
        grid.run_until_rows_stable(rows - 1, engine::DEFAULT_TICK_CAP)?;
        let path = dir.join(format!("{variant}-{n}.pgm"));
        std::fs::write(&path, render::pgm(&grid, rows)?)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let mut grid = Grid::new(Variant::Ca1, &BigUint::from(7u32), 0);
    grid.run_until_rows_stable(15, engine::DEFAULT_TICK_CAP)?;
    print!("{}", render::snapshot(&grid, 16)?);
    let dir = std::env::temp_dir().join("collatz-ca-render");
    std::fs::create_dir_all(&dir)?;
    write_images(27, &dir)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args().nth(1).map_or_else(std::env::temp_dir, Into::into);
    std::fs::create_dir_all(&dir)?;
    write_images(7, &dir)?;
    write_images(27, &dir)
}
