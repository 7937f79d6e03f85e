// Arithmetic side of the crate: digit strings, the compressed maps and the
// stopping-time statistics the automata are checked against.

use collatz_ca::digits::{self, MapVariant, DEFAULT_CAP};
use collatz_ca::engine::{self, TrajectoryClass};
use collatz_ca::Variant;
use num_bigint::BigUint;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let n = BigUint::from(27u32);
    for radix in [2, 3, 4] {
        let ds = digits::to_digits(&n, radix)?;
        println!("27 in base {radix}: {:?} (least significant first)", ds.digits());
        assert_eq!(digits::from_digits(&ds), n);
    }

    for map in [MapVariant::T, MapVariant::T1, MapVariant::T2, MapVariant::T3] {
        let steps = digits::steps_to_one(map, &map.start(&n), DEFAULT_CAP).ok_or("27 should converge")?;
        println!("{map:?}: {steps} steps from 27 to 1");
    }
    println!(
        "total stopping time {}, stopping time {}",
        digits::total_stopping_time(&n, DEFAULT_CAP).ok_or("no tst")?,
        digits::stopping_time(&n, DEFAULT_CAP).ok_or("no stopping time")?
    );

    // Cycle detection runs on the arithmetic map, not on a grid.
    let big = BigUint::parse_bytes(b"295147905179352825855", 10).ok_or("bad literal")?;
    for variant in Variant::ALL {
        let class = engine::classify_trajectory(&big, variant, 100_000);
        println!("2^68 - 1 under {variant}: {class:?}");
        assert_eq!(class, TrajectoryClass::Convergent);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
