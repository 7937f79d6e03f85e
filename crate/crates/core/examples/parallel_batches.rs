// Many inputs at once: independent grids on the worker pool, or one shared
// grid with empty columns between the inputs.

use collatz_ca::engine::{self, BatchConfig, BatchMode, EngineError, RunConfig};
use collatz_ca::Variant;
use num_bigint::BigUint;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let run = RunConfig::new(Variant::Ca3);
    let inputs: Vec<BigUint> = [183u64, 120_767, 53_132_499].map(BigUint::from).to_vec();

    let stacked = engine::run_batch(&BatchConfig::new(inputs.clone(), BatchMode::Stacked), &run)?;
    let shared = engine::run_batch(&BatchConfig::new(inputs.clone(), BatchMode::Shared), &run)?;
    println!(
        "auto spacing starts at {} columns",
        engine::auto_spacing(&inputs, Variant::Ca3, engine::DEFAULT_GUARD_GAP)
    );
    for (s, t) in shared.iter().zip(&stacked) {
        println!("{}: {} rows to 1, shared grid ticks {}", s.input, s.ca_steps_to_one.unwrap_or(0), s.ticks_used);
        assert_eq!(s.iterates, t.iterates);
    }

    // Without room between them the trajectories run into each other.
    let tight = BatchConfig::new(inputs, BatchMode::Shared).with_spacings(vec![0, 0]);
    match engine::run_batch(&tight, &run) {
        Err(EngineError::Collision(c)) => println!("zero spacing: {c}"),
        other => return Err(format!("expected a collision, got {other:?}").into()),
    }

    let range: Vec<BigUint> = (2..=1001u32).map(BigUint::from).collect();
    let records = engine::run_batch_stacked(&range, &run);
    let longest = records.iter().flatten().max_by_key(|r| r.ca_steps_to_one).ok_or("empty batch")?;
    println!("longest base-2 run in [2, 1001]: {} with {:?} rows", longest.input, longest.ca_steps_to_one);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
