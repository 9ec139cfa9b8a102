//! Converts channel thresholds into hardware targets.
//!
//! cargo run --example benchmarks

use sffcc::chronology::{convert_benchmarks, Thresholds};

fn main() -> sffcc::Result<()> {
    for b in convert_benchmarks(&Thresholds::reported())? {
        println!("{:<17} threshold {:<8} requires {}", b.quantity, b.threshold, b.requirement);
    }
    Ok(())
}
