//! Hardware counts for a few code distances and the timing constraint check.
//!
//! cargo run --example resources_and_timing

use sffcc::chronology::{check_timing, count_resources, optical_depth, TimingParams};

fn main() -> sffcc::Result<()> {
    for ebf in [false, true] {
        println!("ebf = {ebf}, optical depth {:?}", optical_depth(ebf));
        for l in [3, 5, 7] {
            let r = count_resources(l, ebf)?;
            println!(
                "  L={l}: {} sources, {} detectors, {} active PS, {} passive BS, {} fusion gates, {} EOMs",
                r.eps_units, r.photodetectors, r.active_phase_shifters, r.passive_beamsplitters,
                r.fusion_gates, r.fibre_eoms
            );
        }
    }
    for (name, p) in [("reference", TimingParams::reference()), ("consistent", TimingParams::consistent())] {
        println!("{name}:");
        for c in check_timing(&p) {
            println!("  {:<45} {} ({:+.2} ns)", c.constraint, if c.satisfied { "ok" } else { "VIOLATED" }, c.margin);
        }
    }
    Ok(())
}
