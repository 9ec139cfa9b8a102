//! Mean logical clock cycle against photon loss.
//!
//! cargo run --release --example clock_cycle

use sffcc::chronology::tau_bounds;
use sffcc::fusion::{EmissionSchedule, RusPolicy};
use sffcc::montecarlo::run_clock;
use sffcc::noise::NoiseParams;
use sffcc::LatticeSpec;

fn main() -> sffcc::Result<()> {
    let (l, n) = (3, 8);
    let spec = LatticeSpec::new(l)?;
    // Finished emitters idle with buffer pulses until the slowest fusion ends.
    let policy = RusPolicy { n, schedule: EmissionSchedule::OnDemand, ..RusPolicy::default() };
    let (lo, hi) = tau_bounds(l as u64, n as u64);
    println!("bounds: {lo}..={hi} tau_echo");
    for loss in [0.0, 0.04, 0.08, 0.12] {
        let noise = NoiseParams { p_loss: loss, ..NoiseParams::default() };
        let t = run_clock(&spec, &policy, &noise, 500, 3)?;
        println!(
            "loss {loss:.2}: tau_logical = {:.1} +- {:.1} tau_echo = {:.2} us at 29 ns",
            t.mean_tau(),
            t.tau_sem(),
            t.mean_tau() * 29e-3
        );
    }
    Ok(())
}
