//! Loss threshold at N = 8 from two small lattices.
//!
//! cargo run --release --example threshold_loss

use sffcc::montecarlo::{sweep_n, ExperimentPlan};
use sffcc::noise::Channel;

fn main() -> sffcc::Result<()> {
    let plan = ExperimentPlan {
        distances: vec![3, 5],
        attempts: vec![8],
        channel: Channel::Loss,
        grid: vec![0.06, 0.07, 0.08, 0.09],
        trials: 1000,
        seed: 11,
        noise: Default::default(),
        policy: Default::default(),
        decoder: Default::default(),
        blink_sum: 1.0,
        bootstrap: 100,
    };
    let (rows, sweep) = sweep_n(&plan)?;
    for r in &rows {
        println!("L={} loss={:.3}  P_fail={:.4}  [{:.4}, {:.4}]", r.l, r.x, r.rate, r.ci_low, r.ci_high);
    }
    for (n, t) in &sweep.points {
        match t {
            Some(t) => println!("N={n}: threshold {:.4} +- {:.4}", t.estimate, t.std_err),
            None => println!("N={n}: curves do not cross in the grid"),
        }
    }
    Ok(())
}
