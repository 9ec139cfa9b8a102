//! Gaussian Overhauser model against Markovian spin-Z sampling.
//!
//! cargo run --release --example dephasing_fidelity

use sffcc::dephasing::{stochastic_infidelity, t2star_requirement};

fn main() -> sffcc::Result<()> {
    let n = 8;
    let ms: Vec<usize> = (1..=8).collect();
    for p in [0.001, 0.01, 0.03] {
        println!("p_Z = {p}");
        for pt in stochastic_infidelity(p, n, &ms, 20_000, 5)? {
            println!(
                "  M={}  analytic {:.4}  sampled {:.4} (sd {:.3}, {:.2} sd apart)",
                pt.m,
                pt.analytic_infidelity,
                pt.stochastic_infidelity,
                pt.std_dev,
                pt.deviation_sigma()
            );
        }
    }
    println!("T2* needed at p_Z = 0.6%, N = 10: {:.2} emission rounds", t2star_requirement(0.006, 10, 1.0)?);
    Ok(())
}
