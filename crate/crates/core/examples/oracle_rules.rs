//! Checks the Pauli-frame fault rules against a state-vector evolution.
//!
//! cargo run --example oracle_rules

use std::collections::BTreeMap;

use sffcc::oracle::{verify_rules, Verdict};

fn main() -> sffcc::Result<()> {
    let checks = verify_rules(3, 2)?;
    let mut tally: BTreeMap<String, (usize, usize)> = BTreeMap::new();
    for c in &checks {
        let verdict = match &c.verdict {
            Verdict::Exact => "exact",
            Verdict::Loss { .. } => "loss",
            Verdict::PauliWithDephasing { .. } => "pauli+dephasing",
            Verdict::Mismatch { .. } => "MISMATCH",
        };
        let e = tally.entry(format!("{:?} -> {verdict}", c.fault.kind)).or_default();
        e.0 += 1;
        e.1 += c.verdict.passed() as usize;
    }
    for (k, (n, ok)) in tally {
        println!("{k:<40} {ok}/{n}");
    }
    Ok(())
}
