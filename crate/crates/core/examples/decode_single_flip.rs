//! Flips one fusion outcome, shows its two defects and decodes it.
//!
//! cargo run --example decode_single_flip

use sffcc::decoder::{Decoder, DecoderConfig};
use sffcc::{LatticeSpec, SyndromeGraph};

fn main() -> sffcc::Result<()> {
    let graph = SyndromeGraph::new(LatticeSpec::new(3)?);
    let decoder = Decoder::new(&graph, DecoderConfig::default());
    let n = graph.num_outcomes();
    println!("L=3: {} outcomes, {} checks, {} logical surfaces", n, graph.checks().len(), decoder.num_surfaces());
    let mut flipped = vec![false; n];
    let erased = vec![false; n];
    flipped[n / 2] = true;
    let defects: Vec<usize> =
        graph.syndrome(&flipped).iter().enumerate().filter(|(_, &d)| d).map(|(i, _)| i).collect();
    println!("outcome {} flipped -> defects at checks {:?}", n / 2, defects);
    let v = decoder.decode(&flipped, &erased)?;
    println!("logical error: {}, logical erasure: {}", v.logical_error, v.logical_erasure);

    // Erase a handful of outcomes; supercells merge the checks around them.
    let mut erased = vec![false; n];
    for o in (0..n).step_by(97) {
        erased[o] = true;
    }
    let v = decoder.decode(&flipped, &erased)?;
    println!("with {} erasures: failed = {}", erased.iter().filter(|&&e| e).count(), v.failed());
    Ok(())
}
