//! Verify the hand-built 2→4→2 "flip" network: swapping the two inputs
//! swaps the two outputs up to 0.1. The inclusion check succeeds directly
//! at the output cut, so no backward propagation is needed for the proof.
//!
//! ```bash
//! cargo run --example verify_flip
//! ```

use perminv::driver::{verify, InvarianceProperty, Network, Outcome, VerifyConfig};
use perminv::{AffineMap, Matrix};

fn main() -> perminv::Result<()> {
    let g = 1000.0;
    let net = Network::new(vec![
        AffineMap::new(
            Matrix::from_rows(&[vec![g, -g, g, -g], vec![-g, g, -g, g]])?,
            vec![0.0, 0.0, -1.0, -1.0],
        )?,
        AffineMap::new(
            Matrix::from_rows(&[
                vec![1.0, 0.0],
                vec![0.0, 1.0],
                vec![-1.0, 0.0],
                vec![0.0, -1.0],
            ])?,
            vec![0.0, 0.0],
        )?,
    ])?;
    let prop = InvarianceProperty {
        lower: vec![0.0, 0.0],
        upper: vec![1.0, 1.0],
        sigma_in: vec![1, 0],
        sigma_out: vec![1, 0],
        tolerance: 0.1,
    };

    let analysis = verify(&net, &prop, &VerifyConfig::default())?;
    match &analysis.verdict.outcome {
        Outcome::Holds => println!(
            "property holds, proved at cut {} of {}",
            analysis.verdict.proved_at_cut.unwrap(),
            analysis.product.layers.len()
        ),
        other => println!("unexpected verdict: {other:?}"),
    }
    for (cut, region) in analysis.reach.iter().enumerate() {
        println!(
            "reach[{cut}]: dimension {}, {} generators",
            region.dim(),
            region.generators()
        );
    }
    println!(
        "phases: forward {:.4}s, backward {:.4}s, inclusion {:.4}s",
        analysis.verdict.timings.forward_s,
        analysis.verdict.timings.backward_s,
        analysis.verdict.timings.inclusion_s
    );
    Ok(())
}
