//! Plain simulation of a benchmark network, showing the argmax behaviour
//! and a pointwise check of the invariance property at a few inputs.
//!
//! ```bash
//! cargo run --example simulate_network
//! ```

use perminv::io::{gen_benchmark, BenchMode};

fn main() -> perminv::Result<()> {
    let (net, prop) = gen_benchmark(3, BenchMode::Safe, 0.1)?;
    println!(
        "argmax network: 3 inputs, layers {:?}",
        net.layers()
            .iter()
            .map(perminv::AffineMap::dim_out)
            .collect::<Vec<_>>()
    );

    for x in [
        vec![0.9, 0.1, 0.2],
        vec![0.1, 0.8, 0.3],
        vec![0.25, 0.5, 1.0],
        vec![0.5, 0.5, 0.5],
    ] {
        let y = net.simulate(&x)?;
        let violation = prop.violation_by_simulation(&net, &x)?;
        println!("N({x:?}) = {y:?}   cyclic-invariance deviation {violation:.3}");
    }

    // per-cut states of one trace
    let states = net.simulate_cuts(&[0.9, 0.1, 0.2])?;
    for (cut, s) in states.iter().enumerate() {
        println!("cut {cut}: {} values, max {:.1}", s.len(), s.iter().fold(0.0f64, |m, v| m.max(*v)));
    }
    Ok(())
}
