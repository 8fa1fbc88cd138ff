//! Generate the synthetic argmax benchmark family and verify the cyclic
//! invariance property in both modes: the safe variant (cyclic output
//! permutation) proves, the unsafe variant (identity output permutation)
//! refutes with a concrete input.
//!
//! ```bash
//! cargo run --release --example argmax_benchmark
//! ```

use std::time::Instant;

use perminv::driver::{verify, Outcome, VerifyConfig};
use perminv::io::{benchmark_size, gen_benchmark, BenchMode};

fn main() -> perminv::Result<()> {
    for n in 3..=6 {
        for mode in [BenchMode::Safe, BenchMode::Unsafe] {
            let (net, prop) = gen_benchmark(n, mode, 0.1)?;
            let start = Instant::now();
            let analysis = verify(&net, &prop, &VerifyConfig::default())?;
            let elapsed = start.elapsed().as_secs_f64();
            let verdict = match &analysis.verdict.outcome {
                Outcome::Holds => format!(
                    "holds (cut {})",
                    analysis.verdict.proved_at_cut.unwrap()
                ),
                Outcome::Counterexample(x) => {
                    let vio = prop.violation_by_simulation(&net, x)?;
                    format!("counterexample, |difference| = {vio:.3}")
                }
                Outcome::Inconclusive => "inconclusive".to_string(),
            };
            println!(
                "n={n} size={:3} {:6}: {verdict} in {elapsed:.3}s",
                benchmark_size(n),
                format!("{mode:?}").to_lowercase(),
            );
        }
    }
    Ok(())
}
