//! Refute the unsafe argmax benchmark: the inclusion check fails at every
//! cut, the deepest witness seeds the randomized pullback, and the first
//! input whose exact simulation violates the property is reported.
//!
//! ```bash
//! cargo run --release --example counterexample_search
//! ```

use perminv::driver::{verify, Outcome, VerifyConfig};
use perminv::io::{gen_benchmark, BenchMode};

fn main() -> perminv::Result<()> {
    let n = 4;
    let (net, prop) = gen_benchmark(n, BenchMode::Unsafe, 0.1)?;
    println!(
        "unsafe benchmark n={n}: cyclic input permutation {:?}, identity output permutation",
        prop.sigma_in
    );

    let mut config = VerifyConfig::default();
    config.cex.seed = 2024;
    let analysis = verify(&net, &prop, &config)?;
    println!("inclusion failed at cuts {:?}", analysis.verdict.failed_cuts);

    match &analysis.verdict.outcome {
        Outcome::Counterexample(x) => {
            println!("counterexample input: {x:?}");
            let direct = net.simulate(x)?;
            let permuted = net.simulate(&prop.permute_in(x))?;
            println!("N(x)          = {direct:?}");
            println!("N(sigma_in x) = {permuted:?}");
            println!(
                "max |sigma_out(N(x)) - N(sigma_in x)| = {:.3} > {}",
                prop.violation_by_simulation(&net, x)?,
                prop.tolerance
            );
        }
        other => println!("verdict: {other:?}"),
    }
    println!("search took {:.3}s", analysis.verdict.timings.cex_s);
    Ok(())
}
