//! Command-line front end. Exit codes are a stable contract:
//! 0 = property holds, 1 = counterexample found, 2 = inconclusive,
//! 3 = usage or input error.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use perminv::driver::{self, Outcome, VerifyConfig};
use perminv::{io, BenchMode};

#[derive(Parser)]
#[command(name = "perminv", version, about = "Permutation-invariance verifier for ReLU networks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Verify a permutation-invariance property of a network.
    Verify {
        /// Network file (JSON).
        #[arg(long)]
        network: PathBuf,
        /// Property file (JSON).
        #[arg(long)]
        property: PathBuf,
        /// Seed of the randomized counterexample search.
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Sample budget per pullback hop.
        #[arg(long, default_value_t = 10_000)]
        cex_samples: usize,
        /// Distance budget of the counterexample pullback (scaled down by
        /// the layer count internally).
        #[arg(long, default_value_t = 1.0)]
        cex_distance: f64,
        /// Slack tolerance of the inclusion checks.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
        /// Dump per-cut reach/safe regions into this directory.
        #[arg(long, value_name = "DIR")]
        dump_regions: Option<PathBuf>,
        /// Emit the verdict as JSON on stdout.
        #[arg(long)]
        json: bool,
    },
    /// Run a network on one input vector and print the output.
    Simulate {
        /// Network file (JSON).
        #[arg(long)]
        network: PathBuf,
        /// Comma-separated input values, e.g. "0.5,0".
        #[arg(long)]
        input: String,
    },
    /// Generate a synthetic argmax benchmark network and property.
    GenBench {
        /// Number of network inputs (at least 2).
        #[arg(long)]
        inputs: usize,
        /// Safe (cyclic output permutation) or unsafe (identity).
        #[arg(long, value_enum)]
        mode: Mode,
        /// Property tolerance epsilon.
        #[arg(long)]
        epsilon: f64,
        /// Output path of the network file.
        #[arg(long)]
        out_network: PathBuf,
        /// Output path of the property file.
        #[arg(long)]
        out_property: PathBuf,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Mode {
    Safe,
    Unsafe,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(3)
        }
    }
}

fn run(cli: Cli) -> perminv::Result<ExitCode> {
    match cli.command {
        Command::Verify {
            network,
            property,
            seed,
            cex_samples,
            cex_distance,
            tol,
            dump_regions,
            json,
        } => {
            let net = io::load_network(&network)?;
            let prop = io::load_property(&property)?;
            let config = VerifyConfig {
                inclusion_tol: tol,
                cex: perminv::CexConfig {
                    seed,
                    samples: cex_samples,
                    distance: cex_distance,
                },
                ..VerifyConfig::default()
            };
            let analysis = driver::verify(&net, &prop, &config)?;
            if let Some(dir) = dump_regions {
                io::dump_regions(&dir, &analysis)?;
            }
            let verdict = &analysis.verdict;
            if json {
                println!(
                    "{}",
                    serde_json::to_string_pretty(verdict).expect("verdict serializes")
                );
            } else {
                match &verdict.outcome {
                    Outcome::Holds => println!(
                        "property holds (inclusion proved at cut {})",
                        verdict.proved_at_cut.expect("holds implies a cut")
                    ),
                    Outcome::Counterexample(input) => {
                        println!("counterexample: {}", join(input))
                    }
                    Outcome::Inconclusive => println!("inconclusive"),
                }
                println!(
                    "timings: forward {:.3}s, backward {:.3}s, inclusion {:.3}s, cex {:.3}s",
                    verdict.timings.forward_s,
                    verdict.timings.backward_s,
                    verdict.timings.inclusion_s,
                    verdict.timings.cex_s
                );
            }
            Ok(match verdict.outcome {
                Outcome::Holds => ExitCode::SUCCESS,
                Outcome::Counterexample(_) => ExitCode::from(1),
                Outcome::Inconclusive => ExitCode::from(2),
            })
        }
        Command::Simulate { network, input } => {
            let net = io::load_network(&network)?;
            let values: Vec<f64> = input
                .split(',')
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| perminv::Error::Input(format!("bad input value {s:?}: {e}")))
                })
                .collect::<perminv::Result<_>>()?;
            let out = net.simulate(&values)?;
            println!("{}", join(&out));
            Ok(ExitCode::SUCCESS)
        }
        Command::GenBench {
            inputs,
            mode,
            epsilon,
            out_network,
            out_property,
        } => {
            let mode = match mode {
                Mode::Safe => BenchMode::Safe,
                Mode::Unsafe => BenchMode::Unsafe,
            };
            let (net, prop) = io::gen_benchmark(inputs, mode, epsilon)?;
            io::save_network(&out_network, &net)?;
            io::save_property(&out_property, &prop)?;
            println!(
                "wrote {} (layers {:?}) and {}",
                out_network.display(),
                net.layers()
                    .iter()
                    .map(perminv::AffineMap::dim_out)
                    .collect::<Vec<_>>(),
                out_property.display()
            );
            Ok(ExitCode::SUCCESS)
        }
    }
}

fn join(values: &[f64]) -> String {
    values
        .iter()
        .map(f64::to_string)
        .collect::<Vec<_>>()
        .join(",")
}
