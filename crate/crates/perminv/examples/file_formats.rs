//! Save, reload and verify a network/property pair through the JSON file
//! formats, then dump the per-cut regions for inspection.
//!
//! ```bash
//! cargo run --example file_formats
//! ```

use perminv::driver::{verify, VerifyConfig};
use perminv::io::{
    dump_regions, gen_benchmark, load_network, load_property, save_network, save_property,
    BenchMode,
};

fn main() -> perminv::Result<()> {
    let dir = std::env::temp_dir().join("perminv-example");
    std::fs::create_dir_all(&dir).expect("temp dir");
    let net_path = dir.join("argmax3.json");
    let prop_path = dir.join("cyclic3.json");

    let (net, prop) = gen_benchmark(3, BenchMode::Safe, 0.1)?;
    save_network(&net_path, &net)?;
    save_property(&prop_path, &prop)?;
    println!("wrote {} and {}", net_path.display(), prop_path.display());

    let net = load_network(&net_path)?;
    let prop = load_property(&prop_path)?;
    let analysis = verify(&net, &prop, &VerifyConfig::default())?;
    println!("verdict after the round-trip: {:?}", analysis.verdict.outcome);

    let regions = dir.join("regions");
    dump_regions(&regions, &analysis)?;
    let mut names: Vec<_> = std::fs::read_dir(&regions)
        .expect("dump dir")
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    names.sort();
    println!("dumped {} region files: {names:?}", names.len());
    Ok(())
}
