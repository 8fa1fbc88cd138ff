//! File formats, region dumps, and the synthetic benchmark generator.
//!
//! Networks and properties are stored as JSON documents that any training
//! framework can emit: a network is a list of layers with `weights`
//! (`d_in` rows of `d_out` reals each) and `bias`; a property carries
//! `lower`, `upper`, `sigma_in`, `sigma_out` (0-based index arrays where
//! entry `t` gives the source index mapped to position `t`) and
//! `tolerance`. All reals are serialized in full round-trip precision.

use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::backward::{NegativePart, SafeSet};
use crate::driver::{Analysis, InvarianceProperty, Network};
use crate::error::{Error, Result};
use crate::geometry::AffineMap;
use crate::matrix::Matrix;

#[derive(Debug, Serialize, Deserialize)]
struct NetworkFile {
    layers: Vec<LayerFile>,
}

#[derive(Debug, Serialize, Deserialize)]
struct LayerFile {
    weights: Vec<Vec<f64>>,
    bias: Vec<f64>,
}

#[derive(Debug, Serialize, Deserialize)]
struct PropertyFile {
    lower: Vec<f64>,
    upper: Vec<f64>,
    sigma_in: Vec<usize>,
    sigma_out: Vec<usize>,
    tolerance: f64,
}

fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path).map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })?;
    serde_json::from_str(&text).map_err(|source| Error::Parse {
        path: path.to_path_buf(),
        source,
    })
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let text = serde_json::to_string_pretty(value).expect("serializable");
    fs::write(path, text + "\n").map_err(|source| Error::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Load and validate a network: layer dimensions must chain and every
/// entry must be finite. Errors name the offending layer.
pub fn load_network(path: &Path) -> Result<Network> {
    let file: NetworkFile = read_json(path)?;
    if file.layers.is_empty() {
        return Err(Error::Input(format!(
            "{}: network has an empty layer list",
            path.display()
        )));
    }
    let mut layers = Vec::with_capacity(file.layers.len());
    for (i, layer) in file.layers.iter().enumerate() {
        let weights = Matrix::from_rows(&layer.weights)
            .map_err(|e| Error::Input(format!("{}: layer {i} weights: {e}", path.display())))?;
        if weights.rows() == 0 || weights.cols() == 0 {
            return Err(Error::Input(format!(
                "{}: layer {i} has empty weights",
                path.display()
            )));
        }
        if !weights.is_finite() || !layer.bias.iter().all(|v| v.is_finite()) {
            return Err(Error::NonFinite(format!(
                "{}: layer {i} contains a non-finite entry",
                path.display()
            )));
        }
        let map = AffineMap::new(weights, layer.bias.clone())
            .map_err(|e| Error::Input(format!("{}: layer {i}: {e}", path.display())))?;
        layers.push(map);
    }
    Network::new(layers)
        .map_err(|e| Error::Input(format!("{}: {e}", path.display())))
}

pub fn save_network(path: &Path, net: &Network) -> Result<()> {
    let file = NetworkFile {
        layers: net
            .layers()
            .iter()
            .map(|layer| LayerFile {
                weights: layer.weights.iter_rows().map(<[f64]>::to_vec).collect(),
                bias: layer.bias.clone(),
            })
            .collect(),
    };
    write_json(path, &file)
}

/// Load and validate a property: bounds ordered and finite, permutations
/// bijective, tolerance strictly positive.
pub fn load_property(path: &Path) -> Result<InvarianceProperty> {
    let file: PropertyFile = read_json(path)?;
    let prop = InvarianceProperty {
        lower: file.lower,
        upper: file.upper,
        sigma_in: file.sigma_in,
        sigma_out: file.sigma_out,
        tolerance: file.tolerance,
    };
    // network-independent sanity; the network match happens in verify
    if prop.lower.len() != prop.upper.len() {
        return Err(Error::Input(format!(
            "{}: lower/upper lengths differ",
            path.display()
        )));
    }
    if prop.tolerance <= 0.0 || !prop.tolerance.is_finite() {
        return Err(Error::Input(format!(
            "{}: tolerance must be strictly positive",
            path.display()
        )));
    }
    for (i, (lo, hi)) in prop.lower.iter().zip(&prop.upper).enumerate() {
        if !lo.is_finite() || !hi.is_finite() {
            return Err(Error::NonFinite(format!(
                "{}: bound at index {i}",
                path.display()
            )));
        }
        if lo > hi {
            return Err(Error::Input(format!(
                "{}: lower bound exceeds upper at index {i}",
                path.display()
            )));
        }
    }
    let check_perm = |sigma: &[usize], n: usize, name: &str| {
        let mut seen = vec![false; n];
        for &s in sigma {
            if s >= n || seen[s] {
                return Err(Error::Input(format!(
                    "{}: {name} is not a bijection",
                    path.display()
                )));
            }
            seen[s] = true;
        }
        if sigma.len() != n {
            return Err(Error::Input(format!(
                "{}: {name} has wrong length",
                path.display()
            )));
        }
        Ok(())
    };
    check_perm(&prop.sigma_in, prop.lower.len(), "sigma_in")?;
    check_perm(&prop.sigma_out, prop.sigma_out.len(), "sigma_out")?;
    Ok(prop)
}

pub fn save_property(path: &Path, prop: &InvarianceProperty) -> Result<()> {
    let file = PropertyFile {
        lower: prop.lower.clone(),
        upper: prop.upper.clone(),
        sigma_in: prop.sigma_in.clone(),
        sigma_out: prop.sigma_out.clone(),
        tolerance: prop.tolerance,
    };
    write_json(path, &file)
}

/// Whether the generated property uses the matching cyclic output
/// permutation (safe) or the identity (unsafe, forcing counterexamples).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BenchMode {
    Safe,
    Unsafe,
}

/// Hand-crafted argmax benchmark family.
///
/// For `n` inputs the network has layers of sizes `2n(n−1)`, `n(n−1)` and
/// `n`. Layer 1 holds two neurons per ordered pair `(i, j)`, `i ≠ j`, in
/// lexicographic order, with pre-ReLU inputs `1000(x_i − x_j)` and
/// `1000(x_i − x_j) − 1`; layer 2 subtracts them pairwise; layer 3 feeds
/// `2 Σ_j r_{i,j} − 2n + 3` into output `i`. Output `i` is 1 exactly when
/// input `i` beats every other input by a clear margin. The property uses
/// bounds `[0,1]^n`, the cyclic input permutation sending input `i` to
/// position `i+1`, and the matching cyclic (safe) or identity (unsafe)
/// output permutation with the given tolerance.
pub fn gen_benchmark(
    n: usize,
    mode: BenchMode,
    epsilon: f64,
) -> Result<(Network, InvarianceProperty)> {
    if n < 2 {
        return Err(Error::Input(format!(
            "benchmark needs at least 2 inputs, got {n}"
        )));
    }
    let pairs: Vec<(usize, usize)> = (0..n)
        .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let p = pairs.len(); // n(n-1)

    // layer 1: p_{ij} and q_{ij} per ordered pair
    let mut w1 = Matrix::zeros(n, 2 * p);
    let mut b1 = vec![0.0; 2 * p];
    for (idx, &(i, j)) in pairs.iter().enumerate() {
        for col in [2 * idx, 2 * idx + 1] {
            w1.set(i, col, 1000.0);
            w1.set(j, col, -1000.0);
        }
        b1[2 * idx + 1] = -1.0;
    }

    // layer 2: r_{ij} = p_{ij} - q_{ij}
    let mut w2 = Matrix::zeros(2 * p, p);
    for idx in 0..p {
        w2.set(2 * idx, idx, 1.0);
        w2.set(2 * idx + 1, idx, -1.0);
    }
    let b2 = vec![0.0; p];

    // layer 3: s_i = 2 Σ_j r_{ij} - 2n + 3
    let mut w3 = Matrix::zeros(p, n);
    for (idx, &(i, _)) in pairs.iter().enumerate() {
        w3.set(idx, i, 2.0);
    }
    let b3 = vec![-2.0 * n as f64 + 3.0; n];

    let net = Network::new(vec![
        AffineMap::new(w1, b1)?,
        AffineMap::new(w2, b2)?,
        AffineMap::new(w3, b3)?,
    ])?;

    // cyclic permutation: position t takes source t-1
    let cyclic: Vec<usize> = (0..n).map(|t| (t + n - 1) % n).collect();
    let sigma_out = match mode {
        BenchMode::Safe => cyclic.clone(),
        BenchMode::Unsafe => (0..n).collect(),
    };
    let prop = InvarianceProperty {
        lower: vec![0.0; n],
        upper: vec![1.0; n],
        sigma_in: cyclic,
        sigma_out,
        tolerance: epsilon,
    };
    Ok((net, prop))
}

/// Total neuron count of a generated benchmark network.
pub fn benchmark_size(n: usize) -> usize {
    2 * n * (n - 1) + n * (n - 1) + n
}

#[derive(Serialize)]
struct RegionDump<'a> {
    cut: usize,
    basis: Vec<&'a [f64]>,
    center: &'a [f64],
}

#[derive(Serialize)]
struct PolytopeDump<'a> {
    cut: usize,
    lhs: Vec<&'a [f64]>,
    ub: &'a [f64],
    negative: Option<NegativeDump<'a>>,
}

#[derive(Serialize)]
enum NegativeDump<'a> {
    #[serde(rename = "box")]
    Box { eta: &'a [f64] },
    #[serde(rename = "quadrant")]
    Quadrant {
        zeroed: &'a [bool],
        lhs: Vec<&'a [f64]>,
        ub: &'a [f64],
    },
}

/// Write per-cut reach bases/centers and safe polytopes into `dir` as
/// `reach_<cut>.json` / `safe_<cut>.json`.
pub fn dump_regions(dir: &Path, analysis: &Analysis) -> Result<()> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    for (cut, region) in analysis.reach.iter().enumerate() {
        let dump = RegionDump {
            cut,
            basis: region.basis().iter_rows().collect(),
            center: region.center(),
        };
        write_json(&dir.join(format!("reach_{cut}.json")), &dump)?;
    }
    for (cut, safe) in analysis.safe.iter().enumerate() {
        let Some(SafeSet { positive, negative }) = safe else {
            continue;
        };
        let dump = PolytopeDump {
            cut,
            lhs: positive.lhs().iter_rows().collect(),
            ub: positive.ub(),
            negative: negative.as_ref().map(|neg| match neg {
                NegativePart::Box { eta } => NegativeDump::Box { eta },
                NegativePart::Quadrant { zeroed, polytope } => NegativeDump::Quadrant {
                    zeroed,
                    lhs: polytope.lhs().iter_rows().collect(),
                    ub: polytope.ub(),
                },
            }),
        };
        write_json(&dir.join(format!("safe_{cut}.json")), &dump)?;
    }
    Ok(())
}
