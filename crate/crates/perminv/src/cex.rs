//! Counterexample construction: approximate layer-by-layer pullback of an
//! inclusion-failure witness, followed by exact forward simulation.
//!
//! Pulling a witness back exactly is as hard as pulling back the whole
//! postcondition, so the search is randomized: sample points of the
//! previous cut's reach region, nudge their coefficients toward hitting the
//! target by one exact least-squares step, and keep those whose one-layer
//! image lands close enough. Only inputs that survive all the way to cut 0
//! are ever reported, and then only after a full exact simulation refutes
//! the property, so the verdict never depends on the approximation
//! machinery.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::driver::{InvarianceProperty, ProductNetwork};
use crate::geometry::{AffineMap, AffineRegion, ConvexPolytope};
use crate::linalg::solve_spd;
use crate::matrix::{self, Matrix};

/// One exact layer: `ReLU(x W + b)`.
pub fn simulate_layer(x: &[f64], layer: &AffineMap) -> Vec<f64> {
    matrix::relu(&layer.apply(x).expect("dimension checked by caller"))
}

/// Candidate list cap between pullback hops; prevents multiplicative
/// blow-up across layers.
const HOP_CANDIDATE_CAP: usize = 256;
/// Floor on per-target samples when the total budget is split.
const MIN_SAMPLES_PER_TARGET: usize = 32;

/// Search outcome of the spuriousness check.
#[derive(Debug, Clone)]
pub enum CexOutcome {
    /// A concrete original-network input refuting the property.
    Counterexample(Vec<f64>),
    /// Pullback died out or every candidate simulated safe.
    Inconclusive,
}

/// Approximate pullback of a target point `z` (at the layer's output cut)
/// into the reach region at the layer's input cut.
///
/// Sampled region points are interpreted as pre-ReLU values: a candidate
/// `p` is rectified by the sign-quadrant projection and its one-layer image
/// is `ReLU(p) W + b`. The coefficient adjustment solves the unconstrained
/// least-squares step for `‖α B Π W + c Π W + b − z‖₂` exactly (the
/// objective is quadratic in `α`), then clamps into the coefficient box.
/// Survivors are sorted by image distance, ties by candidate index.
pub fn pull_back_cex(
    z: &[f64],
    region_prev: &AffineRegion,
    layer: &AffineMap,
    distance: f64,
    samples: usize,
    seed: u64,
) -> Vec<Vec<f64>> {
    pull_back_cex_scored(z, region_prev, layer, distance, samples, seed)
        .into_iter()
        .map(|(_, p)| p)
        .collect()
}

fn pull_back_cex_scored(
    z: &[f64],
    region_prev: &AffineRegion,
    layer: &AffineMap,
    distance: f64,
    samples: usize,
    seed: u64,
) -> Vec<(f64, Vec<f64>)> {
    let k = region_prev.generators();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut survivors: Vec<(f64, usize, Vec<f64>)> = Vec::new();

    for s in 0..samples {
        let alpha: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
        let p = region_prev.point_from_coeffs(&alpha);

        // quadrant of the raw candidate: ReLU acts as a projection there
        let keep: Vec<bool> = p.iter().map(|&v| v >= 0.0).collect();
        let adjusted = adjust_alpha(&alpha, region_prev, layer, &keep, z);
        let p2 = region_prev.point_from_coeffs(&adjusted);

        let image = rectified_image(&p2, layer);
        let dist = matrix::norm2(&matrix::sub(&image, z));
        if dist <= distance {
            survivors.push((dist, s, p2));
        }
    }

    survivors.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap().then(a.1.cmp(&b.1)));
    survivors.into_iter().map(|(d, _, p)| (d, p)).collect()
}

/// `ReLU(p) W + b`: the one-layer image of a raw region point, comparable
/// to raw points of the next cut's region.
fn rectified_image(p: &[f64], layer: &AffineMap) -> Vec<f64> {
    layer
        .apply(&matrix::relu(p))
        .expect("dimension checked by caller")
}

/// Exact unconstrained minimizer of `‖α (B Π W) + (c Π W + b − z)‖₂`
/// via the normal equations, clamped into the coefficient box.
fn adjust_alpha(
    alpha: &[f64],
    region: &AffineRegion,
    layer: &AffineMap,
    keep: &[bool],
    z: &[f64],
) -> Vec<f64> {
    let k = region.generators();
    if k == 0 {
        return Vec::new();
    }
    let m = layer.dim_out();

    // rows of M = B Π W, skipping projected-out columns of B
    let mut mrows = Matrix::zeros(k, m);
    for (r, row) in region.basis().iter_rows().enumerate() {
        let out = mrows.row_mut(r);
        for (i, &v) in row.iter().enumerate() {
            if v == 0.0 || !keep[i] {
                continue;
            }
            let wrow = layer.weights.row(i);
            for (o, &w) in out.iter_mut().zip(wrow) {
                *o += v * w;
            }
        }
    }
    // t = c Π W + b − z
    let mut t = layer.bias.clone();
    for (i, &c) in region.center().iter().enumerate() {
        if c == 0.0 || !keep[i] {
            continue;
        }
        let wrow = layer.weights.row(i);
        for (o, &w) in t.iter_mut().zip(wrow) {
            *o += c * w;
        }
    }
    for (ti, zi) in t.iter_mut().zip(z) {
        *ti -= zi;
    }

    // normal equations G a = −M tᵀ
    let mut gram = Matrix::zeros(k, k);
    for i in 0..k {
        for j in i..k {
            let v = matrix::dot(mrows.row(i), mrows.row(j));
            gram.set(i, j, v);
            gram.set(j, i, v);
        }
    }
    let rhs: Vec<f64> = (0..k).map(|i| -matrix::dot(mrows.row(i), &t)).collect();
    let solved = solve_spd(&gram, &rhs);

    solved
        .iter()
        .zip(alpha)
        .map(|(&s, &a)| {
            let v = if s.is_finite() { s } else { a };
            v.clamp(-1.0, 1.0)
        })
        .collect()
}

/// Configuration of the randomized search.
#[derive(Debug, Clone, Copy)]
pub struct CexConfig {
    pub samples: usize,
    pub distance: f64,
    pub seed: u64,
}

impl Default for CexConfig {
    fn default() -> Self {
        Self {
            samples: 10_000,
            distance: 1.0,
            seed: 0,
        }
    }
}

/// Decide whether an inclusion-failure witness corresponds to a real
/// counterexample.
///
/// Applies [`pull_back_cex`] hop by hop from `cut` down to cut 0, scaling
/// the distance budget down by the number of layers. A hop whose survivors
/// would all be filtered out escalates the budget tenfold until some
/// candidate passes: the distance is an acknowledged tunable, and the
/// escalation auto-tunes it deterministically instead of giving up on
/// witnesses that sit far outside the one-layer image of the previous
/// region. Input candidates are snapped into the precondition (original
/// block clamped into bounds, permuted block overwritten with its
/// permutation) and simulated exactly; the first whose output violates the
/// post polytope is returned.
pub fn spuriousness_check(
    witness: &[f64],
    cut: usize,
    product: &ProductNetwork,
    reach: &[AffineRegion],
    post: &ConvexPolytope,
    prop: &InvarianceProperty,
    cfg: &CexConfig,
) -> CexOutcome {
    let hop_distance = cfg.distance / product.layers.len() as f64;
    let mut targets: Vec<Vec<f64>> = vec![witness.to_vec()];

    for j in (0..cut).rev() {
        let per_target = if cfg.samples == 0 {
            0
        } else {
            (cfg.samples / targets.len()).max(MIN_SAMPLES_PER_TARGET)
        };
        let mut collected: Vec<(f64, Vec<f64>)> = Vec::new();
        for (ti, tgt) in targets.iter().enumerate() {
            let seed = mix_seed(cfg.seed, j as u64, ti as u64);
            collected.extend(pull_back_cex_scored(
                tgt,
                &reach[j],
                &product.layers[j],
                f64::INFINITY,
                per_target,
                seed,
            ));
        }
        // smallest budget on the ladder hop_distance · 10^e admitting a survivor
        let budget = match collected.iter().map(|(d, _)| *d).fold(None, min_opt) {
            Some(best) => {
                let mut b = hop_distance.max(1e-12);
                while b < best {
                    b *= 10.0;
                }
                b
            }
            None => return CexOutcome::Inconclusive,
        };
        collected.retain(|(d, _)| *d <= budget);
        collected.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        collected.truncate(HOP_CANDIDATE_CAP);
        targets = collected.into_iter().map(|(_, p)| p).collect();
    }

    for cand in &targets {
        let input = snap_to_precondition(cand, prop);
        let mut state: Vec<f64> = input
            .iter()
            .copied()
            .chain(prop.sigma_in.iter().map(|&s| input[s]))
            .collect();
        for layer in &product.layers {
            state = simulate_layer(&state, layer);
        }
        if post.violation(&state) > 0.0 {
            return CexOutcome::Counterexample(input);
        }
    }
    CexOutcome::Inconclusive
}

/// Clamp the original block into the precondition bounds; the permuted
/// block is reconstructed from it, so the result satisfies the precondition
/// exactly.
fn snap_to_precondition(candidate: &[f64], prop: &InvarianceProperty) -> Vec<f64> {
    let n = prop.lower.len();
    (0..n)
        .map(|i| candidate[i].clamp(prop.lower[i], prop.upper[i]))
        .collect()
}

fn min_opt(acc: Option<f64>, d: f64) -> Option<f64> {
    Some(acc.map_or(d, |a| a.min(d)))
}

fn mix_seed(seed: u64, a: u64, b: u64) -> u64 {
    let mut x = seed
        .wrapping_mul(0x9E3779B97F4A7C15)
        .wrapping_add(a.wrapping_mul(0xBF58476D1CE4E5B9))
        .wrapping_add(b.wrapping_mul(0x94D049BB133111EB));
    x ^= x >> 31;
    x = x.wrapping_mul(0xD6E8FEB86659FD93);
    x ^= x >> 29;
    x
}
