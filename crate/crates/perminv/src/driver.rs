//! Orchestration: product-network construction, initial regions, the
//! forward/backward chains, per-cut inclusion checks, and the verdict.
//!
//! Cut indexing is explicit: cut 0 is the network input, cut `i` for
//! `i ≥ 1` is the post-ReLU output of layer `i−1`, and cut `n` is the
//! network output. `reach[i]` and `safe[i]` both live at cut `i`, and the
//! inclusion check compares them at identical cuts only, output cut first.

use std::time::Instant;

use serde::Serialize;

use crate::backward::{self, SafeSet};
use crate::cex::{self, CexConfig, CexOutcome};
use crate::error::{Error, Result};
use crate::forward::{self, ForwardTolerances};
use crate::geometry::{AffineMap, AffineRegion, ConvexPolytope};
use crate::inclusion::{self, Witness};
use crate::matrix::{self, Matrix};

/// A feed-forward ReLU network: every layer is an affine map followed by a
/// ReLU, including the last.
#[derive(Debug, Clone)]
pub struct Network {
    layers: Vec<AffineMap>,
}

impl Network {
    pub fn new(layers: Vec<AffineMap>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::Input("network has no layers".into()));
        }
        for (i, pair) in layers.windows(2).enumerate() {
            if pair[0].dim_out() != pair[1].dim_in() {
                return Err(Error::Dimension(format!(
                    "layer {} outputs dimension {} but layer {} expects {}",
                    i,
                    pair[0].dim_out(),
                    i + 1,
                    pair[1].dim_in()
                )));
            }
        }
        for (i, layer) in layers.iter().enumerate() {
            if !layer.weights.is_finite() || !layer.bias.iter().all(|v| v.is_finite()) {
                return Err(Error::NonFinite(format!("layer {i} weights or bias")));
            }
        }
        Ok(Self { layers })
    }

    pub fn layers(&self) -> &[AffineMap] {
        &self.layers
    }

    pub fn dim_in(&self) -> usize {
        self.layers[0].dim_in()
    }

    pub fn dim_out(&self) -> usize {
        self.layers.last().expect("nonempty").dim_out()
    }

    /// Full forward simulation; returns the output after the final ReLU.
    pub fn simulate(&self, input: &[f64]) -> Result<Vec<f64>> {
        if input.len() != self.dim_in() {
            return Err(Error::Dimension(format!(
                "input has dimension {}, network expects {}",
                input.len(),
                self.dim_in()
            )));
        }
        let mut state = input.to_vec();
        for layer in &self.layers {
            state = matrix::relu(&layer.apply(&state)?);
        }
        Ok(state)
    }

    /// Per-cut states of a simulation: index 0 is the input, index `i` the
    /// post-ReLU state at cut `i`.
    pub fn simulate_cuts(&self, input: &[f64]) -> Result<Vec<Vec<f64>>> {
        let mut states = vec![input.to_vec()];
        for layer in &self.layers {
            let prev = states.last().expect("nonempty");
            states.push(matrix::relu(&layer.apply(prev)?));
        }
        Ok(states)
    }
}

/// The permutation-invariance property to verify:
/// `lower ≤ x ≤ upper ⇒ |σ_out(N(x)) − N(σ_in(x))|∞ ≤ tolerance`.
///
/// Permutations are index arrays in the "output position `t` takes input
/// index `sigma[t]`" convention; the flip property of a 2-input network is
/// `sigma_in = [1, 0]`.
#[derive(Debug, Clone)]
pub struct InvarianceProperty {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    pub sigma_in: Vec<usize>,
    pub sigma_out: Vec<usize>,
    pub tolerance: f64,
}

impl InvarianceProperty {
    pub fn validate(&self, net: &Network) -> Result<()> {
        let n = net.dim_in();
        let m = net.dim_out();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(Error::Dimension(format!(
                "bounds have dimension {}/{}, network input is {}",
                self.lower.len(),
                self.upper.len(),
                n
            )));
        }
        if !is_permutation(&self.sigma_in, n) {
            return Err(Error::Input(format!(
                "sigma_in {:?} is not a permutation of 0..{}",
                self.sigma_in, n
            )));
        }
        if !is_permutation(&self.sigma_out, m) {
            return Err(Error::Input(format!(
                "sigma_out {:?} is not a permutation of 0..{}",
                self.sigma_out, m
            )));
        }
        if self.tolerance <= 0.0 || !self.tolerance.is_finite() {
            return Err(Error::Input(format!(
                "tolerance must be strictly positive, got {}",
                self.tolerance
            )));
        }
        for (i, (lo, hi)) in self.lower.iter().zip(&self.upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite()) {
                return Err(Error::NonFinite(format!("bound at index {i}")));
            }
            if lo > hi {
                return Err(Error::Input(format!(
                    "lower bound {lo} exceeds upper bound {hi} at index {i}"
                )));
            }
        }
        Ok(())
    }

    /// `σ_in(x)`: the permuted input block.
    pub fn permute_in(&self, x: &[f64]) -> Vec<f64> {
        self.sigma_in.iter().map(|&s| x[s]).collect()
    }

    /// `σ_out(y)`: the permuted output block.
    pub fn permute_out(&self, y: &[f64]) -> Vec<f64> {
        self.sigma_out.iter().map(|&s| y[s]).collect()
    }

    /// `|σ_out(N(x)) − N(σ_in(x))|∞` by pure simulation of the original
    /// network, independent of every approximation in this crate.
    pub fn violation_by_simulation(&self, net: &Network, x: &[f64]) -> Result<f64> {
        let direct = net.simulate(x)?;
        let swapped = net.simulate(&self.permute_in(x))?;
        Ok(matrix::inf_norm(&matrix::sub(
            &self.permute_out(&direct),
            &swapped,
        )))
    }
}

fn is_permutation(sigma: &[usize], n: usize) -> bool {
    if sigma.len() != n {
        return false;
    }
    let mut seen = vec![false; n];
    for &s in sigma {
        if s >= n || seen[s] {
            return false;
        }
        seen[s] = true;
    }
    true
}

/// The doubled network running the original and permuted inputs side by
/// side: block-diagonal weights, concatenated biases. Every cut has exactly
/// twice the source network's dimension.
#[derive(Debug, Clone)]
pub struct ProductNetwork {
    pub layers: Vec<AffineMap>,
}

/// Build the product of a network with itself.
pub fn build_product(net: &Network) -> ProductNetwork {
    let layers = net
        .layers()
        .iter()
        .map(|layer| {
            let din = layer.dim_in();
            let dout = layer.dim_out();
            let mut w = Matrix::zeros(2 * din, 2 * dout);
            for i in 0..din {
                for j in 0..dout {
                    let v = layer.weights.get(i, j);
                    w.set(i, j, v);
                    w.set(din + i, dout + j, v);
                }
            }
            let mut b = layer.bias.clone();
            b.extend_from_slice(&layer.bias);
            AffineMap::new(w, b).expect("doubled dimensions are consistent")
        })
        .collect();
    ProductNetwork { layers }
}

/// The precondition as an affine region over the doubled input space.
///
/// Center: interval midpoints, duplicated with the permuted block
/// reordered by `σ_in`. Basis: one generator per input coordinate with the
/// interval half-width at that coordinate and at its permuted position;
/// zero-width coordinates contribute no generator. Every member satisfies
/// `lower ≤ x ≤ upper` and `x' = σ_in(x)`.
pub fn init_pre(prop: &InvarianceProperty) -> Result<AffineRegion> {
    let n = prop.lower.len();
    for (i, (lo, hi)) in prop.lower.iter().zip(&prop.upper).enumerate() {
        if lo > hi {
            return Err(Error::Input(format!(
                "lower bound exceeds upper bound at index {i}"
            )));
        }
    }
    let mid: Vec<f64> = prop
        .lower
        .iter()
        .zip(&prop.upper)
        .map(|(lo, hi)| (lo + hi) / 2.0)
        .collect();
    let mut center = mid.clone();
    center.extend(prop.sigma_in.iter().map(|&s| mid[s]));

    // position of each source index in the permuted block
    let mut pos_of = vec![0usize; n];
    for (t, &s) in prop.sigma_in.iter().enumerate() {
        pos_of[s] = t;
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for i in 0..n {
        let half = (prop.upper[i] - prop.lower[i]) / 2.0;
        if half == 0.0 {
            continue;
        }
        let mut row = vec![0.0; 2 * n];
        row[i] = half;
        row[n + pos_of[i]] = half;
        rows.push(row);
    }
    let basis = if rows.is_empty() {
        Matrix::empty(2 * n)
    } else {
        Matrix::from_rows(&rows).expect("rows share the doubled dimension")
    };
    AffineRegion::new(basis, center)
}

/// The postcondition as a single convex polytope over the doubled output
/// space: for every output index `t`, `|x'_t − x_{σ_out(t)}| ≤ M` becomes
/// the constraint pair `±(x'_t − x_{σ_out(t)}) ≤ M`.
pub fn init_post(prop: &InvarianceProperty, out_dim: usize) -> ConvexPolytope {
    let d = 2 * out_dim;
    let mut lhs = Matrix::zeros(d, 2 * out_dim);
    for t in 0..out_dim {
        lhs.set(out_dim + t, 2 * t, 1.0);
        lhs.set(prop.sigma_out[t], 2 * t, -1.0);
        lhs.set(out_dim + t, 2 * t + 1, -1.0);
        lhs.set(prop.sigma_out[t], 2 * t + 1, 1.0);
    }
    let ub = vec![prop.tolerance; 2 * out_dim];
    ConvexPolytope::new(lhs, ub).expect("2·out_dim ≥ 2 constraints")
}

/// Verification verdict.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(rename_all = "snake_case", tag = "outcome", content = "counterexample")]
pub enum Outcome {
    Holds,
    Counterexample(Vec<f64>),
    Inconclusive,
}

/// Wall-clock seconds spent in each phase.
#[derive(Debug, Clone, Default, Serialize)]
pub struct PhaseTimings {
    pub forward_s: f64,
    pub backward_s: f64,
    pub inclusion_s: f64,
    pub cex_s: f64,
}

/// Verdict with diagnostics.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    #[serde(flatten)]
    pub outcome: Outcome,
    /// Cut at which inclusion succeeded, when the property was proved.
    pub proved_at_cut: Option<usize>,
    /// Cuts whose inclusion check failed before a success or the search.
    pub failed_cuts: Vec<usize>,
    pub timings: PhaseTimings,
}

/// Everything the verification produced, for inspection and dumping.
pub struct Analysis {
    pub verdict: Verdict,
    /// `reach[0..=n]`, reach regions per cut.
    pub reach: Vec<AffineRegion>,
    /// `safe[1..=n]` stored at their cut index; `safe[0]` is unused.
    pub safe: Vec<Option<SafeSet>>,
    /// Pre-ReLU region centers per layer (center hint inputs).
    pub pre_relu_centers: Vec<Vec<f64>>,
    pub product: ProductNetwork,
}

/// Verifier configuration.
#[derive(Debug, Clone)]
pub struct VerifyConfig {
    pub forward: ForwardTolerances,
    /// Slack tolerance of the inclusion checks.
    pub inclusion_tol: f64,
    pub cex: CexConfig,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            forward: ForwardTolerances::default(),
            inclusion_tol: inclusion::DEFAULT_VIOLATION_TOL,
            cex: CexConfig::default(),
        }
    }
}

/// Run the whole pipeline: product construction, forward reach chain,
/// backward safe chain, per-cut inclusion checks from the output cut down,
/// and — when every check fails — the randomized spuriousness check seeded
/// with the deepest-cut witness.
pub fn verify(net: &Network, prop: &InvarianceProperty, config: &VerifyConfig) -> Result<Analysis> {
    prop.validate(net)?;
    let product = build_product(net);
    let n = product.layers.len();
    let mut timings = PhaseTimings::default();

    // forward chain
    let t0 = Instant::now();
    let mut reach: Vec<AffineRegion> = Vec::with_capacity(n + 1);
    let mut pre_relu_centers: Vec<Vec<f64>> = Vec::with_capacity(n);
    reach.push(init_pre(prop)?);
    for (i, layer) in product.layers.iter().enumerate() {
        let current = reach.last().expect("nonempty");
        let pre = current.pushforward(layer)?;
        if !pre.is_finite() {
            return Err(Error::NonFinite(format!(
                "reach region overflowed while crossing layer {i}"
            )));
        }
        pre_relu_centers.push(pre.center().to_vec());
        let tie_tol = config
            .forward
            .tie_tol
            .unwrap_or_else(|| crate::tieclass::default_tie_tol(&pre));
        let partition = crate::tieclass::compute_tie_classes(&pre, tie_tol);
        let post = forward::relu_over_approx(&pre, &partition);
        let reduced = forward::reduce_basis(&post, config.forward.singular_cutoff);
        if !reduced.is_finite() {
            return Err(Error::NonFinite(format!(
                "reach region overflowed after layer {i}"
            )));
        }
        reach.push(reduced);
    }
    timings.forward_s = t0.elapsed().as_secs_f64();

    // backward chain
    let t1 = Instant::now();
    let post = init_post(prop, net.dim_out());
    let mut safe: Vec<Option<SafeSet>> = vec![None; n + 1];
    safe[n] = Some(SafeSet::from_polytope(post.clone()));
    for i in (1..n).rev() {
        let next = safe[i + 1].as_ref().expect("filled in previous step");
        safe[i] = Some(backward::backward_propagate(
            next,
            &product.layers[i],
            &pre_relu_centers[i - 1],
        )?);
    }
    timings.backward_s = t1.elapsed().as_secs_f64();

    // inclusion checks, output cut first
    let t2 = Instant::now();
    let mut failed_cuts = Vec::new();
    let mut deepest_witness: Option<Witness> = None;
    let mut proved_at = None;
    for i in (1..=n).rev() {
        let safe_i = safe[i].as_ref().expect("safe chain covers cuts 1..=n");
        let out = inclusion::check_inclusion(&reach[i], safe_i, config.inclusion_tol);
        if out.included {
            proved_at = Some(i);
            break;
        }
        failed_cuts.push(i);
        if deepest_witness.is_none() {
            deepest_witness = out.witness.map(|mut w| {
                w.cut = Some(i);
                w
            });
        }
    }
    timings.inclusion_s = t2.elapsed().as_secs_f64();

    let outcome = if proved_at.is_some() {
        Outcome::Holds
    } else {
        let t3 = Instant::now();
        let witness = deepest_witness.expect("every failed check yields a witness");
        let cut = witness.cut.expect("cut recorded above");
        let result = cex::spuriousness_check(
            &witness.point,
            cut,
            &product,
            &reach,
            &post,
            prop,
            &config.cex,
        );
        timings.cex_s = t3.elapsed().as_secs_f64();
        match result {
            CexOutcome::Counterexample(input) => {
                // self-validation by pure simulation of the original network
                let violation = prop.violation_by_simulation(net, &input)?;
                debug_assert!(violation > prop.tolerance);
                Outcome::Counterexample(input)
            }
            CexOutcome::Inconclusive => Outcome::Inconclusive,
        }
    };

    Ok(Analysis {
        verdict: Verdict {
            outcome,
            proved_at_cut: proved_at,
            failed_cuts,
            timings,
        },
        reach,
        safe,
        pre_relu_centers,
        product,
    })
}
