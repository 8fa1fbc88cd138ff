//! Verifier for permutation-invariance properties of ReLU networks.
//!
//! Given a feed-forward ReLU network `N`, input bounds, permutations
//! `σ_in` / `σ_out` and a tolerance `M`, the verifier decides whether
//!
//! ```text
//! lower ≤ x ≤ upper  ⇒  |σ_out(N(x)) − N(σ_in(x))|∞ ≤ M
//! ```
//!
//! holds, refutes it with a concrete input, or reports inconclusive.
//!
//! The pipeline runs both directions over the doubled (product) network:
//!
//! * forward, an affine-region over-approximation of the reachable values
//!   is pushed across each layer; the ReLU step uses *tie classes* —
//!   groups of coordinates that share their sign over the whole region —
//!   to avoid per-neuron case splits ([`tieclass`], [`forward`]);
//! * backward, an under-approximation of the safe values is pulled across
//!   each layer as a union of two polytopes: the safe polytope restricted
//!   to the nonnegative orthant plus a box or quadrant capturing negative
//!   pre-activations ([`backward`]);
//! * the property is proved as soon as the reach region at some cut fits
//!   inside the safe set there, decided by small exact box LPs
//!   ([`inclusion`]); a failed inclusion yields a witness point that a
//!   randomized pullback tries to turn into a real, simulation-validated
//!   counterexample ([`cex`]).
//!
//! The [`driver`] module orchestrates the pipeline and [`io`] provides the
//! JSON file formats, the synthetic argmax benchmark family, and region
//! dumps. See the crate examples for runnable walkthroughs of each stage.

pub mod backward;
pub mod cex;
pub mod driver;
pub mod error;
pub mod forward;
pub mod geometry;
pub mod inclusion;
pub mod io;
mod linalg;
pub mod matrix;
pub mod tieclass;

pub use backward::{NegativePart, SafeSet};
pub use cex::{CexConfig, CexOutcome};
pub use driver::{
    build_product, init_post, init_pre, verify, Analysis, InvarianceProperty, Network, Outcome,
    ProductNetwork, Verdict, VerifyConfig,
};
pub use error::{Error, Result};
pub use forward::ForwardTolerances;
pub use geometry::{AffineMap, AffineRegion, ConvexPolytope};
pub use io::{gen_benchmark, load_network, load_property, save_network, save_property, BenchMode};
pub use matrix::Matrix;
pub use tieclass::{SignHint, TiePartition};
