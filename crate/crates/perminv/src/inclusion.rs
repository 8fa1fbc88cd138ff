//! Inclusion checking: is a reach region contained in a safe set?
//!
//! Each query reduces to linear programs over the region coefficients `α`
//! with the box `‖α‖∞ ≤ 1`, a single extra gate constraint `α · a ≥ g`, and
//! a linear objective. Such programs have at most one fractional coordinate
//! at the optimum, so a greedy exchange solves them exactly without a
//! general simplex.

use crate::backward::{NegativePart, SafeSet};
use crate::geometry::{AffineRegion, ConvexPolytope};
use crate::matrix::{self};

/// Default slack tolerance separating genuine violations from round-off.
pub const DEFAULT_VIOLATION_TOL: f64 = 1e-7;

/// A box-constrained LP: maximize `objective · α` subject to
/// `‖α‖∞ ≤ 1` and `gate · α ≥ gate_bound`.
#[derive(Debug, Clone)]
pub struct BoxLp {
    pub objective: Vec<f64>,
    pub gate: Vec<f64>,
    pub gate_bound: f64,
}

/// Solver outcome; infeasibility is a normal answer, not an error.
#[derive(Debug, Clone)]
pub enum LpOutcome {
    Optimal { value: f64, alpha: Vec<f64> },
    Infeasible,
}

/// Solve the box LP exactly.
///
/// Start at the unconstrained box optimum `α_i = sign(d_i)`. If the gate
/// fails there, coordinates are moved toward `sign(a_i)` in increasing order
/// of the objective-loss rate `|d_i| / |a_i|` until the gate is met; at most
/// one coordinate ends fractional, matching the basic-solution structure of
/// an LP with a single non-box constraint.
pub fn solve_box_lp(lp: &BoxLp) -> LpOutcome {
    let k = lp.objective.len();
    debug_assert_eq!(lp.gate.len(), k);

    // sign(d) with sign(0) = 0, so zero-objective coordinates start centered
    // and are free for the gate phase
    let mut alpha: Vec<f64> = lp
        .objective
        .iter()
        .map(|&d| if d == 0.0 { 0.0 } else { d.signum() })
        .collect();
    let gate_at = |a: &[f64]| matrix::dot(a, &lp.gate);

    let deficit = lp.gate_bound - gate_at(&alpha);
    if deficit > 0.0 {
        let gate_max: f64 = lp.gate.iter().map(|a| a.abs()).sum();
        if gate_max < lp.gate_bound {
            return LpOutcome::Infeasible;
        }
        // candidate moves, cheapest objective loss per unit of gate gain first
        let mut order: Vec<usize> = (0..k).filter(|&i| lp.gate[i] != 0.0).collect();
        order.sort_by(|&i, &j| {
            let ri = lp.objective[i].abs() / lp.gate[i].abs();
            let rj = lp.objective[j].abs() / lp.gate[j].abs();
            ri.partial_cmp(&rj).unwrap().then(i.cmp(&j))
        });
        let mut need = deficit;
        for i in order {
            let target = lp.gate[i].signum();
            let gain_full = lp.gate[i] * (target - alpha[i]);
            if gain_full <= 0.0 {
                continue;
            }
            if gain_full >= need {
                alpha[i] += (need / gain_full) * (target - alpha[i]);
                need = 0.0;
                break;
            }
            alpha[i] = target;
            need -= gain_full;
        }
        if need > 1e-12 * (1.0 + lp.gate_bound.abs()) {
            // numerically infeasible after exhausting all moves
            return LpOutcome::Infeasible;
        }
    }

    LpOutcome::Optimal {
        value: matrix::dot(&lp.objective, &alpha),
        alpha,
    }
}

/// Result of an inclusion query, with a violation witness when it fails.
#[derive(Debug, Clone)]
pub struct InclusionOutcome {
    pub included: bool,
    pub witness: Option<Witness>,
}

/// A region point violating the safe set: `point = alpha · B + c`.
#[derive(Debug, Clone)]
pub struct Witness {
    pub alpha: Vec<f64>,
    pub point: Vec<f64>,
    /// Cut index, filled in by the driver.
    pub cut: Option<usize>,
}

impl InclusionOutcome {
    fn included() -> Self {
        Self {
            included: true,
            witness: None,
        }
    }

    fn violated(alpha: Vec<f64>, point: Vec<f64>) -> Self {
        Self {
            included: false,
            witness: Some(Witness {
                alpha,
                point,
                cut: None,
            }),
        }
    }
}

/// Check that every region point satisfying `x · gate_v ≥ gate_k` lies in
/// the polytope, by one box LP per polytope constraint. The first violating
/// maximizer (deepest single-constraint violation) becomes the witness.
pub fn check_halfspace_inclusion(
    region: &AffineRegion,
    gate_v: &[f64],
    gate_k: f64,
    poly: &ConvexPolytope,
    tol: f64,
) -> InclusionOutcome {
    let basis = region.basis();
    let c = region.center();
    let gate: Vec<f64> = basis.iter_rows().map(|row| matrix::dot(row, gate_v)).collect();
    let gate_bound = gate_k - matrix::dot(c, gate_v);

    for t in 0..poly.constraints() {
        let normal = poly.normal(t);
        let objective: Vec<f64> = basis
            .iter_rows()
            .map(|row| matrix::dot(row, &normal))
            .collect();
        let slack = poly.ub()[t] - matrix::dot(c, &normal);
        let lp = BoxLp {
            objective,
            gate: gate.clone(),
            gate_bound,
        };
        match solve_box_lp(&lp) {
            LpOutcome::Infeasible => return InclusionOutcome::included(),
            LpOutcome::Optimal { value, alpha } => {
                if value > slack + tol {
                    let point = region.point_from_coeffs(&alpha);
                    return InclusionOutcome::violated(alpha, point);
                }
            }
        }
    }
    InclusionOutcome::included()
}

/// Check `region ⊆ safe`.
///
/// With a box negative part, points outside the box violate some finite
/// `x_i ≤ η_i`, so for each such coordinate all region points with
/// `x_i ≥ η_i` must lie in the positive polytope. With a quadrant negative
/// part, the coordinate hyperplane of the first zeroed coordinate separates
/// the two polytopes and each side is checked against its own polytope.
/// Without a negative part a single trivial-gate check suffices.
pub fn check_inclusion(region: &AffineRegion, safe: &SafeSet, tol: f64) -> InclusionOutcome {
    let d = region.dim();
    match &safe.negative {
        None => check_halfspace_inclusion(region, &vec![0.0; d], 0.0, &safe.positive, tol),
        Some(NegativePart::Box { eta }) => {
            for (i, &eta_i) in eta.iter().enumerate() {
                if !eta_i.is_finite() {
                    continue;
                }
                let mut gate = vec![0.0; d];
                gate[i] = 1.0;
                let out = check_halfspace_inclusion(region, &gate, eta_i, &safe.positive, tol);
                if !out.included {
                    return out;
                }
            }
            InclusionOutcome::included()
        }
        Some(NegativePart::Quadrant { zeroed, polytope }) => {
            let e = zeroed
                .iter()
                .position(|&z| z)
                .expect("quadrant parts zero at least one coordinate");
            let mut plus = vec![0.0; d];
            plus[e] = 1.0;
            let out = check_halfspace_inclusion(region, &plus, 0.0, &safe.positive, tol);
            if !out.included {
                return out;
            }
            let mut minus = vec![0.0; d];
            minus[e] = -1.0;
            check_halfspace_inclusion(region, &minus, 0.0, polytope, tol)
        }
    }
}
