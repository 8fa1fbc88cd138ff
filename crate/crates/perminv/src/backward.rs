//! Backward propagation of safe-set under-approximations across one layer.
//!
//! The affine part of a layer is inverted exactly by polytope pullback. The
//! ReLU is under-approximated by a union of two polytopes: the pulled-back
//! polytope restricted to the nonnegative orthant, plus a *negative part*
//! covering points the ReLU maps into the polytope. Only the positive
//! polytope is propagated further backward (cumulative simplification); the
//! negative part exists solely for the inclusion check at its own cut.

use crate::error::{Error, Result};
use crate::geometry::{AffineMap, ConvexPolytope};
use crate::matrix::Matrix;

/// Under-approximation of the safe points at one cut.
#[derive(Debug, Clone)]
pub struct SafeSet {
    /// Polytope in the nonnegative orthant, the part carried across layers.
    pub positive: ConvexPolytope,
    /// Extra region used only by the inclusion check at this cut.
    pub negative: Option<NegativePart>,
}

impl SafeSet {
    /// Safe set consisting of the polytope alone.
    pub fn from_polytope(positive: ConvexPolytope) -> Self {
        Self {
            positive,
            negative: None,
        }
    }
}

/// The negative-side member of the 2-polytope under-approximation.
#[derive(Debug, Clone)]
pub enum NegativePart {
    /// Box `x ≤ η` with `η ≥ 0`; `+∞` entries mean the coordinate is
    /// unconstrained and never materialize as polytope constraints.
    Box { eta: Vec<f64> },
    /// One sign quadrant plus the polytope constraints projected onto it.
    Quadrant {
        /// Coordinates forced to `≤ 0` (projected away by the ReLU).
        zeroed: Vec<bool>,
        /// `x Π_Q L ≤ u` conjoined with the quadrant sign constraints.
        polytope: ConvexPolytope,
    },
}

/// Threshold for "0 is strictly inside": every bound must exceed this.
const INTERIOR_EPS: f64 = 1e-9;

/// The box corner maximizing `Π η_i` on a single constraint `η · w = u`.
///
/// With `m` strictly positive weights the stationary point shares the
/// products equally, `w_i η_i = u / m`; coordinates with `w_i ≤ 0` never
/// bind nonnegative points and get `+∞`.
pub fn eta_for_constraint(w: &[f64], u: f64) -> Result<Vec<f64>> {
    if u <= 0.0 {
        return Err(Error::Inapplicable(format!(
            "constraint bound {u} is not strictly positive"
        )));
    }
    let m = w.iter().filter(|&&x| x > 0.0).count();
    Ok(w.iter()
        .map(|&wi| {
            if wi > 0.0 {
                u / (m as f64 * wi)
            } else {
                f64::INFINITY
            }
        })
        .collect())
}

/// Negative part when 0 is strictly inside the polytope: the box `x ≤ η`
/// with `η` the componentwise minimum of the per-constraint optima.
/// Guarantees `0 ≤ y ≤ η ⇒ y L ≤ u`, hence `ReLU(x) ∈ P` for every `x ≤ η`.
/// Returns `None` when some bound is not strictly positive (the caller
/// falls back to the quadrant method).
pub fn backprop_around_zero(poly: &ConvexPolytope) -> Option<NegativePart> {
    if poly.ub().iter().any(|&u| u <= INTERIOR_EPS) {
        return None;
    }
    let d = poly.dim();
    let mut eta = vec![f64::INFINITY; d];
    for t in 0..poly.constraints() {
        let w = poly.normal(t);
        let per = eta_for_constraint(&w, poly.ub()[t]).expect("bounds checked positive");
        for (e, p) in eta.iter_mut().zip(per) {
            *e = e.min(p);
        }
    }
    Some(NegativePart::Box { eta })
}

/// Negative part restricted to one sign quadrant, chosen by the center-point
/// heuristic: coordinates where the hint is negative are zeroed (ties keep
/// the coordinate nonnegative, which leaves more of the polytope intact).
/// Returns `None` when no coordinate is zeroed, since the quadrant would
/// duplicate the positive part.
pub fn backprop_quadrant(poly: &ConvexPolytope, center_hint: &[f64]) -> Option<NegativePart> {
    debug_assert_eq!(center_hint.len(), poly.dim());
    let zeroed: Vec<bool> = center_hint.iter().map(|&h| h < 0.0).collect();
    if zeroed.iter().all(|z| !z) {
        return None;
    }
    let d = poly.dim();
    let m = poly.constraints();
    // projected constraints: rows of L at zeroed coordinates become 0,
    // then quadrant constraints: x_i ≤ 0 where zeroed, x_i ≥ 0 where kept
    let mut lhs = Matrix::zeros(d, m + d);
    for (i, &z) in zeroed.iter().enumerate() {
        if !z {
            for t in 0..m {
                lhs.set(i, t, poly.lhs().get(i, t));
            }
        }
        lhs.set(i, m + i, if z { 1.0 } else { -1.0 });
    }
    let mut ub = poly.ub().to_vec();
    ub.extend(std::iter::repeat_n(0.0, d));
    let polytope = ConvexPolytope::new(lhs, ub).expect("m + d >= 1 constraints");
    Some(NegativePart::Quadrant { zeroed, polytope })
}

/// One backward layer step.
///
/// Pulls the succeeding cut's positive polytope back across the layer's
/// affine map to a polytope `P` at this cut, then forms the 2-polytope
/// union: positive part `P ∧ x ≥ 0` and a negative part from the
/// around-zero method when applicable, else the quadrant method with the
/// pre-ReLU center hint. A degenerate negative part is recorded as absent.
pub fn backward_propagate(
    next: &SafeSet,
    layer: &AffineMap,
    center_hint: &[f64],
) -> Result<SafeSet> {
    let pulled = next.positive.pullback(layer)?;
    let (sign_lhs, sign_ub) = ConvexPolytope::nonneg_orthant(pulled.dim());
    let positive = pulled.conjoin(&sign_lhs, &sign_ub)?;
    let negative =
        backprop_around_zero(&pulled).or_else(|| backprop_quadrant(&pulled, center_hint));
    Ok(SafeSet { positive, negative })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{self, Matrix};
    use rand::rngs::StdRng;
    use rand::{Rng, SeedableRng};

    #[test]
    fn eta_single_constraint_equal_weights() {
        // grid-search oracle for w=[1,1], u=2 confirms the (1,1) optimum
        let eta = eta_for_constraint(&[1.0, 1.0], 2.0).unwrap();
        assert_eq!(eta, vec![1.0, 1.0]);
        let mut best = (0.0, 0.0);
        let mut best_prod = 0.0;
        for i in 1..2000 {
            let e0 = i as f64 * 0.001;
            let e1 = 2.0 - e0;
            if e1 < 0.0 {
                break;
            }
            if e0 * e1 > best_prod {
                best_prod = e0 * e1;
                best = (e0, e1);
            }
        }
        assert!((best.0 - 1.0).abs() < 0.01 && (best.1 - 1.0).abs() < 0.01);
    }

    #[test]
    fn eta_single_coordinate() {
        assert_eq!(eta_for_constraint(&[1.0], 3.0).unwrap(), vec![3.0]);
    }

    #[test]
    fn eta_ignores_nonpositive_weights() {
        let eta = eta_for_constraint(&[2.0, -1.0], 4.0).unwrap();
        assert_eq!(eta[0], 2.0);
        assert!(eta[1].is_infinite());
    }

    #[test]
    fn eta_rejects_nonpositive_bound() {
        assert!(eta_for_constraint(&[1.0], 0.0).is_err());
        assert!(eta_for_constraint(&[1.0], -2.0).is_err());
    }

    #[test]
    fn eta_all_nonpositive_weights_is_unbounded() {
        let eta = eta_for_constraint(&[-1.0, 0.0], 5.0).unwrap();
        assert!(eta.iter().all(|e| e.is_infinite()));
    }

    #[test]
    fn around_zero_worked_example() {
        // P: x·[1,1] <= 2 and x·[1,0] <= 1 gives eta = [1, 1]
        let poly = ConvexPolytope::new(
            Matrix::from_rows(&[vec![1.0, 1.0], vec![1.0, 0.0]]).unwrap(),
            vec![2.0, 1.0],
        )
        .unwrap();
        match backprop_around_zero(&poly).unwrap() {
            NegativePart::Box { eta } => {
                assert_eq!(eta, vec![1.0, 1.0]);
                // corner point saturates the first constraint
                assert!((1.0 + 1.0 - 2.0f64).abs() < 1e-12);
            }
            other => panic!("expected box part, got {other:?}"),
        }
    }

    #[test]
    fn around_zero_inapplicable_without_interior() {
        let poly =
            ConvexPolytope::new(Matrix::from_rows(&[vec![1.0]]).unwrap(), vec![0.0]).unwrap();
        assert!(backprop_around_zero(&poly).is_none());
    }

    #[test]
    fn around_zero_all_negative_weights() {
        // one constraint with all-nonpositive normal over 2-D
        let poly = ConvexPolytope::new(
            Matrix::from_rows(&[vec![-1.0], vec![-2.0]]).unwrap(),
            vec![3.0],
        )
        .unwrap();
        match backprop_around_zero(&poly).unwrap() {
            NegativePart::Box { eta } => assert!(eta.iter().all(|e| e.is_infinite())),
            other => panic!("expected box part, got {other:?}"),
        }
    }

    #[test]
    fn around_zero_box_maps_into_polytope() {
        let mut rng = StdRng::seed_from_u64(21);
        for trial in 0..30 {
            let d = rng.gen_range(1..=4usize);
            let m = rng.gen_range(1..=4usize);
            let lhs: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let ub: Vec<f64> = (0..m).map(|_| rng.gen_range(0.2..3.0)).collect();
            let poly = ConvexPolytope::new(Matrix::from_rows(&lhs).unwrap(), ub).unwrap();
            let part = backprop_around_zero(&poly).expect("positive bounds");
            let NegativePart::Box { eta } = part else {
                panic!("expected box");
            };
            for s in 0..300 {
                let mut x = vec![0.0; d];
                let mut xr = StdRng::seed_from_u64(trial * 1000 + s);
                for (xi, e) in x.iter_mut().zip(&eta) {
                    let hi = e.min(5.0);
                    *xi = xr.gen_range(-3.0..=hi);
                }
                let y = matrix::relu(&x);
                assert!(
                    poly.contains(&y, 1e-9),
                    "relu of box point escaped polytope (trial {trial})"
                );
            }
        }
    }

    #[test]
    fn eta_corner_is_on_constraint_surface() {
        // scaling any finite coordinate of the per-constraint eta upward
        // violates that constraint at the corner
        let mut rng = StdRng::seed_from_u64(8);
        for _ in 0..50 {
            let d = rng.gen_range(1..=5usize);
            let w: Vec<f64> = (0..d).map(|_| rng.gen_range(-2.0..2.0)).collect();
            if !w.iter().any(|&x| x > 0.0) {
                continue;
            }
            let u = rng.gen_range(0.1..4.0);
            let eta = eta_for_constraint(&w, u).unwrap();
            let corner: f64 = w
                .iter()
                .zip(&eta)
                .filter(|(&wi, _)| wi > 0.0)
                .map(|(&wi, &ei)| wi * ei)
                .sum();
            assert!((corner - u).abs() < 1e-9, "corner off surface: {corner} vs {u}");
            for i in 0..d {
                if w[i] <= 0.0 {
                    continue;
                }
                let bumped: f64 = corner + w[i] * eta[i] * 1e-3;
                assert!(bumped > u, "inflating eta[{i}] should violate the constraint");
            }
        }
    }

    #[test]
    fn quadrant_projection_worked_example() {
        // 2-D, hint [-1, 2], P: x·[0,1] <= 5: quadrant x0 <= 0, x1 >= 0,
        // projected constraint stays x1 <= 5
        let poly = ConvexPolytope::new(
            Matrix::from_rows(&[vec![0.0], vec![1.0]]).unwrap(),
            vec![5.0],
        )
        .unwrap();
        match backprop_quadrant(&poly, &[-1.0, 2.0]).unwrap() {
            NegativePart::Quadrant { zeroed, polytope } => {
                assert_eq!(zeroed, vec![true, false]);
                assert!(polytope.contains(&[-3.0, 4.9], 0.0));
                assert!(!polytope.contains(&[-3.0, 5.1], 0.0));
                assert!(!polytope.contains(&[0.5, 1.0], 0.0)); // wrong quadrant
            }
            other => panic!("expected quadrant part, got {other:?}"),
        }
    }

    #[test]
    fn quadrant_degenerate_when_hint_positive() {
        let poly =
            ConvexPolytope::new(Matrix::from_rows(&[vec![1.0], vec![0.0]]).unwrap(), vec![1.0])
                .unwrap();
        assert!(backprop_quadrant(&poly, &[0.5, 0.0]).is_none());
    }

    #[test]
    fn quadrant_members_map_into_polytope() {
        let mut rng = StdRng::seed_from_u64(77);
        for trial in 0..30 {
            let d = rng.gen_range(2..=4usize);
            let m = rng.gen_range(1..=3usize);
            let lhs: Vec<Vec<f64>> = (0..d)
                .map(|_| (0..m).map(|_| rng.gen_range(-2.0..2.0)).collect())
                .collect();
            let ub: Vec<f64> = (0..m).map(|_| rng.gen_range(-1.0..2.0)).collect();
            let poly = ConvexPolytope::new(Matrix::from_rows(&lhs).unwrap(), ub).unwrap();
            let hint: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let Some(NegativePart::Quadrant { polytope, .. }) = backprop_quadrant(&poly, &hint)
            else {
                continue;
            };
            let mut hits = 0;
            for s in 0..2000 {
                let mut xr = StdRng::seed_from_u64(trial * 10_000 + s);
                let x: Vec<f64> = (0..d).map(|_| xr.gen_range(-2.0..2.0)).collect();
                if !polytope.contains(&x, 0.0) {
                    continue;
                }
                hits += 1;
                let y = matrix::relu(&x);
                assert!(poly.contains(&y, 1e-9), "quadrant member escaped (trial {trial})");
            }
            let _ = hits;
        }
    }

    #[test]
    fn backward_identity_layer_keeps_positive_box() {
        // identity layer over a nonnegative box: the positive side survives
        let lhs = Matrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let next = SafeSet::from_polytope(
            ConvexPolytope::new(lhs, vec![1.0, 1.0]).unwrap(),
        );
        let id = AffineMap::new(Matrix::identity(2), vec![0.0, 0.0]).unwrap();
        let safe = backward_propagate(&next, &id, &[1.0, 1.0]).unwrap();
        assert!(safe.positive.contains(&[0.5, 0.5], 0.0));
        assert!(!safe.positive.contains(&[-0.1, 0.5], 0.0)); // sign constraints added
        assert!(!safe.positive.contains(&[1.2, 0.5], 0.0));
        assert_eq!(
            safe.positive.constraints(),
            next.positive.constraints() + 2
        );
    }

    #[test]
    fn backward_members_simulate_into_next_polytope() {
        let mut rng = StdRng::seed_from_u64(4242);
        for trial in 0..20 {
            let d_in = rng.gen_range(1..=4usize);
            let d_out = rng.gen_range(1..=4usize);
            let w: Vec<Vec<f64>> = (0..d_in)
                .map(|_| (0..d_out).map(|_| rng.gen_range(-1.5..1.5)).collect())
                .collect();
            let b: Vec<f64> = (0..d_out).map(|_| rng.gen_range(-0.5..0.5)).collect();
            let layer = AffineMap::new(Matrix::from_rows(&w).unwrap(), b).unwrap();
            let lhs: Vec<Vec<f64>> = (0..d_out)
                .map(|_| (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect())
                .collect();
            let ub: Vec<f64> = (0..3).map(|_| rng.gen_range(0.5..2.0)).collect();
            let next = SafeSet::from_polytope(
                ConvexPolytope::new(Matrix::from_rows(&lhs).unwrap(), ub).unwrap(),
            );
            let hint: Vec<f64> = (0..d_in).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let safe = backward_propagate(&next, &layer, &hint).unwrap();

            // any point of either polytope, rectified and mapped across the
            // layer's affine part, lands in the succeeding positive polytope
            let check = |x: &[f64]| {
                let y = layer.apply(&matrix::relu(x)).unwrap();
                assert!(
                    next.positive.contains(&y, 1e-9),
                    "trial {trial}: safe point led outside the next polytope"
                );
            };
            for s in 0..3000u64 {
                let mut xr = StdRng::seed_from_u64(trial * 100_000 + s);
                let x: Vec<f64> = (0..d_in).map(|_| xr.gen_range(-2.0..2.0)).collect();
                if safe.positive.contains(&x, 0.0) {
                    check(&x);
                }
                match &safe.negative {
                    Some(NegativePart::Box { eta }) => {
                        if x.iter().zip(eta).all(|(xi, e)| xi <= e) {
                            check(&x);
                        }
                    }
                    Some(NegativePart::Quadrant { polytope, .. }) if polytope.contains(&x, 0.0) => {
                        check(&x);
                    }
                    _ => {}
                }
            }
        }
    }
}
