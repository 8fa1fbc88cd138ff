//! Core geometric types: affine regions, convex polytopes, affine maps.
//!
//! An affine region is the set `{ α B + c : ‖α‖∞ ≤ 1 }` for a basis matrix
//! `B` (one generator per row) and a center row vector `c`. A convex
//! polytope is `{ x : x L ≤ u }` with one constraint per column of `L`.
//! Affine maps act on row vectors as `x → x W + b`.
//!
//! All values here are immutable after construction and every operation is
//! a pure function, so they can be shared freely across threads.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::matrix::{self, Matrix};

/// An affine map `x → x W + b` with `W` of shape `d_in × d_out`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineMap {
    pub weights: Matrix,
    pub bias: Vec<f64>,
}

impl AffineMap {
    pub fn new(weights: Matrix, bias: Vec<f64>) -> Result<Self> {
        if bias.len() != weights.cols() {
            return Err(Error::Dimension(format!(
                "bias length {} does not match weight columns {}",
                bias.len(),
                weights.cols()
            )));
        }
        Ok(Self { weights, bias })
    }

    pub fn dim_in(&self) -> usize {
        self.weights.rows()
    }

    pub fn dim_out(&self) -> usize {
        self.weights.cols()
    }

    /// `x W + b`, the affine part of a layer (no activation).
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        let y = self.weights.apply_left(x)?;
        Ok(matrix::add(&y, &self.bias))
    }
}

/// Bounded affine region `{ α B + c : ‖α‖∞ ≤ 1 }`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffineRegion {
    basis: Matrix,
    center: Vec<f64>,
}

impl AffineRegion {
    pub fn new(basis: Matrix, center: Vec<f64>) -> Result<Self> {
        if basis.cols() != center.len() {
            return Err(Error::Dimension(format!(
                "basis has {} columns but center has dimension {}",
                basis.cols(),
                center.len()
            )));
        }
        Ok(Self { basis, center })
    }

    /// Region consisting of a single point.
    pub fn point(center: Vec<f64>) -> Self {
        let d = center.len();
        Self {
            basis: Matrix::empty(d),
            center,
        }
    }

    pub fn basis(&self) -> &Matrix {
        &self.basis
    }

    pub fn center(&self) -> &[f64] {
        &self.center
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.center.len()
    }

    /// Number of generators.
    pub fn generators(&self) -> usize {
        self.basis.rows()
    }

    pub fn is_finite(&self) -> bool {
        self.basis.is_finite() && self.center.iter().all(|v| v.is_finite())
    }

    /// Exact image under an affine map: basis `B W`, center `c W + b`.
    pub fn pushforward(&self, map: &AffineMap) -> Result<AffineRegion> {
        if self.dim() != map.dim_in() {
            return Err(Error::Dimension(format!(
                "region dimension {} does not match map input dimension {}",
                self.dim(),
                map.dim_in()
            )));
        }
        let basis = self.basis.matmul(&map.weights)?;
        let center = map.apply(&self.center)?;
        Ok(AffineRegion { basis, center })
    }

    /// The point `α B + c`.
    pub fn point_from_coeffs(&self, alpha: &[f64]) -> Vec<f64> {
        debug_assert_eq!(alpha.len(), self.generators());
        let mut x = self.center.clone();
        for (a, row) in alpha.iter().zip(self.basis.iter_rows()) {
            if *a == 0.0 {
                continue;
            }
            for (xi, vi) in x.iter_mut().zip(row) {
                *xi += a * vi;
            }
        }
        x
    }

    /// Membership test for a reduced (mutually orthogonal rows) basis.
    ///
    /// Recovers `α` by projecting `x − c` onto each generator, then accepts
    /// iff the residual is within `tol` and `‖α‖∞ ≤ 1 + tol`. Callers must
    /// reduce the basis first (see [`crate::forward::reduce_basis`]); a
    /// non-orthogonal basis is reported as an error rather than silently
    /// producing a wrong answer.
    pub fn contains(&self, x: &[f64], tol: f64) -> Result<bool> {
        if x.len() != self.dim() {
            return Err(Error::Dimension(format!(
                "point dimension {} does not match region dimension {}",
                x.len(),
                self.dim()
            )));
        }
        self.check_reduced()?;
        let diff = matrix::sub(x, &self.center);
        let mut residual = diff.clone();
        let mut alpha_inf: f64 = 0.0;
        for row in self.basis.iter_rows() {
            let nn = matrix::dot(row, row);
            if nn == 0.0 {
                continue;
            }
            let a = matrix::dot(&diff, row) / nn;
            alpha_inf = alpha_inf.max(a.abs());
            for (r, v) in residual.iter_mut().zip(row) {
                *r -= a * v;
            }
        }
        Ok(matrix::norm2(&residual) <= tol && alpha_inf <= 1.0 + tol)
    }

    fn check_reduced(&self) -> Result<()> {
        let k = self.generators();
        for p in 0..k {
            let rp = self.basis.row(p);
            let np = matrix::norm2(rp);
            for q in (p + 1)..k {
                let rq = self.basis.row(q);
                let nq = matrix::norm2(rq);
                if matrix::dot(rp, rq).abs() > 1e-7 * np * nq {
                    return Err(Error::NonReducedBasis);
                }
            }
        }
        Ok(())
    }

    /// `count` points `α B + c` with `α` drawn uniformly from `[−1, 1]^k`
    /// by a seeded generator; identical seeds give identical samples.
    pub fn sample(&self, count: usize, seed: u64) -> Vec<Vec<f64>> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let k = self.generators();
        (0..count)
            .map(|_| {
                let alpha: Vec<f64> = (0..k).map(|_| rng.gen_range(-1.0..=1.0)).collect();
                self.point_from_coeffs(&alpha)
            })
            .collect()
    }
}

/// Convex polytope `{ x : x L ≤ u }`, one constraint per column of `L`.
#[derive(Debug, Clone, PartialEq)]
pub struct ConvexPolytope {
    lhs: Matrix,
    ub: Vec<f64>,
}

impl ConvexPolytope {
    pub fn new(lhs: Matrix, ub: Vec<f64>) -> Result<Self> {
        if lhs.cols() != ub.len() {
            return Err(Error::Dimension(format!(
                "constraint matrix has {} columns but {} bounds given",
                lhs.cols(),
                ub.len()
            )));
        }
        if ub.is_empty() {
            return Err(Error::Input(
                "a polytope needs at least one constraint".into(),
            ));
        }
        Ok(Self { lhs, ub })
    }

    pub fn lhs(&self) -> &Matrix {
        &self.lhs
    }

    pub fn ub(&self) -> &[f64] {
        &self.ub
    }

    /// Ambient dimension.
    pub fn dim(&self) -> usize {
        self.lhs.rows()
    }

    /// Number of constraints.
    pub fn constraints(&self) -> usize {
        self.ub.len()
    }

    /// Constraint normal `t` as an owned column.
    pub fn normal(&self, t: usize) -> Vec<f64> {
        self.lhs.col(t)
    }

    /// True iff `x L ≤ u + tol` componentwise.
    pub fn contains(&self, x: &[f64], tol: f64) -> bool {
        debug_assert_eq!(x.len(), self.dim());
        let vals = self.lhs.apply_left(x).expect("dimension checked");
        vals.iter().zip(&self.ub).all(|(v, u)| *v <= u + tol)
    }

    /// Largest constraint violation of `x` (≤ 0 when inside).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let vals = self.lhs.apply_left(x).expect("dimension checked");
        vals.iter()
            .zip(&self.ub)
            .fold(f64::NEG_INFINITY, |m, (v, u)| m.max(v - u))
    }

    /// Exact weakest precondition across `x → x W + b`:
    /// `lhs = W L`, `ub = u − b L`.
    pub fn pullback(&self, map: &AffineMap) -> Result<ConvexPolytope> {
        if map.dim_out() != self.dim() {
            return Err(Error::Dimension(format!(
                "map output dimension {} does not match polytope dimension {}",
                map.dim_out(),
                self.dim()
            )));
        }
        let lhs = map.weights.matmul(&self.lhs)?;
        let shift = self.lhs.apply_left(&map.bias)?;
        let ub = matrix::sub(&self.ub, &shift);
        Ok(ConvexPolytope { lhs, ub })
    }

    /// Conjoin additional constraints (same ambient dimension).
    pub fn conjoin(&self, extra_lhs: &Matrix, extra_ub: &[f64]) -> Result<ConvexPolytope> {
        if extra_lhs.rows() != self.dim() {
            return Err(Error::Dimension(format!(
                "extra constraints live in dimension {}, polytope in {}",
                extra_lhs.rows(),
                self.dim()
            )));
        }
        let d = self.dim();
        let m0 = self.constraints();
        let m1 = extra_ub.len();
        let mut lhs = Matrix::zeros(d, m0 + m1);
        for i in 0..d {
            for t in 0..m0 {
                lhs.set(i, t, self.lhs.get(i, t));
            }
            for t in 0..m1 {
                lhs.set(i, m0 + t, extra_lhs.get(i, t));
            }
        }
        let mut ub = self.ub.clone();
        ub.extend_from_slice(extra_ub);
        ConvexPolytope::new(lhs, ub)
    }

    /// The nonnegative orthant constraints `x ≥ 0` in `x L ≤ u` form.
    pub fn nonneg_orthant(dim: usize) -> (Matrix, Vec<f64>) {
        let mut lhs = Matrix::zeros(dim, dim);
        for i in 0..dim {
            lhs.set(i, i, -1.0);
        }
        (lhs, vec![0.0; dim])
    }
}
