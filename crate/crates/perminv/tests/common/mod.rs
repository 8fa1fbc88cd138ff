//! Shared oracles and samplers for the integration suites. Everything here
//! is deliberately independent of the library's computation paths: corner
//! enumeration instead of absolute-sum bounds, exact column division
//! instead of cross-multiplication, vertex enumeration instead of the
//! greedy exchange, and rejection-free polytope sampling via projections
//! plus hit-and-run.

use perminv::geometry::{AffineRegion, ConvexPolytope};
use perminv::matrix::{self, Matrix};
use rand::rngs::StdRng;
use rand::{Rng, SeedableRng};

/// Find a point of `poly` with slack at least `margin` on every constraint
/// by cyclic projection onto violated halfspaces, starting from `start`.
/// Returns `None` when the projections fail to converge.
pub fn find_feasible(poly: &ConvexPolytope, start: &[f64], margin: f64) -> Option<Vec<f64>> {
    let mut x = start.to_vec();
    for _ in 0..200_000 {
        let mut worst = -f64::INFINITY;
        let mut worst_t = 0;
        for t in 0..poly.constraints() {
            let w = poly.normal(t);
            let v = matrix::dot(&x, &w) - (poly.ub()[t] - margin);
            if v > worst {
                worst = v;
                worst_t = t;
            }
        }
        if worst <= 0.0 {
            return Some(x);
        }
        let w = poly.normal(worst_t);
        let nn = matrix::dot(&w, &w);
        if nn == 0.0 {
            return None;
        }
        // slight over-projection speeds convergence
        let step = 1.2 * worst / nn;
        for (xi, wi) in x.iter_mut().zip(&w) {
            *xi -= step * wi;
        }
    }
    None
}

/// Hit-and-run samples of a (possibly unbounded) polytope: random
/// directions from a feasible point, uniform steps within the feasible
/// segment, clamped to ±`cap` for unbounded directions.
pub fn sample_polytope(
    poly: &ConvexPolytope,
    start: &[f64],
    count: usize,
    cap: f64,
    seed: u64,
) -> Vec<Vec<f64>> {
    // an interior start keeps hit-and-run off boundary cones where random
    // directions almost never stay feasible; fall back to plain feasibility
    // for polytopes with empty interior
    let Some(mut x) =
        find_feasible(poly, start, 1e-3).or_else(|| find_feasible(poly, start, 0.0))
    else {
        return Vec::new();
    };
    let d = poly.dim();
    let mut rng = StdRng::seed_from_u64(seed);
    let mut out = Vec::with_capacity(count);
    let mut attempts = 0usize;
    while out.len() < count && attempts < count * 40 {
        attempts += 1;
        let dir: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let norm = matrix::norm2(&dir);
        if norm == 0.0 {
            continue;
        }
        let dir: Vec<f64> = dir.iter().map(|v| v / norm).collect();
        let mut lo = -cap;
        let mut hi = cap;
        for t in 0..poly.constraints() {
            let w = poly.normal(t);
            let slack = poly.ub()[t] - matrix::dot(&x, &w);
            let rate = matrix::dot(&dir, &w);
            if rate > 1e-15 {
                hi = hi.min(slack / rate);
            } else if rate < -1e-15 {
                lo = lo.max(slack / rate);
            } else if slack < -1e-9 {
                lo = 1.0;
                hi = 0.0;
            }
        }
        if hi <= lo {
            continue;
        }
        let t = rng.gen_range(lo..=hi);
        let cand: Vec<f64> = x.iter().zip(&dir).map(|(xi, di)| xi + t * di).collect();
        if poly.contains(&cand, 1e-9) {
            x = cand.clone();
            out.push(cand);
        }
    }
    out
}

/// Exact tie partition by brute force: per-index ranges from full corner
/// enumeration, parallelism by exact division against a pivot.
/// Regions fed to this oracle use power-of-two planted relations so every
/// comparison is exact in floating point.
pub fn oracle_tie_partition(region: &AffineRegion) -> Vec<Vec<usize>> {
    let d = region.dim();
    let k = region.generators();
    assert!(k <= 16, "corner enumeration needs a small generator count");

    // exact per-index min/max over all corners
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    for corner in 0..(1u32 << k) {
        let alpha: Vec<f64> = (0..k)
            .map(|r| if corner >> r & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        let x = region.point_from_coeffs(&alpha);
        for i in 0..d {
            lo[i] = lo[i].min(x[i]);
            hi[i] = hi[i].max(x[i]);
        }
    }

    let column = |i: usize| -> Vec<f64> {
        let mut u: Vec<f64> = region.basis().iter_rows().map(|row| row[i]).collect();
        u.push(region.center()[i]);
        u
    };
    let tied = |i: usize, j: usize| -> bool {
        if lo[i] > 0.0 && lo[j] > 0.0 {
            return true;
        }
        if hi[i] < 0.0 && hi[j] < 0.0 {
            return true;
        }
        let u = column(i);
        let w = column(j);
        let uz = u.iter().all(|v| *v == 0.0);
        let wz = w.iter().all(|v| *v == 0.0);
        if uz || wz {
            return uz && wz;
        }
        // exact ratio against the first nonzero entry of w
        let Some(p) = w.iter().position(|v| *v != 0.0) else {
            return false;
        };
        let lambda = u[p] / w[p];
        if lambda <= 0.0 {
            return false;
        }
        u.iter().zip(&w).all(|(a, b)| *a == lambda * b)
    };

    let mut parent: Vec<usize> = (0..d).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    for i in 0..d {
        for j in (i + 1)..d {
            if tied(i, j) {
                let (a, b) = (find(&mut parent, i), find(&mut parent, j));
                if a != b {
                    let (lo_r, hi_r) = if a < b { (a, b) } else { (b, a) };
                    parent[hi_r] = lo_r;
                }
            }
        }
    }
    let mut classes: Vec<Vec<usize>> = Vec::new();
    let mut class_of: Vec<Option<usize>> = vec![None; d];
    for i in 0..d {
        let r = find(&mut parent, i);
        match class_of[r] {
            Some(g) => classes[g].push(i),
            None => {
                class_of[r] = Some(classes.len());
                classes.push(vec![i]);
            }
        }
    }
    classes
}

/// Random region with planted exact tie structure: power-of-two multiples
/// (tied), negated multiples and independent columns (untied), and
/// sign-definite columns (tied through sign-definiteness).
pub fn planted_region(seed: u64, max_k: usize, max_d: usize) -> AffineRegion {
    let mut rng = StdRng::seed_from_u64(seed);
    let k = rng.gen_range(1..=max_k);
    let d = rng.gen_range(2..=max_d);
    let mut cols: Vec<Vec<f64>> = Vec::with_capacity(d);
    for i in 0..d {
        let style = if i == 0 { 0 } else { rng.gen_range(0..5) };
        match style {
            1 => {
                let src = rng.gen_range(0..i);
                let scale = [0.25, 0.5, 2.0, 4.0][rng.gen_range(0..4)];
                cols.push(cols[src].iter().map(|v| v * scale).collect());
            }
            2 => {
                let src = rng.gen_range(0..i);
                let scale = [0.5, 2.0][rng.gen_range(0..2)];
                cols.push(cols[src].iter().map(|v| -v * scale).collect());
            }
            3 => {
                let sign = if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
                let mut col: Vec<f64> = (0..k).map(|_| rng.gen_range(-0.5..0.5)).collect();
                col.push(sign * (k as f64 * 0.5 + rng.gen_range(0.5..2.0)));
                cols.push(col);
            }
            4 => {
                // exactly-zero column
                cols.push(vec![0.0; k + 1]);
            }
            _ => {
                let mut col: Vec<f64> = (0..k).map(|_| rng.gen_range(-2.0..2.0)).collect();
                col.push(rng.gen_range(-1.0..1.0));
                cols.push(col);
            }
        }
    }
    let rows: Vec<Vec<f64>> = (0..k)
        .map(|r| (0..d).map(|i| cols[i][r]).collect())
        .collect();
    let center: Vec<f64> = (0..d).map(|i| cols[i][k]).collect();
    AffineRegion::new(Matrix::from_rows(&rows).unwrap(), center).unwrap()
}

/// Vertex-enumeration oracle for the box-plus-one-gate LP: the optimum sits
/// at a box corner or on a box edge cut by the gate plane.
pub fn oracle_box_lp(objective: &[f64], gate: &[f64], gate_bound: f64) -> Option<f64> {
    let k = objective.len();
    let mut best: Option<f64> = None;
    let mut consider = |alpha: &[f64]| {
        if matrix::dot(alpha, gate) >= gate_bound - 1e-12 {
            let v = matrix::dot(alpha, objective);
            if best.is_none_or(|b| v > b) {
                best = Some(v);
            }
        }
    };
    for corner in 0..(1u32 << k) {
        let alpha: Vec<f64> = (0..k)
            .map(|i| if corner >> i & 1 == 1 { 1.0 } else { -1.0 })
            .collect();
        consider(&alpha);
    }
    for free in 0..k {
        if gate[free] == 0.0 {
            continue;
        }
        for corner in 0..(1u32 << (k - 1)) {
            let mut alpha = vec![0.0; k];
            let mut bit = 0;
            for (i, a) in alpha.iter_mut().enumerate() {
                if i == free {
                    continue;
                }
                *a = if corner >> bit & 1 == 1 { 1.0 } else { -1.0 };
                bit += 1;
            }
            let rest: f64 = (0..k)
                .filter(|&i| i != free)
                .map(|i| alpha[i] * gate[i])
                .sum();
            let need = (gate_bound - rest) / gate[free];
            if need.abs() <= 1.0 + 1e-12 {
                alpha[free] = need.clamp(-1.0, 1.0);
                consider(&alpha);
            }
        }
    }
    best
}
