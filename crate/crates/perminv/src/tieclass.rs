//! Tie-class analysis of affine regions.
//!
//! Two coordinate indices are *tied* when every point of the region has the
//! same sign at both. Tiedness is decided without LP calls: either both
//! components are sign-definite (their exact ranges come from summing
//! absolute generator entries), or the per-index columns
//! `[v_0,i, …, v_{k−1},i, c_i]` are parallel with a positive ratio. The
//! parallel test cross-multiplies against a pivot entry instead of dividing,
//! so zero entries need no special casing.

use crate::geometry::AffineRegion;

/// Sign behaviour of one tie class over the whole region.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SignHint {
    AlwaysNonNegative,
    AlwaysNonPositive,
    Mixed,
}

/// A partition of the coordinate indices into tie classes.
#[derive(Debug, Clone)]
pub struct TiePartition {
    classes: Vec<Vec<usize>>,
    hints: Vec<SignHint>,
}

impl TiePartition {
    pub fn classes(&self) -> &[Vec<usize>] {
        &self.classes
    }

    pub fn hint(&self, class: usize) -> SignHint {
        self.hints[class]
    }

    pub fn len(&self) -> usize {
        self.classes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.classes.is_empty()
    }

    /// Iterate classes with their sign hints.
    pub fn iter(&self) -> impl Iterator<Item = (&[usize], SignHint)> {
        self.classes
            .iter()
            .map(Vec::as_slice)
            .zip(self.hints.iter().copied())
    }
}

/// Default sign tolerance for a region: `1e−7 · (1 + ‖c‖∞)`.
///
/// Strict sign tests at exactly zero are numerically fragile; scaling by the
/// center magnitude keeps the threshold meaningful for the large weights
/// (up to 10³) that appear in the benchmark networks.
pub fn default_tie_tol(region: &AffineRegion) -> f64 {
    1e-7 * (1.0 + crate::matrix::inf_norm(region.center()))
}

/// Exact range of component `i` over the region:
/// `(c_i − Σ_k |v_k,i|, c_i + Σ_k |v_k,i|)`.
///
/// The extremes are attained at corner assignments `α_k = ±sign(v_k,i)`,
/// so the sums are accumulated row by row in basis order to match corner
/// enumeration bit for bit.
pub fn component_bounds(region: &AffineRegion, index: usize) -> (f64, f64) {
    let mut lo = region.center()[index];
    let mut hi = lo;
    for row in region.basis().iter_rows() {
        let a = row[index].abs();
        lo -= a;
        hi += a;
    }
    (lo, hi)
}

/// Decide whether indices `i1` and `i2` are tied, using the three
/// conditions: both always positive, both always negative, or parallel
/// per-index columns with a positive ratio.
pub fn are_tied(region: &AffineRegion, i1: usize, i2: usize, tol: f64) -> bool {
    debug_assert_ne!(i1, i2);
    let (lo1, hi1) = component_bounds(region, i1);
    let (lo2, hi2) = component_bounds(region, i2);
    if lo1 > tol && lo2 > tol {
        return true;
    }
    if hi1 < -tol && hi2 < -tol {
        return true;
    }
    columns_parallel_positive(region, i1, i2, tol)
}

/// Cross-multiplication parallel test on the columns
/// `u = [v_·,i1, c_i1]`, `w = [v_·,i2, c_i2]`: picks the largest-magnitude
/// pivot entry of the larger column and checks `u_a w_p = u_p w_a` for all
/// `a`, plus `u · w > 0` for the positivity of the ratio.
fn columns_parallel_positive(region: &AffineRegion, i1: usize, i2: usize, tol: f64) -> bool {
    let k = region.generators();
    let mut u = Vec::with_capacity(k + 1);
    let mut w = Vec::with_capacity(k + 1);
    for row in region.basis().iter_rows() {
        u.push(row[i1]);
        w.push(row[i2]);
    }
    u.push(region.center()[i1]);
    w.push(region.center()[i2]);

    let dotuw: f64 = u.iter().zip(&w).map(|(a, b)| a * b).sum();
    if dotuw <= 0.0 {
        return false;
    }

    // pivot from the column with the larger entry, so the reference is never zero
    let (piv, _) = u
        .iter()
        .chain(w.iter())
        .enumerate()
        .max_by(|a, b| a.1.abs().partial_cmp(&b.1.abs()).unwrap())
        .expect("columns are non-empty");
    let p = piv % (k + 1);

    let rel = tol.max(1e-12);
    for a in 0..=k {
        let x = u[a] * w[p];
        let y = u[p] * w[a];
        let scale = u[a].abs() * w[p].abs() + u[p].abs() * w[a].abs();
        if (x - y).abs() > rel * scale {
            return false;
        }
    }
    true
}

/// Group all indices into tie classes by pairwise checks with union-find.
///
/// Exactly-zero columns (all generator entries and the center entry zero)
/// go into one dedicated class marked `AlwaysNonPositive`; their ReLU image
/// is identically zero and isolating them keeps the masked bases sparse.
/// Union-find may coarsen the partition when `are_tied` is non-transitive
/// under tolerance, which only loosens the over-approximation.
pub fn compute_tie_classes(region: &AffineRegion, tol: f64) -> TiePartition {
    let d = region.dim();
    let mut parent: Vec<usize> = (0..d).collect();

    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    fn union(parent: &mut [usize], a: usize, b: usize) {
        let ra = find(parent, a);
        let rb = find(parent, b);
        if ra != rb {
            let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
            parent[hi] = lo;
        }
    }

    let is_zero_col = |i: usize| {
        region.center()[i] == 0.0 && region.basis().iter_rows().all(|row| row[i] == 0.0)
    };
    let zero_cols: Vec<usize> = (0..d).filter(|&i| is_zero_col(i)).collect();
    for pair in zero_cols.windows(2) {
        union(&mut parent, pair[0], pair[1]);
    }

    let live: Vec<usize> = (0..d).filter(|i| !zero_cols.contains(i)).collect();
    for (a, &i1) in live.iter().enumerate() {
        for &i2 in &live[a + 1..] {
            if find(&mut parent, i1) == find(&mut parent, i2) {
                continue;
            }
            if are_tied(region, i1, i2, tol) {
                union(&mut parent, i1, i2);
            }
        }
    }

    let mut groups: Vec<Vec<usize>> = Vec::new();
    let mut root_of: Vec<Option<usize>> = vec![None; d];
    for i in 0..d {
        let r = find(&mut parent, i);
        match root_of[r] {
            Some(g) => groups[g].push(i),
            None => {
                root_of[r] = Some(groups.len());
                groups.push(vec![i]);
            }
        }
    }

    let hints = groups
        .iter()
        .map(|class| {
            let mut all_nonpos = true;
            let mut all_nonneg = true;
            for &i in class {
                let (lo, hi) = component_bounds(region, i);
                if hi > tol {
                    all_nonpos = false;
                }
                if lo < -tol {
                    all_nonneg = false;
                }
            }
            if all_nonpos {
                SignHint::AlwaysNonPositive
            } else if all_nonneg {
                SignHint::AlwaysNonNegative
            } else {
                SignHint::Mixed
            }
        })
        .collect();

    TiePartition {
        classes: groups,
        hints,
    }
}
