//! Forward propagation of reach regions across one layer: exact affine
//! pushforward, tie-class ReLU over-approximation, sound basis reduction.

use crate::error::Result;
use crate::geometry::{AffineMap, AffineRegion};
use crate::linalg::jacobi_row_svd;
use crate::matrix::{self, Matrix};
use crate::tieclass::{self, SignHint, TiePartition};

/// Tolerances used by the forward chain.
#[derive(Debug, Clone, Copy)]
pub struct ForwardTolerances {
    /// Sign tolerance for tie computation; `None` scales automatically from
    /// the region center (see [`tieclass::default_tie_tol`]).
    pub tie_tol: Option<f64>,
    /// Relative singular-value cutoff for basis reduction.
    pub singular_cutoff: f64,
}

impl Default for ForwardTolerances {
    fn default() -> Self {
        Self {
            tie_tol: None,
            singular_cutoff: 1e-9,
        }
    }
}

/// Over-approximate the ReLU image of a region using its tie partition.
///
/// The output center is `ReLU(c)`. For every class not marked
/// `AlwaysNonPositive` and every input generator, the generator masked to
/// the class indices becomes an output generator; all-zero masked rows are
/// dropped, and generators of `AlwaysNonPositive` classes are dropped
/// entirely since those components are identically zero after the ReLU.
pub fn relu_over_approx(region: &AffineRegion, partition: &TiePartition) -> AffineRegion {
    let d = region.dim();
    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (class, hint) in partition.iter() {
        if hint == SignHint::AlwaysNonPositive {
            continue;
        }
        for row in region.basis().iter_rows() {
            let mut masked = vec![0.0; d];
            let mut nonzero = false;
            for &i in class {
                masked[i] = row[i];
                nonzero |= row[i] != 0.0;
            }
            if nonzero {
                rows.push(masked);
            }
        }
    }
    let basis = if rows.is_empty() {
        Matrix::empty(d)
    } else {
        Matrix::from_rows(&rows).expect("masked rows share the region dimension")
    };
    AffineRegion::new(basis, matrix::relu(region.center()))
        .expect("masked basis keeps the region dimension")
}

/// Replace the basis by an orthogonal one that still contains the region.
///
/// For each group of rows connected through shared support columns, a
/// one-sided Jacobi SVD yields orthogonal directions `σ_i v_i`; scaling each
/// by the ℓ1 norm of the corresponding left-singular column bounds the new
/// coefficient of any old region point, so containment is preserved (naive
/// removal of dependent rows would shrink the region). Singular values at or
/// below `tol · σ_max` are dropped.
pub fn reduce_basis(region: &AffineRegion, tol: f64) -> AffineRegion {
    let d = region.dim();
    let live_rows: Vec<usize> = (0..region.generators())
        .filter(|&r| region.basis().row(r).iter().any(|v| *v != 0.0))
        .collect();
    if live_rows.is_empty() {
        return AffineRegion::new(Matrix::empty(d), region.center().to_vec())
            .expect("center dimension unchanged");
    }

    // Group rows into connected components via shared nonzero columns. The
    // masked bases produced by the ReLU step have per-class disjoint support,
    // so this turns one large SVD into many small independent ones.
    let components = support_components(region.basis(), &live_rows);

    struct Reduced {
        row: Vec<f64>,
        sigma: f64,
    }
    let mut reduced: Vec<Reduced> = Vec::new();
    let mut sigma_max: f64 = 0.0;

    for comp in &components {
        let sub_rows: Vec<Vec<f64>> = comp
            .rows
            .iter()
            .map(|&r| comp.cols.iter().map(|&c| region.basis().get(r, c)).collect())
            .collect();
        let sub = Matrix::from_rows(&sub_rows).expect("component rows share support");
        let svd = jacobi_row_svd(&sub);
        for i in 0..svd.work.rows() {
            let sigma = matrix::norm2(svd.work.row(i));
            if sigma == 0.0 {
                continue;
            }
            sigma_max = sigma_max.max(sigma);
            let l1: f64 = svd.mixer.row(i).iter().map(|v| v.abs()).sum();
            let mut full = vec![0.0; d];
            for (j, &c) in comp.cols.iter().enumerate() {
                full[c] = l1 * svd.work.get(i, j);
            }
            reduced.push(Reduced { row: full, sigma });
        }
    }

    let kept: Vec<Vec<f64>> = reduced
        .into_iter()
        .filter(|r| r.sigma > tol * sigma_max)
        .map(|r| r.row)
        .collect();
    let basis = if kept.is_empty() {
        Matrix::empty(d)
    } else {
        Matrix::from_rows(&kept).expect("reduced rows share the region dimension")
    };
    AffineRegion::new(basis, region.center().to_vec()).expect("center dimension unchanged")
}

struct Component {
    rows: Vec<usize>,
    cols: Vec<usize>,
}

/// Connected components of rows under the "share a nonzero column" relation,
/// ordered by smallest column index for determinism.
fn support_components(basis: &Matrix, live_rows: &[usize]) -> Vec<Component> {
    let d = basis.cols();
    let mut parent: Vec<usize> = (0..live_rows.len()).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }

    let mut col_owner: Vec<Option<usize>> = vec![None; d];
    for (ri, &r) in live_rows.iter().enumerate() {
        for (c, &v) in basis.row(r).iter().enumerate() {
            if v == 0.0 {
                continue;
            }
            match col_owner[c] {
                Some(prev) => {
                    let ra = find(&mut parent, prev);
                    let rb = find(&mut parent, ri);
                    if ra != rb {
                        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
                        parent[hi] = lo;
                    }
                }
                None => col_owner[c] = Some(ri),
            }
        }
    }

    let mut groups: Vec<Component> = Vec::new();
    let mut group_of: Vec<Option<usize>> = vec![None; live_rows.len()];
    for (ri, &r) in live_rows.iter().enumerate() {
        let root = find(&mut parent, ri);
        let g = match group_of[root] {
            Some(g) => g,
            None => {
                group_of[root] = Some(groups.len());
                groups.push(Component {
                    rows: Vec::new(),
                    cols: Vec::new(),
                });
                groups.len() - 1
            }
        };
        groups[g].rows.push(r);
    }
    for (c, owner) in col_owner.iter().enumerate() {
        if let Some(ri) = *owner {
            let root = find(&mut parent, ri);
            let g = group_of[root].expect("owner row was grouped");
            groups[g].cols.push(c);
        }
    }
    groups
}

/// One full layer step: pushforward across the affine part, tie-class ReLU
/// over-approximation, then basis reduction. The result over-approximates
/// the exact layer image of the input region.
pub fn forward_propagate(
    region: &AffineRegion,
    layer: &AffineMap,
    tols: &ForwardTolerances,
) -> Result<AffineRegion> {
    let pre_relu = region.pushforward(layer)?;
    let tie_tol = tols
        .tie_tol
        .unwrap_or_else(|| tieclass::default_tie_tol(&pre_relu));
    let partition = tieclass::compute_tie_classes(&pre_relu, tie_tol);
    let post = relu_over_approx(&pre_relu, &partition);
    Ok(reduce_basis(&post, tols.singular_cutoff))
}
