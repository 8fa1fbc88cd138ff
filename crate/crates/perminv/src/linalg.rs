//! Small dense numeric kernels: one-sided Jacobi SVD and an SPD solver.
//!
//! The sizes involved here are modest (a few hundred rows at most), so
//! straightforward dense algorithms are sufficient and keep the crate free
//! of external linear algebra dependencies.

use crate::matrix::Matrix;

/// Result of orthogonalizing the rows of a matrix.
///
/// `work` holds mutually orthogonal rows; row `i` equals `σ_i · v_i` where
/// `σ_i` is the i-th singular value of the input and `v_i` the corresponding
/// unit right singular vector. `mixer` is the accumulated orthogonal matrix
/// with `input = mixer^T · work`, so row `i` of `mixer` is the i-th left
/// singular vector expressed over the original rows.
pub struct RowSvd {
    pub work: Matrix,
    pub mixer: Matrix,
}

/// One-sided Jacobi orthogonalization of the rows of `b`.
///
/// Rotates row pairs until all pairwise dot products vanish relative to the
/// row norms. Convergence is quadratic once sweeps settle; `MAX_SWEEPS` is a
/// hard stop that in practice is never reached for conditioned inputs.
pub fn jacobi_row_svd(b: &Matrix) -> RowSvd {
    const MAX_SWEEPS: usize = 64;
    const EPS: f64 = 1e-14;

    let k = b.rows();
    let mut work = b.clone();
    let mut mixer = Matrix::identity(k);

    for _ in 0..MAX_SWEEPS {
        let mut rotated = false;
        for p in 0..k {
            for q in (p + 1)..k {
                let (app, aqq, apq) = {
                    let rp = work.row(p);
                    let rq = work.row(q);
                    let mut app = 0.0;
                    let mut aqq = 0.0;
                    let mut apq = 0.0;
                    for (x, y) in rp.iter().zip(rq) {
                        app += x * x;
                        aqq += y * y;
                        apq += x * y;
                    }
                    (app, aqq, apq)
                };
                if apq.abs() <= EPS * (app * aqq).sqrt() || app == 0.0 || aqq == 0.0 {
                    continue;
                }
                rotated = true;
                let tau = (aqq - app) / (2.0 * apq);
                let t = tau.signum() / (tau.abs() + (1.0 + tau * tau).sqrt());
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = c * t;
                rotate_rows(&mut work, p, q, c, s);
                rotate_rows(&mut mixer, p, q, c, s);
            }
        }
        if !rotated {
            break;
        }
    }

    RowSvd { work, mixer }
}

fn rotate_rows(m: &mut Matrix, p: usize, q: usize, c: f64, s: f64) {
    let cols = m.cols();
    for j in 0..cols {
        let a = m.get(p, j);
        let b = m.get(q, j);
        m.set(p, j, c * a - s * b);
        m.set(q, j, s * a + c * b);
    }
}

/// Solve `G x = rhs` for symmetric positive semidefinite `G` via Cholesky
/// with a small diagonal ridge. The ridge keeps rank-deficient systems
/// solvable; callers use this for least-squares steps where any minimizer
/// is acceptable.
pub fn solve_spd(g: &Matrix, rhs: &[f64]) -> Vec<f64> {
    let n = g.rows();
    debug_assert_eq!(g.cols(), n);
    debug_assert_eq!(rhs.len(), n);

    let trace: f64 = (0..n).map(|i| g.get(i, i)).sum();
    let ridge = 1e-12 * (trace / n.max(1) as f64).max(1e-30);

    // lower-triangular factor, row-major
    let mut l = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..=i {
            let mut sum = g.get(i, j);
            if i == j {
                sum += ridge;
            }
            for t in 0..j {
                sum -= l[i * n + t] * l[j * n + t];
            }
            if i == j {
                l[i * n + i] = sum.max(ridge).sqrt();
            } else {
                l[i * n + j] = sum / l[j * n + j];
            }
        }
    }

    let mut y = vec![0.0; n];
    for i in 0..n {
        let mut sum = rhs[i];
        for t in 0..i {
            sum -= l[i * n + t] * y[t];
        }
        y[i] = sum / l[i * n + i];
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut sum = y[i];
        for t in (i + 1)..n {
            sum -= l[t * n + i] * x[t];
        }
        x[i] = sum / l[i * n + i];
    }
    x
}
