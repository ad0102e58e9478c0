//! Symmetric eigendecomposition via the cyclic Jacobi method.
//!
//! The whitening and projection code only ever decomposes covariance
//! matrices (symmetric, at most a few hundred rows), for which Jacobi is
//! accurate, deterministic, and free of external dependencies.

/// Eigendecomposition `A = V * diag(values) * V^T` of a symmetric matrix.
///
/// `values` are sorted descending and `vectors` holds the matching
/// eigenvectors as columns of `V`, returned row-major.
#[derive(Debug, Clone)]
pub struct SymmetricEigen {
    pub values: Vec<f64>,
    /// Row-major D x D matrix whose column j is the eigenvector for `values[j]`.
    pub vectors: crate::linalg::Matrix,
}

const MAX_SWEEPS: usize = 64;

/// Decomposes a symmetric matrix. Returns `None` if the off-diagonal mass
/// has not converged after the sweep budget.
pub fn symmetric_eigen(matrix: &crate::linalg::Matrix) -> Option<SymmetricEigen> {
    let n = matrix.rows();
    assert_eq!(n, matrix.cols(), "matrix must be square");
    let mut a = matrix.clone();
    let mut v = crate::linalg::Matrix::identity(n);

    if n <= 1 {
        let values = if n == 1 { vec![a[(0, 0)]] } else { vec![] };
        return Some(SymmetricEigen { values, vectors: v });
    }

    let scale = a.max_abs().max(1.0);
    let tol = 1e-14 * scale;

    let mut converged = false;
    for _ in 0..MAX_SWEEPS {
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].abs());
            }
        }
        if off <= tol {
            converged = true;
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                if apq.abs() <= tol * 1e-2 {
                    continue;
                }
                let app = a[(p, p)];
                let aqq = a[(q, q)];
                // Classic stable rotation: t = sign(theta) / (|theta| + sqrt(theta^2 + 1))
                let theta = (aqq - app) / (2.0 * apq);
                let t = if theta >= 0.0 {
                    1.0 / (theta + (theta * theta + 1.0).sqrt())
                } else {
                    -1.0 / (-theta + (theta * theta + 1.0).sqrt())
                };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;

                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - s * akq;
                    a[(k, q)] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - s * aqk;
                    a[(q, k)] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[(k, p)];
                    let vkq = v[(k, q)];
                    v[(k, p)] = c * vkp - s * vkq;
                    v[(k, q)] = s * vkp + c * vkq;
                }
            }
        }
    }
    if !converged {
        // One last check after the final sweep.
        let mut off = 0.0f64;
        for p in 0..n {
            for q in (p + 1)..n {
                off = off.max(a[(p, q)].abs());
            }
        }
        if off > tol {
            return None;
        }
    }

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(j, j)].partial_cmp(&a[(i, i)]).unwrap());

    let mut values = Vec::with_capacity(n);
    let mut vectors = crate::linalg::Matrix::zeros(n, n);
    for (new_col, &old_col) in order.iter().enumerate() {
        values.push(a[(old_col, old_col)]);
        for k in 0..n {
            vectors[(k, new_col)] = v[(k, old_col)];
        }
    }
    Some(SymmetricEigen { values, vectors })
}
