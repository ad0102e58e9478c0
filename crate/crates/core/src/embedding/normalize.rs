//! L2 and ZCA-whitening normalization of speaker embeddings.

use super::{EmbeddingError, EmbeddingSet};
use crate::eigen::symmetric_eigen;
use crate::linalg::{self, Matrix};

/// Scales a vector to unit Euclidean norm.
pub fn l2_normalize(v: &[f64]) -> Result<Vec<f64>, EmbeddingError> {
    let n = linalg::norm(v);
    if n <= 0.0 || !n.is_finite() {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok(v.iter().map(|x| x / n).collect())
}

/// Affine whitening transform fitted on an embedding set.
///
/// ZCA form: the matrix is `U (L + eps I)^(-1/2) U^T` for the
/// eigendecomposition `U L U^T` of the biased sample covariance, so it is
/// symmetric and keeps outputs as close to the inputs as any whitening can.
#[derive(Debug, Clone, PartialEq)]
pub struct WhiteningTransform {
    pub mean: Vec<f64>,
    pub matrix: Matrix,
    pub epsilon: f64,
}

/// Fits a ZCA whitening transform on the set.
///
/// `epsilon` is added to every covariance eigenvalue before the inverse
/// square root; pass a small positive value (1e-5 is a reasonable default)
/// when the fit set is small relative to the dimension.
pub fn fit_whitening(
    set: &EmbeddingSet,
    epsilon: f64,
) -> Result<WhiteningTransform, EmbeddingError> {
    if set.len() < 2 {
        return Err(EmbeddingError::DegenerateSet {
            needed: 2,
            got: set.len(),
        });
    }
    if !(epsilon >= 0.0) {
        return Err(EmbeddingError::BadEpsilon(epsilon));
    }
    let points = set.as_matrix();
    let mean = linalg::row_mean(&points);
    let cov = linalg::covariance(&points, &mean);
    let eig = symmetric_eigen(&cov).ok_or_else(|| {
        EmbeddingError::NumericalFailure("covariance eigendecomposition did not converge".into())
    })?;

    let d = set.dim();
    let mut inv_sqrt = Vec::with_capacity(d);
    for &lambda in &eig.values {
        // Tiny negative eigenvalues are roundoff from the Jacobi sweeps.
        let l = lambda.max(0.0) + epsilon;
        if l <= 0.0 {
            return Err(EmbeddingError::NumericalFailure(
                "singular covariance with epsilon = 0".into(),
            ));
        }
        inv_sqrt.push(1.0 / l.sqrt());
    }

    // U diag(inv_sqrt) U^T
    let mut scaled = eig.vectors.clone();
    for i in 0..d {
        for j in 0..d {
            scaled[(i, j)] *= inv_sqrt[j];
        }
    }
    let matrix = scaled.matmul(&eig.vectors.transpose());
    Ok(WhiteningTransform {
        mean,
        matrix,
        epsilon,
    })
}

/// Applies `t.matrix * (v - t.mean)`.
pub fn apply_whitening(t: &WhiteningTransform, v: &[f64]) -> Result<Vec<f64>, EmbeddingError> {
    if v.len() != t.mean.len() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: t.mean.len(),
            actual: v.len(),
        });
    }
    let centered: Vec<f64> = v.iter().zip(&t.mean).map(|(x, m)| x - m).collect();
    Ok(t.matrix.matvec(&centered))
}
