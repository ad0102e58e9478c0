//! 2-D PCA projection of an embedding set, for cluster plots.

use super::{EmbeddingError, EmbeddingSet};
use crate::eigen::symmetric_eigen;
use crate::linalg::{self};

/// Projects the centered set onto its top two principal axes.
///
/// Each output row is `(x, y, dataset_tag)`. The sign of each axis is
/// fixed by making its largest-magnitude loading positive, so the layout
/// is deterministic.
pub fn project_2d(set: &EmbeddingSet) -> Result<Vec<(f64, f64, String)>, EmbeddingError> {
    if set.dim() < 2 {
        return Err(EmbeddingError::DimensionMismatch {
            expected: 2,
            actual: set.dim(),
        });
    }
    if set.len() < 3 {
        return Err(EmbeddingError::DegenerateSet {
            needed: 3,
            got: set.len(),
        });
    }
    let points = set.as_matrix();
    let mean = linalg::row_mean(&points);
    let cov = linalg::covariance(&points, &mean);
    let eig = symmetric_eigen(&cov).ok_or_else(|| {
        EmbeddingError::NumericalFailure("covariance eigendecomposition did not converge".into())
    })?;

    let d = set.dim();
    let mut axes = [vec![0.0; d], vec![0.0; d]];
    for (k, axis) in axes.iter_mut().enumerate() {
        for i in 0..d {
            axis[i] = eig.vectors[(i, k)];
        }
        // Deterministic sign: largest-magnitude loading positive.
        let mut argmax = 0;
        for i in 1..d {
            if axis[i].abs() > axis[argmax].abs() {
                argmax = i;
            }
        }
        if axis[argmax] < 0.0 {
            for v in axis.iter_mut() {
                *v = -*v;
            }
        }
    }

    let mut out = Vec::with_capacity(set.len());
    for e in set.iter() {
        let centered: Vec<f64> = e.vector.iter().zip(&mean).map(|(x, m)| x - m).collect();
        out.push((
            linalg::dot(&centered, &axes[0]),
            linalg::dot(&centered, &axes[1]),
            e.dataset.clone(),
        ));
    }
    Ok(out)
}
