//! Speaker-embedding toolkit: ingestion, normalization, trial scoring,
//! EER, and 2-D projection.
//!
//! Embeddings arrive from files (or the synthetic generator in
//! [`synthetic`]); training the upstream speaker encoder is out of scope.

mod io;
mod normalize;
mod project;
mod score;
pub mod synthetic;

pub use io::{read_embeddings, read_trials, write_embeddings, write_trials, TrialSpec};
pub use normalize::{apply_whitening, fit_whitening, l2_normalize, WhiteningTransform};
pub use project::project_2d;
pub use score::{compute_eer, cosine_score, score_trials, TrialScore};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum EmbeddingError {
    #[error("zero vector has no direction")]
    ZeroVector,
    #[error("degenerate set: need at least {needed} points, got {got}")]
    DegenerateSet { needed: usize, got: usize },
    #[error("numerical failure: {0}")]
    NumericalFailure(String),
    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },
    #[error("trials contain only one class; need both target and nontarget")]
    OneClassOnly,
    #[error("embedding set is empty")]
    EmptySet,
    #[error("duplicate speaker ({id}, {dataset})")]
    DuplicateSpeaker { id: String, dataset: String },
    #[error("unknown speaker id {0:?}")]
    UnknownSpeaker(String),
    #[error("epsilon must be non-negative, got {0}")]
    BadEpsilon(f64),
    #[error("embedding vector for {id} is not finite")]
    NotFinite { id: String },
    #[error("i/o failure: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error at line {line}: {message}")]
    Parse { line: usize, message: String },
}

/// A fixed-dimension speaker vector with its identity and corpus tag.
#[derive(Debug, Clone, PartialEq)]
pub struct SpeakerEmbedding {
    pub speaker_id: String,
    pub dataset: String,
    pub vector: Vec<f64>,
}

impl SpeakerEmbedding {
    pub fn new(speaker_id: &str, dataset: &str, vector: Vec<f64>) -> Self {
        SpeakerEmbedding {
            speaker_id: speaker_id.to_string(),
            dataset: dataset.to_string(),
            vector,
        }
    }
}

/// A non-empty, dimension-consistent collection of embeddings.
#[derive(Debug, Clone, PartialEq)]
pub struct EmbeddingSet {
    embeddings: Vec<SpeakerEmbedding>,
    dim: usize,
}

impl EmbeddingSet {
    pub fn new(embeddings: Vec<SpeakerEmbedding>) -> Result<Self, EmbeddingError> {
        let dim = match embeddings.first() {
            Some(e) => e.vector.len(),
            None => return Err(EmbeddingError::EmptySet),
        };
        let mut seen = std::collections::HashSet::new();
        for e in &embeddings {
            if e.vector.len() != dim {
                return Err(EmbeddingError::DimensionMismatch {
                    expected: dim,
                    actual: e.vector.len(),
                });
            }
            if !e.vector.iter().all(|v| v.is_finite()) {
                return Err(EmbeddingError::NotFinite {
                    id: e.speaker_id.clone(),
                });
            }
            if !seen.insert((e.speaker_id.clone(), e.dataset.clone())) {
                return Err(EmbeddingError::DuplicateSpeaker {
                    id: e.speaker_id.clone(),
                    dataset: e.dataset.clone(),
                });
            }
        }
        Ok(EmbeddingSet { embeddings, dim })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.embeddings.len()
    }

    pub fn is_empty(&self) -> bool {
        self.embeddings.is_empty()
    }

    pub fn embeddings(&self) -> &[SpeakerEmbedding] {
        &self.embeddings
    }

    pub fn iter(&self) -> impl Iterator<Item = &SpeakerEmbedding> {
        self.embeddings.iter()
    }

    /// First embedding whose speaker id matches.
    pub fn by_speaker(&self, id: &str) -> Option<&SpeakerEmbedding> {
        self.embeddings.iter().find(|e| e.speaker_id == id)
    }

    /// Applies a vector-to-vector transform to every embedding.
    pub fn map_vectors<F>(&self, mut f: F) -> Result<EmbeddingSet, EmbeddingError>
    where
        F: FnMut(&[f64]) -> Result<Vec<f64>, EmbeddingError>,
    {
        let mut out = Vec::with_capacity(self.embeddings.len());
        for e in &self.embeddings {
            out.push(SpeakerEmbedding {
                speaker_id: e.speaker_id.clone(),
                dataset: e.dataset.clone(),
                vector: f(&e.vector)?,
            });
        }
        EmbeddingSet::new(out)
    }

    /// Stacks the vectors as matrix rows.
    pub fn as_matrix(&self) -> crate::linalg::Matrix {
        let mut m = crate::linalg::Matrix::zeros(self.len(), self.dim);
        for (i, e) in self.embeddings.iter().enumerate() {
            m.row_mut(i).copy_from_slice(&e.vector);
        }
        m
    }
}

#[cfg(test)]
mod tests;
