//! Seeded synthetic speaker embeddings for tests and demos.
//!
//! Stands in for a real speaker encoder: each speaker is a Gaussian
//! cluster with its own random center, which is enough to exercise
//! normalization, scoring and projection end to end.

use super::{EmbeddingSet, SpeakerEmbedding};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Standard normal via Box-Muller on the seeded generator.
pub fn gauss(rng: &mut ChaCha8Rng) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

pub struct ClusterSpec {
    pub n_speakers: usize,
    pub per_speaker: usize,
    pub dim: usize,
    /// Standard deviation of the cluster centers around the origin.
    pub center_scale: f64,
    /// Standard deviation of points around their cluster center.
    pub spread: f64,
}

impl Default for ClusterSpec {
    fn default() -> Self {
        ClusterSpec {
            n_speakers: 5,
            per_speaker: 20,
            dim: 128,
            center_scale: 3.0,
            spread: 1.0,
        }
    }
}

/// Generates per-speaker Gaussian clusters, deterministic in the seed.
///
/// Dataset tags cycle over `datasets` by speaker index. Item ids are
/// `spk{i:03}` unless a speaker produces several embeddings, in which case
/// the utterance index is appended.
pub fn generate(spec: &ClusterSpec, datasets: &[&str], seed: u64) -> EmbeddingSet {
    assert!(spec.n_speakers > 0 && spec.per_speaker > 0 && spec.dim > 0);
    assert!(!datasets.is_empty());
    let mut rng = crate::tensor::seeded_rng(seed);
    let mut embeddings = Vec::with_capacity(spec.n_speakers * spec.per_speaker);
    for s in 0..spec.n_speakers {
        let dataset = datasets[s % datasets.len()];
        let center: Vec<f64> = (0..spec.dim)
            .map(|_| spec.center_scale * gauss(&mut rng))
            .collect();
        for u in 0..spec.per_speaker {
            let vector: Vec<f64> = center
                .iter()
                .map(|c| c + spec.spread * gauss(&mut rng))
                .collect();
            let speaker_id = if spec.per_speaker == 1 {
                format!("spk{s:03}")
            } else {
                format!("spk{s:03}_{u:03}")
            };
            embeddings.push(SpeakerEmbedding::new(&speaker_id, dataset, vector));
        }
    }
    EmbeddingSet::new(embeddings).expect("generated set is well-formed")
}
