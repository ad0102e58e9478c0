//! Cosine trial scoring and equal-error-rate computation.

use super::{EmbeddingError, EmbeddingSet};
use crate::linalg;

/// One speaker-verification trial with its score and ground truth.
#[derive(Debug, Clone, PartialEq)]
pub struct TrialScore {
    pub enroll_id: String,
    pub test_id: String,
    pub score: f64,
    pub is_target: bool,
}

/// Cosine similarity `u.v / (|u||v|)`, clamped into [-1, 1].
pub fn cosine_score(u: &[f64], v: &[f64]) -> Result<f64, EmbeddingError> {
    if u.len() != v.len() {
        return Err(EmbeddingError::DimensionMismatch {
            expected: u.len(),
            actual: v.len(),
        });
    }
    let nu = linalg::norm(u);
    let nv = linalg::norm(v);
    if nu <= 0.0 || nv <= 0.0 {
        return Err(EmbeddingError::ZeroVector);
    }
    Ok((linalg::dot(u, v) / (nu * nv)).clamp(-1.0, 1.0))
}

/// Scores a trial list with cosine similarity over the given set.
///
/// Ids are looked up by speaker id; the first embedding with a matching id
/// wins if the same id appears under several dataset tags.
pub fn score_trials(
    set: &EmbeddingSet,
    trials: &[super::TrialSpec],
) -> Result<Vec<TrialScore>, EmbeddingError> {
    let mut out = Vec::with_capacity(trials.len());
    for t in trials {
        let enroll = set
            .by_speaker(&t.enroll_id)
            .ok_or_else(|| EmbeddingError::UnknownSpeaker(t.enroll_id.clone()))?;
        let test = set
            .by_speaker(&t.test_id)
            .ok_or_else(|| EmbeddingError::UnknownSpeaker(t.test_id.clone()))?;
        out.push(TrialScore {
            enroll_id: t.enroll_id.clone(),
            test_id: t.test_id.clone(),
            score: cosine_score(&enroll.vector, &test.vector)?,
            is_target: t.is_target,
        });
    }
    Ok(out)
}

/// Computes the equal error rate and its operating threshold.
///
/// The threshold sweep visits every unique score ascending (accept means
/// score >= threshold), plus a final reject-all point one unit past the
/// maximum. The false-accept and false-reject rates are step functions of
/// the threshold; the EER is read off by linear interpolation between the
/// two sweep points where their difference changes sign.
pub fn compute_eer(trials: &[TrialScore]) -> Result<(f64, f64), EmbeddingError> {
    let mut target_scores: Vec<f64> = Vec::new();
    let mut nontarget_scores: Vec<f64> = Vec::new();
    for t in trials {
        if !t.score.is_finite() {
            return Err(EmbeddingError::NumericalFailure(format!(
                "non-finite trial score for ({}, {})",
                t.enroll_id, t.test_id
            )));
        }
        if t.is_target {
            target_scores.push(t.score);
        } else {
            nontarget_scores.push(t.score);
        }
    }
    if target_scores.is_empty() || nontarget_scores.is_empty() {
        return Err(EmbeddingError::OneClassOnly);
    }
    target_scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    nontarget_scores.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n_t = target_scores.len() as f64;
    let n_n = nontarget_scores.len() as f64;

    let mut unique: Vec<f64> = target_scores
        .iter()
        .chain(&nontarget_scores)
        .copied()
        .collect();
    unique.sort_by(|a, b| a.partial_cmp(b).unwrap());
    unique.dedup();

    // (threshold, far, frr) at each sweep point.
    let rates = |theta: f64| -> (f64, f64) {
        let fa = nontarget_scores.len() - nontarget_scores.partition_point(|&s| s < theta);
        let fr = target_scores.partition_point(|&s| s < theta);
        (fa as f64 / n_n, fr as f64 / n_t)
    };

    // At the lowest score everything is accepted: far = 1, frr = 0, so the
    // difference always starts positive and the reject-all end point always
    // drives it to -1; a crossing exists.
    let mut prev_theta = unique[0];
    let (mut prev_far, mut prev_frr) = rates(prev_theta);
    let sweep_tail = unique
        .iter()
        .skip(1)
        .map(|&s| (s, rates(s)))
        .chain(std::iter::once({
            let end = unique[unique.len() - 1] + 1.0;
            (end, (0.0, 1.0))
        }));

    for (theta, (far, frr)) in sweep_tail {
        let diff = far - frr;
        if diff <= 0.0 {
            if diff == 0.0 {
                return Ok((far, theta));
            }
            let prev_diff = prev_far - prev_frr;
            let t = prev_diff / (prev_diff - diff);
            let eer = prev_far + t * (far - prev_far);
            let threshold = prev_theta + t * (theta - prev_theta);
            return Ok((eer, threshold));
        }
        prev_theta = theta;
        prev_far = far;
        prev_frr = frr;
    }
    unreachable!("reject-all sweep point always crosses");
}
