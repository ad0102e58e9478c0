//! Energy-based silence segmentation of long recordings.

use super::{DspError, Waveform};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SegmentConfig {
    /// Minimum silence duration that justifies a cut, seconds.
    pub min_silence_s: f64,
    /// Target minimum segment length, seconds.
    pub min_seg_s: f64,
    /// Hard maximum segment length for merges, seconds.
    pub max_seg_s: f64,
    /// Analysis frame length, seconds.
    pub frame_s: f64,
    /// Analysis hop, seconds.
    pub hop_s: f64,
    /// Silence threshold relative to the peak frame RMS, dB.
    pub threshold_db: f64,
}

impl Default for SegmentConfig {
    fn default() -> Self {
        SegmentConfig {
            min_silence_s: 0.3,
            min_seg_s: 2.0,
            max_seg_s: 12.0,
            frame_s: 0.025,
            hop_s: 0.010,
            threshold_db: -40.0,
        }
    }
}

/// Splits a recording at long silences into segments of bounded length.
///
/// Frames are classified silent when their RMS falls below
/// `peak_rms * 10^(threshold_db/20)`. Cut points sit at the midpoints of
/// silent runs at least `min_silence_s` long. Pieces shorter than
/// `min_seg_s` greedily absorb their right neighbors while the merge stays
/// within `max_seg_s`; remaining short pieces are folded into whichever
/// neighbor can take them without exceeding `max_seg_s`. Pieces already
/// long enough keep their cuts.
///
/// Returned ranges are disjoint `[start, end)` sample intervals covering
/// the whole input. A stretch with no qualifying silence is returned
/// whole, even when it is longer than `max_seg_s`; only silences are cut.
pub fn segment_on_silence(
    w: &Waveform,
    cfg: &SegmentConfig,
) -> Result<Vec<(usize, usize)>, DspError> {
    if w.samples.is_empty() {
        return Err(DspError::EmptyAudio);
    }
    if !(cfg.min_silence_s > 0.0 && cfg.min_seg_s > 0.0 && cfg.max_seg_s > 0.0) {
        return Err(DspError::BadParams("segment thresholds must be positive".into()));
    }
    let sr = w.sample_rate as f64;
    let n = w.samples.len();
    let frame = ((cfg.frame_s * sr).round() as usize).max(1).min(n);
    let hop = ((cfg.hop_s * sr).round() as usize).max(1);

    // Per-frame RMS.
    let n_frames = 1 + (n - frame) / hop;
    let mut rms = Vec::with_capacity(n_frames);
    for t in 0..n_frames {
        let start = t * hop;
        let energy: f64 = w.samples[start..start + frame].iter().map(|x| x * x).sum();
        rms.push((energy / frame as f64).sqrt());
    }
    let peak = rms.iter().cloned().fold(0.0f64, f64::max);
    let threshold = peak * 10f64.powf(cfg.threshold_db / 20.0);

    // Silent runs -> cut points at their midpoints.
    let min_silence_samples = (cfg.min_silence_s * sr).round() as usize;
    let mut cuts: Vec<usize> = Vec::new();
    let mut run_start: Option<usize> = None;
    let flush = |first: usize, last: usize, cuts: &mut Vec<usize>| {
        let span_start = first * hop;
        let span_end = last * hop + frame;
        if span_end - span_start >= min_silence_samples {
            cuts.push((span_start + span_end) / 2);
        }
    };
    for t in 0..n_frames {
        let silent = rms[t] < threshold;
        match (silent, run_start) {
            (true, None) => run_start = Some(t),
            (false, Some(first)) => {
                flush(first, t - 1, &mut cuts);
                run_start = None;
            }
            _ => {}
        }
    }
    if let Some(first) = run_start {
        flush(first, n_frames - 1, &mut cuts);
    }

    // Pieces between cuts.
    let mut bounds = vec![0usize];
    bounds.extend(cuts.iter().copied().filter(|&c| c > 0 && c < n));
    bounds.push(n);
    bounds.dedup();
    let pieces: Vec<(usize, usize)> = bounds.windows(2).map(|w| (w[0], w[1])).collect();

    // Greedily absorb pieces into a still-too-short segment while the
    // merge stays under the cap. Pieces already long enough keep their cut.
    let max_samples = (cfg.max_seg_s * sr).round() as usize;
    let min_samples = (cfg.min_seg_s * sr).round() as usize;
    let mut merged: Vec<(usize, usize)> = Vec::new();
    for piece in pieces {
        match merged.last_mut() {
            Some(last) if last.1 - last.0 < min_samples && piece.1 - last.0 <= max_samples => {
                last.1 = piece.1;
            }
            _ => merged.push(piece),
        }
    }

    // Fold short leftovers into whichever neighbor stays within the cap,
    // preferring the smaller merge. Leftovers with no viable neighbor stay.
    loop {
        let mut changed = false;
        let mut i = 0;
        while i < merged.len() {
            let (s, e) = merged[i];
            if merged.len() > 1 && e - s < min_samples {
                let left_ok = i > 0 && e - merged[i - 1].0 <= max_samples;
                let right_ok = i + 1 < merged.len() && merged[i + 1].1 - s <= max_samples;
                if left_ok && (!right_ok || e - merged[i - 1].0 <= merged[i + 1].1 - s) {
                    merged[i - 1].1 = e;
                    merged.remove(i);
                    changed = true;
                    continue;
                } else if right_ok {
                    merged[i + 1].0 = s;
                    merged.remove(i);
                    changed = true;
                    continue;
                }
            }
            i += 1;
        }
        if !changed {
            break;
        }
    }

    Ok(merged)
}
