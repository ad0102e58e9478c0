//! Griffin-Lim iterative phase reconstruction.

use super::{istft, stft_complex, DspError, StftParams, Waveform};
use crate::linalg::Matrix;
use rand::Rng;
use rustfft::num_complex::Complex64;

#[derive(Debug, Clone)]
pub struct GriffinLimResult {
    pub waveform: Waveform,
    /// Spectral-convergence objective after each iteration:
    /// `|| |STFT(x)| - mag ||_F / ||mag||_F`. Non-increasing.
    pub objectives: Vec<f64>,
}

/// Reconstructs a waveform from a linear magnitude spectrogram.
///
/// Phases start uniform-random from the seed; each iteration inverts with
/// the least-squares overlap-add synthesis, re-analyzes, and replaces the
/// magnitudes. Output samples are peak-normalized to 0.999 if the raw
/// reconstruction exceeds full scale.
pub fn griffin_lim(
    mag: &Matrix,
    p: &StftParams,
    sample_rate: u32,
    iters: usize,
    seed: u64,
) -> Result<GriffinLimResult, DspError> {
    p.validate()?;
    if iters == 0 {
        return Err(DspError::BadParams("iters must be >= 1".into()));
    }
    if mag.cols() != p.bins() {
        return Err(DspError::BadParams(format!(
            "magnitude has {} bins, params imply {}",
            mag.cols(),
            p.bins()
        )));
    }
    if sample_rate == 0 {
        return Err(DspError::BadParams("sample_rate must be positive".into()));
    }
    let t_frames = mag.rows();
    if t_frames == 0 {
        return Err(DspError::EmptyAudio);
    }
    let bins = p.bins();
    let mag_norm = mag.data().iter().map(|&v| v * v).sum::<f64>().sqrt();

    let mut rng = crate::tensor::seeded_rng(seed);
    let mut spectra: Vec<Vec<Complex64>> = (0..t_frames)
        .map(|t| {
            (0..bins)
                .map(|b| {
                    let phase = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
                    Complex64::from_polar(mag[(t, b)], phase)
                })
                .collect()
        })
        .collect();

    let mut objectives = Vec::with_capacity(iters);
    for _ in 0..iters {
        let x = istft(&spectra, p);
        let analyzed = stft_complex(&x, p)?;
        let mut err = 0.0f64;
        for t in 0..t_frames {
            for b in 0..bins {
                let d = analyzed[t][b].norm() - mag[(t, b)];
                err += d * d;
            }
        }
        let objective = if mag_norm > 0.0 {
            err.sqrt() / mag_norm
        } else {
            0.0
        };
        objectives.push(objective);
        for t in 0..t_frames {
            for b in 0..bins {
                let phase = analyzed[t][b].arg();
                spectra[t][b] = Complex64::from_polar(mag[(t, b)], phase);
            }
        }
    }

    let mut samples = istft(&spectra, p);
    let peak = samples.iter().fold(0.0f64, |m, &x| m.max(x.abs()));
    if peak > 1.0 {
        let scale = 0.999 / peak;
        for s in &mut samples {
            *s *= scale;
        }
    }
    Ok(GriffinLimResult {
        waveform: Waveform::new(samples, sample_rate)?,
        objectives,
    })
}
