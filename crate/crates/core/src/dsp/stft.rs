//! Short-time Fourier analysis and its least-squares inverse.
//!
//! Conventions: periodic Hann window, frames zero-padded to `fft_size`
//! (window energy lives in the first `frame_length` samples), forward
//! transform unnormalized, inverse divided by `fft_size`. The inverse is
//! the weighted overlap-add least-squares solution, which is what makes
//! the Griffin-Lim objective provably non-increasing.

use super::{DspError, StftParams, Waveform};
use crate::linalg::Matrix;
use rustfft::num_complex::Complex64;
use rustfft::FftPlanner;

/// Periodic Hann window of length `n`.
pub fn hann_window(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (std::f64::consts::TAU * i as f64 / n as f64).cos())
        .collect()
}

/// Magnitude spectrogram, `T x (fft_size/2 + 1)`.
pub fn stft(w: &Waveform, p: &StftParams) -> Result<Matrix, DspError> {
    let frames = stft_complex(&w.samples, p)?;
    let bins = p.bins();
    let mut mag = Matrix::zeros(frames.len(), bins);
    for (t, frame) in frames.iter().enumerate() {
        let row = mag.row_mut(t);
        for (b, c) in frame.iter().enumerate() {
            row[b] = c.norm();
        }
    }
    Ok(mag)
}

/// One-sided complex spectra of every frame.
pub(crate) fn stft_complex(
    samples: &[f64],
    p: &StftParams,
) -> Result<Vec<Vec<Complex64>>, DspError> {
    p.validate()?;
    let t_frames = p.frames_for(samples.len()).ok_or(DspError::TooShort {
        needed: p.frame_length,
        got: samples.len(),
    })?;
    let window = hann_window(p.frame_length);
    let fft = FftPlanner::new().plan_fft_forward(p.fft_size);
    let bins = p.bins();

    let mut out = Vec::with_capacity(t_frames);
    let mut buf = vec![Complex64::default(); p.fft_size];
    for t in 0..t_frames {
        let start = t * p.hop_length;
        for (i, b) in buf.iter_mut().enumerate() {
            let v = if i < p.frame_length {
                window[i] * samples[start + i]
            } else {
                0.0
            };
            *b = Complex64::new(v, 0.0);
        }
        fft.process(&mut buf);
        out.push(buf[..bins].to_vec());
    }
    Ok(out)
}

/// Least-squares overlap-add inverse of [`stft_complex`].
///
/// Output length is `(T - 1) * hop + frame_length`. Samples where the
/// window coverage is zero come out as zero.
pub(crate) fn istft(frames: &[Vec<Complex64>], p: &StftParams) -> Vec<f64> {
    if frames.is_empty() {
        return Vec::new();
    }
    let t_frames = frames.len();
    let len = (t_frames - 1) * p.hop_length + p.frame_length;
    let window = hann_window(p.frame_length);
    let ifft = FftPlanner::new().plan_fft_inverse(p.fft_size);
    let bins = p.bins();

    let mut num = vec![0.0f64; len];
    let mut den = vec![0.0f64; len];
    let mut buf = vec![Complex64::default(); p.fft_size];
    for (t, frame) in frames.iter().enumerate() {
        assert_eq!(frame.len(), bins, "one-sided frame width");
        // Rebuild the full conjugate-symmetric spectrum.
        buf[..bins].copy_from_slice(frame);
        for k in 1..(p.fft_size - bins + 1) {
            buf[p.fft_size - k] = frame[k].conj();
        }
        ifft.process(&mut buf);
        let start = t * p.hop_length;
        for i in 0..p.frame_length {
            let sample = buf[i].re / p.fft_size as f64;
            num[start + i] += window[i] * sample;
            den[start + i] += window[i] * window[i];
        }
    }
    for (x, d) in num.iter_mut().zip(&den) {
        if *d > 1e-12 {
            *x /= d;
        } else {
            *x = 0.0;
        }
    }
    num
}

/// Waveform helper used by Griffin-Lim and tests: synthesizes a sine tone.
pub fn sine_tone(freq_hz: f64, amplitude: f64, duration_s: f64, sample_rate: u32) -> Waveform {
    let n = (duration_s * sample_rate as f64).round() as usize;
    let samples = (0..n)
        .map(|i| amplitude * (std::f64::consts::TAU * freq_hz * i as f64 / sample_rate as f64).sin())
        .collect();
    Waveform::new(samples, sample_rate).expect("tone amplitude within range")
}
