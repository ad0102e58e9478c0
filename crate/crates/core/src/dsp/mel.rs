//! Mel filterbank, log-mel spectrograms, and the binary mel file format.

use super::{stft, DspError, StftParams, Waveform};
use crate::linalg::Matrix;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

pub fn hz_to_mel(f: f64) -> f64 {
    2595.0 * (1.0 + f / 700.0).log10()
}

pub fn mel_to_hz(m: f64) -> f64 {
    700.0 * (10f64.powf(m / 2595.0) - 1.0)
}

/// Triangular mel filterbank with peak-normalized filters.
///
/// Filter centers are equally spaced on the mel scale between `f_min` and
/// `f_max`; each triangle is linear in frequency between its neighbors'
/// centers, so adjacent filters sum to one between the first and last
/// center (partition of unity).
#[derive(Debug, Clone, PartialEq)]
pub struct MelFilterbank {
    pub n_mels: usize,
    /// `n_mels x (fft_size/2 + 1)` weights.
    pub weights: Matrix,
    pub f_min: f64,
    pub f_max: f64,
    fft_size: usize,
    sample_rate: u32,
}

impl MelFilterbank {
    pub fn new(
        n_mels: usize,
        fft_size: usize,
        sample_rate: u32,
        f_min: f64,
        f_max: f64,
    ) -> Result<Self, DspError> {
        if n_mels == 0 || fft_size == 0 || sample_rate == 0 {
            return Err(DspError::BadParams("filterbank sizes must be positive".into()));
        }
        if !(0.0 <= f_min && f_min < f_max && f_max <= sample_rate as f64 / 2.0) {
            return Err(DspError::BadParams(format!(
                "need 0 <= f_min < f_max <= Nyquist, got {f_min}..{f_max} at {sample_rate} Hz"
            )));
        }
        let bins = fft_size / 2 + 1;
        // n_mels + 2 node frequencies: edge, centers..., edge.
        let mel_lo = hz_to_mel(f_min);
        let mel_hi = hz_to_mel(f_max);
        let nodes: Vec<f64> = (0..n_mels + 2)
            .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (n_mels + 1) as f64))
            .collect();
        let mut weights = Matrix::zeros(n_mels, bins);
        for m in 0..n_mels {
            let (lo, center, hi) = (nodes[m], nodes[m + 1], nodes[m + 2]);
            let row = weights.row_mut(m);
            for (b, w) in row.iter_mut().enumerate() {
                let f = b as f64 * sample_rate as f64 / fft_size as f64;
                let rise = (f - lo) / (center - lo);
                let fall = (hi - f) / (hi - center);
                *w = rise.min(fall).max(0.0);
            }
        }
        Ok(MelFilterbank {
            n_mels,
            weights,
            f_min,
            f_max,
            fft_size,
            sample_rate,
        })
    }

    /// Center frequency of band `m` in Hz.
    pub fn center_hz(&self, m: usize) -> f64 {
        let mel_lo = hz_to_mel(self.f_min);
        let mel_hi = hz_to_mel(self.f_max);
        mel_to_hz(mel_lo + (mel_hi - mel_lo) * (m + 1) as f64 / (self.n_mels + 1) as f64)
    }

    pub fn matches(&self, p: &StftParams, sample_rate: u32) -> bool {
        self.fft_size == p.fft_size && self.sample_rate == sample_rate
    }
}

/// Log-compressed mel energies, `T x n_mels`.
#[derive(Debug, Clone, PartialEq)]
pub struct MelSpectrogram {
    pub frames: Matrix,
    pub params: StftParams,
    pub n_mels: usize,
}

impl MelSpectrogram {
    pub fn len(&self) -> usize {
        self.frames.rows()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.rows() == 0
    }
}

/// Computes `ln(max(fb * |STFT|, floor))` per frame.
pub fn melspectrogram(
    w: &Waveform,
    p: &StftParams,
    fb: &MelFilterbank,
    floor: f64,
) -> Result<MelSpectrogram, DspError> {
    if !fb.matches(p, w.sample_rate) {
        return Err(DspError::MismatchedFilterbank {
            fb_fft: fb.fft_size,
            fb_rate: fb.sample_rate,
            fft: p.fft_size,
            rate: w.sample_rate,
        });
    }
    if !(floor > 0.0) {
        return Err(DspError::BadParams("mel floor must be positive".into()));
    }
    let mag = stft(w, p)?;
    let t_frames = mag.rows();
    let mut frames = Matrix::zeros(t_frames, fb.n_mels);
    for t in 0..t_frames {
        let spec = mag.row(t);
        let row = frames.row_mut(t);
        for m in 0..fb.n_mels {
            let energy = crate::linalg::dot(fb.weights.row(m), spec);
            row[m] = energy.max(floor).ln();
        }
    }
    Ok(MelSpectrogram {
        frames,
        params: *p,
        n_mels: fb.n_mels,
    })
}

/// Approximate inverse of the mel pooling, for the Griffin-Lim fallback.
///
/// Spreads each band's linear energy back over the FFT bins it covers,
/// normalizing by the per-bin total filter weight.
pub fn mel_to_linear(frames: &Matrix, fb: &MelFilterbank) -> Matrix {
    let bins = fb.weights.cols();
    let t_frames = frames.rows();
    let mut col_sum = vec![0.0f64; bins];
    for m in 0..fb.n_mels {
        for (b, s) in col_sum.iter_mut().enumerate() {
            *s += fb.weights[(m, b)];
        }
    }
    let mut mag = Matrix::zeros(t_frames, bins);
    for t in 0..t_frames {
        let mel_row = frames.row(t);
        let out = mag.row_mut(t);
        for m in 0..fb.n_mels {
            let energy = mel_row[m].exp();
            for b in 0..bins {
                let w = fb.weights[(m, b)];
                if w > 0.0 {
                    out[b] += w * energy;
                }
            }
        }
        for (b, v) in out.iter_mut().enumerate() {
            if col_sum[b] > 1e-12 {
                *v /= col_sum[b];
            }
        }
    }
    mag
}

/// Binary mel layout: `u32 T, u32 n_mels`, then `T * n_mels` little-endian
/// 32-bit floats, row-major.
pub fn write_mel(mel: &Matrix, path: &Path) -> Result<(), DspError> {
    let mut w = BufWriter::new(File::create(path)?);
    w.write_all(&(mel.rows() as u32).to_le_bytes())?;
    w.write_all(&(mel.cols() as u32).to_le_bytes())?;
    for &v in mel.data() {
        w.write_all(&(v as f32).to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_mel(path: &Path) -> Result<Matrix, DspError> {
    let mut r = BufReader::new(File::open(path)?);
    let mut u32buf = [0u8; 4];
    r.read_exact(&mut u32buf)?;
    let t_frames = u32::from_le_bytes(u32buf) as usize;
    r.read_exact(&mut u32buf)?;
    let n_mels = u32::from_le_bytes(u32buf) as usize;
    let mut data = vec![0.0f64; t_frames * n_mels];
    let mut f32buf = [0u8; 4];
    for v in &mut data {
        r.read_exact(&mut f32buf)?;
        *v = f32::from_le_bytes(f32buf) as f64;
    }
    Ok(Matrix::from_vec(t_frames, n_mels, data))
}
