//! 16-bit linear PCM mono WAV I/O.
//!
//! Integer samples map to floats by division by 32768, so the full
//! range is [-1, 1).

use super::{DspError, Waveform};
use std::path::Path;

pub fn read_wav(path: &Path) -> Result<Waveform, DspError> {
    let mut reader =
        hound::WavReader::open(path).map_err(|e| DspError::WavFormat(e.to_string()))?;
    let spec = reader.spec();
    if spec.channels != 1 {
        return Err(DspError::WavFormat(format!(
            "expected mono, got {} channels",
            spec.channels
        )));
    }
    if spec.bits_per_sample != 16 || spec.sample_format != hound::SampleFormat::Int {
        return Err(DspError::WavFormat(format!(
            "expected 16-bit integer PCM, got {}-bit {:?}",
            spec.bits_per_sample, spec.sample_format
        )));
    }
    let samples: Vec<f64> = reader
        .samples::<i16>()
        .map(|s| {
            s.map(|v| v as f64 / 32768.0)
                .map_err(|e| DspError::WavFormat(e.to_string()))
        })
        .collect::<Result<_, _>>()?;
    Waveform::new(samples, spec.sample_rate)
}

pub fn write_wav(w: &Waveform, path: &Path) -> Result<(), DspError> {
    let spec = hound::WavSpec {
        channels: 1,
        sample_rate: w.sample_rate,
        bits_per_sample: 16,
        sample_format: hound::SampleFormat::Int,
    };
    let mut writer =
        hound::WavWriter::create(path, spec).map_err(|e| DspError::WavFormat(e.to_string()))?;
    for &x in &w.samples {
        let v = (x * 32768.0).round().clamp(-32768.0, 32767.0) as i16;
        writer
            .write_sample(v)
            .map_err(|e| DspError::WavFormat(e.to_string()))?;
    }
    writer
        .finalize()
        .map_err(|e| DspError::WavFormat(e.to_string()))?;
    Ok(())
}
