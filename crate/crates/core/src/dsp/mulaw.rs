//! Mu-law companding codec, 8-bit by default.
//!
//! The exact code mapping is floor-of-scaled with clamping:
//!
//! ```text
//! encode: y = sign(x) * ln(1 + mu*|x|) / ln(1 + mu)
//!         code = clamp(floor((y + 1)/2 * (mu + 1)), 0, mu)
//! decode: y = (code + 0.5)/(mu + 1) * 2 - 1        (bin center)
//!         x = sign(y) * ((1 + mu)^|y| - 1) / mu
//! ```

use super::{DspError, Waveform};

/// Default companding constant for 8-bit (256 code) output.
pub const MU_DEFAULT: u32 = 255;

pub fn mu_law_encode(x: f64, mu: u32) -> Result<u32, DspError> {
    if !x.is_finite() || x.abs() > 1.0 {
        return Err(DspError::OutOfRange(x));
    }
    let mu_f = mu as f64;
    let y = if x == 0.0 {
        0.0
    } else {
        x.signum() * (1.0 + mu_f * x.abs()).ln() / (1.0 + mu_f).ln()
    };
    let code = ((y + 1.0) / 2.0 * (mu_f + 1.0)).floor();
    Ok(code.clamp(0.0, mu_f) as u32)
}

pub fn mu_law_decode(code: u32, mu: u32) -> Result<f64, DspError> {
    if code > mu {
        return Err(DspError::CodeOutOfRange { code, mu });
    }
    let mu_f = mu as f64;
    let y = (code as f64 + 0.5) / (mu_f + 1.0) * 2.0 - 1.0;
    Ok(y.signum() * ((1.0 + mu_f).powf(y.abs()) - 1.0) / mu_f)
}

/// Encodes every sample with mu = 255.
pub fn encode_waveform(w: &Waveform) -> Result<Vec<u8>, DspError> {
    w.samples
        .iter()
        .map(|&x| mu_law_encode(x, MU_DEFAULT).map(|c| c as u8))
        .collect()
}

/// Decodes 8-bit codes back to a waveform.
pub fn decode_codes(codes: &[u8], sample_rate: u32) -> Result<Waveform, DspError> {
    let samples = codes
        .iter()
        .map(|&c| mu_law_decode(c as u32, MU_DEFAULT))
        .collect::<Result<Vec<f64>, _>>()?;
    Waveform::new(samples, sample_rate)
}
