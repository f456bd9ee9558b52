//! Windowed-sinc sample rate conversion.
//!
//! Reference filter: Kaiser window with beta = 12 (about 80 dB stopband)
//! truncated at 64 sinc zero crossings per side, cutoff at the lower of the
//! two Nyquist frequencies. Evaluated directly per output sample; outputs
//! are bit-deterministic for a given rate pair.

use thiserror::Error;

use crate::buffer::AudioBuffer;

#[derive(Debug, Error)]
pub enum ResampleError {
    #[error("sample rate {0} Hz outside supported range 8000-96000")]
    RateOutOfRange(u32),
}

const ZERO_CROSSINGS: f64 = 64.0;
const KAISER_BETA: f64 = 12.0;
const RATE_MIN: u32 = 8_000;
const RATE_MAX: u32 = 96_000;

/// Converts `buffer` to `target_rate_hz`.
///
/// Output length is round(len * target / source). Equal rates return the
/// input unchanged, bit-exact.
pub fn resample(buffer: &AudioBuffer, target_rate_hz: u32) -> Result<AudioBuffer, ResampleError> {
    for rate in [buffer.sample_rate_hz, target_rate_hz] {
        if !(RATE_MIN..=RATE_MAX).contains(&rate) {
            return Err(ResampleError::RateOutOfRange(rate));
        }
    }
    if buffer.sample_rate_hz == target_rate_hz {
        return Ok(buffer.clone());
    }

    let src = buffer.sample_rate_hz as f64;
    let dst = target_rate_hz as f64;
    let out_len = (buffer.samples.len() as f64 * dst / src).round() as usize;

    // cutoff relative to the source Nyquist; < 1 when downsampling
    let cutoff = (dst / src).min(1.0);
    // window reaches the 64th zero crossing of the scaled sinc
    let half_width = ZERO_CROSSINGS / cutoff;
    let i0_beta = bessel_i0(KAISER_BETA);

    let x = &buffer.samples;
    let n_in = x.len() as isize;
    let mut out = Vec::with_capacity(out_len);
    for n in 0..out_len {
        let center = n as f64 * src / dst;
        let lo = (center - half_width).ceil() as isize;
        let hi = (center + half_width).floor() as isize;
        let mut acc = 0.0f64;
        for k in lo.max(0)..=hi.min(n_in - 1) {
            let t = k as f64 - center;
            acc += x[k as usize] * kernel(t, cutoff, half_width, i0_beta);
        }
        out.push(acc);
    }

    Ok(AudioBuffer::new(out, target_rate_hz))
}

#[inline]
fn kernel(t: f64, cutoff: f64, half_width: f64, i0_beta: f64) -> f64 {
    let u = t / half_width; // in [-1, 1] within the window
    let w = bessel_i0(KAISER_BETA * (1.0 - u * u).max(0.0).sqrt()) / i0_beta;
    cutoff * sinc(cutoff * t) * w
}

#[inline]
fn sinc(v: f64) -> f64 {
    if v.abs() < 1e-12 {
        1.0
    } else {
        let pv = std::f64::consts::PI * v;
        pv.sin() / pv
    }
}

/// Modified Bessel function of the first kind, order zero (power series).
fn bessel_i0(v: f64) -> f64 {
    let half = v / 2.0;
    let mut term = 1.0f64;
    let mut sum = 1.0f64;
    for k in 1..=40 {
        term *= (half / k as f64) * (half / k as f64);
        sum += term;
        if term < sum * 1e-17 {
            break;
        }
    }
    sum
}
