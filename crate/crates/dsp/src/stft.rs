//! Short-time Fourier transform with centered reflect padding.

use std::sync::Arc;

use rustfft::{num_complex::Complex, Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::buffer::AudioBuffer;
use crate::frame::{FrameKind, FrameMatrix};

/// Analysis parameters shared by the spectral features and F0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrameParams {
    pub n_fft: usize,
    pub win_length: usize,
    pub hop_length: usize,
    pub n_mels: usize,
    pub fmin_hz: f64,
    pub fmax_hz: f64,
    pub sample_rate_hz: u32,
}

impl Default for FrameParams {
    fn default() -> Self {
        FrameParams {
            n_fft: 1024,
            win_length: 1024,
            hop_length: 256,
            n_mels: 80,
            fmin_hz: 0.0,
            fmax_hz: 12000.0,
            sample_rate_hz: 24000,
        }
    }
}

impl FrameParams {
    pub fn validate(&self) -> Result<(), FeatureError> {
        if self.n_fft == 0 || self.hop_length == 0 || self.win_length == 0 {
            return Err(FeatureError::Param(
                "n_fft, win_length and hop_length must be positive".into(),
            ));
        }
        if !(self.hop_length <= self.win_length && self.win_length <= self.n_fft) {
            return Err(FeatureError::Param(format!(
                "need hop ({}) <= win ({}) <= n_fft ({})",
                self.hop_length, self.win_length, self.n_fft
            )));
        }
        if self.n_mels == 0 {
            return Err(FeatureError::Param("n_mels must be positive".into()));
        }
        let nyquist = self.sample_rate_hz as f64 / 2.0;
        if !(self.fmin_hz >= 0.0 && self.fmin_hz < self.fmax_hz && self.fmax_hz <= nyquist) {
            return Err(FeatureError::Param(format!(
                "need 0 <= fmin ({}) < fmax ({}) <= nyquist ({nyquist})",
                self.fmin_hz, self.fmax_hz
            )));
        }
        Ok(())
    }

    pub fn frame_rate_hz(&self) -> f64 {
        self.sample_rate_hz as f64 / self.hop_length as f64
    }

    /// Frame count for a buffer of `len` samples: 1 + floor(len / hop).
    pub fn frame_count(&self, len: usize) -> usize {
        1 + len / self.hop_length
    }
}

#[derive(Debug, Error)]
pub enum FeatureError {
    #[error("invalid frame parameters: {0}")]
    Param(String),
    #[error("buffer is at {actual} Hz but params expect {expected} Hz")]
    SampleRateMismatch { actual: u32, expected: u32 },
}

/// Periodic Hann window of length `n`.
pub(crate) fn hann_periodic(n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| 0.5 - 0.5 * (2.0 * std::f64::consts::PI * i as f64 / n as f64).cos())
        .collect()
}

/// Sample at a (possibly out-of-range) index with reflection at the edges.
#[inline]
pub(crate) fn reflect_get(samples: &[f64], index: isize) -> f64 {
    let n = samples.len() as isize;
    if n == 0 {
        return 0.0;
    }
    if n == 1 {
        return samples[0];
    }
    let mut i = index;
    // fold until inside; each fold shrinks |i| so this terminates
    while i < 0 || i >= n {
        if i < 0 {
            i = -i;
        }
        if i >= n {
            i = 2 * (n - 1) - i;
        }
    }
    samples[i as usize]
}

/// The frame centered at `t * hop`, reflect-padded, `win_length` samples,
/// shared by the STFT and the F0 extractor so frame counts always agree.
pub(crate) fn centered_frame(samples: &[f64], center: usize, length: usize) -> Vec<f64> {
    let half = (length / 2) as isize;
    (0..length as isize)
        .map(|i| reflect_get(samples, center as isize - half + i))
        .collect()
}

/// Magnitude spectrogram: rows = 1 + floor(len/hop), dim = n_fft/2 + 1.
pub fn stft_magnitude(
    buffer: &AudioBuffer,
    params: &FrameParams,
) -> Result<FrameMatrix, FeatureError> {
    params.validate()?;
    if buffer.sample_rate_hz != params.sample_rate_hz {
        return Err(FeatureError::SampleRateMismatch {
            actual: buffer.sample_rate_hz,
            expected: params.sample_rate_hz,
        });
    }

    let fft = FftPlanner::new().plan_fft_forward(params.n_fft);
    let window = hann_periodic(params.win_length);
    let frames = params.frame_count(buffer.len());
    let bins = params.n_fft / 2 + 1;

    let mut out = FrameMatrix::zeros(frames, bins, params.frame_rate_hz(), FrameKind::Magnitude);
    let mut scratch = vec![Complex::default(); params.n_fft];
    for t in 0..frames {
        let spectrum = frame_spectrum(
            buffer,
            params,
            &window,
            &fft,
            t * params.hop_length,
            &mut scratch,
        );
        let row = out.row_mut(t);
        for (k, v) in spectrum.iter().take(bins).enumerate() {
            row[k] = v.norm();
        }
    }
    Ok(out)
}

/// Full complex spectrum of one centered frame. Exposed to let callers check
/// energy conservation on the complete spectrum.
pub fn frame_spectrum_full(
    buffer: &AudioBuffer,
    params: &FrameParams,
    frame_index: usize,
) -> Result<(Vec<f64>, Vec<Complex<f64>>), FeatureError> {
    params.validate()?;
    let fft = FftPlanner::new().plan_fft_forward(params.n_fft);
    let window = hann_periodic(params.win_length);
    let mut scratch = vec![Complex::default(); params.n_fft];
    let center = frame_index * params.hop_length;
    let windowed = windowed_frame(buffer, params, &window, center);
    let spectrum = {
        for (i, &v) in windowed.iter().enumerate() {
            scratch[i] = Complex::new(v, 0.0);
        }
        fft.process(&mut scratch);
        scratch.clone()
    };
    Ok((windowed, spectrum))
}

fn windowed_frame(
    buffer: &AudioBuffer,
    params: &FrameParams,
    window: &[f64],
    center: usize,
) -> Vec<f64> {
    let frame = centered_frame(&buffer.samples, center, params.win_length);
    let mut padded = vec![0.0; params.n_fft];
    let offset = (params.n_fft - params.win_length) / 2;
    for (i, (&s, &w)) in frame.iter().zip(window.iter()).enumerate() {
        padded[offset + i] = s * w;
    }
    padded
}

fn frame_spectrum(
    buffer: &AudioBuffer,
    params: &FrameParams,
    window: &[f64],
    fft: &Arc<dyn Fft<f64>>,
    center: usize,
    scratch: &mut [Complex<f64>],
) -> Vec<Complex<f64>> {
    let padded = windowed_frame(buffer, params, window, center);
    for (i, &v) in padded.iter().enumerate() {
        scratch[i] = Complex::new(v, 0.0);
    }
    fft.process(scratch);
    scratch.to_vec()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sine(freq: f64, params: &FrameParams, seconds: f64) -> AudioBuffer {
        let rate = params.sample_rate_hz;
        let n = (rate as f64 * seconds).round() as usize;
        let samples = (0..n)
            .map(|i| (2.0 * std::f64::consts::PI * freq * i as f64 / rate as f64).sin())
            .collect();
        AudioBuffer::new(samples, rate)
    }

    #[test]
    fn zero_input_gives_zero_matrix_with_expected_shape() {
        let params = FrameParams::default();
        let buf = AudioBuffer::new(vec![0.0; 24000], 24000);
        let m = stft_magnitude(&buf, &params).unwrap();
        assert_eq!(m.rows(), 94); // 1 + floor(24000 / 256)
        assert_eq!(m.dim(), 513);
        assert!(m.data().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn pure_bin_centered_sine_concentrates_energy() {
        // 1125 Hz = bin 48 exactly at 24 kHz / 1024
        let params = FrameParams::default();
        let buf = sine(1125.0, &params, 0.5);
        let m = stft_magnitude(&buf, &params).unwrap();
        let t = m.rows() / 2;
        let row = m.row(t);
        let peak = row[48];
        for (k, &v) in row.iter().enumerate() {
            if (k as isize - 48).abs() >= 4 {
                assert!(
                    peak >= 100.0 * v,
                    "bin {k} magnitude {v} too large vs peak {peak}"
                );
            }
        }
    }

    #[test]
    fn impulse_frame_is_flat() {
        // unit impulse at the center of frame 2: spectrum magnitude is the
        // window's center value across all bins
        let params = FrameParams::default();
        let mut samples = vec![0.0; 24000];
        samples[2 * params.hop_length] = 1.0;
        let buf = AudioBuffer::new(samples, 24000);
        let m = stft_magnitude(&buf, &params).unwrap();
        let row = m.row(2);
        let expected = 1.0; // periodic hann center = w[N/2] = 1.0
        for &v in row.iter() {
            assert!((v - expected).abs() < 1e-9, "bin magnitude {v}");
        }
    }

    #[test]
    fn parseval_energy_conservation() {
        let params = FrameParams::default();
        let buf = sine(987.0, &params, 0.3);
        for t in [0, 5, 11] {
            let (windowed, spectrum) = frame_spectrum_full(&buf, &params, t).unwrap();
            let time_energy: f64 = windowed.iter().map(|v| v * v).sum();
            let freq_energy: f64 =
                spectrum.iter().map(|c| c.norm_sqr()).sum::<f64>() / params.n_fft as f64;
            let rel = (time_energy - freq_energy).abs() / time_energy.max(1e-30);
            assert!(rel <= 1e-6, "parseval relative error {rel}");
        }
    }

    #[test]
    fn mismatched_rate_is_rejected() {
        let params = FrameParams::default();
        let buf = AudioBuffer::new(vec![0.0; 100], 48000);
        assert!(matches!(
            stft_magnitude(&buf, &params),
            Err(FeatureError::SampleRateMismatch { .. })
        ));
    }

    #[test]
    fn invalid_params_are_rejected() {
        let params = FrameParams {
            hop_length: 2048,
            ..FrameParams::default()
        };
        assert!(matches!(
            stft_magnitude(&AudioBuffer::new(vec![], 24000), &params),
            Err(FeatureError::Param(_))
        ));
    }
}
