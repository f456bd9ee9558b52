//! Mel spectrogram and mel cepstrum.
//!
//! HTK mel scale (2595 log10(1 + f/700)), triangular filters without area
//! normalization, natural log compression floored at 1e-10. The cepstrum is
//! the orthonormal DCT-II of the log-mel frame; coefficient 0 is energy-like
//! and excluded later by the distortion metric.

use crate::buffer::AudioBuffer;
use crate::frame::{FrameKind, FrameMatrix};
use crate::stft::{stft_magnitude, FeatureError, FrameParams};

pub const LOG_FLOOR: f64 = 1e-10;

pub fn hz_to_mel(hz: f64) -> f64 {
    2595.0 * (1.0 + hz / 700.0).log10()
}

pub fn mel_to_hz(mel: f64) -> f64 {
    700.0 * (10f64.powf(mel / 2595.0) - 1.0)
}

/// Triangular mel filterbank: `n_mels` rows over `n_fft/2 + 1` linear bins.
/// Peaks are 1 (no normalization); centers are equally spaced on the mel
/// axis between `fmin_hz` and `fmax_hz`.
pub fn mel_filterbank(params: &FrameParams) -> Vec<Vec<f64>> {
    let bins = params.n_fft / 2 + 1;
    let mel_lo = hz_to_mel(params.fmin_hz);
    let mel_hi = hz_to_mel(params.fmax_hz);
    let edges: Vec<f64> = (0..params.n_mels + 2)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (params.n_mels + 1) as f64))
        .collect();

    let bin_hz = params.sample_rate_hz as f64 / params.n_fft as f64;
    let mut bank = Vec::with_capacity(params.n_mels);
    for m in 0..params.n_mels {
        let (lower, center, upper) = (edges[m], edges[m + 1], edges[m + 2]);
        let mut filter = vec![0.0; bins];
        for (k, w) in filter.iter_mut().enumerate() {
            let f = k as f64 * bin_hz;
            let rise = (f - lower) / (center - lower);
            let fall = (upper - f) / (upper - center);
            *w = rise.min(fall).max(0.0);
        }
        bank.push(filter);
    }
    bank
}

/// Center frequencies of the filters, for inspection and tests.
pub fn mel_filter_centers(params: &FrameParams) -> Vec<f64> {
    let mel_lo = hz_to_mel(params.fmin_hz);
    let mel_hi = hz_to_mel(params.fmax_hz);
    (1..=params.n_mels)
        .map(|i| mel_to_hz(mel_lo + (mel_hi - mel_lo) * i as f64 / (params.n_mels + 1) as f64))
        .collect()
}

/// Log-mel spectrogram: mel filterbank applied to the magnitude spectrum,
/// then ln with a 1e-10 floor.
pub fn mel_spectrogram(
    buffer: &AudioBuffer,
    params: &FrameParams,
) -> Result<FrameMatrix, FeatureError> {
    let mag = stft_magnitude(buffer, params)?;
    let bank = mel_filterbank(params);
    let mut out = FrameMatrix::zeros(
        mag.rows(),
        params.n_mels,
        params.frame_rate_hz(),
        FrameKind::LogMel,
    );
    for t in 0..mag.rows() {
        let spectrum = mag.row(t).to_vec();
        let row = out.row_mut(t);
        for (j, filter) in bank.iter().enumerate() {
            let energy: f64 = filter
                .iter()
                .zip(spectrum.iter())
                .map(|(w, v)| w * v)
                .sum();
            row[j] = energy.max(LOG_FLOOR).ln();
        }
    }
    Ok(out)
}

/// Mel cepstrum: orthonormal DCT-II of each log-mel frame, truncated to
/// `n_coeffs` coefficients.
pub fn mel_cepstrum(
    buffer: &AudioBuffer,
    params: &FrameParams,
    n_coeffs: usize,
) -> Result<FrameMatrix, FeatureError> {
    if !(2..=params.n_mels).contains(&n_coeffs) {
        return Err(FeatureError::Param(format!(
            "n_coeffs ({n_coeffs}) must be within 2..={}",
            params.n_mels
        )));
    }
    let logmel = mel_spectrogram(buffer, params)?;
    Ok(dct_truncate(&logmel, n_coeffs))
}

/// Orthonormal DCT-II along rows, keeping the first `n_coeffs` coefficients.
pub fn dct_truncate(logmel: &FrameMatrix, n_coeffs: usize) -> FrameMatrix {
    let m = logmel.dim();
    let table = dct_table(m, n_coeffs);
    let mut out = FrameMatrix::zeros(
        logmel.rows(),
        n_coeffs,
        logmel.frame_rate_hz,
        FrameKind::Mcep,
    );
    for t in 0..logmel.rows() {
        let x = logmel.row(t).to_vec();
        let row = out.row_mut(t);
        for (k, basis) in table.iter().enumerate() {
            row[k] = basis.iter().zip(x.iter()).map(|(b, v)| b * v).sum();
        }
    }
    out
}

/// Inverse of the truncated orthonormal DCT-II (missing coefficients zero).
pub fn dct_reconstruct(coeffs: &[f64], m: usize) -> Vec<f64> {
    let table = dct_table(m, coeffs.len());
    let mut out = vec![0.0; m];
    for (k, basis) in table.iter().enumerate() {
        for (j, b) in basis.iter().enumerate() {
            out[j] += coeffs[k] * b;
        }
    }
    out
}

fn dct_table(m: usize, n_coeffs: usize) -> Vec<Vec<f64>> {
    let mut table = Vec::with_capacity(n_coeffs);
    for k in 0..n_coeffs {
        let scale = if k == 0 {
            (1.0 / m as f64).sqrt()
        } else {
            (2.0 / m as f64).sqrt()
        };
        table.push(
            (0..m)
                .map(|j| {
                    scale
                        * (std::f64::consts::PI * k as f64 * (2.0 * j as f64 + 1.0)
                            / (2.0 * m as f64))
                            .cos()
                })
                .collect(),
        );
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn mel_scale_reference_point() {
        // 700 Hz -> 2595 log10(2)
        assert!((hz_to_mel(700.0) - 781.17).abs() < 0.01);
        assert!((mel_to_hz(hz_to_mel(1234.5)) - 1234.5).abs() < 1e-9);
    }

    #[test]
    fn silence_hits_the_log_floor() {
        let params = FrameParams::default();
        let buf = AudioBuffer::new(vec![0.0; 4096], 24000);
        let m = mel_spectrogram(&buf, &params).unwrap();
        let expected = LOG_FLOOR.ln(); // about -23.0259
        assert!((expected - (-23.025850929940457)).abs() < 1e-12);
        assert!(m.data().iter().all(|&v| v == expected));
    }

    #[test]
    fn filterbank_shape_properties() {
        let params = FrameParams::default();
        let bank = mel_filterbank(&params);
        assert_eq!(bank.len(), 80);
        for (i, filter) in bank.iter().enumerate() {
            let sum: f64 = filter.iter().sum();
            assert!(sum > 0.0, "filter {i} has zero weight");
        }
        let centers = mel_filter_centers(&params);
        for pair in centers.windows(2) {
            assert!(pair[1] > pair[0], "centers must strictly increase");
        }
    }

    #[test]
    fn cepstrum_of_silence_is_impulse_at_zero() {
        let params = FrameParams::default();
        let buf = AudioBuffer::new(vec![0.0; 4096], 24000);
        let c = mel_cepstrum(&buf, &params, 25).unwrap();
        let c0_expected = (80f64).sqrt() * LOG_FLOOR.ln();
        for t in 0..c.rows() {
            let row = c.row(t);
            assert!((row[0] - c0_expected).abs() < 1e-9);
            for &v in &row[1..] {
                assert!(v.abs() < 1e-9);
            }
        }
    }

    #[test]
    fn determinism() {
        let params = FrameParams::default();
        let samples: Vec<f64> = (0..8192).map(|i| (i as f64 * 0.01).sin() * 0.5).collect();
        let buf = AudioBuffer::new(samples, 24000);
        let a = mel_cepstrum(&buf, &params, 25).unwrap();
        let b = mel_cepstrum(&buf, &params, 25).unwrap();
        assert_eq!(a.data(), b.data());
    }

    #[test]
    fn truncated_dct_beats_random_truncations() {
        // Keeping the first 25 coefficients reconstructs a smooth log-mel
        // frame at least as well as random 25-coefficient subsets.
        let params = FrameParams::default();
        let n = 24000;
        let samples: Vec<f64> = (0..n)
            .map(|i| {
                let t = i as f64 / 24000.0;
                0.6 * (2.0 * std::f64::consts::PI * 220.0 * t).sin()
                    + 0.3 * (2.0 * std::f64::consts::PI * 440.0 * t).sin()
            })
            .collect();
        let buf = AudioBuffer::new(samples, 24000);
        let logmel = mel_spectrogram(&buf, &params).unwrap();
        let frame = logmel.row(logmel.rows() / 2).to_vec();

        // full DCT, then compare truncation errors via Parseval
        let full = dct_table(80, 80);
        let coeffs: Vec<f64> = full
            .iter()
            .map(|basis| basis.iter().zip(frame.iter()).map(|(b, v)| b * v).sum())
            .collect();
        let err_first: f64 = coeffs[25..].iter().map(|c| c * c).sum();

        // deterministic pseudo-random subsets
        let mut state = 0x9e3779b97f4a7c15u64;
        let mut next = move || {
            state ^= state << 13;
            state ^= state >> 7;
            state ^= state << 17;
            state
        };
        for _ in 0..50 {
            let mut keep = [false; 80];
            let mut kept = 0;
            while kept < 25 {
                let idx = (next() % 80) as usize;
                if !keep[idx] {
                    keep[idx] = true;
                    kept += 1;
                }
            }
            let err: f64 = (0..80)
                .filter(|&k| !keep[k])
                .map(|k| coeffs[k] * coeffs[k])
                .sum();
            assert!(
                err_first <= err + 1e-12,
                "first-25 truncation error {err_first} worse than subset error {err}"
            );
        }

        // and the reconstruction matches the Parseval error
        let recon = dct_reconstruct(&coeffs[..25], 80);
        let l2: f64 = recon
            .iter()
            .zip(frame.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum();
        assert!((l2 - err_first).abs() < 1e-9);
    }
}
