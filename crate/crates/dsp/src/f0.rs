//! Fundamental frequency tracking with the YIN method: difference function,
//! cumulative mean normalized difference, absolute-threshold dip picking and
//! parabolic refinement of the lag.

use serde::{Deserialize, Serialize};

use crate::buffer::AudioBuffer;
use crate::stft::{centered_frame, FeatureError, FrameParams};

/// Per-frame fundamental frequency in Hz (0 where unvoiced) plus voicing.
#[derive(Debug, Clone, PartialEq)]
pub struct F0Track {
    pub f0_hz: Vec<f64>,
    pub voiced: Vec<bool>,
    pub frame_rate_hz: f64,
}

impl F0Track {
    pub fn len(&self) -> usize {
        self.f0_hz.len()
    }

    pub fn is_empty(&self) -> bool {
        self.f0_hz.is_empty()
    }

    pub fn voiced_count(&self) -> usize {
        self.voiced.iter().filter(|&&v| v).count()
    }

    /// Two-column frame matrix [f0_hz, voiced as 0/1], the layout used when
    /// an F0 track travels through the frame file format.
    pub fn to_frame_matrix(&self) -> crate::frame::FrameMatrix {
        let rows = self
            .f0_hz
            .iter()
            .zip(&self.voiced)
            .map(|(&f, &v)| vec![f, if v { 1.0 } else { 0.0 }])
            .collect();
        crate::frame::FrameMatrix::from_rows(
            rows,
            self.frame_rate_hz,
            crate::frame::FrameKind::External,
        )
        .expect("uniform two-column rows")
    }

    pub fn from_frame_matrix(matrix: &crate::frame::FrameMatrix) -> Option<F0Track> {
        if matrix.dim() != 2 {
            return None;
        }
        let mut f0_hz = Vec::with_capacity(matrix.rows());
        let mut voiced = Vec::with_capacity(matrix.rows());
        for row in matrix.iter_rows() {
            f0_hz.push(row[0]);
            voiced.push(row[1] > 0.5);
        }
        Some(F0Track {
            f0_hz,
            voiced,
            frame_rate_hz: matrix.frame_rate_hz,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct F0Params {
    pub f_min_hz: f64,
    pub f_max_hz: f64,
    pub threshold: f64,
}

impl Default for F0Params {
    fn default() -> Self {
        F0Params {
            f_min_hz: 80.0,
            f_max_hz: 1000.0,
            threshold: 0.15,
        }
    }
}

/// Extracts an F0 track on the same frame grid as the spectral features:
/// frames of `params.win_length` samples centered at multiples of the hop,
/// so the track length equals the mel frame count for the same buffer.
pub fn extract_f0(
    buffer: &AudioBuffer,
    params: &FrameParams,
    f0: &F0Params,
) -> Result<F0Track, FeatureError> {
    params.validate()?;
    if buffer.sample_rate_hz != params.sample_rate_hz {
        return Err(FeatureError::SampleRateMismatch {
            actual: buffer.sample_rate_hz,
            expected: params.sample_rate_hz,
        });
    }
    let sr = params.sample_rate_hz as f64;
    if !(f0.f_min_hz > 0.0 && f0.f_min_hz < f0.f_max_hz) {
        return Err(FeatureError::Param(format!(
            "need 0 < f_min ({}) < f_max ({})",
            f0.f_min_hz, f0.f_max_hz
        )));
    }
    if sr < 4.0 * f0.f_max_hz {
        return Err(FeatureError::Param(format!(
            "sample rate {sr} Hz below 4 x f_max ({})",
            f0.f_max_hz
        )));
    }
    if !(0.0 < f0.threshold && f0.threshold < 1.0) {
        return Err(FeatureError::Param(format!(
            "threshold {} outside (0, 1)",
            f0.threshold
        )));
    }

    let lag_min = (sr / f0.f_max_hz).ceil() as usize;
    let lag_max = (sr / f0.f_min_hz).floor() as usize;
    let frame_len = params.win_length;
    if lag_max + 2 >= frame_len {
        return Err(FeatureError::Param(format!(
            "win_length {frame_len} too short for f_min {} Hz (needs > {} samples)",
            f0.f_min_hz,
            lag_max + 2
        )));
    }
    let integration = frame_len - lag_max - 1;

    let frames = params.frame_count(buffer.len());
    let mut f0_hz = Vec::with_capacity(frames);
    let mut voiced = Vec::with_capacity(frames);
    let mut diff = vec![0.0f64; lag_max + 2];
    let mut cmndf = vec![1.0f64; lag_max + 2];

    for t in 0..frames {
        let frame = centered_frame(&buffer.samples, t * params.hop_length, frame_len);

        for (tau, d) in diff.iter_mut().enumerate() {
            let mut acc = 0.0f64;
            for j in 0..integration {
                let delta = frame[j] - frame[j + tau];
                acc += delta * delta;
            }
            *d = acc;
        }

        // cumulative mean normalized difference
        let mut running = 0.0f64;
        cmndf[0] = 1.0;
        for tau in 1..diff.len() {
            running += diff[tau];
            cmndf[tau] = if running > 0.0 {
                diff[tau] * tau as f64 / running
            } else {
                1.0
            };
        }

        // first dip under the threshold within the lag range
        let mut pick: Option<usize> = None;
        let mut tau = lag_min;
        while tau <= lag_max {
            if cmndf[tau] < f0.threshold {
                // descend to the bottom of this dip
                while tau < lag_max && cmndf[tau + 1] < cmndf[tau] {
                    tau += 1;
                }
                pick = Some(tau);
                break;
            }
            tau += 1;
        }

        match pick {
            Some(tau) => {
                let refined = parabolic_min(&cmndf, tau);
                let freq = (sr / refined).clamp(f0.f_min_hz, f0.f_max_hz);
                f0_hz.push(freq);
                voiced.push(true);
            }
            None => {
                f0_hz.push(0.0);
                voiced.push(false);
            }
        }
    }

    Ok(F0Track {
        f0_hz,
        voiced,
        frame_rate_hz: params.frame_rate_hz(),
    })
}

/// Parabolic interpolation of a local minimum around index `tau`.
fn parabolic_min(values: &[f64], tau: usize) -> f64 {
    if tau == 0 || tau + 1 >= values.len() {
        return tau as f64;
    }
    let (a, b, c) = (values[tau - 1], values[tau], values[tau + 1]);
    let denom = a - 2.0 * b + c;
    if denom.abs() < 1e-30 {
        return tau as f64;
    }
    let delta = 0.5 * (a - c) / denom;
    tau as f64 + delta.clamp(-1.0, 1.0)
}
