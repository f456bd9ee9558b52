//! Per-utterance evaluation of a synthesized take against its reference,
//! and corpus-level aggregation.

use serde::{Deserialize, Serialize};

use muskit_dsp::{extract_f0, mel_cepstrum, resample, AudioBuffer, F0Params, FrameParams};

use crate::measures::{f0_rmse, mcd, semitone_accuracy, vuv_error};
use crate::MetricError;

pub const DEFAULT_MCEP_COEFFS: usize = 25;

/// All objective measures for one reference/hypothesis pair.
///
/// The F0-based fields are absent when no frame is voiced in both tracks
/// (for example a silent hypothesis); `n_mutually_voiced` is then 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricReport {
    pub mcd_db: f64,
    pub f0_rmse_log: Option<f64>,
    pub semitone_accuracy: Option<f64>,
    pub vuv_error: f64,
    pub n_frames_ref: usize,
    pub n_frames_hyp: usize,
    pub n_mutually_voiced: usize,
    pub ref_resampled: bool,
    pub hyp_resampled: bool,
    /// Perceptual score merged in from the external service, when requested.
    pub mos: Option<f64>,
}

/// Extracts cepstra and F0 from both signals and computes all measures.
///
/// Buffers not at `params.sample_rate_hz` are resampled internally and the
/// report flags it. Deterministic: identical inputs give identical reports.
pub fn evaluate_pair(
    ref_audio: &AudioBuffer,
    hyp_audio: &AudioBuffer,
    params: &FrameParams,
) -> Result<MetricReport, MetricError> {
    let f0_params = F0Params::default();

    let (ref_audio, ref_resampled) = to_rate(ref_audio, params.sample_rate_hz)?;
    let (hyp_audio, hyp_resampled) = to_rate(hyp_audio, params.sample_rate_hz)?;

    let ref_mcep = mel_cepstrum(&ref_audio, params, DEFAULT_MCEP_COEFFS)?;
    let hyp_mcep = mel_cepstrum(&hyp_audio, params, DEFAULT_MCEP_COEFFS)?;
    let ref_f0 = extract_f0(&ref_audio, params, &f0_params)?;
    let hyp_f0 = extract_f0(&hyp_audio, params, &f0_params)?;

    let mcd_db = mcd(&ref_mcep, &hyp_mcep)?;
    let vuv = vuv_error(&ref_f0, &hyp_f0)?;

    let n = ref_f0.len().min(hyp_f0.len());
    let n_mutually_voiced = (0..n)
        .filter(|&t| ref_f0.voiced[t] && hyp_f0.voiced[t])
        .count();

    let (f0_rmse_log, sa) = if n_mutually_voiced == 0 {
        (None, None)
    } else {
        (
            Some(f0_rmse(&ref_f0, &hyp_f0)?),
            Some(semitone_accuracy(&ref_f0, &hyp_f0)?),
        )
    };

    Ok(MetricReport {
        mcd_db,
        f0_rmse_log,
        semitone_accuracy: sa,
        vuv_error: vuv,
        n_frames_ref: ref_f0.len(),
        n_frames_hyp: hyp_f0.len(),
        n_mutually_voiced,
        ref_resampled,
        hyp_resampled,
        mos: None,
    })
}

fn to_rate(buffer: &AudioBuffer, rate: u32) -> Result<(AudioBuffer, bool), MetricError> {
    if buffer.sample_rate_hz == rate {
        Ok((buffer.clone(), false))
    } else {
        Ok((resample(buffer, rate)?, true))
    }
}

/// Corpus means: fields averaged over the reports that carry them.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanReport {
    pub mcd_db: Option<f64>,
    pub f0_rmse_log: Option<f64>,
    pub semitone_accuracy: Option<f64>,
    pub vuv_error: Option<f64>,
    pub mos: Option<f64>,
    pub n_utterances: usize,
}

pub fn mean_report<'a>(reports: impl IntoIterator<Item = &'a MetricReport>) -> MeanReport {
    let mut n = 0usize;
    let mut mcd_sum = 0.0;
    let mut vuv_sum = 0.0;
    let mut rmse = (0.0, 0usize);
    let mut sa = (0.0, 0usize);
    let mut mos = (0.0, 0usize);
    for r in reports {
        n += 1;
        mcd_sum += r.mcd_db;
        vuv_sum += r.vuv_error;
        if let Some(v) = r.f0_rmse_log {
            rmse = (rmse.0 + v, rmse.1 + 1);
        }
        if let Some(v) = r.semitone_accuracy {
            sa = (sa.0 + v, sa.1 + 1);
        }
        if let Some(v) = r.mos {
            mos = (mos.0 + v, mos.1 + 1);
        }
    }
    let avg = |sum: f64, count: usize| (count > 0).then(|| sum / count as f64);
    MeanReport {
        mcd_db: avg(mcd_sum, n),
        f0_rmse_log: avg(rmse.0, rmse.1),
        semitone_accuracy: avg(sa.0, sa.1),
        vuv_error: avg(vuv_sum, n),
        mos: avg(mos.0, mos.1),
        n_utterances: n,
    }
}
