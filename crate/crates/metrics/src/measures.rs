//! The four objective measures: mel cepstral distortion, log-F0 RMSE,
//! semitone accuracy and voiced/unvoiced error rate.

use muskit_dsp::{F0Track, FrameKind, FrameMatrix};

use crate::dtw::{dtw_align, frame_distance};
use crate::MetricError;

/// 10 / ln 10, the decibel factor in the MCD convention.
pub const MCD_DB_FACTOR: f64 = 10.0 / std::f64::consts::LN_10;

/// Mel cepstral distortion in dB between two cepstral matrices.
///
/// The tracks are DTW-aligned (coefficient 0 excluded from the distance),
/// then averaged over the path:
/// `(10/ln 10) * sqrt(2 * sum_{d>=1} (c_d - c'_d)^2)`.
pub fn mcd(ref_mcep: &FrameMatrix, hyp_mcep: &FrameMatrix) -> Result<f64, MetricError> {
    for m in [ref_mcep, hyp_mcep] {
        if m.kind != FrameKind::Mcep {
            return Err(MetricError::WrongKind {
                expected: FrameKind::Mcep,
                got: m.kind,
            });
        }
    }
    let path = dtw_align(ref_mcep, hyp_mcep)?;
    let total: f64 = path
        .pairs
        .iter()
        .map(|&(i, j)| {
            let d = frame_distance(ref_mcep.row(i), hyp_mcep.row(j));
            MCD_DB_FACTOR * std::f64::consts::SQRT_2 * d
        })
        .sum();
    Ok(total / path.pairs.len() as f64)
}

/// Frames where both tracks are voiced, after trimming to the shorter one.
fn mutually_voiced(a: &F0Track, b: &F0Track) -> Vec<(f64, f64)> {
    let n = a.len().min(b.len());
    (0..n)
        .filter(|&t| a.voiced[t] && b.voiced[t])
        .map(|t| (a.f0_hz[t], b.f0_hz[t]))
        .collect()
}

/// Root mean square error of natural-log F0 over mutually voiced frames.
pub fn f0_rmse(reference: &F0Track, hypothesis: &F0Track) -> Result<f64, MetricError> {
    let pairs = mutually_voiced(reference, hypothesis);
    if pairs.is_empty() {
        return Err(MetricError::NoVoicedOverlap);
    }
    let sum_sq: f64 = pairs
        .iter()
        .map(|(r, h)| {
            let d = h.ln() - r.ln();
            d * d
        })
        .sum();
    Ok((sum_sq / pairs.len() as f64).sqrt())
}

/// Fraction of mutually voiced frames within half a semitone:
/// `|12 log2(f_hyp / f_ref)| < 0.5`.
pub fn semitone_accuracy(reference: &F0Track, hypothesis: &F0Track) -> Result<f64, MetricError> {
    let pairs = mutually_voiced(reference, hypothesis);
    if pairs.is_empty() {
        return Err(MetricError::NoVoicedOverlap);
    }
    let correct = pairs
        .iter()
        .filter(|(r, h)| (12.0 * (h / r).log2()).abs() < 0.5)
        .count();
    Ok(correct as f64 / pairs.len() as f64)
}

/// Fraction of frames whose voicing flags disagree, over the trimmed length.
pub fn vuv_error(reference: &F0Track, hypothesis: &F0Track) -> Result<f64, MetricError> {
    let n = reference.len().min(hypothesis.len());
    if n == 0 {
        return Err(MetricError::EmptyInput);
    }
    let disagree = (0..n)
        .filter(|&t| reference.voiced[t] != hypothesis.voiced[t])
        .count();
    Ok(disagree as f64 / n as f64)
}
