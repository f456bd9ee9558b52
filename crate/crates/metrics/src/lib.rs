//! Objective evaluation of generated singing against references: mel
//! cepstral distortion, log-F0 RMSE, semitone accuracy and voiced/unvoiced
//! error rate, with DTW alignment and corpus aggregation.

pub mod dtw;
pub mod measures;
pub mod report;

use thiserror::Error;

pub use dtw::{dtw_align, frame_distance, path_cost, DtwPath};
pub use measures::{f0_rmse, mcd, semitone_accuracy, vuv_error, MCD_DB_FACTOR};
pub use report::{evaluate_pair, mean_report, MeanReport, MetricReport, DEFAULT_MCEP_COEFFS};

use muskit_dsp::FrameKind;

#[derive(Debug, Error)]
pub enum MetricError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("empty input")]
    EmptyInput,
    #[error("no frame is voiced in both tracks")]
    NoVoicedOverlap,
    #[error("expected {expected:?} frames, got {got:?}")]
    WrongKind { expected: FrameKind, got: FrameKind },
    #[error(transparent)]
    Feature(#[from] muskit_dsp::FeatureError),
    #[error(transparent)]
    Resample(#[from] muskit_dsp::ResampleError),
}
