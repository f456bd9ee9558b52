//! Discrete frame representations: k-means semantic tokens over frame
//! features and residual vector quantization acoustic tokens, with the
//! file formats that carry them.
//!
//! Training is seeded and single-threaded inside one fit, so codebooks and
//! token streams are bit-identical across runs and caller thread counts.

pub mod io;
pub mod kmeans;
pub mod rvq;

use thiserror::Error;

pub use io::{parse_token_lines, read_codebook_file, write_codebook_file, write_token_lines};
pub use kmeans::{kmeans_fit, kmeans_fit_trace, Codebook};
pub use rvq::{reconstruction_mse, rvq_decode, rvq_encode, rvq_fit, rvq_fit_trace, RvqCodebook};

use muskit_dsp::FrameMatrix;

/// Discrete token streams: one stream for semantic tokens, one per stage
/// for acoustic tokens. All streams have equal length.
#[derive(Debug, Clone, PartialEq)]
pub struct TokenSequence {
    pub streams: Vec<Vec<u32>>,
    pub codebook_id: String,
}

impl TokenSequence {
    pub fn len(&self) -> usize {
        self.streams.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Error)]
pub enum TokenError {
    #[error("insufficient data: {frames} frames for k={k}")]
    InsufficientData { frames: usize, k: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("token {token} at stage {stage} outside codebook of size {k}")]
    TokenRange { stage: usize, token: u32, k: usize },
    #[error("invalid training data: {0}")]
    BadData(String),
    #[error("codebook file: {0}")]
    CodebookFormat(String),
    #[error("token file line {line}: {message}")]
    TokenFormat { line: usize, message: String },
}

/// Maps each frame to its nearest centroid (squared Euclidean distance,
/// ties to the lowest index).
pub fn tokenize(data: &FrameMatrix, codebook: &Codebook) -> Result<TokenSequence, TokenError> {
    if data.dim() != codebook.dim() {
        return Err(TokenError::Dimension {
            expected: codebook.dim(),
            got: data.dim(),
        });
    }
    let stream = data
        .iter_rows()
        .map(|frame| codebook.nearest(frame) as u32)
        .collect();
    Ok(TokenSequence {
        streams: vec![stream],
        codebook_id: format!(
            "kmeans-{}x{}-seed{}",
            codebook.k(),
            codebook.dim(),
            codebook.seed
        ),
    })
}
