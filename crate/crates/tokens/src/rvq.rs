//! Residual vector quantization: a cascade of k-means codebooks, each
//! trained on the residual left by the previous stages.

use muskit_dsp::{FrameKind, FrameMatrix};

use crate::kmeans::{kmeans_fit, sq_dist, Codebook, DEFAULT_MAX_ITERS, DEFAULT_TOL};
use crate::{TokenSequence, TokenError};

/// Ordered quantizer stages sharing one feature dimension.
#[derive(Debug, Clone, PartialEq)]
pub struct RvqCodebook {
    pub stages: Vec<Codebook>,
    pub seed: u64,
}

impl RvqCodebook {
    pub fn dim(&self) -> usize {
        self.stages.first().map_or(0, Codebook::dim)
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn feature_kind(&self) -> FrameKind {
        self.stages
            .first()
            .map_or(FrameKind::External, |s| s.feature_kind)
    }

    pub fn reference_id(&self) -> String {
        let ks: Vec<String> = self.stages.iter().map(|s| s.k().to_string()).collect();
        format!("rvq-{}x{}-seed{}", ks.join("+"), self.dim(), self.seed)
    }
}

/// Trains an RVQ codebook. Stage `s` runs k-means (seed + s) on the
/// residuals after subtracting the stage 0..s-1 reconstructions, so a
/// single-stage fit is identical to a plain k-means fit with the same seed.
pub fn rvq_fit(
    data: &FrameMatrix,
    n_stages: usize,
    k_per_stage: usize,
    seed: u64,
) -> Result<RvqCodebook, TokenError> {
    rvq_fit_trace(data, n_stages, k_per_stage, seed).map(|(cb, _)| cb)
}

/// Like [`rvq_fit`], also returning the mean squared residual after each
/// stage, measured on the training data (non-increasing).
pub fn rvq_fit_trace(
    data: &FrameMatrix,
    n_stages: usize,
    k_per_stage: usize,
    seed: u64,
) -> Result<(RvqCodebook, Vec<f64>), TokenError> {
    if n_stages == 0 {
        return Err(TokenError::BadData("n_stages must be at least 1".into()));
    }
    let t = data.rows();
    let dim = data.dim();
    if t < k_per_stage {
        return Err(TokenError::InsufficientData {
            frames: t,
            k: k_per_stage,
        });
    }

    let mut residual = FrameMatrix::from_rows(
        data.iter_rows().map(<[f64]>::to_vec).collect(),
        data.frame_rate_hz,
        data.kind,
    )
    .expect("copy of a valid matrix");

    let mut stages = Vec::with_capacity(n_stages);
    let mut mse_trace = Vec::with_capacity(n_stages);
    for s in 0..n_stages {
        let stage_seed = seed.wrapping_add(s as u64);
        let cb = kmeans_fit(&residual, k_per_stage, stage_seed, DEFAULT_MAX_ITERS, DEFAULT_TOL)?;

        // subtract this stage's reconstruction from the running residual
        let mut sq_err = 0.0f64;
        for i in 0..t {
            let choice = cb.nearest(residual.row(i));
            let centroid = cb.centroid(choice).to_vec();
            let row = residual.row_mut(i);
            for (r, c) in row.iter_mut().zip(centroid.iter()) {
                *r -= c;
                sq_err += *r * *r;
            }
        }
        mse_trace.push(sq_err / (t * dim) as f64);
        stages.push(cb);
    }

    Ok((RvqCodebook { stages, seed }, mse_trace))
}

/// Greedy per-stage encoding: each stage quantizes the running residual.
pub fn rvq_encode(data: &FrameMatrix, rvq: &RvqCodebook) -> Result<TokenSequence, TokenError> {
    if rvq.stages.is_empty() {
        return Err(TokenError::BadData("codebook has no stages".into()));
    }
    if data.dim() != rvq.dim() {
        return Err(TokenError::Dimension {
            expected: rvq.dim(),
            got: data.dim(),
        });
    }
    let t = data.rows();
    let mut streams = vec![Vec::with_capacity(t); rvq.n_stages()];
    let mut residual = vec![0.0f64; rvq.dim()];
    for i in 0..t {
        residual.copy_from_slice(data.row(i));
        for (s, cb) in rvq.stages.iter().enumerate() {
            let choice = cb.nearest(&residual);
            streams[s].push(choice as u32);
            for (r, c) in residual.iter_mut().zip(cb.centroid(choice)) {
                *r -= c;
            }
        }
    }
    Ok(TokenSequence {
        streams,
        codebook_id: rvq.reference_id(),
    })
}

/// Decodes tokens to frames by summing the selected centroids per stage.
pub fn rvq_decode(tokens: &TokenSequence, rvq: &RvqCodebook) -> Result<FrameMatrix, TokenError> {
    if tokens.streams.len() != rvq.n_stages() {
        return Err(TokenError::Dimension {
            expected: rvq.n_stages(),
            got: tokens.streams.len(),
        });
    }
    let t = tokens.len();
    let dim = rvq.dim();
    let mut rows = vec![vec![0.0f64; dim]; t];
    for (s, (stream, cb)) in tokens.streams.iter().zip(rvq.stages.iter()).enumerate() {
        if stream.len() != t {
            return Err(TokenError::Dimension {
                expected: t,
                got: stream.len(),
            });
        }
        for (i, &tok) in stream.iter().enumerate() {
            if tok as usize >= cb.k() {
                return Err(TokenError::TokenRange {
                    stage: s,
                    token: tok,
                    k: cb.k(),
                });
            }
            for (r, c) in rows[i].iter_mut().zip(cb.centroid(tok as usize)) {
                *r += c;
            }
        }
    }
    FrameMatrix::from_rows(rows, 0.0, rvq.feature_kind())
        .map_err(|e| TokenError::BadData(e.to_string()))
}

/// Mean squared error between a matrix and its RVQ round trip, decoding
/// with only the first `stages_used` stages.
pub fn reconstruction_mse(
    data: &FrameMatrix,
    rvq: &RvqCodebook,
    stages_used: usize,
) -> Result<f64, TokenError> {
    let tokens = rvq_encode(data, rvq)?;
    let truncated = TokenSequence {
        streams: tokens.streams[..stages_used.min(tokens.streams.len())].to_vec(),
        codebook_id: tokens.codebook_id.clone(),
    };
    let partial = RvqCodebook {
        stages: rvq.stages[..stages_used.min(rvq.stages.len())].to_vec(),
        seed: rvq.seed,
    };
    let recon = rvq_decode(&truncated, &partial)?;
    let mut err = 0.0f64;
    for i in 0..data.rows() {
        err += sq_dist(data.row(i), recon.row(i));
    }
    Ok(err / (data.rows() * data.dim()).max(1) as f64)
}
