//! `train-tokenizer` and `tokenize`: build codebooks from prepared features
//! and emit discrete token files.

use std::path::{Path, PathBuf};

use anyhow::Context;

use muskit_dsp::{read_frame_file, FrameKind, FrameMatrix};
use muskit_tokens::{
    read_codebook_file, rvq_encode, rvq_fit, tokenize, write_codebook_file, write_token_lines,
    RvqCodebook, TokenError, TokenSequence,
};

use crate::config::PipelineConfig;
use crate::prepare::{read_dataset_index, DatasetIndex};
use crate::util::write_atomic;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum TokenizerMode {
    /// Single k-means codebook over log-mel frames.
    Semantic,
    /// Residual vector quantizer over log-mel frames.
    Rvq,
}

/// Stacks the feature matrices of every segment, in index order.
fn stack_features(
    dataset_dir: &Path,
    index: &DatasetIndex,
    kind: FrameKind,
) -> anyhow::Result<FrameMatrix> {
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut frame_rate = 0.0f64;
    for seg in &index.segments {
        let rel = match kind {
            FrameKind::LogMel => &seg.files.logmel,
            FrameKind::Mcep => &seg.files.mcep,
            other => anyhow::bail!(
                "dataset carries no feature files of kind {other:?}; tokenizers run on logmel or mcep"
            ),
        };
        let path = dataset_dir.join(rel);
        let bytes =
            std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?;
        let matrix = read_frame_file(&bytes)?;
        if matrix.kind != kind {
            anyhow::bail!(
                "{} holds {:?} frames, expected {kind:?}",
                path.display(),
                matrix.kind
            );
        }
        frame_rate = matrix.frame_rate_hz;
        rows.extend(matrix.iter_rows().map(<[f64]>::to_vec));
    }
    Ok(FrameMatrix::from_rows(rows, frame_rate, kind)?)
}

/// Trains a codebook over the dataset's log-mel frames and writes it to
/// `out` (default `<dataset>/tokenizer_<mode>.mkcb`).
pub fn cmd_train_tokenizer(
    dataset_dir: &Path,
    mode: TokenizerMode,
    out: Option<PathBuf>,
    config: &PipelineConfig,
    seed_override: Option<u64>,
) -> anyhow::Result<PathBuf> {
    let index = read_dataset_index(dataset_dir)?;
    let data = stack_features(dataset_dir, &index, FrameKind::LogMel)?;
    let seed = seed_override.unwrap_or(config.tokenizer.seed);

    let result = match mode {
        TokenizerMode::Semantic => muskit_tokens::kmeans_fit(
            &data,
            config.tokenizer.k,
            seed,
            100,
            1e-6,
        )
        .map(|stage| RvqCodebook {
            stages: vec![stage],
            seed,
        }),
        TokenizerMode::Rvq => rvq_fit(
            &data,
            config.tokenizer.n_stages,
            config.tokenizer.k_per_stage,
            seed,
        ),
    };
    let codebook = match result {
        Ok(cb) => cb,
        Err(TokenError::InsufficientData { frames, k }) => anyhow::bail!(
            "insufficient data: {frames} frames for k={k}; prepare more audio or lower \
             tokenizer.k / tokenizer.k_per_stage in the config"
        ),
        Err(e) => return Err(e.into()),
    };

    let out = out.unwrap_or_else(|| {
        dataset_dir.join(match mode {
            TokenizerMode::Semantic => "tokenizer_semantic.mkcb",
            TokenizerMode::Rvq => "tokenizer_rvq.mkcb",
        })
    });
    write_atomic(&out, &write_codebook_file(&codebook))?;
    Ok(out)
}

/// Tokenizes every segment with a trained codebook and writes one token
/// file (default `<dataset>/tokens_<codebook stem>.txt`).
pub fn cmd_tokenize(
    dataset_dir: &Path,
    codebook_path: &Path,
    out: Option<PathBuf>,
) -> anyhow::Result<PathBuf> {
    let bytes = std::fs::read(codebook_path)
        .with_context(|| format!("reading codebook {}", codebook_path.display()))?;
    let codebook = read_codebook_file(&bytes)?;
    let index = read_dataset_index(dataset_dir)?;

    let mut utterances: Vec<(String, TokenSequence)> = Vec::with_capacity(index.segments.len());
    for seg in &index.segments {
        let rel = match codebook.feature_kind() {
            FrameKind::LogMel => &seg.files.logmel,
            FrameKind::Mcep => &seg.files.mcep,
            other => anyhow::bail!(
                "codebook was trained on {other:?} frames; supply them through the frame file \
                 format and tokenize with the library API"
            ),
        };
        let path = dataset_dir.join(rel);
        let data = read_frame_file(
            &std::fs::read(&path).with_context(|| format!("reading {}", path.display()))?,
        )?;
        let tokens = if codebook.n_stages() == 1 {
            tokenize(&data, &codebook.stages[0])?
        } else {
            rvq_encode(&data, &codebook)?
        };
        utterances.push((seg.segment_id.clone(), tokens));
    }

    let out = out.unwrap_or_else(|| {
        let stem = codebook_path
            .file_stem()
            .map(|s| s.to_string_lossy().into_owned())
            .unwrap_or_else(|| "codebook".into());
        dataset_dir.join(format!("tokens_{stem}.txt"))
    });
    write_atomic(&out, write_token_lines(&utterances).as_bytes())?;
    Ok(out)
}
