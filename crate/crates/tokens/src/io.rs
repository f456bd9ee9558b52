//! Codebook and token file formats.
//!
//! Codebook (binary, little-endian): magic "MKCB", u32 version, u32 stage
//! count, per stage u32 K, u32 D and K*D f32 centroids row-major, then a
//! u64 seed and a u8 feature-kind code. A plain k-means codebook is a
//! single-stage file.
//!
//! Tokens (text): one utterance per line, `utt_id s0:t0,t1,... s1:...`.

use muskit_dsp::FrameKind;

use crate::kmeans::Codebook;
use crate::rvq::RvqCodebook;
use crate::{TokenError, TokenSequence};

const MAGIC: &[u8; 4] = b"MKCB";
const VERSION: u32 = 1;

pub fn write_codebook_file(rvq: &RvqCodebook) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(rvq.stages.len() as u32).to_le_bytes());
    for stage in &rvq.stages {
        out.extend_from_slice(&(stage.k() as u32).to_le_bytes());
        out.extend_from_slice(&(stage.dim() as u32).to_le_bytes());
        for &v in stage.centroids() {
            out.extend_from_slice(&(v as f32).to_le_bytes());
        }
    }
    out.extend_from_slice(&rvq.seed.to_le_bytes());
    out.push(rvq.feature_kind().code());
    out
}

pub fn read_codebook_file(bytes: &[u8]) -> Result<RvqCodebook, TokenError> {
    let fail = |m: String| TokenError::CodebookFormat(m);
    let need = |pos: usize, n: usize| {
        if pos + n > bytes.len() {
            Err(fail(format!("truncated at byte {pos}, needed {n} more")))
        } else {
            Ok(())
        }
    };

    need(0, 12)?;
    if &bytes[0..4] != MAGIC {
        return Err(fail("bad magic, expected 'MKCB'".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(fail(format!("unsupported version {version}")));
    }
    let n_stages = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    if n_stages == 0 {
        return Err(fail("codebook has zero stages".into()));
    }

    let mut pos = 12usize;
    let mut raw_stages: Vec<(usize, usize, Vec<f64>)> = Vec::with_capacity(n_stages);
    for _ in 0..n_stages {
        need(pos, 8)?;
        let k = u32::from_le_bytes(bytes[pos..pos + 4].try_into().unwrap()) as usize;
        let dim = u32::from_le_bytes(bytes[pos + 4..pos + 8].try_into().unwrap()) as usize;
        pos += 8;
        if k == 0 || dim == 0 {
            return Err(fail(format!("stage with K={k}, D={dim}")));
        }
        need(pos, k * dim * 4)?;
        let centroids: Vec<f64> = bytes[pos..pos + k * dim * 4]
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
            .collect();
        pos += k * dim * 4;
        raw_stages.push((k, dim, centroids));
    }

    need(pos, 9)?;
    let seed = u64::from_le_bytes(bytes[pos..pos + 8].try_into().unwrap());
    let kind = FrameKind::from_code(bytes[pos + 8])
        .ok_or_else(|| fail(format!("unknown feature kind code {}", bytes[pos + 8])))?;
    if pos + 9 != bytes.len() {
        return Err(fail(format!(
            "{} trailing bytes after codebook",
            bytes.len() - pos - 9
        )));
    }

    let dim0 = raw_stages[0].1;
    let mut stages = Vec::with_capacity(n_stages);
    for (k, dim, centroids) in raw_stages {
        if dim != dim0 {
            return Err(fail(format!("stage dimension {dim} differs from {dim0}")));
        }
        stages.push(Codebook::new(centroids, k, dim, kind, seed)?);
    }
    Ok(RvqCodebook { stages, seed })
}

/// Renders token sequences as the text token format, sorted by utterance id.
pub fn write_token_lines(utterances: &[(String, TokenSequence)]) -> String {
    let mut sorted: Vec<&(String, TokenSequence)> = utterances.iter().collect();
    sorted.sort_by(|a, b| a.0.cmp(&b.0));
    let mut out = String::new();
    for (utt_id, tokens) in sorted {
        out.push_str(utt_id);
        for (s, stream) in tokens.streams.iter().enumerate() {
            let rendered: Vec<String> = stream.iter().map(u32::to_string).collect();
            out.push_str(&format!(" s{s}:{}", rendered.join(",")));
        }
        out.push('\n');
    }
    out
}

pub fn parse_token_lines(text: &str) -> Result<Vec<(String, TokenSequence)>, TokenError> {
    let mut out = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split_whitespace();
        let utt_id = parts
            .next()
            .ok_or_else(|| TokenError::TokenFormat {
                line: line_no + 1,
                message: "missing utterance id".into(),
            })?
            .to_string();
        let mut streams = Vec::new();
        for (idx, part) in parts.enumerate() {
            let (tag, values) = part.split_once(':').ok_or_else(|| TokenError::TokenFormat {
                line: line_no + 1,
                message: format!("stream '{part}' missing ':'"),
            })?;
            if tag != format!("s{idx}") {
                return Err(TokenError::TokenFormat {
                    line: line_no + 1,
                    message: format!("expected stream tag s{idx}, found '{tag}'"),
                });
            }
            let stream = if values.is_empty() {
                Vec::new()
            } else {
                values
                    .split(',')
                    .map(|v| {
                        v.parse::<u32>().map_err(|_| TokenError::TokenFormat {
                            line: line_no + 1,
                            message: format!("bad token '{v}'"),
                        })
                    })
                    .collect::<Result<Vec<u32>, _>>()?
            };
            streams.push(stream);
        }
        if streams.is_empty() {
            return Err(TokenError::TokenFormat {
                line: line_no + 1,
                message: "utterance has no token streams".into(),
            });
        }
        let len0 = streams[0].len();
        if streams.iter().any(|s| s.len() != len0) {
            return Err(TokenError::TokenFormat {
                line: line_no + 1,
                message: "streams have unequal lengths".into(),
            });
        }
        out.push((
            utt_id,
            TokenSequence {
                streams,
                codebook_id: String::new(),
            },
        ));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rvq::rvq_fit;
    use muskit_dsp::FrameMatrix;

    fn data() -> FrameMatrix {
        FrameMatrix::from_rows(
            (0..50)
                .map(|i| vec![(i as f64 * 0.37).sin(), (i as f64 * 0.11).cos()])
                .collect(),
            100.0,
            FrameKind::LogMel,
        )
        .unwrap()
    }

    #[test]
    fn codebook_file_round_trip() {
        let rvq = rvq_fit(&data(), 3, 4, 77).unwrap();
        let bytes = write_codebook_file(&rvq);
        let back = read_codebook_file(&bytes).unwrap();
        assert_eq!(back.n_stages(), 3);
        assert_eq!(back.seed, 77);
        assert_eq!(back.feature_kind(), FrameKind::LogMel);
        for (a, b) in rvq.stages.iter().zip(back.stages.iter()) {
            assert_eq!(a.k(), b.k());
            assert_eq!(a.dim(), b.dim());
            // file stores f32; compare post-narrowing
            for (x, y) in a.centroids().iter().zip(b.centroids().iter()) {
                assert_eq!(*x as f32, *y as f32);
            }
        }
    }

    #[test]
    fn corrupt_codebook_is_rejected() {
        let rvq = rvq_fit(&data(), 1, 4, 0).unwrap();
        let mut bytes = write_codebook_file(&rvq);
        bytes.truncate(bytes.len() - 3);
        assert!(read_codebook_file(&bytes).is_err());
        bytes[0] = b'X';
        assert!(read_codebook_file(&bytes).is_err());
    }

    #[test]
    fn token_lines_round_trip_sorted() {
        let utts = vec![
            (
                "utt_b".to_string(),
                TokenSequence {
                    streams: vec![vec![1, 2, 3], vec![4, 5, 6]],
                    codebook_id: "x".into(),
                },
            ),
            (
                "utt_a".to_string(),
                TokenSequence {
                    streams: vec![vec![7], vec![8]],
                    codebook_id: "x".into(),
                },
            ),
        ];
        let text = write_token_lines(&utts);
        assert!(text.starts_with("utt_a s0:7 s1:8\n"));
        let parsed = parse_token_lines(&text).unwrap();
        assert_eq!(parsed.len(), 2);
        assert_eq!(parsed[0].0, "utt_a");
        assert_eq!(parsed[1].1.streams, vec![vec![1, 2, 3], vec![4, 5, 6]]);
    }

    #[test]
    fn malformed_token_lines_are_rejected() {
        assert!(parse_token_lines("utt s1:1,2\n").is_err()); // wrong tag order
        assert!(parse_token_lines("utt s0:1,x\n").is_err());
        assert!(parse_token_lines("utt s0:1 s1:1,2\n").is_err()); // ragged
    }
}
