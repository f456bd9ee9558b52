//! Frame matrices and their binary interchange format.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// What a frame matrix holds.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FrameKind {
    Magnitude,
    LogMel,
    Mcep,
    /// Frames computed outside the toolkit (e.g. SSL model embeddings),
    /// ingested through the frame file format.
    External,
}

impl FrameKind {
    pub fn code(self) -> u8 {
        match self {
            FrameKind::Magnitude => 0,
            FrameKind::LogMel => 1,
            FrameKind::Mcep => 2,
            FrameKind::External => 3,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(FrameKind::Magnitude),
            1 => Some(FrameKind::LogMel),
            2 => Some(FrameKind::Mcep),
            3 => Some(FrameKind::External),
            _ => None,
        }
    }
}

/// Time-major matrix of frame features: `rows` frames of dimension `dim`.
#[derive(Debug, Clone, PartialEq)]
pub struct FrameMatrix {
    data: Vec<f64>,
    rows: usize,
    dim: usize,
    pub frame_rate_hz: f64,
    pub kind: FrameKind,
}

impl FrameMatrix {
    pub fn zeros(rows: usize, dim: usize, frame_rate_hz: f64, kind: FrameKind) -> Self {
        FrameMatrix {
            data: vec![0.0; rows * dim],
            rows,
            dim,
            frame_rate_hz,
            kind,
        }
    }

    pub fn from_rows(
        rows_data: Vec<Vec<f64>>,
        frame_rate_hz: f64,
        kind: FrameKind,
    ) -> Result<Self, FrameError> {
        let rows = rows_data.len();
        let dim = rows_data.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows * dim);
        for (i, row) in rows_data.into_iter().enumerate() {
            if row.len() != dim {
                return Err(FrameError::RaggedRows {
                    row: i,
                    expected: dim,
                    got: row.len(),
                });
            }
            data.extend_from_slice(&row);
        }
        Ok(FrameMatrix {
            data,
            rows,
            dim,
            frame_rate_hz,
            kind,
        })
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn row(&self, t: usize) -> &[f64] {
        &self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn row_mut(&mut self, t: usize) -> &mut [f64] {
        &mut self.data[t * self.dim..(t + 1) * self.dim]
    }

    pub fn iter_rows(&self) -> impl Iterator<Item = &[f64]> {
        self.data.chunks_exact(self.dim.max(1))
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn validate(&self) -> Result<(), FrameError> {
        if let Some(bad) = self.data.iter().position(|v| !v.is_finite()) {
            return Err(FrameError::NonFinite { index: bad });
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum FrameError {
    #[error("row {row} has {got} values, expected {expected}")]
    RaggedRows {
        row: usize,
        expected: usize,
        got: usize,
    },
    #[error("non-finite value at flat index {index}")]
    NonFinite { index: usize },
    #[error("frame file: {0}")]
    Format(String),
}

const MAGIC: &[u8; 4] = b"MKFR";
const VERSION: u32 = 1;

/// Encodes a matrix in the frame file format: magic "MKFR", u32 version,
/// u32 rows, u32 dim, f32 frame rate, u8 kind, then rows*dim f32 values
/// row-major, all little-endian. Values are narrowed to f32.
pub fn write_frame_file(matrix: &FrameMatrix) -> Vec<u8> {
    let mut out = Vec::with_capacity(17 + matrix.data.len() * 4);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(matrix.rows as u32).to_le_bytes());
    out.extend_from_slice(&(matrix.dim as u32).to_le_bytes());
    out.extend_from_slice(&(matrix.frame_rate_hz as f32).to_le_bytes());
    out.push(matrix.kind.code());
    for &v in &matrix.data {
        out.extend_from_slice(&(v as f32).to_le_bytes());
    }
    out
}

pub fn read_frame_file(bytes: &[u8]) -> Result<FrameMatrix, FrameError> {
    if bytes.len() < 21 {
        return Err(FrameError::Format("file shorter than header".into()));
    }
    if &bytes[0..4] != MAGIC {
        return Err(FrameError::Format("bad magic, expected 'MKFR'".into()));
    }
    let version = u32::from_le_bytes(bytes[4..8].try_into().unwrap());
    if version != VERSION {
        return Err(FrameError::Format(format!("unsupported version {version}")));
    }
    let rows = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[12..16].try_into().unwrap()) as usize;
    let frame_rate_hz = f32::from_le_bytes(bytes[16..20].try_into().unwrap()) as f64;
    let kind = FrameKind::from_code(bytes[20])
        .ok_or_else(|| FrameError::Format(format!("unknown kind code {}", bytes[20])))?;
    let expected = 21 + rows * dim * 4;
    if bytes.len() != expected {
        return Err(FrameError::Format(format!(
            "payload is {} bytes, expected {expected} for {rows}x{dim}",
            bytes.len()
        )));
    }
    let data = bytes[21..]
        .chunks_exact(4)
        .map(|b| f32::from_le_bytes(b.try_into().unwrap()) as f64)
        .collect();
    Ok(FrameMatrix {
        data,
        rows,
        dim,
        frame_rate_hz,
        kind,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_round_trip() {
        let m = FrameMatrix::from_rows(
            vec![vec![1.0, 2.0, 3.0], vec![-0.5, 0.25, 0.125]],
            93.75,
            FrameKind::LogMel,
        )
        .unwrap();
        let bytes = write_frame_file(&m);
        let back = read_frame_file(&bytes).unwrap();
        assert_eq!(back.rows(), 2);
        assert_eq!(back.dim(), 3);
        assert_eq!(back.kind, FrameKind::LogMel);
        assert_eq!(back.data(), m.data());
        assert!((back.frame_rate_hz - 93.75).abs() < 1e-6);
    }

    #[test]
    fn truncated_file_is_rejected() {
        let m = FrameMatrix::zeros(4, 2, 100.0, FrameKind::External);
        let mut bytes = write_frame_file(&m);
        bytes.truncate(bytes.len() - 1);
        assert!(read_frame_file(&bytes).is_err());
        assert!(read_frame_file(b"NOPE").is_err());
    }

    #[test]
    fn ragged_rows_rejected() {
        assert!(FrameMatrix::from_rows(
            vec![vec![1.0], vec![1.0, 2.0]],
            100.0,
            FrameKind::External
        )
        .is_err());
    }
}
