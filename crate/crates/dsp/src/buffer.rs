//! Mono audio buffer.

use thiserror::Error;

/// Mono PCM audio in `[-1, 1]`, stored as f64 so downstream arithmetic
/// (resampling, feature extraction) keeps full precision.
#[derive(Debug, Clone, PartialEq)]
pub struct AudioBuffer {
    pub samples: Vec<f64>,
    pub sample_rate_hz: u32,
}

#[derive(Debug, Error)]
pub enum BufferError {
    #[error("sample rate must be positive")]
    ZeroSampleRate,
    #[error("sample {index} is {value}, expected finite and within [-1, 1]")]
    OutOfRange { index: usize, value: f64 },
}

impl AudioBuffer {
    pub fn new(samples: Vec<f64>, sample_rate_hz: u32) -> Self {
        AudioBuffer {
            samples,
            sample_rate_hz,
        }
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn duration_sec(&self) -> f64 {
        self.samples.len() as f64 / self.sample_rate_hz as f64
    }

    /// File-interchange invariant: finite samples within [-1, 1] (plus a
    /// hair of headroom). Synthetic intermediate buffers may exceed it.
    pub fn validate(&self) -> Result<(), BufferError> {
        if self.sample_rate_hz == 0 {
            return Err(BufferError::ZeroSampleRate);
        }
        for (index, &value) in self.samples.iter().enumerate() {
            if !value.is_finite() || value.abs() > 1.0 + 1e-6 {
                return Err(BufferError::OutOfRange { index, value });
            }
        }
        Ok(())
    }
}
