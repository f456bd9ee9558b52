//! RIFF/WAVE reading and writing.
//!
//! Read: PCM 16/24-bit and IEEE float 32, mono or stereo (stereo is averaged
//! to mono at ingest). Integer PCM is scaled to [-1, 1) by 1 / 2^(bits-1).
//! Write: float 32 is the canonical output; PCM 16/24 are available for
//! interchange.

use thiserror::Error;

use crate::buffer::AudioBuffer;

#[derive(Debug, Error)]
pub enum WavError {
    #[error("wav syntax: {0}")]
    Syntax(String),
    #[error("unsupported encoding: {0}")]
    UnsupportedEncoding(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BitDepth {
    Pcm16,
    Pcm24,
    Float32,
}

const FORMAT_PCM: u16 = 1;
const FORMAT_IEEE_FLOAT: u16 = 3;

/// Decodes a complete WAV document to a mono buffer.
pub fn read_wav(document: &[u8]) -> Result<AudioBuffer, WavError> {
    let mut r = Reader {
        bytes: document,
        pos: 0,
    };
    let riff = r.take(4)?;
    if riff != b"RIFF" {
        return Err(WavError::Syntax(format!(
            "bad magic {:?}, expected 'RIFF'",
            String::from_utf8_lossy(riff)
        )));
    }
    r.take(4)?; // riff size, not trusted
    let wave = r.take(4)?;
    if wave != b"WAVE" {
        return Err(WavError::Syntax("missing 'WAVE' form type".into()));
    }

    let mut fmt: Option<(u16, u16, u32, u16)> = None; // format, channels, rate, bits
    let mut data: Option<&[u8]> = None;
    while r.remaining() >= 8 {
        let id: [u8; 4] = r.take(4)?.try_into().unwrap();
        let size = u32::from_le_bytes(r.take(4)?.try_into().unwrap()) as usize;
        let payload = r.take(size.min(r.remaining()))?;
        match &id {
            b"fmt " => {
                if payload.len() < 16 {
                    return Err(WavError::Syntax("fmt chunk too short".into()));
                }
                let format = u16::from_le_bytes([payload[0], payload[1]]);
                let channels = u16::from_le_bytes([payload[2], payload[3]]);
                let rate = u32::from_le_bytes([payload[4], payload[5], payload[6], payload[7]]);
                let bits = u16::from_le_bytes([payload[14], payload[15]]);
                fmt = Some((format, channels, rate, bits));
            }
            b"data" => {
                data = Some(payload);
                // chunks after data are ignored
                break;
            }
            _ => {}
        }
        if size % 2 == 1 && r.remaining() > 0 {
            r.take(1)?; // chunk padding
        }
    }

    let (format, channels, rate, bits) =
        fmt.ok_or_else(|| WavError::Syntax("missing fmt chunk".into()))?;
    let data = data.ok_or_else(|| WavError::Syntax("missing data chunk".into()))?;
    if rate == 0 {
        return Err(WavError::Syntax("sample rate is zero".into()));
    }
    if channels == 0 || channels > 2 {
        return Err(WavError::UnsupportedEncoding(format!(
            "{channels} channels (mono or stereo only)"
        )));
    }

    let interleaved: Vec<f64> = match (format, bits) {
        (FORMAT_PCM, 16) => data
            .chunks_exact(2)
            .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
            .collect(),
        (FORMAT_PCM, 24) => data
            .chunks_exact(3)
            .map(|b| {
                let v = ((b[2] as i32) << 16 | (b[1] as i32) << 8 | b[0] as i32) << 8 >> 8;
                v as f64 / 8_388_608.0
            })
            .collect(),
        (FORMAT_IEEE_FLOAT, 32) => data
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect(),
        (f, b) => {
            return Err(WavError::UnsupportedEncoding(format!(
                "format tag {f} at {b} bits (PCM 16/24 or float 32 only)"
            )))
        }
    };

    let samples = if channels == 2 {
        interleaved
            .chunks_exact(2)
            .map(|lr| 0.5 * (lr[0] + lr[1]))
            .collect()
    } else {
        interleaved
    };

    Ok(AudioBuffer::new(samples, rate))
}

/// Encodes a buffer as a WAV document at the requested depth.
///
/// Integer depths quantize by round(x * 2^(bits-1)) with clamping; float 32
/// narrows f64 samples to f32 (exact round trip for f32-representable data).
pub fn write_wav(buffer: &AudioBuffer, depth: BitDepth) -> Vec<u8> {
    let n = buffer.samples.len();
    let (format, bits): (u16, u16) = match depth {
        BitDepth::Pcm16 => (FORMAT_PCM, 16),
        BitDepth::Pcm24 => (FORMAT_PCM, 24),
        BitDepth::Float32 => (FORMAT_IEEE_FLOAT, 32),
    };
    let bytes_per_sample = (bits / 8) as usize;
    let data_len = n * bytes_per_sample;
    let fact = matches!(depth, BitDepth::Float32);
    let riff_len = 4 + (8 + 16) + if fact { 8 + 4 } else { 0 } + 8 + data_len;

    let mut out = Vec::with_capacity(8 + riff_len);
    out.extend_from_slice(b"RIFF");
    out.extend_from_slice(&(riff_len as u32).to_le_bytes());
    out.extend_from_slice(b"WAVE");
    out.extend_from_slice(b"fmt ");
    out.extend_from_slice(&16u32.to_le_bytes());
    out.extend_from_slice(&format.to_le_bytes());
    out.extend_from_slice(&1u16.to_le_bytes());
    out.extend_from_slice(&buffer.sample_rate_hz.to_le_bytes());
    let byte_rate = buffer.sample_rate_hz * bytes_per_sample as u32;
    out.extend_from_slice(&byte_rate.to_le_bytes());
    out.extend_from_slice(&(bytes_per_sample as u16).to_le_bytes());
    out.extend_from_slice(&bits.to_le_bytes());
    if fact {
        out.extend_from_slice(b"fact");
        out.extend_from_slice(&4u32.to_le_bytes());
        out.extend_from_slice(&(n as u32).to_le_bytes());
    }
    out.extend_from_slice(b"data");
    out.extend_from_slice(&(data_len as u32).to_le_bytes());

    match depth {
        BitDepth::Pcm16 => {
            for &s in &buffer.samples {
                let v = (s.clamp(-1.0, 1.0) * 32768.0).round() as i32;
                out.extend_from_slice(&(v.clamp(-32768, 32767) as i16).to_le_bytes());
            }
        }
        BitDepth::Pcm24 => {
            for &s in &buffer.samples {
                let v = (s.clamp(-1.0, 1.0) * 8_388_608.0).round() as i32;
                let v = v.clamp(-8_388_608, 8_388_607);
                out.extend_from_slice(&v.to_le_bytes()[..3]);
            }
        }
        BitDepth::Float32 => {
            for &s in &buffer.samples {
                out.extend_from_slice(&(s as f32).to_le_bytes());
            }
        }
    }
    out
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn remaining(&self) -> usize {
        self.bytes.len() - self.pos
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], WavError> {
        if self.pos + n > self.bytes.len() {
            return Err(WavError::Syntax(format!(
                "unexpected end of file at byte {}, needed {n} more",
                self.pos
            )));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }
}
