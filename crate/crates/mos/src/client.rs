//! Client for the perceptual scoring protocol.
//!
//! Request: `POST {endpoint}/score` with a JSON body
//! `{"sample_rate": <int>, "pcm16_base64": <base64 of little-endian 16-bit
//! PCM>}`. Response: 200 with `{"mos": <number in [1,5]>, "model_id":
//! <string>}`. Anything else maps to the error taxonomy below.

use std::collections::BTreeMap;
use std::sync::Mutex;
use std::time::{Duration, Instant};

use base64::engine::general_purpose::STANDARD as BASE64;
use base64::Engine;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use muskit_dsp::AudioBuffer;

pub const DEFAULT_TIMEOUT_MS: u64 = 10_000;
pub const DEFAULT_CONCURRENCY: usize = 4;

/// One predicted mean opinion score.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerceptionScore {
    pub mos: f64,
    pub model_id: String,
    pub latency_ms: u64,
}

#[derive(Debug, Error)]
pub enum MosError {
    #[error("request timed out")]
    Timeout,
    #[error("transport: {0}")]
    Transport(String),
    #[error("protocol: {0}")]
    Protocol(String),
    #[error("audio buffer is empty")]
    EmptyAudio,
}

#[derive(Serialize)]
struct ScoreRequest {
    sample_rate: u32,
    pcm16_base64: String,
}

#[derive(Deserialize)]
struct ScoreResponse {
    mos: f64,
    model_id: String,
}

/// Encodes samples as little-endian 16-bit PCM, the one quantization this
/// client applies: round(x * 32768), clamped to the i16 range. Values read
/// from 16-bit sources are reproduced exactly.
pub fn encode_pcm16(samples: &[f64]) -> Vec<u8> {
    let mut out = Vec::with_capacity(samples.len() * 2);
    for &s in samples {
        let v = (s.clamp(-1.0, 1.0) * 32768.0).round() as i32;
        out.extend_from_slice(&(v.clamp(-32768, 32767) as i16).to_le_bytes());
    }
    out
}

/// Decodes the wire PCM back to samples (scale 1/32768), for tests and
/// mock services.
pub fn decode_pcm16(bytes: &[u8]) -> Vec<f64> {
    bytes
        .chunks_exact(2)
        .map(|b| i16::from_le_bytes([b[0], b[1]]) as f64 / 32768.0)
        .collect()
}

/// Requests a score for one utterance.
pub fn request_mos(
    endpoint: &str,
    audio: &AudioBuffer,
    timeout_ms: u64,
) -> Result<PerceptionScore, MosError> {
    if audio.is_empty() {
        return Err(MosError::EmptyAudio);
    }
    let body = ScoreRequest {
        sample_rate: audio.sample_rate_hz,
        pcm16_base64: BASE64.encode(encode_pcm16(&audio.samples)),
    };
    let url = format!("{}/score", endpoint.trim_end_matches('/'));

    let started = Instant::now();
    let mut response = ureq::post(&url)
        .config()
        .timeout_global(Some(Duration::from_millis(timeout_ms)))
        .build()
        .send_json(&body)
        .map_err(classify_transport)?;
    let latency_ms = started.elapsed().as_millis() as u64;

    let parsed: ScoreResponse = response
        .body_mut()
        .read_json()
        .map_err(|e| MosError::Protocol(format!("invalid response body: {e}")))?;
    if !(1.0..=5.0).contains(&parsed.mos) || !parsed.mos.is_finite() {
        return Err(MosError::Protocol(format!(
            "mos {} outside [1, 5]",
            parsed.mos
        )));
    }
    Ok(PerceptionScore {
        mos: parsed.mos,
        model_id: parsed.model_id,
        latency_ms,
    })
}

fn classify_transport(err: ureq::Error) -> MosError {
    match err {
        ureq::Error::Timeout(_) => MosError::Timeout,
        ureq::Error::StatusCode(code) => MosError::Transport(format!("http status {code}")),
        ureq::Error::Json(e) => MosError::Protocol(format!("invalid response body: {e}")),
        ureq::Error::Io(e) if e.kind() == std::io::ErrorKind::TimedOut => MosError::Timeout,
        other => MosError::Transport(other.to_string()),
    }
}

/// Scores a batch with at most `concurrency_limit` requests in flight.
///
/// Per-utterance failures are recorded in the result map and never abort
/// the batch; the map always has one entry per input utterance.
pub fn batch_mos(
    endpoint: &str,
    utterances: &[(String, AudioBuffer)],
    concurrency_limit: usize,
    timeout_ms: u64,
) -> BTreeMap<String, Result<PerceptionScore, MosError>> {
    let limit = concurrency_limit.max(1);
    let results: Mutex<BTreeMap<String, Result<PerceptionScore, MosError>>> =
        Mutex::new(BTreeMap::new());
    let next: Mutex<usize> = Mutex::new(0);

    std::thread::scope(|scope| {
        for _ in 0..limit.min(utterances.len().max(1)) {
            scope.spawn(|| loop {
                let index = {
                    let mut guard = next.lock().unwrap();
                    let i = *guard;
                    *guard += 1;
                    i
                };
                if index >= utterances.len() {
                    break;
                }
                let (utt_id, audio) = &utterances[index];
                let outcome = request_mos(endpoint, audio, timeout_ms);
                results.lock().unwrap().insert(utt_id.clone(), outcome);
            });
        }
    });

    results.into_inner().unwrap()
}
