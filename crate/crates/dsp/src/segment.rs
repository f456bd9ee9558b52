//! Score-aligned segmentation: cut long recordings at rests, keep segments
//! within a length band, and partition the audio exactly.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use muskit_score::{score_duration, Score};

use crate::buffer::AudioBuffer;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SegmentPolicy {
    /// Rests at least this long are cut points.
    pub min_rest_split_sec: f64,
    /// Segments longer than this are split at their longest interior rest.
    pub max_segment_sec: f64,
    /// Shorter segments are merged with their successor.
    pub min_segment_sec: f64,
}

impl Default for SegmentPolicy {
    fn default() -> Self {
        SegmentPolicy {
            min_rest_split_sec: 0.3,
            max_segment_sec: 30.0,
            min_segment_sec: 0.5,
        }
    }
}

impl SegmentPolicy {
    pub fn validate(&self) -> Result<(), SegmentError> {
        if !(self.min_segment_sec > 0.0 && self.min_segment_sec < self.max_segment_sec) {
            return Err(SegmentError::InvalidPolicy(format!(
                "need 0 < min_segment ({}) < max_segment ({})",
                self.min_segment_sec, self.max_segment_sec
            )));
        }
        if self.min_rest_split_sec <= 0.0 {
            return Err(SegmentError::InvalidPolicy(
                "min_rest_split_sec must be positive".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum SegmentError {
    #[error("invalid segment policy: {0}")]
    InvalidPolicy(String),
    #[error("precondition: score spans {score_sec} s but audio lasts {audio_sec} s (must agree within 0.1 s; run lint first)")]
    DurationMismatch { score_sec: f64, audio_sec: f64 },
    #[error("segment [{start_sec}, {end_sec}] exceeds the maximum length and has no interior rest to split at")]
    Unsplittable { start_sec: f64, end_sec: f64 },
}

/// One segment: a re-based score slice and the matching audio span.
pub type Segment = (Score, AudioBuffer);

/// Splits a recording into segments.
///
/// Cuts at the midpoints of rests at least `min_rest_split_sec` long, merges
/// segments shorter than `min_segment_sec` into their successor, then splits
/// anything longer than `max_segment_sec` at its longest interior rest.
/// Scores are re-based to onset 0. The audio spans partition the input: the
/// sample counts sum to the original length with no overlap.
pub fn segment(
    score: &Score,
    buffer: &AudioBuffer,
    policy: &SegmentPolicy,
) -> Result<Vec<Segment>, SegmentError> {
    policy.validate()?;
    let total = score_duration(score);
    let audio_sec = buffer.duration_sec();
    if (total - audio_sec).abs() > 0.1 {
        return Err(SegmentError::DurationMismatch {
            score_sec: total,
            audio_sec,
        });
    }
    if score.events.is_empty() || buffer.is_empty() {
        return Ok(vec![(score.clone(), buffer.clone())]);
    }

    // cut at qualifying rest midpoints
    let mut bounds: Vec<f64> = vec![0.0];
    for ev in &score.events {
        if ev.is_rest() && ev.duration_sec >= policy.min_rest_split_sec {
            let mid = ev.onset_sec + 0.5 * ev.duration_sec;
            if mid > 0.0 && mid < total {
                bounds.push(mid);
            }
        }
    }
    bounds.push(total);

    // greedy merge of short segments into their successor
    let mut merged: Vec<f64> = vec![bounds[0]];
    for (i, &b) in bounds[1..].iter().enumerate() {
        let start = *merged.last().unwrap();
        let is_last = i + 2 == bounds.len();
        if b - start >= policy.min_segment_sec || is_last {
            merged.push(b);
        }
    }
    // a short final segment folds backwards into its predecessor
    if merged.len() > 2 {
        let n = merged.len();
        if merged[n - 1] - merged[n - 2] < policy.min_segment_sec {
            merged.remove(n - 2);
        }
    }

    // split anything over the maximum at its longest interior rest
    let mut bounds = merged;
    loop {
        let mut inserted = false;
        for i in 0..bounds.len() - 1 {
            let (lo, hi) = (bounds[i], bounds[i + 1]);
            if hi - lo <= policy.max_segment_sec {
                continue;
            }
            let cut = score
                .events
                .iter()
                .filter(|e| {
                    let mid = e.onset_sec + 0.5 * e.duration_sec;
                    e.is_rest() && mid > lo + 1e-9 && mid < hi - 1e-9
                })
                .max_by(|a, b| {
                    a.duration_sec
                        .total_cmp(&b.duration_sec)
                        .then(b.onset_sec.total_cmp(&a.onset_sec))
                })
                .map(|e| e.onset_sec + 0.5 * e.duration_sec);
            match cut {
                Some(c) => {
                    bounds.insert(i + 1, c);
                    inserted = true;
                    break;
                }
                None => {
                    return Err(SegmentError::Unsplittable {
                        start_sec: lo,
                        end_sec: hi,
                    })
                }
            }
        }
        if !inserted {
            break;
        }
    }

    // materialize: clip events (only rests straddle boundaries), re-base,
    // and slice audio on an exact sample partition
    let sr = buffer.sample_rate_hz as f64;
    let n = buffer.len();
    let mut sample_bounds: Vec<usize> = bounds
        .iter()
        .map(|&b| ((b * sr).round() as usize).min(n))
        .collect();
    sample_bounds[0] = 0;
    *sample_bounds.last_mut().unwrap() = n;
    for i in 1..sample_bounds.len() {
        sample_bounds[i] = sample_bounds[i].max(sample_bounds[i - 1]);
    }

    let mut out = Vec::with_capacity(bounds.len() - 1);
    for i in 0..bounds.len() - 1 {
        let (lo, hi) = (bounds[i], bounds[i + 1]);
        let mut events = Vec::new();
        for ev in &score.events {
            if ev.end_sec() <= lo + 1e-12 || ev.onset_sec >= hi - 1e-12 {
                continue;
            }
            let mut ev = ev.clone();
            let start = ev.onset_sec.max(lo);
            let end = ev.end_sec().min(hi);
            if end - start <= 0.0 {
                continue;
            }
            ev.onset_sec = start - lo;
            ev.duration_sec = end - start;
            events.push(ev);
        }
        let seg_score = Score {
            events,
            ..score.clone()
        };
        let audio = AudioBuffer::new(
            buffer.samples[sample_bounds[i]..sample_bounds[i + 1]].to_vec(),
            buffer.sample_rate_hz,
        );
        out.push((seg_score, audio));
    }
    Ok(out)
}
