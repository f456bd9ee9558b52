//! Canonical score data model shared by every other component.
//!
//! A score is an ordered list of timed note events, each carrying a lyric
//! syllable, a MIDI pitch (or a rest), an onset and a duration in seconds.
//! Rests are explicit events rather than gaps so that segment boundaries and
//! correction rules all operate on one list.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Events closer than this are snapped together; wider gaps become rests.
pub const TIME_SNAP_SEC: f64 = 1e-3;

/// Tolerance used when checking the non-overlap invariant.
pub const OVERLAP_TOLERANCE_SEC: f64 = 1e-6;

/// One timed note event: a lyric syllable, a pitch and a time span.
///
/// `midi_pitch == None` encodes a rest. A slur continuation is a pitched
/// event that extends the previous syllable (melisma) and carries no lyric
/// of its own.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoteEvent {
    pub lyric: String,
    pub midi_pitch: Option<u8>,
    pub onset_sec: f64,
    pub duration_sec: f64,
    pub is_slur_continuation: bool,
}

impl NoteEvent {
    pub fn note(lyric: impl Into<String>, midi_pitch: u8, onset_sec: f64, duration_sec: f64) -> Self {
        NoteEvent {
            lyric: lyric.into(),
            midi_pitch: Some(midi_pitch),
            onset_sec,
            duration_sec,
            is_slur_continuation: false,
        }
    }

    pub fn rest(onset_sec: f64, duration_sec: f64) -> Self {
        NoteEvent {
            lyric: String::new(),
            midi_pitch: None,
            onset_sec,
            duration_sec,
            is_slur_continuation: false,
        }
    }

    /// Pitched event continuing the previous syllable.
    pub fn slur_continuation(midi_pitch: u8, onset_sec: f64, duration_sec: f64) -> Self {
        NoteEvent {
            lyric: String::new(),
            midi_pitch: Some(midi_pitch),
            onset_sec,
            duration_sec,
            is_slur_continuation: true,
        }
    }

    pub fn is_rest(&self) -> bool {
        self.midi_pitch.is_none()
    }

    pub fn end_sec(&self) -> f64 {
        self.onset_sec + self.duration_sec
    }

    /// True for events that must carry their own syllable: pitched and not a
    /// slur continuation.
    pub fn requires_syllable(&self) -> bool {
        !self.is_rest() && !self.is_slur_continuation
    }

    fn check(&self, index: usize) -> Result<(), ScoreError> {
        if !self.onset_sec.is_finite() || self.onset_sec < 0.0 {
            return Err(ScoreError::InvalidEvent {
                index,
                reason: format!("onset {} must be finite and non-negative", self.onset_sec),
            });
        }
        if !self.duration_sec.is_finite() || self.duration_sec <= 0.0 {
            return Err(ScoreError::InvalidEvent {
                index,
                reason: format!("duration {} must be positive", self.duration_sec),
            });
        }
        if self.is_rest() && (!self.lyric.is_empty() || self.is_slur_continuation) {
            return Err(ScoreError::InvalidEvent {
                index,
                reason: "rest must have empty lyric and no slur flag".into(),
            });
        }
        if self.is_slur_continuation && !self.lyric.is_empty() {
            return Err(ScoreError::InvalidEvent {
                index,
                reason: "slur continuation must have empty lyric".into(),
            });
        }
        if let Some(p) = self.midi_pitch {
            if p > 127 {
                return Err(ScoreError::InvalidEvent {
                    index,
                    reason: format!("midi pitch {p} exceeds 127"),
                });
            }
        }
        Ok(())
    }
}

/// Corpus language tag, used to pick lyric syllabification rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Language {
    Zh,
    Jp,
    En,
    Kr,
    #[default]
    Other,
}

/// Which parser produced a score.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum SourceFormat {
    MusicXml,
    Midi,
    TextGrid,
    #[default]
    Canonical,
}

/// Ordered, non-overlapping sequence of note events with score metadata.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Score {
    pub events: Vec<NoteEvent>,
    pub tempo_bpm: f64,
    pub language: Language,
    pub source_format: SourceFormat,
}

impl Score {
    pub fn new(events: Vec<NoteEvent>, tempo_bpm: f64) -> Self {
        Score {
            events,
            tempo_bpm,
            language: Language::Other,
            source_format: SourceFormat::Canonical,
        }
    }

    pub fn is_empty(&self) -> bool {
        self.events.is_empty()
    }

    /// Checks per-event validity plus ordering and the non-overlap invariant.
    pub fn validate(&self) -> Result<(), ScoreError> {
        if !self.tempo_bpm.is_finite() || self.tempo_bpm <= 0.0 {
            return Err(ScoreError::InvalidTempo(self.tempo_bpm));
        }
        for (i, ev) in self.events.iter().enumerate() {
            ev.check(i)?;
        }
        for i in 1..self.events.len() {
            let prev = &self.events[i - 1];
            let cur = &self.events[i];
            if cur.onset_sec < prev.onset_sec {
                return Err(ScoreError::Unsorted { index: i });
            }
            let overlap = prev.end_sec() - cur.onset_sec;
            if overlap > OVERLAP_TOLERANCE_SEC {
                return Err(ScoreError::Overlap {
                    first: i - 1,
                    second: i,
                    overlap_sec: overlap,
                });
            }
        }
        Ok(())
    }

    /// Concatenation of all non-empty lyrics, in order.
    pub fn joined_lyrics(&self, separator: &str) -> String {
        self.events
            .iter()
            .filter(|e| !e.lyric.is_empty())
            .map(|e| e.lyric.as_str())
            .collect::<Vec<_>>()
            .join(separator)
    }
}

/// Total span of a score: last onset plus last duration, 0 when empty.
pub fn score_duration(score: &Score) -> f64 {
    score.events.last().map_or(0.0, NoteEvent::end_sec)
}

/// Equal-temperament pitch mapping, A4 (MIDI 69) = 440 Hz.
pub fn midi_to_hz(midi_pitch: u8) -> Result<f64, ScoreError> {
    if midi_pitch > 127 {
        return Err(ScoreError::PitchOutOfRange(midi_pitch));
    }
    Ok(440.0 * 2f64.powf((midi_pitch as f64 - 69.0) / 12.0))
}

/// Phoneme-level timing from a forced alignment: ordered labeled intervals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PhonemeAlignment {
    pub intervals: Vec<Interval>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Interval {
    pub start_sec: f64,
    pub end_sec: f64,
    pub label: String,
}

impl Interval {
    pub fn new(start_sec: f64, end_sec: f64, label: impl Into<String>) -> Self {
        Interval {
            start_sec,
            end_sec,
            label: label.into(),
        }
    }

    pub fn midpoint_sec(&self) -> f64 {
        0.5 * (self.start_sec + self.end_sec)
    }
}

impl PhonemeAlignment {
    pub fn validate(&self) -> Result<(), ScoreError> {
        for (i, iv) in self.intervals.iter().enumerate() {
            if !(iv.start_sec.is_finite() && iv.end_sec.is_finite()) || iv.start_sec >= iv.end_sec {
                return Err(ScoreError::InvalidInterval { index: i });
            }
            if i > 0 && self.intervals[i - 1].end_sec > iv.start_sec + OVERLAP_TOLERANCE_SEC {
                return Err(ScoreError::OverlappingIntervals { index: i });
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum ScoreError {
    #[error("event {index} invalid: {reason}")]
    InvalidEvent { index: usize, reason: String },
    #[error("tempo {0} must be positive")]
    InvalidTempo(f64),
    #[error("events not sorted by onset at index {index}")]
    Unsorted { index: usize },
    #[error("events {first} and {second} overlap by {overlap_sec} s")]
    Overlap {
        first: usize,
        second: usize,
        overlap_sec: f64,
    },
    #[error("midi pitch {0} outside 0-127")]
    PitchOutOfRange(u8),
    #[error("alignment interval {index} invalid (start must be < end)")]
    InvalidInterval { index: usize },
    #[error("alignment intervals overlap at index {index}")]
    OverlappingIntervals { index: usize },
}
