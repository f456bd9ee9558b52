//! Canonical score JSON: the interchange format every other component reads.
//!
//! ```json
//! {
//!   "tempo_bpm": 120.0,
//!   "language": "zh",
//!   "events": [
//!     {"lyric": "la", "midi": 60, "onset": 0.0, "duration": 0.5, "slur": false}
//!   ]
//! }
//! ```
//!
//! `"midi": null` encodes a rest. Parsing validates field-level invariants
//! (positive durations, pitch range, rest/slur consistency) but deliberately
//! accepts unordered or overlapping event lists so the linter can inspect
//! defective files.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Language, NoteEvent, Score, SourceFormat};

#[derive(Debug, Error)]
pub enum CanonicalError {
    #[error("json syntax: {0}")]
    JsonSyntax(String),
    #[error("schema: {0}")]
    Schema(String),
}

#[derive(Serialize, Deserialize)]
struct ScoreDoc {
    tempo_bpm: f64,
    language: Language,
    events: Vec<EventDoc>,
}

#[derive(Serialize, Deserialize)]
struct EventDoc {
    lyric: String,
    midi: Option<u16>,
    onset: f64,
    duration: f64,
    slur: bool,
}

/// Renders a score as canonical JSON (pretty-printed, newline-terminated).
///
/// `source_format` is provenance metadata, not musical content, and is not
/// part of the format; parsed documents always report
/// [`SourceFormat::Canonical`].
pub fn serialize_score(score: &Score) -> String {
    let doc = ScoreDoc {
        tempo_bpm: score.tempo_bpm,
        language: score.language,
        events: score
            .events
            .iter()
            .map(|e| EventDoc {
                lyric: e.lyric.clone(),
                midi: e.midi_pitch.map(u16::from),
                onset: e.onset_sec,
                duration: e.duration_sec,
                slur: e.is_slur_continuation,
            })
            .collect(),
    };
    let mut text = serde_json::to_string_pretty(&doc).expect("score serialization cannot fail");
    text.push('\n');
    text
}

/// Parses canonical score JSON. Exact inverse of [`serialize_score`].
pub fn parse_canonical(document: &str) -> Result<Score, CanonicalError> {
    let doc: ScoreDoc = match serde_json::from_str(document) {
        Ok(doc) => doc,
        Err(e) if e.is_syntax() || e.is_eof() => {
            return Err(CanonicalError::JsonSyntax(e.to_string()))
        }
        Err(e) => return Err(CanonicalError::Schema(e.to_string())),
    };

    if !doc.tempo_bpm.is_finite() || doc.tempo_bpm <= 0.0 {
        return Err(CanonicalError::Schema(format!(
            "tempo_bpm {} must be positive",
            doc.tempo_bpm
        )));
    }

    let mut events = Vec::with_capacity(doc.events.len());
    for (i, e) in doc.events.into_iter().enumerate() {
        if !e.duration.is_finite() || e.duration <= 0.0 {
            return Err(CanonicalError::Schema(format!(
                "event {i}: duration {} must be positive",
                e.duration
            )));
        }
        if !e.onset.is_finite() || e.onset < 0.0 {
            return Err(CanonicalError::Schema(format!(
                "event {i}: onset {} must be non-negative",
                e.onset
            )));
        }
        let midi = match e.midi {
            Some(p) if p > 127 => {
                return Err(CanonicalError::Schema(format!(
                    "event {i}: midi {p} outside 0-127"
                )))
            }
            Some(p) => Some(p as u8),
            None => None,
        };
        if midi.is_none() && (!e.lyric.is_empty() || e.slur) {
            return Err(CanonicalError::Schema(format!(
                "event {i}: rest must have empty lyric and slur=false"
            )));
        }
        if e.slur && !e.lyric.is_empty() {
            return Err(CanonicalError::Schema(format!(
                "event {i}: slur continuation must have empty lyric"
            )));
        }
        events.push(NoteEvent {
            lyric: e.lyric,
            midi_pitch: midi,
            onset_sec: e.onset,
            duration_sec: e.duration,
            is_slur_continuation: e.slur,
        });
    }

    Ok(Score {
        events,
        tempo_bpm: doc.tempo_bpm,
        language: doc.language,
        source_format: SourceFormat::Canonical,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_round_trip() {
        let s = Score::new(vec![], 96.0);
        let parsed = parse_canonical(&serialize_score(&s)).unwrap();
        assert!(parsed.events.is_empty());
        assert_eq!(parsed.tempo_bpm, 96.0);
    }

    #[test]
    fn one_note_round_trips_exactly() {
        let mut s = Score::new(vec![NoteEvent::note("la", 60, 0.125, 0.7391960932093702)], 120.0);
        s.language = Language::Zh;
        let parsed = parse_canonical(&serialize_score(&s)).unwrap();
        assert_eq!(parsed.events, s.events);
        assert_eq!(parsed.language, Language::Zh);
        assert_eq!(parsed.tempo_bpm, s.tempo_bpm);
    }

    #[test]
    fn negative_duration_is_schema_error() {
        let doc = r#"{"tempo_bpm":120.0,"language":"en","events":[
            {"lyric":"a","midi":60,"onset":0.0,"duration":-0.5,"slur":false}]}"#;
        assert!(matches!(
            parse_canonical(doc),
            Err(CanonicalError::Schema(_))
        ));
    }

    #[test]
    fn bad_json_is_syntax_error() {
        assert!(matches!(
            parse_canonical("{not json"),
            Err(CanonicalError::JsonSyntax(_))
        ));
    }

    #[test]
    fn missing_field_is_schema_error() {
        let doc = r#"{"tempo_bpm":120.0,"events":[]}"#;
        assert!(matches!(
            parse_canonical(doc),
            Err(CanonicalError::Schema(_))
        ));
    }

    #[test]
    fn overlapping_events_are_accepted_for_linting() {
        let doc = r#"{"tempo_bpm":120.0,"language":"en","events":[
            {"lyric":"a","midi":60,"onset":0.0,"duration":1.0,"slur":false},
            {"lyric":"b","midi":62,"onset":0.5,"duration":1.0,"slur":false}]}"#;
        let s = parse_canonical(doc).unwrap();
        assert_eq!(s.events.len(), 2);
        assert!(s.validate().is_err());
    }
}
