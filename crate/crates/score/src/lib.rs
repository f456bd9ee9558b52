//! Canonical music score model, format parsers and annotation linting for
//! singing voice corpora.
//!
//! The pipeline ingests MusicXML, Standard MIDI Files and Praat TextGrids,
//! reduces them to one canonical event list (lyric, pitch, onset, duration),
//! then detects and repairs the annotation defects that plague real corpora:
//! redundant or lyricless notes, score/audio duration drift, and phonemes
//! not covered by any note.

pub mod canonical;
pub mod lint;
pub mod midi;
pub mod model;
pub mod musicxml;
pub mod textgrid;


pub use canonical::{parse_canonical, serialize_score, CanonicalError};
pub use lint::{
    auto_correct, detect_issues, syllabify, CorrectError, CorrectionEntry, CorrectionLog, Issue,
    IssueKind, IssueLocation, LintPolicy, Severity, Syllabifier,
};
pub use midi::{parse_midi, parse_midi_verbose, MidiError, MidiWarning, TempoMap};
pub use model::{
    midi_to_hz, score_duration, Interval, Language, NoteEvent, PhonemeAlignment, Score,
    ScoreError, SourceFormat,
};
pub use musicxml::{parse_musicxml, MusicXmlError};
pub use normalize::{normalize_score, NormalizeError};
pub use textgrid::{parse_textgrid, TextGridError};

pub mod normalize;
