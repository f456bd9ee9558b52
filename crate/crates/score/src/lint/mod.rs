//! Annotation linting: detect defects between a score, a phoneme alignment
//! and the audio duration, and repair them under an explicit policy.
//!
//! Detection checks, in order:
//!
//! - overlap / non-positive duration (checked first, on the raw list)
//! - D1 `RedundantNote`: more syllable-carrying events than syllables in the
//!   joined lyrics
//! - D2 `MissingLyric`: pitched, non-slur event with an empty lyric
//! - D3 `DurationMismatch`: score span vs. audio duration beyond tolerance
//! - D4 `PitchAnomaly`: lyric-bearing note outside MIDI 36-84 (warning)
//! - D5 `UncoveredPhoneme`: labeled alignment interval whose midpoint lies
//!   inside no score event
//!
//! Corrections, in order: C1 melisma merge, C2 rest insertion for uncovered
//! silence, C3 proportional rescale to the audio duration. Structural fixes
//! run before the global rescale so the rescale sees the final topology.

mod correct;
mod detect;
mod syllable;

pub use correct::{auto_correct, CorrectError, CorrectionEntry, CorrectionLog};
pub use detect::detect_issues;
pub use syllable::{syllabify, Syllabifier};

use serde::{Deserialize, Serialize};

use crate::model::Language;

/// Kinds of annotation defects the detector reports.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    OverlapOrNegative,
    RedundantNote,
    MissingLyric,
    DurationMismatch,
    PitchAnomaly,
    UncoveredPhoneme,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

/// Where in the score an issue lives: a concrete event or a time range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueLocation {
    Event { index: usize, onset_sec: f64 },
    Span { start_sec: f64, end_sec: f64 },
}

impl IssueLocation {
    pub fn start_sec(&self) -> f64 {
        match self {
            IssueLocation::Event { onset_sec, .. } => *onset_sec,
            IssueLocation::Span { start_sec, .. } => *start_sec,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub kind: IssueKind,
    pub location: IssueLocation,
    pub severity: Severity,
    pub detail: String,
}

/// Tunable thresholds and language adaptations for detection and repair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct LintPolicy {
    pub duration_tolerance_sec: f64,
    pub rescale_on_mismatch: bool,
    pub melisma_merge: bool,
    /// `None` selects the per-language default (zh/jp/kr per character,
    /// en and others by whitespace).
    pub language_syllabifier: Option<Syllabifier>,
}

impl Default for LintPolicy {
    fn default() -> Self {
        LintPolicy {
            duration_tolerance_sec: 0.1,
            rescale_on_mismatch: true,
            melisma_merge: true,
            language_syllabifier: None,
        }
    }
}

impl LintPolicy {
    pub fn syllabifier_for(&self, language: Language) -> Syllabifier {
        self.language_syllabifier
            .unwrap_or_else(|| Syllabifier::default_for(language))
    }
}

/// Labels conventionally marking silence in forced alignments.
pub(crate) fn is_silence_label(label: &str) -> bool {
    let l = label.trim();
    l.is_empty() || matches!(l.to_ascii_lowercase().as_str(), "sil" | "sp" | "pau" | "br")
}
