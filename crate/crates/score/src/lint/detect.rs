//! Annotation defect detection. Reports, never throws on content.

use crate::model::{score_duration, PhonemeAlignment, Score, OVERLAP_TOLERANCE_SEC};

use super::{Issue, IssueKind, IssueLocation, LintPolicy, Severity, Syllabifier};

const PITCH_LO: u8 = 36;
const PITCH_HI: u8 = 84;

/// Runs all checks and returns issues ordered by location.
///
/// `alignment` and `audio_duration_sec` are optional; their checks are
/// skipped when absent. The score may violate its invariants: overlap and
/// non-positive durations are themselves reported as issues.
pub fn detect_issues(
    score: &Score,
    alignment: Option<&PhonemeAlignment>,
    audio_duration_sec: Option<f64>,
    policy: &LintPolicy,
) -> Vec<Issue> {
    let mut issues = Vec::new();

    // overlap / negative duration, on the raw list
    for (i, ev) in score.events.iter().enumerate() {
        if !ev.duration_sec.is_finite() || ev.duration_sec <= 0.0 {
            issues.push(Issue {
                kind: IssueKind::OverlapOrNegative,
                location: IssueLocation::Event {
                    index: i,
                    onset_sec: ev.onset_sec,
                },
                severity: Severity::Error,
                detail: format!("event {i} has non-positive duration {}", ev.duration_sec),
            });
        }
        if i > 0 {
            let prev = &score.events[i - 1];
            let overlap = prev.end_sec() - ev.onset_sec;
            if overlap > OVERLAP_TOLERANCE_SEC || ev.onset_sec < prev.onset_sec {
                issues.push(Issue {
                    kind: IssueKind::OverlapOrNegative,
                    location: IssueLocation::Event {
                        index: i,
                        onset_sec: ev.onset_sec,
                    },
                    severity: Severity::Error,
                    detail: format!(
                        "event {i} overlaps previous event by {:.6} s",
                        overlap.max(0.0)
                    ),
                });
            }
        }
    }

    let syllabifier = policy.syllabifier_for(score.language);

    // D1: more syllable-carrying events than syllables in the joined lyrics
    if syllabifier != Syllabifier::None {
        let carriers = score.events.iter().filter(|e| e.requires_syllable()).count();
        let joined = score.joined_lyrics(syllabifier.joiner());
        let syllables = syllabifier.split(&joined).len();
        if carriers > syllables {
            let mut excess = carriers - syllables;
            // point at the most likely culprits: carriers with an empty
            // lyric, or repeating the previous carrier's syllable at the
            // same pitch
            let mut prev_carrier: Option<usize> = None;
            for (i, ev) in score.events.iter().enumerate() {
                if excess == 0 {
                    break;
                }
                if !ev.requires_syllable() {
                    continue;
                }
                let redundant = ev.lyric.is_empty()
                    || prev_carrier.is_some_and(|p| {
                        let prev = &score.events[p];
                        prev.lyric == ev.lyric && prev.midi_pitch == ev.midi_pitch
                    });
                if redundant {
                    issues.push(Issue {
                        kind: IssueKind::RedundantNote,
                        location: IssueLocation::Event {
                            index: i,
                            onset_sec: ev.onset_sec,
                        },
                        severity: Severity::Error,
                        detail: format!(
                            "{carriers} syllable-carrying events but only {syllables} syllables in the lyrics"
                        ),
                    });
                    excess -= 1;
                }
                prev_carrier = Some(i);
            }
            for _ in 0..excess {
                issues.push(Issue {
                    kind: IssueKind::RedundantNote,
                    location: IssueLocation::Span {
                        start_sec: 0.0,
                        end_sec: score_duration(score),
                    },
                    severity: Severity::Error,
                    detail: format!(
                        "{carriers} syllable-carrying events but only {syllables} syllables in the lyrics"
                    ),
                });
            }
        }
    }

    // D2: pitched, non-slur events must carry a lyric
    for (i, ev) in score.events.iter().enumerate() {
        if ev.requires_syllable() && ev.lyric.is_empty() {
            issues.push(Issue {
                kind: IssueKind::MissingLyric,
                location: IssueLocation::Event {
                    index: i,
                    onset_sec: ev.onset_sec,
                },
                severity: Severity::Error,
                detail: format!("pitched event {i} has no lyric and is not a slur continuation"),
            });
        }
    }

    // D3: score span vs audio duration
    if let Some(audio) = audio_duration_sec {
        let span = score_duration(score);
        let diff = (span - audio).abs();
        if diff > policy.duration_tolerance_sec {
            issues.push(Issue {
                kind: IssueKind::DurationMismatch,
                location: IssueLocation::Span {
                    start_sec: 0.0,
                    end_sec: span,
                },
                severity: Severity::Error,
                detail: format!(
                    "score spans {span:.6} s but audio lasts {audio:.6} s (|diff| {diff:.6} > {} tolerance)",
                    policy.duration_tolerance_sec
                ),
            });
        }
    }

    // D4: implausible pitch on a lyric-bearing note (warning, never fixed)
    for (i, ev) in score.events.iter().enumerate() {
        if let Some(p) = ev.midi_pitch {
            if !ev.lyric.is_empty() && !(PITCH_LO..=PITCH_HI).contains(&p) {
                issues.push(Issue {
                    kind: IssueKind::PitchAnomaly,
                    location: IssueLocation::Event {
                        index: i,
                        onset_sec: ev.onset_sec,
                    },
                    severity: Severity::Warning,
                    detail: format!(
                        "lyric-bearing note at MIDI {p}, outside the plausible vocal range {PITCH_LO}-{PITCH_HI}"
                    ),
                });
            }
        }
    }

    // D5: every labeled phoneme midpoint must fall inside some score event
    if let Some(alignment) = alignment {
        for iv in &alignment.intervals {
            if iv.label.trim().is_empty() {
                continue;
            }
            let mid = iv.midpoint_sec();
            let covered = score
                .events
                .iter()
                .any(|e| e.onset_sec - 1e-9 <= mid && mid < e.end_sec() + 1e-9);
            if !covered {
                issues.push(Issue {
                    kind: IssueKind::UncoveredPhoneme,
                    location: IssueLocation::Span {
                        start_sec: iv.start_sec,
                        end_sec: iv.end_sec,
                    },
                    severity: Severity::Error,
                    detail: format!(
                        "phoneme '{}' at [{:.6}, {:.6}] is covered by no score event",
                        iv.label, iv.start_sec, iv.end_sec
                    ),
                });
            }
        }
    }

    issues.sort_by(|a, b| {
        a.location
            .start_sec()
            .total_cmp(&b.location.start_sec())
            .then(a.kind.cmp(&b.kind))
    });
    issues
}
