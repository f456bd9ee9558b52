//! Metadata auto-correction: applies C1 (melisma merge), C2 (rest insertion
//! for uncovered silence) and C3 (proportional rescale) to the defects found
//! by [`detect_issues`].

use serde::Serialize;
use thiserror::Error;

use crate::model::{score_duration, NoteEvent, PhonemeAlignment, Score, TIME_SNAP_SEC};

use super::{detect_issues, is_silence_label, Issue, IssueKind, IssueLocation, LintPolicy, Severity};

#[derive(Debug, Error)]
pub enum CorrectError {
    #[error("uncorrectable: {0}")]
    Uncorrectable(String),
}

/// One applied repair (or an issue left unresolved), with event snapshots.
#[derive(Debug, Clone, Serialize)]
pub struct CorrectionEntry {
    pub issue: Issue,
    pub action: String,
    pub before: Option<NoteEvent>,
    pub after: Option<NoteEvent>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct CorrectionLog {
    pub entries: Vec<CorrectionEntry>,
}

impl CorrectionLog {
    pub fn unresolved(&self) -> impl Iterator<Item = &CorrectionEntry> {
        self.entries.iter().filter(|e| e.action == "unresolved")
    }
}

/// Repairs a score in place of its annotator.
///
/// Overlaps within the snap threshold are closed by truncating the earlier
/// event; anything worse is [`CorrectError::Uncorrectable`]. The remaining
/// error-severity issues that no rule can fix are recorded in the log as
/// `unresolved`. The operation is idempotent and never changes the set of
/// distinct lyric syllables.
pub fn auto_correct(
    score: &Score,
    alignment: Option<&PhonemeAlignment>,
    audio_duration_sec: Option<f64>,
    policy: &LintPolicy,
) -> Result<(Score, CorrectionLog), CorrectError> {
    let mut log = CorrectionLog::default();
    let mut fixed = score.clone();
    fixed
        .events
        .sort_by(|a, b| a.onset_sec.total_cmp(&b.onset_sec));

    let issues = detect_issues(&fixed, alignment, audio_duration_sec, policy);
    if issues.is_empty() {
        return Ok((fixed, log));
    }

    // overlaps and non-positive durations first: snap or give up
    for issue in issues.iter().filter(|i| i.kind == IssueKind::OverlapOrNegative) {
        let IssueLocation::Event { index, .. } = issue.location else {
            continue;
        };
        let ev = &fixed.events[index];
        if !ev.duration_sec.is_finite() || ev.duration_sec <= 0.0 {
            return Err(CorrectError::Uncorrectable(format!(
                "event {index} has non-positive duration {}",
                ev.duration_sec
            )));
        }
        let overlap = fixed.events[index - 1].end_sec() - ev.onset_sec;
        if overlap > TIME_SNAP_SEC {
            return Err(CorrectError::Uncorrectable(format!(
                "events {} and {index} overlap by {overlap:.6} s, beyond, the {TIME_SNAP_SEC} s snap range",
                index - 1
            )));
        }
        let before = fixed.events[index - 1].clone();
        let prev = &mut fixed.events[index - 1];
        let new_dur = before.duration_sec - overlap;
        if new_dur <= 0.0 {
            return Err(CorrectError::Uncorrectable(format!(
                "snapping event {} away from its successor leaves no duration",
                index - 1
            )));
        }
        prev.duration_sec = new_dur;
        log.entries.push(CorrectionEntry {
            issue: issue.clone(),
            action: "snap-overlap".into(),
            before: Some(before),
            after: Some(fixed.events[index - 1].clone()),
        });
    }

    // C1: mark pitch-compatible extra notes as melisma continuations.
    // Empty-lyric events first; repeated syllables are only merged if a
    // counting excess remains afterwards, so legitimate repeats survive.
    if policy.melisma_merge {
        for issue in issues.iter().filter(|i| i.kind == IssueKind::MissingLyric) {
            let IssueLocation::Event { index, .. } = issue.location else {
                continue;
            };
            if fixed.events[index].requires_syllable()
                && fixed.events[index].lyric.is_empty()
                && melisma_compatible(&fixed.events, index)
            {
                let before = fixed.events[index].clone();
                fixed.events[index].is_slur_continuation = true;
                log.entries.push(CorrectionEntry {
                    issue: issue.clone(),
                    action: "melisma-merge".into(),
                    before: Some(before),
                    after: Some(fixed.events[index].clone()),
                });
            }
        }

        for issue in detect_issues(&fixed, alignment, audio_duration_sec, policy)
            .into_iter()
            .filter(|i| i.kind == IssueKind::RedundantNote)
        {
            let IssueLocation::Event { index, .. } = issue.location else {
                continue;
            };
            let ev = &fixed.events[index];
            let repeats_previous = !ev.lyric.is_empty()
                && index > 0
                && fixed.events[index - 1].lyric == ev.lyric;
            if ev.requires_syllable() && repeats_previous && melisma_compatible(&fixed.events, index)
            {
                let before = fixed.events[index].clone();
                fixed.events[index].lyric.clear();
                fixed.events[index].is_slur_continuation = true;
                log.entries.push(CorrectionEntry {
                    issue,
                    action: "melisma-merge".into(),
                    before: Some(before),
                    after: Some(fixed.events[index].clone()),
                });
            }
        }
    }

    // C2: cover uncovered silence with explicit rests
    if let Some(alignment) = alignment {
        for issue in issues.iter().filter(|i| i.kind == IssueKind::UncoveredPhoneme) {
            let IssueLocation::Span { start_sec, end_sec } = issue.location else {
                continue;
            };
            let Some(interval) = alignment.intervals.iter().find(|iv| {
                (iv.start_sec - start_sec).abs() < 1e-9 && (iv.end_sec - end_sec).abs() < 1e-9
            }) else {
                continue;
            };
            if !is_silence_label(&interval.label) || interval.label.trim().is_empty() {
                continue;
            }
            let mid = interval.midpoint_sec();
            if fixed
                .events
                .iter()
                .any(|e| e.onset_sec - 1e-9 <= mid && mid < e.end_sec() + 1e-9)
            {
                continue; // an earlier insertion already covers it
            }
            // fill the whole gap that contains the midpoint
            let mut gap_start = 0.0f64;
            let mut gap_end = f64::INFINITY;
            for e in &fixed.events {
                if e.end_sec() <= mid {
                    gap_start = gap_start.max(e.end_sec());
                } else if e.onset_sec > mid {
                    gap_end = gap_end.min(e.onset_sec);
                }
            }
            if !gap_end.is_finite() {
                gap_end = interval.end_sec.max(gap_start + 1e-3);
            }
            let rest = NoteEvent::rest(gap_start, gap_end - gap_start);
            log.entries.push(CorrectionEntry {
                issue: issue.clone(),
                action: "insert-rest".into(),
                before: None,
                after: Some(rest.clone()),
            });
            fixed.events.push(rest);
            fixed
                .events
                .sort_by(|a, b| a.onset_sec.total_cmp(&b.onset_sec));
        }
    }

    // C3: uniform proportional rescale onto the audio clock
    if policy.rescale_on_mismatch {
        if let Some(audio) = audio_duration_sec {
            let span = score_duration(&fixed);
            if span > 0.0 && (span - audio).abs() > policy.duration_tolerance_sec {
                let ratio = audio / span;
                for ev in &mut fixed.events {
                    ev.onset_sec *= ratio;
                    ev.duration_sec *= ratio;
                }
                log.entries.push(CorrectionEntry {
                    issue: Issue {
                        kind: IssueKind::DurationMismatch,
                        location: IssueLocation::Span {
                            start_sec: 0.0,
                            end_sec: span,
                        },
                        severity: Severity::Error,
                        detail: format!("score spans {span:.6} s but audio lasts {audio:.6} s"),
                    },
                    action: format!("rescale x{ratio:.9}"),
                    before: None,
                    after: None,
                });
            }
        }
    }

    // whatever remains at error severity is recorded, not hidden
    for issue in detect_issues(&fixed, alignment, audio_duration_sec, policy) {
        if issue.severity == Severity::Error {
            log.entries.push(CorrectionEntry {
                issue,
                action: "unresolved".into(),
                before: None,
                after: None,
            });
        }
    }

    Ok((fixed, log))
}

/// An event can join the previous one as a melisma continuation when the
/// previous is pitched at the same MIDI note and the two are contiguous.
fn melisma_compatible(events: &[NoteEvent], index: usize) -> bool {
    if index == 0 {
        return false;
    }
    let prev = &events[index - 1];
    let ev = &events[index];
    !prev.is_rest()
        && prev.midi_pitch == ev.midi_pitch
        && (ev.onset_sec - prev.end_sec()).abs() <= TIME_SNAP_SEC
}
