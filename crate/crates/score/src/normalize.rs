//! Score canonicalization: tie merging, onset snapping and gap filling.

use thiserror::Error;

use crate::model::{NoteEvent, Score, ScoreError, TIME_SNAP_SEC};

#[derive(Debug, Error)]
pub enum NormalizeError {
    #[error("pitched events overlap by {overlap_sec} s near t={at_sec} s")]
    Overlap { at_sec: f64, overlap_sec: f64 },
    #[error(transparent)]
    InvalidEvent(#[from] ScoreError),
}

/// Canonicalizes a score:
///
/// - slur continuations at the same pitch that are contiguous with the
///   previous event are merged into it (ties),
/// - rests separated from a neighbouring rest by any gap are merged,
/// - time gaps up to [`TIME_SNAP_SEC`] are snapped shut, larger gaps are
///   filled with explicit rest events (including a leading gap before the
///   first event),
/// - rests overlapping pitched events are trimmed.
///
/// Two pitched events overlapping by more than [`TIME_SNAP_SEC`] cannot be
/// represented monophonically and raise [`NormalizeError::Overlap`].
///
/// The result satisfies the score invariants, the operation is idempotent,
/// and the concatenation of non-empty lyrics is unchanged.
pub fn normalize_score(score: &Score) -> Result<Score, NormalizeError> {
    for (i, ev) in score.events.iter().enumerate() {
        if !ev.duration_sec.is_finite() || ev.duration_sec <= 0.0 {
            return Err(ScoreError::InvalidEvent {
                index: i,
                reason: format!("duration {} must be positive", ev.duration_sec),
            }
            .into());
        }
        if !ev.onset_sec.is_finite() || ev.onset_sec < 0.0 {
            return Err(ScoreError::InvalidEvent {
                index: i,
                reason: format!("onset {} must be finite and non-negative", ev.onset_sec),
            }
            .into());
        }
    }

    let mut sorted: Vec<NoteEvent> = score.events.to_vec();
    sorted.sort_by(|a, b| a.onset_sec.total_cmp(&b.onset_sec));

    let mut out: Vec<NoteEvent> = Vec::with_capacity(sorted.len());
    for mut ev in sorted {
        let Some(last) = out.last() else {
            push_first(&mut out, ev);
            continue;
        };
        let last_end = last.end_sec();
        let last_onset = last.onset_sec;
        let last_is_rest = last.is_rest();
        let last_midi = last.midi_pitch;
        let gap = ev.onset_sec - last_end;

        // rests merge with a preceding rest across any gap
        if ev.is_rest() && last_is_rest && gap >= -TIME_SNAP_SEC {
            let end = ev.end_sec().max(last_end);
            let last = out.last_mut().unwrap();
            last.duration_sec = end - last.onset_sec;
            continue;
        }

        // tie: contiguous slur continuation at the same pitch
        if ev.is_slur_continuation
            && !last_is_rest
            && ev.midi_pitch == last_midi
            && gap.abs() <= TIME_SNAP_SEC
        {
            let end = ev.end_sec().max(last_end);
            let last = out.last_mut().unwrap();
            last.duration_sec = end - last.onset_sec;
            continue;
        }

        if gap < -TIME_SNAP_SEC {
            // real overlap: rests yield to pitched events, pitched collisions
            // are unrepresentable
            if last_is_rest {
                let trimmed = ev.onset_sec - last_onset;
                if trimmed > 0.0 {
                    out.last_mut().unwrap().duration_sec = trimmed;
                } else {
                    out.pop();
                }
                push_after_gap_check(&mut out, ev);
                continue;
            }
            if ev.is_rest() {
                if ev.end_sec() > last_end {
                    ev.duration_sec = ev.end_sec() - last_end;
                    ev.onset_sec = last_end;
                    out.push(ev);
                }
                continue;
            }
            return Err(NormalizeError::Overlap {
                at_sec: ev.onset_sec,
                overlap_sec: -gap,
            });
        }

        if gap < 0.0 {
            // overlap within the snap threshold: keep the end, move the onset
            let new_dur = ev.end_sec() - last_end;
            if new_dur <= 0.0 {
                if ev.is_rest() {
                    continue;
                }
                return Err(NormalizeError::Overlap {
                    at_sec: ev.onset_sec,
                    overlap_sec: -gap,
                });
            }
            ev.onset_sec = last_end;
            ev.duration_sec = new_dur;
            out.push(ev);
            continue;
        }

        if gap == 0.0 {
            out.push(ev);
            continue;
        }

        if gap <= TIME_SNAP_SEC {
            // quantization noise: snap the onset, keep the end fixed
            ev.duration_sec = ev.end_sec() - last_end;
            ev.onset_sec = last_end;
            out.push(ev);
            continue;
        }

        // real silence: a neighbouring rest absorbs it, otherwise insert
        // one; the event is then re-anchored onto the filled end so that
        // contiguity is exact (not merely within rounding) and a second
        // normalization pass finds a zero gap
        if ev.is_rest() {
            ev.duration_sec = ev.end_sec() - last_end;
            ev.onset_sec = last_end;
            out.push(ev);
        } else {
            if last_is_rest {
                out.last_mut().unwrap().duration_sec = ev.onset_sec - last_onset;
            } else {
                out.push(NoteEvent::rest(last_end, gap));
            }
            let filled_end = out.last().unwrap().end_sec();
            ev.duration_sec = ev.end_sec() - filled_end;
            ev.onset_sec = filled_end;
            out.push(ev);
        }
    }

    Ok(Score {
        events: out,
        ..score.clone()
    })
}

fn push_first(out: &mut Vec<NoteEvent>, mut ev: NoteEvent) {
    if ev.is_rest() {
        // rests absorb the leading gap
        if ev.onset_sec > 0.0 {
            ev.duration_sec = ev.end_sec();
            ev.onset_sec = 0.0;
        }
        out.push(ev);
    } else if ev.onset_sec > TIME_SNAP_SEC {
        out.push(NoteEvent::rest(0.0, ev.onset_sec));
        out.push(ev);
    } else {
        if ev.onset_sec > 0.0 {
            ev.duration_sec = ev.end_sec();
            ev.onset_sec = 0.0;
        }
        out.push(ev);
    }
}

/// Pushes `ev` after a rest was trimmed or removed: re-checks the gap to the
/// new tail and keeps the rest-merging and exact-contiguity discipline.
fn push_after_gap_check(out: &mut Vec<NoteEvent>, mut ev: NoteEvent) {
    let Some(last) = out.last() else {
        push_first(out, ev);
        return;
    };
    let last_end = last.end_sec();
    let last_onset = last.onset_sec;
    let last_is_rest = last.is_rest();
    let gap = ev.onset_sec - last_end;
    if gap > TIME_SNAP_SEC {
        if ev.is_rest() {
            ev.duration_sec = ev.end_sec() - last_end;
            ev.onset_sec = last_end;
        } else {
            if last_is_rest {
                out.last_mut().unwrap().duration_sec = ev.onset_sec - last_onset;
            } else {
                out.push(NoteEvent::rest(last_end, gap));
            }
            let filled_end = out.last().unwrap().end_sec();
            ev.duration_sec = ev.end_sec() - filled_end;
            ev.onset_sec = filled_end;
        }
    } else if gap != 0.0 {
        // trimming leaves at most rounding-sized gaps or overlaps here
        let new_dur = ev.end_sec() - last_end;
        if new_dur <= 0.0 && ev.is_rest() {
            return;
        }
        if new_dur > 0.0 {
            ev.duration_sec = new_dur;
            ev.onset_sec = last_end;
        }
    }
    out.push(ev);
}
