//! MusicXML (score-partwise) parser for the monophonic subset used by
//! singing corpora: first part, first voice, notes with pitch, duration,
//! lyric, tie, slur and rest, plus `<sound tempo>` changes.

use roxmltree::{Document, Node, ParsingOptions};
use thiserror::Error;

use crate::model::{NoteEvent, Score, SourceFormat};

#[derive(Debug, Error)]
pub enum MusicXmlError {
    #[error("xml syntax: {0}")]
    XmlSyntax(String),
    #[error("unsupported score: {0}")]
    UnsupportedScore(String),
    #[error("note at measure {measure} uses durations before <divisions> was declared")]
    MissingDivisions { measure: usize },
}

const DEFAULT_TEMPO_BPM: f64 = 120.0;

struct NoteRecord {
    start_quarters: f64,
    dur_quarters: f64,
    midi_pitch: Option<u8>,
    lyric: String,
    slur_continuation: bool,
    tie_stop: bool,
}

/// Parses a MusicXML document into a canonical score.
///
/// Tied notes of equal pitch are merged at ingest; slurred, lyricless notes
/// become slur continuations (melisma). Durations are converted to seconds
/// through the `<sound tempo>` map (120 bpm when absent).
pub fn parse_musicxml(document: &[u8]) -> Result<Score, MusicXmlError> {
    let text = std::str::from_utf8(document)
        .map_err(|e| MusicXmlError::XmlSyntax(format!("invalid utf-8: {e}")))?;
    let opts = ParsingOptions {
        allow_dtd: true,
        ..ParsingOptions::default()
    };
    let doc = Document::parse_with_options(text, opts)
        .map_err(|e| MusicXmlError::XmlSyntax(e.to_string()))?;
    let root = doc.root_element();

    if root.tag_name().name() != "score-partwise" {
        return Err(MusicXmlError::UnsupportedScore(format!(
            "root element <{}> is not <score-partwise>",
            root.tag_name().name()
        )));
    }
    let part = child(root, "part")
        .ok_or_else(|| MusicXmlError::UnsupportedScore("document has no <part>".into()))?;

    let mut divisions: Option<f64> = None;
    let mut cursor_quarters = 0.0f64;
    let mut slur_depth = 0usize;
    let mut locked_voice: Option<String> = None;
    let mut tempo_changes: Vec<(f64, f64)> = Vec::new();
    let mut notes: Vec<NoteRecord> = Vec::new();

    for (measure_no, measure) in children(part, "measure").enumerate() {
        for el in measure.children().filter(Node::is_element) {
            match el.tag_name().name() {
                "attributes" => {
                    if let Some(div) = child(el, "divisions") {
                        let v: f64 = text_of(div).parse().map_err(|_| {
                            MusicXmlError::UnsupportedScore(format!(
                                "invalid <divisions> '{}'",
                                text_of(div)
                            ))
                        })?;
                        if v <= 0.0 {
                            return Err(MusicXmlError::UnsupportedScore(
                                "<divisions> must be positive".into(),
                            ));
                        }
                        divisions = Some(v);
                    }
                }
                "direction" => {
                    if let Some(sound) = child(el, "sound") {
                        record_tempo(sound, cursor_quarters, &mut tempo_changes)?;
                    }
                }
                "sound" => record_tempo(el, cursor_quarters, &mut tempo_changes)?,
                "backup" | "forward" => {
                    let div = divisions
                        .ok_or(MusicXmlError::MissingDivisions { measure: measure_no + 1 })?;
                    let dur = read_duration(el, measure_no)?;
                    let delta = dur / div;
                    if el.tag_name().name() == "backup" {
                        cursor_quarters -= delta;
                    } else {
                        cursor_quarters += delta;
                    }
                }
                "note" => {
                    if child(el, "grace").is_some() {
                        continue;
                    }
                    if child(el, "chord").is_some() {
                        // polyphony is out of scope; chord tones beyond the
                        // first are dropped and do not advance the cursor
                        continue;
                    }
                    let div = divisions
                        .ok_or(MusicXmlError::MissingDivisions { measure: measure_no + 1 })?;
                    let dur_quarters = read_duration(el, measure_no)? / div;

                    let voice = child(el, "voice")
                        .map(text_of)
                        .unwrap_or_else(|| "1".into());
                    let first_voice = locked_voice.get_or_insert_with(|| voice.clone());
                    let in_voice = voice == *first_voice;

                    let slur_depth_before = slur_depth;
                    if let Some(notations) = child(el, "notations") {
                        for slur in children(notations, "slur") {
                            match slur.attribute("type") {
                                Some("start") => slur_depth += 1,
                                Some("stop") => slur_depth = slur_depth.saturating_sub(1),
                                _ => {}
                            }
                        }
                    }

                    if !in_voice {
                        cursor_quarters += dur_quarters;
                        continue;
                    }

                    let is_rest =
                        child(el, "rest").is_some() || child(el, "unpitched").is_some();
                    let midi_pitch = if is_rest { None } else { Some(read_pitch(el)?) };
                    let lyric = child(el, "lyric")
                        .and_then(|l| child(l, "text"))
                        .map(text_of)
                        .unwrap_or_default();
                    let tie_stop =
                        children(el, "tie").any(|t| t.attribute("type") == Some("stop"));

                    notes.push(NoteRecord {
                        start_quarters: cursor_quarters,
                        dur_quarters,
                        midi_pitch,
                        lyric: if is_rest { String::new() } else { lyric },
                        slur_continuation: !is_rest && slur_depth_before > 0,
                        tie_stop,
                    });
                    cursor_quarters += dur_quarters;
                }
                _ => {}
            }
        }
    }

    let timeline = TempoTimeline::new(tempo_changes);
    let mut events: Vec<NoteEvent> = Vec::new();
    for rec in notes {
        let onset = timeline.seconds_at(rec.start_quarters);
        let end = timeline.seconds_at(rec.start_quarters + rec.dur_quarters);
        let duration = end - onset;
        if duration <= 0.0 {
            continue;
        }

        // tie stop at the same pitch extends the previous event
        if rec.tie_stop {
            if let Some(prev) = events.last_mut() {
                if prev.midi_pitch == rec.midi_pitch
                    && rec.midi_pitch.is_some()
                    && (onset - prev.end_sec()).abs() <= 1e-6
                {
                    prev.duration_sec = end - prev.onset_sec;
                    continue;
                }
            }
        }

        let slur = rec.slur_continuation && rec.lyric.is_empty() && rec.midi_pitch.is_some();
        events.push(NoteEvent {
            lyric: if slur { String::new() } else { rec.lyric },
            midi_pitch: rec.midi_pitch,
            onset_sec: onset,
            duration_sec: duration,
            is_slur_continuation: slur,
        });
    }

    events.sort_by(|a, b| a.onset_sec.total_cmp(&b.onset_sec));

    let score = Score {
        events,
        tempo_bpm: timeline.initial_bpm(),
        language: Default::default(),
        source_format: SourceFormat::MusicXml,
    };
    score.validate().map_err(|e| {
        MusicXmlError::UnsupportedScore(format!("notes do not form a single voice: {e}"))
    })?;
    Ok(score)
}

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children()
        .find(|n| n.is_element() && n.tag_name().name() == name)
}

fn children<'a, 'i>(node: Node<'a, 'i>, name: &'a str) -> impl Iterator<Item = Node<'a, 'i>> {
    node.children()
        .filter(move |n| n.is_element() && n.tag_name().name() == name)
}

fn text_of(node: Node) -> String {
    node.text().unwrap_or_default().trim().to_string()
}

fn record_tempo(
    sound: Node,
    at_quarters: f64,
    changes: &mut Vec<(f64, f64)>,
) -> Result<(), MusicXmlError> {
    if let Some(t) = sound.attribute("tempo") {
        let bpm: f64 = t
            .parse()
            .map_err(|_| MusicXmlError::UnsupportedScore(format!("invalid sound tempo '{t}'")))?;
        if bpm <= 0.0 {
            return Err(MusicXmlError::UnsupportedScore(
                "sound tempo must be positive".into(),
            ));
        }
        changes.push((at_quarters, bpm));
    }
    Ok(())
}

fn read_duration(el: Node, measure_no: usize) -> Result<f64, MusicXmlError> {
    let dur = child(el, "duration").ok_or_else(|| {
        MusicXmlError::UnsupportedScore(format!(
            "<{}> in measure {} has no <duration>",
            el.tag_name().name(),
            measure_no + 1
        ))
    })?;
    let v: f64 = text_of(dur).parse().map_err(|_| {
        MusicXmlError::UnsupportedScore(format!("invalid <duration> '{}'", text_of(dur)))
    })?;
    if v < 0.0 {
        return Err(MusicXmlError::UnsupportedScore(
            "<duration> must be non-negative".into(),
        ));
    }
    Ok(v)
}

fn read_pitch(note: Node) -> Result<u8, MusicXmlError> {
    let pitch = child(note, "pitch").ok_or_else(|| {
        MusicXmlError::UnsupportedScore("note has neither <pitch> nor <rest>".into())
    })?;
    let step = child(pitch, "step")
        .map(text_of)
        .ok_or_else(|| MusicXmlError::UnsupportedScore("pitch missing <step>".into()))?;
    let semitone = match step.as_str() {
        "C" => 0,
        "D" => 2,
        "E" => 4,
        "F" => 5,
        "G" => 7,
        "A" => 9,
        "B" => 11,
        other => {
            return Err(MusicXmlError::UnsupportedScore(format!(
                "invalid step '{other}'"
            )))
        }
    };
    let alter: i32 = match child(pitch, "alter") {
        Some(a) => text_of(a).parse().map_err(|_| {
            MusicXmlError::UnsupportedScore(format!("invalid <alter> '{}'", text_of(a)))
        })?,
        None => 0,
    };
    let octave: i32 = child(pitch, "octave")
        .map(text_of)
        .ok_or_else(|| MusicXmlError::UnsupportedScore("pitch missing <octave>".into()))?
        .parse()
        .map_err(|_| MusicXmlError::UnsupportedScore("invalid <octave>".into()))?;

    let midi = (octave + 1) * 12 + semitone + alter;
    u8::try_from(midi)
        .ok()
        .filter(|&m| m <= 127)
        .ok_or_else(|| MusicXmlError::UnsupportedScore(format!("pitch {midi} outside MIDI 0-127")))
}

/// Piecewise-constant tempo map over quarter-note positions.
struct TempoTimeline {
    // (quarters, bpm, seconds at that point)
    segments: Vec<(f64, f64, f64)>,
}

impl TempoTimeline {
    fn new(mut changes: Vec<(f64, f64)>) -> Self {
        changes.sort_by(|a, b| a.0.total_cmp(&b.0));
        changes.dedup_by(|next, prev| {
            if (next.0 - prev.0).abs() < 1e-12 {
                prev.1 = next.1; // later change at the same position wins
                true
            } else {
                false
            }
        });
        if changes.first().is_none_or(|c| c.0 > 0.0) {
            changes.insert(0, (0.0, DEFAULT_TEMPO_BPM));
        }
        let mut segments = Vec::with_capacity(changes.len());
        let mut sec = 0.0f64;
        let mut prev: Option<(f64, f64)> = None;
        for (q, bpm) in changes {
            if let Some((pq, pbpm)) = prev {
                sec += (q - pq) * 60.0 / pbpm;
            }
            segments.push((q, bpm, sec));
            prev = Some((q, bpm));
        }
        TempoTimeline { segments }
    }

    fn initial_bpm(&self) -> f64 {
        self.segments.first().map_or(DEFAULT_TEMPO_BPM, |s| s.1)
    }

    fn seconds_at(&self, quarters: f64) -> f64 {
        let idx = self
            .segments
            .iter()
            .rposition(|s| s.0 <= quarters + 1e-12)
            .unwrap_or(0);
        let (q, bpm, sec) = self.segments[idx];
        sec + (quarters - q).max(0.0) * 60.0 / bpm
    }
}
