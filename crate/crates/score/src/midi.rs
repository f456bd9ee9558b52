//! Standard MIDI File (format 0/1) parser: note on/off pairs on the first
//! track containing notes become score events; lyric (0x05) and text (0x01)
//! meta events attach to note onsets; tempo metas build the tick clock.

use thiserror::Error;

use crate::model::{NoteEvent, Score, SourceFormat};

#[derive(Debug, Error)]
pub enum MidiError {
    #[error("midi syntax at byte {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unsupported SMF: {0}")]
    UnsupportedFormat(String),
    #[error("note-on (pitch {pitch}) at tick {tick} has no matching note-off")]
    DanglingNote { tick: u64, pitch: u8 },
}

/// Non-fatal oddities encountered while parsing (discarded lyrics, truncated
/// overlaps). Returned by [`parse_midi_verbose`].
#[derive(Debug, Clone, PartialEq)]
pub struct MidiWarning {
    pub tick: u64,
    pub message: String,
}

/// Tempo changes in ticks: `(tick, microseconds per quarter note)`.
///
/// The first entry is always at tick 0; 500000 us/quarter (120 bpm) is
/// assumed when the file declares nothing earlier.
#[derive(Debug, Clone, PartialEq)]
pub struct TempoMap {
    pub ticks_per_quarter: u32,
    pub changes: Vec<(u64, u32)>,
}

pub const DEFAULT_MICROS_PER_QUARTER: u32 = 500_000;

impl TempoMap {
    pub fn new(ticks_per_quarter: u32, mut changes: Vec<(u64, u32)>) -> Self {
        changes.sort_by_key(|c| c.0);
        // later change at the same tick wins
        changes.dedup_by(|next, prev| {
            if next.0 == prev.0 {
                prev.1 = next.1;
                true
            } else {
                false
            }
        });
        if changes.first().is_none_or(|c| c.0 > 0) {
            changes.insert(0, (0, DEFAULT_MICROS_PER_QUARTER));
        }
        TempoMap {
            ticks_per_quarter,
            changes,
        }
    }

    /// Seconds elapsed from tick 0 to `tick`, integrating across segments.
    pub fn tick_to_seconds(&self, tick: u64) -> f64 {
        let tpq = self.ticks_per_quarter as f64;
        let mut seconds = 0.0f64;
        for (i, &(start, uspq)) in self.changes.iter().enumerate() {
            if start >= tick {
                break;
            }
            let end = self
                .changes
                .get(i + 1)
                .map_or(tick, |&(next, _)| next.min(tick));
            seconds += (end - start) as f64 * uspq as f64 / tpq / 1e6;
        }
        seconds
    }
}

/// Parses an SMF document into a canonical score.
pub fn parse_midi(document: &[u8]) -> Result<Score, MidiError> {
    parse_midi_verbose(document).map(|(score, _)| score)
}

/// Like [`parse_midi`], also returning non-fatal warnings.
pub fn parse_midi_verbose(document: &[u8]) -> Result<(Score, Vec<MidiWarning>), MidiError> {
    let mut r = Reader {
        bytes: document,
        pos: 0,
    };

    let hdr = r.expect_chunk(b"MThd")?;
    if hdr.len() != 6 {
        return Err(r.syntax("MThd chunk must be 6 bytes"));
    }
    let format = u16::from_be_bytes([hdr[0], hdr[1]]);
    let ntrks = u16::from_be_bytes([hdr[2], hdr[3]]);
    let division = u16::from_be_bytes([hdr[4], hdr[5]]);
    if format > 1 {
        return Err(MidiError::UnsupportedFormat(format!("SMF format {format}")));
    }
    if division & 0x8000 != 0 {
        return Err(MidiError::UnsupportedFormat("SMPTE time division".into()));
    }
    if division == 0 {
        return Err(r.syntax("ticks per quarter must be non-zero"));
    }

    let mut tracks = Vec::new();
    for _ in 0..ntrks {
        let data = r.expect_chunk(b"MTrk")?;
        tracks.push(parse_track(data, r.pos - data.len())?);
    }

    let mut tempo_changes = Vec::new();
    let mut lyric_metas: Vec<LyricMeta> = Vec::new();
    for t in &tracks {
        tempo_changes.extend_from_slice(&t.tempos);
        lyric_metas.extend_from_slice(&t.lyrics);
    }
    lyric_metas.sort_by_key(|m| (m.tick, !m.is_lyric_meta));
    let tempo_map = TempoMap::new(division as u32, tempo_changes);

    let mut warnings = Vec::new();
    let note_track = tracks.iter().find(|t| !t.raw_notes.is_empty());
    let mut events = Vec::new();
    if let Some(track) = note_track {
        let mut used = vec![false; lyric_metas.len()];
        for n in &track.raw_notes {
            let onset = tempo_map.tick_to_seconds(n.on_tick);
            let end = tempo_map.tick_to_seconds(n.off_tick);
            if end <= onset {
                warnings.push(MidiWarning {
                    tick: n.on_tick,
                    message: format!("zero-length note (pitch {}) dropped", n.pitch),
                });
                continue;
            }
            // a lyric within one tick of the onset names this note
            let mut chosen: Option<usize> = None;
            let mut best = u64::MAX;
            for (i, m) in lyric_metas.iter().enumerate() {
                let dist = m.tick.abs_diff(n.on_tick);
                if !used[i] && dist <= 1 && dist < best {
                    best = dist;
                    chosen = Some(i);
                }
            }
            let lyric = chosen
                .map(|i| {
                    used[i] = true;
                    lyric_metas[i].text.clone()
                })
                .unwrap_or_default();
            events.push(NoteEvent {
                lyric,
                midi_pitch: Some(n.pitch),
                onset_sec: onset,
                duration_sec: end - onset,
                is_slur_continuation: false,
            });
        }
        for (i, m) in lyric_metas.iter().enumerate() {
            if !used[i] && !m.text.trim().is_empty() {
                warnings.push(MidiWarning {
                    tick: m.tick,
                    message: format!("lyric '{}' has no note within 1 tick", m.text),
                });
            }
        }
        warnings.extend(track.warnings.iter().cloned());
    }

    let tempo_bpm = 60e6 / tempo_map.changes[0].1 as f64;
    let score = Score {
        events,
        tempo_bpm,
        language: Default::default(),
        source_format: SourceFormat::Midi,
    };
    Ok((score, warnings))
}

#[derive(Clone)]
struct RawNote {
    on_tick: u64,
    off_tick: u64,
    pitch: u8,
}

#[derive(Clone)]
struct LyricMeta {
    tick: u64,
    text: String,
    is_lyric_meta: bool,
}

struct Track {
    raw_notes: Vec<RawNote>,
    tempos: Vec<(u64, u32)>,
    lyrics: Vec<LyricMeta>,
    warnings: Vec<MidiWarning>,
}

struct Reader<'a> {
    bytes: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn syntax(&self, message: impl Into<String>) -> MidiError {
        MidiError::Syntax {
            offset: self.pos,
            message: message.into(),
        }
    }

    fn take(&mut self, n: usize) -> Result<&'a [u8], MidiError> {
        if self.pos + n > self.bytes.len() {
            return Err(self.syntax(format!("unexpected end of file, needed {n} bytes")));
        }
        let s = &self.bytes[self.pos..self.pos + n];
        self.pos += n;
        Ok(s)
    }

    fn expect_chunk(&mut self, magic: &[u8; 4]) -> Result<&'a [u8], MidiError> {
        let tag = self.take(4)?;
        if tag != magic {
            return Err(MidiError::Syntax {
                offset: self.pos - 4,
                message: format!(
                    "expected chunk {:?}, found {:?}",
                    String::from_utf8_lossy(magic),
                    String::from_utf8_lossy(tag)
                ),
            });
        }
        let len = u32::from_be_bytes(self.take(4)?.try_into().unwrap()) as usize;
        self.take(len)
    }
}

fn parse_track(data: &[u8], base_offset: usize) -> Result<Track, MidiError> {
    let mut r = Reader {
        bytes: data,
        pos: 0,
    };
    let off = |r: &Reader| base_offset + r.pos;

    let mut tick = 0u64;
    let mut running_status: Option<u8> = None;
    // monophonic melody: at most one sounding note at a time
    let mut active: Option<(u64, u8)> = None;
    let mut track = Track {
        raw_notes: Vec::new(),
        tempos: Vec::new(),
        lyrics: Vec::new(),
        warnings: Vec::new(),
    };

    let close_active = |active: &mut Option<(u64, u8)>,
                            end_tick: u64,
                            notes: &mut Vec<RawNote>,
                            warnings: &mut Vec<MidiWarning>,
                            truncated: bool| {
        if let Some((on_tick, pitch)) = active.take() {
            if truncated {
                warnings.push(MidiWarning {
                    tick: end_tick,
                    message: format!(
                        "overlapping note-on: note (pitch {pitch}) at tick {on_tick} truncated"
                    ),
                });
            }
            notes.push(RawNote {
                on_tick,
                off_tick: end_tick,
                pitch,
            });
        }
    };

    while r.pos < data.len() {
        tick += read_varint(&mut r)?;
        let first = r.take(1)?[0];
        let status = if first & 0x80 != 0 {
            if first < 0xF0 {
                running_status = Some(first);
            }
            first
        } else {
            r.pos -= 1;
            running_status.ok_or_else(|| MidiError::Syntax {
                offset: off(&r),
                message: "data byte without running status".into(),
            })?
        };

        match status & 0xF0 {
            0x90 => {
                let d = r.take(2)?;
                let (pitch, velocity) = (d[0], d[1]);
                if velocity == 0 {
                    // note-on with velocity 0 is a note-off
                    if active.is_some_and(|(_, p)| p == pitch) {
                        close_active(&mut active, tick, &mut track.raw_notes, &mut track.warnings, false);
                    }
                } else {
                    if active.is_some() {
                        close_active(&mut active, tick, &mut track.raw_notes, &mut track.warnings, true);
                    }
                    active = Some((tick, pitch));
                }
            }
            0x80 => {
                let d = r.take(2)?;
                let pitch = d[0];
                if active.is_some_and(|(_, p)| p == pitch) {
                    close_active(&mut active, tick, &mut track.raw_notes, &mut track.warnings, false);
                }
            }
            0xA0 | 0xB0 | 0xE0 => {
                r.take(2)?;
            }
            0xC0 | 0xD0 => {
                r.take(1)?;
            }
            0xF0 => match status {
                0xFF => {
                    let meta_type = r.take(1)?[0];
                    let len = read_varint(&mut r)? as usize;
                    let payload = r.take(len)?;
                    match meta_type {
                        0x51 => {
                            if len != 3 {
                                return Err(MidiError::Syntax {
                                    offset: off(&r),
                                    message: "tempo meta must be 3 bytes".into(),
                                });
                            }
                            let uspq = u32::from_be_bytes([0, payload[0], payload[1], payload[2]]);
                            if uspq == 0 {
                                return Err(MidiError::Syntax {
                                    offset: off(&r),
                                    message: "tempo must be positive".into(),
                                });
                            }
                            track.tempos.push((tick, uspq));
                        }
                        0x05 | 0x01 => {
                            let text = String::from_utf8_lossy(payload).trim().to_string();
                            if !text.is_empty() {
                                track.lyrics.push(LyricMeta {
                                    tick,
                                    text,
                                    is_lyric_meta: meta_type == 0x05,
                                });
                            }
                        }
                        _ => {}
                    }
                }
                0xF0 | 0xF7 => {
                    let len = read_varint(&mut r)? as usize;
                    r.take(len)?;
                }
                other => {
                    return Err(MidiError::Syntax {
                        offset: off(&r),
                        message: format!("unsupported system message 0x{other:02X}"),
                    })
                }
            },
            _ => {
                return Err(MidiError::Syntax {
                    offset: off(&r),
                    message: format!("invalid status byte 0x{status:02X}"),
                })
            }
        }
    }

    if let Some((on_tick, pitch)) = active {
        return Err(MidiError::DanglingNote {
            tick: on_tick,
            pitch,
        });
    }
    track.raw_notes.sort_by_key(|n| n.on_tick);
    Ok(track)
}

fn read_varint(r: &mut Reader) -> Result<u64, MidiError> {
    let mut value: u64 = 0;
    for i in 0..4 {
        let b = r.take(1)?[0];
        value = (value << 7) | (b & 0x7F) as u64;
        if b & 0x80 == 0 {
            return Ok(value);
        }
        if i == 3 {
            break;
        }
    }
    Err(r.syntax("variable-length quantity longer than 4 bytes"))
}
