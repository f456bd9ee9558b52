//! Synthetic corpus fixtures shared by the integration suites: seeded
//! melodies, rendered sine audio, alignments, and equivalent MusicXML/SMF
//! documents.

#![allow(dead_code)]

use std::path::{Path, PathBuf};

use muskit_dsp::{write_wav, AudioBuffer, BitDepth};
use muskit_score::{midi_to_hz, score_duration, Interval, Language, NoteEvent, PhonemeAlignment, Score};

pub struct Rng(pub u64);

impl Rng {
    pub fn next_u64(&mut self) -> u64 {
        self.0 ^= self.0 << 13;
        self.0 ^= self.0 >> 7;
        self.0 ^= self.0 << 17;
        self.0
    }

    pub fn pick(&mut self, n: usize) -> usize {
        (self.next_u64() % n as u64) as usize
    }

    pub fn unit(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 / (1u64 << 53) as f64
    }
}

pub const LYRICS: [&str; 5] = ["la", "li", "lu", "ne", "ha"];

/// Deterministic melody: contiguous events covering [0, span], interior
/// rests, and a guaranteed equal-pitch consecutive pair. Durations are
/// multiples of 1/960 s so MIDI/MusicXML fixtures are tick-exact.
pub fn melody(seed: u64, n_notes: usize) -> Score {
    let mut rng = Rng(seed.wrapping_mul(0x9e3779b97f4a7c15) | 1);
    let tick_durations = [240u32, 360, 480, 600]; // 0.25 to 0.625 s at 120 bpm
    let mut events = Vec::new();
    let mut t = 0.0f64;
    let mut pitch = 60u8;
    for i in 0..n_notes {
        if i > 0 && i % 5 == 0 {
            // interior rest long enough to be a segmentation cut
            let dur = 336.0 / 960.0; // 0.35 s
            events.push(NoteEvent::rest(t, dur));
            t += dur;
        }
        let dur = tick_durations[rng.pick(4)] as f64 / 960.0;
        if i % 4 == 3 {
            // repeated pitch, so melisma-style corruptions stay fixable
        } else {
            let step = [0i8, 2, -2, 3, -3, 4][rng.pick(6)];
            pitch = pitch.saturating_add_signed(step).clamp(57, 74);
        }
        let lyric = LYRICS[rng.pick(LYRICS.len())];
        events.push(NoteEvent::note(lyric, pitch, t, dur));
        t += dur;
    }
    let mut score = Score::new(events, 120.0);
    score.language = Language::En;
    score
}

/// One labeled interval per event: the lyric for pitched notes, "sil" for
/// rests, "ng" for slur continuations.
pub fn alignment_for(score: &Score) -> PhonemeAlignment {
    let intervals = score
        .events
        .iter()
        .map(|e| {
            let label = if e.is_rest() {
                "sil".to_string()
            } else if e.lyric.is_empty() {
                "ng".to_string()
            } else {
                e.lyric.clone()
            };
            Interval::new(e.onset_sec, e.end_sec(), label)
        })
        .collect();
    PhonemeAlignment { intervals }
}

/// Renders a score as a sum of per-note sines with 10 ms raised-cosine
/// edges; rests are silence.
pub fn synth_audio(score: &Score, rate: u32) -> AudioBuffer {
    render(score, rate, 1.0)
}

/// Like [`synth_audio`], with every note pitched `semitones` higher.
pub fn synth_audio_shifted(score: &Score, rate: u32, semitones: f64) -> AudioBuffer {
    render(score, rate, 2f64.powf(semitones / 12.0))
}

fn render(score: &Score, rate: u32, freq_factor: f64) -> AudioBuffer {
    let total = score_duration(score);
    let n = (total * rate as f64).round() as usize;
    let mut samples = vec![0.0f64; n];
    for ev in &score.events {
        let Some(pitch) = ev.midi_pitch else { continue };
        let freq = midi_to_hz(pitch).unwrap() * freq_factor;
        let start = (ev.onset_sec * rate as f64).round() as usize;
        let end = ((ev.end_sec() * rate as f64).round() as usize).min(n);
        let ramp = (0.010 * rate as f64) as usize;
        for (k, sample) in samples[start..end].iter_mut().enumerate() {
            let fade_in = if k < ramp {
                0.5 - 0.5 * (std::f64::consts::PI * k as f64 / ramp as f64).cos()
            } else {
                1.0
            };
            let remaining = end - start - k - 1;
            let fade_out = if remaining < ramp {
                0.5 - 0.5 * (std::f64::consts::PI * remaining as f64 / ramp as f64).cos()
            } else {
                1.0
            };
            let t = (start + k) as f64 / rate as f64;
            *sample = 0.6 * fade_in * fade_out * (2.0 * std::f64::consts::PI * freq * t).sin();
        }
    }
    AudioBuffer::new(samples, rate)
}

/// Renders a TextGrid document for an alignment.
pub fn textgrid_for(alignment: &PhonemeAlignment, xmax: f64) -> String {
    let mut out = String::new();
    out.push_str("File type = \"ooTextFile\"\nObject class = \"TextGrid\"\n\n");
    out.push_str(&format!("xmin = 0\nxmax = {xmax}\ntiers? <exists>\nsize = 1\nitem []:\n"));
    out.push_str("    item [1]:\n        class = \"IntervalTier\"\n        name = \"phones\"\n");
    out.push_str(&format!(
        "        xmin = 0\n        xmax = {xmax}\n        intervals: size = {}\n",
        alignment.intervals.len()
    ));
    for (i, iv) in alignment.intervals.iter().enumerate() {
        out.push_str(&format!(
            "        intervals [{}]:\n            xmin = {}\n            xmax = {}\n            text = \"{}\"\n",
            i + 1,
            iv.start_sec,
            iv.end_sec,
            iv.label
        ));
    }
    out
}

/// Renders a score-partwise MusicXML document (divisions 480, tempo 120).
pub fn musicxml_for(score: &Score) -> String {
    let mut notes = String::new();
    for ev in &score.events {
        let ticks = (ev.duration_sec * 960.0).round() as u32;
        if ev.is_rest() {
            notes.push_str(&format!(
                "      <note><rest/><duration>{ticks}</duration></note>\n"
            ));
        } else {
            let midi = ev.midi_pitch.unwrap() as i32;
            let octave = midi / 12 - 1;
            let (step, alter) = [
                ("C", 0), ("C", 1), ("D", 0), ("D", 1), ("E", 0), ("F", 0),
                ("F", 1), ("G", 0), ("G", 1), ("A", 0), ("A", 1), ("B", 0),
            ][(midi % 12) as usize];
            let alter_el = if alter != 0 {
                format!("<alter>{alter}</alter>")
            } else {
                String::new()
            };
            let lyric_el = if ev.lyric.is_empty() {
                String::new()
            } else {
                format!("<lyric><text>{}</text></lyric>", ev.lyric)
            };
            notes.push_str(&format!(
                "      <note><pitch><step>{step}</step>{alter_el}<octave>{octave}</octave></pitch><duration>{ticks}</duration>{lyric_el}</note>\n"
            ));
        }
    }
    format!(
        r#"<?xml version="1.0" encoding="UTF-8"?>
<score-partwise version="4.0">
  <part-list><score-part id="P1"><part-name>voice</part-name></score-part></part-list>
  <part id="P1">
    <measure number="1">
      <attributes><divisions>480</divisions></attributes>
      <direction><sound tempo="120"/></direction>
{notes}    </measure>
  </part>
</score-partwise>
"#
    )
}

fn varint(mut v: u32) -> Vec<u8> {
    let mut out = vec![(v & 0x7F) as u8];
    v >>= 7;
    while v > 0 {
        out.insert(0, ((v & 0x7F) | 0x80) as u8);
        v >>= 7;
    }
    out
}

/// Renders an SMF format-0 file (480 PPQ, default tempo) with lyric metas
/// at each note-on tick. Rests become gaps.
pub fn midi_for(score: &Score) -> Vec<u8> {
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    struct Event {
        tick: u64,
        order: u8,
        bytes: Vec<u8>,
    }
    let mut events = Vec::new();
    for ev in &score.events {
        let Some(pitch) = ev.midi_pitch else { continue };
        let on = (ev.onset_sec * 960.0).round() as u64;
        let off = (ev.end_sec() * 960.0).round() as u64;
        if !ev.lyric.is_empty() {
            let mut meta = vec![0xFF, 0x05, ev.lyric.len() as u8];
            meta.extend_from_slice(ev.lyric.as_bytes());
            events.push(Event {
                tick: on,
                order: 0,
                bytes: meta,
            });
        }
        events.push(Event {
            tick: on,
            order: 1,
            bytes: vec![0x90, pitch, 100],
        });
        events.push(Event {
            tick: off,
            order: 0,
            bytes: vec![0x80, pitch, 0],
        });
    }
    events.sort();

    let mut track = Vec::new();
    let mut cursor = 0u64;
    for ev in events {
        track.extend(varint((ev.tick - cursor) as u32));
        track.extend_from_slice(&ev.bytes);
        cursor = ev.tick;
    }
    track.extend_from_slice(&[0x00, 0xFF, 0x2F, 0x00]);

    let mut out = Vec::new();
    out.extend_from_slice(b"MThd");
    out.extend_from_slice(&6u32.to_be_bytes());
    out.extend_from_slice(&0u16.to_be_bytes());
    out.extend_from_slice(&1u16.to_be_bytes());
    out.extend_from_slice(&480u16.to_be_bytes());
    out.extend_from_slice(b"MTrk");
    out.extend_from_slice(&(track.len() as u32).to_be_bytes());
    out.extend_from_slice(&track);
    out
}

pub struct CorpusPaths {
    pub manifest: PathBuf,
    pub utt_ids: Vec<String>,
}

/// Writes a complete synthetic corpus: canonical scores, PCM16 WAV audio,
/// TextGrid alignments and the JSON-lines manifest.
pub fn write_corpus(dir: &Path, n_utts: usize, seed: u64) -> CorpusPaths {
    std::fs::create_dir_all(dir.join("wav")).unwrap();
    std::fs::create_dir_all(dir.join("scores")).unwrap();
    std::fs::create_dir_all(dir.join("align")).unwrap();

    let mut manifest = String::new();
    let mut utt_ids = Vec::new();
    for i in 0..n_utts {
        let utt_id = format!("utt{i:03}");
        let score = melody(seed + i as u64, 8 + (i % 4) * 2);
        // one utterance at 48 kHz to exercise ingest resampling
        let rate = if i == 0 { 48000 } else { 24000 };
        let audio = synth_audio(&score, rate);

        std::fs::write(
            dir.join(format!("wav/{utt_id}.wav")),
            write_wav(&audio, BitDepth::Pcm16),
        )
        .unwrap();
        std::fs::write(
            dir.join(format!("scores/{utt_id}.json")),
            muskit_score::serialize_score(&score),
        )
        .unwrap();
        let alignment = alignment_for(&score);
        std::fs::write(
            dir.join(format!("align/{utt_id}.TextGrid")),
            textgrid_for(&alignment, score_duration(&score)),
        )
        .unwrap();

        manifest.push_str(&format!(
            "{{\"utt_id\":\"{utt_id}\",\"audio\":\"wav/{utt_id}.wav\",\"score\":\"scores/{utt_id}.json\",\"score_format\":\"canonical\",\"alignment\":\"align/{utt_id}.TextGrid\",\"singer\":\"synth\",\"language\":\"en\"}}\n"
        ));
        utt_ids.push(utt_id);
    }
    let manifest_path = dir.join("corpus.jsonl");
    std::fs::write(&manifest_path, manifest).unwrap();
    CorpusPaths {
        manifest: manifest_path,
        utt_ids,
    }
}
