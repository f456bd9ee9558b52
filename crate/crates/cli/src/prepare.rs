//! `prepare`: parse, repair, resample, segment and featurize a corpus into
//! a training-ready dataset directory.

use std::path::Path;

use anyhow::Context;
use serde::{Deserialize, Serialize};

use muskit_dsp::{
    extract_f0, mel_cepstrum, mel_spectrogram, read_wav, resample, segment, write_frame_file,
    write_wav, AudioBuffer, BitDepth,
};
use muskit_score::{
    auto_correct, detect_issues, normalize_score, parse_canonical, parse_midi, parse_musicxml,
    parse_textgrid, score_duration, serialize_score, PhonemeAlignment, Score, Severity,
};

use crate::config::PipelineConfig;
use crate::manifest::{ManifestEntry, ScoreFormat};
use crate::util::{run_pool, write_atomic};

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentFiles {
    pub audio: String,
    pub score: String,
    pub logmel: String,
    pub mcep: String,
    pub f0: String,
    pub lint: String,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SegmentEntry {
    pub segment_id: String,
    pub utt_id: String,
    pub singer: String,
    pub language: muskit_score::Language,
    pub duration_sec: f64,
    pub n_frames: usize,
    pub files: SegmentFiles,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct DatasetIndex {
    pub config: serde_json::Value,
    pub segments: Vec<SegmentEntry>,
}

#[derive(Debug, Serialize)]
struct UtteranceError<'a> {
    utt_id: &'a str,
    error: String,
}

pub struct PrepareSummary {
    pub segments: usize,
    pub failures: usize,
}

/// Loads a score in any supported format and stamps the manifest language.
pub fn load_score(entry: &ManifestEntry) -> anyhow::Result<Score> {
    let bytes = std::fs::read(&entry.score)
        .with_context(|| format!("reading score {}", entry.score.display()))?;
    let mut score = match entry.score_format {
        ScoreFormat::MusicXml => parse_musicxml(&bytes)?,
        ScoreFormat::Midi => parse_midi(&bytes)?,
        ScoreFormat::Canonical => {
            let text = String::from_utf8(bytes).context("canonical score is not utf-8")?;
            parse_canonical(&text)?
        }
    };
    score.language = entry.language;
    Ok(score)
}

pub fn load_alignment(entry: &ManifestEntry) -> anyhow::Result<Option<PhonemeAlignment>> {
    match &entry.alignment {
        None => Ok(None),
        Some(path) => {
            let text = std::fs::read_to_string(path)
                .with_context(|| format!("reading alignment {}", path.display()))?;
            let alignment = parse_textgrid(&text)?;
            alignment.validate()?;
            Ok(Some(alignment))
        }
    }
}

pub fn load_audio(entry: &ManifestEntry, target_rate: u32) -> anyhow::Result<AudioBuffer> {
    let bytes = std::fs::read(&entry.audio)
        .with_context(|| format!("reading audio {}", entry.audio.display()))?;
    let buffer = read_wav(&bytes)?;
    Ok(resample(&buffer, target_rate)?)
}

fn prepare_utterance(
    entry: &ManifestEntry,
    config: &PipelineConfig,
    out_dir: &Path,
) -> anyhow::Result<Vec<SegmentEntry>> {
    let audio = load_audio(entry, config.sample_rate_hz)?;
    let raw_score = load_score(entry)?;
    let alignment = load_alignment(entry)?;

    let (corrected, log) = auto_correct(
        &raw_score,
        alignment.as_ref(),
        Some(audio.duration_sec()),
        &config.lint,
    )?;
    write_atomic(
        &out_dir.join(format!("corrections/{}.json", entry.utt_id)),
        pretty_json(&log)?.as_bytes(),
    )?;

    let unresolved: Vec<String> = log
        .unresolved()
        .filter(|e| e.issue.severity == Severity::Error)
        .map(|e| format!("{:?}: {}", e.issue.kind, e.issue.detail))
        .collect();
    if !unresolved.is_empty() {
        anyhow::bail!("unresolved annotation errors: {}", unresolved.join("; "));
    }

    let normalized = normalize_score(&corrected)?;
    let segments = segment(&normalized, &audio, &config.segment)?;

    let mut entries = Vec::with_capacity(segments.len());
    for (i, (seg_score, seg_audio)) in segments.iter().enumerate() {
        let segment_id = format!("{}_{:04}", entry.utt_id, i);
        let rel = |ext: &str| format!("segments/{segment_id}.{ext}");

        let logmel = mel_spectrogram(seg_audio, &config.frame)?;
        let mcep = mel_cepstrum(seg_audio, &config.frame, config.mcep_coeffs)?;
        let f0 = extract_f0(seg_audio, &config.frame, &config.f0)?;

        write_atomic(
            &out_dir.join(rel("wav")),
            &write_wav(seg_audio, BitDepth::Float32),
        )?;
        write_atomic(
            &out_dir.join(rel("score.json")),
            serialize_score(seg_score).as_bytes(),
        )?;
        write_atomic(&out_dir.join(rel("logmel.mkfr")), &write_frame_file(&logmel))?;
        write_atomic(&out_dir.join(rel("mcep.mkfr")), &write_frame_file(&mcep))?;
        write_atomic(
            &out_dir.join(rel("f0.mkfr")),
            &write_frame_file(&f0.to_frame_matrix()),
        )?;

        // verification lint of the final artifact
        let issues = detect_issues(
            seg_score,
            None,
            Some(seg_audio.duration_sec()),
            &config.lint,
        );
        write_atomic(&out_dir.join(rel("lint.json")), pretty_json(&issues)?.as_bytes())?;

        entries.push(SegmentEntry {
            segment_id: segment_id.clone(),
            utt_id: entry.utt_id.clone(),
            singer: entry.singer.clone(),
            language: entry.language,
            duration_sec: score_duration(seg_score),
            n_frames: logmel.rows(),
            files: SegmentFiles {
                audio: rel("wav"),
                score: rel("score.json"),
                logmel: rel("logmel.mkfr"),
                mcep: rel("mcep.mkfr"),
                f0: rel("f0.mkfr"),
                lint: rel("lint.json"),
            },
        });
    }
    Ok(entries)
}

/// Runs the preparation pipeline. Utterances fail independently; failures
/// land in `errors.jsonl` and never block the rest of the corpus.
pub fn cmd_prepare(
    entries: &[ManifestEntry],
    config: &PipelineConfig,
    out_dir: &Path,
    jobs: usize,
) -> anyhow::Result<PrepareSummary> {
    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    let results = run_pool(entries, jobs, |entry| {
        prepare_utterance(entry, config, out_dir).map_err(|e| format!("{e:#}"))
    });

    let mut segments: Vec<SegmentEntry> = Vec::new();
    let mut failures: Vec<(usize, String)> = Vec::new();
    for (i, result) in results.into_iter().enumerate() {
        match result {
            Ok(mut entry_segments) => segments.append(&mut entry_segments),
            Err(message) => failures.push((i, message)),
        }
    }
    segments.sort_by(|a, b| a.segment_id.cmp(&b.segment_id));

    let index = DatasetIndex {
        config: config.echo(),
        segments,
    };
    write_atomic(&out_dir.join("index.json"), pretty_json(&index)?.as_bytes())?;

    let mut error_lines = String::new();
    let mut sorted_failures: Vec<(&str, &String)> = failures
        .iter()
        .map(|(i, m)| (entries[*i].utt_id.as_str(), m))
        .collect();
    sorted_failures.sort_by_key(|(utt, _)| *utt);
    for (utt_id, message) in &sorted_failures {
        error_lines.push_str(&serde_json::to_string(&UtteranceError {
            utt_id,
            error: (*message).clone(),
        })?);
        error_lines.push('\n');
    }
    write_atomic(&out_dir.join("errors.jsonl"), error_lines.as_bytes())?;

    for (utt_id, message) in &sorted_failures {
        eprintln!("error: {utt_id}: {message}");
    }

    Ok(PrepareSummary {
        segments: index.segments.len(),
        failures: failures.len(),
    })
}

pub fn read_dataset_index(dataset_dir: &Path) -> anyhow::Result<DatasetIndex> {
    let path = dataset_dir.join("index.json");
    let text = std::fs::read_to_string(&path)
        .with_context(|| format!("reading dataset index {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

pub(crate) fn pretty_json<T: Serialize>(value: &T) -> anyhow::Result<String> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    Ok(text)
}
