//! Command-level behavior: exit codes, fault isolation, lint streams,
//! fixing, and the perceptual-score merge.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::*;
use muskit_mos::{MockBehavior, MockMosServer};
use muskit_score::{score_duration, serialize_score, NoteEvent};

fn muskit(args: &[&str], dir: &Path, envs: &[(&str, &str)]) -> Output {
    let exe = env!("CARGO_BIN_EXE_muskit");
    let mut cmd = Command::new(exe);
    cmd.args(args).current_dir(dir);
    for (k, v) in envs {
        cmd.env(k, v);
    }
    cmd.output().expect("spawning muskit")
}

fn code(output: &Output) -> i32 {
    output.status.code().unwrap_or(-1)
}

#[test]
fn prepare_empty_manifest_is_a_clean_empty_index() {
    let tmp = tempfile::tempdir().unwrap();
    let manifest = tmp.path().join("empty.jsonl");
    std::fs::write(&manifest, "").unwrap();
    let out = tmp.path().join("dataset");
    let result = muskit(
        &["prepare", "--manifest", manifest.to_str().unwrap(), "--out", out.to_str().unwrap()],
        tmp.path(),
        &[],
    );
    assert_eq!(code(&result), 0, "{}", String::from_utf8_lossy(&result.stderr));
    let index: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("index.json")).unwrap()).unwrap();
    assert_eq!(index["segments"].as_array().unwrap().len(), 0);
}

#[test]
fn prepare_isolates_a_missing_audio_file() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = write_corpus(&tmp.path().join("corpus"), 3, 7);
    // break the middle utterance
    let bad_wav = tmp.path().join("corpus/wav/utt001.wav");
    std::fs::remove_file(&bad_wav).unwrap();

    let out = tmp.path().join("dataset");
    let result = muskit(
        &[
            "prepare",
            "--manifest",
            corpus.manifest.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
        &[],
    );
    assert_eq!(code(&result), 4, "expected partial failure");
    let errors = std::fs::read_to_string(out.join("errors.jsonl")).unwrap();
    assert_eq!(errors.lines().count(), 1);
    assert!(errors.contains("utt001"));
    // the others were still processed
    let index: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("index.json")).unwrap()).unwrap();
    let segments = index["segments"].as_array().unwrap();
    assert!(!segments.is_empty());
    assert!(segments
        .iter()
        .all(|s| s["utt_id"].as_str().unwrap() != "utt001"));
}

#[test]
fn lint_clean_corpus_prints_nothing_and_exits_zero() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = write_corpus(&tmp.path().join("corpus"), 2, 11);
    let result = muskit(
        &["lint", "--manifest", corpus.manifest.to_str().unwrap()],
        tmp.path(),
        &[],
    );
    assert_eq!(code(&result), 0, "{}", String::from_utf8_lossy(&result.stderr));
    assert!(result.stdout.is_empty());
}

#[test]
fn lint_flags_injected_duplicate_and_fix_clears_it() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus_dir = tmp.path().join("corpus");
    let corpus = write_corpus(&corpus_dir, 1, 13);

    // inject a lyricless duplicate note into the canonical score
    let score_path = corpus_dir.join("scores/utt000.json");
    let mut score =
        muskit_score::parse_canonical(&std::fs::read_to_string(&score_path).unwrap()).unwrap();
    let i = score
        .events
        .iter()
        .position(|e| e.requires_syllable())
        .unwrap();
    let original = score.events[i].clone();
    let half = original.duration_sec / 2.0;
    score.events[i].duration_sec = half;
    score.events.insert(
        i + 1,
        NoteEvent::note("", original.midi_pitch.unwrap(), original.onset_sec + half, half),
    );
    std::fs::write(&score_path, serialize_score(&score)).unwrap();

    let result = muskit(
        &["lint", "--manifest", corpus.manifest.to_str().unwrap()],
        tmp.path(),
        &[],
    );
    assert_eq!(code(&result), 3, "expected lint findings");
    let stdout = String::from_utf8_lossy(&result.stdout);
    assert!(
        stdout.lines().any(|l| l.contains("\"redundant_note\"")),
        "no redundant_note line in: {stdout}"
    );
    assert!(stdout.lines().all(|l| l.contains("\"utt_id\":\"utt000\"")));

    // --fix writes a corrected score that lints clean
    let result = muskit(
        &["lint", "--manifest", corpus.manifest.to_str().unwrap(), "--fix"],
        tmp.path(),
        &[],
    );
    assert_eq!(code(&result), 3);
    let fixed_path = corpus_dir.join("scores/utt000.fixed.json");
    assert!(fixed_path.exists());

    // point the manifest at the fixed score and re-lint
    let manifest_text = std::fs::read_to_string(&corpus.manifest)
        .unwrap()
        .replace("scores/utt000.json", "scores/utt000.fixed.json");
    std::fs::write(&corpus.manifest, manifest_text).unwrap();
    let result = muskit(
        &["lint", "--manifest", corpus.manifest.to_str().unwrap()],
        tmp.path(),
        &[],
    );
    assert_eq!(
        code(&result),
        0,
        "fixed score still dirty: {}",
        String::from_utf8_lossy(&result.stdout)
    );
}

#[test]
fn evaluate_disjoint_directories_exits_nonzero_with_unmatched() {
    let tmp = tempfile::tempdir().unwrap();
    let ref_dir = tmp.path().join("ref");
    let hyp_dir = tmp.path().join("hyp");
    std::fs::create_dir_all(&ref_dir).unwrap();
    std::fs::create_dir_all(&hyp_dir).unwrap();
    let score = melody(3, 6);
    std::fs::write(
        ref_dir.join("a.wav"),
        muskit_dsp::write_wav(&synth_audio(&score, 24000), muskit_dsp::BitDepth::Pcm16),
    )
    .unwrap();
    std::fs::write(
        hyp_dir.join("b.wav"),
        muskit_dsp::write_wav(&synth_audio(&score, 24000), muskit_dsp::BitDepth::Pcm16),
    )
    .unwrap();

    let out = tmp.path().join("eval");
    let result = muskit(
        &[
            "evaluate",
            "--ref",
            ref_dir.to_str().unwrap(),
            "--hyp",
            hyp_dir.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
        &[],
    );
    assert_eq!(code(&result), 4);
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["per_utt"].as_object().unwrap().len(), 0);
    assert_eq!(report["unmatched"]["ref_only"][0], "a");
    assert_eq!(report["unmatched"]["hyp_only"][0], "b");
}

#[test]
fn evaluate_merges_scores_from_the_mos_endpoint_env_var() {
    let tmp = tempfile::tempdir().unwrap();
    let wav_dir = tmp.path().join("wavs");
    std::fs::create_dir_all(&wav_dir).unwrap();
    let score = melody(5, 6);
    std::fs::write(
        wav_dir.join("utt.wav"),
        muskit_dsp::write_wav(&synth_audio(&score, 24000), muskit_dsp::BitDepth::Pcm16),
    )
    .unwrap();

    let server = MockMosServer::start(vec![MockBehavior::Ok {
        mos: 3.42,
        model_id: "mock".into(),
    }])
    .unwrap();

    let out = tmp.path().join("eval");
    let dir = wav_dir.to_str().unwrap();
    let result = muskit(
        &["evaluate", "--ref", dir, "--hyp", dir, "--out", out.to_str().unwrap()],
        tmp.path(),
        &[("MUSKIT_MOS_ENDPOINT", server.endpoint())],
    );
    assert_eq!(code(&result), 0, "{}", String::from_utf8_lossy(&result.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    assert_eq!(report["per_utt"]["utt"]["mos"].as_f64().unwrap(), 3.42);
    assert_eq!(report["mean"]["mos"].as_f64().unwrap(), 3.42);
    // csv carries the mos column
    let csv = std::fs::read_to_string(out.join("report.csv")).unwrap();
    assert!(csv.lines().nth(1).unwrap().ends_with("3.42"));
}

#[test]
fn evaluate_semitone_shifted_corpus_matches_the_closed_form() {
    // sustained single-pitch utterances, hypothesis one semitone up
    let tmp = tempfile::tempdir().unwrap();
    let ref_dir = tmp.path().join("ref");
    let hyp_dir = tmp.path().join("hyp");
    std::fs::create_dir_all(&ref_dir).unwrap();
    std::fs::create_dir_all(&hyp_dir).unwrap();
    for (i, pitch) in [57u8, 60, 64].iter().enumerate() {
        let score = muskit_score::Score::new(
            vec![NoteEvent::note("la", *pitch, 0.0, 1.2)],
            120.0,
        );
        let name = format!("utt{i}.wav");
        std::fs::write(
            ref_dir.join(&name),
            muskit_dsp::write_wav(&synth_audio(&score, 24000), muskit_dsp::BitDepth::Float32),
        )
        .unwrap();
        std::fs::write(
            hyp_dir.join(&name),
            muskit_dsp::write_wav(
                &synth_audio_shifted(&score, 24000, 1.0),
                muskit_dsp::BitDepth::Float32,
            ),
        )
        .unwrap();
    }

    let out = tmp.path().join("eval");
    let result = muskit(
        &[
            "evaluate",
            "--ref",
            ref_dir.to_str().unwrap(),
            "--hyp",
            hyp_dir.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ],
        tmp.path(),
        &[],
    );
    assert_eq!(code(&result), 0, "{}", String::from_utf8_lossy(&result.stderr));
    let report: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    let rmse = report["mean"]["f0_rmse_log"].as_f64().unwrap();
    let expected = 2f64.powf(1.0 / 12.0).ln();
    assert!(
        (rmse - expected).abs() <= 0.002,
        "corpus rmse {rmse} vs {expected}"
    );
    let sa = report["mean"]["semitone_accuracy"].as_f64().unwrap();
    assert!(sa <= 0.05, "semitone accuracy {sa} should be near 0");
}

#[test]
fn train_tokenizer_reports_insufficient_data_with_a_hint() {
    let tmp = tempfile::tempdir().unwrap();
    let corpus = write_corpus(&tmp.path().join("corpus"), 1, 17);
    let dataset = tmp.path().join("dataset");
    let result = muskit(
        &[
            "prepare",
            "--manifest",
            corpus.manifest.to_str().unwrap(),
            "--out",
            dataset.to_str().unwrap(),
        ],
        tmp.path(),
        &[],
    );
    assert_eq!(code(&result), 0);

    // default k=128 needs more frames than one tiny utterance... the corpus
    // easily exceeds that, so ask for an absurd k through a config
    let config = tmp.path().join("big.json");
    std::fs::write(&config, r#"{"tokenizer": {"k": 1000000}}"#).unwrap();
    let result = muskit(
        &[
            "--config",
            config.to_str().unwrap(),
            "train-tokenizer",
            "--dataset",
            dataset.to_str().unwrap(),
            "--mode",
            "semantic",
        ],
        tmp.path(),
        &[],
    );
    assert_eq!(code(&result), 1);
    let stderr = String::from_utf8_lossy(&result.stderr);
    assert!(stderr.contains("insufficient data"), "{stderr}");
    assert!(stderr.contains("tokenizer.k"), "{stderr}");
}

#[test]
fn segment_spans_cover_the_source_duration() {
    // prepared segment durations must partition each utterance's span
    let tmp = tempfile::tempdir().unwrap();
    let corpus = write_corpus(&tmp.path().join("corpus"), 2, 23);
    let dataset = tmp.path().join("dataset");
    let result = muskit(
        &[
            "prepare",
            "--manifest",
            corpus.manifest.to_str().unwrap(),
            "--out",
            dataset.to_str().unwrap(),
        ],
        tmp.path(),
        &[],
    );
    assert_eq!(code(&result), 0);

    let index: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(dataset.join("index.json")).unwrap())
            .unwrap();
    for utt in &corpus.utt_ids {
        let score = muskit_score::parse_canonical(
            &std::fs::read_to_string(tmp.path().join(format!("corpus/scores/{utt}.json")))
                .unwrap(),
        )
        .unwrap();
        let total = score_duration(&score);
        let sum: f64 = index["segments"]
            .as_array()
            .unwrap()
            .iter()
            .filter(|s| s["utt_id"] == utt.as_str())
            .map(|s| s["duration_sec"].as_f64().unwrap())
            .sum();
        assert!(
            (sum - total).abs() < 1e-6,
            "{utt}: segment spans {sum} vs score {total}"
        );
    }
}
