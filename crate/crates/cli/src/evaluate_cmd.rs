//! `evaluate`: score a directory of synthesized takes against references
//! with matching file stems, optionally merging perceptual scores from an
//! external service.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use muskit_dsp::{read_wav, AudioBuffer};
use muskit_metrics::{evaluate_pair, mean_report, MeanReport, MetricReport};
use muskit_mos::{batch_mos, DEFAULT_CONCURRENCY, DEFAULT_TIMEOUT_MS};

use crate::config::PipelineConfig;
use crate::prepare::pretty_json;
use crate::util::{run_pool, write_atomic};

#[derive(Debug, Serialize, Deserialize)]
pub struct Unmatched {
    pub ref_only: Vec<String>,
    pub hyp_only: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
pub struct CorpusReport {
    pub config: serde_json::Value,
    pub per_utt: BTreeMap<String, MetricReport>,
    pub mean: MeanReport,
    pub unmatched: Unmatched,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub mos_errors: BTreeMap<String, String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub pair_errors: BTreeMap<String, String>,
}

pub struct EvaluateSummary {
    pub pairs: usize,
    pub report_json: PathBuf,
    pub report_csv: PathBuf,
}

fn wav_stems(dir: &Path) -> anyhow::Result<BTreeMap<String, PathBuf>> {
    let mut out = BTreeMap::new();
    let entries = std::fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?;
    for entry in entries {
        let path = entry?.path();
        let is_wav = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| e.eq_ignore_ascii_case("wav"));
        if is_wav {
            if let Some(stem) = path.file_stem().and_then(|s| s.to_str()) {
                out.insert(stem.to_string(), path.clone());
            }
        }
    }
    Ok(out)
}

fn load_wav(path: &Path) -> anyhow::Result<AudioBuffer> {
    let bytes = std::fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(read_wav(&bytes)?)
}

/// Evaluates all matched pairs and writes `report.json` and `report.csv`
/// into `out_dir`. Per-pair failures are isolated into the report.
pub fn cmd_evaluate(
    ref_dir: &Path,
    hyp_dir: &Path,
    out_dir: &Path,
    config: &PipelineConfig,
    mos_endpoint: Option<&str>,
    jobs: usize,
) -> anyhow::Result<EvaluateSummary> {
    let refs = wav_stems(ref_dir)?;
    let hyps = wav_stems(hyp_dir)?;

    let matched: Vec<(String, PathBuf, PathBuf)> = refs
        .iter()
        .filter_map(|(stem, ref_path)| {
            hyps.get(stem)
                .map(|hyp_path| (stem.clone(), ref_path.clone(), hyp_path.clone()))
        })
        .collect();
    let unmatched = Unmatched {
        ref_only: refs.keys().filter(|k| !hyps.contains_key(*k)).cloned().collect(),
        hyp_only: hyps.keys().filter(|k| !refs.contains_key(*k)).cloned().collect(),
    };

    let results = run_pool(&matched, jobs, |(_, ref_path, hyp_path)| {
        let run = || -> anyhow::Result<MetricReport> {
            let reference = load_wav(ref_path)?;
            let hypothesis = load_wav(hyp_path)?;
            Ok(evaluate_pair(&reference, &hypothesis, &config.frame)?)
        };
        run().map_err(|e| format!("{e:#}"))
    });

    let mut per_utt = BTreeMap::new();
    let mut pair_errors = BTreeMap::new();
    for ((stem, _, _), result) in matched.iter().zip(results) {
        match result {
            Ok(report) => {
                per_utt.insert(stem.clone(), report);
            }
            Err(message) => {
                eprintln!("error: {stem}: {message}");
                pair_errors.insert(stem.clone(), message);
            }
        }
    }

    // optional perceptual scores for the hypothesis takes
    let mut mos_errors = BTreeMap::new();
    if let Some(endpoint) = mos_endpoint {
        let utts: Vec<(String, AudioBuffer)> = matched
            .iter()
            .filter(|(stem, _, _)| per_utt.contains_key(stem))
            .filter_map(|(stem, _, hyp_path)| {
                load_wav(hyp_path).ok().map(|audio| (stem.clone(), audio))
            })
            .collect();
        let scores = batch_mos(endpoint, &utts, DEFAULT_CONCURRENCY, DEFAULT_TIMEOUT_MS);
        for (stem, outcome) in scores {
            match outcome {
                Ok(score) => {
                    if let Some(report) = per_utt.get_mut(&stem) {
                        report.mos = Some(score.mos);
                    }
                }
                Err(e) => {
                    mos_errors.insert(stem, e.to_string());
                }
            }
        }
    }

    let report = CorpusReport {
        config: config.echo(),
        mean: mean_report(per_utt.values()),
        per_utt,
        unmatched,
        mos_errors,
        pair_errors,
    };

    std::fs::create_dir_all(out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;
    let report_json = out_dir.join("report.json");
    let report_csv = out_dir.join("report.csv");
    write_atomic(&report_json, pretty_json(&report)?.as_bytes())?;
    write_atomic(&report_csv, render_csv(&report).as_bytes())?;

    Ok(EvaluateSummary {
        pairs: report.per_utt.len(),
        report_json,
        report_csv,
    })
}

fn render_csv(report: &CorpusReport) -> String {
    let mut out = String::from(
        "utt_id,mcd_db,f0_rmse_log,semitone_accuracy,vuv_error,n_frames_ref,n_frames_hyp,n_mutually_voiced,mos\n",
    );
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for (utt, r) in &report.per_utt {
        out.push_str(&format!(
            "{utt},{},{},{},{},{},{},{},{}\n",
            r.mcd_db,
            opt(r.f0_rmse_log),
            opt(r.semitone_accuracy),
            r.vuv_error,
            r.n_frames_ref,
            r.n_frames_hyp,
            r.n_mutually_voiced,
            opt(r.mos),
        ));
    }
    out
}
