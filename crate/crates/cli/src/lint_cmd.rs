//! `lint`: stream annotation issues as JSON lines, optionally writing
//! auto-corrected scores next to the originals.

use std::io::Write;
use std::path::PathBuf;

use serde::Serialize;

use muskit_score::{auto_correct, detect_issues, serialize_score, Issue, Severity};

use crate::config::PipelineConfig;
use crate::manifest::ManifestEntry;
use crate::prepare::{load_alignment, load_audio, load_score};
use crate::util::{run_pool, write_atomic};

#[derive(Debug, Serialize)]
struct IssueLine<'a> {
    utt_id: &'a str,
    #[serde(flatten)]
    issue: &'a Issue,
}

pub struct LintSummary {
    pub errors: usize,
    pub warnings: usize,
    pub failures: usize,
}

struct UttLint {
    issues: Vec<Issue>,
    fixed: Option<(PathBuf, String)>,
}

/// Lints every utterance in the manifest against its audio duration and
/// alignment. With `fix`, writes `<score>.fixed.json` for each utterance.
pub fn cmd_lint(
    entries: &[ManifestEntry],
    config: &PipelineConfig,
    fix: bool,
    jobs: usize,
    mut sink: impl Write,
) -> anyhow::Result<LintSummary> {
    let results = run_pool(entries, jobs, |entry| -> Result<UttLint, String> {
        let run = || -> anyhow::Result<UttLint> {
            let score = load_score(entry)?;
            let audio = load_audio(entry, config.sample_rate_hz)?;
            let alignment = load_alignment(entry)?;
            let issues = detect_issues(
                &score,
                alignment.as_ref(),
                Some(audio.duration_sec()),
                &config.lint,
            );
            let fixed = if fix {
                let (corrected, _log) = auto_correct(
                    &score,
                    alignment.as_ref(),
                    Some(audio.duration_sec()),
                    &config.lint,
                )?;
                let mut path = entry.score.clone();
                path.set_extension("fixed.json");
                Some((path, serialize_score(&corrected)))
            } else {
                None
            };
            Ok(UttLint { issues, fixed })
        };
        run().map_err(|e| format!("{e:#}"))
    });

    let mut summary = LintSummary {
        errors: 0,
        warnings: 0,
        failures: 0,
    };
    for (entry, result) in entries.iter().zip(results) {
        match result {
            Ok(lint) => {
                for issue in &lint.issues {
                    match issue.severity {
                        Severity::Error => summary.errors += 1,
                        Severity::Warning => summary.warnings += 1,
                    }
                    let line = serde_json::to_string(&IssueLine {
                        utt_id: &entry.utt_id,
                        issue,
                    })?;
                    writeln!(sink, "{line}")?;
                }
                if let Some((path, text)) = lint.fixed {
                    write_atomic(&path, text.as_bytes())?;
                }
            }
            Err(message) => {
                summary.failures += 1;
                eprintln!("error: {}: {message}", entry.utt_id);
            }
        }
    }
    Ok(summary)
}

impl LintSummary {
    /// Exit-code contract: 4 when any utterance failed to process, 3 when
    /// error-severity issues were found, 0 otherwise (warnings included).
    pub fn exit_code(&self) -> i32 {
        if self.failures > 0 {
            4
        } else if self.errors > 0 {
            3
        } else {
            0
        }
    }
}
