//! Corpus manifests: JSON lines, one utterance per line, with paths
//! resolved relative to the manifest file.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use anyhow::Context;
use serde::{Deserialize, Serialize};

use muskit_score::Language;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ScoreFormat {
    MusicXml,
    Midi,
    Canonical,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ManifestEntry {
    pub utt_id: String,
    pub audio: PathBuf,
    pub score: PathBuf,
    pub score_format: ScoreFormat,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alignment: Option<PathBuf>,
    pub singer: String,
    pub language: Language,
}

/// Reads a JSON-lines manifest and rejects duplicate utterance ids.
/// Relative paths are resolved against the manifest's directory.
pub fn read_manifest(path: &Path) -> anyhow::Result<Vec<ManifestEntry>> {
    let text = std::fs::read_to_string(path)
        .with_context(|| format!("reading manifest {}", path.display()))?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    let mut seen = BTreeSet::new();
    let mut entries = Vec::new();
    for (line_no, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut entry: ManifestEntry = serde_json::from_str(line)
            .with_context(|| format!("manifest line {}", line_no + 1))?;
        if !seen.insert(entry.utt_id.clone()) {
            anyhow::bail!(
                "manifest line {}: duplicate utt_id '{}'",
                line_no + 1,
                entry.utt_id
            );
        }
        entry.audio = resolve(base, &entry.audio);
        entry.score = resolve(base, &entry.score);
        entry.alignment = entry.alignment.map(|p| resolve(base, &p));
        entries.push(entry);
    }
    Ok(entries)
}

fn resolve(base: &Path, path: &Path) -> PathBuf {
    if path.is_absolute() {
        path.to_path_buf()
    } else {
        base.join(path)
    }
}
