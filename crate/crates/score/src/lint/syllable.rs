//! Rule-based lyric syllabification, pluggable per language.

use serde::{Deserialize, Serialize};

use crate::model::Language;

/// Deterministic syllable-splitting rule.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Syllabifier {
    /// One syllable per non-whitespace character (zh, jp, kr).
    Char,
    /// Whitespace-separated units (en).
    Whitespace,
    /// No syllabification; counting checks that need it are skipped.
    None,
}

impl Syllabifier {
    pub fn default_for(language: Language) -> Self {
        match language {
            Language::Zh | Language::Jp | Language::Kr => Syllabifier::Char,
            Language::En | Language::Other => Syllabifier::Whitespace,
        }
    }

    pub fn split(&self, lyric: &str) -> Vec<String> {
        match self {
            Syllabifier::Char => lyric
                .chars()
                .filter(|c| !c.is_whitespace())
                .map(String::from)
                .collect(),
            Syllabifier::Whitespace => lyric.split_whitespace().map(String::from).collect(),
            Syllabifier::None => {
                if lyric.trim().is_empty() {
                    Vec::new()
                } else {
                    vec![lyric.trim().to_string()]
                }
            }
        }
    }

    /// Separator used when joining per-note lyrics before counting.
    pub fn joiner(&self) -> &'static str {
        match self {
            Syllabifier::Char => "",
            Syllabifier::Whitespace => " ",
            Syllabifier::None => " ",
        }
    }
}

/// Splits a lyric into syllables with the language's default rule.
pub fn syllabify(lyric: &str, language: Language) -> Vec<String> {
    Syllabifier::default_for(language).split(lyric)
}
