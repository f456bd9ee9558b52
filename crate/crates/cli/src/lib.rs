//! Library surface of the pipeline front end, shared by the `muskit`
//! binary and the integration test suite.

pub mod config;
pub mod evaluate_cmd;
pub mod lint_cmd;
pub mod manifest;
pub mod prepare;
pub mod tokenize_cmd;
pub mod util;

pub use config::{PipelineConfig, TokenizerConfig};
pub use evaluate_cmd::{cmd_evaluate, CorpusReport, EvaluateSummary};
pub use lint_cmd::{cmd_lint, LintSummary};
pub use manifest::{read_manifest, ManifestEntry, ScoreFormat};
pub use prepare::{cmd_prepare, read_dataset_index, DatasetIndex, PrepareSummary, SegmentEntry};
pub use tokenize_cmd::{cmd_tokenize, cmd_train_tokenizer, TokenizerMode};
