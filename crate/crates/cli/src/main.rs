use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use muskit_cli::{
    cmd_evaluate, cmd_lint, cmd_prepare, cmd_tokenize, cmd_train_tokenizer, read_manifest,
    PipelineConfig, TokenizerMode,
};

/// Singing voice corpus toolkit: score parsing and repair, feature and
/// token extraction, and objective evaluation.
#[derive(Parser)]
#[command(name = "muskit", version, about)]
struct Cli {
    /// Pipeline configuration file (JSON); defaults apply when omitted.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Worker threads for per-utterance work.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    /// Overrides the tokenizer seed from the config.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse, repair, resample, segment and featurize a corpus.
    Prepare {
        /// JSON-lines corpus manifest.
        #[arg(long)]
        manifest: PathBuf,
        /// Dataset output directory.
        #[arg(long)]
        out: PathBuf,
    },
    /// Detect annotation issues; emits JSON lines on stdout.
    Lint {
        #[arg(long)]
        manifest: PathBuf,
        /// Also write auto-corrected scores as `<score>.fixed.json`.
        #[arg(long)]
        fix: bool,
    },
    /// Train a token codebook on a prepared dataset.
    TrainTokenizer {
        /// Prepared dataset directory (from `prepare`).
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long, value_enum)]
        mode: TokenizerMode,
        /// Codebook output path (default `<dataset>/tokenizer_<mode>.mkcb`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Tokenize a prepared dataset with a trained codebook.
    Tokenize {
        #[arg(long)]
        dataset: PathBuf,
        #[arg(long)]
        codebook: PathBuf,
        /// Token file output path (default `<dataset>/tokens_<stem>.txt`).
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Score synthesized audio against references with matching stems.
    Evaluate {
        /// Directory of reference WAV files.
        #[arg(long = "ref")]
        ref_dir: PathBuf,
        /// Directory of synthesized WAV files.
        #[arg(long = "hyp")]
        hyp_dir: PathBuf,
        /// Report output directory (default current directory).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Perceptual scoring endpoint; MUSKIT_MOS_ENDPOINT also works.
        #[arg(long)]
        mos_endpoint: Option<String>,
    },
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<u8> {
    let config = PipelineConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Prepare { manifest, out } => {
            let entries = read_manifest(&manifest)?;
            let summary = cmd_prepare(&entries, &config, &out, cli.jobs)?;
            println!(
                "prepared {} segments from {} utterances into {} ({} failed)",
                summary.segments,
                entries.len(),
                out.display(),
                summary.failures
            );
            Ok(if summary.failures > 0 { 4 } else { 0 })
        }
        Command::Lint { manifest, fix } => {
            let entries = read_manifest(&manifest)?;
            let summary = cmd_lint(&entries, &config, fix, cli.jobs, std::io::stdout().lock())?;
            eprintln!(
                "{} errors, {} warnings across {} utterances ({} failed to process)",
                summary.errors,
                summary.warnings,
                entries.len(),
                summary.failures
            );
            Ok(summary.exit_code() as u8)
        }
        Command::TrainTokenizer { dataset, mode, out } => {
            let path = cmd_train_tokenizer(&dataset, mode, out, &config, cli.seed)?;
            println!("wrote codebook {}", path.display());
            Ok(0)
        }
        Command::Tokenize {
            dataset,
            codebook,
            out,
        } => {
            let path = cmd_tokenize(&dataset, &codebook, out)?;
            println!("wrote tokens {}", path.display());
            Ok(0)
        }
        Command::Evaluate {
            ref_dir,
            hyp_dir,
            out,
            mos_endpoint,
        } => {
            let endpoint = mos_endpoint.or_else(|| std::env::var("MUSKIT_MOS_ENDPOINT").ok());
            let out_dir = out.unwrap_or_else(|| PathBuf::from("."));
            let summary = cmd_evaluate(
                &ref_dir,
                &hyp_dir,
                &out_dir,
                &config,
                endpoint.as_deref(),
                cli.jobs,
            )?;
            println!(
                "evaluated {} pairs; report at {}",
                summary.pairs,
                summary.report_json.display()
            );
            Ok(if summary.pairs > 0 { 0 } else { 4 })
        }
    }
}
