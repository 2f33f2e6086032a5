use std::ffi::OsString;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};

mod commands;
mod failure;

use failure::Failure;

/// Synthetic aphasic Cat Rescue transcripts: generate, score, analyze, split, compare.
#[derive(Debug, Parser)]
#[command(name = "aphasynth", version, about)]
struct Cli {
    /// TOML configuration file. Built-in defaults are used when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    config: Option<PathBuf>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate the procedural corpus as `<out>.jsonl`.
    GenProc {
        #[arg(long, value_name = "STEM")]
        out: PathBuf,
        /// Master seed (overrides the config).
        #[arg(long)]
        seed: Option<u64>,
        /// Records per severity (overrides the config).
        #[arg(long, value_name = "N")]
        per_severity: Option<usize>,
    },
    /// Generate transcripts through a chat-completions endpoint.
    ///
    /// Writes `<out>.jsonl`, `<out>.csv` and `<out>.skipped.jsonl`. The bearer
    /// token is read from APHASYNTH_API_KEY.
    GenLlm {
        #[arg(long, value_name = "STEM")]
        out: PathBuf,
        /// Completions per template.
        #[arg(long, value_name = "N")]
        repeats: Option<u32>,
        /// Base URL, e.g. http://localhost:8000/v1
        #[arg(long, value_name = "URL")]
        endpoint_url: Option<String>,
        #[arg(long, value_name = "NAME")]
        model: Option<String>,
    },
    /// Recompute CIU fields of a JSONL corpus; writes `<out>.jsonl` and `<out>.csv`.
    Score {
        #[arg(long = "in", value_name = "JSONL")]
        input: PathBuf,
        #[arg(long, value_name = "STEM")]
        out: PathBuf,
    },
    /// Per-severity lexical means and the average-of-means row.
    Analyze {
        #[arg(long = "in", value_name = "JSONL")]
        input: PathBuf,
        /// Summary CSV to write; the table also goes to stdout.
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
        /// NDW-ER50 sampling trials.
        #[arg(long, value_name = "N")]
        trials: Option<usize>,
        /// Seed for NDW-ER50 sampling.
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Stratified train/val/test split into `<out>.{train,val,test}.jsonl`.
    Split {
        #[arg(long = "in", value_name = "JSONL")]
        input: PathBuf,
        #[arg(long, value_name = "STEM")]
        out: PathBuf,
        /// Train, validation and test fractions.
        #[arg(long, value_name = "A,B,C", default_value = "0.8,0.1,0.1")]
        fractions: String,
        /// Split seed.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Compare analyzed summaries against the aphasic baseline.
    Compare {
        /// Summary CSVs written by `analyze`.
        #[arg(value_name = "SUMMARY")]
        summaries: Vec<PathBuf>,
        /// Report CSV to write; the table also goes to stdout.
        #[arg(long, value_name = "CSV")]
        out: PathBuf,
    },
}

fn run(args: impl IntoIterator<Item = OsString>) -> Result<(), Failure> {
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return Err(Failure::silent(code));
        }
    };
    let settings = commands::load_settings(cli.config.as_deref())?;
    match cli.command {
        Command::GenProc {
            out,
            seed,
            per_severity,
        } => commands::gen_proc(settings, &out, seed, per_severity),
        Command::GenLlm {
            out,
            repeats,
            endpoint_url,
            model,
        } => commands::gen_llm(settings, &out, repeats, endpoint_url, model),
        Command::Score { input, out } => commands::score(&settings, &input, &out),
        Command::Analyze {
            input,
            out,
            trials,
            seed,
        } => commands::analyze(settings, &input, &out, trials, seed),
        Command::Split {
            input,
            out,
            fractions,
            seed,
        } => commands::split(&input, &out, &fractions, seed),
        Command::Compare { summaries, out } => commands::compare(&summaries, &out),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn"))
        .format_timestamp(None)
        .init();
    match run(std::env::args_os()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            if let Some(msg) = &f.message {
                eprintln!("aphasynth: {msg}");
            }
            ExitCode::from(f.code)
        }
    }
}
