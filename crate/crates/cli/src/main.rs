use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use sumtrace_cli::analyze::DEFAULT_BINS;
use sumtrace_cli::config::load_config;
use sumtrace_cli::summarize::Matrix;
use sumtrace_cli::{analyze, audit, export, ingest, summarize, CliError, Outcome, Workdir};
use sumtrace_core::audit::StatsFilter;
use sumtrace_gateway::{Gateway, Mode, PromptKind};

#[derive(Parser)]
#[command(name = "sumtrace", version, about = "Summary extractiveness and numeric analysis pipeline")]
struct Cli {
    /// Gateway and run configuration (TOML).
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Shuffle seed; repeat for several shuffled variants.
    #[arg(long = "seed", global = true)]
    seeds: Vec<u64>,
    /// Position histogram bins.
    #[arg(long, global = true, default_value_t = DEFAULT_BINS)]
    bins: usize,
    #[arg(long, global = true, default_value = "replay", value_parser = parse_mode)]
    mode: Mode,
    /// Run directory holding every stage's artifacts.
    #[arg(long, global = true, default_value = "run")]
    work: PathBuf,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Parse a directory of filing JSON files and write shuffled variants.
    Ingest { corpus: PathBuf },
    /// Summarize every ingested document under the model/prompt matrix.
    Summarize {
        #[arg(long = "model")]
        models: Vec<String>,
        #[arg(long = "prompt", value_parser = parse_prompt)]
        prompts: Vec<PromptKind>,
        /// Fail oversized documents instead of truncating them.
        #[arg(long)]
        no_truncate: bool,
    },
    /// Extractiveness, numeric and position tables for the summaries.
    Analyze,
    #[command(subcommand)]
    Audit(AuditCommand),
    /// Copy analysis outputs and the manifest elsewhere.
    Export {
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Subcommand)]
enum AuditCommand {
    /// Build the annotation task queue.
    Init {
        /// Restrict the queue to this many filings.
        #[arg(long)]
        sample: Option<usize>,
        #[arg(long, default_value_t = 0)]
        sample_seed: u64,
    },
    /// Hallucination rates from the annotation store.
    Stats {
        #[arg(long)]
        model: Option<String>,
        #[arg(long)]
        prompt: Option<String>,
    },
}

fn parse_mode(s: &str) -> Result<Mode, String> {
    Mode::parse(s).ok_or_else(|| format!("unknown mode {s}; expected live, record or replay"))
}

fn parse_prompt(s: &str) -> Result<PromptKind, String> {
    PromptKind::parse(s).ok_or_else(|| format!("unknown prompt {s}"))
}

fn run(cli: Cli) -> Result<Outcome, CliError> {
    let work = Workdir::new(&cli.work);
    let config = cli.config.as_deref().map(load_config).transpose()?;
    let run_config = config.as_ref().map(|(_, r)| r.clone()).unwrap_or_default();
    let seeds = if cli.seeds.is_empty() { run_config.seeds.clone() } else { cli.seeds.clone() };
    match cli.command {
        Command::Ingest { corpus } => {
            let (report, outcome) = ingest::ingest(&corpus, &work, &seeds)?;
            println!(
                "ingested {} documents, {} shuffled variants, {} errors",
                report.documents.len(),
                report.shuffled,
                report.errors.len()
            );
            Ok(outcome)
        }
        Command::Summarize { models, prompts, no_truncate } => {
            let Some((gateway_config, _)) = config else {
                return Err(CliError::Fatal("summarize needs --config".into()));
            };
            let matrix = Matrix {
                models: if models.is_empty() { run_config.models } else { models },
                prompts: if prompts.is_empty() { run_config.prompts } else { prompts },
                seeds,
            };
            if matrix.models.is_empty() || matrix.prompts.is_empty() {
                return Err(CliError::Fatal("no models or prompts selected".into()));
            }
            let mut gateway = Gateway::new(gateway_config).map_err(|e| CliError::Fatal(e.to_string()))?;
            gateway.truncate = !no_truncate;
            let (records, outcome) = summarize::summarize(&work, &gateway, &matrix, cli.mode)?;
            println!("{} summaries, {} failed", records.len(), outcome.failures);
            Ok(outcome)
        }
        Command::Analyze => {
            let (analyses, outcome) = analyze::analyze(&work, cli.bins)?;
            println!("analyzed {} summaries, {} skipped", analyses.len(), outcome.failures);
            Ok(outcome)
        }
        Command::Audit(AuditCommand::Init { sample, sample_seed }) => {
            let (tasks, outcome) = audit::init(&work, sample, sample_seed)?;
            println!("{} annotation tasks", tasks.len());
            Ok(outcome)
        }
        Command::Audit(AuditCommand::Stats { model, prompt }) => {
            print!("{}", audit::stats(&work, &StatsFilter { model, prompt })?);
            Ok(Outcome::default())
        }
        Command::Export { out } => {
            let files = export::export(&work, &out)?;
            println!("exported {} files to {}", files.len(), out.display());
            Ok(Outcome::default())
        }
    }
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(tracing_subscriber::EnvFilter::try_from_default_env().unwrap_or_else(|_| "warn".into()))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(outcome) => ExitCode::from(outcome.exit_code()),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
