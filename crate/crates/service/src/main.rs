use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context};
use clap::{Parser, Subcommand};
use tracing_subscriber::EnvFilter;

use tutorbots_core::metrics::Evaluator;
use tutorbots_service::analysis::{self, TopicQuery};
use tutorbots_service::config::ServiceConfig;
use tutorbots_service::eval::eval_batch_files;
use tutorbots_service::eventlog::{read_log_file, replay_state, EventLog};
use tutorbots_service::import::import_transcripts;
use tutorbots_service::store::interaction_events;

#[derive(Parser)]
#[command(name = "tutorbots", version, about = "Multi-role tutoring chatbot service")]
struct Cli {
    /// TOML config file; TUTORBOTS_* environment variables override it.
    #[arg(long, short, global = true, env = "TUTORBOTS_CONFIG")]
    config: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the HTTP API.
    Serve,
    /// Score a JSON-lines Q&A dataset.
    Eval {
        dataset: PathBuf,
        #[arg(long)]
        rubric: Option<PathBuf>,
        /// Abort on the first malformed line instead of skipping it.
        #[arg(long)]
        strict: bool,
        /// Write report.json, pairs.csv and levels.csv here instead of
        /// printing the JSON report.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Export sequence plot data (CSV) and the transition matrix (JSON).
    AnalyzeSequences {
        /// Event log; defaults to the configured data directory.
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        matrix: Option<PathBuf>,
    },
    /// Fit an LDA topic model over logged student messages.
    AnalyzeTopics {
        #[arg(long)]
        log: Option<PathBuf>,
        #[arg(short, long, default_value_t = 5)]
        k: usize,
        #[arg(long, default_value_t = 500)]
        iterations: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 10)]
        top: usize,
    },
    /// Replay the event log and report its integrity.
    ReplayCheck {
        #[arg(long)]
        log: Option<PathBuf>,
    },
    /// Append externally produced transcripts (JSON lines) to the event log.
    /// Run it while the server is stopped.
    ImportTranscripts {
        input: PathBuf,
        #[arg(long)]
        log: Option<PathBuf>,
    },
}

fn log_path(config: &ServiceConfig, explicit: Option<PathBuf>) -> PathBuf {
    explicit.unwrap_or_else(|| config.log_path())
}

fn write_or_print(out: Option<&Path>, content: &str) -> anyhow::Result<()> {
    match out {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            print!("{content}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> anyhow::Result<()> {
    let config = ServiceConfig::load(cli.config.as_deref())?;
    match cli.command {
        Command::Serve => {
            let runtime = tokio::runtime::Runtime::new()?;
            runtime.block_on(tutorbots_service::serve(config))?;
        }
        Command::Eval {
            dataset,
            rubric,
            strict,
            out,
        } => {
            let evaluator = Evaluator::shipped().with_constants(config.metrics.clone());
            let report = eval_batch_files(&evaluator, &dataset, rubric.as_deref(), strict)?;
            for s in &report.skipped {
                eprintln!("skipped {} line {}: {}", s.source, s.line, s.error);
            }
            let json = serde_json::to_string_pretty(&report)?;
            match out {
                Some(dir) => {
                    fs::create_dir_all(&dir)?;
                    fs::write(dir.join("report.json"), json + "\n")?;
                    fs::write(dir.join("pairs.csv"), report.pairs_csv())?;
                    fs::write(dir.join("levels.csv"), report.levels_csv())?;
                }
                None => println!("{json}"),
            }
        }
        Command::AnalyzeSequences { log, out, matrix } => {
            let records = read_log_file(&log_path(&config, log))?;
            let state = replay_state(&records)?;
            let events = interaction_events(state.sessions.values(), state.clicks);
            write_or_print(out.as_deref(), &analysis::sequence_plot(&events))?;
            if let Some(path) = matrix {
                let m = analysis::transitions(&events)?;
                fs::write(&path, serde_json::to_string_pretty(&m)? + "\n")?;
            }
        }
        Command::AnalyzeTopics {
            log,
            k,
            iterations,
            seed,
            top,
        } => {
            let records = read_log_file(&log_path(&config, log))?;
            let sessions = replay_state(&records)?.sessions;
            let docs = analysis::student_documents(sessions.values());
            let report = analysis::topic_report(&docs, TopicQuery { k, iterations, seed, top })?;
            println!("{}", serde_json::to_string_pretty(&report)?);
        }
        Command::ReplayCheck { log } => {
            let path = log_path(&config, log);
            if !path.exists() {
                bail!("no event log at {}", path.display());
            }
            let records = read_log_file(&path)?;
            let state = replay_state(&records)?;
            let messages: usize = state.sessions.values().map(|s| s.len()).sum();
            println!(
                "ok: {} records, {} sessions, {} messages, {} page clicks",
                records.len(),
                state.sessions.len(),
                messages,
                state.clicks.len()
            );
        }
        Command::ImportTranscripts { input, log } => {
            let raw = fs::read_to_string(&input).with_context(|| format!("reading {}", input.display()))?;
            let (log, existing) = EventLog::open(log_path(&config, log))?;
            let written = import_transcripts(&log, &existing, &raw)?;
            println!("appended {} records to {}", written.len(), log.path().display());
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    tracing_subscriber::fmt()
        .with_env_filter(EnvFilter::try_from_default_env().unwrap_or_else(|_| EnvFilter::new("info")))
        .with_writer(std::io::stderr)
        .init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
