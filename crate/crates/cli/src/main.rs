//! `inkfatigue` command-line front end: synthesize or ingest a corpus,
//! extract features, compare sets and render reports.
//!
//! Exit codes: 0 success, 1 data error, 2 usage error.

mod config;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};

use inkfatigue::ink::{load_corpus, validate_corpus, write_corpus};
use inkfatigue::protocol::{published_table2, summarize_recovery};
use inkfatigue::report;
use inkfatigue::stats::{build_matrix, ComparisonMatrix, FeatureTable};
use inkfatigue::synth::{generate_corpus, SynthProfile};

use config::{Format, RunConfig, Settings};

pub enum CliError {
    Usage(String),
    Data(anyhow::Error),
}

impl From<anyhow::Error> for CliError {
    fn from(e: anyhow::Error) -> Self {
        CliError::Data(e)
    }
}

impl From<inkfatigue::Error> for CliError {
    fn from(e: inkfatigue::Error) -> Self {
        CliError::Data(e.into())
    }
}

pub type CliResult<T> = Result<T, CliError>;

#[derive(Parser)]
#[command(
    name = "inkfatigue",
    version,
    about = "Handwriting features and set comparisons for fatigue studies"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check every file of a corpus and report problems by file and line.
    Validate {
        #[arg(long)]
        corpus: PathBuf,
    },
    /// Write the feature table of a corpus.
    Extract(Settings),
    /// Test every (task, feature) row across set pairs and summarize recovery.
    Compare(Settings),
    /// Generate a synthetic corpus.
    Synth {
        /// Profile of `key = value` lines [default: built-in profile].
        #[arg(long)]
        profile: Option<PathBuf>,
        /// Output directory [default: $INKFATIGUE_OUT, else ./inkfatigue-out].
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Render a saved matrix or the published table to stdout.
    Report {
        /// matrix.json written by `compare`.
        #[arg(
            long,
            required_unless_present = "published_table2",
            conflicts_with = "published_table2"
        )]
        matrix: Option<PathBuf>,
        /// Render the published p-values instead of a computed matrix.
        #[arg(long)]
        published_table2: bool,
        /// Re-mask at this significance level [default: the matrix's own].
        #[arg(long)]
        alpha: Option<f64>,
        #[arg(long, value_enum, default_value = "markdown")]
        format: Format,
    },
}

fn write_file(dir: &Path, name: &str, contents: &str) -> CliResult<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join(name);
    fs::write(&path, contents).with_context(|| format!("writing {}", path.display()))?;
    eprintln!("wrote {}", path.display());
    Ok(())
}

fn validate(corpus: &Path) -> CliResult<()> {
    if !corpus.is_dir() {
        return Err(anyhow::anyhow!("corpus directory {} does not exist", corpus.display()).into());
    }
    let diagnostics = validate_corpus(corpus)?;
    if !diagnostics.is_empty() {
        for d in &diagnostics {
            eprintln!("{d}");
        }
        return Err(anyhow::anyhow!("{} problem(s) found", diagnostics.len()).into());
    }
    let (corpus_data, gaps) = load_corpus(corpus)?;
    if corpus_data.is_empty() {
        eprintln!("warning: no task files under {}", corpus.display());
        return Ok(());
    }
    for key in &gaps.missing {
        eprintln!("warning: missing {}/{}/task{}", key.subject, key.set, key.task);
    }
    println!(
        "ok: {} records from {} subjects, {} missing",
        corpus_data.len(),
        corpus_data.subjects().len(),
        gaps.missing.len()
    );
    Ok(())
}

fn load_table(config: &RunConfig) -> CliResult<FeatureTable> {
    let (corpus, _) = load_corpus(config.corpus()?)?;
    if corpus.is_empty() {
        return Err(anyhow::anyhow!("corpus is empty").into());
    }
    let table = FeatureTable::from_corpus(&corpus, &config.catalog);
    for (key, message) in table.failures() {
        eprintln!(
            "warning: {}/{}/task{}: {message}; features set to NA",
            key.subject, key.set, key.task
        );
    }
    Ok(table)
}

fn extract(settings: Settings) -> CliResult<()> {
    let config = RunConfig::resolve(settings)?;
    let (name, text): (_, fn(&FeatureTable, bool) -> String) = match config.format {
        Format::Tsv => ("features.tsv", report::feature_table_tsv),
        Format::Json => ("features.json", report::feature_table_json),
        Format::Markdown => {
            return Err(CliError::Usage("extract supports --format tsv or json".into()));
        }
    };
    let table = load_table(&config)?;
    write_file(&config.out, name, &text(&table, config.per_second))
}

fn compare(settings: Settings) -> CliResult<()> {
    let config = RunConfig::resolve(settings)?;
    let rows = config.matrix_rows()?;
    let table = load_table(&config)?;
    let matrix = build_matrix(&table, &rows, &config.pairs, config.options, config.alpha)?;
    match config.format {
        Format::Tsv => write_file(&config.out, "matrix.tsv", &report::matrix_tsv(&matrix))?,
        Format::Json => write_file(&config.out, "matrix.json", &report::matrix_json(&matrix))?,
        Format::Markdown => write_file(&config.out, "matrix.md", &report::matrix_markdown(&matrix))?,
    }
    write_file(&config.out, "mask.tsv", &report::mask_tsv(&matrix))?;
    let summary = summarize_recovery(&matrix, config.alpha);
    let json = serde_json::to_string_pretty(&summary).context("serializing recovery summary")?;
    write_file(&config.out, "recovery.json", &(json + "\n"))?;
    let text = summary.to_text();
    write_file(&config.out, "recovery.txt", &text)?;
    print!("{text}");
    Ok(())
}

fn synth(profile: Option<PathBuf>, out: Option<PathBuf>) -> CliResult<()> {
    let profile = match profile {
        Some(path) => {
            let text = fs::read_to_string(&path).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?;
            SynthProfile::parse(&text).map_err(|e| CliError::Usage(format!("{}: {e}", path.display())))?
        }
        None => SynthProfile::default(),
    };
    let out = out
        .or_else(|| {
            std::env::var_os(config::OUT_ENV)
                .filter(|v| !v.is_empty())
                .map(PathBuf::from)
        })
        .unwrap_or_else(|| PathBuf::from(config::DEFAULT_OUT));
    let corpus = generate_corpus(&profile)?;
    write_corpus(&corpus, &out)?;
    eprintln!("wrote {} records to {}", corpus.len(), out.display());
    Ok(())
}

fn render(matrix: Option<PathBuf>, alpha: Option<f64>, format: Format) -> CliResult<()> {
    let mut matrix: ComparisonMatrix = match matrix {
        Some(path) => {
            let text = fs::read_to_string(&path).with_context(|| format!("reading {}", path.display()))?;
            report::matrix_from_json(&text).with_context(|| path.display().to_string())?
        }
        None => published_table2(),
    };
    if let Some(alpha) = alpha {
        if !(alpha > 0.0 && alpha < 1.0) {
            return Err(CliError::Usage(format!("alpha {alpha} must lie in (0, 1)")));
        }
        matrix.alpha = alpha;
    }
    let text = match format {
        Format::Tsv => report::matrix_tsv(&matrix),
        Format::Json => report::matrix_json(&matrix),
        Format::Markdown => report::matrix_markdown(&matrix),
    };
    print!("{text}");
    Ok(())
}

fn run(cli: Cli) -> CliResult<()> {
    match cli.command {
        Command::Validate { corpus } => validate(&corpus),
        Command::Extract(settings) => extract(settings),
        Command::Compare(settings) => compare(settings),
        Command::Synth { profile, out } => synth(profile, out),
        Command::Report {
            matrix,
            published_table2: _,
            alpha,
            format,
        } => render(matrix, alpha, format),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Data(e)) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
        Err(CliError::Usage(message)) => {
            eprintln!("usage error: {message}");
            ExitCode::from(2)
        }
    }
}
