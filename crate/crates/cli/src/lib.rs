//! Command-line front end: `validate`, `augment`, `evaluate` and `report`.
//!
//! Exit status is 0 on success, 1 when the corpus has violations or a
//! pipeline failed, and 2 for usage and I/O errors.

pub mod config;
pub mod evaluate;
pub mod fsutil;

use std::io::Write as _;
use std::path::{Path, PathBuf};

use anyhow::{Context, Result};
use augeval_core::corpus::{lint_conllu, Severity};
use augeval_core::report::{render, Format};
use clap::{Args, Parser, Subcommand};

use config::{RunArgs, RunConfig};
use evaluate::{augment_all, build_report, conditions, load_corpus, run_evaluation, write_outputs, ScoresFile};
use fsutil::write_atomic;

pub const EXIT_OK: i32 = 0;
pub const EXIT_FAILURES: i32 = 1;
pub const EXIT_USAGE: i32 = 2;

#[derive(Debug, Parser)]
#[command(name = "augeval", version, about = "Robustness evaluation of NLP pipelines on augmented gold corpora")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Check a CoNLL-U corpus and list every violation.
    Validate {
        corpus: PathBuf,
    },
    /// Write augmented corpora, one file per augmenter and repetition.
    Augment(RunArgs),
    /// Augment, run every pipeline, score, test and write the reports.
    Evaluate(RunArgs),
    /// Recompute statistics from a scores file and render a report.
    Report(ReportArgs),
}

#[derive(Debug, Clone, Args)]
pub struct ReportArgs {
    /// `scores.json` written by `evaluate`.
    #[arg(long)]
    pub scores: PathBuf,
    /// markdown, csv or json.
    #[arg(long, default_value = "markdown")]
    pub format: String,
    /// Output file; standard output by default.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub bootstrap_iterations: Option<usize>,
    #[arg(long)]
    pub bonferroni_m: Option<usize>,
}

pub fn run(cli: Cli) -> i32 {
    let outcome = match cli.command {
        Command::Validate { corpus } => cmd_validate(&corpus),
        Command::Augment(args) => RunConfig::from_args(&args).and_then(|cfg| cmd_augment(&cfg)).map(|_| EXIT_OK),
        Command::Evaluate(args) => RunConfig::from_args(&args).and_then(|cfg| cmd_evaluate(&cfg)),
        Command::Report(args) => cmd_report(&args).map(|_| EXIT_OK),
    };
    match outcome {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            EXIT_USAGE
        }
    }
}

pub fn cmd_validate(path: &Path) -> Result<i32> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let violations = lint_conllu(std::io::BufReader::new(file)).with_context(|| format!("reading {}", path.display()))?;
    let mut out = std::io::stdout().lock();
    for v in &violations {
        writeln!(out, "{v}")?;
    }
    let errors = violations.iter().filter(|v| v.severity == Severity::Error).count();
    eprintln!("{}: {} error(s), {} warning(s)", path.display(), errors, violations.len() - errors);
    Ok(if errors == 0 { EXIT_OK } else { EXIT_FAILURES })
}

/// Writes `<output_dir>/<augmenter>/rep-NN.conllu`. Everything is computed
/// before the first file is written.
pub fn cmd_augment(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let corpus = load_corpus(&cfg.corpus)?;
    let conds: Vec<_> = conditions(&cfg.augmenters).into_iter().filter(|a| cfg.augmenters.iter().any(|b| b.name() == a.name())).collect();
    let augmented = augment_all(cfg, &corpus, &conds)?;
    let mut written = Vec::new();
    for reps in &augmented {
        for aug in reps {
            let path = cfg.output_dir.join(aug.augmenter.name()).join(format!("rep-{:02}.conllu", aug.rep));
            write_atomic(&path, aug.to_conllu().as_bytes())?;
            written.push(path);
        }
    }
    eprintln!("wrote {} corpora under {}", written.len(), cfg.output_dir.display());
    Ok(written)
}

pub fn cmd_evaluate(cfg: &RunConfig) -> Result<i32> {
    let scores = run_evaluation(cfg)?;
    let report = build_report(&scores)?;
    write_outputs(&cfg.output_dir, &scores, &report)?;
    for p in &scores.pipelines {
        for (condition, msg) in &p.failures {
            eprintln!("pipeline {} failed on {condition}: {msg}", p.name);
        }
    }
    Ok(if scores.has_failures() { EXIT_FAILURES } else { EXIT_OK })
}

pub fn cmd_report(args: &ReportArgs) -> Result<()> {
    let format: Format = args.format.parse()?;
    let text = std::fs::read_to_string(&args.scores).with_context(|| format!("reading {}", args.scores.display()))?;
    let mut scores: ScoresFile = serde_json::from_str(&text).with_context(|| format!("parsing {}", args.scores.display()))?;
    if let Some(a) = args.alpha {
        scores.metadata.alpha = a;
    }
    if let Some(n) = args.bootstrap_iterations {
        scores.metadata.bootstrap_iterations = n;
    }
    if args.bonferroni_m.is_some() {
        scores.metadata.bonferroni_m = args.bonferroni_m;
    }
    let rendered = render(&build_report(&scores)?, format)?;
    match &args.output {
        Some(path) => write_atomic(path, rendered.as_bytes()),
        None => {
            std::io::stdout().lock().write_all(rendered.as_bytes())?;
            Ok(())
        }
    }
}
