//! Run configuration: a JSON file, overridden field by field by flags.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use augeval_core::augment::{default_suite, AugmentResources, Augmenter, DEFAULT_REPETITIONS};
use augeval_core::resources::{KeyboardLayout, NameLexicon};
use augeval_core::stats::{DEFAULT_ALPHA, DEFAULT_BOOTSTRAP_ITERATIONS, MIN_BOOTSTRAP_ITERATIONS};
use clap::Args;
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub corpus: PathBuf,
    /// Pipeline registry; needed by `evaluate` only.
    #[serde(default)]
    pub pipelines: Option<PathBuf>,
    #[serde(default = "default_suite")]
    pub augmenters: Vec<Augmenter>,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub base_seed: u64,
    pub output_dir: PathBuf,
    #[serde(default)]
    pub lexicon: Option<PathBuf>,
    #[serde(default)]
    pub layout: Option<PathBuf>,
    #[serde(default)]
    pub exclude_punct: bool,
    #[serde(default = "default_alpha")]
    pub alpha: f64,
    #[serde(default = "default_iterations")]
    pub bootstrap_iterations: usize,
    /// Fixed Bonferroni comparison count; by default the number of
    /// conditions compared per pipeline and metric.
    #[serde(default)]
    pub bonferroni_m: Option<usize>,
    #[serde(default)]
    pub workers: Option<usize>,
}

fn default_k() -> usize {
    DEFAULT_REPETITIONS
}

fn default_alpha() -> f64 {
    DEFAULT_ALPHA
}

fn default_iterations() -> usize {
    DEFAULT_BOOTSTRAP_ITERATIONS
}

/// Flags shared by `augment` and `evaluate`; each one overrides the
/// corresponding field of `--config`.
#[derive(Debug, Clone, Default, Args)]
pub struct RunArgs {
    /// JSON run configuration; relative paths in it resolve against its directory.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub corpus: Option<PathBuf>,
    /// Pipeline registry (JSON).
    #[arg(long)]
    pub pipelines: Option<PathBuf>,
    /// Augmenter by canonical name, e.g. `keystroke-0.05` or `names-female`; repeatable.
    #[arg(long = "augmenter", value_name = "NAME")]
    pub augmenters: Vec<String>,
    /// Repetitions per stochastic augmenter.
    #[arg(short, long)]
    pub k: Option<usize>,
    #[arg(long = "seed")]
    pub base_seed: Option<u64>,
    #[arg(long)]
    pub output_dir: Option<PathBuf>,
    /// Name lexicon TSV (kind, mode, name, gender).
    #[arg(long)]
    pub lexicon: Option<PathBuf>,
    /// Keyboard layout TSV (key, neighbours).
    #[arg(long)]
    pub layout: Option<PathBuf>,
    /// Leave punctuation out of UAS/LAS.
    #[arg(long)]
    pub exclude_punct: bool,
    #[arg(long)]
    pub alpha: Option<f64>,
    #[arg(long)]
    pub bootstrap_iterations: Option<usize>,
    #[arg(long)]
    pub bonferroni_m: Option<usize>,
    /// Worker threads.
    #[arg(long, env = "AUGEVAL_WORKERS")]
    pub workers: Option<usize>,
}

fn resolve(base: &Path, p: PathBuf) -> PathBuf {
    if p.is_relative() {
        base.join(p)
    } else {
        p
    }
}

impl RunConfig {
    pub fn from_file(path: &Path) -> Result<RunConfig> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let mut cfg: RunConfig = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        let base = path.parent().unwrap_or(Path::new(""));
        cfg.corpus = resolve(base, cfg.corpus);
        cfg.output_dir = resolve(base, cfg.output_dir);
        cfg.pipelines = cfg.pipelines.map(|p| resolve(base, p));
        cfg.lexicon = cfg.lexicon.map(|p| resolve(base, p));
        cfg.layout = cfg.layout.map(|p| resolve(base, p));
        Ok(cfg)
    }

    /// Builds the configuration from an optional file plus flag overrides.
    pub fn from_args(args: &RunArgs) -> Result<RunConfig> {
        let mut cfg = match &args.config {
            Some(path) => RunConfig::from_file(path)?,
            None => {
                let corpus = args.corpus.clone().context("--corpus is required without --config")?;
                let output_dir = args.output_dir.clone().context("--output-dir is required without --config")?;
                RunConfig::new(corpus, output_dir)
            }
        };
        if let Some(v) = &args.corpus {
            cfg.corpus = v.clone();
        }
        if let Some(v) = &args.output_dir {
            cfg.output_dir = v.clone();
        }
        if args.pipelines.is_some() {
            cfg.pipelines = args.pipelines.clone();
        }
        if !args.augmenters.is_empty() {
            cfg.augmenters = args.augmenters.iter().map(|s| s.parse::<Augmenter>()).collect::<Result<_, _>>()?;
        }
        cfg.k = args.k.unwrap_or(cfg.k);
        cfg.base_seed = args.base_seed.unwrap_or(cfg.base_seed);
        if args.lexicon.is_some() {
            cfg.lexicon = args.lexicon.clone();
        }
        if args.layout.is_some() {
            cfg.layout = args.layout.clone();
        }
        cfg.exclude_punct |= args.exclude_punct;
        cfg.alpha = args.alpha.unwrap_or(cfg.alpha);
        cfg.bootstrap_iterations = args.bootstrap_iterations.unwrap_or(cfg.bootstrap_iterations);
        if args.bonferroni_m.is_some() {
            cfg.bonferroni_m = args.bonferroni_m;
        }
        if args.workers.is_some() {
            cfg.workers = args.workers;
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn new(corpus: PathBuf, output_dir: PathBuf) -> RunConfig {
        RunConfig {
            corpus,
            pipelines: None,
            augmenters: default_suite(),
            k: DEFAULT_REPETITIONS,
            base_seed: 0,
            output_dir,
            lexicon: None,
            layout: None,
            exclude_punct: false,
            alpha: DEFAULT_ALPHA,
            bootstrap_iterations: DEFAULT_BOOTSTRAP_ITERATIONS,
            bonferroni_m: None,
            workers: None,
        }
    }

    pub fn check(&self) -> Result<()> {
        if self.k == 0 {
            bail!("k must be at least 1");
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            bail!("alpha must lie in (0, 1), got {}", self.alpha);
        }
        if self.bootstrap_iterations < MIN_BOOTSTRAP_ITERATIONS {
            bail!("bootstrap_iterations must be at least {MIN_BOOTSTRAP_ITERATIONS}");
        }
        if self.bonferroni_m == Some(0) {
            bail!("bonferroni_m must be at least 1");
        }
        if self.workers == Some(0) {
            bail!("workers must be at least 1");
        }
        Ok(())
    }

    /// Loads the configured lexicon and layout (built-ins by default) and
    /// checks every augmenter against them.
    pub fn resources(&self) -> Result<AugmentResources> {
        let lexicon = match &self.lexicon {
            Some(p) => NameLexicon::load(p).with_context(|| format!("loading lexicon {}", p.display()))?,
            None => NameLexicon::builtin(),
        };
        let layout = match &self.layout {
            Some(p) => KeyboardLayout::load(p).with_context(|| format!("loading layout {}", p.display()))?,
            None => KeyboardLayout::danish_qwerty(),
        };
        let resources = AugmentResources { lexicon, layout };
        for a in &self.augmenters {
            a.check(&resources)?;
        }
        Ok(resources)
    }
}
