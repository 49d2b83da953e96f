//! Systems under evaluation.
//!
//! A pipeline is either built in (the gold oracle, the rule baseline) or an
//! external process speaking CoNLL-U over stdin/stdout (see [`build_request`]
//! for the wire format). Each external run starts one warm-up invocation on
//! the first document, then one timed invocation on the whole corpus; the
//! reported wall time subtracts the warm-up time as an estimate of process
//! startup.

mod process;
mod protocol;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{parse_conllu, Corpus, NerTag, Span};

pub use protocol::build_request;

pub const DEFAULT_TIMEOUT_SECS: f64 = 300.0;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("pipeline `{pipeline}`: {message}")]
    Config { pipeline: String, message: String },
    #[error("pipeline `{pipeline}` could not be started: {source}")]
    Spawn {
        pipeline: String,
        #[source]
        source: std::io::Error,
    },
    #[error("pipeline `{pipeline}` exited with {status} while annotating {doc}: {stderr}")]
    Exit { pipeline: String, doc: String, status: String, stderr: String },
    #[error("pipeline `{pipeline}` timed out after {seconds} s while annotating {doc}")]
    Timeout { pipeline: String, doc: String, seconds: f64 },
    #[error("pipeline `{pipeline}` protocol violation in {doc}: {message}")]
    Protocol { pipeline: String, doc: String, message: String },
    #[error("pipeline `{pipeline}`: i/o error: {source}")]
    Io {
        pipeline: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Pos,
    Ner,
    Dep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum Tokenization {
    Own,
    #[default]
    Given,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    GoldOracle,
    Baseline,
}

fn default_timeout() -> f64 {
    DEFAULT_TIMEOUT_SECS
}

/// One entry of a pipeline registry file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineSpec {
    pub name: String,
    /// Argument vector of an external process.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub command: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<Builtin>,
    pub tasks: Vec<Task>,
    #[serde(default)]
    pub tokenization: Tokenization,
    #[serde(default = "default_timeout")]
    pub timeout_secs: f64,
    /// Send gold labels instead of blanks; used to check protocol conformance
    /// with echo processes.
    #[serde(default)]
    pub send_labels: bool,
    /// Training corpus (CoNLL-U) for the baseline's form -> POS statistics.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stats: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub hardware: Option<String>,
    /// Working directory for the process; registry loading sets it to the registry's directory.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workdir: Option<PathBuf>,
}

impl PipelineSpec {
    pub fn builtin(name: impl Into<String>, builtin: Builtin) -> Self {
        PipelineSpec {
            name: name.into(),
            command: None,
            builtin: Some(builtin),
            tasks: vec![Task::Pos, Task::Ner, Task::Dep],
            tokenization: Tokenization::Given,
            timeout_secs: DEFAULT_TIMEOUT_SECS,
            send_labels: false,
            stats: None,
            hardware: None,
            workdir: None,
        }
    }

    pub fn external(name: impl Into<String>, command: Vec<String>, tasks: Vec<Task>) -> Self {
        PipelineSpec { command: Some(command), builtin: None, tasks, ..PipelineSpec::builtin(name, Builtin::GoldOracle) }
    }

    pub fn check(&self) -> Result<(), PipelineError> {
        let bad = |message: &str| Err(PipelineError::Config { pipeline: self.name.clone(), message: message.into() });
        if self.tasks.is_empty() {
            return bad("declares no tasks");
        }
        match (&self.command, &self.builtin) {
            (Some(_), Some(_)) => bad("has both a command and a builtin"),
            (None, None) => bad("needs either a command or a builtin"),
            (Some(c), None) if c.is_empty() => bad("has an empty command"),
            _ if self.timeout_secs.is_nan() || self.timeout_secs <= 0.0 => bad("timeout must be positive"),
            _ => Ok(()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
struct RegistryFile {
    pipelines: Vec<PipelineSpec>,
}

/// Reads a registry (`{"pipelines": [...]}`); relative `stats` paths and
/// process working directories resolve against the registry's directory.
pub fn load_registry(path: impl AsRef<Path>) -> Result<Vec<PipelineSpec>, PipelineError> {
    let path = path.as_ref();
    let bad = |message: String| PipelineError::Config { pipeline: path.display().to_string(), message };
    let text = std::fs::read_to_string(path).map_err(|e| bad(e.to_string()))?;
    let file: RegistryFile = serde_json::from_str(&text).map_err(|e| bad(e.to_string()))?;
    let base = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    let mut names = std::collections::HashSet::new();
    let mut specs = file.pipelines;
    for spec in &mut specs {
        spec.check()?;
        if !names.insert(spec.name.clone()) {
            return Err(bad(format!("pipeline name `{}` is used twice", spec.name)));
        }
        if let Some(stats) = &spec.stats {
            if stats.is_relative() {
                spec.stats = Some(base.join(stats));
            }
        }
        if spec.workdir.is_none() {
            spec.workdir = Some(base.clone());
        }
    }
    Ok(specs)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredToken {
    pub form: String,
    pub span: Span,
    pub pos: Option<String>,
    pub ner: Option<NerTag>,
    /// Sentence-relative head, 0 for the root.
    pub head: Option<usize>,
    pub deprel: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredDocument {
    pub doc_id: String,
    pub sentences: Vec<Vec<PredToken>>,
}

impl PredDocument {
    pub fn tokens(&self) -> impl Iterator<Item = &PredToken> {
        self.sentences.iter().flatten()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionSet {
    pub corpus_ref: String,
    pub pipeline: String,
    pub tasks: Vec<Task>,
    pub documents: Vec<PredDocument>,
    /// Seconds spent producing the predictions, startup excluded.
    pub wall_time: f64,
}

/// Most frequent POS per word form, from a training corpus.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LexiconStats {
    pub most_frequent: BTreeMap<String, String>,
}

impl LexiconStats {
    /// Ties go to the alphabetically first tag.
    pub fn from_corpus(corpus: &Corpus) -> Self {
        let mut counts: BTreeMap<&str, BTreeMap<&str, usize>> = BTreeMap::new();
        for tok in corpus.sentences().flat_map(|s| s.tokens.iter()) {
            *counts.entry(&tok.form).or_default().entry(&tok.upos).or_default() += 1;
        }
        let most_frequent = counts
            .into_iter()
            .map(|(form, tags)| {
                let best = tags.iter().max_by(|a, b| a.1.cmp(b.1).then(b.0.cmp(a.0))).map(|(t, _)| t.to_string()).unwrap_or_default();
                (form.to_string(), best)
            })
            .collect();
        LexiconStats { most_frequent }
    }
}

fn all_tasks() -> Vec<Task> {
    vec![Task::Pos, Task::Ner, Task::Dep]
}

/// Returns the corpus's own annotations.
pub fn builtin_gold_oracle(corpus: &Corpus) -> PredictionSet {
    let started = Instant::now();
    let documents = corpus
        .documents
        .iter()
        .map(|doc| PredDocument {
            doc_id: doc.doc_id.clone(),
            sentences: doc
                .sentences
                .iter()
                .map(|s| {
                    s.tokens
                        .iter()
                        .map(|t| PredToken { form: t.form.clone(), span: t.span, pos: Some(t.upos.clone()), ner: Some(t.ner), head: Some(t.head), deprel: Some(t.deprel.clone()) })
                        .collect()
                })
                .collect(),
        })
        .collect();
    PredictionSet { corpus_ref: String::new(), pipeline: "gold-oracle".into(), tasks: all_tasks(), documents, wall_time: started.elapsed().as_secs_f64() }
}

fn capitalized(form: &str) -> bool {
    form.chars().next().is_some_and(char::is_uppercase)
}

/// Rule baseline: POS from `stats` (else PROPN for capitalised non-initial
/// tokens, NOUN otherwise); each run of capitalised non-initial tokens is one
/// MISC entity; every token attaches to its left neighbour and token 1 is root.
pub fn builtin_baseline(corpus: &Corpus, stats: &LexiconStats) -> PredictionSet {
    let started = Instant::now();
    let documents = corpus
        .documents
        .iter()
        .map(|doc| PredDocument {
            doc_id: doc.doc_id.clone(),
            sentences: doc
                .sentences
                .iter()
                .map(|s| {
                    let mut prev_cap = false;
                    s.tokens
                        .iter()
                        .enumerate()
                        .map(|(i, t)| {
                            let mid_cap = i > 0 && capitalized(&t.form);
                            let pos = match stats.most_frequent.get(&t.form) {
                                Some(tag) => tag.clone(),
                                None if mid_cap => "PROPN".into(),
                                None => "NOUN".into(),
                            };
                            let ner = match (mid_cap, prev_cap) {
                                (false, _) => NerTag::O,
                                (true, false) => NerTag::B(crate::corpus::EntityType::Misc),
                                (true, true) => NerTag::I(crate::corpus::EntityType::Misc),
                            };
                            prev_cap = mid_cap;
                            let (head, deprel) = if i == 0 { (0, "root") } else { (i, "dep") };
                            PredToken { form: t.form.clone(), span: t.span, pos: Some(pos), ner: Some(ner), head: Some(head), deprel: Some(deprel.into()) }
                        })
                        .collect()
                })
                .collect(),
        })
        .collect();
    PredictionSet { corpus_ref: String::new(), pipeline: "baseline".into(), tasks: all_tasks(), documents, wall_time: started.elapsed().as_secs_f64() }
}

/// A pipeline ready to annotate corpora.
#[derive(Debug, Clone)]
pub struct Pipeline {
    pub spec: PipelineSpec,
    stats: LexiconStats,
}

impl Pipeline {
    pub fn new(spec: PipelineSpec) -> Result<Self, PipelineError> {
        spec.check()?;
        let stats = match (&spec.builtin, &spec.stats) {
            (Some(Builtin::Baseline), Some(path)) => {
                let file = std::fs::File::open(path).map_err(|source| PipelineError::Io { pipeline: spec.name.clone(), source })?;
                let corpus = parse_conllu(std::io::BufReader::new(file))
                    .map_err(|e| PipelineError::Config { pipeline: spec.name.clone(), message: format!("stats corpus {}: {e}", path.display()) })?;
                LexiconStats::from_corpus(&corpus)
            }
            _ => LexiconStats::default(),
        };
        Ok(Pipeline { spec, stats })
    }

    pub fn with_stats(spec: PipelineSpec, stats: LexiconStats) -> Result<Self, PipelineError> {
        spec.check()?;
        Ok(Pipeline { spec, stats })
    }

    pub fn name(&self) -> &str {
        &self.spec.name
    }

    /// Annotates `corpus`; the input is never modified and partial results are discarded on error.
    pub fn annotate(&self, corpus: &Corpus, corpus_ref: &str) -> Result<PredictionSet, PipelineError> {
        let mut set = match (&self.spec.builtin, &self.spec.command) {
            (Some(Builtin::GoldOracle), _) => builtin_gold_oracle(corpus),
            (Some(Builtin::Baseline), _) => builtin_baseline(corpus, &self.stats),
            (None, Some(command)) => self.annotate_external(command, corpus)?,
            (None, None) => unreachable!("checked in Pipeline::new"),
        };
        set.corpus_ref = corpus_ref.to_string();
        set.pipeline = self.spec.name.clone();
        set.tasks = self.spec.tasks.clone();
        if self.spec.builtin.is_some() {
            strip_undeclared(&mut set);
        }
        Ok(set)
    }

    fn invoke(&self, command: &[String], corpus: &Corpus, doc_label: &str) -> Result<(String, Duration), PipelineError> {
        let request = build_request(corpus, self.spec.tokenization, self.spec.send_labels);
        let timeout = Duration::from_secs_f64(self.spec.timeout_secs);
        let name = || self.spec.name.clone();
        let out = process::run(command, self.spec.workdir.as_deref(), request, timeout).map_err(|f| match f {
            process::RunFailure::Spawn(source) => PipelineError::Spawn { pipeline: name(), source },
            process::RunFailure::Timeout => PipelineError::Timeout { pipeline: name(), doc: doc_label.into(), seconds: self.spec.timeout_secs },
            process::RunFailure::Io(source) => PipelineError::Io { pipeline: name(), source },
        })?;
        if !out.status.success() {
            let tail: Vec<&str> = out.stderr.lines().rev().take(5).collect();
            let stderr = if tail.is_empty() { "no output on stderr".to_string() } else { tail.into_iter().rev().collect::<Vec<_>>().join(" | ") };
            return Err(PipelineError::Exit { pipeline: name(), doc: doc_label.into(), status: out.status.to_string(), stderr });
        }
        let stdout = String::from_utf8(out.stdout).map_err(|_| PipelineError::Protocol { pipeline: name(), doc: doc_label.into(), message: "output is not UTF-8".into() })?;
        Ok((stdout, out.elapsed))
    }

    fn annotate_external(&self, command: &[String], corpus: &Corpus) -> Result<PredictionSet, PipelineError> {
        let label = |c: &Corpus| match c.documents.as_slice() {
            [one] => one.doc_id.clone(),
            _ => format!("corpus of {} documents", c.documents.len()),
        };
        let mut warmup_time = Duration::ZERO;
        if let Some(first) = corpus.documents.first() {
            let warm = Corpus::new(vec![first.clone()]);
            let (_, t) = self.invoke(command, &warm, &label(&warm))?;
            warmup_time = t;
        }
        let (stdout, elapsed) = self.invoke(command, corpus, &label(corpus))?;
        let documents = protocol::parse_response(&stdout, corpus, &self.spec.tasks, self.spec.tokenization).map_err(|v| PipelineError::Protocol {
            pipeline: self.spec.name.clone(),
            doc: v.doc_id.unwrap_or_else(|| label(corpus)),
            message: v.message,
        })?;
        Ok(PredictionSet {
            corpus_ref: String::new(),
            pipeline: self.spec.name.clone(),
            tasks: self.spec.tasks.clone(),
            documents,
            wall_time: elapsed.saturating_sub(warmup_time).as_secs_f64(),
        })
    }
}

fn strip_undeclared(set: &mut PredictionSet) {
    let (pos, ner, dep) = (set.tasks.contains(&Task::Pos), set.tasks.contains(&Task::Ner), set.tasks.contains(&Task::Dep));
    for tok in set.documents.iter_mut().flat_map(|d| d.sentences.iter_mut().flatten()) {
        if !pos {
            tok.pos = None;
        }
        if !ner {
            tok.ner = None;
        }
        if !dep {
            tok.head = None;
            tok.deprel = None;
        }
    }
}
