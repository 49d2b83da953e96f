//! The evaluation run: augment, annotate, score, then test and tabulate.

use std::collections::BTreeMap;
use std::path::Path;

use anyhow::{bail, Context, Result};
use augeval_core::augment::{run_repetitions, AugmentedCorpus, Augmenter};
use augeval_core::corpus::{parse_conllu, validate, Corpus};
use augeval_core::metrics::{pool_by_unit, score_documents, sentence_units, Counts, Metric, MetricOptions};
use augeval_core::pipeline::{load_registry, Pipeline, PipelineError, PipelineSpec, Task};
use augeval_core::report::{render, EvalReport, Format, PipelineInfo, ReportMetadata, ReportRow};
use augeval_core::resources::NameMode;
use augeval_core::seed::derive_seed;
use augeval_core::stats::{aggregate, bonferroni_with_m, paired_bootstrap_test};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::fsutil::write_atomic;

pub const SCORES_FILE: &str = "scores.json";
pub const REPORT_STEM: &str = "report";

/// A pipeline as it took part in a run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRecord {
    pub name: String,
    pub tasks: Vec<Task>,
    pub hardware: Option<String>,
    /// Condition name -> error message.
    pub failures: BTreeMap<String, String>,
}

/// Raw counts of one (pipeline, condition, repetition).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub pipeline: String,
    pub condition: String,
    pub rep: usize,
    pub seed: u64,
    pub wall_time: f64,
    pub counts: Counts,
    /// Counts per original document, the resampling unit of the bootstrap.
    pub units: BTreeMap<String, Counts>,
}

/// Everything needed to recompute the statistics without rerunning pipelines.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoresFile {
    pub metadata: ReportMetadata,
    pub pipelines: Vec<PipelineRecord>,
    pub runs: Vec<RunRecord>,
}

impl ScoresFile {
    pub fn has_failures(&self) -> bool {
        self.pipelines.iter().any(|p| !p.failures.is_empty())
    }
}

/// The baseline first, then the configured augmenters without duplicates.
pub fn conditions(augmenters: &[Augmenter]) -> Vec<Augmenter> {
    let mut out = vec![Augmenter::Identity];
    for a in augmenters {
        if !out.iter().any(|o| o.name() == a.name()) {
            out.push(a.clone());
        }
    }
    out
}

/// The condition a condition is tested against: none for the baseline,
/// `names-danish` for the other name modes when it is part of the run,
/// the baseline otherwise.
pub fn reference_condition(condition: &Augmenter, available: &[String]) -> Option<String> {
    let danish = Augmenter::Names { mode: NameMode::Danish }.name();
    match condition {
        Augmenter::Identity => None,
        Augmenter::Names { mode } if *mode != NameMode::Danish && available.contains(&danish) => Some(danish),
        _ => Some(Augmenter::Identity.name()),
    }
}

pub fn load_corpus(path: &Path) -> Result<Corpus> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let corpus = parse_conllu(std::io::BufReader::new(file)).with_context(|| format!("parsing {}", path.display()))?;
    if let Some(v) = validate(&corpus).into_iter().find(|v| v.is_error()) {
        bail!("{} is not a valid corpus: {v}", path.display());
    }
    Ok(corpus)
}

/// Augmented corpora per condition; deterministic conditions get one repetition.
pub fn augment_all(cfg: &RunConfig, corpus: &Corpus, conditions: &[Augmenter]) -> Result<Vec<Vec<AugmentedCorpus>>> {
    let resources = cfg.resources()?;
    conditions
        .iter()
        .map(|a| run_repetitions(a, corpus, a.effective_repetitions(cfg.k), cfg.base_seed, &resources).with_context(|| format!("augmenting with {}", a.name())))
        .collect()
}

struct Job<'a> {
    condition: String,
    corpora: &'a [AugmentedCorpus],
}

fn run_pipeline(spec: &PipelineSpec, jobs: &[Job], units: &std::collections::HashMap<String, String>, opts: MetricOptions) -> (PipelineRecord, Vec<RunRecord>) {
    let mut record = PipelineRecord { name: spec.name.clone(), tasks: spec.tasks.clone(), hardware: spec.hardware.clone(), failures: BTreeMap::new() };
    let mut runs = Vec::new();
    let pipeline = match Pipeline::new(spec.clone()) {
        Ok(p) => p,
        Err(e) => {
            for job in jobs {
                record.failures.insert(job.condition.clone(), e.to_string());
            }
            return (record, runs);
        }
    };
    let mut fatal: Option<String> = None;
    for job in jobs {
        if let Some(msg) = &fatal {
            record.failures.insert(job.condition.clone(), msg.clone());
            continue;
        }
        let mut job_runs = Vec::new();
        for aug in job.corpora {
            let corpus_ref = format!("{}/rep-{:02}", job.condition, aug.rep);
            let outcome = pipeline.annotate(&aug.corpus, &corpus_ref).map_err(|e| (matches!(e, PipelineError::Spawn { .. } | PipelineError::Config { .. }), e.to_string())).and_then(|pred| {
                let per_doc = score_documents(&aug.corpus, &pred, opts).map_err(|e| (false, format!("scoring {corpus_ref}: {e}")))?;
                let mut counts = Counts::default();
                per_doc.iter().for_each(|c| counts.add(c));
                Ok(RunRecord {
                    pipeline: spec.name.clone(),
                    condition: job.condition.clone(),
                    rep: aug.rep,
                    seed: aug.seed,
                    wall_time: pred.wall_time,
                    counts,
                    units: pool_by_unit(&aug.corpus, &per_doc, units),
                })
            });
            match outcome {
                Ok(r) => job_runs.push(r),
                Err((is_fatal, msg)) => {
                    if is_fatal {
                        fatal = Some(msg.clone());
                    }
                    record.failures.insert(job.condition.clone(), msg);
                    job_runs.clear();
                    break;
                }
            }
        }
        runs.extend(job_runs);
    }
    (record, runs)
}

/// Runs every pipeline on every condition and repetition. Pipeline
/// failures are recorded, not returned.
pub fn run_evaluation(cfg: &RunConfig) -> Result<ScoresFile> {
    let corpus = load_corpus(&cfg.corpus)?;
    let registry_path = cfg.pipelines.as_ref().context("a pipeline registry is required for evaluate")?;
    let specs = load_registry(registry_path)?;
    let conds = conditions(&cfg.augmenters);
    let augmented = augment_all(cfg, &corpus, &conds)?;
    let units = sentence_units(&corpus);
    let opts = MetricOptions { exclude_punct: cfg.exclude_punct };
    let jobs: Vec<Job> = conds.iter().zip(&augmented).map(|(a, corpora)| Job { condition: a.name(), corpora }).collect();

    let mut pool = rayon::ThreadPoolBuilder::new();
    if let Some(n) = cfg.workers {
        pool = pool.num_threads(n);
    }
    let pool = pool.build().context("starting worker pool")?;
    // one pipeline per task: its runs stay sequential so wall times do not compete
    let results: Vec<(PipelineRecord, Vec<RunRecord>)> = pool.install(|| specs.par_iter().map(|s| run_pipeline(s, &jobs, &units, opts)).collect());

    let metadata = ReportMetadata {
        base_seed: cfg.base_seed,
        repetitions: cfg.k,
        augmenters: conds,
        pipelines: specs.iter().map(|s| PipelineInfo { name: s.name.clone(), hardware: s.hardware.clone() }).collect(),
        alpha: cfg.alpha,
        bootstrap_iterations: cfg.bootstrap_iterations,
        bonferroni_m: cfg.bonferroni_m,
        exclude_punct: cfg.exclude_punct,
        ..ReportMetadata::default()
    };
    let (pipelines, runs): (Vec<_>, Vec<_>) = results.into_iter().unzip();
    Ok(ScoresFile { metadata, pipelines, runs: runs.into_iter().flatten().collect() })
}

fn unit_matrix(runs: &[&RunRecord], metric: Metric, tasks: &[Task]) -> (Vec<String>, Vec<Vec<f64>>) {
    let keys: Vec<String> = runs.first().map(|r| r.units.keys().cloned().collect()).unwrap_or_default();
    let matrix = runs
        .iter()
        .map(|r| keys.iter().map(|k| r.units.get(k).and_then(|c| metric.value(&c.scores(tasks))).unwrap_or(f64::NAN)).collect())
        .collect();
    (keys, matrix)
}

/// Aggregates repetitions, tests each condition against its reference and
/// applies the Bonferroni correction per (pipeline, metric).
pub fn build_report(scores: &ScoresFile) -> Result<EvalReport> {
    let meta = &scores.metadata;
    let names: Vec<String> = meta.augmenters.iter().map(Augmenter::name).collect();
    let mut rows = Vec::new();
    for p in &scores.pipelines {
        for metric in Metric::for_tasks(&p.tasks) {
            let mut p_values: Vec<(usize, f64)> = Vec::new();
            for cond in &meta.augmenters {
                let name = cond.name();
                let runs_of = |c: &str| {
                    let mut v: Vec<&RunRecord> = scores.runs.iter().filter(|r| r.pipeline == p.name && r.condition == c).collect();
                    v.sort_by_key(|r| r.rep);
                    v
                };
                let runs = runs_of(&name);
                let mut row = ReportRow {
                    pipeline: p.name.clone(),
                    condition: name.clone(),
                    task: metric.as_str().to_string(),
                    mean: None,
                    sd: None,
                    p_value: None,
                    significant: None,
                    support: 0,
                    reps: runs.len(),
                    wall_time: None,
                    failed: None,
                };
                if let Some(msg) = p.failures.get(&name) {
                    row.failed = Some(msg.clone());
                    rows.push(row);
                    continue;
                }
                if runs.is_empty() {
                    row.failed = Some("no repetitions were scored".into());
                    rows.push(row);
                    continue;
                }
                let values: Vec<f64> = runs.iter().map(|r| metric.value(&r.counts.scores(&p.tasks)).unwrap_or(f64::NAN)).collect();
                let summary = aggregate(&values)?;
                row.mean = Some(summary.mean);
                row.sd = cond.is_stochastic().then_some(summary.sd);
                row.support = metric.support(&runs[0].counts);
                row.wall_time = Some(runs.iter().map(|r| r.wall_time).sum::<f64>() / runs.len() as f64);
                if let Some(reference) = reference_condition(cond, &names) {
                    let ref_runs = runs_of(&reference);
                    if !ref_runs.is_empty() && !p.failures.contains_key(&reference) {
                        let (ref_keys, ref_matrix) = unit_matrix(&ref_runs, metric, &p.tasks);
                        let (keys, matrix) = unit_matrix(&runs, metric, &p.tasks);
                        if keys == ref_keys {
                            let seed = derive_seed(meta.base_seed, &[b"bootstrap", p.name.as_bytes(), name.as_bytes(), metric.as_str().as_bytes()]);
                            let pv = paired_bootstrap_test(&ref_matrix, &matrix, meta.bootstrap_iterations, seed)?;
                            row.p_value = Some(pv);
                            p_values.push((rows.len(), pv));
                        }
                    }
                }
                rows.push(row);
            }
            let ps: Vec<f64> = p_values.iter().map(|(_, p)| *p).collect();
            let m = meta.bonferroni_m.unwrap_or(ps.len());
            for ((idx, _), sig) in p_values.iter().zip(bonferroni_with_m(&ps, meta.alpha, m)?) {
                rows[*idx].significant = Some(sig.significant);
            }
        }
    }
    Ok(EvalReport { metadata: meta.clone(), rows })
}

/// Writes `scores.json` and the report in every format; returns the paths.
pub fn write_outputs(dir: &Path, scores: &ScoresFile, report: &EvalReport) -> Result<Vec<std::path::PathBuf>> {
    let mut written = Vec::new();
    let path = dir.join(SCORES_FILE);
    write_atomic(&path, (serde_json::to_string_pretty(scores)? + "\n").as_bytes())?;
    written.push(path);
    for format in Format::ALL {
        let path = dir.join(format!("{REPORT_STEM}.{}", format.extension()));
        write_atomic(&path, render(report, format)?.as_bytes())?;
        written.push(path);
    }
    Ok(written)
}
