//! Result tables.
//!
//! Markdown cells read `mean (sd)*` in percentage points with one decimal:
//! the sd only for stochastic conditions, the star when the difference from
//! the baseline is significant. Per column the best mean is bold and the
//! runner-up underlined; equal means that share a decoration get a dagger.
//! CSV and JSON keep full precision.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::augment::Augmenter;
use crate::metrics::Metric;

#[derive(Debug, Error)]
pub enum ReportError {
    #[error("unknown report format `{0}` (expected markdown, csv or json)")]
    UnknownFormat(String),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Format {
    Markdown,
    Csv,
    Json,
}

impl Format {
    pub const ALL: [Format; 3] = [Format::Markdown, Format::Csv, Format::Json];

    pub fn extension(&self) -> &'static str {
        match self {
            Format::Markdown => "md",
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

impl FromStr for Format {
    type Err = ReportError;

    fn from_str(s: &str) -> Result<Self, ReportError> {
        match s {
            "markdown" | "md" => Ok(Format::Markdown),
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            other => Err(ReportError::UnknownFormat(other.to_string())),
        }
    }
}

/// One (pipeline, condition, metric) result.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub pipeline: String,
    pub condition: String,
    /// Metric identifier, e.g. `ner_f1`.
    pub task: String,
    pub mean: Option<f64>,
    /// Present for stochastic conditions only.
    pub sd: Option<f64>,
    pub p_value: Option<f64>,
    /// Present where a baseline pairing exists.
    pub significant: Option<bool>,
    pub support: usize,
    pub reps: usize,
    /// Mean seconds per repetition.
    pub wall_time: Option<f64>,
    /// Error message when the pipeline failed on this condition.
    pub failed: Option<String>,
}

impl ReportRow {
    pub fn new(pipeline: impl Into<String>, condition: impl Into<String>, task: impl Into<String>, mean: f64) -> Self {
        ReportRow {
            pipeline: pipeline.into(),
            condition: condition.into(),
            task: task.into(),
            mean: Some(mean),
            sd: None,
            p_value: None,
            significant: None,
            support: 0,
            reps: 1,
            wall_time: None,
            failed: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineInfo {
    pub name: String,
    pub hardware: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportMetadata {
    pub harness_version: String,
    pub base_seed: u64,
    pub repetitions: usize,
    pub augmenters: Vec<Augmenter>,
    pub pipelines: Vec<PipelineInfo>,
    pub alpha: f64,
    pub bootstrap_iterations: usize,
    /// Comparison count used for Bonferroni, when fixed by configuration.
    pub bonferroni_m: Option<usize>,
    pub exclude_punct: bool,
}

impl Default for ReportMetadata {
    fn default() -> Self {
        ReportMetadata {
            harness_version: env!("CARGO_PKG_VERSION").to_string(),
            base_seed: 0,
            repetitions: 1,
            augmenters: Vec::new(),
            pipelines: Vec::new(),
            alpha: crate::stats::DEFAULT_ALPHA,
            bootstrap_iterations: crate::stats::DEFAULT_BOOTSTRAP_ITERATIONS,
            bonferroni_m: None,
            exclude_punct: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct EvalReport {
    pub metadata: ReportMetadata,
    pub rows: Vec<ReportRow>,
}

pub fn render(report: &EvalReport, format: Format) -> Result<String, ReportError> {
    match format {
        Format::Markdown => Ok(render_markdown(report)),
        Format::Csv => render_csv(report),
        Format::Json => Ok(serde_json::to_string_pretty(report)? + "\n"),
    }
}

pub fn parse_json(text: &str) -> Result<EvalReport, ReportError> {
    Ok(serde_json::from_str(text)?)
}

/// `mean (sd)*` in percentage points.
pub fn format_cell(row: &ReportRow) -> String {
    let Some(mean) = row.mean.filter(|_| row.failed.is_none()) else {
        return "failed".into();
    };
    let mut cell = format!("{:.1}", mean * 100.0);
    if let Some(sd) = row.sd {
        let _ = write!(cell, " ({:.1})", sd * 100.0);
    }
    if row.significant == Some(true) {
        cell.push('*');
    }
    cell
}

fn first_seen<'a>(items: impl Iterator<Item = &'a str>) -> Vec<&'a str> {
    let mut out: Vec<&str> = Vec::new();
    for it in items {
        if !out.contains(&it) {
            out.push(it);
        }
    }
    out
}

/// Orders metric identifiers by the standard metric order, unknown ones last.
fn task_order(tasks: Vec<&str>) -> Vec<&str> {
    let mut v = tasks;
    v.sort_by_key(|t| Metric::parse(t).map_or(usize::MAX, |m| Metric::ALL.iter().position(|x| *x == m).unwrap_or(usize::MAX)));
    v
}

fn task_title(task: &str) -> String {
    Metric::parse(task).map_or_else(|| task.to_string(), |m| m.title().to_string())
}

fn table_row(cells: &[String]) -> String {
    format!("| {} |\n", cells.join(" | "))
}

/// Decorations for one column: (row index, decoration) with ranks computed
/// on unrounded means; earlier rows win ties.
fn rank_column(means: &[Option<f64>]) -> Vec<&'static str> {
    let mut deco = vec![""; means.len()];
    let mut ranked: Vec<(usize, f64)> = means.iter().enumerate().filter_map(|(i, m)| m.map(|m| (i, m))).collect();
    if ranked.len() < 2 {
        return deco;
    }
    ranked.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    deco[ranked[0].0] = "bold";
    deco[ranked[1].0] = "underline";
    for k in 0..2 {
        let tied = ranked.iter().any(|(i, m)| *i != ranked[k].0 && *m == ranked[k].1);
        if tied {
            deco[ranked[k].0] = if k == 0 { "bold-tie" } else { "underline-tie" };
        }
    }
    deco
}

fn decorate(cell: String, deco: &str) -> String {
    match deco {
        "bold" => format!("**{cell}**"),
        "bold-tie" => format!("**{cell}**†"),
        "underline" => format!("<u>{cell}</u>"),
        "underline-tie" => format!("<u>{cell}</u>†"),
        _ => cell,
    }
}

pub fn render_markdown(report: &EvalReport) -> String {
    let mut out = String::from("# Evaluation report\n");
    let rows = &report.rows;
    let conditions = first_seen(rows.iter().map(|r| r.condition.as_str()));
    let pipelines = first_seen(rows.iter().map(|r| r.pipeline.as_str()));
    let lookup = |p: &str, c: &str, t: &str| rows.iter().find(|r| r.pipeline == p && r.condition == c && r.task == t);

    for task in task_order(first_seen(rows.iter().map(|r| r.task.as_str()))) {
        let _ = write!(out, "\n## {}\n\n", task_title(task));
        let mut header = vec!["Pipeline".to_string()];
        header.extend(conditions.iter().map(|c| c.to_string()));
        out.push_str(&table_row(&header));
        out.push_str(&table_row(&vec!["---".to_string(); header.len()]));
        let table_pipelines: Vec<&str> = pipelines.iter().copied().filter(|p| rows.iter().any(|r| r.pipeline == *p && r.task == task)).collect();
        let mut grid: Vec<Vec<String>> = table_pipelines.iter().map(|p| vec![p.to_string()]).collect();
        for c in &conditions {
            let cells: Vec<Option<&ReportRow>> = table_pipelines.iter().map(|p| lookup(p, c, task)).collect();
            let means: Vec<Option<f64>> = cells.iter().map(|r| r.filter(|r| r.failed.is_none()).and_then(|r| r.mean)).collect();
            let deco = rank_column(&means);
            for (i, cell) in cells.iter().enumerate() {
                grid[i].push(cell.map_or_else(String::new, |r| decorate(format_cell(r), deco[i])));
            }
        }
        for line in grid {
            out.push_str(&table_row(&line));
        }
    }

    if rows.iter().any(|r| r.wall_time.is_some()) {
        out.push_str("\n## Wall time (s)\n\n");
        let mut header = vec!["Pipeline".to_string()];
        header.extend(conditions.iter().map(|c| c.to_string()));
        out.push_str(&table_row(&header));
        out.push_str(&table_row(&vec!["---".to_string(); header.len()]));
        for p in &pipelines {
            let mut line = vec![p.to_string()];
            for c in &conditions {
                let t = rows.iter().find(|r| r.pipeline == *p && r.condition == *c && r.wall_time.is_some()).and_then(|r| r.wall_time);
                line.push(t.map_or_else(String::new, |t| format!("{t:.3}")));
            }
            out.push_str(&table_row(&line));
        }
    }

    if !rows.is_empty() {
        let m = report.metadata.bonferroni_m.map_or_else(|| "the number of conditions compared in each table row".to_string(), |m| m.to_string());
        let _ = write!(
            out,
            "\nValues are means over repetitions in percentage points, standard deviation in parentheses for stochastic conditions. \
             `*` marks a significant difference from the baseline (name conditions are compared with `names-danish`): \
             two-sided paired bootstrap over documents, {} resamples, Bonferroni-corrected at alpha = {} with m = {}. \
             Bold is the best and underlined the second best pipeline per column; † marks a tie.\n",
            report.metadata.bootstrap_iterations, report.metadata.alpha, m
        );
    }
    out
}

fn render_csv(report: &EvalReport) -> Result<String, ReportError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if report.rows.is_empty() {
        w.write_record(["pipeline", "condition", "task", "mean", "sd", "p_value", "significant", "support", "reps", "wall_time", "failed"])?;
    }
    for row in &report.rows {
        w.serialize(row)?;
    }
    let bytes = w.into_inner().map_err(|e| ReportError::Csv(e.into_error().into()))?;
    Ok(String::from_utf8(bytes).expect("csv output is UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(p: &str, c: &str, t: &str, mean: f64) -> ReportRow {
        ReportRow::new(p, c, t, mean)
    }

    #[test]
    fn cell_formats() {
        let mut r = row("p", "keystroke-0.05", "ner_f1", 0.8616);
        r.sd = Some(0.0057);
        r.significant = Some(true);
        assert_eq!(format_cell(&r), "86.2 (0.6)*");
        let base = row("p", "baseline", "ner_f1", 0.856);
        assert_eq!(format_cell(&base), "85.6");
        let mut failed = base.clone();
        failed.failed = Some("boom".into());
        assert_eq!(format_cell(&failed), "failed");
    }

    #[test]
    fn single_row_table() {
        let mut r = row("p", "keystroke-0.05", "ner_f1", 0.8616);
        r.sd = Some(0.0057);
        r.significant = Some(true);
        let md = render_markdown(&EvalReport { rows: vec![r], ..Default::default() });
        assert!(md.contains("## NER F1\n\n| Pipeline | keystroke-0.05 |\n| --- | --- |\n| p | 86.2 (0.6)* |\n"), "{md}");
    }

    #[test]
    fn empty_report_has_headers_only() {
        let r = EvalReport::default();
        assert_eq!(render(&r, Format::Markdown).unwrap(), "# Evaluation report\n");
        assert_eq!(render(&r, Format::Csv).unwrap(), "pipeline,condition,task,mean,sd,p_value,significant,support,reps,wall_time,failed\n");
    }

    #[test]
    fn ranking_and_ties() {
        let rows = vec![row("a", "baseline", "pos", 0.90), row("b", "baseline", "pos", 0.95), row("c", "baseline", "pos", 0.80)];
        let md = render_markdown(&EvalReport { rows, ..Default::default() });
        assert!(md.contains("| a | <u>90.0</u> |"), "{md}");
        assert!(md.contains("| b | **95.0** |"));
        assert!(md.contains("| c | 80.0 |"));

        let rows = vec![row("a", "baseline", "pos", 0.9), row("b", "baseline", "pos", 0.9)];
        let md = render_markdown(&EvalReport { rows, ..Default::default() });
        assert!(md.contains("| a | **90.0**† |"), "{md}");
        assert!(md.contains("| b | <u>90.0</u>† |"));
    }

    #[test]
    fn ranking_uses_unrounded_means() {
        let rows = vec![row("a", "baseline", "pos", 0.90001), row("b", "baseline", "pos", 0.90004)];
        let md = render_markdown(&EvalReport { rows, ..Default::default() });
        assert!(md.contains("| b | **90.0** |"), "{md}");
    }

    #[test]
    fn json_and_csv_round_trip() {
        let mut r = row("p", "c", "las", 0.1 + 0.2);
        r.sd = Some(1.0 / 3.0);
        r.p_value = Some(0.000123456789);
        r.significant = Some(false);
        r.wall_time = Some(1.5);
        let report = EvalReport { rows: vec![r.clone(), row("q", "c", "uas", 0.5)], ..Default::default() };
        let json = render(&report, Format::Json).unwrap();
        assert_eq!(parse_json(&json).unwrap(), report);
        let csv_text = render(&report, Format::Csv).unwrap();
        let back: Vec<ReportRow> = csv::Reader::from_reader(csv_text.as_bytes()).deserialize().collect::<Result<_, _>>().unwrap();
        assert_eq!(back[0], r);
    }

    #[test]
    fn unknown_format_is_rejected() {
        assert!(matches!("html".parse::<Format>(), Err(ReportError::UnknownFormat(_))));
        assert_eq!("md".parse::<Format>().unwrap(), Format::Markdown);
    }

    #[test]
    fn rendering_is_deterministic() {
        let rows = vec![row("a", "x", "pos", 0.5), row("a", "y", "las", 0.25)];
        let report = EvalReport { rows, ..Default::default() };
        assert_eq!(render_markdown(&report), render_markdown(&report.clone()));
    }
}
