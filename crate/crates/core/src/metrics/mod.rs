//! Scoring predictions against gold by character offsets.
//!
//! All scores derive from additive [`Counts`], so documents can be scored
//! independently and summed before dividing. Denominators are gold counts:
//! a gold token without an identically-spanned prediction counts as wrong.

use std::collections::{BTreeMap, HashMap};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{decode_bio, Corpus, Document, EntityType, NerTag, Span, PUNCTUATION};
use crate::pipeline::{PredDocument, PredictionSet, Task};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MetricsError {
    #[error("document {doc}: predicted token {token} has span {start}..{end} outside a text of {len} characters")]
    SpanOutOfBounds { doc: String, token: usize, start: usize, end: usize, len: usize },
    #[error("document {doc}: predicted spans are not increasing and disjoint at token {token}")]
    UnorderedSpans { doc: String, token: usize },
    #[error("expected predictions for document {expected}, found {found}")]
    DocumentMismatch { expected: String, found: String },
    #[error("document {doc}: prediction lacks {task} annotations")]
    MissingAnnotation { doc: String, task: &'static str },
}

/// Token pairing between gold and prediction; references are flat token
/// positions within the document (0-based).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Alignment {
    pub pairs: Vec<(usize, usize)>,
    pub gold_unmatched: Vec<usize>,
    pub pred_unmatched: Vec<usize>,
}

/// Pairs tokens with identical spans in one pass over both (sorted) lists.
pub fn align_tokens(gold: &Document, pred: &PredDocument) -> Result<Alignment, MetricsError> {
    let text_len = gold.char_len();
    let pred_spans: Vec<Span> = pred.tokens().map(|t| t.span).collect();
    for (i, s) in pred_spans.iter().enumerate() {
        if s.end > text_len || s.start >= s.end {
            return Err(MetricsError::SpanOutOfBounds { doc: gold.doc_id.clone(), token: i, start: s.start, end: s.end, len: text_len });
        }
        if i > 0 && pred_spans[i - 1].end > s.start {
            return Err(MetricsError::UnorderedSpans { doc: gold.doc_id.clone(), token: i });
        }
    }
    let gold_spans: Vec<Span> = gold.tokens().map(|t| t.span).collect();
    let mut al = Alignment::default();
    let (mut i, mut j) = (0, 0);
    while i < gold_spans.len() && j < pred_spans.len() {
        let (g, p) = (gold_spans[i], pred_spans[j]);
        if g == p {
            al.pairs.push((i, j));
            i += 1;
            j += 1;
        } else if g.end <= p.end {
            al.gold_unmatched.push(i);
            i += 1;
        } else {
            al.pred_unmatched.push(j);
            j += 1;
        }
    }
    al.gold_unmatched.extend(i..gold_spans.len());
    al.pred_unmatched.extend(j..pred_spans.len());
    Ok(al)
}

/// Entity-level confusion counts for one type.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Prf {
    pub tp: usize,
    pub fp: usize,
    #[serde(rename = "fn")]
    pub fn_: usize,
}

impl Prf {
    pub fn add(&mut self, other: Prf) {
        self.tp += other.tp;
        self.fp += other.fp;
        self.fn_ += other.fn_;
    }

    /// With nothing to find and nothing predicted all three scores are 1;
    /// otherwise an empty denominator gives 0.
    pub fn score(&self) -> PrfScore {
        if self.tp + self.fp + self.fn_ == 0 {
            return PrfScore { precision: 1.0, recall: 1.0, f1: 1.0 };
        }
        let ratio = |num: usize, den: usize| if den == 0 { 0.0 } else { num as f64 / den as f64 };
        let precision = ratio(self.tp, self.tp + self.fp);
        let recall = ratio(self.tp, self.tp + self.fn_);
        let f1 = if precision + recall == 0.0 { 0.0 } else { 2.0 * precision * recall / (precision + recall) };
        PrfScore { precision, recall, f1 }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrfScore {
    pub precision: f64,
    pub recall: f64,
    pub f1: f64,
}

/// Additive evidence behind every score.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub gold_tokens: usize,
    pub pos_correct: usize,
    /// Gold tokens entering UAS/LAS (all, or all but punctuation).
    pub dep_total: usize,
    pub uas_correct: usize,
    pub las_correct: usize,
    pub ner: BTreeMap<EntityType, Prf>,
    /// Orphan `I-X` tags in predictions read as `B-X`.
    pub ner_repairs: usize,
}

impl Default for Counts {
    fn default() -> Self {
        Counts {
            gold_tokens: 0,
            pos_correct: 0,
            dep_total: 0,
            uas_correct: 0,
            las_correct: 0,
            ner: EntityType::ALL.iter().map(|&t| (t, Prf::default())).collect(),
            ner_repairs: 0,
        }
    }
}

impl Counts {
    pub fn add(&mut self, other: &Counts) {
        self.gold_tokens += other.gold_tokens;
        self.pos_correct += other.pos_correct;
        self.dep_total += other.dep_total;
        self.uas_correct += other.uas_correct;
        self.las_correct += other.las_correct;
        for (t, prf) in &other.ner {
            self.ner.entry(*t).or_default().add(*prf);
        }
        self.ner_repairs += other.ner_repairs;
    }

    fn micro(&self, types: &[EntityType]) -> PrfScore {
        let mut sum = Prf::default();
        for t in types {
            sum.add(self.ner.get(t).copied().unwrap_or_default());
        }
        sum.score()
    }

    pub fn ner_scores(&self) -> NerScores {
        let per_type: BTreeMap<EntityType, PrfScore> = EntityType::ALL.iter().map(|t| (*t, self.ner.get(t).copied().unwrap_or_default().score())).collect();
        let present: Vec<f64> = EntityType::ALL
            .iter()
            .filter(|t| self.ner.get(t).is_some_and(|p| p.tp + p.fp + p.fn_ > 0))
            .map(|t| per_type[t].f1)
            .collect();
        let macro_f1 = if present.is_empty() { 1.0 } else { present.iter().sum::<f64>() / present.len() as f64 };
        NerScores {
            micro: self.micro(&EntityType::ALL),
            micro_no_misc: self.micro(&[EntityType::Per, EntityType::Loc, EntityType::Org]),
            macro_f1,
            per_type,
        }
    }

    pub fn scores(&self, tasks: &[Task]) -> TaskScores {
        let frac = |num: usize, den: usize| if den == 0 { 1.0 } else { num as f64 / den as f64 };
        let dep = tasks.contains(&Task::Dep);
        TaskScores {
            pos_accuracy: tasks.contains(&Task::Pos).then(|| frac(self.pos_correct, self.gold_tokens)),
            ner: tasks.contains(&Task::Ner).then(|| self.ner_scores()),
            uas: dep.then(|| frac(self.uas_correct, self.dep_total)),
            las: dep.then(|| frac(self.las_correct, self.dep_total)),
            counts: self.clone(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NerScores {
    pub per_type: BTreeMap<EntityType, PrfScore>,
    /// Micro average over all four types (the headline F1).
    pub micro: PrfScore,
    pub micro_no_misc: PrfScore,
    /// Mean F1 over the types occurring in gold or prediction.
    pub macro_f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskScores {
    pub pos_accuracy: Option<f64>,
    pub ner: Option<NerScores>,
    pub uas: Option<f64>,
    pub las: Option<f64>,
    pub counts: Counts,
}

/// The reported metric columns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    Pos,
    NerF1,
    NerF1NoMisc,
    NerMacroF1,
    Uas,
    Las,
}

impl Metric {
    pub const ALL: [Metric; 6] = [Metric::Pos, Metric::NerF1, Metric::NerF1NoMisc, Metric::NerMacroF1, Metric::Uas, Metric::Las];

    pub fn as_str(&self) -> &'static str {
        match self {
            Metric::Pos => "pos",
            Metric::NerF1 => "ner_f1",
            Metric::NerF1NoMisc => "ner_f1_no_misc",
            Metric::NerMacroF1 => "ner_macro_f1",
            Metric::Uas => "uas",
            Metric::Las => "las",
        }
    }

    pub fn parse(s: &str) -> Option<Metric> {
        Metric::ALL.into_iter().find(|m| m.as_str() == s)
    }

    pub fn title(&self) -> &'static str {
        match self {
            Metric::Pos => "POS accuracy",
            Metric::NerF1 => "NER F1",
            Metric::NerF1NoMisc => "NER F1 w/o MISC",
            Metric::NerMacroF1 => "NER macro F1",
            Metric::Uas => "UAS",
            Metric::Las => "LAS",
        }
    }

    pub fn task(&self) -> Task {
        match self {
            Metric::Pos => Task::Pos,
            Metric::NerF1 | Metric::NerF1NoMisc | Metric::NerMacroF1 => Task::Ner,
            Metric::Uas | Metric::Las => Task::Dep,
        }
    }

    pub fn for_tasks(tasks: &[Task]) -> Vec<Metric> {
        Metric::ALL.into_iter().filter(|m| tasks.contains(&m.task())).collect()
    }

    pub fn value(&self, s: &TaskScores) -> Option<f64> {
        match self {
            Metric::Pos => s.pos_accuracy,
            Metric::NerF1 => s.ner.as_ref().map(|n| n.micro.f1),
            Metric::NerF1NoMisc => s.ner.as_ref().map(|n| n.micro_no_misc.f1),
            Metric::NerMacroF1 => s.ner.as_ref().map(|n| n.macro_f1),
            Metric::Uas => s.uas,
            Metric::Las => s.las,
        }
    }

    /// Support behind the value: gold tokens or gold entities.
    pub fn support(&self, c: &Counts) -> usize {
        let gold_entities = |types: &[EntityType]| types.iter().map(|t| c.ner.get(t).map_or(0, |p| p.tp + p.fn_)).sum();
        match self {
            Metric::Pos => c.gold_tokens,
            Metric::NerF1 | Metric::NerMacroF1 => gold_entities(&EntityType::ALL),
            Metric::NerF1NoMisc => gold_entities(&[EntityType::Per, EntityType::Loc, EntityType::Org]),
            Metric::Uas | Metric::Las => c.dep_total,
        }
    }
}

impl std::fmt::Display for Metric {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct MetricOptions {
    /// Leave gold punctuation tokens out of UAS/LAS.
    pub exclude_punct: bool,
}

fn missing(doc: &Document, task: &'static str) -> MetricsError {
    MetricsError::MissingAnnotation { doc: doc.doc_id.clone(), task }
}

fn pos_correct(gold: &Document, pred: &PredDocument, al: &Alignment) -> Result<usize, MetricsError> {
    let g: Vec<&str> = gold.tokens().map(|t| t.upos.as_str()).collect();
    let p: Vec<Option<&str>> = pred.tokens().map(|t| t.pos.as_deref()).collect();
    let mut correct = 0;
    for &(gi, pi) in &al.pairs {
        match p[pi] {
            Some(tag) if tag == g[gi] => correct += 1,
            Some(_) => {}
            None => return Err(missing(gold, "pos")),
        }
    }
    Ok(correct)
}

/// Fraction of gold tokens paired with a prediction carrying the same UPOS.
pub fn pos_accuracy(gold: &Document, pred: &PredDocument, al: &Alignment) -> Result<f64, MetricsError> {
    let correct = pos_correct(gold, pred, al)?;
    let total = gold.token_count();
    Ok(if total == 0 { 1.0 } else { correct as f64 / total as f64 })
}

/// Entities as (type, start char, end char), one entry per occurrence.
fn entity_extents<'a>(sentences: impl Iterator<Item = (Vec<NerTag>, Vec<Span>)> + 'a) -> (Vec<(EntityType, usize, usize)>, usize) {
    let mut out = Vec::new();
    let mut repairs = 0;
    for (tags, spans) in sentences {
        let d = decode_bio(&tags);
        repairs += d.repairs;
        for e in d.spans {
            out.push((e.label, spans[e.start - 1].start, spans[e.end - 2].end));
        }
    }
    (out, repairs)
}

fn ner_counts(gold: &Document, pred: &PredDocument) -> Result<(BTreeMap<EntityType, Prf>, usize), MetricsError> {
    let (gold_entities, _) = entity_extents(gold.sentences.iter().map(|s| (s.ner_tags(), s.tokens.iter().map(|t| t.span).collect())));
    let mut pred_sentences = Vec::with_capacity(pred.sentences.len());
    for s in &pred.sentences {
        let tags = s.iter().map(|t| t.ner.ok_or_else(|| missing(gold, "ner"))).collect::<Result<Vec<_>, _>>()?;
        pred_sentences.push((tags, s.iter().map(|t| t.span).collect()));
    }
    let (pred_entities, repairs) = entity_extents(pred_sentences.into_iter());
    let mut unused: HashMap<(EntityType, usize, usize), usize> = HashMap::new();
    for e in &gold_entities {
        *unused.entry(*e).or_default() += 1;
    }
    let mut counts: BTreeMap<EntityType, Prf> = EntityType::ALL.iter().map(|&t| (t, Prf::default())).collect();
    for e in &pred_entities {
        let entry = counts.get_mut(&e.0).expect("all types present");
        match unused.get_mut(e) {
            Some(n) if *n > 0 => {
                *n -= 1;
                entry.tp += 1;
            }
            _ => entry.fp += 1,
        }
    }
    for (e, n) in unused {
        counts.get_mut(&e.0).expect("all types present").fn_ += n;
    }
    Ok((counts, repairs))
}

/// Exact-extent, exact-type entity scores for one document.
pub fn ner_f1(gold: &Document, pred: &PredDocument) -> Result<NerScores, MetricsError> {
    let (ner, ner_repairs) = ner_counts(gold, pred)?;
    Ok(Counts { ner, ner_repairs, ..Counts::default() }.ner_scores())
}

/// Returns (dep_total, uas_correct, las_correct).
fn dep_counts(gold: &Document, pred: &PredDocument, al: &Alignment, opts: MetricOptions) -> Result<(usize, usize, usize), MetricsError> {
    // head span of every flat token; None for the root
    let mut gold_heads: Vec<(Option<Span>, &str, bool)> = Vec::new();
    for s in &gold.sentences {
        for t in &s.tokens {
            let head = (t.head > 0).then(|| s.tokens[t.head - 1].span);
            gold_heads.push((head, t.deprel.as_str(), opts.exclude_punct && t.upos == PUNCTUATION));
        }
    }
    let mut pred_heads: Vec<(Option<Span>, &str)> = Vec::new();
    for s in &pred.sentences {
        for t in s {
            let (head, rel) = match (t.head, t.deprel.as_deref()) {
                (Some(h), Some(r)) => (h, r),
                _ => return Err(missing(gold, "dep")),
            };
            if head > s.len() {
                return Err(missing(gold, "dep"));
            }
            pred_heads.push(((head > 0).then(|| s[head - 1].span), rel));
        }
    }
    let total = gold_heads.iter().filter(|g| !g.2).count();
    let (mut uas, mut las) = (0, 0);
    for &(gi, pi) in &al.pairs {
        let (g_head, g_rel, skipped) = gold_heads[gi];
        let (p_head, p_rel) = pred_heads[pi];
        if !skipped && g_head == p_head {
            uas += 1;
            if g_rel == p_rel {
                las += 1;
            }
        }
    }
    Ok((total, uas, las))
}

/// Attachment scores over gold tokens; unmatched gold tokens count as errors.
pub fn uas_las(gold: &Document, pred: &PredDocument, al: &Alignment, opts: MetricOptions) -> Result<(f64, f64), MetricsError> {
    let (total, uas, las) = dep_counts(gold, pred, al, opts)?;
    let frac = |n: usize| if total == 0 { 1.0 } else { n as f64 / total as f64 };
    Ok((frac(uas), frac(las)))
}

/// Counts for the declared tasks on one document.
pub fn score_document(gold: &Document, pred: &PredDocument, tasks: &[Task], opts: MetricOptions) -> Result<Counts, MetricsError> {
    if gold.doc_id != pred.doc_id {
        return Err(MetricsError::DocumentMismatch { expected: gold.doc_id.clone(), found: pred.doc_id.clone() });
    }
    let al = align_tokens(gold, pred)?;
    let mut c = Counts { gold_tokens: gold.token_count(), ..Counts::default() };
    if tasks.contains(&Task::Pos) {
        c.pos_correct = pos_correct(gold, pred, &al)?;
    }
    if tasks.contains(&Task::Ner) {
        (c.ner, c.ner_repairs) = ner_counts(gold, pred)?;
    }
    if tasks.contains(&Task::Dep) {
        (c.dep_total, c.uas_correct, c.las_correct) = dep_counts(gold, pred, &al, opts)?;
    }
    Ok(c)
}

/// Per-document counts, in corpus order.
pub fn score_documents(gold: &Corpus, pred: &PredictionSet, opts: MetricOptions) -> Result<Vec<Counts>, MetricsError> {
    if gold.documents.len() != pred.documents.len() {
        let found = format!("{} documents", pred.documents.len());
        return Err(MetricsError::DocumentMismatch { expected: format!("{} documents", gold.documents.len()), found });
    }
    gold.documents.par_iter().zip(pred.documents.par_iter()).map(|(g, p)| score_document(g, p, &pred.tasks, opts)).collect()
}

pub fn score_corpus(gold: &Corpus, pred: &PredictionSet, opts: MetricOptions) -> Result<TaskScores, MetricsError> {
    let mut total = Counts::default();
    for c in score_documents(gold, pred, opts)? {
        total.add(&c);
    }
    Ok(total.scores(&pred.tasks))
}

/// Maps every sentence id of `original` to its document id.
pub fn sentence_units(original: &Corpus) -> HashMap<String, String> {
    original.documents.iter().flat_map(|d| d.sentences.iter().map(move |s| (s.sent_id.clone(), d.doc_id.clone()))).collect()
}

/// Sums per-document counts of a (possibly regrouped) corpus into the
/// original documents, found through each document's first sentence id.
/// Documents whose sentence is unknown keep their own id.
pub fn pool_by_unit(corpus: &Corpus, per_doc: &[Counts], units: &HashMap<String, String>) -> BTreeMap<String, Counts> {
    let mut out: BTreeMap<String, Counts> = BTreeMap::new();
    for (doc, counts) in corpus.documents.iter().zip(per_doc) {
        let unit = doc.sentences.first().and_then(|s| units.get(&s.sent_id)).cloned().unwrap_or_else(|| doc.doc_id.clone());
        out.entry(unit).or_default().add(counts);
    }
    out
}
