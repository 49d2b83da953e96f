//! Brute-force metric implementations used as test oracles.

use augeval_core::corpus::{Document, EntityType, NerTag, Span};
use augeval_core::metrics::Prf;
use augeval_core::pipeline::PredDocument;

/// Entities as (type, first char, last char + 1); an `I-X` not continuing an
/// `X` entity opens a new one.
pub fn brute_entities(tags: &[NerTag], spans: &[Span]) -> Vec<(EntityType, usize, usize)> {
    let mut out: Vec<(EntityType, usize, usize)> = Vec::new();
    let mut open = false;
    for i in 0..tags.len() {
        match tags[i] {
            NerTag::O => open = false,
            NerTag::B(t) => {
                out.push((t, spans[i].start, spans[i].end));
                open = true;
            }
            NerTag::I(t) => {
                let continues = open && i > 0 && tags[i - 1].entity_type() == Some(t);
                if continues {
                    out.last_mut().unwrap().2 = spans[i].end;
                } else {
                    out.push((t, spans[i].start, spans[i].end));
                }
                open = true;
            }
        }
    }
    out
}

pub fn brute_ner(gold: &Document, pred: &PredDocument) -> Vec<(EntityType, Prf)> {
    let mut g = Vec::new();
    for s in &gold.sentences {
        let tags: Vec<NerTag> = s.tokens.iter().map(|t| t.ner).collect();
        let spans: Vec<Span> = s.tokens.iter().map(|t| t.span).collect();
        g.extend(brute_entities(&tags, &spans));
    }
    let mut p = Vec::new();
    for s in &pred.sentences {
        let tags: Vec<NerTag> = s.iter().map(|t| t.ner.unwrap()).collect();
        let spans: Vec<Span> = s.iter().map(|t| t.span).collect();
        p.extend(brute_entities(&tags, &spans));
    }
    // every (gold, pred) pair is compared; a gold entity is used at most once
    let mut used = vec![false; g.len()];
    let mut matched = vec![false; p.len()];
    for (pi, pe) in p.iter().enumerate() {
        for (gi, ge) in g.iter().enumerate() {
            if !used[gi] && pe == ge {
                used[gi] = true;
                matched[pi] = true;
                break;
            }
        }
    }
    EntityType::ALL
        .iter()
        .map(|&ty| {
            let tp = p.iter().zip(&matched).filter(|(e, m)| e.0 == ty && **m).count();
            let fp = p.iter().zip(&matched).filter(|(e, m)| e.0 == ty && !**m).count();
            let fn_ = g.iter().zip(&used).filter(|(e, u)| e.0 == ty && !**u).count();
            (ty, Prf { tp, fp, fn_ })
        })
        .collect()
}

pub fn brute_f1(tp: usize, fp: usize, fn_: usize) -> f64 {
    if tp + fp + fn_ == 0 {
        return 1.0;
    }
    let p = if tp + fp == 0 { 0.0 } else { tp as f64 / (tp + fp) as f64 };
    let r = if tp + fn_ == 0 { 0.0 } else { tp as f64 / (tp + fn_) as f64 };
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// (total, uas, las) by looking every token up by span.
pub fn brute_attachment(gold: &Document, pred: &PredDocument, skip_punct: bool) -> (usize, usize, usize) {
    let (mut total, mut uas, mut las) = (0, 0, 0);
    for s in &gold.sentences {
        for t in &s.tokens {
            if skip_punct && t.upos == "PUNCT" {
                continue;
            }
            total += 1;
            let gold_head = if t.head == 0 { None } else { Some(s.tokens[t.head - 1].span) };
            for ps in &pred.sentences {
                for pt in ps {
                    if pt.span == t.span {
                        let h = pt.head.unwrap();
                        let pred_head = if h == 0 { None } else { Some(ps[h - 1].span) };
                        if pred_head == gold_head {
                            uas += 1;
                            if pt.deprel.as_deref() == Some(t.deprel.as_str()) {
                                las += 1;
                            }
                        }
                    }
                }
            }
        }
    }
    (total, uas, las)
}

pub fn brute_pos(gold: &Document, pred: &PredDocument) -> usize {
    gold.tokens().filter(|g| pred.tokens().any(|p| p.span == g.span && p.pos.as_deref() == Some(g.upos.as_str()))).count()
}
