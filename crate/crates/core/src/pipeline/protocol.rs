//! The CoNLL-U exchange with external pipelines.
//!
//! Request: every document starts with `# newdoc id = <id>`. With given
//! tokenization each sentence is sent with its forms and `SpaceAfter=No`
//! attributes and every other column blanked to `_`. With own tokenization
//! each document is a comment-only block carrying `# text = <document text>`.
//!
//! Response: CoNLL-U with the same `# newdoc id` lines in the same order,
//! token lines filled for the declared tasks (UPOS for `pos`, HEAD and
//! DEPREL for `dep`, `name=<BIO>` in MISC for `ner`; a missing `name=` is
//! `O`). Token forms must appear in the document text in order, separated
//! only by whitespace.

use std::fmt::Write as _;

use super::{PredDocument, PredToken, Task, Tokenization};
use crate::corpus::{serialize_conllu, Corpus, NerTag, Span};

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Violation {
    pub doc_id: Option<String>,
    pub message: String,
}

fn violation(doc_id: Option<&str>, message: impl Into<String>) -> Violation {
    Violation { doc_id: doc_id.map(String::from), message: message.into() }
}

pub fn build_request(corpus: &Corpus, tokenization: Tokenization, send_labels: bool) -> String {
    if send_labels {
        let mut c = corpus.clone();
        c.provenance.clear();
        return serialize_conllu(&c);
    }
    let mut out = String::new();
    for doc in &corpus.documents {
        match tokenization {
            Tokenization::Own => {
                let _ = writeln!(out, "# newdoc id = {}\n# text = {}\n", doc.doc_id, doc.text);
            }
            Tokenization::Given => {
                if doc.sentences.is_empty() {
                    let _ = writeln!(out, "# newdoc id = {}\n", doc.doc_id);
                }
                for (si, s) in doc.sentences.iter().enumerate() {
                    if si == 0 {
                        let _ = writeln!(out, "# newdoc id = {}", doc.doc_id);
                    }
                    let _ = writeln!(out, "# sent_id = {}\n# text = {}", s.sent_id, s.text());
                    for t in &s.tokens {
                        let misc = if t.space_after { "_" } else { "SpaceAfter=No" };
                        let _ = writeln!(out, "{}\t{}\t_\t_\t_\t_\t_\t_\t_\t{}", t.index, t.form, misc);
                    }
                    out.push('\n');
                }
            }
        }
    }
    out
}

struct RawDoc {
    doc_id: String,
    sentences: Vec<Vec<(usize, String)>>,
}

fn split_documents(text: &str, single_doc: Option<&str>) -> Result<Vec<RawDoc>, Violation> {
    let mut docs: Vec<RawDoc> = Vec::new();
    let mut sentence: Vec<(usize, String)> = Vec::new();
    let flush = |docs: &mut Vec<RawDoc>, sentence: &mut Vec<(usize, String)>| {
        if !sentence.is_empty() {
            if let Some(d) = docs.last_mut() {
                d.sentences.push(std::mem::take(sentence));
            }
        }
    };
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let line = line.strip_suffix('\r').unwrap_or(line);
        if line.trim().is_empty() {
            flush(&mut docs, &mut sentence);
        } else if let Some(comment) = line.strip_prefix('#') {
            if let Some((key, value)) = comment.split_once('=') {
                if key.trim() == "newdoc id" {
                    flush(&mut docs, &mut sentence);
                    docs.push(RawDoc { doc_id: value.trim().to_string(), sentences: Vec::new() });
                }
            }
        } else {
            if docs.is_empty() {
                match single_doc {
                    Some(id) => docs.push(RawDoc { doc_id: id.to_string(), sentences: Vec::new() }),
                    None => return Err(violation(None, format!("line {line_no}: token line before any `# newdoc id`"))),
                }
            }
            sentence.push((line_no, line.to_string()));
        }
    }
    flush(&mut docs, &mut sentence);
    Ok(docs)
}

fn parse_sentence(doc_id: &str, lines: &[(usize, String)], tasks: &[Task]) -> Result<Vec<PredToken>, Violation> {
    let err = |line: usize, msg: String| violation(Some(doc_id), format!("line {line}: {msg}"));
    let n = lines.len();
    let mut out = Vec::with_capacity(n);
    for (pos, (line_no, line)) in lines.iter().enumerate() {
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 10 {
            return Err(err(*line_no, format!("expected 10 columns, found {}", cols.len())));
        }
        if cols[0] != (pos + 1).to_string() {
            return Err(err(*line_no, format!("expected token id {}, found `{}`", pos + 1, cols[0])));
        }
        if cols[1].is_empty() {
            return Err(err(*line_no, "empty form".into()));
        }
        let mut tok = PredToken { form: cols[1].to_string(), span: Span::new(0, 0), pos: None, ner: None, head: None, deprel: None };
        if tasks.contains(&Task::Pos) {
            if cols[3] == "_" || cols[3].is_empty() {
                return Err(err(*line_no, "missing UPOS for a pipeline declaring pos".into()));
            }
            tok.pos = Some(cols[3].to_string());
        }
        if tasks.contains(&Task::Dep) {
            let head: usize = cols[6].parse().map_err(|_| err(*line_no, format!("head `{}` is not an integer", cols[6])))?;
            if head > n {
                return Err(err(*line_no, format!("head {head} out of range for a sentence of {n} tokens")));
            }
            if cols[7] == "_" || cols[7].is_empty() {
                return Err(err(*line_no, "missing DEPREL for a pipeline declaring dep".into()));
            }
            tok.head = Some(head);
            tok.deprel = Some(cols[7].to_string());
        }
        if tasks.contains(&Task::Ner) {
            let mut tag = NerTag::O;
            for attr in cols[9].split('|') {
                if let Some(v) = attr.strip_prefix("name=") {
                    tag = NerTag::parse(v).ok_or_else(|| err(*line_no, format!("`{v}` is not a BIO tag")))?;
                }
            }
            tok.ner = Some(tag);
        }
        out.push(tok);
    }
    Ok(out)
}

/// Locates each form in the document text, skipping whitespace only.
fn assign_spans(doc_id: &str, text: &[char], sentences: &mut [Vec<PredToken>]) -> Result<(), Violation> {
    let mut cursor = 0usize;
    for tok in sentences.iter_mut().flat_map(|s| s.iter_mut()) {
        while cursor < text.len() && text[cursor].is_whitespace() {
            cursor += 1;
        }
        let form: Vec<char> = tok.form.chars().collect();
        let end = cursor + form.len();
        if end > text.len() || text[cursor..end] != form[..] {
            return Err(violation(Some(doc_id), format!("token `{}` does not match the document text at offset {cursor}", tok.form)));
        }
        tok.span = Span::new(cursor, end);
        cursor = end;
    }
    Ok(())
}

pub(crate) fn parse_response(text: &str, corpus: &Corpus, tasks: &[Task], tokenization: Tokenization) -> Result<Vec<PredDocument>, Violation> {
    let single = (corpus.documents.len() == 1).then(|| corpus.documents[0].doc_id.as_str());
    let raw = split_documents(text, single)?;
    if raw.len() != corpus.documents.len() {
        return Err(violation(None, format!("expected {} documents, received {}", corpus.documents.len(), raw.len())));
    }
    let mut out = Vec::with_capacity(raw.len());
    for (raw_doc, gold) in raw.into_iter().zip(&corpus.documents) {
        if raw_doc.doc_id != gold.doc_id {
            return Err(violation(Some(&gold.doc_id), format!("expected document `{}`, received `{}`", gold.doc_id, raw_doc.doc_id)));
        }
        let mut sentences = raw_doc.sentences.iter().map(|s| parse_sentence(&gold.doc_id, s, tasks)).collect::<Result<Vec<_>, _>>()?;
        let chars: Vec<char> = gold.text.chars().collect();
        assign_spans(&gold.doc_id, &chars, &mut sentences)?;
        if tokenization == Tokenization::Given {
            let got: Vec<Span> = sentences.iter().flatten().map(|t| t.span).collect();
            let want: Vec<Span> = gold.tokens().map(|t| t.span).collect();
            if got != want {
                return Err(violation(Some(&gold.doc_id), "returned tokenization differs from the given tokenization"));
            }
        }
        out.push(PredDocument { doc_id: gold.doc_id.clone(), sentences });
    }
    Ok(out)
}
