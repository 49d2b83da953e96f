use std::collections::HashSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use super::{Corpus, Document, NerTag, Sentence, Span};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::Error => "error",
            Severity::Warning => "warning",
        })
    }
}

/// One finding of corpus validation, printed as
/// `<severity>\t<location>\t<rule>\t<message>`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub severity: Severity,
    pub location: String,
    pub rule: String,
    pub message: String,
}

impl Violation {
    pub fn error(location: impl Into<String>, rule: impl Into<String>, message: impl Into<String>) -> Self {
        Violation { severity: Severity::Error, location: location.into(), rule: rule.into(), message: message.into() }
    }

    pub fn warning(location: impl Into<String>, rule: impl Into<String>, message: impl Into<String>) -> Self {
        Violation { severity: Severity::Warning, location: location.into(), rule: rule.into(), message: message.into() }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}\t{}\t{}\t{}", self.severity, self.location, self.rule, self.message)
    }
}

/// A structural problem inside one sentence; `token` is the 0-based token
/// position it concerns, if any.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct SentenceIssue {
    pub token: Option<usize>,
    pub rule: &'static str,
    pub message: String,
}

/// Index sequence, head range, self-loops, single root, acyclicity and BIO
/// well-formedness. Stops at the first issue of each kind that would make
/// later checks meaningless.
pub(crate) fn check_sentence(sentence: &Sentence) -> Vec<SentenceIssue> {
    let mut issues = Vec::new();
    let n = sentence.tokens.len();
    if n == 0 {
        issues.push(SentenceIssue { token: None, rule: "empty-sentence", message: "sentence has no tokens".into() });
        return issues;
    }
    for (i, tok) in sentence.tokens.iter().enumerate() {
        if tok.index != i + 1 {
            issues.push(SentenceIssue {
                token: Some(i),
                rule: "index-sequence",
                message: format!("expected token index {}, found {}", i + 1, tok.index),
            });
        }
        if tok.form.is_empty() {
            issues.push(SentenceIssue { token: Some(i), rule: "empty-form", message: "token form is empty".into() });
        }
        if tok.head > n {
            issues.push(SentenceIssue {
                token: Some(i),
                rule: "head-out-of-range",
                message: format!("head {} outside 0..={n}", tok.head),
            });
        } else if tok.head == i + 1 {
            issues.push(SentenceIssue { token: Some(i), rule: "self-loop", message: format!("token {} is its own head", i + 1) });
        }
    }
    if !issues.is_empty() {
        return issues;
    }

    let roots: Vec<usize> = (0..n).filter(|&i| sentence.tokens[i].head == 0).collect();
    match roots.len() {
        0 => issues.push(SentenceIssue { token: None, rule: "no-root", message: "no token has head 0".into() }),
        1 => {}
        _ => issues.push(SentenceIssue {
            token: Some(roots[1]),
            rule: "multiple-roots",
            message: format!("tokens {} are all attached to the root", roots.iter().map(|r| (r + 1).to_string()).collect::<Vec<_>>().join(", ")),
        }),
    }
    if let Some(start) = find_cycle(sentence) {
        issues.push(SentenceIssue { token: Some(start), rule: "cycle", message: format!("head chain from token {} never reaches the root", start + 1) });
    }

    let mut prev = NerTag::O;
    for (i, tok) in sentence.tokens.iter().enumerate() {
        if let NerTag::I(ty) = tok.ner {
            if prev.entity_type() != Some(ty) {
                issues.push(SentenceIssue {
                    token: Some(i),
                    rule: "bio-discontinuity",
                    message: format!("BIO discontinuity: {} follows {}", tok.ner, prev),
                });
            }
        }
        prev = tok.ner;
    }
    issues
}

/// First token (0-based) whose head chain does not terminate at the root.
fn find_cycle(sentence: &Sentence) -> Option<usize> {
    let n = sentence.tokens.len();
    // 0 = unvisited, 1 = on current path, 2 = reaches root
    let mut state = vec![0u8; n + 1];
    state[0] = 2;
    for start in 1..=n {
        let mut path = Vec::new();
        let mut cur = start;
        while state[cur] == 0 {
            state[cur] = 1;
            path.push(cur);
            let head = sentence.tokens[cur - 1].head;
            if head > n {
                return Some(start - 1);
            }
            cur = head;
        }
        if state[cur] == 1 {
            return Some(start - 1);
        }
        for p in path {
            state[p] = 2;
        }
    }
    None
}

fn location(doc: &Document, sentence: Option<&Sentence>, token: Option<usize>) -> String {
    let mut loc = doc.doc_id.clone();
    if let Some(s) = sentence {
        loc.push('/');
        loc.push_str(&s.sent_id);
    }
    if let Some(t) = token {
        loc.push_str(&format!("/{}", t + 1));
    }
    loc
}

/// Checks one document: sentence structure, span soundness and text reconstruction.
pub fn validate_document(doc: &Document) -> Vec<Violation> {
    let mut out = Vec::new();
    let chars: Vec<char> = doc.text.chars().collect();
    let mut prev_end: Option<usize> = None;
    for sentence in &doc.sentences {
        for issue in check_sentence(sentence) {
            out.push(Violation::error(location(doc, Some(sentence), issue.token), issue.rule, issue.message));
        }
        for (i, tok) in sentence.tokens.iter().enumerate() {
            let loc = || location(doc, Some(sentence), Some(i));
            let Span { start, end } = tok.span;
            if end <= start {
                out.push(Violation::error(loc(), "empty-span", format!("span {} is empty", tok.span)));
                continue;
            }
            if let Some(p) = prev_end {
                if start < p {
                    out.push(Violation::error(loc(), "span-order", format!("span {} overlaps or precedes the previous token", tok.span)));
                }
            }
            prev_end = Some(end);
            if end > chars.len() {
                out.push(Violation::error(loc(), "span-bounds", format!("span {} exceeds text length {}", tok.span, chars.len())));
                continue;
            }
            let covered: String = chars[start..end].iter().collect();
            if covered != tok.form {
                out.push(Violation::error(loc(), "span-form", format!("text{} is `{covered}` but form is `{}`", tok.span, tok.form)));
            }
        }
    }
    let mut rebuilt = doc.clone();
    rebuilt.rebuild();
    if rebuilt.text != doc.text {
        out.push(Violation::error(location(doc, None, None), "text-reconstruction", "document text differs from forms joined by SpaceAfter"));
    }
    out
}

/// Full corpus validation; an empty result means the corpus is valid.
pub fn validate(corpus: &Corpus) -> Vec<Violation> {
    let mut out = Vec::new();
    let mut doc_ids = HashSet::new();
    let mut sent_ids = HashSet::new();
    for doc in &corpus.documents {
        if !doc_ids.insert(doc.doc_id.as_str()) {
            out.push(Violation::error(doc.doc_id.clone(), "duplicate-doc-id", format!("document id `{}` is used twice", doc.doc_id)));
        }
        for s in &doc.sentences {
            if !sent_ids.insert(s.sent_id.as_str()) {
                out.push(Violation::error(location(doc, Some(s), None), "duplicate-sent-id", format!("sentence id `{}` is used twice", s.sent_id)));
            }
        }
        out.extend(validate_document(doc));
    }
    out
}
