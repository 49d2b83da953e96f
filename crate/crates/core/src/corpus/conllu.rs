//! CoNLL-U reading and writing.
//!
//! NER tags travel in the MISC column as `name=<BIO tag>`; a token without a
//! `name=` attribute is `O`. Multi-word tokens and empty nodes are rejected.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::io::BufRead;

use thiserror::Error;

use super::validate::{check_sentence, Violation};
use super::{Corpus, Document, NerTag, Sentence, Span, Token};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("{message}")]
pub struct ParseError {
    /// 1-based input line the error refers to.
    pub line: usize,
    pub rule: String,
    pub message: String,
}

impl ParseError {
    fn new(line: usize, rule: &str, detail: impl AsRef<str>) -> Self {
        let detail = detail.as_ref();
        let message = if detail.is_empty() { format!("{rule} at line {line}") } else { format!("{rule} at line {line}: {detail}") };
        ParseError { line, rule: rule.to_string(), message }
    }

    pub fn to_violation(&self) -> Violation {
        Violation::error(format!("line {}", self.line), self.rule.clone(), self.message.clone())
    }
}

#[derive(Default)]
struct Block {
    start_line: usize,
    comments: Vec<(usize, String)>,
    newdoc: Option<(usize, String)>,
    sent_id: Option<String>,
    text: Option<(usize, String)>,
    tokens: Vec<(usize, Token)>,
    broken: bool,
}

impl Block {
    fn is_empty(&self) -> bool {
        self.comments.is_empty() && self.newdoc.is_none() && self.sent_id.is_none() && self.text.is_none() && self.tokens.is_empty()
    }
}

struct Parser {
    corpus: Corpus,
    current: Option<(String, Vec<Sentence>)>,
    doc_ids: HashSet<String>,
    sent_ids: HashSet<String>,
    carried_comments: Vec<String>,
    text_comments: Vec<(usize, String, String)>,
    warnings: Vec<Violation>,
    started: bool,
    /// Collect errors in `errors` and skip the offending sentence instead of failing.
    lenient: bool,
    errors: Vec<Violation>,
}

impl Parser {
    fn new(lenient: bool) -> Self {
        Parser {
            corpus: Corpus::default(),
            current: None,
            doc_ids: HashSet::new(),
            sent_ids: HashSet::new(),
            carried_comments: Vec::new(),
            text_comments: Vec::new(),
            warnings: Vec::new(),
            started: false,
            lenient,
            errors: Vec::new(),
        }
    }

    fn report(&mut self, e: ParseError) -> Result<(), ParseError> {
        if self.lenient {
            self.errors.push(e.to_violation());
            Ok(())
        } else {
            Err(e)
        }
    }

    fn flush_document(&mut self) {
        if let Some((doc_id, sentences)) = self.current.take() {
            let doc = Document::new(doc_id, sentences);
            for (line, sent_id, stated) in self.text_comments.drain(..) {
                if let Some(s) = doc.sentences.iter().find(|s| s.sent_id == sent_id) {
                    let derived = s.text();
                    if derived != stated {
                        self.warnings.push(Violation::warning(
                            format!("line {line}"),
                            "text-mismatch",
                            format!("`# text` comment of {sent_id} differs from the text derived from forms (`{derived}`)"),
                        ));
                    }
                }
            }
            self.corpus.documents.push(doc);
        }
    }

    fn open_document(&mut self, line: usize, doc_id: String) -> Result<(), ParseError> {
        self.flush_document();
        if !self.doc_ids.insert(doc_id.clone()) {
            self.report(ParseError::new(line, "duplicate-doc-id", format!("document id `{doc_id}` is used twice")))?;
        }
        self.current = Some((doc_id, Vec::new()));
        Ok(())
    }

    fn finish_block(&mut self, block: Block) -> Result<(), ParseError> {
        if block.is_empty() || block.broken {
            return Ok(());
        }
        if block.tokens.is_empty() {
            if let Some((line, id)) = block.newdoc {
                self.open_document(line, id)?;
                self.carried_comments.extend(block.comments.into_iter().map(|(_, c)| c));
            } else if !self.started && self.corpus.provenance.is_empty() {
                for (_, c) in block.comments {
                    let (k, v) = c.split_once(" = ").map(|(k, v)| (k.trim(), v)).unwrap_or((c.trim(), ""));
                    self.corpus.provenance.push((k.to_string(), v.to_string()));
                }
            } else {
                self.carried_comments.extend(block.comments.into_iter().map(|(_, c)| c));
            }
            self.started = true;
            return Ok(());
        }
        self.started = true;
        if let Some((line, id)) = block.newdoc {
            self.open_document(line, id)?;
        }
        if self.current.is_none() {
            let mut n = self.corpus.documents.len() + 1;
            while self.doc_ids.contains(&format!("doc{n}")) {
                n += 1;
            }
            self.open_document(block.start_line, format!("doc{n}"))?;
        }
        let (doc_id, sentences) = self.current.as_mut().expect("document opened above");
        let sent_id = block.sent_id.unwrap_or_else(|| format!("{}-s{}", doc_id, sentences.len() + 1));
        if !self.sent_ids.insert(sent_id.clone()) {
            return self.report(ParseError::new(block.start_line, "duplicate-sent-id", format!("sentence id `{sent_id}` is used twice")));
        }
        let lines: Vec<usize> = block.tokens.iter().map(|(l, _)| *l).collect();
        let mut comments = std::mem::take(&mut self.carried_comments);
        comments.extend(block.comments.into_iter().map(|(_, c)| c));
        let sentence = Sentence { sent_id: sent_id.clone(), comments, tokens: block.tokens.into_iter().map(|(_, t)| t).collect() };
        let issues = check_sentence(&sentence);
        if !issues.is_empty() {
            for issue in issues {
                let line = issue.token.map(|i| lines[i]).unwrap_or(block.start_line);
                self.report(ParseError::new(line, issue.rule, issue.message))?;
            }
            return Ok(());
        }
        if let Some((line, text)) = block.text {
            self.text_comments.push((line, sent_id, text));
        }
        sentences.push(sentence);
        Ok(())
    }
}

fn parse_token(line_no: usize, line: &str) -> Result<Token, ParseError> {
    let cols: Vec<&str> = line.split('\t').collect();
    if cols.len() != 10 {
        return Err(ParseError::new(line_no, "column-count", format!("expected 10 tab-separated columns, found {}", cols.len())));
    }
    let id = cols[0];
    if id.contains('-') {
        return Err(ParseError::new(line_no, "multiword-token", format!("multi-word token range `{id}` is not supported")));
    }
    if id.contains('.') {
        return Err(ParseError::new(line_no, "empty-node", format!("empty node `{id}` is not supported")));
    }
    let index: usize = id.parse().map_err(|_| ParseError::new(line_no, "invalid-id", format!("token id `{id}` is not a positive integer")))?;
    let head: usize = cols[6].parse().map_err(|_| ParseError::new(line_no, "non-integer-head", format!("head `{}` is not an integer", cols[6])))?;
    let mut ner = NerTag::O;
    let mut space_after = true;
    let mut misc = Vec::new();
    if cols[9] != "_" {
        for attr in cols[9].split('|') {
            if let Some(tag) = attr.strip_prefix("name=") {
                ner = NerTag::parse(tag).ok_or_else(|| ParseError::new(line_no, "invalid-ner-tag", format!("`{tag}` is not a BIO tag over PER/LOC/ORG/MISC")))?;
            } else if attr == "SpaceAfter=No" {
                space_after = false;
            } else if !attr.is_empty() {
                misc.push(attr.to_string());
            }
        }
    }
    Ok(Token {
        index,
        form: cols[1].to_string(),
        lemma: cols[2].to_string(),
        upos: cols[3].to_string(),
        xpos: cols[4].to_string(),
        feats: cols[5].to_string(),
        head,
        deprel: cols[7].to_string(),
        deps: cols[8].to_string(),
        misc,
        ner,
        span: Span::new(0, 0),
        space_after,
    })
}

/// Parses CoNLL-U and also returns non-fatal findings (e.g. `# text` mismatches).
pub fn parse_conllu_with_warnings<R: BufRead>(reader: R) -> Result<(Corpus, Vec<Violation>), ParseError> {
    parse(reader, false).map(|(c, _, w)| (c, w))
}

/// Reads the whole input and lists every violation (errors first, then
/// warnings) instead of stopping at the first. Only read failures are `Err`.
pub fn lint_conllu<R: BufRead>(reader: R) -> Result<Vec<Violation>, ParseError> {
    let (_, mut errors, warnings) = parse(reader, true)?;
    errors.extend(warnings);
    Ok(errors)
}

fn parse<R: BufRead>(reader: R, lenient: bool) -> Result<(Corpus, Vec<Violation>, Vec<Violation>), ParseError> {
    let mut parser = Parser::new(lenient);
    let mut block = Block::default();
    for (i, line) in reader.lines().enumerate() {
        let line_no = i + 1;
        let line = line.map_err(|e| ParseError::new(line_no, "io", e.to_string()))?;
        let line = line.strip_suffix('\r').unwrap_or(&line);
        if line.trim().is_empty() {
            parser.finish_block(std::mem::take(&mut block))?;
            continue;
        }
        if block.is_empty() {
            block.start_line = line_no;
        }
        if let Some(comment) = line.strip_prefix('#') {
            if !block.tokens.is_empty() {
                parser.report(ParseError::new(line_no, "comment-placement", "comment line inside a sentence's token lines"))?;
                block.broken = true;
                continue;
            }
            let comment = comment.strip_prefix(' ').unwrap_or(comment);
            let kv = comment.split_once('=').map(|(k, v)| (k.trim(), v.strip_prefix(' ').unwrap_or(v)));
            match kv {
                Some(("newdoc id", v)) => block.newdoc = Some((line_no, v.trim().to_string())),
                Some(("sent_id", v)) => block.sent_id = Some(v.trim().to_string()),
                Some(("text", v)) => block.text = Some((line_no, v.to_string())),
                _ if comment.trim() == "newdoc" => block.newdoc = Some((line_no, format!("doc{}", parser.doc_ids.len() + 1))),
                _ => block.comments.push((line_no, comment.to_string())),
            }
            continue;
        }
        match parse_token(line_no, line) {
            Ok(tok) => block.tokens.push((line_no, tok)),
            Err(e) => {
                parser.report(e)?;
                block.broken = true;
            }
        }
    }
    parser.finish_block(block)?;
    parser.flush_document();
    Ok((parser.corpus, parser.errors, parser.warnings))
}

pub fn parse_conllu<R: BufRead>(reader: R) -> Result<Corpus, ParseError> {
    parse_conllu_with_warnings(reader).map(|(c, _)| c)
}

pub fn parse_conllu_str(input: &str) -> Result<Corpus, ParseError> {
    parse_conllu(input.as_bytes())
}

pub(crate) fn write_token(out: &mut String, tok: &Token) {
    let mut misc: Vec<String> = tok.misc.clone();
    if !tok.space_after {
        misc.push("SpaceAfter=No".into());
    }
    misc.push(format!("name={}", tok.ner));
    let _ = writeln!(
        out,
        "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
        tok.index,
        tok.form,
        tok.lemma,
        tok.upos,
        tok.xpos,
        tok.feats,
        tok.head,
        tok.deprel,
        tok.deps,
        misc.join("|")
    );
}

/// Writes a corpus as CoNLL-U. Provenance pairs form a leading comment block.
pub fn serialize_conllu(corpus: &Corpus) -> String {
    let mut out = String::new();
    if !corpus.provenance.is_empty() {
        for (k, v) in &corpus.provenance {
            if v.is_empty() {
                let _ = writeln!(out, "# {k}");
            } else {
                let _ = writeln!(out, "# {k} = {v}");
            }
        }
        out.push('\n');
    }
    for doc in &corpus.documents {
        if doc.sentences.is_empty() {
            let _ = writeln!(out, "# newdoc id = {}\n", doc.doc_id);
            continue;
        }
        for (si, sentence) in doc.sentences.iter().enumerate() {
            if si == 0 {
                let _ = writeln!(out, "# newdoc id = {}", doc.doc_id);
            }
            let _ = writeln!(out, "# sent_id = {}", sentence.sent_id);
            let _ = writeln!(out, "# text = {}", sentence.text());
            for c in &sentence.comments {
                let _ = writeln!(out, "# {c}");
            }
            for tok in &sentence.tokens {
                write_token(&mut out, tok);
            }
            out.push('\n');
        }
    }
    out
}
