//! Document / sentence / token data model for gold-annotated corpora.
//!
//! Character offsets are counted in Unicode scalar values, not bytes, so a
//! one-character substitution never moves a span. A sentence's raw text is
//! its token forms joined by a single space after every token whose
//! `space_after` flag is set (the last token's flag is kept but does not
//! contribute). A document's text is its sentence texts joined by a single
//! space.

mod bio;
mod conllu;
mod group;
mod validate;

use std::fmt;

use serde::{Deserialize, Serialize};

pub use bio::{decode_bio, encode_bio, extract_entities, BioDecoding};
pub use conllu::{lint_conllu, parse_conllu, parse_conllu_str, parse_conllu_with_warnings, serialize_conllu, ParseError};
pub use group::group_sentences;
pub use validate::{validate, validate_document, Severity, Violation};

/// Universal POS tag used for proper nouns.
pub const PROPER_NOUN: &str = "PROPN";
/// Universal POS tag used for punctuation.
pub const PUNCTUATION: &str = "PUNCT";

/// Half-open character interval `[start, end)` into a document's text.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Span {
    pub start: usize,
    pub end: usize,
}

impl Span {
    pub fn new(start: usize, end: usize) -> Self {
        Span { start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}, {})", self.start, self.end)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum EntityType {
    #[serde(rename = "PER")]
    Per,
    #[serde(rename = "LOC")]
    Loc,
    #[serde(rename = "ORG")]
    Org,
    #[serde(rename = "MISC")]
    Misc,
}

impl EntityType {
    pub const ALL: [EntityType; 4] = [EntityType::Per, EntityType::Loc, EntityType::Org, EntityType::Misc];

    pub fn as_str(&self) -> &'static str {
        match self {
            EntityType::Per => "PER",
            EntityType::Loc => "LOC",
            EntityType::Org => "ORG",
            EntityType::Misc => "MISC",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "PER" => Some(EntityType::Per),
            "LOC" => Some(EntityType::Loc),
            "ORG" => Some(EntityType::Org),
            "MISC" => Some(EntityType::Misc),
            _ => None,
        }
    }
}

impl fmt::Display for EntityType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A BIO entity tag.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum NerTag {
    #[default]
    O,
    B(EntityType),
    I(EntityType),
}

impl NerTag {
    pub fn parse(s: &str) -> Option<Self> {
        if s == "O" {
            return Some(NerTag::O);
        }
        let (prefix, label) = s.split_once('-')?;
        let ty = EntityType::parse(label)?;
        match prefix {
            "B" => Some(NerTag::B(ty)),
            "I" => Some(NerTag::I(ty)),
            _ => None,
        }
    }

    pub fn entity_type(&self) -> Option<EntityType> {
        match self {
            NerTag::O => None,
            NerTag::B(t) | NerTag::I(t) => Some(*t),
        }
    }
}

impl fmt::Display for NerTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NerTag::O => f.write_str("O"),
            NerTag::B(t) => write!(f, "B-{t}"),
            NerTag::I(t) => write!(f, "I-{t}"),
        }
    }
}

impl Serialize for NerTag {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for NerTag {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        NerTag::parse(&s).ok_or_else(|| serde::de::Error::custom(format!("invalid BIO tag `{s}`")))
    }
}

/// One surface token with its gold annotations.
///
/// `lemma`, `xpos`, `feats`, `deps` and the unrecognised `misc` attributes
/// are opaque and carried through unchanged.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    /// 1-based position within the sentence.
    pub index: usize,
    pub form: String,
    pub lemma: String,
    pub upos: String,
    pub xpos: String,
    pub feats: String,
    /// Sentence-relative head index; 0 is the root.
    pub head: usize,
    pub deprel: String,
    pub deps: String,
    /// MISC attributes other than `name=` and `SpaceAfter=No`, in input order.
    pub misc: Vec<String>,
    pub ner: NerTag,
    pub span: Span,
    pub space_after: bool,
}

impl Token {
    /// A token with blank opaque columns, suitable for building corpora in code.
    pub fn new(index: usize, form: impl Into<String>, upos: impl Into<String>, head: usize, deprel: impl Into<String>) -> Self {
        Token {
            index,
            form: form.into(),
            lemma: "_".into(),
            upos: upos.into(),
            xpos: "_".into(),
            feats: "_".into(),
            head,
            deprel: deprel.into(),
            deps: "_".into(),
            misc: Vec::new(),
            ner: NerTag::O,
            span: Span::new(0, 0),
            space_after: true,
        }
    }

    pub fn with_ner(mut self, ner: NerTag) -> Self {
        self.ner = ner;
        self
    }

    pub fn with_space_after(mut self, space_after: bool) -> Self {
        self.space_after = space_after;
        self
    }

    pub fn char_len(&self) -> usize {
        self.form.chars().count()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Sentence {
    pub sent_id: String,
    /// Comment lines other than `sent_id`, `text` and `newdoc`, without the leading `# `.
    pub comments: Vec<String>,
    pub tokens: Vec<Token>,
}

impl Sentence {
    pub fn new(sent_id: impl Into<String>, tokens: Vec<Token>) -> Self {
        Sentence { sent_id: sent_id.into(), comments: Vec::new(), tokens }
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    /// Raw text of the sentence alone.
    pub fn text(&self) -> String {
        let mut out = String::new();
        for (i, tok) in self.tokens.iter().enumerate() {
            if i > 0 && self.tokens[i - 1].space_after {
                out.push(' ');
            }
            out.push_str(&tok.form);
        }
        out
    }

    pub fn ner_tags(&self) -> Vec<NerTag> {
        self.tokens.iter().map(|t| t.ner).collect()
    }

    /// Renumbers token indices 1..=n in order; heads are left alone.
    pub(crate) fn renumber(&mut self) {
        for (i, tok) in self.tokens.iter_mut().enumerate() {
            tok.index = i + 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Document {
    pub doc_id: String,
    pub sentences: Vec<Sentence>,
    pub text: String,
}

impl Document {
    /// Builds a document, deriving its text and every token span from the forms.
    pub fn new(doc_id: impl Into<String>, sentences: Vec<Sentence>) -> Self {
        let mut doc = Document { doc_id: doc_id.into(), sentences, text: String::new() };
        doc.rebuild();
        doc
    }

    /// Recomputes `text` and all token spans from forms and `space_after`.
    pub fn rebuild(&mut self) {
        let mut text = String::new();
        let mut offset = 0usize;
        for (si, sentence) in self.sentences.iter_mut().enumerate() {
            if si > 0 {
                text.push(' ');
                offset += 1;
            }
            let n = sentence.tokens.len();
            for ti in 0..n {
                if ti > 0 && sentence.tokens[ti - 1].space_after {
                    text.push(' ');
                    offset += 1;
                }
                let tok = &mut sentence.tokens[ti];
                let len = tok.form.chars().count();
                tok.span = Span::new(offset, offset + len);
                text.push_str(&tok.form);
                offset += len;
            }
        }
        self.text = text;
    }

    pub fn tokens(&self) -> impl Iterator<Item = &Token> {
        self.sentences.iter().flat_map(|s| s.tokens.iter())
    }

    pub fn token_count(&self) -> usize {
        self.sentences.iter().map(Sentence::len).sum()
    }

    pub fn char_len(&self) -> usize {
        self.text.chars().count()
    }
}

/// Ordered documents plus free-form origin metadata.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Corpus {
    pub documents: Vec<Document>,
    /// `key = value` pairs written as leading comments, e.g. augmenter provenance.
    pub provenance: Vec<(String, String)>,
}

impl Corpus {
    pub fn new(documents: Vec<Document>) -> Self {
        Corpus { documents, provenance: Vec::new() }
    }

    pub fn sentences(&self) -> impl Iterator<Item = &Sentence> {
        self.documents.iter().flat_map(|d| d.sentences.iter())
    }

    pub fn sentence_count(&self) -> usize {
        self.documents.iter().map(|d| d.sentences.len()).sum()
    }

    pub fn token_count(&self) -> usize {
        self.documents.iter().map(Document::token_count).sum()
    }

    pub fn provenance_value(&self, key: &str) -> Option<&str> {
        self.provenance.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn set_provenance(&mut self, key: impl Into<String>, value: impl Into<String>) {
        let key = key.into();
        let value = value.into();
        match self.provenance.iter_mut().find(|(k, _)| *k == key) {
            Some(slot) => slot.1 = value,
            None => self.provenance.push((key, value)),
        }
    }
}

/// An entity as a half-open, 1-based token-index range within a sentence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct EntitySpan {
    #[serde(rename = "type")]
    pub label: EntityType,
    pub start: usize,
    pub end: usize,
}

impl EntitySpan {
    pub fn new(label: EntityType, start: usize, end: usize) -> Self {
        EntitySpan { label, start, end }
    }

    pub fn len(&self) -> usize {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.end <= self.start
    }
}
