#![allow(dead_code)]

pub mod oracles;

use std::path::PathBuf;

use augeval_core::corpus::{parse_conllu, Corpus, Document, EntityType, NerTag, Sentence, Span, Token};
use augeval_core::pipeline::{PredDocument, PredToken};
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/fixtures").join(name)
}

pub fn fixture(name: &str) -> Corpus {
    let file = std::fs::File::open(fixture_path(name)).expect("fixture exists");
    parse_conllu(std::io::BufReader::new(file)).expect("fixture parses")
}

const WORDS: &[&str] = &["hun", "så", "huset", "går", "Ærø", "møder", "på", "åen", "Vi", "og", "bilen", "Ål", "øl", "kører", "til", "FC", "ÆBLE", "x"];
const NAMES: &[&str] = &["Hans", "Hansen", "Mette", "Ole", "Århus", "Novo", "Nordisk", "Søren"];
const PUNCT: &[&str] = &[".", ",", "!", "?", "\"", ":"];
const UPOS: &[&str] = &["NOUN", "VERB", "ADP", "PRON", "ADJ", "DET"];
const DEPRELS: &[&str] = &["nsubj", "obj", "obl", "case", "amod", "det", "punct", "flat"];

pub fn random_sentence(rng: &mut ChaCha8Rng, sent_id: String, max_tokens: usize) -> Sentence {
    let n = rng.random_range(1..=max_tokens);
    // random tree: visit nodes in random order, attach each to an earlier one
    let mut order: Vec<usize> = (1..=n).collect();
    order.shuffle(rng);
    let mut heads = vec![0usize; n + 1];
    for k in 1..n {
        heads[order[k]] = order[rng.random_range(0..k)];
    }
    let mut ner = vec![NerTag::O; n + 1];
    let mut i = 1;
    while i <= n {
        if rng.random_bool(0.3) {
            let ty = *EntityType::ALL.choose(rng).unwrap();
            let len = rng.random_range(1..=3).min(n - i + 1);
            ner[i] = NerTag::B(ty);
            for tag in &mut ner[i + 1..i + len] {
                *tag = NerTag::I(ty);
            }
            i += len;
        } else {
            i += 1;
        }
    }
    let tokens = (1..=n)
        .map(|i| {
            let (form, upos) = if ner[i] != NerTag::O {
                (*NAMES.choose(rng).unwrap(), "PROPN")
            } else if rng.random_bool(0.15) {
                (*PUNCT.choose(rng).unwrap(), "PUNCT")
            } else {
                (*WORDS.choose(rng).unwrap(), *UPOS.choose(rng).unwrap())
            };
            let deprel = if heads[i] == 0 { "root" } else { *DEPRELS.choose(rng).unwrap() };
            let mut t = Token::new(i, form, upos, heads[i], deprel).with_ner(ner[i]).with_space_after(rng.random_bool(0.8));
            if rng.random_bool(0.5) {
                t.lemma = form.to_lowercase();
            }
            t
        })
        .collect();
    Sentence::new(sent_id, tokens)
}

/// A valid corpus with up to `max_docs` documents of up to `max_sents`
/// sentences of up to `max_tokens` tokens.
pub fn random_corpus(seed: u64, max_docs: usize, max_sents: usize, max_tokens: usize) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let docs = rng.random_range(1..=max_docs);
    let documents = (0..docs)
        .map(|d| {
            let sents = rng.random_range(1..=max_sents);
            let sentences = (0..sents).map(|s| random_sentence(&mut rng, format!("d{d}-s{s}"), max_tokens)).collect();
            Document::new(format!("d{d}"), sentences)
        })
        .collect();
    Corpus::new(documents)
}

pub fn gold_prediction(doc: &Document) -> PredDocument {
    PredDocument {
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
    }
}

fn random_tag(rng: &mut ChaCha8Rng) -> NerTag {
    let ty = *EntityType::ALL.choose(rng).unwrap();
    match rng.random_range(0..3) {
        0 => NerTag::O,
        1 => NerTag::B(ty),
        _ => NerTag::I(ty),
    }
}

/// A noisy prediction: labels perturbed, and sometimes two adjacent tokens
/// merged into one span so that tokenizations differ.
pub fn perturbed_prediction(doc: &Document, rng: &mut ChaCha8Rng) -> PredDocument {
    let mut pred = gold_prediction(doc);
    for s in &mut pred.sentences {
        if s.len() >= 2 && rng.random_bool(0.3) {
            let i = rng.random_range(0..s.len() - 1);
            let b = s.remove(i + 1);
            s[i].span = Span::new(s[i].span.start, b.span.end);
            s[i].form = doc.text.chars().skip(s[i].span.start).take(s[i].span.len()).collect();
        }
        let n = s.len();
        for t in s.iter_mut() {
            if rng.random_bool(0.3) {
                t.pos = Some(UPOS.choose(rng).unwrap().to_string());
            }
            if rng.random_bool(0.3) {
                t.ner = Some(random_tag(rng));
            }
            if rng.random_bool(0.3) || t.head.unwrap() > n {
                t.head = Some(rng.random_range(0..=n));
            }
            if rng.random_bool(0.3) {
                t.deprel = Some(DEPRELS.choose(rng).unwrap().to_string());
            }
        }
    }
    pred
}
