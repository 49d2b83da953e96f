//! Whitespace deletion with token merging.
//!
//! Two tokens whose separating space is removed become one token:
//!
//! * form: concatenation; POS and the opaque columns come from the first token;
//! * NER: the first token's tag when both belong to the same gold entity,
//!   otherwise `O`; orphaned `I-X` tags left behind become `B-X`;
//! * head: if the second token is an ancestor of the first, the merged token
//!   takes the second token's head and relation, otherwise the first's. This
//!   covers both internal arcs and the root case and keeps the sentence a tree;
//! * dependents of either token attach to the merged token.

use rand::Rng;

use crate::corpus::{decode_bio, Document, NerTag, Sentence};

/// Removes each within-sentence space independently with probability `rate`.
pub fn spacing_augment<R: Rng + ?Sized>(doc: &Document, rate: f64, rng: &mut R) -> Document {
    let mut out = doc.clone();
    for sentence in &mut out.sentences {
        let n = sentence.tokens.len();
        let remove: Vec<bool> = (0..n.saturating_sub(1)).map(|i| sentence.tokens[i].space_after && rng.random_bool(rate)).collect();
        if remove.iter().any(|&r| r) {
            merge_sentence(sentence, &remove);
        }
    }
    out.rebuild();
    out
}

/// Merges token `i` with token `i + 1` wherever `remove[i]` is set.
pub(crate) fn merge_sentence(sentence: &mut Sentence, remove: &[bool]) {
    let mut entity: Vec<Option<usize>> = vec![None; sentence.tokens.len()];
    for (id, span) in decode_bio(&sentence.ner_tags()).spans.iter().enumerate() {
        for pos in span.start..span.end {
            entity[pos - 1] = Some(id);
        }
    }
    // right to left keeps the positions of pending merges stable
    for i in (0..remove.len()).rev() {
        if remove[i] {
            merge_pair(sentence, &mut entity, i);
        }
    }
    let mut prev = NerTag::O;
    for tok in &mut sentence.tokens {
        if let NerTag::I(ty) = tok.ner {
            if prev.entity_type() != Some(ty) {
                tok.ner = NerTag::B(ty);
            }
        }
        prev = tok.ner;
    }
}

fn is_ancestor(sentence: &Sentence, ancestor: usize, mut node: usize) -> bool {
    let n = sentence.tokens.len();
    for _ in 0..=n {
        node = sentence.tokens[node - 1].head;
        if node == ancestor {
            return true;
        }
        if node == 0 {
            return false;
        }
    }
    false
}

/// Merges 0-based positions `i` and `i + 1`.
fn merge_pair(sentence: &mut Sentence, entity: &mut Vec<Option<usize>>, i: usize) {
    let (a, b) = (i + 1, i + 2);
    let take_second = is_ancestor(sentence, b, a);
    let second = sentence.tokens.remove(i + 1);
    let second_entity = entity.remove(i + 1);
    let first = &mut sentence.tokens[i];
    if take_second {
        first.head = second.head;
        first.deprel = second.deprel.clone();
    }
    first.form.push_str(&second.form);
    first.space_after = second.space_after;
    first.deps = "_".into();
    if entity[i].is_none() || entity[i] != second_entity {
        first.ner = NerTag::O;
        entity[i] = None;
    }
    for tok in &mut sentence.tokens {
        if tok.head == b {
            tok.head = a;
        } else if tok.head > b {
            tok.head -= 1;
        }
    }
    sentence.renumber();
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{validate_document, EntityType, Token};
    use crate::seed::rng_from_seed;

    fn doc(tokens: Vec<Token>) -> Document {
        Document::new("d", vec![Sentence::new("s", tokens)])
    }

    fn merge_all(d: &Document) -> Document {
        spacing_augment(d, 1.0, &mut rng_from_seed(0))
    }

    #[test]
    fn rate_zero_is_identity() {
        let d = doc(vec![Token::new(1, "Hej", "INTJ", 2, "discourse"), Token::new(2, "du", "PRON", 0, "root")]);
        assert_eq!(spacing_augment(&d, 0.0, &mut rng_from_seed(4)), d);
    }

    #[test]
    fn forced_merge_over_internal_arc_becomes_root() {
        let d = doc(vec![Token::new(1, "Hej", "INTJ", 2, "discourse"), Token::new(2, "du", "PRON", 0, "root")]);
        let out = merge_all(&d);
        let toks = &out.sentences[0].tokens;
        assert_eq!(toks.len(), 1);
        assert_eq!(toks[0].form, "Hejdu");
        assert_eq!(toks[0].head, 0);
        assert_eq!(toks[0].deprel, "root");
        assert_eq!(toks[0].upos, "INTJ");
        assert_eq!(out.text, "Hejdu");
    }

    #[test]
    fn merge_inside_person_keeps_begin_tag() {
        let d = doc(vec![
            Token::new(1, "Hans", "PROPN", 0, "root").with_ner(NerTag::B(EntityType::Per)),
            Token::new(2, "Hansen", "PROPN", 1, "flat").with_ner(NerTag::I(EntityType::Per)),
        ]);
        let out = merge_all(&d);
        assert_eq!(out.sentences[0].tokens[0].ner, NerTag::B(EntityType::Per));
    }

    #[test]
    fn merge_across_entity_boundary_yields_outside_and_repairs() {
        // "så Hans Hansen": merging "så"+"Hans" leaves "Hansen" orphaned
        let mut d = doc(vec![
            Token::new(1, "så", "VERB", 0, "root"),
            Token::new(2, "Hans", "PROPN", 1, "obj").with_ner(NerTag::B(EntityType::Per)),
            Token::new(3, "Hansen", "PROPN", 2, "flat").with_ner(NerTag::I(EntityType::Per)),
        ]);
        d.sentences[0].tokens[1].space_after = false;
        d.rebuild();
        let out = merge_all(&d);
        let toks = &out.sentences[0].tokens;
        assert_eq!(toks.len(), 2);
        assert_eq!(toks[0].form, "såHans");
        assert_eq!(toks[0].ner, NerTag::O);
        assert_eq!(toks[1].ner, NerTag::B(EntityType::Per));
        assert_eq!(toks[1].head, 1);
        assert!(validate_document(&out).is_empty());
    }

    #[test]
    fn absorbed_root_makes_merged_token_root() {
        // token 1 hangs off token 3, token 2 is the root: 2 is an ancestor of 1
        let d = doc(vec![Token::new(1, "a", "X", 3, "dep"), Token::new(2, "b", "X", 0, "root"), Token::new(3, "c", "X", 2, "dep")]);
        let mut s = d.sentences[0].clone();
        merge_sentence(&mut s, &[true, false]);
        assert_eq!(s.tokens[0].form, "ab");
        assert_eq!(s.tokens[0].head, 0);
        assert_eq!(s.tokens[1].head, 1);
    }

    #[test]
    fn every_seed_keeps_documents_valid() {
        let d = doc(vec![
            Token::new(1, "Den", "DET", 2, "det"),
            Token::new(2, "store", "ADJ", 3, "amod"),
            Token::new(3, "hund", "NOUN", 4, "nsubj"),
            Token::new(4, "gøede", "VERB", 0, "root"),
            Token::new(5, "ad", "ADP", 6, "case"),
            Token::new(6, "Peter", "PROPN", 4, "obl").with_ner(NerTag::B(EntityType::Per)),
            Token::new(7, "Madsen", "PROPN", 6, "flat").with_ner(NerTag::I(EntityType::Per)),
        ]);
        for seed in 0..300 {
            let out = spacing_augment(&d, 0.5, &mut rng_from_seed(seed));
            assert!(validate_document(&out).is_empty(), "seed {seed}: {:?}", validate_document(&out));
        }
    }
}
