//! Name substitution and first-name abbreviation over gold PER entities.

use rand::Rng;

use super::AugmentError;
use crate::corpus::{extract_entities, Document, EntityType, PROPER_NOUN};
use crate::resources::{NameLexicon, NameMode};

/// Resolves the pools for `mode`, failing if either is empty.
pub(crate) fn name_pools(lexicon: &NameLexicon, mode: NameMode) -> Result<(Vec<&str>, Vec<&str>), AugmentError> {
    let firsts = lexicon.first_pool(mode);
    if firsts.is_empty() {
        return Err(AugmentError::EmptyPool { mode, pool: "first names" });
    }
    let lasts = lexicon.last_pool(mode);
    if lasts.is_empty() {
        return Err(AugmentError::EmptyPool { mode, pool: "last names" });
    }
    Ok((firsts, lasts))
}

/// Replaces every PER entity positionally: the first token gets a sampled
/// first name, every following token an independently sampled last name.
/// Replaced tokens become proper nouns; all other labels stay.
pub fn name_augment<R: Rng + ?Sized>(doc: &Document, lexicon: &NameLexicon, mode: NameMode, rng: &mut R) -> Result<Document, AugmentError> {
    let (firsts, lasts) = name_pools(lexicon, mode)?;
    let mut out = doc.clone();
    for sentence in &mut out.sentences {
        for entity in extract_entities(sentence).into_iter().filter(|e| e.label == EntityType::Per) {
            for pos in entity.start..entity.end {
                let pool = if pos == entity.start { &firsts } else { &lasts };
                let name = pool[rng.random_range(0..pool.len())];
                let tok = &mut sentence.tokens[pos - 1];
                tok.form = name.to_string();
                if tok.lemma != "_" {
                    tok.lemma = name.to_string();
                }
                tok.upos = PROPER_NOUN.to_string();
            }
        }
    }
    out.rebuild();
    Ok(out)
}

/// Shortens the first token of every PER entity to its first character plus `.`.
pub fn abbreviate_names(doc: &Document) -> Document {
    let mut out = doc.clone();
    for sentence in &mut out.sentences {
        for entity in extract_entities(sentence).into_iter().filter(|e| e.label == EntityType::Per) {
            let tok = &mut sentence.tokens[entity.start - 1];
            if let Some(first) = tok.form.chars().next() {
                tok.form = format!("{first}.");
            }
        }
    }
    out.rebuild();
    out
}
