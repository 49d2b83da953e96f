use super::{Corpus, Document};

/// Regroups each document's sentences into consecutive documents of `n`
/// sentences (the last group of a document may be shorter). Groups never
/// span two source documents; group `g` of document `d` is named `d-g<g>`.
///
/// # Panics
///
/// Panics if `n == 0`.
pub fn group_sentences(corpus: &Corpus, n: usize) -> Corpus {
    assert!(n >= 1, "group size must be positive");
    let mut documents = Vec::new();
    for doc in &corpus.documents {
        for (g, chunk) in doc.sentences.chunks(n).enumerate() {
            documents.push(Document::new(format!("{}-g{}", doc.doc_id, g + 1), chunk.to_vec()));
        }
    }
    Corpus { documents, provenance: corpus.provenance.clone() }
}
