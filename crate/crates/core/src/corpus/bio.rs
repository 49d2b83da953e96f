use super::{EntitySpan, NerTag, Sentence};

/// Result of decoding a possibly ill-formed BIO sequence.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BioDecoding {
    pub spans: Vec<EntitySpan>,
    /// Number of orphan `I-X` tags that were read as `B-X`.
    pub repairs: usize,
}

/// Decodes BIO tags into 1-based, half-open token ranges.
///
/// An `I-X` that does not continue an `X` entity opens a new entity.
pub fn decode_bio(tags: &[NerTag]) -> BioDecoding {
    let mut out = BioDecoding::default();
    let mut open: Option<EntitySpan> = None;
    for (i, tag) in tags.iter().enumerate() {
        let pos = i + 1;
        match *tag {
            NerTag::O => {
                out.spans.extend(open.take());
            }
            NerTag::B(ty) => {
                out.spans.extend(open.take());
                open = Some(EntitySpan::new(ty, pos, pos + 1));
            }
            NerTag::I(ty) => match open.as_mut() {
                Some(span) if span.label == ty => span.end = pos + 1,
                _ => {
                    out.spans.extend(open.take());
                    out.repairs += 1;
                    open = Some(EntitySpan::new(ty, pos, pos + 1));
                }
            },
        }
    }
    out.spans.extend(open);
    out
}

/// Entity spans of a BIO-well-formed sentence.
pub fn extract_entities(sentence: &Sentence) -> Vec<EntitySpan> {
    decode_bio(&sentence.ner_tags()).spans
}

/// Inverse of [`decode_bio`] for non-overlapping spans over `len` tokens.
pub fn encode_bio(spans: &[EntitySpan], len: usize) -> Vec<NerTag> {
    let mut tags = vec![NerTag::O; len];
    for span in spans {
        for pos in span.start..span.end {
            tags[pos - 1] = if pos == span.start { NerTag::B(span.label) } else { NerTag::I(span.label) };
        }
    }
    tags
}
