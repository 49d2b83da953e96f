//! Character-level augmenters: keystroke noise, æøå transliteration, lowercasing.

use rand::Rng;

use crate::corpus::Document;
use crate::resources::KeyboardLayout;

/// Unicode simple lowercase mapping of one character.
pub(crate) fn simple_lower(c: char) -> char {
    // the only multi-char full lowercase mapping (U+0130) starts with its simple mapping
    c.to_lowercase().next().unwrap_or(c)
}

fn simple_upper(c: char) -> char {
    let mut up = c.to_uppercase();
    match (up.next(), up.next()) {
        (Some(u), None) => u,
        _ => c,
    }
}

fn map_forms(doc: &Document, mut f: impl FnMut(&str) -> String) -> Document {
    let mut out = doc.clone();
    for tok in out.sentences.iter_mut().flat_map(|s| s.tokens.iter_mut()) {
        tok.form = f(&tok.form);
    }
    out.rebuild();
    out
}

/// Whether keystroke noise may touch `c` under `layout`.
pub fn keystroke_eligible(c: char, layout: &KeyboardLayout) -> bool {
    c.is_alphabetic() && layout.covers(simple_lower(c))
}

/// Replaces each eligible letter with probability `rate` by a uniformly drawn
/// keyboard neighbour, keeping the original letter case. Text length and all
/// spans are unchanged.
pub fn keystroke_augment<R: Rng + ?Sized>(doc: &Document, rate: f64, layout: &KeyboardLayout, rng: &mut R) -> Document {
    map_forms(doc, |form| {
        form.chars()
            .map(|c| {
                if !keystroke_eligible(c, layout) || !rng.random_bool(rate) {
                    return c;
                }
                let lower = simple_lower(c);
                let nbs = layout.neighbors(lower).expect("eligible characters are covered");
                let n = nbs[rng.random_range(0..nbs.len())];
                if c != lower {
                    simple_upper(n)
                } else {
                    n
                }
            })
            .collect()
    })
}

/// æ/Æ → ae/Ae, ø/Ø → oe/Oe, å/Å → aa/Aa.
pub fn aeoeaa_augment(doc: &Document) -> Document {
    map_forms(doc, |form| {
        let mut s = String::with_capacity(form.len() + 2);
        for c in form.chars() {
            match c {
                'æ' => s.push_str("ae"),
                'Æ' => s.push_str("Ae"),
                'ø' => s.push_str("oe"),
                'Ø' => s.push_str("Oe"),
                'å' => s.push_str("aa"),
                'Å' => s.push_str("Aa"),
                _ => s.push(c),
            }
        }
        s
    })
}

pub fn lowercase_augment(doc: &Document) -> Document {
    map_forms(doc, |form| form.chars().map(simple_lower).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Sentence, Span, Token};
    use crate::seed::rng_from_seed;

    fn doc(forms: &[&str]) -> Document {
        let n = forms.len();
        let tokens = forms.iter().enumerate().map(|(i, f)| Token::new(i + 1, *f, "X", if i + 1 == n { 0 } else { n }, "dep")).collect();
        Document::new("d", vec![Sentence::new("s", tokens)])
    }

    fn forms(d: &Document) -> Vec<&str> {
        d.tokens().map(|t| t.form.as_str()).collect()
    }

    #[test]
    fn keystroke_rate_zero_is_identity() {
        let d = doc(&["Hej", "København", "123", "!"]);
        let out = keystroke_augment(&d, 0.0, &KeyboardLayout::danish_qwerty(), &mut rng_from_seed(7));
        assert_eq!(out, d);
    }

    #[test]
    fn keystroke_rate_one_forces_single_neighbour() {
        let layout = KeyboardLayout::from_tsv("t", "a\ts\n").unwrap();
        let d = doc(&["banan", "Abe", "7a"]);
        let out = keystroke_augment(&d, 1.0, &layout, &mut rng_from_seed(1));
        assert_eq!(forms(&out), vec!["bsnsn", "Sbe", "7s"]);
        assert_eq!(out.text.chars().count(), d.text.chars().count());
    }

    #[test]
    fn keystroke_never_touches_digits_punctuation_or_spaces() {
        let d = doc(&["12", ",", "3.4", "?"]);
        let out = keystroke_augment(&d, 1.0, &KeyboardLayout::danish_qwerty(), &mut rng_from_seed(3));
        assert_eq!(out, d);
    }

    #[test]
    fn keystroke_keeps_case_and_spans() {
        let layout = KeyboardLayout::danish_qwerty();
        let d = doc(&["ÆBLE", "Øre", "går"]);
        let out = keystroke_augment(&d, 1.0, &layout, &mut rng_from_seed(9));
        for (a, b) in d.tokens().zip(out.tokens()) {
            assert_eq!(a.span, b.span);
            for (x, y) in a.form.chars().zip(b.form.chars()) {
                assert_ne!(x, y);
                assert_eq!(x.is_uppercase(), y.is_uppercase());
                assert!(layout.neighbors(simple_lower(x)).unwrap().contains(&simple_lower(y)));
            }
        }
    }

    #[test]
    fn aeoeaa_widens_spans() {
        let d = doc(&["Århus", "er", "én", "by"]);
        let out = aeoeaa_augment(&d);
        assert_eq!(forms(&out), vec!["Aarhus", "er", "én", "by"]);
        let spans: Vec<Span> = out.tokens().map(|t| t.span).collect();
        assert_eq!(spans[0], Span::new(0, 6));
        assert_eq!(spans[1], Span::new(7, 9));
        assert_eq!(out.text.chars().count(), d.text.chars().count() + 1);
    }

    #[test]
    fn aeoeaa_all_six_and_idempotent() {
        let d = doc(&["æøåÆØÅ"]);
        let once = aeoeaa_augment(&d);
        assert_eq!(forms(&once), vec!["aeoeaaAeOeAa"]);
        assert_eq!(aeoeaa_augment(&once), once);
        let plain = doc(&["hello", "world"]);
        assert_eq!(aeoeaa_augment(&plain), plain);
    }

    #[test]
    fn lowercase_examples() {
        let out = lowercase_augment(&doc(&["København", "Æble", "İ"]));
        assert_eq!(forms(&out), vec!["københavn", "æble", "i"]);
        assert_eq!(out.tokens().next().unwrap().span.len(), 9);
        assert_eq!(lowercase_augment(&out), out);
    }
}
