//! Augmenters that perturb gold corpora while keeping them valid gold standards.
//!
//! Every augmenter is a pure function of its input corpus and a 64-bit seed.
//! Each document draws from its own stream, seeded from the augmenter seed
//! and the document position, so documents can be processed in parallel
//! without changing the result. Every output corpus is validated before it
//! is returned.

mod names;
mod spacing;
mod text;

use std::collections::BTreeMap;
use std::fmt;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::corpus::{group_sentences, serialize_conllu, validate, Corpus, Document, Violation};
use crate::resources::{KeyboardLayout, NameLexicon, NameMode};
use crate::seed::{child_seed, repetition_seed, rng_from_seed};

pub use names::{abbreviate_names, name_augment};
pub use spacing::spacing_augment;
pub use text::{aeoeaa_augment, keystroke_augment, keystroke_eligible, lowercase_augment};

#[derive(Debug, Error)]
pub enum AugmentError {
    #[error("invalid parameter for {augmenter}: {message}")]
    InvalidParameter { augmenter: String, message: String },
    #[error("the {pool} pool for name mode `{mode}` is empty")]
    EmptyPool { mode: NameMode, pool: &'static str },
    #[error("cannot compose an empty list of augmenters")]
    EmptyComposition,
    #[error("{augmenter} produced an invalid corpus: {violation}")]
    InvalidOutput { augmenter: String, violation: Violation },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AugmenterKind {
    Deterministic,
    Stochastic,
}

/// Resources shared by all augmenters of a run.
#[derive(Debug, Clone)]
pub struct AugmentResources {
    pub lexicon: NameLexicon,
    pub layout: KeyboardLayout,
}

impl Default for AugmentResources {
    fn default() -> Self {
        AugmentResources { lexicon: NameLexicon::builtin(), layout: KeyboardLayout::danish_qwerty() }
    }
}

/// An augmentation condition, as written in configuration files:
/// `{"name": "keystroke", "rate": 0.05}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "name", rename_all = "snake_case", deny_unknown_fields)]
pub enum Augmenter {
    /// Leaves the corpus untouched; the un-augmented baseline.
    Identity,
    Keystroke { rate: f64 },
    Aeoeaa,
    Lowercase,
    Spacing { rate: f64 },
    Names { mode: NameMode },
    AbbreviateNames,
    /// Regroups sentences into documents of this many sentences.
    Group { sentences: usize },
    Compose { stages: Vec<Augmenter> },
}

impl fmt::Display for Augmenter {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name())
    }
}

impl Augmenter {
    /// Canonical identifier, also used for seed derivation and file names.
    pub fn name(&self) -> String {
        match self {
            Augmenter::Identity => "baseline".into(),
            Augmenter::Keystroke { rate } => format!("keystroke-{rate}"),
            Augmenter::Aeoeaa => "aeoeaa".into(),
            Augmenter::Lowercase => "lowercase".into(),
            Augmenter::Spacing { rate } => format!("spacing-{rate}"),
            Augmenter::Names { mode } => format!("names-{mode}"),
            Augmenter::AbbreviateNames => "abbreviate-names".into(),
            Augmenter::Group { sentences } => format!("group-{sentences}"),
            Augmenter::Compose { stages } => stages.iter().map(Augmenter::name).collect::<Vec<_>>().join("+"),
        }
    }

    pub fn params(&self) -> BTreeMap<String, String> {
        let mut p = BTreeMap::new();
        match self {
            Augmenter::Keystroke { rate } | Augmenter::Spacing { rate } => {
                p.insert("rate".into(), rate.to_string());
            }
            Augmenter::Names { mode } => {
                p.insert("mode".into(), mode.to_string());
            }
            Augmenter::Group { sentences } => {
                p.insert("sentences".into(), sentences.to_string());
            }
            Augmenter::Compose { stages } => {
                for (i, s) in stages.iter().enumerate() {
                    p.insert(format!("stage{i}"), s.name());
                }
            }
            _ => {}
        }
        p
    }

    pub fn kind(&self) -> AugmenterKind {
        let stochastic = match self {
            Augmenter::Keystroke { rate } => *rate > 0.0,
            Augmenter::Spacing { rate } => *rate > 0.0 && *rate < 1.0,
            Augmenter::Names { .. } => true,
            Augmenter::Compose { stages } => stages.iter().any(|s| s.kind() == AugmenterKind::Stochastic),
            _ => false,
        };
        if stochastic {
            AugmenterKind::Stochastic
        } else {
            AugmenterKind::Deterministic
        }
    }

    pub fn is_stochastic(&self) -> bool {
        self.kind() == AugmenterKind::Stochastic
    }

    /// Number of distinct repetitions worth running when `k` are requested.
    pub fn effective_repetitions(&self, k: usize) -> usize {
        if self.is_stochastic() {
            k
        } else {
            1.min(k)
        }
    }

    /// Checks parameters and resources without touching any corpus.
    pub fn check(&self, resources: &AugmentResources) -> Result<(), AugmentError> {
        let bad = |message: String| Err(AugmentError::InvalidParameter { augmenter: self.name(), message });
        match self {
            Augmenter::Keystroke { rate } | Augmenter::Spacing { rate } if !(0.0..=1.0).contains(rate) => bad(format!("rate {rate} is outside [0, 1]")),
            Augmenter::Group { sentences: 0 } => bad("group size must be at least 1".into()),
            Augmenter::Names { mode } => names::name_pools(&resources.lexicon, *mode).map(|_| ()),
            Augmenter::Compose { stages } if stages.is_empty() => Err(AugmentError::EmptyComposition),
            Augmenter::Compose { stages } => stages.iter().try_for_each(|s| s.check(resources)),
            _ => Ok(()),
        }
    }

    /// Applies the augmenter with the given seed and validates the result.
    pub fn apply(&self, corpus: &Corpus, resources: &AugmentResources, seed: u64) -> Result<Corpus, AugmentError> {
        self.check(resources)?;
        if let Augmenter::Compose { stages } = self {
            let mut current = corpus.clone();
            for (i, stage) in stages.iter().enumerate() {
                current = stage.apply(&current, resources, child_seed(seed, "stage", i))?;
            }
            return Ok(current);
        }
        let out = match self {
            Augmenter::Identity => corpus.clone(),
            Augmenter::Group { sentences } => group_sentences(corpus, *sentences),
            _ => {
                let documents = corpus
                    .documents
                    .par_iter()
                    .enumerate()
                    .map(|(i, doc)| self.apply_document(doc, resources, child_seed(seed, "doc", i)))
                    .collect::<Result<Vec<_>, _>>()?;
                Corpus { documents, provenance: corpus.provenance.clone() }
            }
        };
        if let Some(violation) = validate(&out).into_iter().next() {
            return Err(AugmentError::InvalidOutput { augmenter: self.name(), violation });
        }
        Ok(out)
    }

    fn apply_document(&self, doc: &Document, resources: &AugmentResources, seed: u64) -> Result<Document, AugmentError> {
        let mut rng = rng_from_seed(seed);
        Ok(match self {
            Augmenter::Keystroke { rate } => keystroke_augment(doc, *rate, &resources.layout, &mut rng),
            Augmenter::Aeoeaa => aeoeaa_augment(doc),
            Augmenter::Lowercase => lowercase_augment(doc),
            Augmenter::Spacing { rate } => spacing_augment(doc, *rate, &mut rng),
            Augmenter::Names { mode } => name_augment(doc, &resources.lexicon, *mode, &mut rng)?,
            Augmenter::AbbreviateNames => abbreviate_names(doc),
            Augmenter::Identity | Augmenter::Group { .. } | Augmenter::Compose { .. } => unreachable!("handled at corpus level"),
        })
    }
}

impl std::str::FromStr for Augmenter {
    type Err = AugmentError;

    /// Parses the canonical name produced by [`Augmenter::name`], e.g.
    /// `keystroke-0.05`, `names-female`, `group-5` or `lowercase+spacing-0.05`.
    fn from_str(s: &str) -> Result<Self, AugmentError> {
        if s.contains('+') {
            return compose(s.split('+').map(str::parse).collect::<Result<_, _>>()?);
        }
        let bad = || AugmentError::InvalidParameter { augmenter: s.to_string(), message: "unknown augmenter name".into() };
        let rate = |v: &str| v.parse::<f64>().map_err(|_| bad());
        Ok(match s.rsplit_once('-') {
            _ if s == "baseline" || s == "identity" => Augmenter::Identity,
            _ if s == "aeoeaa" => Augmenter::Aeoeaa,
            _ if s == "lowercase" => Augmenter::Lowercase,
            _ if s == "abbreviate-names" => Augmenter::AbbreviateNames,
            Some(("keystroke", v)) => Augmenter::Keystroke { rate: rate(v)? },
            Some(("spacing", v)) => Augmenter::Spacing { rate: rate(v)? },
            Some(("group", v)) => Augmenter::Group { sentences: v.parse().map_err(|_| bad())? },
            Some(("names", v)) => Augmenter::Names { mode: NameMode::ALL.into_iter().find(|m| m.as_str() == v).ok_or_else(bad)? },
            _ => return Err(bad()),
        })
    }
}

/// Chains augmenters left to right.
pub fn compose(augmenters: Vec<Augmenter>) -> Result<Augmenter, AugmentError> {
    if augmenters.is_empty() {
        return Err(AugmentError::EmptyComposition);
    }
    Ok(Augmenter::Compose { stages: augmenters })
}

/// A corpus together with how it was produced.
#[derive(Debug, Clone, PartialEq)]
pub struct AugmentedCorpus {
    pub corpus: Corpus,
    pub augmenter: Augmenter,
    pub seed: u64,
    pub rep: usize,
}

impl AugmentedCorpus {
    /// CoNLL-U with `augmenter`, `seed` and `rep` provenance comments.
    pub fn to_conllu(&self) -> String {
        serialize_conllu(&self.with_provenance())
    }

    pub fn with_provenance(&self) -> Corpus {
        let mut c = self.corpus.clone();
        c.set_provenance("augmenter", self.augmenter.name());
        c.set_provenance("seed", self.seed.to_string());
        c.set_provenance("rep", self.rep.to_string());
        c
    }
}

/// Runs `k` repetitions; repetition `i` uses
/// [`repetition_seed`]`(base_seed, augmenter.name(), i)`. Deterministic
/// augmenters are applied once and the result is repeated.
pub fn run_repetitions(augmenter: &Augmenter, corpus: &Corpus, k: usize, base_seed: u64, resources: &AugmentResources) -> Result<Vec<AugmentedCorpus>, AugmentError> {
    if k == 0 {
        return Err(AugmentError::InvalidParameter { augmenter: augmenter.name(), message: "k must be at least 1".into() });
    }
    augmenter.check(resources)?;
    let name = augmenter.name();
    let seeds: Vec<u64> = (0..k).map(|i| repetition_seed(base_seed, &name, i)).collect();
    let corpora: Vec<Corpus> = if augmenter.is_stochastic() {
        seeds.par_iter().map(|&s| augmenter.apply(corpus, resources, s)).collect::<Result<_, _>>()?
    } else {
        vec![augmenter.apply(corpus, resources, seeds[0])?; k]
    };
    Ok(corpora
        .into_iter()
        .zip(seeds)
        .enumerate()
        .map(|(rep, (corpus, seed))| AugmentedCorpus { corpus, augmenter: augmenter.clone(), seed, rep })
        .collect())
}

/// The evaluation suite used when a configuration does not list augmenters:
/// keystroke at 2/5/15 %, æøå, lowercase, 5 % spacing, the four name modes,
/// abbreviated first names and grouping into 5 and 10 sentences.
pub fn default_suite() -> Vec<Augmenter> {
    let mut suite = vec![
        Augmenter::Keystroke { rate: 0.02 },
        Augmenter::Keystroke { rate: 0.05 },
        Augmenter::Keystroke { rate: 0.15 },
        Augmenter::Aeoeaa,
        Augmenter::Lowercase,
        Augmenter::Spacing { rate: 0.05 },
    ];
    suite.extend(NameMode::ALL.iter().map(|&mode| Augmenter::Names { mode }));
    suite.push(Augmenter::AbbreviateNames);
    suite.push(Augmenter::Group { sentences: 5 });
    suite.push(Augmenter::Group { sentences: 10 });
    suite
}

/// Number of repetitions per stochastic condition in the default protocol.
pub const DEFAULT_REPETITIONS: usize = 20;

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{parse_conllu_str, EntityType, NerTag, Sentence, Token};

    fn small_corpus() -> Corpus {
        let s1 = Sentence::new(
            "s1",
            vec![
                Token::new(1, "Hans", "PROPN", 3, "nsubj").with_ner(NerTag::B(EntityType::Per)),
                Token::new(2, "Hansen", "PROPN", 1, "flat").with_ner(NerTag::I(EntityType::Per)),
                Token::new(3, "bor", "VERB", 0, "root"),
                Token::new(4, "i", "ADP", 5, "case"),
                Token::new(5, "Århus", "PROPN", 3, "obl").with_ner(NerTag::B(EntityType::Loc)).with_space_after(false),
                Token::new(6, ".", "PUNCT", 3, "punct"),
            ],
        );
        let s2 = Sentence::new("s2", vec![Token::new(1, "Godt", "ADJ", 0, "root").with_space_after(false), Token::new(2, "!", "PUNCT", 1, "punct")]);
        Corpus::new(vec![Document::new("d1", vec![s1, s2])])
    }

    #[test]
    fn config_json_shape() {
        let a: Augmenter = serde_json::from_str(r#"{"name": "keystroke", "rate": 0.05}"#).unwrap();
        assert_eq!(a, Augmenter::Keystroke { rate: 0.05 });
        assert_eq!(a.name(), "keystroke-0.05");
        let n: Augmenter = serde_json::from_str(r#"{"name": "names", "mode": "muslim"}"#).unwrap();
        assert_eq!(n.name(), "names-muslim");
        let c: Augmenter = serde_json::from_str(r#"{"name": "compose", "stages": [{"name": "group", "sentences": 5}, {"name": "lowercase"}]}"#).unwrap();
        assert_eq!(c.name(), "group-5+lowercase");
        assert!(serde_json::from_str::<Augmenter>(r#"{"name": "synonyms"}"#).is_err());
    }

    #[test]
    fn kinds() {
        assert!(Augmenter::Keystroke { rate: 0.05 }.is_stochastic());
        assert!(Augmenter::Names { mode: NameMode::Male }.is_stochastic());
        assert!(!Augmenter::Lowercase.is_stochastic());
        assert!(!Augmenter::Group { sentences: 5 }.is_stochastic());
        assert!(compose(vec![Augmenter::Group { sentences: 5 }, Augmenter::Keystroke { rate: 0.02 }]).unwrap().is_stochastic());
    }

    #[test]
    fn invalid_parameters_fail_before_mutation() {
        let res = AugmentResources::default();
        assert!(matches!(Augmenter::Keystroke { rate: 1.5 }.check(&res), Err(AugmentError::InvalidParameter { .. })));
        assert!(matches!(Augmenter::Group { sentences: 0 }.check(&res), Err(AugmentError::InvalidParameter { .. })));
        assert!(matches!(compose(vec![]), Err(AugmentError::EmptyComposition)));
        let res = AugmentResources { lexicon: NameLexicon::from_tsv("first\tdanish\tJens\tM\nlast\tdanish\tHansen\t-\n").unwrap(), ..Default::default() };
        assert!(matches!(Augmenter::Names { mode: NameMode::Muslim }.apply(&small_corpus(), &res, 0), Err(AugmentError::EmptyPool { .. })));
    }

    #[test]
    fn compose_examples() {
        let res = AugmentResources::default();
        let c = small_corpus();
        assert_eq!(compose(vec![Augmenter::Identity]).unwrap().apply(&c, &res, 1).unwrap(), c);
        let twice = compose(vec![Augmenter::Lowercase, Augmenter::Lowercase]).unwrap().apply(&c, &res, 1).unwrap();
        assert_eq!(twice, Augmenter::Lowercase.apply(&c, &res, 1).unwrap());
        let both = compose(vec![Augmenter::Aeoeaa, Augmenter::Lowercase]).unwrap().apply(&c, &res, 1).unwrap();
        assert_eq!(both.documents[0].sentences[0].tokens[4].form, "aarhus");
    }

    #[test]
    fn deterministic_repetitions_are_identical() {
        let res = AugmentResources::default();
        let reps = run_repetitions(&Augmenter::Lowercase, &small_corpus(), 3, 7, &res).unwrap();
        assert_eq!(reps.len(), 3);
        assert!(reps.iter().all(|r| r.corpus == reps[0].corpus));
        assert_eq!(reps.iter().map(|r| r.rep).collect::<Vec<_>>(), vec![0, 1, 2]);
    }

    #[test]
    fn repetitions_are_reproducible() {
        let res = AugmentResources::default();
        let aug = Augmenter::Keystroke { rate: 0.3 };
        let a = run_repetitions(&aug, &small_corpus(), 4, 11, &res).unwrap();
        let b = run_repetitions(&aug, &small_corpus(), 4, 11, &res).unwrap();
        let sa: Vec<String> = a.iter().map(AugmentedCorpus::to_conllu).collect();
        let sb: Vec<String> = b.iter().map(AugmentedCorpus::to_conllu).collect();
        assert_eq!(sa, sb);
        assert_ne!(a[0].seed, a[1].seed);
    }

    #[test]
    fn provenance_comments_are_written() {
        let res = AugmentResources::default();
        let reps = run_repetitions(&Augmenter::Names { mode: NameMode::Danish }, &small_corpus(), 2, 5, &res).unwrap();
        let text = reps[1].to_conllu();
        assert!(text.starts_with(&format!("# augmenter = names-danish\n# seed = {}\n# rep = 1\n\n", reps[1].seed)));
        let back = parse_conllu_str(&text).unwrap();
        assert_eq!(back.provenance_value("rep"), Some("1"));
        assert_eq!(back.documents, reps[1].corpus.documents);
    }

    #[test]
    fn default_suite_matches_protocol() {
        let suite = default_suite();
        assert_eq!(suite.len(), 13);
        let stochastic: Vec<String> = suite.iter().filter(|a| a.is_stochastic()).map(Augmenter::name).collect();
        assert_eq!(
            stochastic,
            vec!["keystroke-0.02", "keystroke-0.05", "keystroke-0.15", "spacing-0.05", "names-danish", "names-muslim", "names-female", "names-male"]
        );
    }

    #[test]
    fn names_parse_back() {
        let mut all = default_suite();
        all.push(Augmenter::Identity);
        all.push(compose(vec![Augmenter::Lowercase, Augmenter::Spacing { rate: 0.05 }]).unwrap());
        for a in all {
            assert_eq!(a.name().parse::<Augmenter>().unwrap(), a);
        }
        assert!("keystroke-x".parse::<Augmenter>().is_err());
        assert!("shout".parse::<Augmenter>().is_err());
    }
}
