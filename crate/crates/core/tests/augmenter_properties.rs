mod common;

use augeval_core::augment::{compose, default_suite, AugmentResources, Augmenter};
use augeval_core::corpus::{parse_conllu_str, serialize_conllu, validate};
use proptest::prelude::*;

fn suite() -> Vec<Augmenter> {
    let mut all = default_suite();
    all.push(Augmenter::Identity);
    all.push(Augmenter::Spacing { rate: 0.5 });
    all.push(Augmenter::Keystroke { rate: 1.0 });
    all.push(compose(vec![Augmenter::Names { mode: augeval_core::resources::NameMode::Female }, Augmenter::Spacing { rate: 0.3 }, Augmenter::Lowercase]).unwrap());
    all
}

#[test]
fn fixture_is_valid_and_round_trips() {
    let c = common::fixture("danish-100.conllu");
    assert_eq!(c.sentence_count(), 100);
    assert!(validate(&c).is_empty(), "{:?}", validate(&c));
    assert_eq!(parse_conllu_str(&serialize_conllu(&c)).unwrap(), c);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(1000))]

    #[test]
    fn every_augmenter_output_validates(corpus_seed in any::<u64>(), aug_seed in any::<u64>()) {
        let corpus = common::random_corpus(corpus_seed, 3, 4, 8);
        prop_assert!(validate(&corpus).is_empty());
        let resources = AugmentResources::default();
        for aug in suite() {
            let out = aug.apply(&corpus, &resources, aug_seed);
            prop_assert!(out.is_ok(), "{}: {:?}", aug.name(), out.err());
            let out = out.unwrap();
            let violations = validate(&out);
            prop_assert!(violations.is_empty(), "{}: {:?}", aug.name(), violations);
        }
    }

    #[test]
    fn serialization_round_trips(seed in any::<u64>()) {
        let corpus = common::random_corpus(seed, 3, 4, 8);
        let text = serialize_conllu(&corpus);
        prop_assert_eq!(parse_conllu_str(&text).unwrap(), corpus);
    }

    #[test]
    fn augmentation_is_deterministic(corpus_seed in any::<u64>(), aug_seed in any::<u64>()) {
        let corpus = common::random_corpus(corpus_seed, 2, 3, 6);
        let resources = AugmentResources::default();
        for aug in default_suite() {
            prop_assert_eq!(aug.apply(&corpus, &resources, aug_seed).unwrap(), aug.apply(&corpus, &resources, aug_seed).unwrap());
        }
    }
}
