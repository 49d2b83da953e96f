//! Metrics against brute-force reimplementations on random small corpora.

mod common;

use augeval_core::corpus::EntityType;
use augeval_core::metrics::{score_document, MetricOptions};
use augeval_core::pipeline::Task;
use common::oracles::{brute_attachment, brute_f1, brute_ner, brute_pos};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const ALL_TASKS: [Task; 3] = [Task::Pos, Task::Ner, Task::Dep];

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn metrics_match_brute_force(seed in any::<u64>(), exclude_punct in any::<bool>()) {
        let corpus = common::random_corpus(seed, 1, 5, 6);
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed);
        let opts = MetricOptions { exclude_punct };
        for gold in &corpus.documents {
            let pred = common::perturbed_prediction(gold, &mut rng);
            let counts = score_document(gold, &pred, &ALL_TASKS, opts).unwrap();

            let brute = brute_ner(gold, &pred);
            for (ty, prf) in &brute {
                prop_assert_eq!(counts.ner[ty], *prf);
            }
            let scores = counts.scores(&ALL_TASKS);
            let ner = scores.ner.unwrap();
            let sum = |types: &[EntityType]| brute.iter().filter(|(t, _)| types.contains(t)).fold((0, 0, 0), |a, (_, p)| (a.0 + p.tp, a.1 + p.fp, a.2 + p.fn_));
            let all = sum(&EntityType::ALL);
            let no_misc = sum(&[EntityType::Per, EntityType::Loc, EntityType::Org]);
            prop_assert_eq!(ner.micro.f1, brute_f1(all.0, all.1, all.2));
            prop_assert_eq!(ner.micro_no_misc.f1, brute_f1(no_misc.0, no_misc.1, no_misc.2));
            for (ty, p) in &brute {
                prop_assert_eq!(ner.per_type[ty].f1, brute_f1(p.tp, p.fp, p.fn_));
            }

            let (total, uas, las) = brute_attachment(gold, &pred, exclude_punct);
            prop_assert_eq!((counts.dep_total, counts.uas_correct, counts.las_correct), (total, uas, las));
            let frac = |n: usize| if total == 0 { 1.0 } else { n as f64 / total as f64 };
            prop_assert_eq!(scores.uas, Some(frac(uas)));
            prop_assert_eq!(scores.las, Some(frac(las)));
            prop_assert!(las <= uas);

            prop_assert_eq!(counts.pos_correct, brute_pos(gold, &pred));
        }
    }

    #[test]
    fn oracle_predictions_score_one(seed in any::<u64>()) {
        let corpus = common::random_corpus(seed, 2, 5, 6);
        for gold in &corpus.documents {
            let s = score_document(gold, &common::gold_prediction(gold), &ALL_TASKS, MetricOptions::default()).unwrap().scores(&ALL_TASKS);
            prop_assert_eq!(s.pos_accuracy, Some(1.0));
            prop_assert_eq!(s.uas, Some(1.0));
            prop_assert_eq!(s.las, Some(1.0));
            let ner = s.ner.unwrap();
            prop_assert_eq!((ner.micro.f1, ner.micro_no_misc.f1, ner.macro_f1), (1.0, 1.0, 1.0));
        }
    }

    #[test]
    fn corpus_scores_ignore_document_order(seed in any::<u64>()) {
        use augeval_core::metrics::score_corpus;
        use augeval_core::pipeline::builtin_baseline;
        let corpus = common::random_corpus(seed, 4, 3, 6);
        let stats = Default::default();
        let forward = score_corpus(&corpus, &builtin_baseline(&corpus, &stats), MetricOptions::default()).unwrap();
        let mut reversed = corpus.clone();
        reversed.documents.reverse();
        let backward = score_corpus(&reversed, &builtin_baseline(&reversed, &stats), MetricOptions::default()).unwrap();
        prop_assert_eq!(forward, backward);
    }
}
