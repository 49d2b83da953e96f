//! Annotation-preserving augmentation of gold-annotated corpora and
//! robustness evaluation of external NLP pipelines on the result.
//!
//! The crate is organised bottom-up:
//!
//! * [`corpus`]: CoNLL-U data model, parsing, validation, sentence grouping.
//! * [`resources`]: name lexicons and keyboard layouts.
//! * [`augment`]: the augmenters, composition and seeded repetitions.
//! * [`pipeline`]: built-in pipelines and the external-process adapter.
//! * [`metrics`]: offset alignment, POS accuracy, entity F1, UAS/LAS.
//! * [`stats`]: mean/sd aggregation, paired bootstrap, Bonferroni.
//! * [`report`]: markdown, csv and json rendering.

pub mod augment;
pub mod corpus;
pub mod metrics;
pub mod pipeline;
pub mod report;
pub mod resources;
pub mod seed;
pub mod stats;
