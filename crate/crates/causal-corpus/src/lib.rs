//! Deterministic generation, exact labeling, and evaluation tooling for
//! causal-reasoning text corpora.
//!
//! The library builds corpora of small causal DAGs rendered as natural-language
//! premises ("U causes V."), pairs them with reachability ("Does U cause V?")
//! or d-separation ("Are U and V d-separated given {..}?") hypotheses, labels
//! each instance with an exact oracle, and scores model predictions against
//! those labels. Every random choice flows through an explicitly seeded
//! generator, so a corpus is a pure function of its spec and master seed.
//!
//! Module map:
//!
//! * [`graph`] — DAG representation, structural queries, and graph generators
//!   (chains, random edge flipping, reversal, shuffling, branched DAGs).
//! * [`oracle`] — transitivity and d-separation labelers plus deliberately
//!   naive brute-force re-implementations used for cross-checking.
//! * [`text`] — the instance text grammar: serialization and the inverse parser.
//! * [`tokenizer`] — fixed mixed-granularity vocabulary (chars + reserved words).
//! * [`dataset`] — corpus specs, instance sampling, JSONL records.
//! * [`prompt`] — zero-shot and multi-shot prompt emission.
//! * [`presets`] — the canonical named corpora and evaluation suites.
//! * [`report`] — prediction scoring and bucketed accuracy tables.
//! * [`output`] — corpus files and the run manifest.
//! * [`seeding`] — per-instance seed derivation.

pub mod dataset;
pub mod graph;
pub mod oracle;
pub mod output;
pub mod presets;
pub mod prompt;
pub mod report;
pub mod seeding;
pub mod text;
pub mod tokenizer;

pub use dataset::{AxiomInstance, Component, CorpusSpec, InstanceRecord, StructureTag, Task};
pub use graph::{CausalDag, NodeName, PerturbationProfile};
pub use oracle::{DsepQuery, Label, Query, TransitivityQuery};
