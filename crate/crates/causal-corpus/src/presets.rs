//! Canonical named corpora and evaluation suites.
//!
//! Training presets reproduce the published corpus compositions; evaluation
//! presets sweep one perturbation dimension each, one component per bucket so
//! labels balance within every bucket. Node counts 3–6 and name lengths 1–3
//! are the training regime; evaluations push past those thresholds (longer
//! chains, 8–10-character names, full reversal, shuffling, denser branching).

use crate::dataset::{Component, CorpusSpec, DatasetError, Task};
use crate::graph::{BranchingFactor, PerturbationProfile};

/// Node-count range used by every training preset.
const TRAIN_NODES: (usize, usize) = (3, 6);
/// Name-length range used by everything except the name-shift suite.
const TRAIN_NAMES: (usize, usize) = (1, 3);
/// Instances per evaluation bucket when the caller does not override it.
pub const DEFAULT_EVAL_BUCKET: usize = 500;

/// All preset names accepted by the CLI, in documentation order.
pub const PRESET_NAMES: [&str; 12] = [
    "occ",
    "ts1",
    "ts2",
    "dsep-train",
    "eval-length",
    "eval-names",
    "eval-reversal",
    "eval-shuffle",
    "eval-branching",
    "multieval-slr",
    "dsep-long",
    "dsep-branching",
];

/// One evaluation suite per generalization dimension.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum EvalSuiteKind {
    /// Longer chains (7–15 nodes), sequential and randomly flipped.
    Length,
    /// 8–10-character node names on chains of 3–9 nodes.
    NodeNameShift,
    /// Completely reversed chains of 3–6 nodes.
    Reversal,
    /// Shuffled premise order on chains of 3–9 nodes.
    Shuffle,
    /// Branched DAGs, sizes {5,8,10,12} × branching factors {1.4, 2.0}.
    Branching,
    /// Shuffling + random flipping + lengths up to 9, combined.
    MultievalSlr,
    /// d-separation on longer flipped chains (7–15 nodes).
    DsepLong,
    /// d-separation on branched DAGs at branching factor 1.4.
    DsepBranching,
}

fn chain(nodes: (usize, usize), names: (usize, usize)) -> PerturbationProfile {
    PerturbationProfile::sequential(nodes, names)
}

fn flipped(nodes: (usize, usize), names: (usize, usize)) -> PerturbationProfile {
    PerturbationProfile {
        flip_probability: 0.5,
        ..chain(nodes, names)
    }
}

fn component(count: usize, profile: PerturbationProfile) -> Component {
    Component { count, profile }
}

fn spec(name: &str, task: Task, master_seed: u64, components: Vec<Component>) -> CorpusSpec {
    CorpusSpec {
        name: name.to_owned(),
        task,
        master_seed,
        label_balance: 0.5,
        max_conditioning: 5,
        components,
    }
}

/// The spec behind an evaluation suite, one component per bucket.
pub fn eval_suite_spec(
    kind: EvalSuiteKind,
    per_bucket: usize,
    master_seed: u64,
) -> Result<CorpusSpec, DatasetError> {
    if per_bucket == 0 {
        return Err(DatasetError::InvalidSpec(
            "evaluation suites need at least one instance per bucket".into(),
        ));
    }
    let spec = match kind {
        EvalSuiteKind::Length => {
            let mut components = Vec::new();
            for n in 7..=15 {
                components.push(component(per_bucket, chain((n, n), TRAIN_NAMES)));
                components.push(component(per_bucket, flipped((n, n), TRAIN_NAMES)));
            }
            spec("eval-length", Task::Transitivity, master_seed, components)
        }
        EvalSuiteKind::NodeNameShift => {
            let components = (3..=9)
                .map(|n| component(per_bucket, chain((n, n), (8, 10))))
                .collect();
            spec("eval-names", Task::Transitivity, master_seed, components)
        }
        EvalSuiteKind::Reversal => {
            let components = (3..=6)
                .map(|n| {
                    component(
                        per_bucket,
                        PerturbationProfile {
                            flip_probability: 1.0,
                            ..chain((n, n), TRAIN_NAMES)
                        },
                    )
                })
                .collect();
            spec("eval-reversal", Task::Transitivity, master_seed, components)
        }
        EvalSuiteKind::Shuffle => {
            let components = (3..=9)
                .map(|n| {
                    component(
                        per_bucket,
                        PerturbationProfile {
                            shuffle_edges: true,
                            ..chain((n, n), TRAIN_NAMES)
                        },
                    )
                })
                .collect();
            spec("eval-shuffle", Task::Transitivity, master_seed, components)
        }
        EvalSuiteKind::Branching => {
            let mut components = Vec::new();
            for n in [5, 8, 10, 12] {
                for bf in [1.4, 2.0] {
                    components.push(component(
                        per_bucket,
                        PerturbationProfile {
                            branching_factor: Some(BranchingFactor::Fixed(bf)),
                            ..chain((n, n), TRAIN_NAMES)
                        },
                    ));
                }
            }
            spec(
                "eval-branching",
                Task::Transitivity,
                master_seed,
                components,
            )
        }
        EvalSuiteKind::MultievalSlr => {
            let components = (3..=9)
                .map(|n| {
                    component(
                        per_bucket,
                        PerturbationProfile {
                            shuffle_edges: true,
                            ..flipped((n, n), TRAIN_NAMES)
                        },
                    )
                })
                .collect();
            spec("multieval-slr", Task::Transitivity, master_seed, components)
        }
        EvalSuiteKind::DsepLong => {
            let components = (7..=15)
                .map(|n| component(per_bucket, flipped((n, n), TRAIN_NAMES)))
                .collect();
            spec("dsep-long", Task::Dsep, master_seed, components)
        }
        EvalSuiteKind::DsepBranching => {
            let components = [5, 8, 10, 12]
                .into_iter()
                .map(|n| {
                    component(
                        per_bucket,
                        PerturbationProfile {
                            branching_factor: Some(BranchingFactor::Fixed(1.4)),
                            ..chain((n, n), TRAIN_NAMES)
                        },
                    )
                })
                .collect();
            spec("dsep-branching", Task::Dsep, master_seed, components)
        }
    };
    Ok(spec)
}

/// Builds an evaluation suite directly.
pub fn build_eval_suite(
    kind: EvalSuiteKind,
    per_bucket: usize,
    master_seed: u64,
) -> Result<Vec<crate::dataset::AxiomInstance>, DatasetError> {
    crate::dataset::build_corpus(&eval_suite_spec(kind, per_bucket, master_seed)?)
}

/// Resolves a preset name to its canonical spec.
///
/// `per_bucket` overrides the per-bucket size of evaluation presets and is
/// ignored by the fixed-size training presets.
pub fn corpus_spec(
    preset: &str,
    master_seed: u64,
    per_bucket: Option<usize>,
) -> Result<CorpusSpec, DatasetError> {
    let bucket = per_bucket.unwrap_or(DEFAULT_EVAL_BUCKET);
    let spec = match preset {
        // 174k chain-only instances
        "occ" => spec(
            "occ",
            Task::Transitivity,
            master_seed,
            vec![component(174_000, chain(TRAIN_NODES, TRAIN_NAMES))],
        ),
        // 73k randomly flipped + 101k sequential
        "ts1" => spec(
            "ts1",
            Task::Transitivity,
            master_seed,
            vec![
                component(73_000, flipped(TRAIN_NODES, TRAIN_NAMES)),
                component(101_000, chain(TRAIN_NODES, TRAIN_NAMES)),
            ],
        ),
        // 132k sequential + 42k randomly flipped
        "ts2" => spec(
            "ts2",
            Task::Transitivity,
            master_seed,
            vec![
                component(132_000, chain(TRAIN_NODES, TRAIN_NAMES)),
                component(42_000, flipped(TRAIN_NODES, TRAIN_NAMES)),
            ],
        ),
        // 175k d-separation instances over branched DAGs, |E|/|V| in [0.6, 0.8]
        "dsep-train" => spec(
            "dsep-train",
            Task::Dsep,
            master_seed,
            vec![component(
                175_000,
                PerturbationProfile {
                    branching_factor: Some(BranchingFactor::Range(0.6, 0.8)),
                    ..chain(TRAIN_NODES, TRAIN_NAMES)
                },
            )],
        ),
        "eval-length" => eval_suite_spec(EvalSuiteKind::Length, bucket, master_seed)?,
        "eval-names" => eval_suite_spec(EvalSuiteKind::NodeNameShift, bucket, master_seed)?,
        "eval-reversal" => eval_suite_spec(EvalSuiteKind::Reversal, bucket, master_seed)?,
        "eval-shuffle" => eval_suite_spec(EvalSuiteKind::Shuffle, bucket, master_seed)?,
        "eval-branching" => eval_suite_spec(EvalSuiteKind::Branching, bucket, master_seed)?,
        "multieval-slr" => eval_suite_spec(EvalSuiteKind::MultievalSlr, bucket, master_seed)?,
        "dsep-long" => eval_suite_spec(EvalSuiteKind::DsepLong, bucket, master_seed)?,
        "dsep-branching" => eval_suite_spec(EvalSuiteKind::DsepBranching, bucket, master_seed)?,
        other => {
            return Err(DatasetError::InvalidSpec(format!(
                "unknown preset {other:?}; available: {}",
                PRESET_NAMES.join(", ")
            )))
        }
    };
    Ok(spec)
}
