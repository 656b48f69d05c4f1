//! Corpus assembly: specs, stratified instance sampling, and JSONL records.
//!
//! A [`CorpusSpec`] lists components, each pairing a [`PerturbationProfile`]
//! with an instance count. Every instance derives its own RNG from
//! `(master_seed, absolute index)`, so building is embarrassingly parallel
//! and the output is identical regardless of thread count. Label balance is
//! reached by stratified sampling: each instance is assigned a desired label
//! up front and a hypothesis with that label is drawn from its graph's
//! candidate pool (redrawing the graph when the pool is empty).

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::graph::{
    sample_graph_sized, BranchingFactor, CausalDag, GraphError, PerturbationProfile,
};
use crate::oracle::{
    dsep_by_index, enumerate_dsep_hypotheses, DsepQuery, Label, OracleError, Query,
    TransitivityQuery, MAX_CONDITIONING,
};
use crate::seeding::derive_seed;
use crate::text::{self, ParseError};

/// Graph redraws allowed per instance before generation fails.
const MAX_GRAPH_DRAWS: usize = 100;

/// Rejection-sampling tries per graph before falling back to exhaustive
/// hypothesis enumeration.
const REJECTION_TRIES: usize = 64;

#[derive(Debug, Error)]
pub enum DatasetError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Oracle(#[from] OracleError),
    #[error(transparent)]
    Parse(#[from] ParseError),
    #[error("invalid corpus spec: {0}")]
    InvalidSpec(String),
    #[error(
        "component {component}: no {label}-labeled hypothesis after {MAX_GRAPH_DRAWS} graph draws (instance {index})"
    )]
    Unsatisfiable {
        component: usize,
        index: u64,
        label: Label,
    },
    #[error("record {id}: {reason}")]
    InvalidRecord { id: String, reason: String },
    #[error("record {id}: stored label {stored} but the oracle says {expected}")]
    LabelMismatch {
        id: String,
        stored: Label,
        expected: Label,
    },
}

/// Which axiom a corpus exercises.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Task {
    Transitivity,
    Dsep,
}

impl Task {
    pub fn as_str(self) -> &'static str {
        match self {
            Task::Transitivity => "transitivity",
            Task::Dsep => "dsep",
        }
    }
}

impl std::str::FromStr for Task {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "transitivity" => Ok(Task::Transitivity),
            "dsep" => Ok(Task::Dsep),
            other => Err(format!(
                "unknown task {other:?} (expected transitivity or dsep)"
            )),
        }
    }
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Structural family of an instance's graph, derived from its profile.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StructureTag {
    Sequential,
    RandomFlip,
    Reversed,
    Shuffled,
    Branched,
}

impl StructureTag {
    /// Precedence when a profile combines perturbations: branched, then
    /// shuffled, then reversed, then random flip, then sequential.
    pub fn from_profile(profile: &PerturbationProfile) -> StructureTag {
        if profile.branching_factor.is_some() {
            StructureTag::Branched
        } else if profile.shuffle_edges {
            StructureTag::Shuffled
        } else if profile.flip_probability >= 1.0 {
            StructureTag::Reversed
        } else if profile.flip_probability > 0.0 {
            StructureTag::RandomFlip
        } else {
            StructureTag::Sequential
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StructureTag::Sequential => "sequential",
            StructureTag::RandomFlip => "random_flip",
            StructureTag::Reversed => "reversed",
            StructureTag::Shuffled => "shuffled",
            StructureTag::Branched => "branched",
        }
    }

    /// Short column label, matching the usual table headers.
    pub fn abbrev(self) -> &'static str {
        match self {
            StructureTag::Sequential => "FS",
            StructureTag::RandomFlip => "RF",
            StructureTag::Reversed => "REV",
            StructureTag::Shuffled => "SHUF",
            StructureTag::Branched => "BR",
        }
    }
}

/// One labeled premise/hypothesis pair with its generation metadata.
#[derive(Clone, Debug, PartialEq)]
pub struct AxiomInstance {
    pub id: String,
    pub task: Task,
    pub graph: CausalDag,
    pub hypothesis: Query,
    pub label: Label,
    pub structure_tag: StructureTag,
    pub node_count: usize,
    pub name_length_max: usize,
    pub branching_factor: f64,
    pub seed: u64,
}

impl AxiomInstance {
    pub fn premise(&self) -> String {
        text::premise_text(&self.graph)
    }

    pub fn hypothesis_text(&self) -> String {
        text::hypothesis_text(&self.hypothesis)
    }

    /// Full labeled line as written to the plain-text corpus file.
    pub fn text(&self) -> String {
        text::instance_text(&self.graph, &self.hypothesis, self.label)
    }
}

/// A profile plus how many instances to draw from it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub count: usize,
    pub profile: PerturbationProfile,
}

fn default_label_balance() -> f64 {
    0.5
}

fn default_max_conditioning() -> usize {
    MAX_CONDITIONING
}

/// Everything needed to regenerate a corpus byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CorpusSpec {
    pub name: String,
    pub task: Task,
    #[serde(default)]
    pub master_seed: u64,
    /// Target Yes-fraction, reached by per-component stratification.
    #[serde(default = "default_label_balance")]
    pub label_balance: f64,
    /// Largest conditioning set sampled for d-separation hypotheses.
    #[serde(default = "default_max_conditioning")]
    pub max_conditioning: usize,
    pub components: Vec<Component>,
}

impl CorpusSpec {
    pub fn total_instances(&self) -> usize {
        self.components.iter().map(|c| c.count).sum()
    }

    pub fn validate(&self) -> Result<(), DatasetError> {
        if self.name.is_empty()
            || !self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
        {
            return Err(DatasetError::InvalidSpec(format!(
                "corpus name {:?} must be non-empty and filesystem-safe",
                self.name
            )));
        }
        if !(self.label_balance > 0.0 && self.label_balance < 1.0) {
            return Err(DatasetError::InvalidSpec(format!(
                "label balance {} must lie strictly between 0 and 1",
                self.label_balance
            )));
        }
        if self.max_conditioning > MAX_CONDITIONING {
            return Err(DatasetError::InvalidSpec(format!(
                "max conditioning {} exceeds the limit of {MAX_CONDITIONING}",
                self.max_conditioning
            )));
        }
        if self.components.is_empty() {
            return Err(DatasetError::InvalidSpec("no components".into()));
        }
        for (i, comp) in self.components.iter().enumerate() {
            if comp.count == 0 {
                return Err(DatasetError::InvalidSpec(format!(
                    "component {i} has a zero instance count"
                )));
            }
            comp.profile.validate()?;
        }
        Ok(())
    }

    pub fn from_toml_str(raw: &str) -> Result<CorpusSpec, DatasetError> {
        let spec: CorpusSpec = toml::from_str(raw)
            .map_err(|e| DatasetError::InvalidSpec(format!("TOML parse failure: {e}")))?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string_pretty(self).expect("corpus specs serialize to TOML")
    }
}

pub(crate) fn sha256_hex(bytes: &[u8]) -> String {
    let mut hasher = Sha256::new();
    hasher.update(bytes);
    hasher
        .finalize()
        .iter()
        .map(|b| format!("{b:02x}"))
        .collect()
}

/// Stable instance id: truncated digest of (corpus name, master seed, index).
fn instance_id(corpus: &str, master_seed: u64, index: u64) -> String {
    let digest = sha256_hex(format!("{corpus}\u{1f}{master_seed}\u{1f}{index}").as_bytes());
    digest[..16].to_owned()
}

/// Desired label for the instance at `index`, interleaving Yes/No so every
/// prefix tracks `balance` within one instance.
fn desired_label(index: u64, balance: f64) -> Label {
    let before = (index as f64 * balance).ceil() as u64;
    let after = ((index + 1) as f64 * balance).ceil() as u64;
    Label::from_bool(after > before)
}

fn sample_transitivity<R: Rng>(
    g: &CausalDag,
    desired: Label,
    rng: &mut R,
) -> Option<TransitivityQuery> {
    let n = g.node_count();
    let want = desired == Label::Yes;
    let mut candidates = Vec::new();
    for u in 0..n {
        let mut reachable = vec![false; n];
        for v in g.descendants(u) {
            reachable[v] = true;
        }
        for (v, &hit) in reachable.iter().enumerate() {
            if v != u && hit == want {
                candidates.push((u, v));
            }
        }
    }
    if candidates.is_empty() {
        return None;
    }
    let (u, v) = candidates[rng.gen_range(0..candidates.len())];
    Some(TransitivityQuery {
        cause: g.name(u).clone(),
        effect: g.name(v).clone(),
    })
}

/// Exact binomial coefficient for the tiny arguments used here (r ≤ 13).
fn binomial(r: usize, k: usize) -> u64 {
    let mut c = 1u64;
    for t in 1..=k {
        c = c * (r - k + t) as u64 / t as u64;
    }
    c
}

/// Conditioning-set size drawn with probability proportional to the number of
/// subsets of that size, i.e. uniform over all subsets up to the cap.
fn sample_conditioning_size<R: Rng>(rest: usize, cap: usize, rng: &mut R) -> usize {
    let total: u64 = (0..=cap).map(|k| binomial(rest, k)).sum();
    let mut t = rng.gen_range(0..total);
    for k in 0..=cap {
        let w = binomial(rest, k);
        if t < w {
            return k;
        }
        t -= w;
    }
    cap
}

fn make_dsep_query(g: &CausalDag, i: usize, j: usize, z: &[usize]) -> DsepQuery {
    DsepQuery {
        a: g.name(i).clone(),
        b: g.name(j).clone(),
        conditioning: z.iter().map(|&x| g.name(x).clone()).collect(),
    }
}

fn sample_dsep<R: Rng>(
    g: &CausalDag,
    desired: Label,
    max_conditioning: usize,
    rng: &mut R,
) -> Option<DsepQuery> {
    let n = g.node_count();
    let cap = max_conditioning.min(n.saturating_sub(2));
    let want = desired == Label::Yes;
    for _ in 0..REJECTION_TRIES {
        let first = rng.gen_range(0..n);
        let mut second = rng.gen_range(0..n - 1);
        if second >= first {
            second += 1;
        }
        let (i, j) = (first.min(second), first.max(second));
        let rest: Vec<usize> = (0..n).filter(|&x| x != i && x != j).collect();
        let k = sample_conditioning_size(rest.len(), cap, rng);
        let mut picks = rand::seq::index::sample(rng, rest.len(), k).into_vec();
        picks.sort_unstable();
        let z: Vec<usize> = picks.into_iter().map(|t| rest[t]).collect();
        if dsep_by_index(g, i, j, &z) == want {
            return Some(make_dsep_query(g, i, j, &z));
        }
    }
    // Rejection failed: the desired stratum is rare or empty for this graph.
    // Enumerate the full pool to decide exactly.
    let pool = enumerate_dsep_hypotheses(g, cap).expect("cap is within limits");
    let matching: Vec<DsepQuery> = pool
        .into_iter()
        .filter(|(_, label)| *label == desired)
        .map(|(q, _)| q)
        .collect();
    if matching.is_empty() {
        None
    } else {
        let pick = rng.gen_range(0..matching.len());
        Some(matching[pick].clone())
    }
}

fn build_instance(
    spec: &CorpusSpec,
    component_index: usize,
    global_index: u64,
    within_index: usize,
) -> Result<AxiomInstance, DatasetError> {
    let comp = &spec.components[component_index];
    let desired = desired_label(within_index as u64, spec.label_balance);
    let seed = derive_seed(spec.master_seed, global_index);
    let mut rng = crate::seeding::stream_rng(spec.master_seed, global_index);
    // n is drawn once so that rejected graphs (isolated nodes, no hypothesis
    // with the desired label) do not skew the node-count marginal
    let (nlo, nhi) = comp.profile.node_count_range;
    let n = rng.gen_range(nlo..=nhi);
    for _ in 0..MAX_GRAPH_DRAWS {
        let graph = sample_graph_sized(&comp.profile, n, &mut rng)?;
        // every node must be mentioned by the premise, or records would not
        // round-trip losslessly
        if !graph.covers_all_nodes() {
            continue;
        }
        let hypothesis: Option<Query> = match spec.task {
            Task::Transitivity => sample_transitivity(&graph, desired, &mut rng).map(Query::from),
            Task::Dsep => {
                sample_dsep(&graph, desired, spec.max_conditioning, &mut rng).map(Query::from)
            }
        };
        let Some(hypothesis) = hypothesis else {
            continue;
        };
        let name_length_max = graph
            .nodes()
            .iter()
            .map(|n| n.as_str().len())
            .max()
            .expect("graphs are non-empty");
        let branching_factor = match comp.profile.branching_factor {
            Some(BranchingFactor::Fixed(f)) => f,
            _ => graph.branching_factor(),
        };
        return Ok(AxiomInstance {
            id: instance_id(&spec.name, spec.master_seed, global_index),
            task: spec.task,
            node_count: graph.node_count(),
            name_length_max,
            branching_factor,
            structure_tag: StructureTag::from_profile(&comp.profile),
            seed,
            label: desired,
            hypothesis,
            graph,
        });
    }
    Err(DatasetError::Unsatisfiable {
        component: component_index,
        index: global_index,
        label: desired,
    })
}

/// Builds the full corpus for `spec`, in order, parallelized per instance.
pub fn build_corpus(spec: &CorpusSpec) -> Result<Vec<AxiomInstance>, DatasetError> {
    spec.validate()?;
    let mut out = Vec::with_capacity(spec.total_instances());
    let mut base = 0u64;
    for component_index in 0..spec.components.len() {
        let count = spec.components[component_index].count;
        let batch: Result<Vec<AxiomInstance>, DatasetError> = (0..count)
            .into_par_iter()
            .map(|wi| build_instance(spec, component_index, base + wi as u64, wi))
            .collect();
        out.append(&mut batch?);
        base += count as u64;
    }
    Ok(out)
}

/// Flat JSONL form of an instance. Field order is the serialized order.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct InstanceRecord {
    pub id: String,
    pub task: Task,
    pub premise: String,
    pub hypothesis: String,
    pub label: Label,
    pub structure_tag: StructureTag,
    pub node_count: usize,
    pub name_length_max: usize,
    pub branching_factor: f64,
    pub seed: u64,
}

impl InstanceRecord {
    pub fn from_instance(inst: &AxiomInstance) -> InstanceRecord {
        InstanceRecord {
            id: inst.id.clone(),
            task: inst.task,
            premise: inst.premise(),
            hypothesis: inst.hypothesis_text(),
            label: inst.label,
            structure_tag: inst.structure_tag,
            node_count: inst.node_count,
            name_length_max: inst.name_length_max,
            branching_factor: inst.branching_factor,
            seed: inst.seed,
        }
    }

    /// Rebuilds the full instance by parsing the premise and hypothesis.
    pub fn to_instance(&self) -> Result<AxiomInstance, DatasetError> {
        let parsed = text::parse_instance(&format!("{} {}", self.premise, self.hypothesis))?;
        let invalid = |reason: String| DatasetError::InvalidRecord {
            id: self.id.clone(),
            reason,
        };
        match (&parsed.query, self.task) {
            (Query::Transitivity(_), Task::Transitivity) | (Query::Dsep(_), Task::Dsep) => {}
            _ => {
                return Err(invalid(format!(
                    "hypothesis does not match task {}",
                    self.task
                )))
            }
        }
        if parsed.graph.node_count() != self.node_count {
            return Err(invalid(format!(
                "premise mentions {} nodes but node_count says {}",
                parsed.graph.node_count(),
                self.node_count
            )));
        }
        Ok(AxiomInstance {
            id: self.id.clone(),
            task: self.task,
            graph: parsed.graph,
            hypothesis: parsed.query,
            label: self.label,
            structure_tag: self.structure_tag,
            node_count: self.node_count,
            name_length_max: self.name_length_max,
            branching_factor: self.branching_factor,
            seed: self.seed,
        })
    }

    /// Re-runs the oracle on the parsed record and checks the stored label.
    pub fn verify(&self) -> Result<(), DatasetError> {
        let inst = self.to_instance()?;
        let expected = inst.hypothesis.label(&inst.graph)?;
        if expected != self.label {
            return Err(DatasetError::LabelMismatch {
                id: self.id.clone(),
                stored: self.label,
                expected,
            });
        }
        Ok(())
    }
}

/// One JSON line per instance.
pub fn record_line(inst: &AxiomInstance) -> String {
    serde_json::to_string(&InstanceRecord::from_instance(inst)).expect("records always serialize")
}
