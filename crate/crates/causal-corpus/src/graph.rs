//! Causal DAG representation, structural queries, and graph generators.
//!
//! Graphs carry their edges in an explicit presentation order: premise
//! serialization walks the edge list front to back, so reordering edges
//! changes the emitted text without changing graph semantics. All generators
//! take a caller-supplied RNG; nothing in this module touches global state.

use std::collections::{HashMap, HashSet, VecDeque};
use std::fmt;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// The 62 characters node names are drawn from, in vocabulary order.
pub const NAME_ALPHABET: &[u8; 62] =
    b"0123456789ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz";

/// Longest node name ever generated or accepted.
pub const MAX_NAME_LEN: usize = 10;

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("node name {0:?} must be 1-10 ASCII alphanumeric characters")]
    InvalidName(String),
    #[error("duplicate node name {0:?}")]
    DuplicateName(String),
    #[error("unknown node {0:?}")]
    UnknownNode(String),
    #[error("edge ({0}, {1}) references a node index out of range")]
    EdgeOutOfRange(usize, usize),
    #[error("self-loop on node index {0}")]
    SelfLoop(usize),
    #[error("duplicate edge ({0}, {1})")]
    DuplicateEdge(usize, usize),
    #[error("edge set contains a cycle")]
    Cyclic,
    #[error("graph construction needs at least {0} nodes")]
    TooFewNodes(usize),
    #[error("cannot draw {count} distinct names with lengths in {min}..={max}")]
    NamePoolExhausted {
        count: usize,
        min: usize,
        max: usize,
    },
    #[error("name length range {lo}..={hi} must lie within 1..={MAX_NAME_LEN}")]
    InvalidNameLength { lo: usize, hi: usize },
    #[error("probability {0} is outside [0, 1]")]
    InvalidProbability(f64),
    #[error("requested {requested} edges but {node_count} nodes admit at most {max}")]
    TooManyEdges {
        requested: usize,
        node_count: usize,
        max: usize,
    },
    #[error("invalid perturbation profile: {0}")]
    InvalidProfile(String),
}

/// An alphanumeric variable name, 1 to 10 characters; digits may lead.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeName(String);

impl NodeName {
    pub fn new(name: impl Into<String>) -> Result<Self, GraphError> {
        let name = name.into();
        if name.is_empty()
            || name.len() > MAX_NAME_LEN
            || !name.bytes().all(|b| b.is_ascii_alphanumeric())
        {
            return Err(GraphError::InvalidName(name));
        }
        Ok(NodeName(name))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl fmt::Display for NodeName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A directed acyclic graph over named nodes.
///
/// `edges` doubles as the presentation order: serialization emits one
/// "U causes V." sentence per entry, in order. Equality compares the node
/// *set* and the edge sentence sequence, so two graphs that serialize to the
/// same premise are equal even if their node lists are permuted.
#[derive(Clone, Debug)]
pub struct CausalDag {
    nodes: Vec<NodeName>,
    edges: Vec<(usize, usize)>,
    parents: Vec<Vec<usize>>,
    children: Vec<Vec<usize>>,
    index: HashMap<String, usize>,
}

impl PartialEq for CausalDag {
    fn eq(&self, other: &Self) -> bool {
        if self.nodes.len() != other.nodes.len() || self.edges.len() != other.edges.len() {
            return false;
        }
        let mut a: Vec<&str> = self.nodes.iter().map(NodeName::as_str).collect();
        let mut b: Vec<&str> = other.nodes.iter().map(NodeName::as_str).collect();
        a.sort_unstable();
        b.sort_unstable();
        a == b
            && self
                .edges
                .iter()
                .zip(&other.edges)
                .all(|(&(u, v), &(x, y))| {
                    self.nodes[u] == other.nodes[x] && self.nodes[v] == other.nodes[y]
                })
    }
}

impl Eq for CausalDag {}

impl CausalDag {
    /// Validates names, edge endpoints, self-loops, duplicates, and acyclicity.
    pub fn new(nodes: Vec<NodeName>, edges: Vec<(usize, usize)>) -> Result<Self, GraphError> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, name) in nodes.iter().enumerate() {
            if index.insert(name.as_str().to_owned(), i).is_some() {
                return Err(GraphError::DuplicateName(name.as_str().to_owned()));
            }
        }
        let mut parents = vec![Vec::new(); nodes.len()];
        let mut children = vec![Vec::new(); nodes.len()];
        let mut seen = HashSet::with_capacity(edges.len());
        for &(u, v) in &edges {
            if u >= nodes.len() || v >= nodes.len() {
                return Err(GraphError::EdgeOutOfRange(u, v));
            }
            if u == v {
                return Err(GraphError::SelfLoop(u));
            }
            if !seen.insert((u, v)) {
                return Err(GraphError::DuplicateEdge(u, v));
            }
            children[u].push(v);
            parents[v].push(u);
        }
        let dag = CausalDag {
            nodes,
            edges,
            parents,
            children,
            index,
        };
        dag.topological_order_checked()?;
        Ok(dag)
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn nodes(&self) -> &[NodeName] {
        &self.nodes
    }

    /// Edges as (source, target) node indices, in presentation order.
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn name(&self, v: usize) -> &NodeName {
        &self.nodes[v]
    }

    pub fn node_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    /// Like [`node_index`](Self::node_index) but with a lookup error.
    pub fn resolve(&self, name: &NodeName) -> Result<usize, GraphError> {
        self.node_index(name.as_str())
            .ok_or_else(|| GraphError::UnknownNode(name.as_str().to_owned()))
    }

    pub fn parents(&self, v: usize) -> &[usize] {
        &self.parents[v]
    }

    pub fn children(&self, v: usize) -> &[usize] {
        &self.children[v]
    }

    /// All nodes reachable from `v` by a directed path of length ≥ 1,
    /// ascending. Excludes `v` itself.
    pub fn descendants(&self, v: usize) -> Vec<usize> {
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([v]);
        let mut out = Vec::new();
        while let Some(x) = queue.pop_front() {
            for &c in &self.children[x] {
                if !seen[c] {
                    seen[c] = true;
                    out.push(c);
                    queue.push_back(c);
                }
            }
        }
        out.sort_unstable();
        out
    }

    /// Directed reachability along a path of length ≥ 1; `reachable(v, v)` is
    /// false because a DAG has no cycles.
    pub fn reachable(&self, from: usize, to: usize) -> bool {
        if from == to {
            return false;
        }
        let mut seen = vec![false; self.nodes.len()];
        let mut queue = VecDeque::from([from]);
        while let Some(x) = queue.pop_front() {
            for &c in &self.children[x] {
                if c == to {
                    return true;
                }
                if !seen[c] {
                    seen[c] = true;
                    queue.push_back(c);
                }
            }
        }
        false
    }

    /// Kahn's algorithm, always picking the smallest ready node index so the
    /// order is deterministic.
    pub fn topological_order(&self) -> Vec<usize> {
        self.topological_order_checked()
            .expect("validated DAG cannot be cyclic")
    }

    fn topological_order_checked(&self) -> Result<Vec<usize>, GraphError> {
        let n = self.nodes.len();
        let mut indegree: Vec<usize> = (0..n).map(|v| self.parents[v].len()).collect();
        let mut ready: std::collections::BinaryHeap<std::cmp::Reverse<usize>> = (0..n)
            .filter(|&v| indegree[v] == 0)
            .map(std::cmp::Reverse)
            .collect();
        let mut order = Vec::with_capacity(n);
        while let Some(std::cmp::Reverse(v)) = ready.pop() {
            order.push(v);
            for &c in &self.children[v] {
                indegree[c] -= 1;
                if indegree[c] == 0 {
                    ready.push(std::cmp::Reverse(c));
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            Err(GraphError::Cyclic)
        }
    }

    /// Edge count over node count.
    pub fn branching_factor(&self) -> f64 {
        self.edges.len() as f64 / self.nodes.len() as f64
    }

    /// True when every node appears in at least one edge, i.e. the premise
    /// text mentions the whole node set.
    pub fn covers_all_nodes(&self) -> bool {
        (0..self.nodes.len()).all(|v| !self.parents[v].is_empty() || !self.children[v].is_empty())
    }

    /// One line per edge, `SOURCE -> TARGET`, in presentation order.
    pub fn debug_dump(&self) -> String {
        let mut out = String::new();
        for &(u, v) in &self.edges {
            out.push_str(self.nodes[u].as_str());
            out.push_str(" -> ");
            out.push_str(self.nodes[v].as_str());
            out.push('\n');
        }
        out
    }
}

/// Draws `count` pairwise-distinct names with lengths in `length_range`.
pub fn generate_node_names<R: Rng>(
    count: usize,
    length_range: (usize, usize),
    rng: &mut R,
) -> Result<Vec<NodeName>, GraphError> {
    let (lo, hi) = length_range;
    if lo < 1 || hi > MAX_NAME_LEN || lo > hi {
        return Err(GraphError::InvalidNameLength { lo, hi });
    }
    let pool: u128 = (lo..=hi).map(|len| 62u128.pow(len as u32)).sum();
    if count as u128 > pool {
        return Err(GraphError::NamePoolExhausted {
            count,
            min: lo,
            max: hi,
        });
    }
    let mut names = Vec::with_capacity(count);
    let mut seen = HashSet::with_capacity(count);
    while names.len() < count {
        let len = rng.gen_range(lo..=hi);
        let name: String = (0..len)
            .map(|_| NAME_ALPHABET[rng.gen_range(0..NAME_ALPHABET.len())] as char)
            .collect();
        if seen.insert(name.clone()) {
            names.push(NodeName(name));
        }
    }
    Ok(names)
}

/// Chain `names[0] -> names[1] -> ...` with edges in chain order.
pub fn make_sequential_chain(names: Vec<NodeName>) -> Result<CausalDag, GraphError> {
    if names.len() < 2 {
        return Err(GraphError::TooFewNodes(2));
    }
    let edges = (0..names.len() - 1).map(|i| (i, i + 1)).collect();
    CausalDag::new(names, edges)
}

/// Independently reverses each edge with probability `flip_probability`,
/// keeping every edge in its original presentation slot.
///
/// Meant for sequential chains, where any flip pattern stays acyclic; on other
/// inputs a flip that creates a cycle or duplicate edge surfaces as an error.
pub fn apply_random_flipping<R: Rng>(
    chain: &CausalDag,
    flip_probability: f64,
    rng: &mut R,
) -> Result<CausalDag, GraphError> {
    if !(0.0..=1.0).contains(&flip_probability) {
        return Err(GraphError::InvalidProbability(flip_probability));
    }
    let edges = chain
        .edges()
        .iter()
        .map(|&(u, v)| {
            if rng.gen_bool(flip_probability) {
                (v, u)
            } else {
                (u, v)
            }
        })
        .collect();
    CausalDag::new(chain.nodes().to_vec(), edges)
}

/// Reverses every edge in place. A reversed DAG is still a DAG.
pub fn reverse_all_edges(g: &CausalDag) -> CausalDag {
    let edges = g.edges().iter().map(|&(u, v)| (v, u)).collect();
    CausalDag::new(g.nodes().to_vec(), edges).expect("reversing all edges preserves acyclicity")
}

/// Uniformly permutes the edge presentation order; graph semantics unchanged.
pub fn shuffle_edge_order<R: Rng>(g: &CausalDag, rng: &mut R) -> CausalDag {
    let mut edges = g.edges().to_vec();
    edges.shuffle(rng);
    CausalDag::new(g.nodes().to_vec(), edges).expect("permuting edges preserves validity")
}

/// Erdős–Rényi-style DAG: `round(branching_factor × n)` edges oriented along a
/// uniformly random topological order over `names`.
pub fn generate_branched_dag<R: Rng>(
    names: Vec<NodeName>,
    branching_factor: f64,
    rng: &mut R,
) -> Result<CausalDag, GraphError> {
    if !branching_factor.is_finite() || branching_factor <= 0.0 {
        return Err(GraphError::InvalidProfile(format!(
            "branching factor {branching_factor} must be positive"
        )));
    }
    let edge_count = (branching_factor * names.len() as f64).round() as usize;
    generate_branched_dag_with_edges(names, edge_count, rng)
}

/// As [`generate_branched_dag`] but with an explicit edge count: a uniform
/// random topological order is drawn, then exactly `edge_count` forward pairs
/// are sampled uniformly without replacement. Edges are presented grouped by
/// source in node-list order.
pub fn generate_branched_dag_with_edges<R: Rng>(
    names: Vec<NodeName>,
    edge_count: usize,
    rng: &mut R,
) -> Result<CausalDag, GraphError> {
    let n = names.len();
    if n < 2 {
        return Err(GraphError::TooFewNodes(2));
    }
    let max = n * (n - 1) / 2;
    if edge_count > max {
        return Err(GraphError::TooManyEdges {
            requested: edge_count,
            node_count: n,
            max,
        });
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let picks = rand::seq::index::sample(rng, max, edge_count);
    let mut edges: Vec<(usize, usize)> = picks
        .iter()
        .map(|k| {
            let (i, j) = unrank_pair(k, n);
            (order[i], order[j])
        })
        .collect();
    edges.sort_unstable();
    CausalDag::new(names, edges)
}

/// Maps `k` in `0..n*(n-1)/2` to the k-th pair `(i, j)` with `i < j`,
/// enumerated row by row.
fn unrank_pair(mut k: usize, n: usize) -> (usize, usize) {
    let mut i = 0;
    loop {
        let row = n - 1 - i;
        if k < row {
            return (i, i + 1 + k);
        }
        k -= row;
        i += 1;
    }
}

/// Branching factor requested by a profile: a fixed target or a closed range
/// the effective |E|/|V| ratio must fall in.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum BranchingFactor {
    Fixed(f64),
    Range(f64, f64),
}

/// Knobs controlling how one graph is drawn: node count, name length, edge
/// flipping, sentence shuffling, and optional branching.
///
/// A profile with `branching_factor` present yields Erdős–Rényi-style DAGs;
/// otherwise it yields chains, optionally flipped. A flip probability strictly
/// between 0 and 1 denotes the random-flip family, where a draw that flips
/// nothing is redrawn so every instance actually differs from the plain chain
/// (full reversals still arise by chance and are kept).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PerturbationProfile {
    pub node_count_range: (usize, usize),
    #[serde(default)]
    pub flip_probability: f64,
    pub name_length_range: (usize, usize),
    #[serde(default)]
    pub branching_factor: Option<BranchingFactor>,
    #[serde(default)]
    pub shuffle_edges: bool,
    #[serde(default)]
    pub seed: u64,
}

impl PerturbationProfile {
    /// Plain sequential chains.
    pub fn sequential(node_count_range: (usize, usize), name_length_range: (usize, usize)) -> Self {
        PerturbationProfile {
            node_count_range,
            flip_probability: 0.0,
            name_length_range,
            branching_factor: None,
            shuffle_edges: false,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<(), GraphError> {
        let (nlo, nhi) = self.node_count_range;
        if nlo < 3 || nlo > nhi {
            return Err(GraphError::InvalidProfile(format!(
                "node count range {nlo}..={nhi} must be non-empty with lower bound >= 3"
            )));
        }
        let (llo, lhi) = self.name_length_range;
        if llo < 1 || lhi > MAX_NAME_LEN || llo > lhi {
            return Err(GraphError::InvalidNameLength { lo: llo, hi: lhi });
        }
        if !(0.0..=1.0).contains(&self.flip_probability) {
            return Err(GraphError::InvalidProbability(self.flip_probability));
        }
        if let Some(bf) = self.branching_factor {
            if self.flip_probability > 0.0 {
                return Err(GraphError::InvalidProfile(
                    "edge flipping applies to chains, not branched graphs".into(),
                ));
            }
            for n in nlo..=nhi {
                let max = n * (n - 1) / 2;
                match bf {
                    BranchingFactor::Fixed(f) => {
                        if !f.is_finite() || f <= 0.0 {
                            return Err(GraphError::InvalidProfile(format!(
                                "branching factor {f} must be positive"
                            )));
                        }
                        let m = (f * n as f64).round() as usize;
                        if m > max {
                            return Err(GraphError::TooManyEdges {
                                requested: m,
                                node_count: n,
                                max,
                            });
                        }
                    }
                    BranchingFactor::Range(lo, hi) => {
                        if !lo.is_finite() || !hi.is_finite() || lo <= 0.0 || lo > hi {
                            return Err(GraphError::InvalidProfile(format!(
                                "branching factor range [{lo}, {hi}] must be positive and ordered"
                            )));
                        }
                        let (mlo, mhi) = edge_count_range(n, lo, hi);
                        if mlo > mhi {
                            return Err(GraphError::InvalidProfile(format!(
                                "no integer edge count puts |E|/|V| within [{lo}, {hi}] for n={n}"
                            )));
                        }
                        if mhi > max {
                            return Err(GraphError::TooManyEdges {
                                requested: mhi,
                                node_count: n,
                                max,
                            });
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Integer edge counts m with lo ≤ m/n ≤ hi.
fn edge_count_range(n: usize, lo: f64, hi: f64) -> (usize, usize) {
    let mlo = (lo * n as f64).ceil() as usize;
    let mhi = (hi * n as f64).floor() as usize;
    (mlo, mhi)
}

/// Draws one graph according to `profile`, consuming randomness from `rng`.
pub fn sample_graph<R: Rng>(
    profile: &PerturbationProfile,
    rng: &mut R,
) -> Result<CausalDag, GraphError> {
    let n = rng.gen_range(profile.node_count_range.0..=profile.node_count_range.1);
    sample_graph_sized(profile, n, rng)
}

/// Draws one graph with a fixed node count. Callers that redraw rejected
/// graphs use this to keep the node-count marginal uniform over the range.
pub fn sample_graph_sized<R: Rng>(
    profile: &PerturbationProfile,
    n: usize,
    rng: &mut R,
) -> Result<CausalDag, GraphError> {
    profile.validate()?;
    if !(profile.node_count_range.0..=profile.node_count_range.1).contains(&n) {
        return Err(GraphError::InvalidProfile(format!(
            "node count {n} outside profile range {:?}",
            profile.node_count_range
        )));
    }
    let names = generate_node_names(n, profile.name_length_range, rng)?;
    let mut g = match profile.branching_factor {
        Some(BranchingFactor::Fixed(f)) => generate_branched_dag(names, f, rng)?,
        Some(BranchingFactor::Range(lo, hi)) => {
            let (mlo, mhi) = edge_count_range(n, lo, hi);
            let m = rng.gen_range(mlo..=mhi);
            generate_branched_dag_with_edges(names, m, rng)?
        }
        None => {
            let chain = make_sequential_chain(names)?;
            let p = profile.flip_probability;
            if p > 0.0 {
                let mut flipped = apply_random_flipping(&chain, p, rng)?;
                // 0 < p < 1 is the random-flip family: redraw all-unflipped
                // outcomes so the instance is never a plain chain.
                while p < 1.0 && flipped == chain {
                    flipped = apply_random_flipping(&chain, p, rng)?;
                }
                flipped
            } else {
                chain
            }
        }
    };
    if profile.shuffle_edges {
        g = shuffle_edge_order(&g, rng);
    }
    Ok(g)
}

/// Draws the graph for a standalone profile using the profile's own seed.
pub fn sample_graph_seeded(profile: &PerturbationProfile) -> Result<CausalDag, GraphError> {
    let mut rng = crate::seeding::stream_rng(profile.seed, 0);
    sample_graph(profile, &mut rng)
}
