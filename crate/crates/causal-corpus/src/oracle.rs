//! Exact labeling oracles for both tasks.
//!
//! `label_transitivity` answers directed reachability; `label_dsep` answers
//! d-separation via a linear-time reachable-states traversal. Each has a
//! deliberately naive counterpart (`brute_force_*`) built on a different
//! algorithm entirely — fixpoint closure and exhaustive path enumeration —
//! so tests can cross-check the production oracles against an independent
//! reading of the same definitions.

use std::collections::VecDeque;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::graph::{CausalDag, GraphError, NodeName};

/// Largest conditioning set ever attached to a query.
pub const MAX_CONDITIONING: usize = 5;

/// Node-count ceiling for the path-enumeration oracle.
pub const BRUTE_FORCE_NODE_LIMIT: usize = 12;

#[derive(Debug, Error)]
pub enum OracleError {
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error("query endpoints must be distinct, got {0:?} twice")]
    IdenticalEndpoints(String),
    #[error("conditioning set contains endpoint {0:?}")]
    EndpointInConditioning(String),
    #[error("duplicate conditioning node {0:?}")]
    DuplicateConditioning(String),
    #[error("conditioning set of {0} nodes exceeds the limit of {MAX_CONDITIONING}")]
    ConditioningTooLarge(usize),
    #[error("graph has {0} nodes; path enumeration is capped at {BRUTE_FORCE_NODE_LIMIT}")]
    GraphTooLarge(usize),
}

/// Binary answer attached to every instance.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Label {
    Yes,
    No,
}

impl Label {
    pub fn from_bool(yes: bool) -> Self {
        if yes {
            Label::Yes
        } else {
            Label::No
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Label::Yes => "Yes",
            Label::No => "No",
        }
    }

    pub fn negated(self) -> Self {
        match self {
            Label::Yes => Label::No,
            Label::No => Label::Yes,
        }
    }
}

impl std::fmt::Display for Label {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// "Does `cause` cause `effect`?"
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransitivityQuery {
    pub cause: NodeName,
    pub effect: NodeName,
}

/// "Are `a` and `b` d-separated given {conditioning}?"
///
/// The conditioning set is semantically unordered but keeps a stored
/// presentation order for serialization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DsepQuery {
    pub a: NodeName,
    pub b: NodeName,
    pub conditioning: Vec<NodeName>,
}

/// Either kind of hypothesis, as attached to an instance.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Query {
    Transitivity(TransitivityQuery),
    Dsep(DsepQuery),
}

impl Query {
    /// Labels the query against `g` with the matching oracle.
    pub fn label(&self, g: &CausalDag) -> Result<Label, OracleError> {
        match self {
            Query::Transitivity(q) => label_transitivity(g, q),
            Query::Dsep(q) => label_dsep(g, q),
        }
    }
}

impl From<TransitivityQuery> for Query {
    fn from(q: TransitivityQuery) -> Self {
        Query::Transitivity(q)
    }
}

impl From<DsepQuery> for Query {
    fn from(q: DsepQuery) -> Self {
        Query::Dsep(q)
    }
}

fn resolve_pair(g: &CausalDag, a: &NodeName, b: &NodeName) -> Result<(usize, usize), OracleError> {
    if a == b {
        return Err(OracleError::IdenticalEndpoints(a.as_str().to_owned()));
    }
    Ok((g.resolve(a)?, g.resolve(b)?))
}

fn resolve_dsep(g: &CausalDag, q: &DsepQuery) -> Result<(usize, usize, Vec<usize>), OracleError> {
    let (a, b) = resolve_pair(g, &q.a, &q.b)?;
    if q.conditioning.len() > MAX_CONDITIONING {
        return Err(OracleError::ConditioningTooLarge(q.conditioning.len()));
    }
    let mut z = Vec::with_capacity(q.conditioning.len());
    for name in &q.conditioning {
        if name == &q.a || name == &q.b {
            return Err(OracleError::EndpointInConditioning(
                name.as_str().to_owned(),
            ));
        }
        let idx = g.resolve(name)?;
        if z.contains(&idx) {
            return Err(OracleError::DuplicateConditioning(name.as_str().to_owned()));
        }
        z.push(idx);
    }
    Ok((a, b, z))
}

/// Yes iff a directed path from `cause` to `effect` exists.
pub fn label_transitivity(g: &CausalDag, q: &TransitivityQuery) -> Result<Label, OracleError> {
    let (u, v) = resolve_pair(g, &q.cause, &q.effect)?;
    Ok(Label::from_bool(g.reachable(u, v)))
}

/// Yes iff every undirected path between the endpoints is blocked by the
/// conditioning set: a path is blocked iff some chain or fork middle node is
/// conditioned on, or some collider middle node has neither itself nor any
/// descendant conditioned on.
pub fn label_dsep(g: &CausalDag, q: &DsepQuery) -> Result<Label, OracleError> {
    let (a, b, z) = resolve_dsep(g, q)?;
    Ok(Label::from_bool(dsep_by_index(g, a, b, &z)))
}

/// Index-level d-separation via reachable-states search.
///
/// States are (node, entry direction). From a node entered against an edge
/// (from a child) the trail may continue anywhere unless the node is
/// conditioned; from a node entered along an edge (from a parent) it may
/// continue to children when unconditioned, and bounce back to parents only at
/// an activated collider (node or descendant conditioned). The endpoints are
/// d-separated iff no state at `b` is reachable.
pub fn dsep_by_index(g: &CausalDag, a: usize, b: usize, z: &[usize]) -> bool {
    const FROM_CHILD: usize = 0;
    const FROM_PARENT: usize = 1;
    let n = g.node_count();

    let mut in_z = vec![false; n];
    for &x in z {
        in_z[x] = true;
    }
    // in_z closed under "has a descendant in Z": the collider activation set.
    let mut z_or_anc = in_z.clone();
    let mut stack: Vec<usize> = z.to_vec();
    while let Some(v) = stack.pop() {
        for &p in g.parents(v) {
            if !z_or_anc[p] {
                z_or_anc[p] = true;
                stack.push(p);
            }
        }
    }

    let mut visited = vec![[false; 2]; n];
    let mut queue = VecDeque::from([(a, FROM_CHILD)]);
    while let Some((v, dir)) = queue.pop_front() {
        if visited[v][dir] {
            continue;
        }
        visited[v][dir] = true;
        if v == b {
            return false;
        }
        match dir {
            FROM_CHILD => {
                if !in_z[v] {
                    for &p in g.parents(v) {
                        queue.push_back((p, FROM_CHILD));
                    }
                    for &c in g.children(v) {
                        queue.push_back((c, FROM_PARENT));
                    }
                }
            }
            _ => {
                if !in_z[v] {
                    for &c in g.children(v) {
                        queue.push_back((c, FROM_PARENT));
                    }
                }
                if z_or_anc[v] {
                    for &p in g.parents(v) {
                        queue.push_back((p, FROM_CHILD));
                    }
                }
            }
        }
    }
    true
}

/// Reference oracle: enumerates every simple undirected path between the
/// endpoints and applies the blocking definition literally to each.
pub fn brute_force_dsep(g: &CausalDag, q: &DsepQuery) -> Result<Label, OracleError> {
    if g.node_count() > BRUTE_FORCE_NODE_LIMIT {
        return Err(OracleError::GraphTooLarge(g.node_count()));
    }
    let (a, b, z) = resolve_dsep(g, q)?;
    let n = g.node_count();
    let mut in_z = vec![false; n];
    for &x in &z {
        in_z[x] = true;
    }
    // collider middle nodes unblock when the node or any descendant is in Z
    let opens_collider: Vec<bool> = (0..n)
        .map(|v| in_z[v] || g.descendants(v).iter().any(|&d| in_z[d]))
        .collect();

    fn path_is_active(
        g: &CausalDag,
        path: &[usize],
        in_z: &[bool],
        opens_collider: &[bool],
    ) -> bool {
        for w in path.windows(3) {
            let (prev, mid, next) = (w[0], w[1], w[2]);
            let collider = g.children(prev).contains(&mid) && g.children(next).contains(&mid);
            let blocked = if collider {
                !opens_collider[mid]
            } else {
                in_z[mid]
            };
            if blocked {
                return false;
            }
        }
        true
    }

    fn any_active_path(
        g: &CausalDag,
        path: &mut Vec<usize>,
        on_path: &mut [bool],
        b: usize,
        in_z: &[bool],
        opens_collider: &[bool],
    ) -> bool {
        let v = *path.last().expect("path starts non-empty");
        if v == b {
            return path_is_active(g, path, in_z, opens_collider);
        }
        let neighbors: Vec<usize> = g.children(v).iter().chain(g.parents(v)).copied().collect();
        for w in neighbors {
            if !on_path[w] {
                on_path[w] = true;
                path.push(w);
                if any_active_path(g, path, on_path, b, in_z, opens_collider) {
                    return true;
                }
                path.pop();
                on_path[w] = false;
            }
        }
        false
    }

    let mut on_path = vec![false; n];
    on_path[a] = true;
    let mut path = vec![a];
    let separated = !any_active_path(g, &mut path, &mut on_path, b, &in_z, &opens_collider);
    Ok(Label::from_bool(separated))
}

/// Reference oracle: full transitive closure by fixpoint iteration.
#[allow(clippy::needless_range_loop)]
pub fn brute_force_transitivity(
    g: &CausalDag,
    q: &TransitivityQuery,
) -> Result<Label, OracleError> {
    let (u, v) = resolve_pair(g, &q.cause, &q.effect)?;
    let n = g.node_count();
    let mut reach = vec![vec![false; n]; n];
    for &(s, t) in g.edges() {
        reach[s][t] = true;
    }
    loop {
        let mut changed = false;
        for i in 0..n {
            for k in 0..n {
                if reach[i][k] {
                    for j in 0..n {
                        if reach[k][j] && !reach[i][j] {
                            reach[i][j] = true;
                            changed = true;
                        }
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    Ok(Label::from_bool(reach[u][v]))
}

/// All unordered node pairs crossed with every conditioning subset of the
/// remaining nodes up to `max_conditioning_size`, labeled by `label_dsep`.
///
/// Enumeration order is deterministic: pairs in node order, then subsets by
/// size and lexicographically within a size; conditioning sets are presented
/// in ascending node order.
pub fn enumerate_dsep_hypotheses(
    g: &CausalDag,
    max_conditioning_size: usize,
) -> Result<Vec<(DsepQuery, Label)>, OracleError> {
    if max_conditioning_size > MAX_CONDITIONING {
        return Err(OracleError::ConditioningTooLarge(max_conditioning_size));
    }
    let n = g.node_count();
    let mut out = Vec::new();
    for i in 0..n {
        for j in i + 1..n {
            let rest: Vec<usize> = (0..n).filter(|&x| x != i && x != j).collect();
            let cap = max_conditioning_size.min(rest.len());
            for k in 0..=cap {
                for combo in Combinations::new(rest.len(), k) {
                    let z: Vec<usize> = combo.iter().map(|&t| rest[t]).collect();
                    let label = Label::from_bool(dsep_by_index(g, i, j, &z));
                    let query = DsepQuery {
                        a: g.name(i).clone(),
                        b: g.name(j).clone(),
                        conditioning: z.iter().map(|&x| g.name(x).clone()).collect(),
                    };
                    out.push((query, label));
                }
            }
        }
    }
    Ok(out)
}

/// Lexicographic k-combinations of `0..n`.
pub(crate) struct Combinations {
    n: usize,
    current: Vec<usize>,
    done: bool,
}

impl Combinations {
    pub(crate) fn new(n: usize, k: usize) -> Self {
        Combinations {
            n,
            current: (0..k).collect(),
            done: k > n,
        }
    }
}

impl Iterator for Combinations {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        let out = self.current.clone();
        let k = self.current.len();
        if k == 0 {
            self.done = true;
            return Some(out);
        }
        // advance: find the rightmost slot that can still move right
        let mut i = k;
        loop {
            if i == 0 {
                self.done = true;
                break;
            }
            i -= 1;
            if self.current[i] < self.n - (k - i) {
                self.current[i] += 1;
                for j in i + 1..k {
                    self.current[j] = self.current[j - 1] + 1;
                }
                break;
            }
        }
        Some(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::{
        generate_branched_dag_with_edges, generate_node_names, make_sequential_chain,
    };
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn name(s: &str) -> NodeName {
        NodeName::new(s).unwrap()
    }

    fn chain(names: &[&str]) -> CausalDag {
        make_sequential_chain(names.iter().map(|s| name(s)).collect()).unwrap()
    }

    fn dag(names: &[&str], edges: &[(usize, usize)]) -> CausalDag {
        CausalDag::new(names.iter().map(|s| name(s)).collect(), edges.to_vec()).unwrap()
    }

    fn trans(cause: &str, effect: &str) -> TransitivityQuery {
        TransitivityQuery {
            cause: name(cause),
            effect: name(effect),
        }
    }

    fn dsep(a: &str, b: &str, conditioning: &[&str]) -> DsepQuery {
        DsepQuery {
            a: name(a),
            b: name(b),
            conditioning: conditioning.iter().map(|s| name(s)).collect(),
        }
    }

    #[test]
    fn transitivity_basics() {
        let g = chain(&["X1", "X2", "X3"]);
        assert_eq!(
            label_transitivity(&g, &trans("X1", "X3")).unwrap(),
            Label::Yes
        );
        assert_eq!(
            label_transitivity(&g, &trans("X3", "X1")).unwrap(),
            Label::No
        );

        // fork: both named causes reach the sink, sink reaches nothing
        let g = dag(&["Mhb", "iqB", "G"], &[(0, 1), (1, 2)]);
        assert_eq!(
            label_transitivity(&g, &trans("G", "iqB")).unwrap(),
            Label::No
        );
        let g = dag(&["N5w", "s", "6D"], &[(0, 1), (2, 1)]);
        assert_eq!(
            label_transitivity(&g, &trans("N5w", "s")).unwrap(),
            Label::Yes
        );
    }

    #[test]
    fn transitivity_query_validation() {
        let g = chain(&["A", "B", "C"]);
        assert!(matches!(
            label_transitivity(&g, &trans("A", "A")),
            Err(OracleError::IdenticalEndpoints(_))
        ));
        assert!(matches!(
            label_transitivity(&g, &trans("A", "Q")),
            Err(OracleError::Graph(GraphError::UnknownNode(_)))
        ));
    }

    #[test]
    fn dsep_chain_examples() {
        // conditioning every interior node separates the chain ends
        let g = chain(&["1c1", "kT", "t4d", "zW", "Z4P", "pij"]);
        assert_eq!(
            label_dsep(&g, &dsep("zW", "pij", &["t4d", "kT", "Z4P"])).unwrap(),
            Label::Yes
        );
        let g = chain(&["nL", "A", "xx", "5Cg"]);
        assert_eq!(label_dsep(&g, &dsep("xx", "nL", &[])).unwrap(), Label::No);
    }

    #[test]
    fn dsep_adjacent_is_never_separated() {
        let g = dag(
            &["ZWn", "P9", "u", "B", "NS"],
            &[(0, 1), (2, 1), (3, 2), (4, 3)],
        );
        assert_eq!(label_dsep(&g, &dsep("P9", "u", &["B"])).unwrap(), Label::No);
        assert_eq!(
            label_dsep(&g, &dsep("P9", "u", &["B", "ZWn"])).unwrap(),
            Label::No
        );
    }

    #[test]
    fn dsep_collider() {
        let g = dag(&["X", "Z", "Y"], &[(0, 1), (2, 1)]);
        assert_eq!(label_dsep(&g, &dsep("X", "Y", &[])).unwrap(), Label::Yes);
        assert_eq!(label_dsep(&g, &dsep("X", "Y", &["Z"])).unwrap(), Label::No);
        // conditioning a collider's descendant also opens the path
        let g = dag(&["X", "Z", "Y", "W"], &[(0, 1), (2, 1), (1, 3)]);
        assert_eq!(label_dsep(&g, &dsep("X", "Y", &["W"])).unwrap(), Label::No);
    }

    #[test]
    fn dsep_disconnected_nodes_are_separated() {
        let g = dag(&["X", "Y", "P", "Q"], &[(0, 1), (2, 3)]);
        assert_eq!(label_dsep(&g, &dsep("X", "P", &[])).unwrap(), Label::Yes);
        assert_eq!(
            brute_force_dsep(&g, &dsep("X", "P", &[])).unwrap(),
            Label::Yes
        );
        assert_eq!(
            brute_force_dsep(&g, &dsep("X", "Y", &[])).unwrap(),
            Label::No
        );
    }

    #[test]
    fn dsep_query_validation() {
        let g = chain(&["A", "B", "C"]);
        assert!(matches!(
            label_dsep(&g, &dsep("A", "C", &["A"])),
            Err(OracleError::EndpointInConditioning(_))
        ));
        assert!(matches!(
            label_dsep(&g, &dsep("A", "C", &["B", "B"])),
            Err(OracleError::DuplicateConditioning(_))
        ));
        assert!(matches!(
            label_dsep(&g, &dsep("A", "Q", &[])),
            Err(OracleError::Graph(GraphError::UnknownNode(_)))
        ));
        assert!(matches!(
            label_dsep(&g, &dsep("A", "A", &[])),
            Err(OracleError::IdenticalEndpoints(_))
        ));
    }

    #[test]
    fn dsep_symmetry_and_conditioning_order_invariance() {
        let mut rng = ChaCha8Rng::seed_from_u64(17);
        for _ in 0..200 {
            let n = rng.gen_range(3..=7);
            let names = generate_node_names(n, (1, 3), &mut rng).unwrap();
            let m = rng.gen_range(1..=n * (n - 1) / 2);
            let g = generate_branched_dag_with_edges(names, m, &mut rng).unwrap();
            let a = 0;
            let b = 1;
            let z: Vec<&NodeName> = g.nodes().iter().skip(2).take(2).collect();
            let fwd = dsep(
                g.name(a).as_str(),
                g.name(b).as_str(),
                &z.iter().map(|x| x.as_str()).collect::<Vec<_>>(),
            );
            let rev_z: Vec<&str> = z.iter().map(|x| x.as_str()).rev().collect();
            let bwd = dsep(g.name(b).as_str(), g.name(a).as_str(), &rev_z);
            assert_eq!(label_dsep(&g, &fwd).unwrap(), label_dsep(&g, &bwd).unwrap());
        }
    }

    #[test]
    fn pure_chain_singleton_law() {
        // Xi, Xj | {Xk} separated exactly when k lies strictly between
        for n in 3..=8 {
            let names: Vec<String> = (0..n).map(|i| format!("X{i}")).collect();
            let refs: Vec<&str> = names.iter().map(String::as_str).collect();
            let g = chain(&refs);
            for i in 0..n {
                for j in i + 1..n {
                    assert_eq!(
                        label_dsep(&g, &dsep(&names[i], &names[j], &[])).unwrap(),
                        Label::No
                    );
                    for k in 0..n {
                        if k == i || k == j {
                            continue;
                        }
                        let expect = Label::from_bool(i < k && k < j);
                        assert_eq!(
                            label_dsep(&g, &dsep(&names[i], &names[j], &[&names[k]])).unwrap(),
                            expect,
                            "i={i} j={j} k={k}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn brute_force_agreement_small_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(23);
        for _ in 0..150 {
            let n = rng.gen_range(3..=6);
            let names = generate_node_names(n, (1, 2), &mut rng).unwrap();
            let m = rng.gen_range(0..=n * (n - 1) / 2);
            let g = generate_branched_dag_with_edges(names, m, &mut rng).unwrap();
            for (q, label) in enumerate_dsep_hypotheses(&g, 3).unwrap() {
                assert_eq!(
                    brute_force_dsep(&g, &q).unwrap(),
                    label,
                    "disagreement on {q:?}\n{}",
                    g.debug_dump()
                );
            }
            for u in 0..n {
                for v in 0..n {
                    if u == v {
                        continue;
                    }
                    let q = TransitivityQuery {
                        cause: g.name(u).clone(),
                        effect: g.name(v).clone(),
                    };
                    assert_eq!(
                        brute_force_transitivity(&g, &q).unwrap(),
                        label_transitivity(&g, &q).unwrap()
                    );
                }
            }
        }
    }

    #[test]
    fn brute_force_node_limit() {
        let names = [
            "a", "b", "c", "d", "e", "f", "g", "h", "i", "j", "k", "l", "m",
        ];
        let g = chain(&names);
        assert!(matches!(
            brute_force_dsep(&g, &dsep("a", "m", &[])),
            Err(OracleError::GraphTooLarge(13))
        ));
    }

    #[test]
    fn enumerate_counts() {
        let g = chain(&["A", "B", "C"]);
        assert_eq!(enumerate_dsep_hypotheses(&g, 1).unwrap().len(), 6);

        let g = chain(&["A", "B", "C", "D", "E", "F"]);
        assert_eq!(enumerate_dsep_hypotheses(&g, 5).unwrap().len(), 240);

        let g = chain(&["A", "B", "C"]);
        let hyps = enumerate_dsep_hypotheses(&g, 1).unwrap();
        assert!(hyps
            .iter()
            .any(|(q, l)| q == &dsep("A", "C", &["B"]) && *l == Label::Yes));
    }

    #[test]
    fn enumerate_order_is_size_then_lex() {
        let g = chain(&["A", "B", "C", "D"]);
        let hyps = enumerate_dsep_hypotheses(&g, 2).unwrap();
        // first pair is (A, B); its subsets over {C, D} in order:
        let sets: Vec<Vec<&str>> = hyps[..4]
            .iter()
            .map(|(q, _)| q.conditioning.iter().map(NodeName::as_str).collect())
            .collect();
        assert_eq!(
            sets,
            vec![vec![], vec!["C"], vec!["D"], vec!["C", "D"]],
            "empty set, singletons in node order, then the pair"
        );
        assert!(hyps[..4]
            .iter()
            .all(|(q, _)| q.a.as_str() == "A" && q.b.as_str() == "B"));
    }

    #[test]
    fn enumerate_rejects_oversized_cap() {
        let g = chain(&["A", "B", "C"]);
        assert!(matches!(
            enumerate_dsep_hypotheses(&g, 6),
            Err(OracleError::ConditioningTooLarge(6))
        ));
    }

    #[test]
    fn combinations_cover_and_order() {
        let combos: Vec<Vec<usize>> = Combinations::new(4, 2).collect();
        assert_eq!(
            combos,
            vec![
                vec![0, 1],
                vec![0, 2],
                vec![0, 3],
                vec![1, 2],
                vec![1, 3],
                vec![2, 3]
            ]
        );
        assert_eq!(Combinations::new(3, 0).count(), 1);
        assert_eq!(Combinations::new(3, 4).count(), 0);
    }
}
