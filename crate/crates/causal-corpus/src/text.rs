//! The instance text grammar: serialization and the inverse parser.
//!
//! ```text
//! instance   := premise " " hypothesis [" " label]
//! premise    := sentence (" " sentence)*
//! sentence   := NAME " causes " NAME "."
//! hypothesis := "Does " NAME " cause " NAME "?"
//!             | "Are " NAME " and " NAME " d-separated?"
//!             | "Are " NAME " and " NAME " d-separated given {" NAME (", " NAME)* "}?"
//! label      := "Yes" | "No"
//! ```
//!
//! The emitted label separator is "? Yes"; the parser additionally accepts the
//! "?: Yes" form and an optional trailing period after the label.

use std::sync::OnceLock;

use regex::Regex;
use thiserror::Error;

use crate::graph::{CausalDag, GraphError, NodeName};
use crate::oracle::{DsepQuery, Label, Query, TransitivityQuery};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("expected {expected} at byte {offset}, found {snippet:?}")]
    Syntax {
        expected: &'static str,
        offset: usize,
        snippet: String,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
}

/// Premise text: one "U causes V." sentence per edge, in presentation order,
/// joined by single spaces.
pub fn premise_text(g: &CausalDag) -> String {
    let mut out = String::new();
    for (i, &(u, v)) in g.edges().iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        out.push_str(g.name(u).as_str());
        out.push_str(" causes ");
        out.push_str(g.name(v).as_str());
        out.push('.');
    }
    out
}

/// Hypothesis text; the "given {..}" clause is omitted for empty sets.
pub fn hypothesis_text(query: &Query) -> String {
    match query {
        Query::Transitivity(q) => format!("Does {} cause {}?", q.cause, q.effect),
        Query::Dsep(q) => {
            if q.conditioning.is_empty() {
                format!("Are {} and {} d-separated?", q.a, q.b)
            } else {
                let set = q
                    .conditioning
                    .iter()
                    .map(NodeName::as_str)
                    .collect::<Vec<_>>()
                    .join(", ");
                format!("Are {} and {} d-separated given {{{set}}}?", q.a, q.b)
            }
        }
    }
}

/// Full labeled instance line: premise, hypothesis, label.
pub fn instance_text(g: &CausalDag, query: &Query, label: Label) -> String {
    format!("{} {} {}", premise_text(g), hypothesis_text(query), label)
}

/// Parser output. The graph's nodes appear in first-mention order (premise
/// first, then any hypothesis-only names).
#[derive(Clone, Debug, PartialEq)]
pub struct ParsedInstance {
    pub graph: CausalDag,
    pub query: Query,
    pub label: Option<Label>,
}

fn sentence_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^([0-9A-Za-z]{1,10}) causes ([0-9A-Za-z]{1,10})\.").unwrap())
}

fn transitivity_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^Does ([0-9A-Za-z]{1,10}) cause ([0-9A-Za-z]{1,10})\?").unwrap())
}

fn dsep_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| {
        Regex::new(
            r"^Are ([0-9A-Za-z]{1,10}) and ([0-9A-Za-z]{1,10}) d-separated(?: given \{([0-9A-Za-z]{1,10}(?:, [0-9A-Za-z]{1,10})*)\})?\?",
        )
        .unwrap()
    })
}

fn label_re() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(r"^:? (Yes|No)\.?$").unwrap())
}

/// Parses a labeled or unlabeled instance line back into graph, query, and
/// optional label.
pub fn parse_instance(input: &str) -> Result<ParsedInstance, ParseError> {
    let total = input.len();
    let syntax = |expected: &'static str, rest: &str| ParseError::Syntax {
        expected,
        offset: total - rest.len(),
        snippet: rest.chars().take(30).collect(),
    };

    let mut names: Vec<NodeName> = Vec::new();
    let intern = |raw: &str, names: &mut Vec<NodeName>| -> Result<usize, ParseError> {
        if let Some(i) = names.iter().position(|n| n.as_str() == raw) {
            return Ok(i);
        }
        names.push(NodeName::new(raw)?);
        Ok(names.len() - 1)
    };

    let mut rest = input;
    let mut edges: Vec<(usize, usize)> = Vec::new();
    while let Some(caps) = sentence_re().captures(rest) {
        let u = intern(&caps[1], &mut names)?;
        let v = intern(&caps[2], &mut names)?;
        edges.push((u, v));
        rest = &rest[caps[0].len()..];
        rest = rest.strip_prefix(' ').unwrap_or(rest);
    }
    if edges.is_empty() {
        return Err(syntax("a premise sentence", rest));
    }

    let (query, after) = if let Some(caps) = transitivity_re().captures(rest) {
        let cause = intern(&caps[1], &mut names)?;
        let effect = intern(&caps[2], &mut names)?;
        let q = Query::Transitivity(TransitivityQuery {
            cause: names[cause].clone(),
            effect: names[effect].clone(),
        });
        (q, &rest[caps[0].len()..])
    } else if let Some(caps) = dsep_re().captures(rest) {
        let a = intern(&caps[1], &mut names)?;
        let b = intern(&caps[2], &mut names)?;
        let mut conditioning = Vec::new();
        if let Some(set) = caps.get(3) {
            for raw in set.as_str().split(", ") {
                let idx = intern(raw, &mut names)?;
                conditioning.push(names[idx].clone());
            }
        }
        let q = Query::Dsep(DsepQuery {
            a: names[a].clone(),
            b: names[b].clone(),
            conditioning,
        });
        (q, &rest[caps[0].len()..])
    } else {
        return Err(syntax("a hypothesis", rest));
    };

    let label = if after.is_empty() {
        None
    } else if let Some(caps) = label_re().captures(after) {
        Some(match &caps[1] {
            "Yes" => Label::Yes,
            _ => Label::No,
        })
    } else {
        return Err(syntax("a label", after));
    };

    let graph = CausalDag::new(names, edges)?;
    Ok(ParsedInstance {
        graph,
        query,
        label,
    })
}
