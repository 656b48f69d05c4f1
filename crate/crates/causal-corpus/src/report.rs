//! Scoring model predictions against a corpus and rendering accuracy tables.
//!
//! Predictions arrive as JSONL records naming an instance id, a model, and a
//! free-form answer string. Answers are normalized by taking the first
//! standalone `yes`/`no` (case-insensitive); anything else counts as wrong.
//! Accuracy is reported per bucket, where a bucket is either
//! (node count × structure family) or (branching factor × node count), and
//! every bucket's denominator is the full number of corpus instances in it,
//! so missing predictions also count as wrong.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::sync::OnceLock;

use regex::Regex;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{InstanceRecord, StructureTag};
use crate::oracle::Label;

/// Errors raised while parsing predictions or assembling a report.
#[derive(Debug, Error)]
pub enum ReportError {
    /// A prediction line was not a valid JSON record.
    #[error("invalid prediction record on line {line}: {source}")]
    Json {
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    /// A prediction referenced an instance id absent from the corpus.
    #[error("prediction for unknown instance id {instance_id:?} (model {model:?})")]
    UnknownInstance { model: String, instance_id: String },
    /// The same model answered the same instance twice.
    #[error("duplicate prediction: model {model:?} answered instance {instance_id:?} twice")]
    DuplicatePrediction { model: String, instance_id: String },
    /// Two corpus records share an id.
    #[error("corpus contains duplicate instance id {instance_id:?}")]
    DuplicateInstance { instance_id: String },
}

/// One model answer to one corpus instance.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub instance_id: String,
    pub model_name: String,
    pub answer: String,
}

/// Parses JSONL prediction records, ignoring blank lines.
pub fn parse_predictions(input: &str) -> Result<Vec<PredictionRecord>, ReportError> {
    let mut records = Vec::new();
    for (idx, line) in input.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|source| ReportError::Json {
            line: idx + 1,
            source,
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Extracts the first standalone `yes`/`no` from a model answer.
///
/// Matching is case-insensitive and bounded by word boundaries, so
/// "Yesterday" does not count as a yes. `None` means unparseable, which
/// scoring treats as an incorrect answer.
pub fn normalize_answer(answer: &str) -> Option<Label> {
    static ANSWER: OnceLock<Regex> = OnceLock::new();
    let re = ANSWER.get_or_init(|| Regex::new(r"(?i)\b(yes|no)\b").expect("valid regex"));
    re.find(answer).map(|m| {
        if m.as_str().eq_ignore_ascii_case("yes") {
            Label::Yes
        } else {
            Label::No
        }
    })
}

/// How instances are grouped into accuracy buckets.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum BucketScheme {
    /// Node count crossed with structure family (FS, RF, ...).
    CountStructure,
    /// Node count crossed with branching factor.
    BranchingCount,
}

/// A single accuracy-table column. The derived ordering keeps node counts
/// ascending and, within a node count, structure families in canonical
/// order (FS before RF) or branching factors ascending.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BucketKey {
    CountStructure {
        node_count: usize,
        structure: StructureTag,
    },
    BranchingCount {
        node_count: usize,
        /// Branching factor in hundredths, so 1.4 is 140.
        bf_centi: u32,
    },
}

impl BucketKey {
    fn for_record(record: &InstanceRecord, scheme: BucketScheme) -> BucketKey {
        match scheme {
            BucketScheme::CountStructure => BucketKey::CountStructure {
                node_count: record.node_count,
                structure: record.structure_tag,
            },
            BucketScheme::BranchingCount => BucketKey::BranchingCount {
                node_count: record.node_count,
                bf_centi: (record.branching_factor * 100.0).round() as u32,
            },
        }
    }
}

impl fmt::Display for BucketKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            BucketKey::CountStructure {
                node_count,
                structure,
            } => write!(f, "n{node_count}-{}", structure.abbrev()),
            BucketKey::BranchingCount {
                node_count,
                bf_centi,
            } => write!(f, "n{node_count}-bf{:.1}", *bf_centi as f64 / 100.0),
        }
    }
}

/// Correct/total tally for one (model, bucket) cell.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct BucketScore {
    pub correct: usize,
    pub total: usize,
}

impl BucketScore {
    pub fn accuracy(self) -> f64 {
        self.correct as f64 / self.total as f64
    }
}

/// One model's row, with scores aligned to `EvalReport::buckets`.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelReport {
    pub model: String,
    pub scores: Vec<BucketScore>,
}

/// An accuracy table: models as rows, buckets as columns.
#[derive(Clone, Debug, PartialEq)]
pub struct EvalReport {
    pub scheme: BucketScheme,
    /// Non-empty buckets in ascending order; empty buckets are omitted.
    pub buckets: Vec<BucketKey>,
    /// One row per model, sorted by model name.
    pub models: Vec<ModelReport>,
}

/// Scores predictions against corpus records under the given bucketing.
pub fn score(
    predictions: &[PredictionRecord],
    corpus: &[InstanceRecord],
    scheme: BucketScheme,
) -> Result<EvalReport, ReportError> {
    let mut by_id: HashMap<&str, &InstanceRecord> = HashMap::with_capacity(corpus.len());
    for record in corpus {
        if by_id.insert(record.id.as_str(), record).is_some() {
            return Err(ReportError::DuplicateInstance {
                instance_id: record.id.clone(),
            });
        }
    }

    let mut totals: BTreeMap<BucketKey, usize> = BTreeMap::new();
    for record in corpus {
        *totals
            .entry(BucketKey::for_record(record, scheme))
            .or_default() += 1;
    }

    let mut models: BTreeSet<&str> = BTreeSet::new();
    let mut seen: HashSet<(&str, &str)> = HashSet::with_capacity(predictions.len());
    let mut correct: HashMap<(&str, BucketKey), usize> = HashMap::new();
    for pred in predictions {
        let record = by_id
            .get(pred.instance_id.as_str())
            .copied()
            .ok_or_else(|| ReportError::UnknownInstance {
                model: pred.model_name.clone(),
                instance_id: pred.instance_id.clone(),
            })?;
        if !seen.insert((pred.model_name.as_str(), pred.instance_id.as_str())) {
            return Err(ReportError::DuplicatePrediction {
                model: pred.model_name.clone(),
                instance_id: pred.instance_id.clone(),
            });
        }
        models.insert(pred.model_name.as_str());
        if normalize_answer(&pred.answer) == Some(record.label) {
            let key = BucketKey::for_record(record, scheme);
            *correct.entry((pred.model_name.as_str(), key)).or_default() += 1;
        }
    }

    let buckets: Vec<BucketKey> = totals.keys().copied().collect();
    let models = models
        .into_iter()
        .map(|model| ModelReport {
            model: model.to_owned(),
            scores: buckets
                .iter()
                .map(|&bucket| BucketScore {
                    correct: correct.get(&(model, bucket)).copied().unwrap_or(0),
                    total: totals[&bucket],
                })
                .collect(),
        })
        .collect();

    Ok(EvalReport {
        scheme,
        buckets,
        models,
    })
}

/// Output formats for [`render_report`].
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ReportFormat {
    /// Space-padded plain-text matrix.
    AlignedText,
    /// One `model,bucket,correct,total,accuracy` row per cell.
    Csv,
    /// A GitHub-style pipe table.
    Markdown,
}

/// Renders a report in the requested format; the string ends with a newline.
pub fn render_report(report: &EvalReport, format: ReportFormat) -> String {
    match format {
        ReportFormat::AlignedText => render_aligned(report),
        ReportFormat::Csv => render_csv(report),
        ReportFormat::Markdown => render_markdown(report),
    }
}

fn accuracy_cell(score: BucketScore) -> String {
    format!("{:.3}", score.accuracy())
}

fn render_aligned(report: &EvalReport) -> String {
    let headers: Vec<String> = std::iter::once("model".to_owned())
        .chain(report.buckets.iter().map(|b| b.to_string()))
        .collect();
    let mut widths: Vec<usize> = headers.iter().map(String::len).collect();
    let mut rows: Vec<Vec<String>> = Vec::with_capacity(report.models.len());
    for model in &report.models {
        let mut row = Vec::with_capacity(headers.len());
        row.push(model.model.clone());
        row.extend(model.scores.iter().map(|&s| accuracy_cell(s)));
        for (width, cell) in widths.iter_mut().zip(&row) {
            *width = (*width).max(cell.len());
        }
        rows.push(row);
    }
    let mut out = String::new();
    let emit = |out: &mut String, cells: &[String]| {
        for (i, (cell, width)) in cells.iter().zip(&widths).enumerate() {
            if i > 0 {
                out.push_str("  ");
            }
            if i == 0 {
                out.push_str(&format!("{cell:<width$}"));
            } else {
                out.push_str(&format!("{cell:>width$}"));
            }
        }
        while out.ends_with(' ') {
            out.pop();
        }
        out.push('\n');
    };
    emit(&mut out, &headers);
    for row in &rows {
        emit(&mut out, row);
    }
    out
}

fn render_csv(report: &EvalReport) -> String {
    let mut out = String::from("model,bucket,correct,total,accuracy\n");
    for model in &report.models {
        for (bucket, score) in report.buckets.iter().zip(&model.scores) {
            out.push_str(&format!(
                "{},{},{},{},{:.4}\n",
                model.model,
                bucket,
                score.correct,
                score.total,
                score.accuracy()
            ));
        }
    }
    out
}

fn render_markdown(report: &EvalReport) -> String {
    let mut out = String::from("| model |");
    for bucket in &report.buckets {
        out.push_str(&format!(" {bucket} |"));
    }
    out.push_str("\n|---|");
    for _ in &report.buckets {
        out.push_str("---|");
    }
    out.push('\n');
    for model in &report.models {
        out.push_str(&format!("| {} |", model.model));
        for &score in &model.scores {
            out.push_str(&format!(" {} |", accuracy_cell(score)));
        }
        out.push('\n');
    }
    out
}
