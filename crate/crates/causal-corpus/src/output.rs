//! Writing corpora to disk and reading them back.
//!
//! A corpus directory holds three files: `<name>.jsonl` (one record per
//! instance), `<name>.txt` (one plain-text line per instance), and
//! `manifest.json` describing the spec that produced them plus SHA-256
//! digests of both files. Two generation runs agree byte for byte exactly
//! when their manifests carry the same combined digest.

use std::collections::BTreeMap;
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dataset::{record_line, sha256_hex, AxiomInstance, CorpusSpec, InstanceRecord};

/// File name of the per-corpus manifest.
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
    #[error("{path} line {line}: {source}")]
    Record {
        path: PathBuf,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("{path}: invalid manifest: {source}")]
    Manifest {
        path: PathBuf,
        #[source]
        source: serde_json::Error,
    },
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> OutputError + '_ {
    move |source| OutputError::Io {
        path: path.to_path_buf(),
        source,
    }
}

/// Generation and integrity summary written next to the corpus files.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Manifest {
    /// The spec that produced the corpus, including the master seed.
    pub spec: CorpusSpec,
    pub total_instances: usize,
    /// File name to SHA-256 hex digest of its bytes.
    pub files: BTreeMap<String, String>,
    /// Digest over the per-file digests; a corpus-level fingerprint.
    pub digest: String,
}

impl Manifest {
    fn combined_digest(files: &BTreeMap<String, String>) -> String {
        let mut acc = String::new();
        for (name, digest) in files {
            acc.push_str(name);
            acc.push(':');
            acc.push_str(digest);
            acc.push('\n');
        }
        sha256_hex(acc.as_bytes())
    }
}

/// Serializes instances to JSONL, one record per line.
pub fn corpus_jsonl(instances: &[AxiomInstance]) -> String {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&record_line(inst));
        out.push('\n');
    }
    out
}

/// Serializes instances to plain text, one labeled line per instance.
pub fn corpus_text(instances: &[AxiomInstance]) -> String {
    let mut out = String::new();
    for inst in instances {
        out.push_str(&inst.text());
        out.push('\n');
    }
    out
}

/// Writes `<name>.jsonl`, `<name>.txt`, and `manifest.json` into `dir`,
/// creating the directory if needed. Returns the written manifest.
pub fn write_corpus(
    dir: &Path,
    spec: &CorpusSpec,
    instances: &[AxiomInstance],
) -> Result<Manifest, OutputError> {
    fs::create_dir_all(dir).map_err(io_err(dir))?;

    let mut files = BTreeMap::new();
    for (name, content) in [
        (format!("{}.jsonl", spec.name), corpus_jsonl(instances)),
        (format!("{}.txt", spec.name), corpus_text(instances)),
    ] {
        let path = dir.join(&name);
        fs::write(&path, &content).map_err(io_err(&path))?;
        files.insert(name, sha256_hex(content.as_bytes()));
    }

    let manifest = Manifest {
        spec: spec.clone(),
        total_instances: instances.len(),
        digest: Manifest::combined_digest(&files),
        files,
    };
    let path = dir.join(MANIFEST_FILE);
    let mut json =
        serde_json::to_string_pretty(&manifest).map_err(|source| OutputError::Manifest {
            path: path.clone(),
            source,
        })?;
    json.push('\n');
    fs::write(&path, json).map_err(io_err(&path))?;
    Ok(manifest)
}

/// Reads a `manifest.json`.
pub fn read_manifest(path: &Path) -> Result<Manifest, OutputError> {
    let content = fs::read_to_string(path).map_err(io_err(path))?;
    serde_json::from_str(&content).map_err(|source| OutputError::Manifest {
        path: path.to_path_buf(),
        source,
    })
}

/// Reads a JSONL corpus file into records, ignoring blank lines.
pub fn read_corpus_records(path: &Path) -> Result<Vec<InstanceRecord>, OutputError> {
    let content = fs::read_to_string(path).map_err(io_err(path))?;
    let mut records = Vec::new();
    for (idx, line) in content.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(line).map_err(|source| OutputError::Record {
            path: path.to_path_buf(),
            line: idx + 1,
            source,
        })?;
        records.push(record);
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dataset::{build_corpus, Component, Task};
    use crate::graph::PerturbationProfile;

    fn tiny_spec(seed: u64) -> CorpusSpec {
        CorpusSpec {
            name: "tiny".to_owned(),
            task: Task::Transitivity,
            master_seed: seed,
            label_balance: 0.5,
            max_conditioning: 5,
            components: vec![Component {
                count: 20,
                profile: PerturbationProfile::sequential((3, 5), (1, 2)),
            }],
        }
    }

    #[test]
    fn write_then_read_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let spec = tiny_spec(11);
        let corpus = build_corpus(&spec).unwrap();
        let manifest = write_corpus(dir.path(), &spec, &corpus).unwrap();

        assert_eq!(manifest.total_instances, 20);
        assert_eq!(manifest.spec, spec);
        assert_eq!(
            manifest.files.keys().collect::<Vec<_>>(),
            ["tiny.jsonl", "tiny.txt"]
        );

        let records = read_corpus_records(&dir.path().join("tiny.jsonl")).unwrap();
        assert_eq!(records.len(), 20);
        for (record, inst) in records.iter().zip(&corpus) {
            assert_eq!(record.id, inst.id);
            record.verify().unwrap();
        }

        let reread = read_manifest(&dir.path().join(MANIFEST_FILE)).unwrap();
        assert_eq!(reread, manifest);
    }

    #[test]
    fn text_file_lines_match_instances() {
        let dir = tempfile::tempdir().unwrap();
        let spec = tiny_spec(3);
        let corpus = build_corpus(&spec).unwrap();
        write_corpus(dir.path(), &spec, &corpus).unwrap();
        let text = fs::read_to_string(dir.path().join("tiny.txt")).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), corpus.len());
        for (line, inst) in lines.iter().zip(&corpus) {
            assert_eq!(*line, inst.text());
        }
        assert!(text.ends_with('\n'));
    }

    #[test]
    fn same_seed_same_digest_different_seed_different_digest() {
        let dir_a = tempfile::tempdir().unwrap();
        let dir_b = tempfile::tempdir().unwrap();
        let dir_c = tempfile::tempdir().unwrap();
        let spec = tiny_spec(42);
        let corpus = build_corpus(&spec).unwrap();
        let a = write_corpus(dir_a.path(), &spec, &corpus).unwrap();
        let b = write_corpus(dir_b.path(), &spec, &build_corpus(&spec).unwrap()).unwrap();
        assert_eq!(a.digest, b.digest);

        let other = tiny_spec(43);
        let c = write_corpus(dir_c.path(), &other, &build_corpus(&other).unwrap()).unwrap();
        assert_ne!(a.digest, c.digest);
    }

    #[test]
    fn corrupted_jsonl_reports_line() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.jsonl");
        let spec = tiny_spec(1);
        let corpus = build_corpus(&spec).unwrap();
        let mut content = corpus_jsonl(&corpus[..2]);
        content.push_str("{oops\n");
        fs::write(&path, content).unwrap();
        match read_corpus_records(&path).unwrap_err() {
            OutputError::Record { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected error: {other}"),
        }
    }
}
