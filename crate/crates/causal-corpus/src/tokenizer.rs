//! Mixed-granularity tokenizer over a fixed vocabulary.
//!
//! Node names are tokenized one character at a time while reserved terms are
//! single word-level tokens, so unseen names at eval time can never fall out
//! of vocabulary. Whitespace emits no token; decoding restores the single
//! spaces of the instance grammar from token classes alone.
//!
//! Vocabulary entry order (token id = position) is fixed:
//!
//! 1. the 62 name characters: digits `0`-`9`, then `A`-`Z`, then `a`-`z`;
//! 2. the reachability-task words `causes`, `Does`, `cause`, `Yes`, `No`;
//! 3. the punctuation marks `.` and `?` (69 entries so far);
//! 4. for the d-separation task only: the words `Are`, `and`, `d-separated`,
//!    `given`, then the symbols `{`, `}`, `,` (76 entries total).
//!
//! The reachability vocabulary is therefore an exact prefix of the
//! d-separation vocabulary. Both are frozen as files under `vocab/` in this
//! crate and checked against `build_vocabulary` in tests.

use std::collections::HashMap;

use thiserror::Error;

use crate::dataset::Task;
use crate::graph::NAME_ALPHABET;

/// Reserved words shared by both tasks, in vocabulary order.
const SHARED_WORDS: [&str; 5] = ["causes", "Does", "cause", "Yes", "No"];
/// Punctuation shared by both tasks, in vocabulary order.
const SHARED_PUNCT: [&str; 2] = [".", "?"];
/// Extra reserved words for the d-separation task, in vocabulary order.
const DSEP_WORDS: [&str; 4] = ["Are", "and", "d-separated", "given"];
/// Extra symbols for the d-separation task, in vocabulary order.
const DSEP_PUNCT: [&str; 3] = ["{", "}", ","];

#[derive(Debug, Error)]
pub enum TokenizerError {
    #[error("character {ch:?} at byte {offset} is outside the vocabulary")]
    UnknownChar { ch: char, offset: usize },
    #[error("token id {0} is out of range for this vocabulary")]
    InvalidId(u32),
}

/// Encoded instance text.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenStream {
    pub ids: Vec<u32>,
}

impl TokenStream {
    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    /// Space-separated ids, the per-instance line format of token dumps.
    pub fn to_line(&self) -> String {
        self.ids
            .iter()
            .map(u32::to_string)
            .collect::<Vec<_>>()
            .join(" ")
    }
}

/// Immutable token table for one task.
#[derive(Clone, Debug)]
pub struct Vocabulary {
    entries: Vec<String>,
    ids: HashMap<String, u32>,
    /// Reserved words in longest-first match order.
    words: Vec<String>,
    task: Task,
}

/// Builds the fixed vocabulary for a task: 69 entries for reachability,
/// 76 for d-separation.
pub fn build_vocabulary(task: Task) -> Vocabulary {
    let mut entries: Vec<String> = NAME_ALPHABET
        .iter()
        .map(|&b| (b as char).to_string())
        .collect();
    entries.extend(SHARED_WORDS.iter().map(|s| s.to_string()));
    entries.extend(SHARED_PUNCT.iter().map(|s| s.to_string()));
    if task == Task::Dsep {
        entries.extend(DSEP_WORDS.iter().map(|s| s.to_string()));
        entries.extend(DSEP_PUNCT.iter().map(|s| s.to_string()));
    }
    let ids = entries
        .iter()
        .enumerate()
        .map(|(i, t)| (t.clone(), i as u32))
        .collect();
    let mut words: Vec<String> = entries.iter().filter(|t| t.len() > 1).cloned().collect();
    words.sort_by(|a, b| b.len().cmp(&a.len()).then(a.cmp(b)));
    Vocabulary {
        entries,
        ids,
        words,
        task,
    }
}

fn is_char_token(token: &str) -> bool {
    token.len() == 1 && token.as_bytes()[0].is_ascii_alphanumeric()
}

impl Vocabulary {
    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn task(&self) -> Task {
        self.task
    }

    pub fn entries(&self) -> &[String] {
        &self.entries
    }

    pub fn token(&self, id: u32) -> Option<&str> {
        self.entries.get(id as usize).map(String::as_str)
    }

    pub fn id(&self, token: &str) -> Option<u32> {
        self.ids.get(token).copied()
    }

    /// One token per line; line number minus one is the token id.
    pub fn to_file_string(&self) -> String {
        let mut out = self.entries.join("\n");
        out.push('\n');
        out
    }

    /// Tokenizes instance text: longest reserved-word match at word
    /// boundaries, then punctuation, then single name characters. Whitespace
    /// emits nothing.
    pub fn encode(&self, text: &str) -> Result<TokenStream, TokenizerError> {
        let bytes = text.as_bytes();
        let mut ids = Vec::new();
        let mut i = 0;
        'scan: while i < bytes.len() {
            let b = bytes[i];
            if b.is_ascii_whitespace() {
                i += 1;
                continue;
            }
            for word in &self.words {
                if text[i..].starts_with(word.as_str()) {
                    let end = i + word.len();
                    let starts_clean = i == 0 || !bytes[i - 1].is_ascii_alphanumeric();
                    let ends_clean = end == bytes.len() || !bytes[end].is_ascii_alphanumeric();
                    if starts_clean && ends_clean {
                        ids.push(self.ids[word.as_str()]);
                        i = end;
                        continue 'scan;
                    }
                }
            }
            if b.is_ascii() {
                if let Some(&id) = self.ids.get(&text[i..i + 1]) {
                    ids.push(id);
                    i += 1;
                    continue;
                }
            }
            let ch = text[i..].chars().next().expect("offset is a char boundary");
            return Err(TokenizerError::UnknownChar { ch, offset: i });
        }
        Ok(TokenStream { ids })
    }

    /// Inverts `encode`, restoring grammar spacing: no space before `.`,
    /// `?`, `,`, or `}`, none after `{`, none between adjacent name
    /// characters, and a single space everywhere else.
    pub fn decode(&self, stream: &TokenStream) -> Result<String, TokenizerError> {
        let mut out = String::new();
        let mut prev: Option<&str> = None;
        for &id in &stream.ids {
            let token = self.token(id).ok_or(TokenizerError::InvalidId(id))?;
            if let Some(p) = prev {
                let tight = matches!(token, "." | "?" | "," | "}")
                    || p == "{"
                    || (is_char_token(p) && is_char_token(token));
                if !tight {
                    out.push(' ');
                }
            }
            out.push_str(token);
            prev = Some(token);
        }
        Ok(out)
    }
}
