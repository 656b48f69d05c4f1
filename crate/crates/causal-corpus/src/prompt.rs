//! Prompt emission for querying language models on serialized instances.
//!
//! Two modes: zero-shot appends an answer-format instruction to the bare
//! instance text; multi-shot prints a header, one quoted labeled
//! demonstration per line, then the unlabeled query instance.

use thiserror::Error;

use crate::dataset::AxiomInstance;

/// Instruction appended to every zero-shot prompt.
pub const ZERO_SHOT_INSTRUCTION: &str = "Answer in 'Yes' or 'No' only";

/// Header line opening every multi-shot prompt.
pub const MULTI_SHOT_INSTRUCTION: &str =
    "Following the given examples answer the question regarding causal relationship between two variables:";

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("multi-shot prompts need at least one demonstration")]
    NoShots,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PromptMode {
    ZeroShot,
    MultiShot,
}

/// How to wrap an instance into a prompt; construct via [`zero_shot`] or
/// [`multi_shot`].
///
/// [`zero_shot`]: PromptTemplate::zero_shot
/// [`multi_shot`]: PromptTemplate::multi_shot
#[derive(Clone, Debug)]
pub struct PromptTemplate {
    pub mode: PromptMode,
    pub shots: Vec<AxiomInstance>,
    pub instruction_text: String,
}

impl PromptTemplate {
    pub fn zero_shot() -> PromptTemplate {
        PromptTemplate {
            mode: PromptMode::ZeroShot,
            shots: Vec::new(),
            instruction_text: ZERO_SHOT_INSTRUCTION.to_owned(),
        }
    }

    pub fn multi_shot(shots: Vec<AxiomInstance>) -> Result<PromptTemplate, PromptError> {
        if shots.is_empty() {
            return Err(PromptError::NoShots);
        }
        Ok(PromptTemplate {
            mode: PromptMode::MultiShot,
            shots,
            instruction_text: MULTI_SHOT_INSTRUCTION.to_owned(),
        })
    }
}

/// Renders `inst` as a prompt.
///
/// Zero-shot: `<premise> <hypothesis> <instruction>` on one line. Multi-shot:
/// the instruction header, each shot as `` `<premise> <hypothesis>: <label>' ``
/// on its own line, then `<premise> <hypothesis>` of the query, unlabeled.
pub fn emit_prompt(inst: &AxiomInstance, template: &PromptTemplate) -> String {
    let query = format!("{} {}", inst.premise(), inst.hypothesis_text());
    match template.mode {
        PromptMode::ZeroShot => format!("{query} {}", template.instruction_text),
        PromptMode::MultiShot => {
            let mut out = String::new();
            out.push_str(&template.instruction_text);
            out.push('\n');
            for shot in &template.shots {
                out.push_str(&format!(
                    "`{} {}: {}'\n",
                    shot.premise(),
                    shot.hypothesis_text(),
                    shot.label
                ));
            }
            out.push_str(&query);
            out
        }
    }
}
