//! Prompt construction.
//!
//! Two modes: IO prompts ask for the answer directly; COT prompts open a
//! thoughts section with "Let's think step by step." and let the model reason
//! before answering. Either mode can be zero-shot or two-shot; exemplars are
//! fixed per (domain, task, question type) and carry their gold rationales.

use crate::taskgen::{QType, QuestionRecord, TaskKind, LETTERS};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, HashSet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PromptMode {
    Io,
    Cot,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PromptStyle {
    pub mode: PromptMode,
    pub shots: u8,
}

impl PromptStyle {
    pub fn new(mode: PromptMode, shots: u8) -> Result<PromptStyle, PromptError> {
        if shots != 0 && shots != 2 {
            return Err(PromptError::BadShots(shots));
        }
        Ok(PromptStyle { mode, shots })
    }
}

#[derive(Debug, Error)]
pub enum PromptError {
    #[error("unsupported shot count {0}; supported counts are 0 and 2")]
    BadShots(u8),
    #[error("no exemplars for {domain} {task} {qtype} questions")]
    MissingExemplars {
        domain: String,
        task: &'static str,
        qtype: &'static str,
    },
}

/// Fixed in-context examples, two per (domain, task, question type).
#[derive(Debug, Default, Clone)]
pub struct ExemplarStore {
    by_key: BTreeMap<(String, TaskKind, QType), Vec<QuestionRecord>>,
}

impl ExemplarStore {
    /// Keeps the first two records of each (domain, task, qtype) in input
    /// order; the first becomes shot one.
    pub fn from_records(records: &[QuestionRecord]) -> ExemplarStore {
        let mut store = ExemplarStore::default();
        for rec in records {
            let slot = store
                .by_key
                .entry((rec.domain.clone(), rec.task, rec.qtype))
                .or_default();
            if slot.len() < 2 {
                slot.push(rec.clone());
            }
        }
        store
    }

    pub fn get(&self, domain: &str, task: TaskKind, qtype: QType) -> Option<&[QuestionRecord]> {
        self.by_key
            .get(&(domain.to_string(), task, qtype))
            .map(Vec::as_slice)
    }

    /// Ids of every stored exemplar, for leakage checks against the
    /// evaluated split.
    pub fn ids(&self) -> HashSet<&str> {
        self.by_key
            .values()
            .flatten()
            .map(|r| r.id.as_str())
            .collect()
    }

    pub fn is_empty(&self) -> bool {
        self.by_key.is_empty()
    }
}

/// The answer text shown after "**Final Answer**:" — Yes/No for boolean
/// questions, the gold letter for multiple choice.
pub fn gold_answer_text(rec: &QuestionRecord) -> &str {
    match rec.qtype {
        QType::Bool => {
            if rec.gold == "yes" {
                "Yes"
            } else {
                "No"
            }
        }
        QType::Mcq => rec.gold.as_str(),
    }
}

/// Context and question on one line; multiple-choice options as lettered
/// lines below it.
fn question_block(rec: &QuestionRecord) -> String {
    let mut s = format!("**Question**: {}  {}", rec.context, rec.question);
    if rec.qtype == QType::Mcq {
        for (k, opt) in rec.options.iter().enumerate() {
            s.push_str(&format!("\n{}. {}", LETTERS[k], opt));
        }
    }
    s
}

fn exemplar_block(rec: &QuestionRecord, mode: PromptMode) -> String {
    match mode {
        PromptMode::Cot => format!(
            "{}\n**Thoughts**: Let's think step by step.\n{}\n**Final Answer**: {}.",
            question_block(rec),
            rec.rationale,
            gold_answer_text(rec),
        ),
        PromptMode::Io => format!(
            "{}\n**Final Answer**: {}.",
            question_block(rec),
            gold_answer_text(rec),
        ),
    }
}

fn final_block(rec: &QuestionRecord, mode: PromptMode) -> String {
    match mode {
        PromptMode::Cot => format!(
            "{}\n**Thoughts**: Let's think step by step.",
            question_block(rec)
        ),
        PromptMode::Io => format!("{}\n**Final Answer**:", question_block(rec)),
    }
}

/// The full prompt for one record. Two-shot prompts prepend the stored
/// exemplars of the record's own (domain, task, qtype).
pub fn build_prompt(
    rec: &QuestionRecord,
    style: PromptStyle,
    exemplars: Option<&ExemplarStore>,
) -> Result<String, PromptError> {
    let missing = || PromptError::MissingExemplars {
        domain: rec.domain.clone(),
        task: rec.task.key(),
        qtype: rec.qtype.key(),
    };
    match style.shots {
        0 => Ok(final_block(rec, style.mode)),
        2 => {
            let shots = exemplars
                .and_then(|store| store.get(&rec.domain, rec.task, rec.qtype))
                .filter(|e| e.len() >= 2)
                .ok_or_else(missing)?;
            let mut parts: Vec<String> = shots[..2]
                .iter()
                .map(|e| exemplar_block(e, style.mode))
                .collect();
            parts.push(final_block(rec, style.mode));
            Ok(parts.join("\n"))
        }
        n => Err(PromptError::BadShots(n)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskgen::testutil::Fixture;
    use crate::taskgen::{generate_for_state, QType, TaskKind};

    fn records(kind: TaskKind, qtype: QType) -> Vec<QuestionRecord> {
        let fx = Fixture::new("ferry", "p02");
        let ctx = fx.ctx();
        let b = fx.init_bundle();
        let mut out = Vec::new();
        for seed in 0..6 {
            out.extend(generate_for_state(&ctx, &b, kind, qtype, seed));
        }
        out
    }

    #[test]
    fn io_zero_shot_is_question_then_answer_slot() {
        let recs = records(TaskKind::Applicability, QType::Bool);
        let style = PromptStyle::new(PromptMode::Io, 0).unwrap();
        let p = build_prompt(&recs[0], style, None).unwrap();
        assert!(p.starts_with("**Question**: "));
        assert!(p.ends_with("\n**Final Answer**:"));
        assert!(!p.contains("Let's think step by step"));
    }

    #[test]
    fn cot_two_shot_carries_both_exemplars_and_open_thoughts() {
        let recs = records(TaskKind::Applicability, QType::Bool);
        assert!(recs.len() >= 3);
        let store = ExemplarStore::from_records(&recs[..2]);
        let style = PromptStyle::new(PromptMode::Cot, 2).unwrap();
        let p = build_prompt(&recs[2], style, Some(&store)).unwrap();
        assert_eq!(p.matches("**Question**: ").count(), 3);
        assert_eq!(p.matches("**Thoughts**: Let's think step by step.").count(), 3);
        assert_eq!(p.matches("**Final Answer**: ").count(), 2);
        assert!(p.ends_with("**Thoughts**: Let's think step by step."));
        assert!(p.contains(&recs[0].rationale));
        assert!(p.contains(&recs[1].rationale));
    }

    #[test]
    fn mcq_options_are_lettered_lines() {
        let recs = records(TaskKind::Progression, QType::Mcq);
        let style = PromptStyle::new(PromptMode::Io, 0).unwrap();
        let p = build_prompt(&recs[0], style, None).unwrap();
        for (k, opt) in recs[0].options.iter().enumerate() {
            assert!(p.contains(&format!("\n{}. {}", LETTERS[k], opt)));
        }
    }

    #[test]
    fn two_shot_without_exemplars_is_a_configuration_error() {
        let recs = records(TaskKind::Applicability, QType::Bool);
        let style = PromptStyle::new(PromptMode::Cot, 2).unwrap();
        assert!(matches!(
            build_prompt(&recs[0], style, None),
            Err(PromptError::MissingExemplars { .. })
        ));
        let empty = ExemplarStore::default();
        assert!(matches!(
            build_prompt(&recs[0], style, Some(&empty)),
            Err(PromptError::MissingExemplars { .. })
        ));
    }

    #[test]
    fn bad_shot_counts_are_rejected() {
        assert!(PromptStyle::new(PromptMode::Io, 1).is_err());
        assert!(PromptStyle::new(PromptMode::Cot, 3).is_err());
    }
}
