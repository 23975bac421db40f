//! Accuracy tallies and report rendering.
//!
//! Scoring re-derives every judgment from the stored completion text, so a
//! report computed from a transcript file on disk cannot disagree with one
//! computed at evaluation time. Accuracy is percent correct over answered
//! records: endpoint errors leave the denominator, extraction failures stay
//! in it and score as incorrect.

use super::{extract_answer, Transcript};
use crate::taskgen::{QType, TaskKind};
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct Tally {
    pub n: usize,
    pub errors: usize,
    pub extraction_failures: usize,
    pub correct: usize,
}

impl Tally {
    pub fn answered(&self) -> usize {
        self.n - self.errors
    }

    /// Percent correct over answered records; None when nothing was answered.
    pub fn accuracy(&self) -> Option<f64> {
        let d = self.answered();
        (d > 0).then(|| 100.0 * self.correct as f64 / d as f64)
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct EvalReport {
    /// One tally per (task, question type, domain).
    pub domain_cells: BTreeMap<(TaskKind, QType, String), Tally>,
    /// Tallies pooled over domains.
    pub task_cells: BTreeMap<(TaskKind, QType), Tally>,
    /// Unweighted mean of per-task accuracies, one per question type.
    /// Unrounded; rendering rounds to two decimals.
    pub mean_across_tasks: BTreeMap<QType, f64>,
    pub answered: usize,
    pub errored: usize,
    pub extraction_failures: usize,
}

struct Judgment {
    errored: bool,
    extraction_failed: bool,
    correct: bool,
}

fn judge(t: &Transcript) -> Judgment {
    match &t.completion {
        None => Judgment {
            errored: true,
            extraction_failed: false,
            correct: false,
        },
        Some(text) => {
            let extracted = extract_answer(text, t.qtype, &t.options);
            Judgment {
                errored: false,
                extraction_failed: extracted.is_none(),
                correct: extracted.as_deref() == Some(t.gold.as_str()),
            }
        }
    }
}

fn add(tally: &mut Tally, j: &Judgment) {
    tally.n += 1;
    tally.errors += j.errored as usize;
    tally.extraction_failures += j.extraction_failed as usize;
    tally.correct += j.correct as usize;
}

/// Scores a transcript set into a report.
pub fn score(transcripts: &[Transcript]) -> EvalReport {
    let mut report = EvalReport::default();
    for t in transcripts {
        let j = judge(t);
        add(
            report
                .domain_cells
                .entry((t.task, t.qtype, t.domain.clone()))
                .or_default(),
            &j,
        );
        add(report.task_cells.entry((t.task, t.qtype)).or_default(), &j);
        report.answered += !j.errored as usize;
        report.errored += j.errored as usize;
        report.extraction_failures += j.extraction_failed as usize;
    }
    for qtype in QType::ALL {
        let accs: Vec<f64> = TaskKind::ALL
            .iter()
            .filter_map(|&task| report.task_cells.get(&(task, qtype)))
            .filter_map(Tally::accuracy)
            .collect();
        if !accs.is_empty() {
            report
                .mean_across_tasks
                .insert(qtype, accs.iter().sum::<f64>() / accs.len() as f64);
        }
    }
    report
}

fn cell_text(acc: Option<f64>) -> String {
    match acc {
        Some(a) => format!("{a:.2}"),
        None => "-".to_string(),
    }
}

const TASK_W: usize = 22;
const COL_W: usize = 8;

fn grid_row(label: &str, by_qtype: impl Fn(QType) -> Option<f64>) -> String {
    let mut line = format!("  {label:<TASK_W$}");
    for qtype in QType::ALL {
        line.push_str(&format!("{:>COL_W$}", cell_text(by_qtype(qtype))));
    }
    line
}

/// Plain-text report: a task grid with the mean row, then one grid per
/// domain.
pub fn render_text(report: &EvalReport) -> String {
    let header = format!("  {:<TASK_W$}{:>COL_W$}{:>COL_W$}\n", "task", "bool", "mcq");
    let mut out = format!(
        "records: {}  answered: {}  errors: {}  extraction failures: {}\n\n",
        report.answered + report.errored,
        report.answered,
        report.errored,
        report.extraction_failures,
    );
    out.push_str("accuracy by task (percent over answered)\n");
    out.push_str(&header);
    for task in TaskKind::ALL {
        if !QType::ALL
            .iter()
            .any(|&q| report.task_cells.contains_key(&(task, q)))
        {
            continue;
        }
        out.push_str(&grid_row(task.key(), |q| {
            report.task_cells.get(&(task, q)).and_then(Tally::accuracy)
        }));
        out.push('\n');
    }
    out.push_str(&grid_row("mean", |q| {
        report.mean_across_tasks.get(&q).copied()
    }));
    out.push('\n');

    let domains: Vec<&String> = {
        let mut d: Vec<&String> = report.domain_cells.keys().map(|(_, _, dom)| dom).collect();
        d.sort();
        d.dedup();
        d
    };
    for dom in domains {
        out.push_str(&format!("\ndomain: {dom}\n"));
        out.push_str(&header);
        for task in TaskKind::ALL {
            if !QType::ALL.iter().any(|&q| {
                report
                    .domain_cells
                    .contains_key(&(task, q, dom.clone()))
            }) {
                continue;
            }
            out.push_str(&grid_row(task.key(), |q| {
                report
                    .domain_cells
                    .get(&(task, q, dom.clone()))
                    .and_then(Tally::accuracy)
            }));
            out.push('\n');
        }
    }
    out
}

/// CSV report: per-domain cells, pooled per-task rows, and the mean rows.
pub fn render_csv(report: &EvalReport) -> String {
    let mut out =
        String::from("section,task,qtype,domain,n,errors,extraction_failures,correct,accuracy\n");
    for ((task, qtype, dom), tally) in &report.domain_cells {
        out.push_str(&format!(
            "cell,{},{},{},{},{},{},{},{}\n",
            task.key(),
            qtype.key(),
            dom,
            tally.n,
            tally.errors,
            tally.extraction_failures,
            tally.correct,
            cell_text(tally.accuracy()),
        ));
    }
    for ((task, qtype), tally) in &report.task_cells {
        out.push_str(&format!(
            "task,{},{},all,{},{},{},{},{}\n",
            task.key(),
            qtype.key(),
            tally.n,
            tally.errors,
            tally.extraction_failures,
            tally.correct,
            cell_text(tally.accuracy()),
        ));
    }
    for (qtype, mean) in &report.mean_across_tasks {
        out.push_str(&format!("mean,all,{},all,,,,,{mean:.2}\n", qtype.key()));
    }
    out
}
