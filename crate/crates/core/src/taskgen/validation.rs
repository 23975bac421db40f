//! Validation questions about candidate action sequences: valid (every step
//! names a real action), applicable (every step executes in turn), and plan
//! (applicable and the final state satisfies the goal).
//!
//! Starting from a found plan, the generator manufactures one sequence per
//! verdict class: the plan itself, an applicable suffix detour that misses
//! the goal, a truncated sequence ending in an inapplicable action, and a
//! sequence with one step corrupted into a non-action. Every sequence is
//! re-run through the semantics before a record is built.

use super::*;
use crate::render::{render_action, render_corrupt_action};
use crate::sample::random_walk;
use crate::seed::{child_seed_idx, rng};
use crate::transition::{apply_sequence, is_goal, SeqStep, SequenceVerdict};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

pub(super) fn generate(
    ctx: &GenCtx,
    b: &StateBundle,
    qtype: QType,
    seed: u64,
) -> Vec<QuestionRecord> {
    let Some(plan) = b.plans.first() else {
        return Vec::new();
    };
    if plan.actions.is_empty() {
        return Vec::new();
    }
    match qtype {
        QType::Bool => gen_bool(ctx, b, plan, seed),
        QType::Mcq => gen_mcq(ctx, b, plan, seed),
    }
}

fn steps_of(plan: &Plan) -> Vec<SeqStep> {
    plan.actions.iter().map(|&a| SeqStep::Action(a)).collect()
}

/// Applicable but not goal-reaching: keep a seeded prefix of the plan, then
/// wander off with a walk truncated before it stumbles into the goal.
fn seq_not_goal(
    ctx: &GenCtx,
    b: &StateBundle,
    plan: &Plan,
    r: &mut ChaCha8Rng,
    seed: u64,
) -> Option<Vec<SeqStep>> {
    for attempt in 0..8u64 {
        let cut = r.gen_range(0..plan.actions.len());
        let walk = random_walk(
            ctx.task,
            &plan.trace[cut],
            1 + r.gen_range(0..4usize),
            child_seed_idx(child_seed(seed, "detour"), attempt),
        );
        // trim the walk before its first goal state (position 0 is pre-walk)
        let mut keep = walk.actions.len();
        for (i, st) in walk.trace.iter().enumerate().skip(1) {
            if is_goal(ctx.task, st) {
                keep = i - 1;
                break;
            }
        }
        let mut actions: Vec<ActionId> = plan.actions[..cut].to_vec();
        actions.extend_from_slice(&walk.actions[..keep]);
        if actions.is_empty() {
            continue;
        }
        let steps: Vec<SeqStep> = actions.into_iter().map(SeqStep::Action).collect();
        let out = apply_sequence(ctx.task, &b.s, &steps);
        if out.verdict.applicable && !out.verdict.goal_reaching {
            return Some(steps);
        }
    }
    // fallback: the plan minus its last action, when that leaves the goal
    // unsatisfied
    let len = plan.actions.len();
    if len >= 2 && !is_goal(ctx.task, &plan.trace[len - 1]) {
        return Some(
            plan.actions[..len - 1]
                .iter()
                .map(|&a| SeqStep::Action(a))
                .collect(),
        );
    }
    None
}

/// Valid but not applicable: scanning from the end, replace a step with a
/// real action that fails there, truncating the rest.
fn seq_not_applicable(
    ctx: &GenCtx,
    plan: &Plan,
    r: &mut ChaCha8Rng,
) -> Option<Vec<SeqStep>> {
    let task = ctx.task;
    let mut positions: Vec<usize> = (0..plan.actions.len()).collect();
    positions.reverse();
    for i in positions {
        let here = &plan.trace[i];
        let mut candidates: Vec<ActionId> = (0..task.num_actions())
            .map(|k| ActionId(k as u32))
            .filter(|&a| !crate::transition::is_applicable(task, here, a))
            .collect();
        if candidates.is_empty() {
            continue;
        }
        let pick = candidates.remove(r.gen_range(0..candidates.len()));
        let mut steps: Vec<SeqStep> = plan.actions[..i]
            .iter()
            .map(|&a| SeqStep::Action(a))
            .collect();
        steps.push(SeqStep::Action(pick));
        return Some(steps);
    }
    None
}

/// Not valid: one step replaced by a corrupt rendering of itself.
fn seq_not_valid(ctx: &GenCtx, plan: &Plan, r: &mut ChaCha8Rng) -> Option<Vec<SeqStep>> {
    let i = r.gen_range(0..plan.actions.len());
    let a = plan.actions[i];
    let schema = &ctx.task.schema_names[ctx.task.action(a).schema];
    let n = ctx.tpl.corrupt_count(schema);
    if n == 0 {
        return None;
    }
    let text = render_corrupt_action(ctx.task, ctx.tpl, a, r.gen_range(0..n));
    let mut steps = steps_of(plan);
    steps[i] = SeqStep::Unresolved(text);
    Some(steps)
}

fn step_nl(ctx: &GenCtx, step: &SeqStep) -> String {
    match step {
        SeqStep::Action(a) => render_action(ctx.task, ctx.tpl, *a),
        SeqStep::Unresolved(text) => text.clone(),
    }
}

fn seq_nl(ctx: &GenCtx, steps: &[SeqStep]) -> String {
    let parts: Vec<String> = steps.iter().map(|s| step_nl(ctx, s)).collect();
    parts.join(", ")
}

fn step_syms(ctx: &GenCtx, steps: &[SeqStep]) -> Vec<String> {
    steps
        .iter()
        .map(|s| match s {
            SeqStep::Action(a) => ctx.task.action_text(*a),
            SeqStep::Unresolved(text) => text.clone(),
        })
        .collect()
}

fn case_of(verdict: &SequenceVerdict) -> ValCase {
    if !verdict.valid {
        ValCase::NotValid
    } else if !verdict.applicable {
        ValCase::NotApplicable
    } else if !verdict.goal_reaching {
        ValCase::NotGoal
    } else {
        ValCase::Plan
    }
}

/// Narrates the walk through the sequence up to its failure point.
fn walk_rationale(ctx: &GenCtx, b: &StateBundle, steps: &[SeqStep]) -> Vec<String> {
    let task = ctx.task;
    let out = apply_sequence(task, &b.s, steps);
    let mut lines = Vec::new();
    let mut k = 0;
    for (i, step) in steps.iter().enumerate() {
        if Some(i) == out.verdict.failure_index {
            match step {
                SeqStep::Unresolved(text) => lines.push(format!(
                    "Step {}: Step {} of the sequence, \"{text}\", does not name any action of this domain, so the sequence is not valid.",
                    k + 1,
                    i + 1,
                )),
                SeqStep::Action(a) => {
                    let missing: Vec<AtomId> = dynamic_pre(task, *a)
                        .into_iter()
                        .filter(|&p| !out.trace[i].contains(p))
                        .collect();
                    lines.push(format!(
                        "Step {}: Action {} of the sequence, {}, is not applicable at that point: the required fact(s) {} do not hold.",
                        k + 1,
                        i + 1,
                        render_action(task, ctx.tpl, *a),
                        fact_list(task, ctx.tpl, &missing),
                    ));
                }
            }
            return lines;
        }
        let SeqStep::Action(a) = step else {
            unreachable!("unresolved step is always the failure index");
        };
        lines.push(format!(
            "Step {}: Action {} of the sequence, {}, is applicable.",
            k + 1,
            i + 1,
            render_action(task, ctx.tpl, *a),
        ));
        k += 1;
    }
    let final_state = out.final_state.expect("no failure index");
    lines.push(format!(
        "Step {}: After the last action, the goal {} satisfied.",
        k + 1,
        if is_goal(task, &final_state) {
            "is"
        } else {
            "is not"
        },
    ));
    lines
}

fn bool_conclusion(ask: ValAsk, expected: bool) -> String {
    let what = match ask {
        ValAsk::Valid => "valid for the current state",
        ValAsk::Applicable => "applicable in the current state",
        ValAsk::Plan => "a plan for the current state",
    };
    format!(
        "So, {}, the sequence is {}{}.",
        yn(expected),
        if expected { "" } else { "not " },
        what
    )
}

/// Rationale for a boolean ask. Validity asks only discuss name resolution;
/// the other asks walk the semantics.
fn bool_rationale(ctx: &GenCtx, b: &StateBundle, steps: &[SeqStep], ask: ValAsk, expected: bool) -> String {
    let mut lines = match ask {
        ValAsk::Valid => match steps.iter().position(|s| matches!(s, SeqStep::Unresolved(_))) {
            None => vec![
                "Step 1: Every step of the sequence names a real action of this domain.".to_string(),
            ],
            Some(i) => {
                let SeqStep::Unresolved(text) = &steps[i] else {
                    unreachable!()
                };
                vec![format!(
                    "Step 1: Step {} of the sequence, \"{text}\", does not name any action of this domain.",
                    i + 1,
                )]
            }
        },
        ValAsk::Applicable | ValAsk::Plan => walk_rationale(ctx, b, steps),
    };
    lines.push(bool_conclusion(ask, expected));
    lines.join("\n")
}

fn gen_bool(ctx: &GenCtx, b: &StateBundle, plan: &Plan, seed: u64) -> Vec<QuestionRecord> {
    let mut r = rng(seed);
    let plan_steps = steps_of(plan);
    let invalid = seq_not_valid(ctx, plan, &mut r);
    let inapplicable = seq_not_applicable(ctx, plan, &mut r);
    let detour = seq_not_goal(ctx, b, plan, &mut r, seed);

    let mut asks: Vec<(ValAsk, bool, Vec<SeqStep>)> = Vec::new();
    // valid yes: prefer a non-plan so validity is not entailed by plan-ness
    asks.push((
        ValAsk::Valid,
        true,
        inapplicable.clone().unwrap_or_else(|| plan_steps.clone()),
    ));
    if let Some(s) = invalid.clone() {
        asks.push((ValAsk::Valid, false, s));
    }
    asks.push((
        ValAsk::Applicable,
        true,
        detour.clone().unwrap_or_else(|| plan_steps.clone()),
    ));
    if let Some(s) = inapplicable.clone() {
        asks.push((ValAsk::Applicable, false, s));
    }
    asks.push((ValAsk::Plan, true, plan_steps));
    let non_plan = [detour, inapplicable, invalid];
    let non_plan: Vec<&Vec<SeqStep>> = non_plan.iter().flatten().collect();
    if let Some(&s) = non_plan.as_slice().choose(&mut r) {
        asks.push((ValAsk::Plan, false, s.clone()));
    }

    let mut out = Vec::new();
    for (ask, expected, steps) in asks {
        let verdict = apply_sequence(ctx.task, &b.s, &steps).verdict;
        let actual = match ask {
            ValAsk::Valid => verdict.valid,
            ValAsk::Applicable => verdict.applicable,
            ValAsk::Plan => verdict.goal_reaching,
        };
        debug_assert_eq!(actual, expected, "sequence construction broke its contract");
        if actual != expected {
            continue;
        }
        let provenance = Provenance::ValBool {
            state: state_atom_texts(ctx.task, &b.s),
            steps: step_syms(ctx, &steps),
            ask,
            expected,
        };
        out.push(make_record(
            ctx,
            TaskKind::Validation,
            QType::Bool,
            context_for(ctx, &b.s, TaskKind::Validation),
            stem_val_bool(ask, &seq_nl(ctx, &steps)),
            Vec::new(),
            yn(expected).to_string(),
            bool_rationale(ctx, b, &steps, ask, expected),
            provenance,
            seed,
        ));
    }
    out
}

fn gen_mcq(ctx: &GenCtx, b: &StateBundle, plan: &Plan, seed: u64) -> Vec<QuestionRecord> {
    let mut r = rng(seed);
    let mut cases: Vec<(ValCase, Vec<SeqStep>)> = vec![(ValCase::Plan, steps_of(plan))];
    if let Some(s) = seq_not_goal(ctx, b, plan, &mut r, seed) {
        cases.push((ValCase::NotGoal, s));
    }
    if let Some(s) = seq_not_applicable(ctx, plan, &mut r) {
        cases.push((ValCase::NotApplicable, s));
    }
    if let Some(s) = seq_not_valid(ctx, plan, &mut r) {
        cases.push((ValCase::NotValid, s));
    }

    let mut out = Vec::new();
    for (case, steps) in cases {
        let verdict = apply_sequence(ctx.task, &b.s, &steps).verdict;
        debug_assert_eq!(case_of(&verdict), case, "sequence construction broke its contract");
        if case_of(&verdict) != case {
            continue;
        }
        // the four claims in shuffled order; exactly one is true
        let mut claims = [
            ValCase::NotValid,
            ValCase::NotApplicable,
            ValCase::NotGoal,
            ValCase::Plan,
        ];
        claims.shuffle(&mut r);
        let gold_idx = claims.iter().position(|&c| c == case).expect("present");
        let options: Vec<String> = claims.iter().map(|c| c.claim().to_string()).collect();

        let mut lines = walk_rationale(ctx, b, &steps);
        lines.push(format!(
            "So, the correct option is {}: {}",
            LETTERS[gold_idx],
            case.claim(),
        ));
        let provenance = Provenance::ValMcq {
            state: state_atom_texts(ctx.task, &b.s),
            steps: step_syms(ctx, &steps),
            case,
            gold: gold_idx,
        };
        out.push(make_record(
            ctx,
            TaskKind::Validation,
            QType::Mcq,
            context_for(ctx, &b.s, TaskKind::Validation),
            stem_val_mcq(&seq_nl(ctx, &steps)),
            options,
            LETTERS[gold_idx].to_string(),
            lines.join("\n"),
            provenance,
            seed,
        ));
    }
    out
}
