//! Justification questions: can an action, or a pair of consecutive actions,
//! be removed from a plan such that what remains is still a plan.
//!
//! Questions are posed only about actions whose rendered text occurs exactly
//! once in the plan (pairs: whose adjacent text pair occurs exactly once),
//! so the question picks out an unambiguous position.

use super::*;
use crate::analysis::justify::{justification_check, truncate_after_goal, Removal};
use crate::render::{render_action, render_plan};
use crate::seed::rng;
use crate::transition::{apply_sequence, progress, SeqStep};
use rand::seq::SliceRandom;
use rand::Rng;

pub(super) fn generate(
    ctx: &GenCtx,
    b: &StateBundle,
    qtype: QType,
    seed: u64,
) -> Vec<QuestionRecord> {
    let mut r = rng(seed);
    let Some(plan) = question_plan(ctx, b, &mut r) else {
        return Vec::new();
    };
    if plan.actions.len() < 2 {
        return Vec::new();
    }
    match qtype {
        QType::Bool => gen_bool(ctx, b, &plan, &mut r, seed),
        QType::Mcq => gen_mcq(ctx, b, &plan, &mut r, seed),
    }
}

/// The plan the questions are posed about. Sampled plans are often optimal
/// and carry nothing removable, so when the longest one has no removable
/// adjacent pair, a seeded do-undo detour is spliced in: two actions that
/// leave the state where they found it, hence removable by construction.
fn question_plan(ctx: &GenCtx, b: &StateBundle, r: &mut impl Rng) -> Option<Plan> {
    let task = ctx.task;
    let base = b.plans.iter().max_by_key(|p| p.actions.len())?;
    let base = truncate_after_goal(task, base);
    if base.actions.is_empty() {
        return None;
    }
    let has_removable = unique_pairs(&base)
        .iter()
        .any(|&i| justification_check(task, &base, Removal::Pair(i)));
    if has_removable {
        return Some(base);
    }
    let mut candidates: Vec<(usize, ActionId, ActionId)> = Vec::new();
    for (i, here) in base.trace.iter().enumerate() {
        for a in applicable_actions(task, here) {
            let Ok(there) = progress(task, here, a) else {
                continue;
            };
            for back in applicable_actions(task, &there) {
                if progress(task, &there, back).is_ok_and(|s2| s2.bits() == here.bits()) {
                    candidates.push((i, a, back));
                }
            }
        }
    }
    candidates.shuffle(r);
    for (i, a, back) in candidates {
        let mut actions = base.actions.clone();
        actions.insert(i, back);
        actions.insert(i, a);
        let Some(plan) = Plan::from_actions(task, &b.s, actions) else {
            continue;
        };
        if !plan.goal_reaching {
            continue;
        }
        if unique_pairs(&plan)
            .iter()
            .any(|&k| justification_check(task, &plan, Removal::Pair(k)))
        {
            return Some(plan);
        }
    }
    Some(base)
}

/// Positions whose action occurs exactly once in the plan.
fn unique_singles(plan: &Plan) -> Vec<usize> {
    (0..plan.actions.len())
        .filter(|&i| {
            plan.actions
                .iter()
                .filter(|&&a| a == plan.actions[i])
                .count()
                == 1
        })
        .collect()
}

/// Positions whose adjacent action pair occurs exactly once.
fn unique_pairs(plan: &Plan) -> Vec<usize> {
    let n = plan.actions.len();
    (0..n.saturating_sub(1))
        .filter(|&i| {
            (0..n - 1)
                .filter(|&j| {
                    plan.actions[j] == plan.actions[i] && plan.actions[j + 1] == plan.actions[i + 1]
                })
                .count()
                == 1
        })
        .collect()
}

fn removal_of(spec: RemovalSpec) -> Removal {
    match spec {
        RemovalSpec::Single { index } => Removal::Single(index),
        RemovalSpec::Pair { index } => Removal::Pair(index),
    }
}

/// The plan with the removal applied.
fn reduced(plan: &Plan, spec: RemovalSpec) -> Vec<ActionId> {
    let mut actions = plan.actions.clone();
    match spec {
        RemovalSpec::Single { index } => {
            actions.remove(index);
        }
        RemovalSpec::Pair { index } => {
            actions.remove(index);
            actions.remove(index);
        }
    }
    actions
}

fn removal_rationale(
    ctx: &GenCtx,
    b: &StateBundle,
    plan: &Plan,
    spec: RemovalSpec,
    removable: bool,
) -> String {
    let task = ctx.task;
    let what = match spec {
        RemovalSpec::Single { index } => format!(
            "action {} (\"{}\")",
            index + 1,
            render_action(task, ctx.tpl, plan.actions[index])
        ),
        RemovalSpec::Pair { index } => format!(
            "actions {} and {} (\"{}\" and \"{}\")",
            index + 1,
            index + 2,
            render_action(task, ctx.tpl, plan.actions[index]),
            render_action(task, ctx.tpl, plan.actions[index + 1]),
        ),
    };
    let rest = reduced(plan, spec);
    let rest_nl = if rest.is_empty() {
        "an empty sequence".to_string()
    } else {
        render_plan(task, ctx.tpl, &rest)
    };
    let steps: Vec<SeqStep> = rest.iter().map(|&a| SeqStep::Action(a)).collect();
    let verdict = apply_sequence(task, &b.s, &steps).verdict;
    let outcome = if removable {
        "Step 2: Every remaining action is applicable in turn and the final state satisfies the goal.\nSo, yes, the removal leaves a valid plan.".to_string()
    } else if let Some(i) = verdict.failure_index.filter(|&i| i < rest.len()) {
        format!(
            "Step 2: The remaining sequence fails: action {} (\"{}\") is no longer applicable at its position.\nSo, no, the removal does not leave a valid plan.",
            i + 1,
            render_action(task, ctx.tpl, rest[i]),
        )
    } else {
        "Step 2: The remaining sequence still executes, but its final state does not satisfy the goal.\nSo, no, the removal does not leave a valid plan.".to_string()
    };
    format!("Step 1: Removing {what} from the plan leaves: {rest_nl}.\n{outcome}")
}

fn bool_record(
    ctx: &GenCtx,
    b: &StateBundle,
    plan: &Plan,
    spec: RemovalSpec,
    seed: u64,
) -> QuestionRecord {
    let removable = justification_check(ctx.task, plan, removal_of(spec));
    let plan_nl = render_plan(ctx.task, ctx.tpl, &plan.actions);
    let question = match spec {
        RemovalSpec::Single { index } => stem_just_bool_single(
            &plan_nl,
            &render_action(ctx.task, ctx.tpl, plan.actions[index]),
        ),
        RemovalSpec::Pair { index } => stem_just_bool_pair(
            &plan_nl,
            &render_action(ctx.task, ctx.tpl, plan.actions[index]),
            &render_action(ctx.task, ctx.tpl, plan.actions[index + 1]),
        ),
    };
    let provenance = Provenance::JustBool {
        state: state_atom_texts(ctx.task, &b.s),
        plan: action_syms(ctx.task, &plan.actions),
        removal: spec,
        removable,
    };
    make_record(
        ctx,
        TaskKind::Justification,
        QType::Bool,
        context_for(ctx, &b.s, TaskKind::Justification),
        question,
        Vec::new(),
        yn(removable).to_string(),
        removal_rationale(ctx, b, plan, spec, removable),
        provenance,
        seed,
    )
}

fn gen_bool(
    ctx: &GenCtx,
    b: &StateBundle,
    plan: &Plan,
    r: &mut impl Rng,
    seed: u64,
) -> Vec<QuestionRecord> {
    let singles = unique_singles(plan);
    let pairs = unique_pairs(plan);
    let mut specs: Vec<RemovalSpec> = Vec::new();
    specs.extend(singles.iter().map(|&i| RemovalSpec::Single { index: i }));
    specs.extend(pairs.iter().map(|&i| RemovalSpec::Pair { index: i }));
    let (mut removable, mut fixed): (Vec<RemovalSpec>, Vec<RemovalSpec>) = specs
        .into_iter()
        .partition(|&s| justification_check(ctx.task, plan, removal_of(s)));
    removable.shuffle(r);
    fixed.shuffle(r);
    // alternate single/pair flavors across seeds when both are on offer
    let prefer_pair = r.gen_bool(0.5);
    let prefer = |pool: &mut Vec<RemovalSpec>| {
        pool.sort_by_key(|s| {
            let is_pair = matches!(s, RemovalSpec::Pair { .. });
            is_pair != prefer_pair
        });
    };
    prefer(&mut removable);
    prefer(&mut fixed);

    let mut out = Vec::new();
    if let Some(&spec) = removable.first() {
        out.push(bool_record(ctx, b, plan, spec, seed));
    }
    if let Some(&spec) = fixed.first() {
        out.push(bool_record(ctx, b, plan, spec, seed));
    }
    out
}

fn gen_mcq(
    ctx: &GenCtx,
    b: &StateBundle,
    plan: &Plan,
    r: &mut impl Rng,
    seed: u64,
) -> Vec<QuestionRecord> {
    let task = ctx.task;
    let pairs = unique_pairs(plan);
    let (removable, fixed): (Vec<usize>, Vec<usize>) = pairs
        .into_iter()
        .partition(|&i| justification_check(task, plan, Removal::Pair(i)));
    let Some(&gold_at) = removable.as_slice().choose(r) else {
        return Vec::new();
    };

    let pair_spec = |i: usize| PairSpec {
        first: task.action_text(plan.actions[i]),
        second: task.action_text(plan.actions[i + 1]),
        index: Some(i),
    };
    let pair_text = |spec: &PairSpec| {
        let a = task.action_from_text(&spec.first).expect("plan action");
        let b = task.action_from_text(&spec.second).expect("plan action");
        option_text(&format!(
            "{} and {}",
            render_action(task, ctx.tpl, a),
            render_action(task, ctx.tpl, b),
        ))
    };

    let gold_spec = pair_spec(gold_at);
    let mut texts: HashSet<String> = HashSet::new();
    texts.insert(pair_text(&gold_spec));
    let mut distractors: Vec<PairSpec> = Vec::new();

    let mut fixed = fixed;
    fixed.shuffle(r);
    for i in fixed {
        let spec = pair_spec(i);
        if texts.insert(pair_text(&spec)) {
            distractors.push(spec);
            if distractors.len() == 3 {
                break;
            }
        }
    }
    if distractors.len() < 3 {
        // fill with non-adjacent pairs: plan actions that never appear
        // consecutively in this order
        let n = plan.actions.len();
        let mut combos: Vec<(usize, usize)> = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter(|&(i, j)| i != j)
            .collect();
        combos.shuffle(r);
        for (i, j) in combos {
            if distractors.len() == 3 {
                break;
            }
            let adjacent_somewhere = (0..n - 1).any(|k| {
                plan.actions[k] == plan.actions[i] && plan.actions[k + 1] == plan.actions[j]
            });
            if adjacent_somewhere {
                continue;
            }
            let spec = PairSpec {
                first: task.action_text(plan.actions[i]),
                second: task.action_text(plan.actions[j]),
                index: None,
            };
            if texts.insert(pair_text(&spec)) {
                distractors.push(spec);
            }
        }
    }
    if distractors.len() < 3 {
        return Vec::new();
    }

    let gold_idx = r.gen_range(0..4usize);
    distractors.shuffle(r);
    let mut specs = distractors;
    specs.insert(gold_idx, gold_spec);

    let options: Vec<String> = specs.iter().map(&pair_text).collect();
    let mut lines = Vec::new();
    for (k, spec) in specs.iter().enumerate() {
        let head = format!("Step {}: Option {}", k + 1, LETTERS[k]);
        match spec.index {
            None => lines.push(format!(
                "{head}: these two actions do not occur consecutively in the plan."
            )),
            Some(i) if k == gold_idx => {
                let rest = reduced(plan, RemovalSpec::Pair { index: i });
                let rest_nl = if rest.is_empty() {
                    "an empty sequence".to_string()
                } else {
                    render_plan(task, ctx.tpl, &rest)
                };
                lines.push(format!(
                    "{head}: removing them leaves {rest_nl}, which still executes and reaches the goal."
                ));
            }
            Some(i) => {
                let rest = reduced(plan, RemovalSpec::Pair { index: i });
                let steps: Vec<SeqStep> = rest.iter().map(|&a| SeqStep::Action(a)).collect();
                let verdict = apply_sequence(task, &b.s, &steps).verdict;
                let why = if let Some(f) = verdict.failure_index.filter(|&f| f < rest.len()) {
                    format!(
                        "\"{}\" is no longer applicable at its position",
                        render_action(task, ctx.tpl, rest[f])
                    )
                } else {
                    "the final state no longer satisfies the goal".to_string()
                };
                lines.push(format!("{head}: removing them fails, because {why}."));
            }
        }
    }
    lines.push(format!("So, the correct option is {}.", LETTERS[gold_idx]));

    let provenance = Provenance::JustMcq {
        state: state_atom_texts(task, &b.s),
        plan: action_syms(task, &plan.actions),
        pairs: specs,
        gold: gold_idx,
    };
    vec![make_record(
        ctx,
        TaskKind::Justification,
        QType::Mcq,
        context_for(ctx, &b.s, TaskKind::Justification),
        stem_just_mcq(&render_plan(task, ctx.tpl, &plan.actions)),
        options,
        LETTERS[gold_idx].to_string(),
        lines.join("\n"),
        provenance,
        seed,
    )]
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    /// Bundles whose plan pool includes a redundant detour, so removable
    /// actions exist.
    fn detour_bundle(fx: &Fixture) -> StateBundle {
        StateBundle::compute(&fx.task, crate::transition::State::initial(&fx.task), 11, 8, 500_000)
    }

    #[test]
    fn bool_answers_match_justification_check() {
        let fx = Fixture::new("ferry", "p01");
        let ctx = fx.ctx();
        let b = detour_bundle(&fx);
        let mut saw_yes = false;
        let mut saw_no = false;
        for seed in 0..10 {
            for rec in generate(&ctx, &b, QType::Bool, seed) {
                let Provenance::JustBool { plan, removal, removable, .. } = &rec.provenance
                else {
                    panic!("wrong provenance");
                };
                let actions: Vec<ActionId> = plan
                    .iter()
                    .map(|s| fx.task.action_from_text(s).unwrap())
                    .collect();
                let p = Plan::from_actions(&fx.task, &b.s, actions).unwrap();
                assert!(p.goal_reaching);
                let again = justification_check(&fx.task, &p, removal_of(*removal));
                assert_eq!(again, *removable);
                assert_eq!(rec.gold, yn(*removable));
                saw_yes |= *removable;
                saw_no |= !*removable;
            }
        }
        assert!(saw_yes, "no removable questions generated");
        assert!(saw_no, "no non-removable questions generated");
    }

    #[test]
    fn questions_reference_unambiguous_actions() {
        let fx = Fixture::new("gripper", "p02");
        let ctx = fx.ctx();
        let b = detour_bundle(&fx);
        for seed in 0..6 {
            for rec in generate(&ctx, &b, QType::Bool, seed) {
                let Provenance::JustBool { plan, removal, .. } = &rec.provenance else {
                    panic!()
                };
                match removal {
                    RemovalSpec::Single { index } => {
                        let target = &plan[*index];
                        assert_eq!(plan.iter().filter(|s| s == &target).count(), 1);
                    }
                    RemovalSpec::Pair { index } => {
                        let (a, b2) = (&plan[*index], &plan[*index + 1]);
                        let occurrences = (0..plan.len() - 1)
                            .filter(|&k| &plan[k] == a && &plan[k + 1] == b2)
                            .count();
                        assert_eq!(occurrences, 1);
                    }
                }
            }
        }
    }

    #[test]
    fn mcq_gold_is_the_only_removable_adjacent_pair() {
        let fx = Fixture::new("ferry", "p02");
        let ctx = fx.ctx();
        let b = detour_bundle(&fx);
        let mut produced = 0;
        for seed in 0..20 {
            for rec in generate(&ctx, &b, QType::Mcq, seed) {
                produced += 1;
                let Provenance::JustMcq { plan, pairs, gold, .. } = &rec.provenance else {
                    panic!()
                };
                let actions: Vec<ActionId> = plan
                    .iter()
                    .map(|s| fx.task.action_from_text(s).unwrap())
                    .collect();
                let p = Plan::from_actions(&fx.task, &b.s, actions).unwrap();
                for (k, spec) in pairs.iter().enumerate() {
                    match spec.index {
                        Some(i) => {
                            let ok = justification_check(&fx.task, &p, Removal::Pair(i));
                            assert_eq!(ok, k == *gold, "option {k}");
                        }
                        None => assert_ne!(k, *gold),
                    }
                }
            }
        }
        assert!(produced > 0, "no MCQ produced; plans lack removable pairs");
    }
}
