//! Applicability questions: is an action applicable in the shown state, and
//! which of four actions is the applicable one.

use super::*;
use crate::render::render_action;
use crate::seed::rng;
use rand::seq::SliceRandom;
use rand::Rng;

pub(super) fn generate(
    ctx: &GenCtx,
    b: &StateBundle,
    qtype: QType,
    seed: u64,
) -> Vec<QuestionRecord> {
    match qtype {
        QType::Bool => gen_bool(ctx, b, seed),
        QType::Mcq => gen_mcq(ctx, b, seed),
    }
}

/// Actions not applicable in the bundle state, in action-id order.
fn inapplicable(ctx: &GenCtx, b: &StateBundle) -> Vec<ActionId> {
    let apps: HashSet<ActionId> = b.applicable.iter().copied().collect();
    (0..ctx.task.num_actions())
        .map(|i| ActionId(i as u32))
        .filter(|a| !apps.contains(a))
        .collect()
}

fn gen_bool(ctx: &GenCtx, b: &StateBundle, seed: u64) -> Vec<QuestionRecord> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    if let Some(&a) = b.applicable.as_slice().choose(&mut r) {
        out.push(applicability_bool_record(ctx, b, a, seed));
    }
    if let Some(&a) = inapplicable(ctx, b).as_slice().choose(&mut r) {
        out.push(applicability_bool_record(ctx, b, a, seed));
    }
    out
}

/// The boolean applicability record for one concrete action; public because
/// golden tests pin specific state/action combinations.
pub fn applicability_bool_record(
    ctx: &GenCtx,
    b: &StateBundle,
    a: ActionId,
    seed: u64,
) -> QuestionRecord {
    let applicable = crate::transition::is_applicable(ctx.task, &b.s, a);
    let action_nl = render_action(ctx.task, ctx.tpl, a);
    let pre = dynamic_pre(ctx.task, a);
    let rationale = if pre.is_empty() {
        format!(
            "Step 1: The action {action_nl} has no facts that must hold in this state.\nSo, the action is applicable."
        )
    } else {
        format!(
            "Step 1: In order to apply the action {action_nl}, the following fact(s) must hold in this state: {}.\nStep 2: These facts {} in the mentioned state.\nSo, the action is {}.",
            fact_list(ctx.task, ctx.tpl, &pre),
            if applicable { "hold" } else { "do not hold" },
            if applicable { "applicable" } else { "not applicable" },
        )
    };
    let provenance = Provenance::AppBool {
        state: state_atom_texts(ctx.task, &b.s),
        action: ctx.task.action_text(a),
        applicable,
    };
    make_record(
        ctx,
        TaskKind::Applicability,
        QType::Bool,
        context_for(ctx, &b.s, TaskKind::Applicability),
        stem_app_bool(&action_nl),
        Vec::new(),
        yn(applicable).to_string(),
        rationale,
        provenance,
        seed,
    )
}

fn gen_mcq(ctx: &GenCtx, b: &StateBundle, seed: u64) -> Vec<QuestionRecord> {
    let mut r = rng(seed);
    let Some(&gold_action) = b.applicable.as_slice().choose(&mut r) else {
        return Vec::new();
    };
    let mut wrong = inapplicable(ctx, b);
    if wrong.len() < 3 {
        return Vec::new();
    }
    wrong.shuffle(&mut r);
    wrong.truncate(3);

    // gold position drawn uniformly, then distractors fill the rest
    let gold_idx = r.gen_range(0..4usize);
    let mut actions: Vec<ActionId> = Vec::with_capacity(4);
    let mut wi = wrong.into_iter();
    for i in 0..4 {
        if i == gold_idx {
            actions.push(gold_action);
        } else {
            actions.push(wi.next().unwrap());
        }
    }

    let options: Vec<String> = actions
        .iter()
        .map(|&a| option_text(&render_action(ctx.task, ctx.tpl, a)))
        .collect();

    let mut steps = Vec::new();
    for (i, &a) in actions.iter().enumerate() {
        let pre = dynamic_pre(ctx.task, a);
        let holds = crate::transition::is_applicable(ctx.task, &b.s, a);
        steps.push(format!(
            "Step {}: In order to apply option {}, {}, the following fact(s) must hold in this state: {}. These facts {} in the mentioned state.",
            i + 1,
            LETTERS[i],
            render_action(ctx.task, ctx.tpl, a),
            fact_list(ctx.task, ctx.tpl, &pre),
            if holds { "hold" } else { "do not hold" },
        ));
    }
    steps.push(format!("So, the applicable action is option {}.", LETTERS[gold_idx]));
    let rationale = steps.join("\n");

    let provenance = Provenance::AppMcq {
        state: state_atom_texts(ctx.task, &b.s),
        actions: action_syms(ctx.task, &actions),
        gold: gold_idx,
    };
    vec![make_record(
        ctx,
        TaskKind::Applicability,
        QType::Mcq,
        context_for(ctx, &b.s, TaskKind::Applicability),
        STEM_APP_MCQ.to_string(),
        options,
        LETTERS[gold_idx].to_string(),
        rationale,
        provenance,
        seed,
    )]
}
