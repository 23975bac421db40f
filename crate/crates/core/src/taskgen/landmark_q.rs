//! Landmark questions: must a given fact hold at some point along every plan
//! from the current state.
//!
//! Positives come from the backchaining analysis, so each carries a support
//! chain ending in a goal atom. Negatives are facts some sampled goal-reaching
//! plan never makes true; that plan is the witness.

use super::*;
use crate::analysis::landmarks::{landmark_negatives, LandmarkSet};
use crate::render::{render_fact, render_plan};
use crate::seed::rng;
use rand::seq::SliceRandom;
use rand::Rng;

pub(super) fn generate(
    ctx: &GenCtx,
    b: &StateBundle,
    qtype: QType,
    seed: u64,
) -> Vec<QuestionRecord> {
    let Some(lm) = b.landmarks.as_ref() else {
        return Vec::new();
    };
    if b.plans.is_empty() {
        return Vec::new();
    }
    let mut r = rng(seed);
    let askable = |p: &AtomId| {
        !ctx.task.is_static(*p) && !ctx.tpl.is_hidden(&ctx.task.pred_of(*p).name)
    };
    let positives: Vec<AtomId> = lm.atoms().into_iter().filter(|p| askable(p)).collect();
    let negatives: Vec<AtomId> = askable_dynamic(
        ctx.task,
        ctx.tpl,
        &landmark_negatives(ctx.task, &b.s, &b.plans),
    );
    if positives.is_empty() || negatives.is_empty() {
        return Vec::new();
    }
    match qtype {
        QType::Bool => gen_bool(ctx, b, lm, &positives, &negatives, &mut r, seed),
        QType::Mcq => gen_mcq(ctx, b, lm, &positives, &negatives, &mut r, seed),
    }
}

/// Support chain from `fact` to a goal atom, inclusive on both ends.
fn chain_of(lm: &LandmarkSet, fact: AtomId) -> Vec<AtomId> {
    let mut chain = vec![fact];
    let mut cur = fact;
    while let Some(&q) = lm.support.get(&cur) {
        chain.push(q);
        cur = q;
    }
    chain
}

fn positive_rationale(ctx: &GenCtx, lm: &LandmarkSet, fact: AtomId) -> String {
    let chain = chain_of(lm, fact);
    let nl = |p: AtomId| render_fact(ctx.task, ctx.tpl, p);
    if chain.len() == 1 {
        return format!(
            "Step 1: The fact \"{}\" is part of the goal and does not hold in the current state, so every plan must eventually make it true.\nSo, yes, the fact is a landmark.",
            nl(fact)
        );
    }
    let goal = *chain.last().expect("nonempty chain");
    let mut lines = vec![format!(
        "Step 1: Every plan must make \"{}\" true: it is part of the goal and does not hold in the current state.",
        nl(goal)
    )];
    // walk the chain from the goal back down to the asked fact
    for (k, w) in chain.windows(2).rev().enumerate() {
        lines.push(format!(
            "Step {}: To make \"{}\" true for the first time, \"{}\" must already hold.",
            k + 2,
            nl(w[1]),
            nl(w[0]),
        ));
    }
    lines.push("So, yes, the fact is a landmark.".to_string());
    lines.join("\n")
}

/// First sampled plan whose trace never contains `fact`.
fn witness_plan(plans: &[Plan], fact: AtomId) -> Option<&Plan> {
    plans
        .iter()
        .find(|p| p.trace.iter().all(|st| !st.bits().contains(fact.idx())))
}

fn gen_bool(
    ctx: &GenCtx,
    b: &StateBundle,
    lm: &LandmarkSet,
    positives: &[AtomId],
    negatives: &[AtomId],
    r: &mut impl Rng,
    seed: u64,
) -> Vec<QuestionRecord> {
    let mut out = Vec::new();
    if let Some(&fact) = positives.choose(r) {
        let provenance = Provenance::LandBool {
            state: state_atom_texts(ctx.task, &b.s),
            fact: ctx.task.atom_text(fact),
            is_landmark: true,
            witness: None,
        };
        out.push(make_record(
            ctx,
            TaskKind::Landmarks,
            QType::Bool,
            context_for(ctx, &b.s, TaskKind::Landmarks),
            stem_land_bool(&render_fact(ctx.task, ctx.tpl, fact)),
            Vec::new(),
            yn(true).to_string(),
            positive_rationale(ctx, lm, fact),
            provenance,
            seed,
        ));
    }
    if let Some(&fact) = negatives.choose(r) {
        let Some(plan) = witness_plan(&b.plans, fact) else {
            return out;
        };
        let rationale = format!(
            "Step 1: The following sequence of actions reaches the goal without ever making \"{}\" true: {}.\nStep 2: Since at least one plan never needs it, the fact does not have to hold along every plan.\nSo, no, the fact is not a landmark.",
            render_fact(ctx.task, ctx.tpl, fact),
            render_plan(ctx.task, ctx.tpl, &plan.actions),
        );
        let provenance = Provenance::LandBool {
            state: state_atom_texts(ctx.task, &b.s),
            fact: ctx.task.atom_text(fact),
            is_landmark: false,
            witness: Some(action_syms(ctx.task, &plan.actions)),
        };
        out.push(make_record(
            ctx,
            TaskKind::Landmarks,
            QType::Bool,
            context_for(ctx, &b.s, TaskKind::Landmarks),
            stem_land_bool(&render_fact(ctx.task, ctx.tpl, fact)),
            Vec::new(),
            yn(false).to_string(),
            rationale,
            provenance,
            seed,
        ));
    }
    out
}

fn gen_mcq(
    ctx: &GenCtx,
    b: &StateBundle,
    lm: &LandmarkSet,
    positives: &[AtomId],
    negatives: &[AtomId],
    r: &mut impl Rng,
    seed: u64,
) -> Vec<QuestionRecord> {
    let task = ctx.task;
    let Some(&gold_fact) = positives.choose(r) else {
        return Vec::new();
    };
    let gold_text = option_text(&render_fact(task, ctx.tpl, gold_fact));
    let mut texts: HashSet<String> = HashSet::new();
    texts.insert(gold_text.clone());

    let mut pool: Vec<AtomId> = negatives.to_vec();
    pool.shuffle(r);
    let mut picked: Vec<(AtomId, Vec<String>)> = Vec::new();
    for fact in pool {
        if picked.len() == 3 {
            break;
        }
        let Some(plan) = witness_plan(&b.plans, fact) else {
            continue;
        };
        let text = option_text(&render_fact(task, ctx.tpl, fact));
        if texts.insert(text) {
            picked.push((fact, action_syms(task, &plan.actions)));
        }
    }
    if picked.len() < 3 {
        return Vec::new();
    }

    let gold_idx = r.gen_range(0..4usize);
    let mut facts: Vec<AtomId> = picked.iter().map(|(f, _)| *f).collect();
    let mut witnesses: Vec<Option<Vec<String>>> =
        picked.into_iter().map(|(_, w)| Some(w)).collect();
    facts.insert(gold_idx, gold_fact);
    witnesses.insert(gold_idx, None);

    let options: Vec<String> = facts
        .iter()
        .map(|&f| option_text(&render_fact(task, ctx.tpl, f)))
        .collect();

    let mut lines = Vec::new();
    for (k, &fact) in facts.iter().enumerate() {
        let nl = render_fact(task, ctx.tpl, fact);
        if k == gold_idx {
            let chain = chain_of(lm, fact);
            let why = if chain.len() == 1 {
                "it is part of the goal and does not hold yet".to_string()
            } else {
                format!(
                    "it must hold before \"{}\" can first be achieved, and achieving that is unavoidable",
                    render_fact(task, ctx.tpl, chain[1])
                )
            };
            lines.push(format!(
                "Step {}: Option {}, \"{}\": every plan must make it true, because {}.",
                k + 1,
                LETTERS[k],
                nl,
                why,
            ));
        } else {
            lines.push(format!(
                "Step {}: Option {}, \"{}\": some plan reaches the goal without ever making it true.",
                k + 1,
                LETTERS[k],
                nl,
            ));
        }
    }
    lines.push(format!("So, the correct option is {}.", LETTERS[gold_idx]));

    let provenance = Provenance::LandMcq {
        state: state_atom_texts(task, &b.s),
        options: atom_syms(task, &facts),
        witnesses,
        gold: gold_idx,
    };
    vec![make_record(
        ctx,
        TaskKind::Landmarks,
        QType::Mcq,
        context_for(ctx, &b.s, TaskKind::Landmarks),
        STEM_LAND_MCQ.to_string(),
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
    use crate::analysis::landmarks::landmarks_rhw;

    #[test]
    fn bool_positive_rationale_chains_to_a_goal_atom() {
        let fx = Fixture::new("ferry", "p01");
        let ctx = fx.ctx();
        let b = fx.init_bundle();
        let lm = b.landmarks.as_ref().unwrap();
        for seed in 0..6 {
            for rec in generate(&ctx, &b, QType::Bool, seed) {
                let Provenance::LandBool { fact, is_landmark, witness, .. } = &rec.provenance
                else {
                    panic!()
                };
                let atom = fx.task.atom_from_text(fact).unwrap();
                if *is_landmark {
                    assert!(lm.contains(atom));
                    assert!(witness.is_none());
                    let chain = chain_of(lm, atom);
                    let last = *chain.last().unwrap();
                    assert!(fx.task.goal.contains(last.idx()), "chain must end at a goal atom");
                    assert_eq!(rec.gold, "yes");
                } else {
                    assert!(!lm.contains(atom));
                    let w = witness.as_ref().expect("negative carries a witness");
                    assert!(!w.is_empty());
                    assert_eq!(rec.gold, "no");
                }
            }
        }
    }

    #[test]
    fn negative_witness_avoids_the_fact_and_reaches_goal() {
        let fx = Fixture::new("gripper", "p02");
        let ctx = fx.ctx();
        let b = fx.init_bundle();
        for seed in 0..8 {
            for rec in generate(&ctx, &b, QType::Bool, seed) {
                let Provenance::LandBool { fact, is_landmark: false, witness: Some(w), .. } =
                    &rec.provenance
                else {
                    continue;
                };
                let atom = fx.task.atom_from_text(fact).unwrap();
                let actions: Vec<ActionId> = w
                    .iter()
                    .map(|s| fx.task.action_from_text(s).unwrap())
                    .collect();
                let p = Plan::from_actions(&fx.task, &b.s, actions).unwrap();
                assert!(p.goal_reaching);
                assert!(p.trace.iter().all(|st| !st.bits().contains(atom.idx())));
            }
        }
    }

    #[test]
    fn mcq_gold_is_the_only_landmark_option() {
        let fx = Fixture::new("ferry", "p02");
        let ctx = fx.ctx();
        let b = fx.init_bundle();
        let lm = landmarks_rhw(&fx.task, &b.s).unwrap();
        let mut produced = 0;
        for seed in 0..12 {
            for rec in generate(&ctx, &b, QType::Mcq, seed) {
                produced += 1;
                let Provenance::LandMcq { options, gold, .. } = &rec.provenance else {
                    panic!()
                };
                assert_eq!(rec.options.len(), 4);
                for (k, sym) in options.iter().enumerate() {
                    let atom = fx.task.atom_from_text(sym).unwrap();
                    assert_eq!(lm.contains(atom), k == *gold, "option {k}");
                }
            }
        }
        assert!(produced > 0, "expected MCQ records on ferry p02");
    }
}
