//! Progression questions: does a fact hold after applying an action, and
//! which option holds in the successor state.

use super::*;
use crate::render::{render_action, render_fact};
use crate::seed::rng;
use crate::transition::{fact_partition, progress, FactPartition};
use rand::seq::SliceRandom;
use rand::Rng;

pub(super) fn generate(
    ctx: &GenCtx,
    b: &StateBundle,
    qtype: QType,
    seed: u64,
) -> Vec<QuestionRecord> {
    let mut r = rng(seed);
    let Some(&action) = b.applicable.as_slice().choose(&mut r) else {
        return Vec::new();
    };
    let partition = fact_partition(ctx.task, &b.s, action).expect("chosen from applicable");
    match qtype {
        QType::Bool => gen_bool(ctx, b, action, &partition, seed),
        QType::Mcq => gen_mcq(ctx, b, action, &partition, seed),
    }
}

fn cell_atoms(ctx: &GenCtx, bits: &BitSet) -> Vec<AtomId> {
    askable_dynamic(ctx.task, ctx.tpl, bits)
}

fn holds_after(cell: Cell) -> bool {
    matches!(cell, Cell::TrueInBoth | Cell::TrueAfterOnly)
}

/// Shared preamble: applicability of the action and its effects.
fn effect_steps(ctx: &GenCtx, action: ActionId) -> String {
    let task = ctx.task;
    let ga = task.action(action);
    let pre = dynamic_pre(task, action);
    let adds: Vec<AtomId> = ga.add.iter().map(|i| AtomId(i as u32)).collect();
    let dels: Vec<AtomId> = ga.del.iter().map(|i| AtomId(i as u32)).collect();
    let adds_text = if adds.is_empty() {
        "nothing".to_string()
    } else {
        fact_list(task, ctx.tpl, &adds)
    };
    let dels_text = if dels.is_empty() {
        "nothing".to_string()
    } else {
        fact_list(task, ctx.tpl, &dels)
    };
    format!(
        "Step 1: To perform the action {}, the following fact(s) must hold in this state: {}; they hold, so the action is applicable.\nStep 2: Performing the action makes the following true: {adds_text}; and makes the following false: {dels_text}.",
        render_action(task, ctx.tpl, action),
        fact_list(task, ctx.tpl, &pre),
    )
}

fn cell_explanation(ctx: &GenCtx, fact: AtomId, cell: Cell) -> String {
    let f = render_fact(ctx.task, ctx.tpl, fact);
    match cell {
        Cell::TrueAfterOnly => {
            format!("The fact \"{f}\" is made true by the action, so it holds afterwards.")
        }
        Cell::TrueInBoth => format!(
            "The fact \"{f}\" holds in the current state and the action does not make it false, so it still holds afterwards."
        ),
        Cell::TrueBeforeOnly => {
            format!("The fact \"{f}\" is made false by the action, so it does not hold afterwards.")
        }
        Cell::FalseInBoth => format!(
            "The fact \"{f}\" does not hold in the current state and the action does not make it true, so it does not hold afterwards."
        ),
    }
}

fn gen_bool(
    ctx: &GenCtx,
    b: &StateBundle,
    action: ActionId,
    partition: &FactPartition,
    seed: u64,
) -> Vec<QuestionRecord> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let cells = [
        (&partition.true_after_only, Cell::TrueAfterOnly),
        (&partition.true_before_only, Cell::TrueBeforeOnly),
        (&partition.true_in_both, Cell::TrueInBoth),
        (&partition.false_in_both, Cell::FalseInBoth),
    ];
    let action_nl = render_action(ctx.task, ctx.tpl, action);
    let preamble = effect_steps(ctx, action);
    for (bits, cell) in cells {
        let Some(&fact) = cell_atoms(ctx, bits).as_slice().choose(&mut r) else {
            continue;
        };
        let gold = holds_after(cell);
        let rationale = format!(
            "{preamble}\nStep 3: {}\nSo, the fact {} hold after performing the action.",
            cell_explanation(ctx, fact, cell),
            if gold { "does" } else { "does not" },
        );
        let provenance = Provenance::ProgBool {
            state: state_atom_texts(ctx.task, &b.s),
            action: ctx.task.action_text(action),
            fact: ctx.task.atom_text(fact),
            cell,
        };
        out.push(make_record(
            ctx,
            TaskKind::Progression,
            QType::Bool,
            context_for(ctx, &b.s, TaskKind::Progression),
            stem_prog_bool(&render_fact(ctx.task, ctx.tpl, fact), &action_nl),
            Vec::new(),
            yn(gold).to_string(),
            rationale,
            provenance,
            seed,
        ));
    }
    out
}

/// One MCQ option: the facts it asserts and whether they all hold after.
struct OptionDraft {
    facts: Vec<AtomId>,
    gold: bool,
}

fn gen_mcq(
    ctx: &GenCtx,
    b: &StateBundle,
    action: ActionId,
    partition: &FactPartition,
    seed: u64,
) -> Vec<QuestionRecord> {
    let mut r = rng(seed);
    let t = progress(ctx.task, &b.s, action).expect("chosen from applicable");
    let after_only = cell_atoms(ctx, &partition.true_after_only);
    let in_both = cell_atoms(ctx, &partition.true_in_both);
    let mut wrong: Vec<AtomId> = cell_atoms(ctx, &partition.true_before_only);
    wrong.extend(cell_atoms(ctx, &partition.false_in_both));

    let drafts = if ctx.prog_pairs {
        pair_drafts(&mut r, &after_only, &in_both, &wrong)
    } else {
        single_drafts(&mut r, &after_only, &in_both, &wrong)
    };
    let Some(mut drafts) = drafts else {
        return Vec::new();
    };

    // place the gold option uniformly among the four
    let gold_from = drafts
        .iter()
        .position(|d| d.gold)
        .expect("one gold draft");
    let gold_draft = drafts.remove(gold_from);
    let gold_idx = r.gen_range(0..4usize);
    drafts.shuffle(&mut r);
    drafts.insert(gold_idx, gold_draft);

    let texts: Vec<String> = drafts
        .iter()
        .map(|d| option_text(&fact_list(ctx.task, ctx.tpl, &d.facts)))
        .collect();
    let distinct: HashSet<&String> = texts.iter().collect();
    if distinct.len() != 4 {
        return Vec::new();
    }

    let mut steps = vec![effect_steps(ctx, action)];
    for (i, d) in drafts.iter().enumerate() {
        let verdicts: Vec<String> = d
            .facts
            .iter()
            .map(|&f| {
                format!(
                    "\"{}\" {} in the resulting state",
                    render_fact(ctx.task, ctx.tpl, f),
                    if t.contains(f) { "holds" } else { "does not hold" }
                )
            })
            .collect();
        steps.push(format!(
            "Step {}: Option {}: {}.",
            i + 3,
            LETTERS[i],
            verdicts.join("; ")
        ));
    }
    steps.push(format!("So, the correct option is {}.", LETTERS[gold_idx]));

    let provenance = Provenance::ProgMcq {
        state: state_atom_texts(ctx.task, &b.s),
        action: ctx.task.action_text(action),
        options: drafts
            .iter()
            .map(|d| atom_syms(ctx.task, &d.facts))
            .collect(),
        gold: gold_idx,
    };
    vec![make_record(
        ctx,
        TaskKind::Progression,
        QType::Mcq,
        context_for(ctx, &b.s, TaskKind::Progression),
        stem_prog_mcq(&render_action(ctx.task, ctx.tpl, action)),
        texts,
        LETTERS[gold_idx].to_string(),
        steps.join("\n"),
        provenance,
        seed,
    )]
}

/// Single-fact options: one fact that holds after, three that do not.
fn single_drafts(
    r: &mut impl Rng,
    after_only: &[AtomId],
    in_both: &[AtomId],
    wrong: &[AtomId],
) -> Option<Vec<OptionDraft>> {
    let gold_fact = after_only
        .choose(r)
        .or_else(|| in_both.choose(r))
        .copied()?;
    if wrong.len() < 3 {
        return None;
    }
    let mut pool = wrong.to_vec();
    pool.shuffle(r);
    let mut drafts = vec![OptionDraft {
        facts: vec![gold_fact],
        gold: true,
    }];
    drafts.extend(pool.into_iter().take(3).map(|f| OptionDraft {
        facts: vec![f],
        gold: false,
    }));
    Some(drafts)
}

/// Fact-pair options: the gold pair holds entirely; each distractor has at
/// least one conjunct that does not hold after the action.
fn pair_drafts(
    r: &mut impl Rng,
    after_only: &[AtomId],
    in_both: &[AtomId],
    wrong: &[AtomId],
) -> Option<Vec<OptionDraft>> {
    let mut good: Vec<AtomId> = after_only.to_vec();
    good.extend_from_slice(in_both);
    if good.len() < 2 || wrong.len() < 3 {
        return None;
    }
    let mut good_pool = good.clone();
    good_pool.shuffle(r);
    // prefer spanning both truth sources when available
    let gold_pair = if !after_only.is_empty() && !in_both.is_empty() {
        let a = *after_only.choose(r).unwrap();
        let b = *in_both.choose(r).unwrap();
        sorted_pair(a, b)
    } else {
        sorted_pair(good_pool[0], good_pool[1])
    };
    let mut wrong_pool = wrong.to_vec();
    wrong_pool.shuffle(r);
    let w = &wrong_pool;
    let mut drafts = vec![OptionDraft {
        facts: gold_pair.to_vec(),
        gold: true,
    }];
    // wrong+good, good+wrong, wrong+wrong when possible
    drafts.push(OptionDraft {
        facts: sorted_pair(w[0], good_pool[0]).to_vec(),
        gold: false,
    });
    drafts.push(OptionDraft {
        facts: sorted_pair(w[1], *good_pool.last().unwrap()).to_vec(),
        gold: false,
    });
    let last = if w.len() >= 4 {
        sorted_pair(w[2], w[3])
    } else {
        sorted_pair(w[2], good_pool[good_pool.len() / 2])
    };
    drafts.push(OptionDraft {
        facts: last.to_vec(),
        gold: false,
    });
    Some(drafts)
}

fn sorted_pair(a: AtomId, b: AtomId) -> [AtomId; 2] {
    if a.idx() <= b.idx() {
        [a, b]
    } else {
        [b, a]
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;
    use crate::analysis::mutex::compute_mutexes;

    fn setup(prob: &str) -> (GroundTask, TemplateSet) {
        let task = load_task("ferry", prob);
        let tpl = load_tpl(&task);
        (task, tpl)
    }

    #[test]
    fn bool_cells_match_semantics() {
        let (task, tpl) = setup("p01");
        let mutexes = compute_mutexes(&task);
        let ctx = GenCtx {
            task: &task,
            tpl: &tpl,
            mutexes: &mutexes,
            domain: "ferry",
            problem_file: "p01.pddl",
            prog_pairs: false,
        };
        let b = init_bundle(&task);
        let recs = generate(&ctx, &b, QType::Bool, 5);
        assert!(recs.len() >= 2, "expected several cells, got {}", recs.len());
        for rec in &recs {
            let Provenance::ProgBool { action, fact, cell, .. } = &rec.provenance else {
                panic!("wrong provenance");
            };
            let a = task.action_from_text(action).unwrap();
            let f = task.atom_from_text(fact).unwrap();
            let t = progress(&task, &b.s, a).unwrap();
            let expected = t.contains(f);
            assert_eq!(rec.gold, yn(expected));
            assert_eq!(holds_after(*cell), expected);
            assert!(rec.question.contains("hold after performing the action"));
        }
    }

    #[test]
    fn mcq_gold_holds_and_distractors_fail() {
        let (task, tpl) = setup("p02");
        let mutexes = compute_mutexes(&task);
        let ctx = GenCtx {
            task: &task,
            tpl: &tpl,
            mutexes: &mutexes,
            domain: "ferry",
            problem_file: "p02.pddl",
            prog_pairs: false,
        };
        let b = init_bundle(&task);
        for seed in 0..10 {
            for rec in generate(&ctx, &b, QType::Mcq, seed) {
                let Provenance::ProgMcq { action, options, gold, .. } = &rec.provenance else {
                    panic!("wrong provenance");
                };
                let a = task.action_from_text(action).unwrap();
                let t = progress(&task, &b.s, a).unwrap();
                for (i, opt) in options.iter().enumerate() {
                    let all_hold = opt
                        .iter()
                        .all(|sym| t.contains(task.atom_from_text(sym).unwrap()));
                    assert_eq!(all_hold, i == *gold, "seed {seed} option {i}");
                }
            }
        }
    }

    #[test]
    fn pair_mode_emits_two_fact_options() {
        let (task, tpl) = setup("p02");
        let mutexes = compute_mutexes(&task);
        let ctx = GenCtx {
            task: &task,
            tpl: &tpl,
            mutexes: &mutexes,
            domain: "ferry",
            problem_file: "p02.pddl",
            prog_pairs: true,
        };
        let b = init_bundle(&task);
        let recs = generate(&ctx, &b, QType::Mcq, 2);
        assert!(!recs.is_empty());
        for rec in recs {
            let Provenance::ProgMcq { options, .. } = &rec.provenance else {
                panic!()
            };
            for opt in options {
                assert_eq!(opt.len(), 2);
            }
            for text in &rec.options {
                assert!(text.contains(" and "), "{text}");
            }
        }
    }
}
