//! Reachability questions: can a state be reached, from the one shown, in
//! which a given pair of facts holds.
//!
//! Positive items come with an explicit witness walk. Negative items cite
//! one of three impossibility arguments: a mutex pair, a false static fact,
//! or a fact unreachable even under the delete relaxation. Each negative
//! option pairs the impossible part with an innocuous reachable fact, so
//! surface form alone does not give the answer away.

use super::*;
use crate::sample::random_walk;
use crate::seed::{child_seed_idx, rng};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

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

/// A fact pair with its reachability certificate.
struct Item {
    facts: Vec<AtomId>,
    reachable: bool,
    cert: ReachCert,
}

/// Witness pair: two askable facts that hold together at the end of a seeded
/// walk from the bundle state.
fn positive(ctx: &GenCtx, b: &StateBundle, r: &mut ChaCha8Rng, seed: u64) -> Option<Item> {
    for attempt in 0..8u64 {
        let depth = 2 + r.gen_range(0..5usize);
        let walk = random_walk(
            ctx.task,
            &b.s,
            depth,
            child_seed_idx(child_seed(seed, "walk"), attempt),
        );
        let end = walk.trace.last().expect("trace never empty");
        let pool = askable_dynamic(ctx.task, ctx.tpl, end.bits());
        if pool.len() < 2 {
            continue;
        }
        let mut picks = pool;
        picks.shuffle(r);
        let mut facts = vec![picks[0], picks[1]];
        facts.sort_by_key(|p| p.idx());
        return Some(Item {
            facts,
            reachable: true,
            cert: ReachCert::Walk {
                actions: action_syms(ctx.task, &walk.actions),
            },
        });
    }
    None
}

/// Mutex-pair negatives: both facts individually plausible, jointly
/// impossible. Only pairs whose members are relaxed-reachable from the
/// bundle state qualify, so neither conjunct is impossible on its own.
fn mutex_negatives(ctx: &GenCtx, b: &StateBundle) -> Vec<Item> {
    ctx.mutexes
        .reachable_mutex_pairs()
        .into_iter()
        .filter(|&(p, q)| {
            let viable = |x: AtomId| {
                !ctx.task.is_static(x)
                    && !ctx.tpl.is_hidden(&ctx.task.pred_of(x).name)
                    && b.relaxed.atom_reachable(x)
            };
            viable(p) && viable(q)
        })
        .map(|(p, q)| Item {
            facts: vec![p, q],
            reachable: false,
            cert: ReachCert::Mutex {
                pair: [ctx.task.atom_text(p), ctx.task.atom_text(q)],
            },
        })
        .collect()
}

/// Unreachable-fact negatives: a fact that can never hold (false static, or
/// relaxed-unreachable dynamic), paired with a reachable filler fact.
fn unreachable_negatives(ctx: &GenCtx, b: &StateBundle, r: &mut ChaCha8Rng) -> Vec<Item> {
    let task = ctx.task;
    let fillers = askable_dynamic(task, ctx.tpl, &b.relaxed.atoms);
    if fillers.is_empty() {
        return Vec::new();
    }
    let mut out = Vec::new();
    for i in 0..task.num_atoms() {
        let p = AtomId(i as u32);
        if b.relaxed.atom_reachable(p) || ctx.tpl.is_hidden(&task.pred_of(p).name) {
            continue;
        }
        let cert = if task.is_static(p) {
            ReachCert::Static {
                atom: task.atom_text(p),
            }
        } else {
            ReachCert::Relaxed {
                atom: task.atom_text(p),
            }
        };
        let filler = *fillers.as_slice().choose(r).expect("nonempty");
        // impossible conjunct first or second, seeded
        let facts = if r.gen_bool(0.5) {
            vec![p, filler]
        } else {
            vec![filler, p]
        };
        out.push(Item {
            facts,
            reachable: false,
            cert,
        });
    }
    out
}

/// Interleaves the two negative families, each in seeded order, so picks
/// alternate certificate kinds while both remain available.
fn negatives(ctx: &GenCtx, b: &StateBundle, r: &mut ChaCha8Rng) -> Vec<Item> {
    let mut mutex = mutex_negatives(ctx, b);
    mutex.shuffle(r);
    let mut unreach = unreachable_negatives(ctx, b, r);
    unreach.shuffle(r);
    let mut out = Vec::with_capacity(mutex.len() + unreach.len());
    let mut mutex = mutex.into_iter();
    let mut unreach = unreach.into_iter();
    loop {
        let m = mutex.next();
        let u = unreach.next();
        if m.is_none() && u.is_none() {
            break;
        }
        out.extend(m);
        out.extend(u);
    }
    out
}

fn pair_text(ctx: &GenCtx, item: &Item) -> String {
    fact_list(ctx.task, ctx.tpl, &item.facts)
}

fn negative_reason(cert: &ReachCert, task: &GroundTask, tpl: &TemplateSet) -> String {
    match cert {
        ReachCert::Mutex { pair } => {
            let p = task.atom_from_text(&pair[0]).expect("certified atom");
            let q = task.atom_from_text(&pair[1]).expect("certified atom");
            format!(
                "the facts \"{}\" and \"{}\" can never hold at the same time in any reachable state",
                render_fact(task, tpl, p),
                render_fact(task, tpl, q),
            )
        }
        ReachCert::Static { atom } => {
            let p = task.atom_from_text(atom).expect("certified atom");
            format!(
                "the fact \"{}\" does not hold in the current state and no action can ever make it true",
                render_fact(task, tpl, p),
            )
        }
        ReachCert::Relaxed { atom } => {
            let p = task.atom_from_text(atom).expect("certified atom");
            format!(
                "even ignoring every delete effect, the fact \"{}\" can never become true from the current state",
                render_fact(task, tpl, p),
            )
        }
        ReachCert::Walk { .. } => unreachable!("negatives never carry walks"),
    }
}

fn walk_sentence(ctx: &GenCtx, cert: &ReachCert, facts_nl: &str) -> String {
    let ReachCert::Walk { actions } = cert else {
        unreachable!("positives always carry walks");
    };
    if actions.is_empty() {
        format!("The fact(s) {facts_nl} already hold in the current state.")
    } else {
        let ids: Vec<ActionId> = actions
            .iter()
            .map(|s| ctx.task.action_from_text(s).expect("certified action"))
            .collect();
        format!(
            "Executing the sequence of actions {} from the current state leads to a state where {facts_nl} hold.",
            crate::render::render_plan(ctx.task, ctx.tpl, &ids),
        )
    }
}

fn gen_bool(ctx: &GenCtx, b: &StateBundle, seed: u64) -> Vec<QuestionRecord> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let context = context_for(ctx, &b.s, TaskKind::Reachability);
    if let Some(item) = positive(ctx, b, &mut r, seed) {
        let facts_nl = pair_text(ctx, &item);
        let rationale = format!(
            "Step 1: {}\nSo, yes, such a state can be reached.",
            walk_sentence(ctx, &item.cert, &facts_nl),
        );
        out.push(make_record(
            ctx,
            TaskKind::Reachability,
            QType::Bool,
            context.clone(),
            stem_reach_bool(&facts_nl),
            Vec::new(),
            yn(true).to_string(),
            rationale,
            Provenance::ReachBool {
                state: state_atom_texts(ctx.task, &b.s),
                facts: atom_syms(ctx.task, &item.facts),
                cert: item.cert,
            },
            seed,
        ));
    }
    let negs = negatives(ctx, b, &mut r);
    if let Some(item) = negs.into_iter().next() {
        let facts_nl = pair_text(ctx, &item);
        let rationale = format!(
            "Step 1: No reachable state satisfies the condition: {}.\nSo, no, such a state cannot be reached.",
            negative_reason(&item.cert, ctx.task, ctx.tpl),
        );
        out.push(make_record(
            ctx,
            TaskKind::Reachability,
            QType::Bool,
            context,
            stem_reach_bool(&facts_nl),
            Vec::new(),
            yn(false).to_string(),
            rationale,
            Provenance::ReachBool {
                state: state_atom_texts(ctx.task, &b.s),
                facts: atom_syms(ctx.task, &item.facts),
                cert: item.cert,
            },
            seed,
        ));
    }
    out
}

fn gen_mcq(ctx: &GenCtx, b: &StateBundle, seed: u64) -> Vec<QuestionRecord> {
    let mut r = rng(seed);
    let Some(gold) = positive(ctx, b, &mut r, seed) else {
        return Vec::new();
    };
    let gold_text = option_text(&pair_text(ctx, &gold));
    let mut chosen: Vec<Item> = Vec::new();
    let mut texts: HashSet<String> = HashSet::new();
    texts.insert(gold_text.clone());
    for item in negatives(ctx, b, &mut r) {
        let text = option_text(&pair_text(ctx, &item));
        if texts.insert(text) {
            chosen.push(item);
            if chosen.len() == 3 {
                break;
            }
        }
    }
    if chosen.len() < 3 {
        return Vec::new();
    }

    let gold_idx = r.gen_range(0..4usize);
    chosen.shuffle(&mut r);
    chosen.insert(gold_idx, gold);

    let options: Vec<String> = chosen
        .iter()
        .map(|i| option_text(&pair_text(ctx, i)))
        .collect();
    let mut steps = Vec::new();
    for (i, item) in chosen.iter().enumerate() {
        if item.reachable {
            steps.push(format!(
                "Step {}: Option {} can hold: {}",
                i + 1,
                LETTERS[i],
                walk_sentence(ctx, &item.cert, &pair_text(ctx, item)),
            ));
        } else {
            steps.push(format!(
                "Step {}: Option {} can never hold: {}.",
                i + 1,
                LETTERS[i],
                negative_reason(&item.cert, ctx.task, ctx.tpl),
            ));
        }
    }
    steps.push(format!("So, the correct option is {}.", LETTERS[gold_idx]));

    let provenance = Provenance::ReachMcq {
        state: state_atom_texts(ctx.task, &b.s),
        options: chosen
            .iter()
            .map(|i| atom_syms(ctx.task, &i.facts))
            .collect(),
        certs: chosen.iter().map(|i| i.cert.clone()).collect(),
        gold: gold_idx,
    };
    vec![make_record(
        ctx,
        TaskKind::Reachability,
        QType::Mcq,
        context_for(ctx, &b.s, TaskKind::Reachability),
        STEM_REACH_MCQ.to_string(),
        options,
        LETTERS[gold_idx].to_string(),
        steps.join("\n"),
        provenance,
        seed,
    )]
}
