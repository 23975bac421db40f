//! Action reachability questions: can a given action eventually be applied,
//! starting from the shown state.
//!
//! Positives cite a witness prefix after which the action is applicable.
//! Negatives are real actions with provably unsatisfiable preconditions
//! (relaxed-unreachable or mutex), or action-like texts that resolve to no
//! ground action at all: corrupt verb templates, phantom objects, and
//! swapped argument bindings.

use super::*;
use crate::render::{parse_action_name, render_action, render_action_with_names, render_corrupt_action, render_plan};
use crate::sample::random_walk;
use crate::seed::rng;
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

/// One candidate option with its certificate.
struct Item {
    /// Natural-language action text shown to the model.
    text: String,
    /// Symbolic action for real actions, the literal text otherwise.
    sym: String,
    reachable: bool,
    cert: AReachCert,
}

/// A positive: an action observed applicable now or along a seeded walk.
fn positive(ctx: &GenCtx, b: &StateBundle, r: &mut ChaCha8Rng, seed: u64) -> Option<Item> {
    let mut candidates: Vec<(Vec<ActionId>, ActionId)> = Vec::new();
    for &a in &b.applicable {
        candidates.push((Vec::new(), a));
    }
    let walk = random_walk(ctx.task, &b.s, 6, child_seed(seed, "areach-walk"));
    for (i, &a) in walk.actions.iter().enumerate() {
        candidates.push((walk.actions[..i].to_vec(), a));
    }
    let (prefix, action) = candidates.choose(r)?.clone();
    Some(Item {
        text: render_action(ctx.task, ctx.tpl, action),
        sym: ctx.task.action_text(action),
        reachable: true,
        cert: AReachCert::Walk {
            prefix: action_syms(ctx.task, &prefix),
        },
    })
}

/// Real actions whose preconditions can never be satisfied from `s`.
fn impossible_real(ctx: &GenCtx, b: &StateBundle) -> Vec<Item> {
    let task = ctx.task;
    let mut out = Vec::new();
    for i in 0..task.num_actions() {
        let a = ActionId(i as u32);
        let pre = dynamic_pre(task, a);
        if let Some(&bad) = pre.iter().find(|&&p| !b.relaxed.atom_reachable(p)) {
            out.push(Item {
                text: render_action(task, ctx.tpl, a),
                sym: task.action_text(a),
                reachable: false,
                cert: AReachCert::PreUnreachable {
                    atom: task.atom_text(bad),
                },
            });
            continue;
        }
        let mutex_pair = pre.iter().enumerate().find_map(|(j, &p)| {
            pre[j + 1..]
                .iter()
                .find(|&&q| ctx.mutexes.are_mutex(p, q))
                .map(|&q| (p, q))
        });
        if let Some((p, q)) = mutex_pair {
            out.push(Item {
                text: render_action(task, ctx.tpl, a),
                sym: task.action_text(a),
                reachable: false,
                cert: AReachCert::PreMutex {
                    pair: [task.atom_text(p), task.atom_text(q)],
                },
            });
        }
    }
    out
}

/// Corrupt verb templates over real bindings; guaranteed unparseable.
fn corrupt_texts(ctx: &GenCtx, r: &mut ChaCha8Rng) -> Vec<Item> {
    let task = ctx.task;
    let mut out = Vec::new();
    let mut actions: Vec<ActionId> = (0..task.num_actions()).map(|i| ActionId(i as u32)).collect();
    actions.shuffle(r);
    for a in actions.into_iter().take(6) {
        let schema = &task.schema_names[task.action(a).schema];
        let n = ctx.tpl.corrupt_count(schema);
        if n == 0 {
            continue;
        }
        let text = render_corrupt_action(task, ctx.tpl, a, r.gen_range(0..n));
        out.push(Item {
            sym: text.clone(),
            text,
            reachable: false,
            cert: AReachCert::NotAnAction,
        });
    }
    out
}

/// A name that denotes no object: existing name with its numeric suffix
/// pushed past every real index.
fn phantom_name(task: &GroundTask, name: &str) -> String {
    let split = name.len() - name.bytes().rev().take_while(|b| b.is_ascii_digit()).count();
    let (base, digits) = name.split_at(split);
    let bump = digits.parse::<u64>().unwrap_or(0) + 2 * task.objects.len() as u64;
    format!("{base}{bump}")
}

/// Action-like texts with phantom objects or swapped arguments. Every
/// candidate is certified unparseable before being offered.
fn near_miss_texts(ctx: &GenCtx, r: &mut ChaCha8Rng) -> Vec<Item> {
    let task = ctx.task;
    let mut out = Vec::new();
    let mut actions: Vec<ActionId> = (0..task.num_actions()).map(|i| ActionId(i as u32)).collect();
    actions.shuffle(r);
    for a in actions.into_iter().take(8) {
        let ga = task.action(a);
        let schema = task.schema_names[ga.schema].clone();
        let names: Vec<String> = ga
            .binding
            .iter()
            .map(|&o| task.object_name(o).to_string())
            .collect();
        if names.is_empty() {
            continue;
        }
        // phantom object in one slot
        let mut phantom = names.clone();
        let slot = r.gen_range(0..phantom.len());
        phantom[slot] = phantom_name(task, &phantom[slot]);
        if let Some(text) = render_action_with_names(ctx.tpl, &schema, &phantom) {
            if parse_action_name(task, ctx.tpl, &text).is_none() {
                out.push(Item {
                    sym: text.clone(),
                    text,
                    reachable: false,
                    cert: AReachCert::NotAnAction,
                });
            }
        }
        // swapped arguments, when that fails to name a real action
        if names.len() >= 2 {
            let mut swapped = names.clone();
            let i = r.gen_range(0..swapped.len());
            let j = (i + 1 + r.gen_range(0..swapped.len() - 1)) % swapped.len();
            swapped.swap(i, j);
            if swapped != names {
                if let Some(text) = render_action_with_names(ctx.tpl, &schema, &swapped) {
                    if parse_action_name(task, ctx.tpl, &text).is_none() {
                        out.push(Item {
                            sym: text.clone(),
                            text,
                            reachable: false,
                            cert: AReachCert::NotAnAction,
                        });
                    }
                }
            }
        }
    }
    out
}

/// All negatives, interleaved across families in seeded order.
fn negatives(ctx: &GenCtx, b: &StateBundle, r: &mut ChaCha8Rng) -> Vec<Item> {
    let mut real = impossible_real(ctx, b);
    real.shuffle(r);
    let corrupt = corrupt_texts(ctx, r);
    let near = near_miss_texts(ctx, r);
    let mut families = vec![real, corrupt, near];
    let mut out = Vec::new();
    loop {
        let mut any = false;
        for f in &mut families {
            if let Some(item) = f.pop() {
                out.push(item);
                any = true;
            }
        }
        if !any {
            break;
        }
    }
    out
}

fn positive_rationale(ctx: &GenCtx, item: &Item) -> String {
    let AReachCert::Walk { prefix } = &item.cert else {
        unreachable!("positives carry walks");
    };
    let a = ctx
        .task
        .action_from_text(&item.sym)
        .expect("certified action");
    let pre = dynamic_pre(ctx.task, a);
    let pre_nl = fact_list(ctx.task, ctx.tpl, &pre);
    if prefix.is_empty() {
        format!(
            "Step 1: The action is applicable already in the current state: the required fact(s) {pre_nl} hold.\nSo, yes, the action can be applied."
        )
    } else {
        let ids: Vec<ActionId> = prefix
            .iter()
            .map(|s| ctx.task.action_from_text(s).expect("certified action"))
            .collect();
        format!(
            "Step 1: From the current state, execute the sequence of actions {}.\nStep 2: In the resulting state the required fact(s) {pre_nl} hold, so the action can be applied there.\nSo, yes, the action can eventually be applied.",
            render_plan(ctx.task, ctx.tpl, &ids),
        )
    }
}

fn negative_reason(ctx: &GenCtx, item: &Item) -> String {
    match &item.cert {
        AReachCert::PreUnreachable { atom } => {
            let p = ctx.task.atom_from_text(atom).expect("certified atom");
            format!(
                "applying it requires the fact \"{}\", which can never become true from the current state",
                render_fact(ctx.task, ctx.tpl, p),
            )
        }
        AReachCert::PreMutex { pair } => {
            let p = ctx.task.atom_from_text(&pair[0]).expect("certified atom");
            let q = ctx.task.atom_from_text(&pair[1]).expect("certified atom");
            format!(
                "applying it requires both \"{}\" and \"{}\", which can never hold at the same time",
                render_fact(ctx.task, ctx.tpl, p),
                render_fact(ctx.task, ctx.tpl, q),
            )
        }
        AReachCert::NotAnAction => format!(
            "\"{}\" does not name any action available in this domain",
            item.text
        ),
        AReachCert::Walk { .. } => unreachable!("negatives never carry walks"),
    }
}

fn gen_bool(ctx: &GenCtx, b: &StateBundle, seed: u64) -> Vec<QuestionRecord> {
    let mut r = rng(seed);
    let mut out = Vec::new();
    let context = context_for(ctx, &b.s, TaskKind::ActionReachability);
    if let Some(item) = positive(ctx, b, &mut r, seed) {
        out.push(make_record(
            ctx,
            TaskKind::ActionReachability,
            QType::Bool,
            context.clone(),
            stem_areach_bool(&item.text),
            Vec::new(),
            yn(true).to_string(),
            positive_rationale(ctx, &item),
            Provenance::ActionReachBool {
                state: state_atom_texts(ctx.task, &b.s),
                action: item.sym,
                cert: item.cert,
            },
            seed,
        ));
    }
    if let Some(item) = negatives(ctx, b, &mut r).into_iter().next() {
        let rationale = format!(
            "Step 1: The action can never be applied: {}.\nSo, no, the action cannot be applied.",
            negative_reason(ctx, &item),
        );
        out.push(make_record(
            ctx,
            TaskKind::ActionReachability,
            QType::Bool,
            context,
            stem_areach_bool(&item.text),
            Vec::new(),
            yn(false).to_string(),
            rationale,
            Provenance::ActionReachBool {
                state: state_atom_texts(ctx.task, &b.s),
                action: item.sym,
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
    let mut chosen: Vec<Item> = Vec::new();
    let mut texts: HashSet<String> = HashSet::new();
    texts.insert(gold.text.clone());
    for item in negatives(ctx, b, &mut r) {
        if texts.insert(item.text.clone()) {
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

    let options: Vec<String> = chosen.iter().map(|i| option_text(&i.text)).collect();
    let mut steps = Vec::new();
    for (i, item) in chosen.iter().enumerate() {
        if item.reachable {
            let AReachCert::Walk { prefix } = &item.cert else {
                unreachable!()
            };
            steps.push(if prefix.is_empty() {
                format!(
                    "Step {}: Option {} is applicable already in the current state.",
                    i + 1,
                    LETTERS[i],
                )
            } else {
                let ids: Vec<ActionId> = prefix
                    .iter()
                    .map(|s| ctx.task.action_from_text(s).expect("certified action"))
                    .collect();
                format!(
                    "Step {}: Option {} becomes applicable after executing {}.",
                    i + 1,
                    LETTERS[i],
                    render_plan(ctx.task, ctx.tpl, &ids),
                )
            });
        } else {
            steps.push(format!(
                "Step {}: Option {} can never be applied: {}.",
                i + 1,
                LETTERS[i],
                negative_reason(ctx, item),
            ));
        }
    }
    steps.push(format!("So, the correct option is {}.", LETTERS[gold_idx]));

    let provenance = Provenance::ActionReachMcq {
        state: state_atom_texts(ctx.task, &b.s),
        options: chosen.iter().map(|i| i.sym.clone()).collect(),
        certs: chosen.iter().map(|i| i.cert.clone()).collect(),
        gold: gold_idx,
    };
    vec![make_record(
        ctx,
        TaskKind::ActionReachability,
        QType::Mcq,
        context_for(ctx, &b.s, TaskKind::ActionReachability),
        STEM_AREACH_MCQ.to_string(),
        options,
        LETTERS[gold_idx].to_string(),
        steps.join("\n"),
        provenance,
        seed,
    )]
}
