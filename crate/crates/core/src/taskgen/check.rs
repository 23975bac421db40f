//! Independent replay of a record's provenance.
//!
//! [`replay`] re-derives the gold label from the symbolic provenance using
//! only the ground task, the templates, and the transition and analysis
//! layers, and re-renders every shown text it can reconstruct. Generators run
//! it on every record before emission; the dataset verifier runs it again on
//! whatever it reads back. It must not trust anything the generators cached.

use super::*;
use crate::analysis::justify::{justification_check, Removal};
use crate::analysis::relaxed::relaxed_reachable;
use crate::render::{parse_action_name, render_action, render_plan};
use crate::transition::{
    apply_sequence, fact_partition, is_applicable, progress, SeqStep, SequenceVerdict,
};

/// Replay with no precomputed mutexes; they are computed if a certificate
/// needs them.
pub fn replay(task: &GroundTask, tpl: &TemplateSet, rec: &QuestionRecord) -> Result<(), String> {
    replay_with(task, tpl, None, rec)
}

/// Replay a record against the semantics. `Err` carries the first violated
/// invariant.
pub fn replay_with(
    task: &GroundTask,
    tpl: &TemplateSet,
    mutexes: Option<&MutexSet>,
    rec: &QuestionRecord,
) -> Result<(), String> {
    check_shape(rec)?;
    let mut mx = LazyMutexes { task, provided: mutexes, computed: None };
    let s = state_of(task, prov_state(&rec.provenance))?;
    ensure(
        rec.context == render_context(task, tpl, &s, rec.task.includes_goal()),
        "context does not match the provenance state",
    )?;

    match &rec.provenance {
        Provenance::AppBool { action, applicable, .. } => {
            family(rec, TaskKind::Applicability, QType::Bool)?;
            let a = action_id(task, action)?;
            ensure(
                is_applicable(task, &s, a) == *applicable,
                "applicability flag disagrees with the transition relation",
            )?;
            expect_gold(rec, yn(*applicable))?;
            expect_question(rec, &stem_app_bool(&render_action(task, tpl, a)))
        }
        Provenance::AppMcq { actions, gold, .. } => {
            family(rec, TaskKind::Applicability, QType::Mcq)?;
            let ids = action_ids(task, actions)?;
            ensure(ids.len() == 4, "expected four candidate actions")?;
            for (k, &a) in ids.iter().enumerate() {
                ensure(
                    is_applicable(task, &s, a) == (k == *gold),
                    "exactly the gold option must be applicable",
                )?;
                expect_option(rec, k, &option_text(&render_action(task, tpl, a)))?;
            }
            expect_gold_letter(rec, *gold)?;
            expect_question(rec, STEM_APP_MCQ)
        }
        Provenance::ProgBool { action, fact, cell, .. } => {
            family(rec, TaskKind::Progression, QType::Bool)?;
            let a = action_id(task, action)?;
            let p = atom_id(task, fact)?;
            let part = fact_partition(task, &s, a)
                .map_err(|_| "progression action is not applicable".to_string())?;
            let derived = if part.true_in_both.contains(p.idx()) {
                Cell::TrueInBoth
            } else if part.true_before_only.contains(p.idx()) {
                Cell::TrueBeforeOnly
            } else if part.true_after_only.contains(p.idx()) {
                Cell::TrueAfterOnly
            } else {
                Cell::FalseInBoth
            };
            ensure(derived == *cell, "fact falls in a different partition cell")?;
            let holds_after = matches!(cell, Cell::TrueInBoth | Cell::TrueAfterOnly);
            expect_gold(rec, yn(holds_after))?;
            expect_question(
                rec,
                &stem_prog_bool(&render_fact(task, tpl, p), &render_action(task, tpl, a)),
            )
        }
        Provenance::ProgMcq { action, options, gold, .. } => {
            family(rec, TaskKind::Progression, QType::Mcq)?;
            let a = action_id(task, action)?;
            let t = progress(task, &s, a)
                .map_err(|_| "progression action is not applicable".to_string())?;
            ensure(options.len() == 4, "expected four fact options")?;
            for (k, syms) in options.iter().enumerate() {
                let ids = atom_ids(task, syms)?;
                ensure(!ids.is_empty(), "empty fact option")?;
                let holds = ids.iter().all(|&p| t.contains(p));
                ensure(
                    holds == (k == *gold),
                    "exactly the gold option must hold after the action",
                )?;
                expect_option(rec, k, &option_text(&fact_list(task, tpl, &ids)))?;
            }
            expect_gold_letter(rec, *gold)?;
            expect_question(rec, &stem_prog_mcq(&render_action(task, tpl, a)))
        }
        Provenance::ReachBool { facts, cert, .. } => {
            family(rec, TaskKind::Reachability, QType::Bool)?;
            let ids = atom_ids(task, facts)?;
            let reachable = check_reach_cert(task, &mut mx, &s, &ids, cert)?;
            expect_gold(rec, yn(reachable))?;
            expect_question(rec, &stem_reach_bool(&fact_list(task, tpl, &ids)))
        }
        Provenance::ReachMcq { options, certs, gold, .. } => {
            family(rec, TaskKind::Reachability, QType::Mcq)?;
            ensure(options.len() == 4 && certs.len() == 4, "expected four certified options")?;
            for (k, (syms, cert)) in options.iter().zip(certs).enumerate() {
                let ids = atom_ids(task, syms)?;
                let reachable = check_reach_cert(task, &mut mx, &s, &ids, cert)?;
                ensure(
                    reachable == (k == *gold),
                    "exactly the gold option must be reachable",
                )?;
                expect_option(rec, k, &option_text(&fact_list(task, tpl, &ids)))?;
            }
            expect_gold_letter(rec, *gold)?;
            expect_question(rec, STEM_REACH_MCQ)
        }
        Provenance::ActionReachBool { action, cert, .. } => {
            family(rec, TaskKind::ActionReachability, QType::Bool)?;
            let reachable = check_areach_cert(task, tpl, &mut mx, &s, action, cert)?;
            expect_gold(rec, yn(reachable))?;
            expect_question(rec, &stem_areach_bool(&areach_text(task, tpl, action)?))
        }
        Provenance::ActionReachMcq { options, certs, gold, .. } => {
            family(rec, TaskKind::ActionReachability, QType::Mcq)?;
            ensure(options.len() == 4 && certs.len() == 4, "expected four certified options")?;
            for (k, (sym, cert)) in options.iter().zip(certs).enumerate() {
                let reachable = check_areach_cert(task, tpl, &mut mx, &s, sym, cert)?;
                ensure(
                    reachable == (k == *gold),
                    "exactly the gold option must be reachable",
                )?;
                expect_option(rec, k, &option_text(&areach_text(task, tpl, sym)?))?;
            }
            expect_gold_letter(rec, *gold)?;
            expect_question(rec, STEM_AREACH_MCQ)
        }
        Provenance::ValBool { steps, ask, expected, .. } => {
            family(rec, TaskKind::Validation, QType::Bool)?;
            let seq = seq_steps(task, steps)?;
            let verdict = apply_sequence(task, &s, &seq).verdict;
            let flag = match ask {
                ValAsk::Valid => verdict.valid,
                ValAsk::Applicable => verdict.applicable,
                ValAsk::Plan => verdict.goal_reaching,
            };
            ensure(flag == *expected, "sequence verdict disagrees with the label")?;
            expect_gold(rec, yn(*expected))?;
            expect_question(rec, &stem_val_bool(*ask, &seq_text(task, tpl, &seq)))
        }
        Provenance::ValMcq { steps, case, gold, .. } => {
            family(rec, TaskKind::Validation, QType::Mcq)?;
            let seq = seq_steps(task, steps)?;
            let verdict = apply_sequence(task, &s, &seq).verdict;
            ensure(
                strongest_case(&verdict) == *case,
                "sequence verdict disagrees with the claimed case",
            )?;
            let mut claims: Vec<&str> = [
                ValCase::NotValid,
                ValCase::NotApplicable,
                ValCase::NotGoal,
                ValCase::Plan,
            ]
            .iter()
            .map(|c| c.claim())
            .collect();
            claims.sort_unstable();
            let mut shown: Vec<&str> = rec.options.iter().map(String::as_str).collect();
            shown.sort_unstable();
            ensure(claims == shown, "options are not the four claims")?;
            ensure(
                rec.options.get(*gold).map(String::as_str) == Some(case.claim()),
                "gold option is not the claimed case",
            )?;
            expect_gold_letter(rec, *gold)?;
            expect_question(rec, &stem_val_mcq(&seq_text(task, tpl, &seq)))
        }
        Provenance::JustBool { plan, removal, removable, .. } => {
            family(rec, TaskKind::Justification, QType::Bool)?;
            let (ids, p) = replay_plan(task, &s, plan)?;
            let question = match *removal {
                RemovalSpec::Single { index } => {
                    ensure(index < ids.len(), "removal index out of bounds")?;
                    ensure(
                        ids.iter().filter(|&&a| a == ids[index]).count() == 1,
                        "named action occurs more than once in the plan",
                    )?;
                    stem_just_bool_single(
                        &render_plan(task, tpl, &ids),
                        &render_action(task, tpl, ids[index]),
                    )
                }
                RemovalSpec::Pair { index } => {
                    ensure(index + 1 < ids.len(), "removal index out of bounds")?;
                    ensure(adjacent_occurrences(&ids, ids[index], ids[index + 1]) == 1,
                        "named action pair occurs more than once in the plan",
                    )?;
                    stem_just_bool_pair(
                        &render_plan(task, tpl, &ids),
                        &render_action(task, tpl, ids[index]),
                        &render_action(task, tpl, ids[index + 1]),
                    )
                }
            };
            let again = justification_check(task, &p, removal_of(*removal));
            ensure(again == *removable, "removability disagrees with the label")?;
            expect_gold(rec, yn(*removable))?;
            expect_question(rec, &question)
        }
        Provenance::JustMcq { plan, pairs, gold, .. } => {
            family(rec, TaskKind::Justification, QType::Mcq)?;
            let (ids, p) = replay_plan(task, &s, plan)?;
            ensure(pairs.len() == 4, "expected four pair options")?;
            for (k, spec) in pairs.iter().enumerate() {
                let first = action_id(task, &spec.first)?;
                let second = action_id(task, &spec.second)?;
                match spec.index {
                    Some(i) => {
                        ensure(i + 1 < ids.len(), "pair index out of bounds")?;
                        ensure(
                            ids[i] == first && ids[i + 1] == second,
                            "pair does not match the plan at its index",
                        )?;
                        ensure(
                            justification_check(task, &p, Removal::Pair(i)) == (k == *gold),
                            "exactly the gold pair must be removable",
                        )?;
                    }
                    None => {
                        ensure(k != *gold, "gold option must name an adjacent pair")?;
                        ensure(
                            adjacent_occurrences(&ids, first, second) == 0,
                            "distractor pair actually occurs consecutively",
                        )?;
                    }
                }
                expect_option(
                    rec,
                    k,
                    &option_text(&format!(
                        "{} and {}",
                        render_action(task, tpl, first),
                        render_action(task, tpl, second),
                    )),
                )?;
            }
            expect_gold_letter(rec, *gold)?;
            expect_question(rec, &stem_just_mcq(&render_plan(task, tpl, &ids)))
        }
        Provenance::LandBool { fact, is_landmark, witness, .. } => {
            family(rec, TaskKind::Landmarks, QType::Bool)?;
            let p = atom_id(task, fact)?;
            if *is_landmark {
                ensure(witness.is_none(), "landmark positives carry no witness")?;
                let lm = landmarks_rhw(task, &s)
                    .map_err(|_| "goal unreachable, landmark analysis refused".to_string())?;
                ensure(lm.contains(p), "fact is not derived as a landmark")?;
            } else {
                let w = witness.as_ref().ok_or("landmark negative needs a witness plan")?;
                check_avoiding_plan(task, &s, w, p)?;
            }
            expect_gold(rec, yn(*is_landmark))?;
            expect_question(rec, &stem_land_bool(&render_fact(task, tpl, p)))
        }
        Provenance::LandMcq { options, witnesses, gold, .. } => {
            family(rec, TaskKind::Landmarks, QType::Mcq)?;
            ensure(options.len() == 4 && witnesses.len() == 4, "expected four fact options")?;
            let lm = landmarks_rhw(task, &s)
                .map_err(|_| "goal unreachable, landmark analysis refused".to_string())?;
            for (k, (sym, witness)) in options.iter().zip(witnesses).enumerate() {
                let p = atom_id(task, sym)?;
                if k == *gold {
                    ensure(witness.is_none(), "landmark positives carry no witness")?;
                    ensure(lm.contains(p), "gold fact is not derived as a landmark")?;
                } else {
                    let w = witness.as_ref().ok_or("landmark negative needs a witness plan")?;
                    check_avoiding_plan(task, &s, w, p)?;
                }
                expect_option(rec, k, &option_text(&render_fact(task, tpl, p)))?;
            }
            expect_gold_letter(rec, *gold)?;
            expect_question(rec, STEM_LAND_MCQ)
        }
    }
}

fn ensure(cond: bool, msg: &str) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.to_string())
    }
}

/// Structural invariants that hold for every record of a question type.
fn check_shape(rec: &QuestionRecord) -> Result<(), String> {
    match rec.qtype {
        QType::Bool => {
            ensure(rec.options.is_empty(), "boolean questions carry no options")?;
            ensure(rec.gold == "yes" || rec.gold == "no", "boolean gold must be yes or no")
        }
        QType::Mcq => {
            ensure(rec.options.len() == 4, "multiple choice needs four options")?;
            let distinct: HashSet<&str> = rec.options.iter().map(String::as_str).collect();
            ensure(distinct.len() == 4, "options must be pairwise distinct")?;
            ensure(
                LETTERS.contains(&rec.gold.as_str()),
                "multiple-choice gold must be a letter",
            )
        }
    }
}

fn family(rec: &QuestionRecord, task: TaskKind, qtype: QType) -> Result<(), String> {
    ensure(
        rec.task == task && rec.qtype == qtype,
        "record family does not match its provenance",
    )
}

pub(crate) fn prov_state(p: &Provenance) -> &[String] {
    match p {
        Provenance::AppBool { state, .. }
        | Provenance::AppMcq { state, .. }
        | Provenance::ProgBool { state, .. }
        | Provenance::ProgMcq { state, .. }
        | Provenance::ReachBool { state, .. }
        | Provenance::ReachMcq { state, .. }
        | Provenance::ActionReachBool { state, .. }
        | Provenance::ActionReachMcq { state, .. }
        | Provenance::ValBool { state, .. }
        | Provenance::ValMcq { state, .. }
        | Provenance::JustBool { state, .. }
        | Provenance::JustMcq { state, .. }
        | Provenance::LandBool { state, .. }
        | Provenance::LandMcq { state, .. } => state,
    }
}

pub(crate) fn atom_id(task: &GroundTask, sym: &str) -> Result<AtomId, String> {
    task.atom_from_text(sym)
        .ok_or_else(|| format!("unknown fact {sym}"))
}

pub(crate) fn atom_ids(task: &GroundTask, syms: &[String]) -> Result<Vec<AtomId>, String> {
    syms.iter().map(|s| atom_id(task, s)).collect()
}

pub(crate) fn action_id(task: &GroundTask, sym: &str) -> Result<ActionId, String> {
    task.action_from_text(sym)
        .ok_or_else(|| format!("unknown action {sym}"))
}

pub(crate) fn action_ids(task: &GroundTask, syms: &[String]) -> Result<Vec<ActionId>, String> {
    syms.iter().map(|s| action_id(task, s)).collect()
}

pub(crate) fn state_of(task: &GroundTask, atoms: &[String]) -> Result<State, String> {
    let mut bits = BitSet::new(task.num_atoms());
    for sym in atoms {
        bits.insert(atom_id(task, sym)?.idx());
    }
    Ok(State::from_bits(bits))
}

fn expect_gold(rec: &QuestionRecord, expected: &str) -> Result<(), String> {
    ensure(rec.gold == expected, "gold answer disagrees with the replay")
}

fn expect_gold_letter(rec: &QuestionRecord, gold: usize) -> Result<(), String> {
    ensure(
        LETTERS.get(gold).copied() == Some(rec.gold.as_str()),
        "gold letter disagrees with the provenance index",
    )
}

fn expect_question(rec: &QuestionRecord, expected: &str) -> Result<(), String> {
    ensure(rec.question == expected, "question text does not match the provenance")
}

fn expect_option(rec: &QuestionRecord, k: usize, expected: &str) -> Result<(), String> {
    ensure(
        rec.options.get(k).map(String::as_str) == Some(expected),
        "option text does not match the provenance",
    )
}

/// Execute a certified action sequence; every step must be applicable.
fn run_actions(task: &GroundTask, s: &State, syms: &[String]) -> Result<State, String> {
    let mut cur = s.clone();
    for sym in syms {
        let a = action_id(task, sym)?;
        cur = progress(task, &cur, a)
            .map_err(|_| format!("certified walk step {sym} is not applicable"))?;
    }
    Ok(cur)
}

/// Replay a goal-reaching plan rooted at `s`.
fn replay_plan(
    task: &GroundTask,
    s: &State,
    syms: &[String],
) -> Result<(Vec<ActionId>, Plan), String> {
    let ids = action_ids(task, syms)?;
    let p = Plan::from_actions(task, s, ids.clone())
        .ok_or("plan is not applicable from the state")?;
    ensure(p.goal_reaching, "plan does not reach the goal")?;
    Ok((ids, p))
}

fn adjacent_occurrences(ids: &[ActionId], first: ActionId, second: ActionId) -> usize {
    if ids.len() < 2 {
        return 0;
    }
    (0..ids.len() - 1)
        .filter(|&k| ids[k] == first && ids[k + 1] == second)
        .count()
}

/// A goal-reaching plan from `s` whose trace never contains `fact`.
fn check_avoiding_plan(
    task: &GroundTask,
    s: &State,
    syms: &[String],
    fact: AtomId,
) -> Result<(), String> {
    let ids = action_ids(task, syms)?;
    let p = Plan::from_actions(task, s, ids)
        .ok_or("witness plan is not applicable from the state")?;
    ensure(p.goal_reaching, "witness plan does not reach the goal")?;
    ensure(
        p.trace.iter().all(|st| !st.contains(fact)),
        "witness plan makes the fact true",
    )
}

/// Mutexes from the caller when available, computed at most once otherwise.
struct LazyMutexes<'a> {
    task: &'a GroundTask,
    provided: Option<&'a MutexSet>,
    computed: Option<MutexSet>,
}

impl LazyMutexes<'_> {
    fn get(&mut self) -> &MutexSet {
        if let Some(m) = self.provided {
            return m;
        }
        self.computed
            .get_or_insert_with(|| compute_mutexes(self.task))
    }
}

/// Verify a reachability certificate; returns whether the conjunction is
/// reachable.
fn check_reach_cert(
    task: &GroundTask,
    mx: &mut LazyMutexes,
    s: &State,
    facts: &[AtomId],
    cert: &ReachCert,
) -> Result<bool, String> {
    ensure(!facts.is_empty(), "empty fact conjunction")?;
    match cert {
        ReachCert::Walk { actions } => {
            let end = run_actions(task, s, actions)?;
            ensure(
                facts.iter().all(|&p| end.contains(p)),
                "walk does not establish the facts",
            )?;
            Ok(true)
        }
        ReachCert::Mutex { pair } => {
            let p = atom_id(task, &pair[0])?;
            let q = atom_id(task, &pair[1])?;
            ensure(
                facts.contains(&p) && facts.contains(&q),
                "mutex pair is not part of the asked facts",
            )?;
            ensure(mx.get().are_mutex(p, q), "pair is not derived as mutex")?;
            Ok(false)
        }
        ReachCert::Static { atom } => {
            let p = atom_id(task, atom)?;
            ensure(facts.contains(&p), "static fact is not part of the asked facts")?;
            ensure(task.is_static(p), "fact is not static")?;
            ensure(!s.contains(p), "static fact already holds, so it stays true")?;
            Ok(false)
        }
        ReachCert::Relaxed { atom } => {
            let p = atom_id(task, atom)?;
            ensure(facts.contains(&p), "fact is not part of the asked facts")?;
            ensure(
                !relaxed_reachable(task, s).atom_reachable(p),
                "fact is relaxed-reachable, certificate is unsound",
            )?;
            Ok(false)
        }
    }
}

/// The text an action-reachability option shows: canonical rendering for real
/// actions, the stored text verbatim for non-actions.
fn areach_text(task: &GroundTask, tpl: &TemplateSet, sym: &str) -> Result<String, String> {
    if sym.starts_with('(') {
        Ok(render_action(task, tpl, action_id(task, sym)?))
    } else {
        Ok(sym.to_string())
    }
}

/// Verify an action-reachability certificate; returns whether the action can
/// eventually be applied.
fn check_areach_cert(
    task: &GroundTask,
    tpl: &TemplateSet,
    mx: &mut LazyMutexes,
    s: &State,
    sym: &str,
    cert: &AReachCert,
) -> Result<bool, String> {
    if !sym.starts_with('(') {
        ensure(
            matches!(cert, AReachCert::NotAnAction),
            "free-text option must carry a non-action certificate",
        )?;
        ensure(
            parse_action_name(task, tpl, sym).is_none(),
            "text unexpectedly parses as a real action",
        )?;
        return Ok(false);
    }
    let a = action_id(task, sym)?;
    let pre = &task.action(a).pre;
    match cert {
        AReachCert::Walk { prefix } => {
            let end = run_actions(task, s, prefix)?;
            ensure(
                is_applicable(task, &end, a),
                "action is not applicable after the certified prefix",
            )?;
            Ok(true)
        }
        AReachCert::PreUnreachable { atom } => {
            let p = atom_id(task, atom)?;
            ensure(pre.contains(p.idx()), "cited fact is not a precondition")?;
            ensure(
                !relaxed_reachable(task, s).atom_reachable(p),
                "precondition is relaxed-reachable, certificate is unsound",
            )?;
            Ok(false)
        }
        AReachCert::PreMutex { pair } => {
            let p = atom_id(task, &pair[0])?;
            let q = atom_id(task, &pair[1])?;
            ensure(
                pre.contains(p.idx()) && pre.contains(q.idx()),
                "cited facts are not both preconditions",
            )?;
            ensure(mx.get().are_mutex(p, q), "pair is not derived as mutex")?;
            Ok(false)
        }
        AReachCert::NotAnAction => Err("real action carries a non-action certificate".to_string()),
    }
}

fn seq_steps(task: &GroundTask, syms: &[String]) -> Result<Vec<SeqStep>, String> {
    syms.iter()
        .map(|sym| {
            if sym.starts_with('(') {
                Ok(SeqStep::Action(action_id(task, sym)?))
            } else {
                Ok(SeqStep::Unresolved(sym.clone()))
            }
        })
        .collect()
}

fn seq_text(task: &GroundTask, tpl: &TemplateSet, steps: &[SeqStep]) -> String {
    let parts: Vec<String> = steps
        .iter()
        .map(|step| match step {
            SeqStep::Action(a) => render_action(task, tpl, *a),
            SeqStep::Unresolved(text) => text.clone(),
        })
        .collect();
    parts.join(", ")
}

fn strongest_case(verdict: &SequenceVerdict) -> ValCase {
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

fn removal_of(spec: RemovalSpec) -> Removal {
    match spec {
        RemovalSpec::Single { index } => Removal::Single(index),
        RemovalSpec::Pair { index } => Removal::Pair(index),
    }
}

#[cfg(test)]
mod tests {
    use super::super::testutil::*;
    use super::*;

    fn some_records(fx: &Fixture) -> Vec<QuestionRecord> {
        let ctx = fx.ctx();
        let b = fx.init_bundle();
        let mut out = Vec::new();
        for kind in TaskKind::ALL {
            for qtype in QType::ALL {
                out.extend(generate_for_state(&ctx, &b, kind, qtype, 3));
            }
        }
        assert!(!out.is_empty());
        out
    }

    #[test]
    fn pristine_records_replay_clean() {
        let fx = Fixture::new("ferry", "p02");
        for rec in some_records(&fx) {
            replay(&fx.task, &fx.tpl, &rec).unwrap_or_else(|e| {
                panic!("{} {:?} {:?}: {e}", rec.id, rec.task, rec.qtype)
            });
        }
    }

    #[test]
    fn tampered_gold_is_rejected() {
        let fx = Fixture::new("ferry", "p02");
        for mut rec in some_records(&fx) {
            rec.gold = match rec.qtype {
                QType::Bool => if rec.gold == "yes" { "no" } else { "yes" }.to_string(),
                QType::Mcq => if rec.gold == "A" { "B" } else { "A" }.to_string(),
            };
            assert!(
                replay(&fx.task, &fx.tpl, &rec).is_err(),
                "flipped gold accepted for {:?} {:?}",
                rec.task,
                rec.qtype
            );
        }
    }

    #[test]
    fn tampered_option_text_is_rejected() {
        let fx = Fixture::new("ferry", "p02");
        for mut rec in some_records(&fx) {
            if rec.qtype != QType::Mcq {
                continue;
            }
            rec.options[2] = format!("{} indeed", rec.options[2]);
            assert!(replay(&fx.task, &fx.tpl, &rec).is_err());
        }
    }

    #[test]
    fn tampered_state_is_rejected() {
        let fx = Fixture::new("ferry", "p02");
        let mut seen = 0;
        for mut rec in some_records(&fx) {
            // dropping a dynamic atom from the state changes the context text
            let state = match &mut rec.provenance {
                Provenance::AppBool { state, .. } => state,
                _ => continue,
            };
            let Some(pos) = state
                .iter()
                .position(|s| fx.task.atom_from_text(s).is_some_and(|p| !fx.task.is_static(p)))
            else {
                continue;
            };
            state.remove(pos);
            seen += 1;
            assert!(replay(&fx.task, &fx.tpl, &rec).is_err());
        }
        assert!(seen > 0);
    }
}
