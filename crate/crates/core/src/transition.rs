//! Exact STRIPS semantics: applicability, progression, goal tests, and
//! sequence application over a ground task.

use crate::bitset::BitSet;
use crate::ground::{ActionId, AtomId, GroundTask};
use thiserror::Error;

/// Immutable world state: the set of atoms currently true.
///
/// Always includes the task's static-true atoms and never a static-false one;
/// every constructor below starts from a state that satisfies this and
/// progression preserves it (no action touches a static).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct State(BitSet);

impl State {
    pub fn initial(task: &GroundTask) -> State {
        State(task.init.clone())
    }

    pub fn from_bits(bits: BitSet) -> State {
        State(bits)
    }

    pub fn bits(&self) -> &BitSet {
        &self.0
    }

    pub fn contains(&self, atom: AtomId) -> bool {
        self.0.contains(atom.idx())
    }

    /// True atoms in id order.
    pub fn atoms(&self) -> impl Iterator<Item = AtomId> + '_ {
        self.0.iter().map(|i| AtomId(i as u32))
    }
}

#[derive(Debug, Error)]
#[error("action is not applicable: {missing:?} unsatisfied")]
pub struct NotApplicable {
    /// Precondition atoms false in the state, in id order.
    pub missing: Vec<AtomId>,
}

pub fn is_applicable(task: &GroundTask, s: &State, a: ActionId) -> bool {
    task.action(a).pre.is_subset_of(s.bits())
}

/// All applicable actions, in action-id order.
pub fn applicable_actions(task: &GroundTask, s: &State) -> Vec<ActionId> {
    task.actions
        .iter()
        .filter(|a| a.pre.is_subset_of(s.bits()))
        .map(|a| a.id)
        .collect()
}

/// Successor state `(s \ del) ∪ add`.
///
/// Progressing an inapplicable action is an error, not a no-op; the error
/// lists the missing precondition atoms.
pub fn progress(task: &GroundTask, s: &State, a: ActionId) -> Result<State, NotApplicable> {
    let act = task.action(a);
    if !act.pre.is_subset_of(s.bits()) {
        let mut missing = act.pre.clone();
        missing.difference_with(s.bits());
        return Err(NotApplicable {
            missing: missing.iter().map(|i| AtomId(i as u32)).collect(),
        });
    }
    let mut bits = s.bits().clone();
    bits.difference_with(&act.del);
    bits.union_with(&act.add);
    Ok(State(bits))
}

pub fn is_goal(task: &GroundTask, s: &State) -> bool {
    task.goal.is_subset_of(s.bits())
}

/// The four-way fact partition induced by applying `a` in `s`.
///
/// With `t = progress(s, a)`, the universe splits into atoms true in both
/// states, true only before, true only after, and true in neither.
#[derive(Debug, Clone)]
pub struct FactPartition {
    pub true_in_both: BitSet,
    pub true_before_only: BitSet,
    pub true_after_only: BitSet,
    pub false_in_both: BitSet,
}

pub fn fact_partition(
    task: &GroundTask,
    s: &State,
    a: ActionId,
) -> Result<FactPartition, NotApplicable> {
    let t = progress(task, s, a)?;
    let mut true_in_both = s.bits().clone();
    true_in_both.intersect_with(t.bits());
    let mut true_before_only = s.bits().clone();
    true_before_only.difference_with(t.bits());
    let mut true_after_only = t.bits().clone();
    true_after_only.difference_with(s.bits());
    let mut false_in_both = BitSet::new(task.num_atoms());
    for i in 0..task.num_atoms() {
        if !s.bits().contains(i) && !t.bits().contains(i) {
            false_in_both.insert(i);
        }
    }
    Ok(FactPartition {
        true_in_both,
        true_before_only,
        true_after_only,
        false_in_both,
    })
}

/// One element of a candidate action sequence. Unresolvable action names are
/// data for the validation task, not errors, so they travel as steps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum SeqStep {
    Action(ActionId),
    /// A name that resolved to no ground action; the text is kept for
    /// diagnostics.
    Unresolved(String),
}

/// Outcome of applying a candidate sequence.
///
/// The flags form an implication chain: `goal_reaching ⇒ applicable ⇒ valid`.
/// `failure_index` is the position of the first failing step, or the sequence
/// length when every step executed but the final state misses the goal; it is
/// `None` exactly when all three flags are true.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SequenceVerdict {
    pub valid: bool,
    pub applicable: bool,
    pub goal_reaching: bool,
    pub failure_index: Option<usize>,
}

#[derive(Debug, Clone)]
pub struct SequenceOutcome {
    pub verdict: SequenceVerdict,
    /// Final state, present iff the whole sequence executed.
    pub final_state: Option<State>,
    /// States visited up to and including the last successful step.
    pub trace: Vec<State>,
}

pub fn apply_sequence(task: &GroundTask, s: &State, steps: &[SeqStep]) -> SequenceOutcome {
    let valid = steps.iter().all(|st| matches!(st, SeqStep::Action(_)));
    let mut trace = vec![s.clone()];
    let mut walk_failure: Option<usize> = None;
    for (i, step) in steps.iter().enumerate() {
        let SeqStep::Action(a) = step else {
            walk_failure = Some(i);
            break;
        };
        match progress(task, trace.last().unwrap(), *a) {
            Ok(t) => trace.push(t),
            Err(_) => {
                walk_failure = Some(i);
                break;
            }
        }
    }
    let executed_all = walk_failure.is_none();
    let applicable = valid && executed_all;
    let final_state = if executed_all {
        Some(trace.last().unwrap().clone())
    } else {
        None
    };
    let goal_reaching = applicable && is_goal(task, final_state.as_ref().unwrap());
    let failure_index = match walk_failure {
        Some(i) => Some(i),
        None if !goal_reaching => Some(steps.len()),
        None => None,
    };
    SequenceOutcome {
        verdict: SequenceVerdict {
            valid,
            applicable,
            goal_reaching,
            failure_index,
        },
        final_state,
        trace,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{ground_task, GroundCfg};
    use crate::pddl::{parse_domain, parse_problem};

    fn load(dir: &str, prob: &str) -> GroundTask {
        let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/domains/");
        let dom = std::fs::read_to_string(format!("{root}{dir}/domain.pddl")).unwrap();
        let pb = std::fs::read_to_string(format!("{root}{dir}/{prob}.pddl")).unwrap();
        let domain = parse_domain(&dom).unwrap();
        let problem = parse_problem(&pb, &domain).unwrap();
        ground_task(&domain, &problem, &GroundCfg::default()).unwrap()
    }

    fn aid(t: &GroundTask, text: &str) -> ActionId {
        t.action_from_text(text)
            .unwrap_or_else(|| panic!("no such action {text}"))
    }

    #[test]
    fn ferry_applicable_set_at_init() {
        // ferry at l0 with c1 on board: it can sail away or debark c1
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        let apps: Vec<String> = applicable_actions(&t, &s)
            .into_iter()
            .map(|a| t.action_text(a))
            .collect();
        assert_eq!(apps, vec!["(debark c1 l0)", "(sail l0 l1)"]);
        assert!(!is_applicable(&t, &s, aid(&t, "(sail l1 l0)")));
        assert!(is_applicable(&t, &s, aid(&t, "(debark c1 l0)")));
    }

    #[test]
    fn ferry_progress_moves_the_ferry() {
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        let next = progress(&t, &s, aid(&t, "(sail l0 l1)")).unwrap();
        let at = |txt: &str| t.atom_from_text(txt).unwrap();
        assert!(next.contains(at("(at-ferry l1)")));
        assert!(!next.contains(at("(at-ferry l0)")));
        assert!(next.contains(at("(on c1)")));
        assert!(next.contains(at("(at c0 l0)")));
    }

    #[test]
    fn progress_rejects_inapplicable_with_missing_atoms() {
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        let err = progress(&t, &s, aid(&t, "(sail l1 l0)")).unwrap_err();
        let missing: Vec<String> = err.missing.iter().map(|a| t.atom_text(*a)).collect();
        assert_eq!(missing, vec!["(at-ferry l1)"]);
    }

    #[test]
    fn blocksworld_pick_up_effects() {
        // all blocks on the table, so pick-up block_1 is applicable
        let t = load("blocksworld", "p03");
        let s = State::initial(&t);
        let next = progress(&t, &s, aid(&t, "(pick-up block_1)")).unwrap();
        let at = |txt: &str| t.atom_from_text(txt).unwrap();
        assert!(next.contains(at("(holding block_1)")));
        assert!(!next.contains(at("(handempty)")));
        assert!(!next.contains(at("(ontable block_1)")));
        assert!(!next.contains(at("(clear block_1)")));
    }

    #[test]
    fn goal_test_matches_goal_atoms() {
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        assert!(!is_goal(&t, &s));
        // debark c1, board c0, sail to l1, debark c0 reaches the goal
        let plan = ["(debark c1 l0)", "(board c0 l0)", "(sail l0 l1)", "(debark c0 l1)"];
        let steps: Vec<SeqStep> = plan.iter().map(|p| SeqStep::Action(aid(&t, p))).collect();
        let out = apply_sequence(&t, &s, &steps);
        assert!(out.verdict.goal_reaching);
        assert_eq!(out.verdict.failure_index, None);
        assert_eq!(out.trace.len(), 5);
        assert!(is_goal(&t, out.final_state.as_ref().unwrap()));
    }

    #[test]
    fn fact_partition_covers_universe() {
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        let p = fact_partition(&t, &s, aid(&t, "(sail l0 l1)")).unwrap();
        let at = |txt: &str| t.atom_from_text(txt).unwrap().idx();
        assert!(p.true_before_only.contains(at("(at-ferry l0)")));
        assert!(p.true_after_only.contains(at("(at-ferry l1)")));
        assert!(p.true_in_both.contains(at("(on c1)")));
        assert!(p.false_in_both.contains(at("(at c0 l1)")));

        let total =
            p.true_in_both.count() + p.true_before_only.count() + p.true_after_only.count()
                + p.false_in_both.count();
        assert_eq!(total, t.num_atoms());
        assert!(!p.true_in_both.intersects(&p.true_before_only));
        assert!(!p.true_in_both.intersects(&p.true_after_only));
        assert!(!p.true_in_both.intersects(&p.false_in_both));
        assert!(!p.true_before_only.intersects(&p.true_after_only));
        assert!(!p.true_before_only.intersects(&p.false_in_both));
        assert!(!p.true_after_only.intersects(&p.false_in_both));
    }

    #[test]
    fn sequence_with_unresolved_name_is_invalid() {
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        let steps = vec![
            SeqStep::Action(aid(&t, "(debark c1 l0)")),
            SeqStep::Unresolved("drive from l0 to l1".into()),
        ];
        let out = apply_sequence(&t, &s, &steps);
        assert!(!out.verdict.valid);
        assert!(!out.verdict.applicable);
        assert!(!out.verdict.goal_reaching);
        assert_eq!(out.verdict.failure_index, Some(1));
        assert!(out.final_state.is_none());
        assert_eq!(out.trace.len(), 2);
    }

    #[test]
    fn sequence_inapplicable_midway() {
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        let steps = vec![SeqStep::Action(aid(&t, "(sail l1 l0)"))];
        let out = apply_sequence(&t, &s, &steps);
        assert!(out.verdict.valid);
        assert!(!out.verdict.applicable);
        assert_eq!(out.verdict.failure_index, Some(0));
    }

    #[test]
    fn valid_applicable_but_not_goal_reaching() {
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        let steps = vec![SeqStep::Action(aid(&t, "(sail l0 l1)"))];
        let out = apply_sequence(&t, &s, &steps);
        assert!(out.verdict.valid && out.verdict.applicable);
        assert!(!out.verdict.goal_reaching);
        assert_eq!(out.verdict.failure_index, Some(1));
    }

    #[test]
    fn empty_sequence_on_satisfied_goal() {
        let dom = parse_domain(
            "(define (domain d) (:requirements :strips)
               (:predicates (p ?x) (q ?x))
               (:action touch :parameters (?x)
                 :precondition (and (p ?x)) :effect (and (q ?x))))",
        )
        .unwrap();
        let prob = parse_problem(
            "(define (problem pr) (:domain d) (:objects a)
               (:init (p a)) (:goal (and (p a))))",
            &dom,
        )
        .unwrap();
        let t = ground_task(&dom, &prob, &GroundCfg::default()).unwrap();
        let s = State::initial(&t);
        let out = apply_sequence(&t, &s, &[]);
        assert!(out.verdict.valid && out.verdict.applicable && out.verdict.goal_reaching);
        assert_eq!(out.verdict.failure_index, None);
    }

    #[test]
    fn statics_survive_every_action() {
        let t = load("gripper", "p01");
        let s = State::initial(&t);
        for a in applicable_actions(&t, &s) {
            let next = progress(&t, &s, a).unwrap();
            assert!(t.statics_true.is_subset_of(next.bits()));
            assert!(!t.statics_false.intersects(next.bits()));
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        // random reachable (s, a) pairs come from seeded walks over the
        // bundled instances
        fn walk(task: &GroundTask, choices: &[u16]) -> Vec<(State, ActionId)> {
            let mut pairs = Vec::new();
            let mut s = State::initial(task);
            for &c in choices {
                let apps = applicable_actions(task, &s);
                if apps.is_empty() {
                    break;
                }
                let a = apps[c as usize % apps.len()];
                pairs.push((s.clone(), a));
                s = progress(task, &s, a).unwrap();
            }
            pairs
        }

        proptest! {
            #[test]
            fn frame_property_holds(
                dir in prop::sample::select(vec!["ferry", "blocksworld", "gripper", "swap"]),
                choices in prop::collection::vec(any::<u16>(), 0..12),
            ) {
                let t = load(dir, "p01");
                for (s, a) in walk(&t, &choices) {
                    let next = progress(&t, &s, a).unwrap();
                    let act = t.action(a);
                    for i in 0..t.num_atoms() {
                        if !act.add.contains(i) && !act.del.contains(i) {
                            prop_assert_eq!(s.bits().contains(i), next.bits().contains(i));
                        }
                    }
                    prop_assert!(t.statics_true.is_subset_of(next.bits()));
                    prop_assert!(!t.statics_false.intersects(next.bits()));
                }
            }

            #[test]
            fn partition_is_a_partition(
                dir in prop::sample::select(vec!["ferry", "blocksworld", "gripper", "swap"]),
                choices in prop::collection::vec(any::<u16>(), 0..12),
            ) {
                let t = load(dir, "p01");
                for (s, a) in walk(&t, &choices) {
                    let p = fact_partition(&t, &s, a).unwrap();
                    let sets = [
                        &p.true_in_both,
                        &p.true_before_only,
                        &p.true_after_only,
                        &p.false_in_both,
                    ];
                    let total: usize = sets.iter().map(|b| b.count()).sum();
                    prop_assert_eq!(total, t.num_atoms());
                    for i in 0..sets.len() {
                        for j in i + 1..sets.len() {
                            prop_assert!(!sets[i].intersects(sets[j]));
                        }
                    }
                }
            }

            #[test]
            fn sequence_concatenation_composes(
                choices in prop::collection::vec(any::<u16>(), 2..10),
                split in 1usize..8,
            ) {
                let t = load("ferry", "p02");
                let pairs = walk(&t, &choices);
                prop_assume!(!pairs.is_empty());
                let steps: Vec<SeqStep> =
                    pairs.iter().map(|(_, a)| SeqStep::Action(*a)).collect();
                let s0 = State::initial(&t);
                let whole = apply_sequence(&t, &s0, &steps);
                let cut = split.min(steps.len());
                let first = apply_sequence(&t, &s0, &steps[..cut]);
                let mid = first.final_state.unwrap();
                let second = apply_sequence(&t, &mid, &steps[cut..]);
                prop_assert_eq!(whole.final_state.unwrap(), second.final_state.unwrap());
            }
        }
    }
}
