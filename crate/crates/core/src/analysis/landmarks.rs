//! Fact landmarks via backchaining over the delete relaxation, plus the
//! complementary negative evidence drawn from plan traces.
//!
//! A landmark of state s is a fact that holds at some point along every plan
//! from s. The computation here backchains from unsatisfied goal atoms using
//! first-achiever analysis: an atom q can first be achieved only by actions
//! whose precondition is relaxed-reachable without q's achievers, and any
//! fact required by all such actions must precede q on every plan. Every real
//! plan is also a relaxed plan, so the result is sound for the original task.
//! Facts already true in s are trivially covered at the trace start and are
//! excluded from the set.

use crate::analysis::relaxed::{relaxed_fixpoint, relaxed_reachable};
use crate::bitset::BitSet;
use crate::ground::{AtomId, GroundTask};
use crate::sample::Plan;
use crate::transition::State;
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Error)]
#[error("goal is not relaxed-reachable from the state; every fact would be a vacuous landmark")]
pub struct GoalUnreachable;

pub struct LandmarkSet {
    /// Landmark atoms, none of which are true in the queried state.
    pub landmarks: BitSet,
    /// For each non-goal landmark, one atom it was backchained from: the
    /// landmark must hold before that atom can first be achieved. Goal-atom
    /// landmarks have no entry; chains following `support` always end at one.
    pub support: BTreeMap<AtomId, AtomId>,
    pub method: &'static str,
}

impl LandmarkSet {
    pub fn contains(&self, p: AtomId) -> bool {
        self.landmarks.contains(p.idx())
    }

    pub fn atoms(&self) -> Vec<AtomId> {
        self.landmarks.iter().map(|i| AtomId(i as u32)).collect()
    }
}

pub fn landmarks_rhw(task: &GroundTask, s: &State) -> Result<LandmarkSet, GoalUnreachable> {
    let rr = relaxed_reachable(task, s);
    if !task.goal.is_subset_of(&rr.atoms) {
        return Err(GoalUnreachable);
    }

    let mut landmarks = BitSet::new(task.num_atoms());
    let mut support = BTreeMap::new();
    let mut queue: Vec<usize> = Vec::new();
    for g in task.goal.iter() {
        if !s.bits().contains(g) {
            landmarks.insert(g);
            queue.push(g);
        }
    }

    while let Some(q) = queue.pop() {
        // first achievers: achievers of q applicable in the fixpoint that
        // excludes all achievers of q
        let restricted = relaxed_fixpoint(task, s, |a| !a.add.contains(q));
        let mut intersection: Option<BitSet> = None;
        for a in &task.actions {
            if !a.add.contains(q) || !a.pre.is_subset_of(&restricted.atoms) {
                continue;
            }
            match &mut intersection {
                None => intersection = Some(a.pre.clone()),
                Some(acc) => acc.intersect_with(&a.pre),
            }
        }
        let Some(shared) = intersection else { continue };
        for p in shared.iter() {
            if s.bits().contains(p) || landmarks.contains(p) {
                continue;
            }
            landmarks.insert(p);
            support.insert(AtomId(p as u32), AtomId(q as u32));
            queue.push(p);
        }
    }

    Ok(LandmarkSet {
        landmarks,
        support,
        method: "rhw",
    })
}

/// Atoms that are provably not landmarks of `s` because some goal-reaching
/// plan's trace never contains them. The witness plans must be goal-reaching
/// and rooted at `s`.
pub fn landmark_negatives(task: &GroundTask, s: &State, plans: &[Plan]) -> BitSet {
    let mut negatives = BitSet::new(task.num_atoms());
    for plan in plans {
        assert!(plan.goal_reaching, "landmark negatives need goal-reaching witnesses");
        assert_eq!(plan.trace.first().map(|t| t.bits()), Some(s.bits()));
        let mut covered = BitSet::new(task.num_atoms());
        for st in &plan.trace {
            covered.union_with(st.bits());
        }
        for i in 0..task.num_atoms() {
            if !covered.contains(i) {
                negatives.insert(i);
            }
        }
    }
    negatives
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::oracle::oracle_bfs;
    use crate::ground::{ground_task, GroundCfg, GroundTask};
    use crate::pddl::{parse_domain, parse_problem};
    use crate::sample::Plan;

    fn load(dir: &str, prob: &str) -> GroundTask {
        let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/domains/");
        let dom = std::fs::read_to_string(format!("{root}{dir}/domain.pddl")).unwrap();
        let pb = std::fs::read_to_string(format!("{root}{dir}/{prob}.pddl")).unwrap();
        let domain = parse_domain(&dom).unwrap();
        let problem = parse_problem(&pb, &domain).unwrap();
        ground_task(&domain, &problem, &GroundCfg::default()).unwrap()
    }

    #[test]
    fn ferry_landmarks_from_init() {
        // moving c0 across requires boarding it, an empty ferry, and the
        // ferry reaching l1
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        let lms = landmarks_rhw(&t, &s).unwrap();
        let at = |txt: &str| t.atom_from_text(txt).unwrap();
        assert!(lms.contains(at("(at c0 l1)")));
        assert!(lms.contains(at("(on c0)")));
        assert!(lms.contains(at("(at-ferry l1)")));
        assert!(lms.contains(at("(empty-ferry)")));
        // facts already true in s are never reported
        assert!(!lms.contains(at("(at-ferry l0)")));
        assert!(!lms.contains(at("(on c1)")));
        assert_eq!(lms.atoms().len(), 4);
    }

    #[test]
    fn landmarks_sound_against_exhaustive_plans() {
        for (dir, prob) in [("ferry", "p01"), ("blocksworld", "p01"), ("swap", "p01")] {
            let t = load(dir, prob);
            let s = State::initial(&t);
            let lms = landmarks_rhw(&t, &s).unwrap();
            let idx = oracle_bfs(&t, &s, 1_000_000);
            assert!(!idx.is_truncated());
            let shortest = idx.shortest_goal_dist().unwrap() as usize;
            let plans = idx.enumerate_plans(shortest + 2, 500_000).unwrap();
            assert!(!plans.is_empty());
            for actions in plans {
                let plan = Plan::from_actions(&t, &s, actions).unwrap();
                let mut covered = BitSet::new(t.num_atoms());
                for st in &plan.trace {
                    covered.union_with(st.bits());
                }
                for lm in lms.atoms() {
                    assert!(
                        covered.contains(lm.idx()),
                        "{dir}: {} missing from a plan trace",
                        t.atom_text(lm)
                    );
                }
            }
        }
    }

    #[test]
    fn satisfied_goal_has_no_landmarks() {
        let dom = parse_domain(
            "(define (domain d) (:requirements :strips)
               (:predicates (p ?x) (q ?x))
               (:action set-q :parameters (?x)
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
        let lms = landmarks_rhw(&t, &State::initial(&t)).unwrap();
        assert!(lms.atoms().is_empty());
    }

    #[test]
    fn unreachable_goal_is_an_error() {
        let dom = parse_domain(
            "(define (domain d) (:requirements :strips)
               (:predicates (p ?x) (q ?x))
               (:action set-q :parameters (?x)
                 :precondition (and (p ?x)) :effect (and (q ?x))))",
        )
        .unwrap();
        let prob = parse_problem(
            "(define (problem pr) (:domain d) (:objects a b)
               (:init (p a)) (:goal (and (q b))))",
            &dom,
        )
        .unwrap();
        let t = ground_task(&dom, &prob, &GroundCfg::default()).unwrap();
        assert!(landmarks_rhw(&t, &State::initial(&t)).is_err());
    }

    #[test]
    fn negatives_from_the_shortest_plan() {
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        let idx = oracle_bfs(&t, &s, 1_000_000);
        let plan = Plan::from_actions(&t, &s, idx.shortest_plan().unwrap()).unwrap();
        let neg = landmark_negatives(&t, &s, &[plan]);
        let at = |txt: &str| t.atom_from_text(txt).unwrap();
        // the only dynamic fact the shortest plan never visits
        assert!(neg.contains(at("(at c1 l1)").idx()));
        // statics-false are never visited, statics-true always are
        assert!(neg.contains(at("(location c0)").idx()));
        assert!(!neg.contains(at("(car c0)").idx()));
        // and facts on the trace are excluded
        assert!(!neg.contains(at("(at c0 l1)").idx()));
        assert!(!neg.contains(at("(empty-ferry)").idx()));
        assert!(!neg.contains(at("(at c1 l0)").idx()));
    }

    #[test]
    fn negatives_never_overlap_landmarks() {
        for (dir, prob) in [("ferry", "p01"), ("gripper", "p02"), ("swap", "p01")] {
            let t = load(dir, prob);
            let s = State::initial(&t);
            let lms = landmarks_rhw(&t, &s).unwrap();
            let idx = oracle_bfs(&t, &s, 1_000_000);
            let shortest = idx.shortest_goal_dist().unwrap() as usize;
            let plans: Vec<Plan> = idx
                .enumerate_plans(shortest + 1, 100_000)
                .unwrap()
                .into_iter()
                .map(|a| Plan::from_actions(&t, &s, a).unwrap())
                .collect();
            let neg = landmark_negatives(&t, &s, &plans);
            assert!(!neg.intersects(&lms.landmarks), "{dir}");
        }
    }
}
