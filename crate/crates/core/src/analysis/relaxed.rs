//! Delete-relaxed reachability: the least fixpoint of applying add effects
//! while ignoring deletes. Cheap, and sound in the negative direction: an
//! atom outside the fixpoint is unreachable in the real task.

use crate::bitset::BitSet;
use crate::ground::{ActionId, AtomId, GroundTask};
use crate::transition::State;

pub struct RelaxedReachability {
    /// Fixpoint atom set; always a superset of the start state.
    pub atoms: BitSet,
    /// Actions whose precondition lies inside the fixpoint.
    pub actions: BitSet,
}

impl RelaxedReachability {
    pub fn atom_reachable(&self, p: AtomId) -> bool {
        self.atoms.contains(p.idx())
    }

    pub fn action_reachable(&self, a: ActionId) -> bool {
        self.actions.contains(a.idx())
    }
}

pub fn relaxed_reachable(task: &GroundTask, s: &State) -> RelaxedReachability {
    relaxed_fixpoint(task, s, |_| true)
}

/// Fixpoint restricted to actions passing `keep`; used by landmark
/// backchaining to exclude the achievers of one atom.
pub(crate) fn relaxed_fixpoint(
    task: &GroundTask,
    s: &State,
    keep: impl Fn(&crate::ground::GroundAction) -> bool,
) -> RelaxedReachability {
    let mut atoms = s.bits().clone();
    let mut actions = BitSet::new(task.num_actions());
    let mut changed = true;
    while changed {
        changed = false;
        for a in &task.actions {
            if actions.contains(a.id.idx()) || !keep(a) {
                continue;
            }
            if a.pre.is_subset_of(&atoms) {
                actions.insert(a.id.idx());
                // applicability depends only on atoms, so another pass is
                // needed only when the atom set actually grew
                let before = atoms.count();
                atoms.union_with(&a.add);
                if atoms.count() != before {
                    changed = true;
                }
            }
        }
    }
    RelaxedReachability { atoms, actions }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::oracle::oracle_bfs;
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

    #[test]
    fn ferry_relaxed_fixpoint_from_init() {
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        let rr = relaxed_reachable(&t, &s);
        let at = |txt: &str| t.atom_from_text(txt).unwrap();
        // board-after-debark chains reach everything dynamic
        assert!(rr.atom_reachable(at("(at c0 l1)")));
        assert!(rr.atom_reachable(at("(empty-ferry)")));
        assert!(rr.atom_reachable(at("(on c0)")));
        // statics never become true by relaxation
        assert!(!rr.atom_reachable(at("(location c0)")));
        assert!(!rr.atom_reachable(at("(car l1)")));
        assert!(s.bits().is_subset_of(&rr.atoms));
        // every ground action of this instance fires in the relaxation
        assert_eq!(rr.actions.count(), t.num_actions());
    }

    #[test]
    fn fixpoint_state_stays_fixed() {
        // no applicable actions: a state with the ferry nowhere
        let t = load("ferry", "p01");
        let mut bits = crate::bitset::BitSet::new(t.num_atoms());
        bits.union_with(&t.statics_true);
        let s = State::from_bits(bits);
        let rr = relaxed_reachable(&t, &s);
        assert_eq!(rr.atoms, s.bits().clone());
        assert_eq!(rr.actions.count(), 0);
    }

    #[test]
    fn relaxation_over_approximates_oracle() {
        for (dir, prob) in [("ferry", "p01"), ("blocksworld", "p01"), ("gripper", "p02")] {
            let t = load(dir, prob);
            let s = State::initial(&t);
            let rr = relaxed_reachable(&t, &s);
            let idx = oracle_bfs(&t, &s, 1_000_000);
            assert!(!idx.is_truncated());
            for i in 0..t.num_atoms() {
                let p = crate::ground::AtomId(i as u32);
                if idx.atom_reachable(p) {
                    assert!(rr.atom_reachable(p), "{} {}", dir, t.atom_text(p));
                }
            }
        }
    }

    #[test]
    fn unreachable_goal_detected() {
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
        let rr = relaxed_reachable(&t, &State::initial(&t));
        assert!(!t.goal.is_subset_of(&rr.atoms));
    }
}
