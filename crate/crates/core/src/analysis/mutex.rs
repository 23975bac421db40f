//! Pairwise reachability invariants (h²-style): which atom pairs can never
//! be true together in any state reachable from the initial state.
//!
//! The fixpoint tracks reachability of single atoms and of unordered pairs.
//! An action fires once its precondition is pairwise-reachable; its add
//! effects then become reachable together with each other and with every
//! reachable atom that survives the action and is pairwise-consistent with
//! the precondition. Pairs never produced by this process are mutex. The
//! analysis is sound (a reported pair really never co-occurs) but not
//! complete.

use crate::bitset::BitSet;
use crate::ground::{AtomId, GroundTask};

pub struct MutexSet {
    n: usize,
    /// Atoms reachable individually.
    reach1: BitSet,
    /// Unordered pairs reachable together, at `min * n + max`.
    reach2: BitSet,
}

impl MutexSet {
    /// True when the pair is never co-true in any reachable state. Pairs
    /// involving an individually-unreachable atom are vacuously mutex.
    pub fn are_mutex(&self, p: AtomId, q: AtomId) -> bool {
        p != q && !self.pair_reachable(p.idx(), q.idx())
    }

    pub fn atom_reachable(&self, p: AtomId) -> bool {
        self.reach1.contains(p.idx())
    }

    fn pair_reachable(&self, p: usize, q: usize) -> bool {
        if p == q {
            return self.reach1.contains(p);
        }
        self.reach2.contains(p.min(q) * self.n + p.max(q))
    }

    /// Mutex pairs between individually-reachable atoms, ordered, p < q.
    pub fn reachable_mutex_pairs(&self) -> Vec<(AtomId, AtomId)> {
        let mut out = Vec::new();
        for p in 0..self.n {
            if !self.reach1.contains(p) {
                continue;
            }
            for q in p + 1..self.n {
                if self.reach1.contains(q) && !self.reach2.contains(p * self.n + q) {
                    out.push((AtomId(p as u32), AtomId(q as u32)));
                }
            }
        }
        out
    }
}

pub fn compute_mutexes(task: &GroundTask) -> MutexSet {
    let n = task.num_atoms();
    let mut m = MutexSet {
        n,
        reach1: task.init.clone(),
        reach2: BitSet::new(n * n),
    };
    let init: Vec<usize> = task.init.iter().collect();
    for (i, &p) in init.iter().enumerate() {
        for &q in &init[i + 1..] {
            m.reach2.insert(p * n + q);
        }
    }

    let mut changed = true;
    while changed {
        changed = false;
        for a in &task.actions {
            if !a.pre.is_subset_of(&m.reach1) {
                continue;
            }
            let pre: Vec<usize> = a.pre.iter().collect();
            let pre_consistent = pre
                .iter()
                .enumerate()
                .all(|(i, &p)| pre[i + 1..].iter().all(|&q| m.pair_reachable(p, q)));
            if !pre_consistent {
                continue;
            }
            let add: Vec<usize> = a.add.iter().collect();
            for &p in &add {
                if !m.reach1.contains(p) {
                    m.reach1.insert(p);
                    changed = true;
                }
            }
            for (i, &p) in add.iter().enumerate() {
                for &q in &add[i + 1..] {
                    if !m.pair_reachable(p, q) {
                        m.reach2.insert(p.min(q) * n + p.max(q));
                        changed = true;
                    }
                }
            }
            // persistence: a reachable atom survives the action if it is not
            // deleted and is pairwise-consistent with the whole precondition
            for r in m.reach1.clone().iter() {
                if a.del.contains(r) || a.add.contains(r) {
                    continue;
                }
                if !pre.iter().all(|&p| m.pair_reachable(p, r)) {
                    continue;
                }
                for &p in &add {
                    if p != r && !m.pair_reachable(p, r) {
                        m.reach2.insert(p.min(r) * n + p.max(r));
                        changed = true;
                    }
                }
            }
        }
    }
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analysis::oracle::oracle_bfs;
    use crate::ground::{ground_task, GroundCfg};
    use crate::pddl::{parse_domain, parse_problem};
    use crate::transition::State;

    fn load(dir: &str, prob: &str) -> GroundTask {
        let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/domains/");
        let dom = std::fs::read_to_string(format!("{root}{dir}/domain.pddl")).unwrap();
        let pb = std::fs::read_to_string(format!("{root}{dir}/{prob}.pddl")).unwrap();
        let domain = parse_domain(&dom).unwrap();
        let problem = parse_problem(&pb, &domain).unwrap();
        ground_task(&domain, &problem, &GroundCfg::default()).unwrap()
    }

    #[test]
    fn ferry_known_mutexes() {
        let t = load("ferry", "p01");
        let m = compute_mutexes(&t);
        let at = |txt: &str| t.atom_from_text(txt).unwrap();
        assert!(m.are_mutex(at("(empty-ferry)"), at("(on c0)")));
        assert!(m.are_mutex(at("(empty-ferry)"), at("(on c1)")));
        assert!(m.are_mutex(at("(on c0)"), at("(on c1)")));
        assert!(m.are_mutex(at("(at-ferry l0)"), at("(at-ferry l1)")));
        assert!(m.are_mutex(at("(at c0 l0)"), at("(at c0 l1)")));
        assert!(m.are_mutex(at("(on c0)"), at("(at c0 l0)")));
        // co-occurring facts are not mutex
        assert!(!m.are_mutex(at("(on c1)"), at("(at c0 l0)")));
        assert!(!m.are_mutex(at("(at c0 l0)"), at("(at c1 l0)")));
    }

    #[test]
    fn swap_one_item_per_slot() {
        let t = load("swap", "p01");
        let m = compute_mutexes(&t);
        let at = |txt: &str| t.atom_from_text(txt).unwrap();
        // one agent holds one item and one item has one holder
        assert!(m.are_mutex(at("(assigned alice frisbee)"), at("(assigned alice guitar)")));
        assert!(m.are_mutex(at("(assigned alice frisbee)"), at("(assigned carol frisbee)")));
        assert!(!m.are_mutex(at("(assigned alice frisbee)"), at("(assigned carol guitar)")));
    }

    #[test]
    fn pairs_true_in_init_never_reported() {
        let t = load("gripper", "p01");
        let m = compute_mutexes(&t);
        let init: Vec<AtomId> = State::initial(&t).atoms().collect();
        for (i, &p) in init.iter().enumerate() {
            for &q in &init[i + 1..] {
                assert!(!m.are_mutex(p, q));
            }
        }
    }

    #[test]
    fn mutexes_sound_against_oracle() {
        for (dir, prob) in [("ferry", "p01"), ("blocksworld", "p01"), ("swap", "p01")] {
            let t = load(dir, prob);
            let m = compute_mutexes(&t);
            let idx = oracle_bfs(&t, &State::initial(&t), 1_000_000);
            assert!(!idx.is_truncated());
            for (p, q) in m.reachable_mutex_pairs() {
                assert!(
                    !idx.pair_co_reachable(p, q),
                    "{dir}: {} and {} reported mutex but co-reachable",
                    t.atom_text(p),
                    t.atom_text(q)
                );
            }
        }
    }

    #[test]
    fn unreachable_atom_pairs_are_vacuously_mutex() {
        let dom = parse_domain(
            "(define (domain d) (:requirements :strips)
               (:predicates (p ?x) (q ?x))
               (:action set-q :parameters (?x)
                 :precondition (and (p ?x)) :effect (and (q ?x))))",
        )
        .unwrap();
        let prob = parse_problem(
            "(define (problem pr) (:domain d) (:objects a b)
               (:init (p a)) (:goal (and (q a))))",
            &dom,
        )
        .unwrap();
        let t = ground_task(&dom, &prob, &GroundCfg::default()).unwrap();
        let m = compute_mutexes(&t);
        let at = |txt: &str| t.atom_from_text(txt).unwrap();
        assert!(!m.atom_reachable(at("(p b)")));
        assert!(m.are_mutex(at("(p b)"), at("(q a)")));
        assert!(!m.are_mutex(at("(p a)"), at("(q a)")));
    }
}
