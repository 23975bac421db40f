//! Raw material for question generation: plans, plan traces, sampled states,
//! and random rollouts.

use crate::analysis::oracle::{oracle_bfs, OracleIndex};
use crate::analysis::relaxed::relaxed_reachable;
use crate::ground::{ActionId, GroundTask};
use crate::seed::{child_seed, child_seed_idx, rng};
use crate::transition::{applicable_actions, is_goal, progress, State};
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

/// An applicable action sequence with its full state trace.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Plan {
    pub actions: Vec<ActionId>,
    /// States visited, length `actions.len() + 1`; starts at the root state.
    pub trace: Vec<State>,
    pub goal_reaching: bool,
}

impl Plan {
    /// Builds a plan by applying `actions` from `s`; None if some action is
    /// inapplicable along the way.
    pub fn from_actions(task: &GroundTask, s: &State, actions: Vec<ActionId>) -> Option<Plan> {
        let mut trace = vec![s.clone()];
        for a in &actions {
            trace.push(progress(task, trace.last().unwrap(), *a).ok()?);
        }
        let goal_reaching = is_goal(task, trace.last().unwrap());
        Some(Plan {
            actions,
            trace,
            goal_reaching,
        })
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SampleConfig {
    pub num_plans: usize,
    pub rollout_depth: usize,
    pub rollouts_per_state: usize,
    pub seed: u64,
    /// Cap both for oracle-style exploration and for the sampled-state list.
    pub state_cap: usize,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            num_plans: 20,
            rollout_depth: 5,
            rollouts_per_state: 2,
            seed: 0,
            state_cap: 1_000_000,
        }
    }
}

/// Extra plan length allowed beyond the shortest when enumerating.
const LENGTH_SLACK: usize = 2;
/// Enumeration abort threshold; past this the search falls back to sampling.
const ENUM_LIMIT: usize = 200_000;
/// Greedy-search restarts and per-walk depth for the fallback path.
const GREEDY_RESTARTS: usize = 60;
const GREEDY_DEPTH_FACTOR: usize = 8;

#[derive(Debug)]
pub struct PlanSearch {
    pub plans: Vec<Plan>,
    /// Goal provably unreachable from the root (delete relaxation).
    pub goal_unreachable: bool,
}

/// Finds up to `k` distinct goal-reaching plans from `s`, deterministically
/// under `seed`.
///
/// On instances the exhaustive oracle can cover, this enumerates every plan
/// up to shortest + 2 and subsamples; otherwise it falls back to randomized
/// greedy walks guided by the additive relaxation heuristic.
pub fn find_plans(task: &GroundTask, s: &State, k: usize, seed: u64, cap: usize) -> PlanSearch {
    let rr = relaxed_reachable(task, s);
    if !task.goal.is_subset_of(&rr.atoms) {
        return PlanSearch {
            plans: Vec::new(),
            goal_unreachable: true,
        };
    }
    if k == 0 {
        return PlanSearch {
            plans: Vec::new(),
            goal_unreachable: false,
        };
    }

    let idx = oracle_bfs(task, s, cap);
    if !idx.is_truncated() {
        if let Some(plans) = enumerate_and_pick(task, s, &idx, k, seed) {
            return PlanSearch {
                plans,
                goal_unreachable: false,
            };
        }
    }
    PlanSearch {
        plans: greedy_plans(task, s, k, seed),
        goal_unreachable: false,
    }
}

fn enumerate_and_pick(
    task: &GroundTask,
    s: &State,
    idx: &OracleIndex,
    k: usize,
    seed: u64,
) -> Option<Vec<Plan>> {
    let shortest = idx.shortest_goal_dist()? as usize;
    let mut seqs = idx.enumerate_plans(shortest + LENGTH_SLACK, ENUM_LIMIT)?;
    seqs.sort_by(|a, b| (a.len(), a).cmp(&(b.len(), b)));
    // the shortest plan (first after sorting) is always kept
    let picked: Vec<Vec<ActionId>> = if seqs.len() <= k {
        seqs
    } else {
        let mut r = rng(child_seed(seed, "plan-pick"));
        let mut extra: Vec<usize> = (1..seqs.len()).collect();
        extra.shuffle(&mut r);
        let mut chosen: Vec<usize> = extra.into_iter().take(k - 1).collect();
        chosen.push(0);
        chosen.sort();
        chosen.into_iter().map(|i| seqs[i].clone()).collect()
    };
    Some(
        picked
            .into_iter()
            .map(|actions| Plan::from_actions(task, s, actions).expect("enumerated plans apply"))
            .collect(),
    )
}

/// Additive relaxation heuristic: estimated cost to the goal, or None when
/// the relaxation cannot reach it.
fn h_add(task: &GroundTask, s: &State) -> Option<u64> {
    const INF: u64 = u64::MAX / 4;
    let n = task.num_atoms();
    let mut cost = vec![INF; n];
    for i in s.bits().iter() {
        cost[i] = 0;
    }
    let mut changed = true;
    while changed {
        changed = false;
        for a in &task.actions {
            let pre_cost: u64 = a.pre.iter().map(|p| cost[p]).sum();
            if pre_cost >= INF {
                continue;
            }
            let new = pre_cost.saturating_add(1);
            for p in a.add.iter() {
                if new < cost[p] {
                    cost[p] = new;
                    changed = true;
                }
            }
        }
    }
    let mut total = 0u64;
    for g in task.goal.iter() {
        if cost[g] >= INF {
            return None;
        }
        total += cost[g];
    }
    Some(total)
}

/// Randomized greedy descent on h_add with restarts; deterministic under
/// seed. Used when the state space is too large to enumerate.
fn greedy_plans(task: &GroundTask, s: &State, k: usize, seed: u64) -> Vec<Plan> {
    let depth_cap = GREEDY_DEPTH_FACTOR * (h_add(task, s).unwrap_or(8).max(1) as usize);
    let mut found: Vec<Plan> = Vec::new();
    let mut seen: HashSet<Vec<ActionId>> = HashSet::new();
    for restart in 0..GREEDY_RESTARTS {
        if found.len() >= k {
            break;
        }
        let mut r = rng(child_seed_idx(child_seed(seed, "greedy"), restart as u64));
        let mut cur = s.clone();
        let mut actions = Vec::new();
        for _ in 0..depth_cap {
            if is_goal(task, &cur) {
                break;
            }
            let apps = applicable_actions(task, &cur);
            if apps.is_empty() {
                break;
            }
            // rank successors by heuristic, break ties randomly, then pick
            // greedily with occasional random exploration
            let mut scored: Vec<(u64, u64, ActionId)> = apps
                .iter()
                .map(|&a| {
                    let t = progress(task, &cur, a).expect("applicable");
                    let h = h_add(task, &t).unwrap_or(u64::MAX / 4);
                    (h, r.gen::<u64>(), a)
                })
                .collect();
            scored.sort();
            let pick = if r.gen_bool(0.2) {
                scored[r.gen_range(0..scored.len())].2
            } else {
                scored[0].2
            };
            actions.push(pick);
            cur = progress(task, &cur, pick).expect("applicable");
        }
        if is_goal(task, &cur) && seen.insert(actions.clone()) {
            found.push(Plan::from_actions(task, s, actions).expect("walked applicably"));
        }
    }
    found.sort_by(|a, b| (a.len(), &a.actions).cmp(&(b.len(), &b.actions)));
    found
}

/// States along the given plans plus seeded random rollouts from each,
/// deduplicated in first-seen order and capped by seeded subsampling.
pub fn sample_states(task: &GroundTask, plans: &[Plan], cfg: &SampleConfig) -> Vec<State> {
    let mut states: Vec<State> = Vec::new();
    let mut seen: HashSet<State> = HashSet::new();
    let push = |st: &State, states: &mut Vec<State>, seen: &mut HashSet<State>| {
        if seen.insert(st.clone()) {
            states.push(st.clone());
        }
    };
    for p in plans {
        for st in &p.trace {
            push(st, &mut states, &mut seen);
        }
    }
    let base = states.clone();
    for (si, st) in base.iter().enumerate() {
        for ri in 0..cfg.rollouts_per_state {
            let walk_seed = child_seed_idx(
                child_seed_idx(child_seed(cfg.seed, "rollout"), si as u64),
                ri as u64,
            );
            for visited in random_rollout(task, st, cfg.rollout_depth, walk_seed) {
                push(&visited, &mut states, &mut seen);
            }
        }
    }
    if states.len() > cfg.state_cap {
        let mut r = rng(child_seed(cfg.seed, "state-cap"));
        let mut keep: Vec<usize> = (0..states.len()).collect();
        keep.shuffle(&mut r);
        let mut chosen: Vec<usize> = keep.into_iter().take(cfg.state_cap).collect();
        chosen.sort();
        states = chosen.into_iter().map(|i| states[i].clone()).collect();
    }
    states
}

/// Uniform random walk over applicable actions; returns the visited states
/// starting with `s`, stopping early at dead ends.
pub fn random_rollout(task: &GroundTask, s: &State, depth: usize, seed: u64) -> Vec<State> {
    random_walk(task, s, depth, seed).trace
}

/// Like [`random_rollout`], but keeps the action sequence alongside the
/// trace so callers can cite the walk as a certificate.
pub fn random_walk(task: &GroundTask, s: &State, depth: usize, seed: u64) -> Plan {
    let mut r = rng(seed);
    let mut actions = Vec::new();
    let mut trace = vec![s.clone()];
    let mut cur = s.clone();
    for _ in 0..depth {
        let apps = applicable_actions(task, &cur);
        if apps.is_empty() {
            break;
        }
        let a = apps[r.gen_range(0..apps.len())];
        cur = progress(task, &cur, a).expect("applicable");
        actions.push(a);
        trace.push(cur.clone());
    }
    let goal_reaching = task.goal.is_subset_of(cur.bits());
    Plan {
        actions,
        trace,
        goal_reaching,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ground::{ground_task, GroundCfg};
    use crate::pddl::{parse_domain, parse_problem};
    use crate::transition::{apply_sequence, SeqStep};

    fn load(dir: &str, prob: &str) -> GroundTask {
        let root = concat!(env!("CARGO_MANIFEST_DIR"), "/../../data/domains/");
        let dom = std::fs::read_to_string(format!("{root}{dir}/domain.pddl")).unwrap();
        let pb = std::fs::read_to_string(format!("{root}{dir}/{prob}.pddl")).unwrap();
        let domain = parse_domain(&dom).unwrap();
        let problem = parse_problem(&pb, &domain).unwrap();
        ground_task(&domain, &problem, &GroundCfg::default()).unwrap()
    }

    #[test]
    fn ferry_plans_start_with_the_shortest() {
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        let res = find_plans(&t, &s, 5, 7, 1_000_000);
        assert!(!res.goal_unreachable);
        assert_eq!(res.plans.len(), 5);
        assert_eq!(res.plans[0].len(), 4);
        let texts: Vec<String> =
            res.plans[0].actions.iter().map(|a| t.action_text(*a)).collect();
        assert_eq!(
            texts,
            vec!["(debark c1 l0)", "(board c0 l0)", "(sail l0 l1)", "(debark c0 l1)"]
        );
        for p in &res.plans {
            assert!(p.goal_reaching);
            assert!(p.len() <= 6);
            let steps: Vec<SeqStep> =
                p.actions.iter().copied().map(SeqStep::Action).collect();
            assert!(apply_sequence(&t, &s, &steps).verdict.goal_reaching);
            assert_eq!(p.trace.len(), p.len() + 1);
        }
    }

    #[test]
    fn find_plans_deterministic_under_seed() {
        let t = load("ferry", "p02");
        let s = State::initial(&t);
        let a = find_plans(&t, &s, 8, 42, 1_000_000);
        let b = find_plans(&t, &s, 8, 42, 1_000_000);
        let sig = |r: &PlanSearch| -> Vec<Vec<ActionId>> {
            r.plans.iter().map(|p| p.actions.clone()).collect()
        };
        assert_eq!(sig(&a), sig(&b));
        let c = find_plans(&t, &s, 8, 43, 1_000_000);
        assert_eq!(c.plans[0].actions, a.plans[0].actions, "shortest is seed-independent");
    }

    #[test]
    fn unreachable_goal_flagged() {
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
        let res = find_plans(&t, &State::initial(&t), 3, 0, 1000);
        assert!(res.goal_unreachable);
        assert!(res.plans.is_empty());
    }

    #[test]
    fn satisfied_goal_gives_empty_plan_first() {
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
        let res = find_plans(&t, &State::initial(&t), 3, 1, 1000);
        assert!(res.plans[0].is_empty());
        assert!(res.plans[0].goal_reaching);
    }

    #[test]
    fn greedy_fallback_finds_valid_plans() {
        // tiny cap forces the sampling path even though the space is small
        let t = load("ferry", "p02");
        let s = State::initial(&t);
        let res = find_plans(&t, &s, 4, 11, 8);
        assert!(!res.goal_unreachable);
        assert!(!res.plans.is_empty());
        for p in &res.plans {
            assert!(p.goal_reaching);
            let steps: Vec<SeqStep> =
                p.actions.iter().copied().map(SeqStep::Action).collect();
            assert!(apply_sequence(&t, &s, &steps).verdict.goal_reaching);
        }
        let res2 = find_plans(&t, &s, 4, 11, 8);
        let sig = |r: &PlanSearch| -> Vec<Vec<ActionId>> {
            r.plans.iter().map(|p| p.actions.clone()).collect()
        };
        assert_eq!(sig(&res), sig(&res2));
    }

    #[test]
    fn rollouts_deterministic_and_reachable() {
        let t = load("gripper", "p01");
        let s = State::initial(&t);
        let a = random_rollout(&t, &s, 6, 99);
        let b = random_rollout(&t, &s, 6, 99);
        assert_eq!(a, b);
        assert_eq!(a[0], s);
        assert!(a.len() <= 7);
        let idx = oracle_bfs(&t, &s, 1_000_000);
        for st in &a {
            assert!(idx.state_index(st).is_some());
        }
        assert_eq!(random_rollout(&t, &s, 0, 1), vec![s.clone()]);
    }

    #[test]
    fn sampled_states_cover_traces_and_stay_reachable() {
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        let found = find_plans(&t, &s, 3, 5, 1_000_000);
        let cfg = SampleConfig {
            seed: 5,
            ..SampleConfig::default()
        };
        let states = sample_states(&t, &found.plans, &cfg);
        for p in &found.plans {
            for st in &p.trace {
                assert!(states.contains(st));
            }
        }
        let idx = oracle_bfs(&t, &s, 1_000_000);
        for st in &states {
            assert!(idx.state_index(st).is_some());
        }
        // no rollouts means exactly the deduped trace states
        let bare = SampleConfig {
            rollouts_per_state: 0,
            seed: 5,
            ..SampleConfig::default()
        };
        let trace_only = sample_states(&t, &found.plans, &bare);
        let mut expect: Vec<State> = Vec::new();
        for p in &found.plans {
            for st in &p.trace {
                if !expect.contains(st) {
                    expect.push(st.clone());
                }
            }
        }
        assert_eq!(trace_only, expect);
    }

    #[test]
    fn state_cap_subsamples_deterministically() {
        let t = load("ferry", "p01");
        let s = State::initial(&t);
        let found = find_plans(&t, &s, 6, 3, 1_000_000);
        let cfg = SampleConfig {
            state_cap: 4,
            seed: 9,
            ..SampleConfig::default()
        };
        let a = sample_states(&t, &found.plans, &cfg);
        let b = sample_states(&t, &found.plans, &cfg);
        assert_eq!(a, b);
        assert_eq!(a.len(), 4);
    }
}
