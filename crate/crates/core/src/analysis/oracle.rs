//! Brute-force exploration oracle for small instances.
//!
//! Everything else in this crate is checked against this module in tests: it
//! answers reachability, co-reachability, distance, and bounded plan
//! enumeration queries by exhaustive breadth-first search. It is a test and
//! verification backbone, not a generation-time dependency.

use crate::ground::{ActionId, AtomId, GroundTask};
use crate::transition::{applicable_actions, is_goal, progress, State};
use std::collections::HashMap;

/// Exhaustive forward exploration from one root state.
///
/// When the state cap is hit the index is marked truncated; a truncated index
/// still answers positive queries (reachable, co-reachable) but its negative
/// answers are unusable and plan enumeration is refused.
pub struct OracleIndex {
    truncated: bool,
    states: Vec<State>,
    index: HashMap<State, usize>,
    dist: Vec<u32>,
    parent: Vec<Option<(usize, ActionId)>>,
    /// Forward edges per state, in action-id order.
    edges: Vec<Vec<(ActionId, usize)>>,
    goal_flags: Vec<bool>,
    /// Backward BFS distance to the nearest goal state; None = no goal below.
    dist_to_goal: Vec<Option<u32>>,
}

pub fn oracle_bfs(task: &GroundTask, root: &State, cap: usize) -> OracleIndex {
    let mut states = vec![root.clone()];
    let mut index = HashMap::new();
    index.insert(root.clone(), 0usize);
    let mut dist = vec![0u32];
    let mut parent: Vec<Option<(usize, ActionId)>> = vec![None];
    let mut edges: Vec<Vec<(ActionId, usize)>> = vec![Vec::new()];
    let mut truncated = false;

    let mut head = 0;
    'bfs: while head < states.len() {
        let s = states[head].clone();
        for a in applicable_actions(task, &s) {
            let t = progress(task, &s, a).expect("applicable by construction");
            let ti = match index.get(&t) {
                Some(&i) => i,
                None => {
                    if states.len() >= cap {
                        truncated = true;
                        break 'bfs;
                    }
                    let i = states.len();
                    states.push(t.clone());
                    index.insert(t, i);
                    dist.push(dist[head] + 1);
                    parent.push(Some((head, a)));
                    edges.push(Vec::new());
                    i
                }
            };
            edges[head].push((a, ti));
        }
        head += 1;
    }

    let goal_flags: Vec<bool> = states.iter().map(|s| is_goal(task, s)).collect();

    // backward BFS over reversed edges from every goal state
    let mut reverse: Vec<Vec<usize>> = vec![Vec::new(); states.len()];
    for (u, outs) in edges.iter().enumerate() {
        for (_, v) in outs {
            reverse[*v].push(u);
        }
    }
    let mut dist_to_goal: Vec<Option<u32>> = vec![None; states.len()];
    let mut queue: Vec<usize> = Vec::new();
    for (i, &g) in goal_flags.iter().enumerate() {
        if g {
            dist_to_goal[i] = Some(0);
            queue.push(i);
        }
    }
    let mut qh = 0;
    while qh < queue.len() {
        let v = queue[qh];
        qh += 1;
        let d = dist_to_goal[v].unwrap();
        for &u in &reverse[v] {
            if dist_to_goal[u].is_none() {
                dist_to_goal[u] = Some(d + 1);
                queue.push(u);
            }
        }
    }

    OracleIndex {
        truncated,
        states,
        index,
        dist,
        parent,
        edges,
        goal_flags,
        dist_to_goal,
    }
}

impl OracleIndex {
    pub fn is_truncated(&self) -> bool {
        self.truncated
    }

    pub fn num_states(&self) -> usize {
        self.states.len()
    }

    pub fn state_index(&self, s: &State) -> Option<usize> {
        self.index.get(s).copied()
    }

    pub fn state(&self, i: usize) -> &State {
        &self.states[i]
    }

    /// BFS distance from the root.
    pub fn dist_from_root(&self, i: usize) -> u32 {
        self.dist[i]
    }

    /// True when some explored state contains the atom. With a truncated
    /// index a false answer means unknown, not unreachable.
    pub fn atom_reachable(&self, p: AtomId) -> bool {
        self.states.iter().any(|s| s.contains(p))
    }

    pub fn pair_co_reachable(&self, p: AtomId, q: AtomId) -> bool {
        self.states.iter().any(|s| s.contains(p) && s.contains(q))
    }

    pub fn action_applicable_somewhere(&self, a: ActionId) -> bool {
        self.edges.iter().any(|outs| outs.iter().any(|(b, _)| *b == a))
    }

    pub fn goal_reachable(&self) -> bool {
        self.goal_flags.iter().any(|&g| g)
    }

    /// Length of a shortest plan from the root, if the goal is reachable.
    pub fn shortest_goal_dist(&self) -> Option<u32> {
        self.dist_to_goal[0]
    }

    /// Distance from `s` to the nearest goal state, if `s` was explored and a
    /// goal lies below it.
    pub fn dist_to_goal(&self, s: &State) -> Option<u32> {
        self.dist_to_goal[*self.index.get(s)?]
    }

    /// One shortest plan from the root: the parent chain of the first goal
    /// state in BFS discovery order, which is deterministic.
    pub fn shortest_plan(&self) -> Option<Vec<ActionId>> {
        let mut best: Option<usize> = None;
        for (i, &g) in self.goal_flags.iter().enumerate() {
            if g && best.map_or(true, |b| self.dist[i] < self.dist[b]) {
                best = Some(i);
            }
        }
        let mut i = best?;
        let mut rev = Vec::new();
        while let Some((p, a)) = self.parent[i] {
            rev.push(a);
            i = p;
        }
        rev.reverse();
        Some(rev)
    }

    /// Every action sequence from the root that ends in a goal state and has
    /// length at most `max_len`. Walks may revisit states, so this is the
    /// full set of bounded plans, enumerated via depth-first search pruned by
    /// goal distance. Refused on truncated indices (the graph is partial) and
    /// aborted with `None` when more than `limit` plans exist.
    pub fn enumerate_plans(&self, max_len: usize, limit: usize) -> Option<Vec<Vec<ActionId>>> {
        if self.truncated {
            return None;
        }
        let mut plans = Vec::new();
        let mut prefix = Vec::new();
        if self.dfs_plans(0, max_len, limit, &mut prefix, &mut plans) {
            Some(plans)
        } else {
            None
        }
    }

    fn dfs_plans(
        &self,
        u: usize,
        max_len: usize,
        limit: usize,
        prefix: &mut Vec<ActionId>,
        plans: &mut Vec<Vec<ActionId>>,
    ) -> bool {
        if self.goal_flags[u] {
            if plans.len() >= limit {
                return false;
            }
            plans.push(prefix.clone());
        }
        for &(a, v) in &self.edges[u] {
            // only dead branches are pruned: every continuation that can
            // still reach the goal within the bound is followed
            let Some(dg) = self.dist_to_goal[v] else { continue };
            if prefix.len() + 1 + dg as usize > max_len {
                continue;
            }
            prefix.push(a);
            let ok = self.dfs_plans(v, max_len, limit, prefix, plans);
            prefix.pop();
            if !ok {
                return false;
            }
        }
        true
    }
}
