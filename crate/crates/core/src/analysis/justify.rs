//! Plan justification: can an action (or a consecutive pair) be removed from
//! a plan and leave a working plan?

use crate::ground::GroundTask;
use crate::sample::Plan;
use crate::transition::{apply_sequence, SeqStep};

/// Which positions to delete from the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Removal {
    Single(usize),
    /// Removes positions i and i+1.
    Pair(usize),
}

/// True iff the plan with the indicated action(s) removed is still
/// applicable from the plan's root state and still reaches the goal.
pub fn justification_check(task: &GroundTask, plan: &Plan, removal: Removal) -> bool {
    let keep: Vec<SeqStep> = plan
        .actions
        .iter()
        .enumerate()
        .filter(|(i, _)| match removal {
            Removal::Single(r) => *i != r,
            Removal::Pair(r) => *i != r && *i != r + 1,
        })
        .map(|(_, a)| SeqStep::Action(*a))
        .collect();
    apply_sequence(task, &plan.trace[0], &keep).verdict.goal_reaching
}

/// Cuts the plan two actions after the first goal state along its trace.
/// When the cut changes nothing, or the shortened sequence no longer ends in
/// a goal state, the original plan is returned unchanged.
pub fn truncate_after_goal(task: &GroundTask, plan: &Plan) -> Plan {
    let first_goal = plan
        .trace
        .iter()
        .position(|s| crate::transition::is_goal(task, s));
    let Some(g) = first_goal else {
        return plan.clone();
    };
    let cut = g + 2;
    if cut >= plan.actions.len() {
        return plan.clone();
    }
    if !crate::transition::is_goal(task, &plan.trace[cut]) {
        return plan.clone();
    }
    Plan {
        actions: plan.actions[..cut].to_vec(),
        trace: plan.trace[..=cut].to_vec(),
        goal_reaching: true,
    }
}
