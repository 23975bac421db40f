//! Question synthesis for the seven task families.
//!
//! Each generator consumes a sampled state together with its precomputed
//! analyses (a [`StateBundle`]) and emits [`QuestionRecord`]s whose gold
//! labels carry machine-checkable provenance. [`assemble_batch`] drives the
//! generators across domains, problems, and sampled states, balances boolean
//! answer labels, deduplicates, and re-certifies every record before it is
//! emitted.

mod action_reach;
mod applicability;
pub mod check;
mod justification;
mod landmark_q;
mod progression;
mod reachability;
mod validation;

pub use applicability::applicability_bool_record;

use crate::analysis::landmarks::{landmarks_rhw, LandmarkSet};
use crate::analysis::mutex::{compute_mutexes, MutexSet};
use crate::analysis::relaxed::{relaxed_reachable, RelaxedReachability};
use crate::bitset::BitSet;
use crate::ground::{ActionId, AtomId, GroundTask};
use crate::render::{comma_and, render_context, render_fact, TemplateSet};
use crate::sample::{find_plans, sample_states, Plan, SampleConfig};
use crate::seed::{child_seed, child_seed_idx};
use crate::transition::{applicable_actions, State};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::collections::HashSet;
use thiserror::Error;

/// The seven question families, in canonical emission order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaskKind {
    Applicability,
    Progression,
    Reachability,
    ActionReachability,
    Validation,
    Justification,
    Landmarks,
}

impl TaskKind {
    pub const ALL: [TaskKind; 7] = [
        TaskKind::Applicability,
        TaskKind::Progression,
        TaskKind::Reachability,
        TaskKind::ActionReachability,
        TaskKind::Validation,
        TaskKind::Justification,
        TaskKind::Landmarks,
    ];

    pub fn key(self) -> &'static str {
        match self {
            TaskKind::Applicability => "applicability",
            TaskKind::Progression => "progression",
            TaskKind::Reachability => "reachability",
            TaskKind::ActionReachability => "action_reachability",
            TaskKind::Validation => "validation",
            TaskKind::Justification => "justification",
            TaskKind::Landmarks => "landmarks",
        }
    }

    pub fn from_key(s: &str) -> Option<TaskKind> {
        TaskKind::ALL.into_iter().find(|t| t.key() == s)
    }

    /// Whether the question context states the goal. Only the three families
    /// whose answers depend on the goal include it.
    pub fn includes_goal(self) -> bool {
        matches!(
            self,
            TaskKind::Validation | TaskKind::Justification | TaskKind::Landmarks
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QType {
    Bool,
    Mcq,
}

impl QType {
    pub const ALL: [QType; 2] = [QType::Bool, QType::Mcq];

    pub fn key(self) -> &'static str {
        match self {
            QType::Bool => "bool",
            QType::Mcq => "mcq",
        }
    }

    pub fn from_key(s: &str) -> Option<QType> {
        QType::ALL.into_iter().find(|q| q.key() == s)
    }
}

/// One generated question with its certified gold answer.
///
/// `gold` is `"yes"`/`"no"` for boolean questions and a letter `"A"`..`"D"`
/// for multiple choice. `options` is empty for boolean questions and holds
/// the four option texts (without letter prefixes) otherwise. `provenance`
/// records why the gold answer is correct, in symbolic form, so it can be
/// replayed against the semantics without re-running generation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuestionRecord {
    pub id: String,
    pub domain: String,
    pub problem_file: String,
    pub task: TaskKind,
    pub qtype: QType,
    pub context: String,
    pub question: String,
    pub options: Vec<String>,
    pub gold: String,
    pub rationale: String,
    pub provenance: Provenance,
    pub seed: u64,
}

/// The four-way partition of facts induced by applying an action.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Cell {
    TrueInBoth,
    TrueBeforeOnly,
    TrueAfterOnly,
    FalseInBoth,
}

/// Why a fact conjunction is or is not reachable.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ReachCert {
    /// Applying these actions from the state reaches one where the facts hold.
    Walk { actions: Vec<String> },
    /// The two facts can never hold together in any reachable state.
    Mutex { pair: [String; 2] },
    /// A static fact that is false and can never be made true.
    Static { atom: String },
    /// Unreachable even under the delete relaxation.
    Relaxed { atom: String },
}

/// Why an action can or cannot eventually be applied.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AReachCert {
    /// After applying this prefix from the state, the action is applicable.
    Walk { prefix: Vec<String> },
    /// A precondition atom that is not even delete-relaxed reachable.
    PreUnreachable { atom: String },
    /// Two precondition atoms that can never hold together.
    PreMutex { pair: [String; 2] },
    /// The option text resolves to no ground action.
    NotAnAction,
}

/// Which property of a sequence a boolean validation question asks about.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValAsk {
    Valid,
    Applicable,
    Plan,
}

/// The strongest true claim about a candidate sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ValCase {
    NotValid,
    NotApplicable,
    NotGoal,
    Plan,
}

impl ValCase {
    pub fn claim(self) -> &'static str {
        match self {
            ValCase::NotValid => "The sequence is not valid.",
            ValCase::NotApplicable => "The sequence is not applicable.",
            ValCase::NotGoal => "The sequence is applicable, but does not achieve the goal.",
            ValCase::Plan => "The sequence is a plan.",
        }
    }
}

/// What a justification question proposes to remove from the plan.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum RemovalSpec {
    Single { index: usize },
    Pair { index: usize },
}

/// One option of a justification multiple-choice question: a pair of plan
/// actions, adjacent at `index` or nowhere adjacent when `index` is `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairSpec {
    pub first: String,
    pub second: String,
    pub index: Option<usize>,
}

/// Machine-checkable justification of a gold label. Facts and actions are in
/// symbolic `(name arg...)` form; `state` lists every fact true in the
/// queried state. Free-text entries (corrupt or near-miss action names) are
/// distinguishable because they never start with `(`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "rule", rename_all = "snake_case")]
pub enum Provenance {
    AppBool {
        state: Vec<String>,
        action: String,
        applicable: bool,
    },
    AppMcq {
        state: Vec<String>,
        actions: Vec<String>,
        gold: usize,
    },
    ProgBool {
        state: Vec<String>,
        action: String,
        fact: String,
        cell: Cell,
    },
    ProgMcq {
        state: Vec<String>,
        action: String,
        options: Vec<Vec<String>>,
        gold: usize,
    },
    ReachBool {
        state: Vec<String>,
        facts: Vec<String>,
        cert: ReachCert,
    },
    ReachMcq {
        state: Vec<String>,
        options: Vec<Vec<String>>,
        certs: Vec<ReachCert>,
        gold: usize,
    },
    ActionReachBool {
        state: Vec<String>,
        action: String,
        cert: AReachCert,
    },
    ActionReachMcq {
        state: Vec<String>,
        options: Vec<String>,
        certs: Vec<AReachCert>,
        gold: usize,
    },
    ValBool {
        state: Vec<String>,
        steps: Vec<String>,
        ask: ValAsk,
        expected: bool,
    },
    ValMcq {
        state: Vec<String>,
        steps: Vec<String>,
        case: ValCase,
        gold: usize,
    },
    JustBool {
        state: Vec<String>,
        plan: Vec<String>,
        removal: RemovalSpec,
        removable: bool,
    },
    JustMcq {
        state: Vec<String>,
        plan: Vec<String>,
        pairs: Vec<PairSpec>,
        gold: usize,
    },
    LandBool {
        state: Vec<String>,
        fact: String,
        is_landmark: bool,
        witness: Option<Vec<String>>,
    },
    LandMcq {
        state: Vec<String>,
        options: Vec<String>,
        witnesses: Vec<Option<Vec<String>>>,
        gold: usize,
    },
}

pub const LETTERS: [&str; 4] = ["A", "B", "C", "D"];

pub(crate) fn yn(b: bool) -> &'static str {
    if b {
        "yes"
    } else {
        "no"
    }
}

/// Option texts end with terminal punctuation.
pub(crate) fn option_text(t: &str) -> String {
    let t = t.trim_end();
    if t.ends_with(['.', '?', '!']) {
        t.to_string()
    } else {
        format!("{t}.")
    }
}

// Question stems. The wording is part of the dataset contract and is frozen
// by golden tests; change it only together with them.

pub(crate) fn stem_app_bool(action: &str) -> String {
    format!("Is the following action applicable in this state:  {action}?")
}

pub(crate) const STEM_APP_MCQ: &str =
    "Which of the following actions will be applicable in this state?";

pub(crate) fn stem_prog_bool(fact: &str, action: &str) -> String {
    format!(
        "Will the fact \"{fact}\" hold after performing the action \"{action}\" in the current state?"
    )
}

pub(crate) fn stem_prog_mcq(action: &str) -> String {
    format!(
        "Which of the following facts hold after performing the action \"{action}\" in the current state?"
    )
}

pub(crate) fn stem_reach_bool(facts: &str) -> String {
    format!("Is it possible to transition to a state where the following holds: {facts}?")
}

pub(crate) const STEM_REACH_MCQ: &str =
    "Which of the following options can hold in a state that can potentially be reached?";

pub(crate) fn stem_areach_bool(action: &str) -> String {
    format!("Is it possible to transition to a state where the action \"{action}\" can be applied?")
}

pub(crate) const STEM_AREACH_MCQ: &str =
    "Which of the following actions can eventually be applied?";

pub(crate) fn stem_val_bool(ask: ValAsk, seq: &str) -> String {
    match ask {
        ValAsk::Valid => {
            format!("Is the following sequence of actions valid for the current state? {seq}.")
        }
        ValAsk::Applicable => {
            format!("Is the following sequence of actions applicable in the current state? {seq}.")
        }
        ValAsk::Plan => {
            format!("Is the following sequence of actions a plan for the current state? {seq}.")
        }
    }
}

pub(crate) fn stem_val_mcq(seq: &str) -> String {
    format!(
        "Which of the following claims is true with regard to the following sequence of actions {seq}?"
    )
}

pub(crate) fn stem_just_bool_single(plan: &str, action: &str) -> String {
    format!(
        "Given the plan: \"{plan}\"; can the following action be removed from this plan and still have a valid plan: {action}?"
    )
}

pub(crate) fn stem_just_bool_pair(plan: &str, a: &str, b: &str) -> String {
    format!(
        "Given the plan: \"{plan}\"; can the following pair of consecutive actions be removed from this plan and still have a valid plan: {a} and {b}?"
    )
}

pub(crate) fn stem_just_mcq(plan: &str) -> String {
    format!(
        "Given the plan: \"{plan}\"; which of the following pairs of consecutive actions can be removed from this plan and still have a valid plan?"
    )
}

pub(crate) fn stem_land_bool(fact: &str) -> String {
    format!(
        "Is the following fact a landmark (must hold at some point along any plan) for the current state? {fact}"
    )
}

pub(crate) const STEM_LAND_MCQ: &str =
    "Which of the following facts is a landmark (must hold at some point along any plan) for the current state?";

/// Everything a generator needs to know about where it is generating.
pub struct GenCtx<'a> {
    pub task: &'a GroundTask,
    pub tpl: &'a TemplateSet,
    pub mutexes: &'a MutexSet,
    pub domain: &'a str,
    pub problem_file: &'a str,
    /// Progression multiple choice asks about fact pairs instead of single
    /// facts.
    pub prog_pairs: bool,
}

/// A sampled state with the analyses the generators share.
pub struct StateBundle {
    pub s: State,
    /// Applicable actions in `s`, in action-id order.
    pub applicable: Vec<ActionId>,
    /// Delete-relaxed reachability from `s`.
    pub relaxed: RelaxedReachability,
    /// Goal-reaching plans rooted at `s`; empty when none were found.
    pub plans: Vec<Plan>,
    /// The goal is provably unreachable from `s`.
    pub goal_unreachable: bool,
    /// Landmarks of `s`, absent when the goal is relaxed-unreachable.
    pub landmarks: Option<LandmarkSet>,
}

impl StateBundle {
    pub fn compute(
        task: &GroundTask,
        s: State,
        seed: u64,
        plans_per_state: usize,
        cap: usize,
    ) -> StateBundle {
        let applicable = applicable_actions(task, &s);
        let relaxed = relaxed_reachable(task, &s);
        let search = find_plans(task, &s, plans_per_state, child_seed(seed, "plans"), cap);
        let landmarks = landmarks_rhw(task, &s).ok();
        StateBundle {
            s,
            applicable,
            relaxed,
            plans: search.plans,
            goal_unreachable: search.goal_unreachable,
            landmarks,
        }
    }
}

/// All facts true in the state, in atom-id order, symbolic form.
pub(crate) fn state_atom_texts(task: &GroundTask, s: &State) -> Vec<String> {
    s.atoms().map(|p| task.atom_text(p)).collect()
}

/// Atoms from `bits` whose predicate is dynamic and not hidden, in id order.
pub(crate) fn askable_dynamic(task: &GroundTask, tpl: &TemplateSet, bits: &BitSet) -> Vec<AtomId> {
    bits.iter()
        .map(|i| AtomId(i as u32))
        .filter(|&p| !task.is_static(p) && !tpl.is_hidden(&task.pred_of(p).name))
        .collect()
}

/// Dynamic precondition atoms of an action, in atom-id order.
pub(crate) fn dynamic_pre(task: &GroundTask, a: ActionId) -> Vec<AtomId> {
    task.action(a)
        .pre
        .iter()
        .map(|i| AtomId(i as u32))
        .filter(|&p| !task.is_static(p))
        .collect()
}

pub(crate) fn facts_nl(task: &GroundTask, tpl: &TemplateSet, atoms: &[AtomId]) -> Vec<String> {
    atoms.iter().map(|&p| render_fact(task, tpl, p)).collect()
}

/// Natural-language fact list joined with commas and "and".
pub(crate) fn fact_list(task: &GroundTask, tpl: &TemplateSet, atoms: &[AtomId]) -> String {
    comma_and(&facts_nl(task, tpl, atoms))
}

pub(crate) fn atom_syms(task: &GroundTask, atoms: &[AtomId]) -> Vec<String> {
    atoms.iter().map(|&p| task.atom_text(p)).collect()
}

pub(crate) fn action_syms(task: &GroundTask, actions: &[ActionId]) -> Vec<String> {
    actions.iter().map(|&a| task.action_text(a)).collect()
}

pub(crate) fn context_for(ctx: &GenCtx, s: &State, kind: TaskKind) -> String {
    render_context(ctx.task, ctx.tpl, s, kind.includes_goal())
}

/// Stable record id: a truncated digest over the identifying fields and the
/// full provenance, so semantically identical questions collide and anything
/// else does not.
pub fn record_id(
    domain: &str,
    problem_file: &str,
    task: TaskKind,
    qtype: QType,
    prov: &Provenance,
) -> String {
    let mut h = Sha256::new();
    h.update(domain.as_bytes());
    h.update(b"|");
    h.update(problem_file.as_bytes());
    h.update(b"|");
    h.update(task.key().as_bytes());
    h.update(b"|");
    h.update(qtype.key().as_bytes());
    h.update(b"|");
    h.update(serde_json::to_string(prov).expect("provenance serializes").as_bytes());
    let digest = h.finalize();
    let mut out = String::with_capacity(16);
    for byte in digest.iter().take(8) {
        out.push_str(&format!("{byte:02x}"));
    }
    out
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn make_record(
    ctx: &GenCtx,
    task: TaskKind,
    qtype: QType,
    context: String,
    question: String,
    options: Vec<String>,
    gold: String,
    rationale: String,
    provenance: Provenance,
    seed: u64,
) -> QuestionRecord {
    let id = record_id(ctx.domain, ctx.problem_file, task, qtype, &provenance);
    QuestionRecord {
        id,
        domain: ctx.domain.to_string(),
        problem_file: ctx.problem_file.to_string(),
        task,
        qtype,
        context,
        question,
        options,
        gold,
        rationale,
        provenance,
        seed,
    }
}

/// Runs one generator family against one state.
pub fn generate_for_state(
    ctx: &GenCtx,
    bundle: &StateBundle,
    kind: TaskKind,
    qtype: QType,
    seed: u64,
) -> Vec<QuestionRecord> {
    match kind {
        TaskKind::Applicability => applicability::generate(ctx, bundle, qtype, seed),
        TaskKind::Progression => progression::generate(ctx, bundle, qtype, seed),
        TaskKind::Reachability => reachability::generate(ctx, bundle, qtype, seed),
        TaskKind::ActionReachability => action_reach::generate(ctx, bundle, qtype, seed),
        TaskKind::Validation => validation::generate(ctx, bundle, qtype, seed),
        TaskKind::Justification => justification::generate(ctx, bundle, qtype, seed),
        TaskKind::Landmarks => landmark_q::generate(ctx, bundle, qtype, seed),
    }
}

/// Batch generation knobs. Counts are per (domain, task family, question
/// type) cell.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GenConfig {
    pub per_domain: usize,
    pub seed: u64,
    pub tasks: Vec<TaskKind>,
    pub qtypes: Vec<QType>,
    pub sample: SampleConfig,
    /// Goal-reaching plans searched per sampled state.
    pub plans_per_state: usize,
    /// Progression multiple-choice options are fact pairs instead of single
    /// facts.
    pub prog_pairs: bool,
    /// State cap for exhaustive searches inside plan finding.
    pub oracle_cap: usize,
    /// Sampled states examined per problem file.
    pub max_states_per_problem: usize,
}

impl Default for GenConfig {
    fn default() -> Self {
        GenConfig {
            per_domain: 10,
            seed: 0,
            tasks: TaskKind::ALL.to_vec(),
            qtypes: QType::ALL.to_vec(),
            sample: SampleConfig::default(),
            plans_per_state: 5,
            prog_pairs: false,
            oracle_cap: 200_000,
            max_states_per_problem: 12,
        }
    }
}

/// One domain's input to batch generation.
pub struct DomainSpec {
    pub domain: String,
    pub tpl: TemplateSet,
    /// Problem file name (for record metadata) and its ground task.
    pub problems: Vec<(String, GroundTask)>,
}

/// A generation cell that could not be filled to the requested count.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Shortfall {
    pub domain: String,
    pub task: TaskKind,
    pub qtype: QType,
    pub want: usize,
    pub got: usize,
}

pub struct Batch {
    pub records: Vec<QuestionRecord>,
    pub shortfalls: Vec<Shortfall>,
}

#[derive(Debug, Error)]
pub enum GenError {
    #[error("record {id} failed gold re-certification: {reason}")]
    Certification { id: String, reason: String },
}

/// Generates the full batch: per domain, per task family, per question type,
/// round-robin over problem files and sampled states until each cell has
/// `per_domain` records. Boolean cells are filled with yes/no labels balanced
/// to within one. Every emitted record has had its gold label re-derived from
/// its provenance; a failure there is a generator bug and aborts the batch.
pub fn assemble_batch(domains: &[DomainSpec], cfg: &GenConfig) -> Result<Batch, GenError> {
    let mut records = Vec::new();
    let mut shortfalls = Vec::new();
    let mut seen_ids: HashSet<String> = HashSet::new();
    let mut seen_questions: HashSet<(String, String)> = HashSet::new();

    for spec in domains {
        let dseed = child_seed(cfg.seed, &spec.domain);
        // Sampled states and their bundles, per problem, computed lazily and
        // shared by every (task, qtype) cell of this domain.
        let mut pools: Vec<ProblemPool> = spec
            .problems
            .iter()
            .enumerate()
            .map(|(pi, (name, task))| {
                ProblemPool::new(name, task, child_seed_idx(child_seed(dseed, "problem"), pi as u64), cfg)
            })
            .collect();
        let max_rounds = pools.iter().map(|p| p.states.len()).max().unwrap_or(0);

        for &kind in &cfg.tasks {
            for &qtype in &cfg.qtypes {
                let want = cfg.per_domain;
                let mut yes_pool: Vec<QuestionRecord> = Vec::new();
                let mut no_pool: Vec<QuestionRecord> = Vec::new();
                let mut mcq_pool: Vec<QuestionRecord> = Vec::new();
                let cell_seed = child_seed(child_seed(dseed, kind.key()), qtype.key());

                'fill: for round in 0..max_rounds {
                    for pi in 0..pools.len() {
                        if round >= pools[pi].states.len() {
                            continue;
                        }
                        pools[pi].ensure_bundle(round, cfg);
                        let pool = &pools[pi];
                        let bundle = pool.bundles[round].as_ref().expect("just ensured");
                        let ctx = GenCtx {
                            task: pool.task,
                            tpl: &spec.tpl,
                            mutexes: &pool.mutexes,
                            domain: &spec.domain,
                            problem_file: &pool.name,
                            prog_pairs: cfg.prog_pairs,
                        };
                        let qseed =
                            child_seed_idx(child_seed_idx(cell_seed, pi as u64), round as u64);
                        for rec in generate_for_state(&ctx, bundle, kind, qtype, qseed) {
                            if !seen_ids.insert(rec.id.clone()) {
                                continue;
                            }
                            if !seen_questions
                                .insert((rec.context.clone(), rec.question.clone()))
                            {
                                continue;
                            }
                            if let Err(reason) =
                                check::replay_with(ctx.task, ctx.tpl, Some(ctx.mutexes), &rec)
                            {
                                return Err(GenError::Certification { id: rec.id, reason });
                            }
                            match (qtype, rec.gold.as_str()) {
                                (QType::Bool, "yes") => yes_pool.push(rec),
                                (QType::Bool, _) => no_pool.push(rec),
                                (QType::Mcq, _) => mcq_pool.push(rec),
                            }
                        }
                        let have_enough = match qtype {
                            QType::Bool => {
                                let half = want.div_ceil(2);
                                yes_pool.len() >= half && no_pool.len() >= half
                            }
                            QType::Mcq => mcq_pool.len() >= want,
                        };
                        if have_enough {
                            break 'fill;
                        }
                    }
                }

                let picked = match qtype {
                    QType::Bool => select_balanced(yes_pool, no_pool, want),
                    QType::Mcq => mcq_pool.into_iter().take(want).collect::<Vec<_>>(),
                };
                if picked.len() < want {
                    shortfalls.push(Shortfall {
                        domain: spec.domain.clone(),
                        task: kind,
                        qtype,
                        want,
                        got: picked.len(),
                    });
                }
                records.extend(picked);
            }
        }
    }

    Ok(Batch {
        records,
        shortfalls,
    })
}

/// Alternating yes/no selection keeping the label counts within one of each
/// other, even when one pool runs dry.
fn select_balanced(
    yes: Vec<QuestionRecord>,
    no: Vec<QuestionRecord>,
    want: usize,
) -> Vec<QuestionRecord> {
    let mut out = Vec::with_capacity(want);
    let (mut yi, mut ni) = (0usize, 0usize);
    while out.len() < want {
        let diff = yi as i64 - ni as i64;
        let can_yes = yi < yes.len() && diff < 1;
        let can_no = ni < no.len() && -diff < 1;
        if can_yes && (diff <= 0 || !can_no) {
            out.push(yes[yi].clone());
            yi += 1;
        } else if can_no {
            out.push(no[ni].clone());
            ni += 1;
        } else {
            break;
        }
    }
    out
}

/// Per-problem sampled states with lazily computed bundles.
struct ProblemPool<'a> {
    name: String,
    task: &'a GroundTask,
    mutexes: MutexSet,
    states: Vec<State>,
    seed: u64,
    bundles: Vec<Option<StateBundle>>,
}

impl<'a> ProblemPool<'a> {
    fn new(name: &str, task: &'a GroundTask, seed: u64, cfg: &GenConfig) -> ProblemPool<'a> {
        let init = State::initial(task);
        let search = find_plans(
            task,
            &init,
            cfg.sample.num_plans,
            child_seed(seed, "plans"),
            cfg.oracle_cap,
        );
        let sample_cfg = SampleConfig {
            seed: child_seed(seed, "states"),
            ..cfg.sample
        };
        let mut states = sample_states(task, &search.plans, &sample_cfg);
        if states.is_empty() {
            states.push(init);
        }
        states.truncate(cfg.max_states_per_problem);
        let bundles = (0..states.len()).map(|_| None).collect();
        ProblemPool {
            name: name.to_string(),
            task,
            mutexes: compute_mutexes(task),
            states,
            seed,
            bundles,
        }
    }

    fn ensure_bundle(&mut self, idx: usize, cfg: &GenConfig) {
        if self.bundles[idx].is_none() {
            let bseed = child_seed_idx(child_seed(self.seed, "bundle"), idx as u64);
            self.bundles[idx] = Some(StateBundle::compute(
                self.task,
                self.states[idx].clone(),
                bseed,
                cfg.plans_per_state,
                cfg.oracle_cap,
            ));
        }
    }
}
