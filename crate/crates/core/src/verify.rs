//! Dataset verification against a brute-force oracle.
//!
//! Verification has two layers. The replay layer re-derives every gold label
//! and every reconstructable text from the record's provenance using only
//! the task semantics ([`crate::taskgen::check`]). The oracle layer then
//! re-proves the claims that provenance certifies indirectly: reachability
//! and action-reachability answers are checked against an exhaustive
//! breadth-first search of the state space, and landmark positives against
//! an enumeration of all bounded plans. The searches are capped, so a record
//! whose proof would outgrow the cap is reported as unverifiable rather than
//! passed.

use crate::analysis::{oracle_bfs, OracleIndex};
use crate::ground::{AtomId, GroundTask};
use crate::taskgen::check::{self, atom_id, atom_ids, state_of};
use crate::taskgen::{
    AReachCert, DomainSpec, Provenance, QType, QuestionRecord, TaskKind,
};
use crate::transition::progress;
use std::collections::{BTreeMap, HashMap};

/// Bounded plan enumerations larger than this are unverifiable.
const PLAN_ENUM_LIMIT: usize = 50_000;
/// Landmark positives are checked against every plan at most this much
/// longer than the shortest one.
const LANDMARK_SLACK: usize = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VerifyFailure {
    pub id: String,
    pub reason: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct VerifyCounts {
    pub confirmed: usize,
    pub unverifiable: usize,
}

#[derive(Debug, Default)]
pub struct VerifyReport {
    pub counts: BTreeMap<(TaskKind, QType), VerifyCounts>,
    pub failures: Vec<VerifyFailure>,
    /// A few example reasons why records were unverifiable, for diagnostics.
    pub unverifiable_examples: Vec<String>,
}

impl VerifyReport {
    pub fn all_confirmed(&self) -> bool {
        self.failures.is_empty() && self.counts.values().all(|c| c.unverifiable == 0)
    }

    pub fn confirmed(&self) -> usize {
        self.counts.values().map(|c| c.confirmed).sum()
    }

    pub fn unverifiable(&self) -> usize {
        self.counts.values().map(|c| c.unverifiable).sum()
    }
}

/// One line per (task, question type), then failures.
pub fn render_verify(report: &VerifyReport) -> String {
    let mut out = String::new();
    for ((task, qtype), c) in &report.counts {
        out.push_str(&format!(
            "{} {}: {} confirmed, {} unverifiable\n",
            task.key(),
            qtype.key(),
            c.confirmed,
            c.unverifiable,
        ));
    }
    out.push_str(&format!(
        "total: {} confirmed, {} unverifiable, {} failed\n",
        report.confirmed(),
        report.unverifiable(),
        report.failures.len(),
    ));
    for why in &report.unverifiable_examples {
        out.push_str(&format!("UNVERIFIABLE {why}\n"));
    }
    for f in &report.failures {
        out.push_str(&format!("FAIL {}: {}\n", f.id, f.reason));
    }
    out
}

enum Strength {
    Confirmed,
    Unverifiable(String),
}

/// Existence claims are confirmed by any witness, even in a truncated
/// search; non-existence claims need the exhausted space.
fn check_claim(found: bool, truncated: bool, claim: bool, what: &str) -> Result<Strength, String> {
    match (claim, found, truncated) {
        (true, true, _) => Ok(Strength::Confirmed),
        (true, false, false) => Err(format!("{what}: claimed reachable, oracle finds no state")),
        (true, false, true) => Ok(Strength::Unverifiable(format!(
            "{what}: no witness within the state cap"
        ))),
        (false, true, _) => Err(format!("{what}: claimed unreachable, oracle reaches it")),
        (false, false, false) => Ok(Strength::Confirmed),
        (false, false, true) => Ok(Strength::Unverifiable(format!(
            "{what}: search truncated before exhausting the space"
        ))),
    }
}

fn merge(a: Strength, b: Strength) -> Strength {
    match (a, b) {
        (Strength::Confirmed, s) => s,
        (s, _) => s,
    }
}

struct OracleCache<'t> {
    task: &'t GroundTask,
    cap: usize,
    by_state: HashMap<Vec<String>, OracleIndex>,
}

impl<'t> OracleCache<'t> {
    fn get(&mut self, state_syms: &[String]) -> Result<&OracleIndex, String> {
        if !self.by_state.contains_key(state_syms) {
            let s = state_of(self.task, state_syms)?;
            let o = oracle_bfs(self.task, &s, self.cap);
            self.by_state.insert(state_syms.to_vec(), o);
        }
        Ok(&self.by_state[state_syms])
    }
}

fn conj_reachable(o: &OracleIndex, facts: &[AtomId]) -> bool {
    (0..o.num_states()).any(|i| facts.iter().all(|&a| o.state(i).contains(a)))
}

/// Whether `fact` appears somewhere along every goal-reaching plan of length
/// at most shortest+slack, the state `s` included. None when the enumeration
/// refuses (truncated index or too many plans).
fn in_every_bounded_plan(
    task: &GroundTask,
    o: &OracleIndex,
    fact: AtomId,
    slack: usize,
) -> Option<Result<(), String>> {
    let shortest = o.shortest_goal_dist()? as usize;
    let plans = o.enumerate_plans(shortest + slack, PLAN_ENUM_LIMIT)?;
    let root = o.state(0).clone();
    for plan in &plans {
        let mut u = root.clone();
        let mut seen = u.contains(fact);
        for &a in plan {
            match progress(task, &u, a) {
                Ok(v) => u = v,
                Err(_) => return Some(Err("enumerated plan is not applicable".to_string())),
            }
            seen = seen || u.contains(fact);
        }
        if !seen {
            return Some(Err(format!(
                "a bounded plan of length {} avoids the claimed landmark",
                plan.len()
            )));
        }
    }
    Some(Ok(()))
}

fn strengthen(
    task: &GroundTask,
    oracles: &mut OracleCache,
    rec: &QuestionRecord,
) -> Result<Strength, String> {
    match &rec.provenance {
        // Replay of these families is already definitional: the gold label
        // is a direct function of the replayed transition semantics.
        Provenance::AppBool { .. }
        | Provenance::AppMcq { .. }
        | Provenance::ProgBool { .. }
        | Provenance::ProgMcq { .. }
        | Provenance::ValBool { .. }
        | Provenance::ValMcq { .. }
        | Provenance::JustBool { .. }
        | Provenance::JustMcq { .. } => Ok(Strength::Confirmed),

        Provenance::ReachBool { state, facts, cert: _ } => {
            let ids = atom_ids(task, facts)?;
            let o = oracles.get(state)?;
            check_claim(
                conj_reachable(o, &ids),
                o.is_truncated(),
                rec.gold == "yes",
                "conjunction",
            )
        }
        Provenance::ReachMcq {
            state,
            options,
            certs: _,
            gold,
        } => {
            let o = oracles.get(state)?;
            let truncated = o.is_truncated();
            let mut strength = Strength::Confirmed;
            for (k, opt) in options.iter().enumerate() {
                let ids = atom_ids(task, opt)?;
                let s = check_claim(
                    conj_reachable(oracles.get(state)?, &ids),
                    truncated,
                    k == *gold,
                    &format!("option {k}"),
                )?;
                strength = merge(strength, s);
            }
            Ok(strength)
        }
        Provenance::ActionReachBool { state, action, cert } => {
            if matches!(cert, AReachCert::NotAnAction) {
                // Nothing reachable to search for: replay already checked
                // that the text resolves to no ground action.
                return Ok(Strength::Confirmed);
            }
            let id = check::action_id(task, action)?;
            let o = oracles.get(state)?;
            check_claim(
                o.action_applicable_somewhere(id),
                o.is_truncated(),
                rec.gold == "yes",
                "action",
            )
        }
        Provenance::ActionReachMcq {
            state,
            options,
            certs,
            gold,
        } => {
            let o = oracles.get(state)?;
            let truncated = o.is_truncated();
            let mut strength = Strength::Confirmed;
            for (k, (sym, cert)) in options.iter().zip(certs).enumerate() {
                if matches!(cert, AReachCert::NotAnAction) {
                    continue;
                }
                let id = check::action_id(task, sym)?;
                let s = check_claim(
                    oracles.get(state)?.action_applicable_somewhere(id),
                    truncated,
                    k == *gold,
                    &format!("option {k}"),
                )?;
                strength = merge(strength, s);
            }
            Ok(strength)
        }
        Provenance::LandBool {
            state,
            fact,
            is_landmark,
            witness: _,
        } => {
            if !is_landmark {
                // The witness plan was replayed already; it is itself the
                // disproof.
                return Ok(Strength::Confirmed);
            }
            let id = atom_id(task, fact)?;
            let o = oracles.get(state)?;
            match in_every_bounded_plan(task, o, id, LANDMARK_SLACK) {
                Some(Ok(())) => Ok(Strength::Confirmed),
                Some(Err(e)) => Err(e),
                None => Ok(Strength::Unverifiable(
                    "plan enumeration exceeds the cap".to_string(),
                )),
            }
        }
        Provenance::LandMcq {
            state,
            options,
            witnesses: _,
            gold,
        } => {
            let id = atom_id(task, &options[*gold])?;
            let o = oracles.get(state)?;
            match in_every_bounded_plan(task, o, id, LANDMARK_SLACK) {
                Some(Ok(())) => Ok(Strength::Confirmed),
                Some(Err(e)) => Err(e),
                None => Ok(Strength::Unverifiable(
                    "plan enumeration exceeds the cap".to_string(),
                )),
            }
        }
    }
}

/// Verifies every record: provenance replay first, oracle re-proof second.
/// `cap` bounds each per-state breadth-first search.
pub fn verify_records(
    domains: &[DomainSpec],
    records: &[QuestionRecord],
    cap: usize,
) -> VerifyReport {
    let mut report = VerifyReport::default();
    let mut mutexes = HashMap::new();
    let mut caches: HashMap<String, OracleCache<'_>> = HashMap::new();

    for rec in records {
        let Some(spec) = domains.iter().find(|d| d.domain == rec.domain) else {
            report.failures.push(VerifyFailure {
                id: rec.id.clone(),
                reason: format!("unknown domain {}", rec.domain),
            });
            continue;
        };
        let Some((_, task)) = spec
            .problems
            .iter()
            .find(|(name, _)| *name == rec.problem_file)
        else {
            report.failures.push(VerifyFailure {
                id: rec.id.clone(),
                reason: format!("unknown problem {}/{}", rec.domain, rec.problem_file),
            });
            continue;
        };
        let key = format!("{}/{}", rec.domain, rec.problem_file);
        let mx = mutexes
            .entry(key.clone())
            .or_insert_with(|| crate::analysis::compute_mutexes(task));

        let replayed = check::replay_with(task, &spec.tpl, Some(&*mx), rec);
        let strength = replayed.and_then(|()| {
            let cache = caches.entry(key).or_insert_with(|| OracleCache {
                task,
                cap,
                by_state: HashMap::new(),
            });
            strengthen(task, cache, rec)
        });
        let counts = report.counts.entry((rec.task, rec.qtype)).or_default();
        match strength {
            Ok(Strength::Confirmed) => counts.confirmed += 1,
            Ok(Strength::Unverifiable(why)) => {
                counts.unverifiable += 1;
                if report.unverifiable_examples.len() < 5 {
                    report.unverifiable_examples.push(format!("{}: {why}", rec.id));
                }
            }
            Err(reason) => report.failures.push(VerifyFailure {
                id: rec.id.clone(),
                reason,
            }),
        }
    }
    report
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::taskgen::testutil::{load_task, load_tpl};
    use crate::taskgen::{assemble_batch, GenConfig};

    fn ferry_spec() -> DomainSpec {
        let t1 = load_task("ferry", "p01");
        let t2 = load_task("ferry", "p02");
        DomainSpec {
            domain: "ferry".into(),
            tpl: load_tpl(&t1),
            problems: vec![("p01.pddl".into(), t1), ("p02.pddl".into(), t2)],
        }
    }

    fn small_batch(per_domain: usize, seed: u64) -> Vec<QuestionRecord> {
        let spec = ferry_spec();
        let cfg = GenConfig {
            per_domain,
            seed,
            ..GenConfig::default()
        };
        assemble_batch(std::slice::from_ref(&spec), &cfg)
            .unwrap()
            .records
    }

    #[test]
    fn generated_batch_verifies_clean() {
        let records = small_batch(4, 9);
        let report = verify_records(&[ferry_spec()], &records, 200_000);
        assert!(
            report.failures.is_empty(),
            "failures: {:?}",
            report.failures
        );
        assert_eq!(report.unverifiable(), 0, "{}", render_verify(&report));
        assert_eq!(report.confirmed(), records.len());
    }

    #[test]
    fn flipped_gold_is_caught() {
        let mut records = small_batch(2, 3);
        // Flip a boolean gold without touching provenance.
        let victim = records
            .iter_mut()
            .find(|r| r.qtype == QType::Bool)
            .unwrap();
        victim.gold = if victim.gold == "yes" { "no" } else { "yes" }.to_string();
        let id = victim.id.clone();
        let report = verify_records(&[ferry_spec()], &records, 200_000);
        assert!(report.failures.iter().any(|f| f.id == id));
    }

    #[test]
    fn tiny_cap_reports_unverifiable_not_failure() {
        let records: Vec<QuestionRecord> = small_batch(4, 9)
            .into_iter()
            .filter(|r| r.task == TaskKind::Reachability && r.gold == "no")
            .collect();
        assert!(!records.is_empty());
        // A cap of one state cannot exhaust anything; negative reachability
        // claims must become unverifiable, never confirmed.
        let report = verify_records(&[ferry_spec()], &records, 1);
        assert!(report.failures.is_empty(), "{:?}", report.failures);
        assert!(report.unverifiable() > 0);
    }

    #[test]
    fn unknown_problem_is_a_failure() {
        let mut records = small_batch(1, 5);
        records[0].problem_file = "p99.pddl".into();
        let report = verify_records(&[ferry_spec()], &records, 10_000);
        assert!(report
            .failures
            .iter()
            .any(|f| f.reason.contains("unknown problem")));
    }
}
