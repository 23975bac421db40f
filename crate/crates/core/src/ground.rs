//! Grounding: instantiates a lifted task into dense-id atoms and actions.
//!
//! Instantiation runs a delete-relaxed exploration from the initial state, so
//! the ground action set contains exactly the bindings whose preconditions are
//! relaxed-reachable. The atom universe holds those reachable atoms, every
//! goal atom, and every instantiation of the static predicates; goal atoms and
//! static atoms that the exploration never reached are retained but flagged
//! pruned. Declared types are compiled into static unary predicates, which
//! makes type facts available as permanently-false negatives downstream.

use crate::bitset::BitSet;
use crate::pddl::{LiftedDomain, LiftedProblem, Term, TypeDef};
use serde::{Deserialize, Serialize};
use std::collections::{HashMap, HashSet};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ObjId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PredId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct AtomId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ActionId(pub u32);

impl ObjId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}
impl PredId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}
impl AtomId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}
impl ActionId {
    pub fn idx(self) -> usize {
        self.0 as usize
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GroundAtom {
    pub pred: PredId,
    pub args: Vec<ObjId>,
}

#[derive(Debug, Clone)]
pub struct GroundAction {
    pub id: ActionId,
    /// Index into [`GroundTask::schema_names`].
    pub schema: usize,
    pub binding: Vec<ObjId>,
    pub pre: BitSet,
    pub add: BitSet,
    pub del: BitSet,
}

#[derive(Debug, Clone)]
pub struct ObjectInfo {
    pub name: String,
    pub ty: Option<String>,
}

#[derive(Debug, Clone)]
pub struct PredicateInfo {
    pub name: String,
    pub arity: usize,
    /// Never added or deleted by any action schema.
    pub is_static: bool,
    /// Synthesized from a declared type.
    pub is_type_pred: bool,
}

#[derive(Debug, Clone, Copy)]
pub struct GroundCfg {
    pub max_atoms: usize,
    pub max_actions: usize,
}

impl Default for GroundCfg {
    fn default() -> Self {
        GroundCfg {
            max_atoms: 500_000,
            max_actions: 1_000_000,
        }
    }
}

#[derive(Debug, Error)]
pub enum GroundError {
    #[error("type '{0}' collides with a predicate of the same name")]
    TypeNameCollision(String),
    #[error("ground task exceeds the configured limit of {limit} {what}")]
    ResourceLimit { what: &'static str, limit: usize },
}

#[derive(Debug)]
pub struct GroundTask {
    pub domain_name: String,
    pub problem_name: String,
    pub objects: Vec<ObjectInfo>,
    pub predicates: Vec<PredicateInfo>,
    /// Universe, sorted by (predicate, binding); index = atom id.
    pub atoms: Vec<GroundAtom>,
    /// Sorted by (schema name, binding names); index = action id.
    pub actions: Vec<GroundAction>,
    /// Schema names by schema index, in domain order.
    pub schema_names: Vec<String>,
    pub init: BitSet,
    pub goal: BitSet,
    /// Goal atoms in problem-source order; rendering preserves it.
    pub goal_atoms: Vec<AtomId>,
    pub statics_true: BitSet,
    pub statics_false: BitSet,
    /// Universe members the relaxed exploration never reached.
    pub pruned: BitSet,
    /// Goal already holds in init; legal but worth surfacing.
    pub degenerate_goal: bool,
    /// Instantiations discarded because their add and delete effects overlap.
    pub dropped_conflicting: usize,
    type_defs: Vec<TypeDef>,
    atom_index: HashMap<GroundAtom, AtomId>,
    action_index: HashMap<(usize, Vec<ObjId>), ActionId>,
    object_index: HashMap<String, ObjId>,
    pred_index: HashMap<String, PredId>,
}

impl GroundTask {
    pub fn num_atoms(&self) -> usize {
        self.atoms.len()
    }

    pub fn num_actions(&self) -> usize {
        self.actions.len()
    }

    pub fn atom_id(&self, atom: &GroundAtom) -> Option<AtomId> {
        self.atom_index.get(atom).copied()
    }

    pub fn action(&self, id: ActionId) -> &GroundAction {
        &self.actions[id.idx()]
    }

    pub fn object_id(&self, name: &str) -> Option<ObjId> {
        self.object_index.get(name).copied()
    }

    pub fn object_name(&self, id: ObjId) -> &str {
        &self.objects[id.idx()].name
    }

    pub fn pred_id(&self, name: &str) -> Option<PredId> {
        self.pred_index.get(name).copied()
    }

    pub fn pred_of(&self, atom: AtomId) -> &PredicateInfo {
        &self.predicates[self.atoms[atom.idx()].pred.idx()]
    }

    pub fn is_static(&self, atom: AtomId) -> bool {
        self.pred_of(atom).is_static
    }

    /// `(pred arg ...)` form, e.g. `(at c0 l0)`.
    pub fn atom_text(&self, id: AtomId) -> String {
        let atom = &self.atoms[id.idx()];
        let mut s = format!("({}", self.predicates[atom.pred.idx()].name);
        for o in &atom.args {
            s.push(' ');
            s.push_str(self.object_name(*o));
        }
        s.push(')');
        s
    }

    /// `(schema arg ...)` form, e.g. `(sail l0 l1)`.
    pub fn action_text(&self, id: ActionId) -> String {
        let a = self.action(id);
        let mut s = format!("({}", self.schema_names[a.schema]);
        for o in &a.binding {
            s.push(' ');
            s.push_str(self.object_name(*o));
        }
        s.push(')');
        s
    }

    /// Parses `(pred arg ...)`; inverse of [`Self::atom_text`].
    pub fn atom_from_text(&self, text: &str) -> Option<AtomId> {
        let inner = text.trim().strip_prefix('(')?.strip_suffix(')')?;
        let mut parts = inner.split_whitespace();
        let pred = self.pred_id(parts.next()?)?;
        let args = parts
            .map(|p| self.object_id(p))
            .collect::<Option<Vec<_>>>()?;
        self.atom_id(&GroundAtom { pred, args })
    }

    /// Parses `(schema arg ...)`; inverse of [`Self::action_text`].
    pub fn action_from_text(&self, text: &str) -> Option<ActionId> {
        let inner = text.trim().strip_prefix('(')?.strip_suffix(')')?;
        let mut parts = inner.split_whitespace();
        let schema_name = parts.next()?;
        let schema = self.schema_names.iter().position(|s| s == schema_name)?;
        let binding = parts
            .map(|p| self.object_id(p))
            .collect::<Option<Vec<_>>>()?;
        self.action_index.get(&(schema, binding)).copied()
    }

    /// True when `ty` names `obj`'s declared type or one of its ancestors.
    pub fn object_has_type(&self, obj: ObjId, ty: &str) -> bool {
        if ty == "object" {
            return true;
        }
        let Some(declared) = &self.objects[obj.idx()].ty else {
            return false;
        };
        let mut cur = declared.as_str();
        loop {
            if cur == ty {
                return true;
            }
            match self.type_defs.iter().find(|t| t.name == cur) {
                Some(t) => cur = t.parent.as_str(),
                None => return false,
            }
        }
    }

    pub fn objects_of_type(&self, ty: &str) -> Vec<ObjId> {
        (0..self.objects.len() as u32)
            .map(ObjId)
            .filter(|o| self.object_has_type(*o, ty))
            .collect()
    }

    /// Objects `o` whose static unary atom `(pred o)` is true in init.
    pub fn objects_with_static(&self, pred: PredId) -> Vec<ObjId> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(i, a)| a.pred == pred && a.args.len() == 1 && self.statics_true.contains(*i))
            .map(|(_, a)| a.args[0])
            .collect()
    }

    /// Atom ids of a given predicate, in id order.
    pub fn atoms_of_pred(&self, pred: PredId) -> Vec<AtomId> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.pred == pred)
            .map(|(i, _)| AtomId(i as u32))
            .collect()
    }
}

/// Grounds a parsed task; see the module docs for universe construction.
pub fn ground_task(
    domain: &LiftedDomain,
    problem: &LiftedProblem,
    cfg: &GroundCfg,
) -> Result<GroundTask, GroundError> {
    // objects and predicates keep their declaration order; type predicates
    // are appended after the declared ones
    let objects: Vec<ObjectInfo> = problem
        .objects
        .iter()
        .map(|o| ObjectInfo {
            name: o.name.clone(),
            ty: o.ty.clone(),
        })
        .collect();
    let object_index: HashMap<String, ObjId> = objects
        .iter()
        .enumerate()
        .map(|(i, o)| (o.name.clone(), ObjId(i as u32)))
        .collect();

    let mut dynamic_preds: HashSet<&str> = HashSet::new();
    for s in &domain.schemas {
        for atom in s.add.iter().chain(&s.del) {
            dynamic_preds.insert(&atom.pred);
        }
    }

    let mut predicates: Vec<PredicateInfo> = domain
        .predicates
        .iter()
        .map(|p| PredicateInfo {
            name: p.name.clone(),
            arity: p.params.len(),
            is_static: !dynamic_preds.contains(p.name.as_str()),
            is_type_pred: false,
        })
        .collect();
    for t in &domain.types {
        if predicates.iter().any(|p| p.name == t.name) {
            return Err(GroundError::TypeNameCollision(t.name.clone()));
        }
        predicates.push(PredicateInfo {
            name: t.name.clone(),
            arity: 1,
            is_static: true,
            is_type_pred: true,
        });
    }
    let pred_index: HashMap<String, PredId> = predicates
        .iter()
        .enumerate()
        .map(|(i, p)| (p.name.clone(), PredId(i as u32)))
        .collect();

    let type_defs = domain.types.clone();
    let has_type = |obj: ObjId, ty: &str| -> bool {
        if ty == "object" {
            return true;
        }
        let Some(declared) = &objects[obj.idx()].ty else {
            return false;
        };
        let mut cur = declared.as_str();
        loop {
            if cur == ty {
                return true;
            }
            match type_defs.iter().find(|t| t.name == cur) {
                Some(t) => cur = t.parent.as_str(),
                None => return false,
            }
        }
    };

    // initial relaxed facts: the declared init plus one type atom per
    // (object, ancestor type) pair
    let mut reached: HashSet<GroundAtom> = HashSet::new();
    for atom in &problem.init {
        reached.insert(GroundAtom {
            pred: pred_index[&atom.pred],
            args: atom.args.iter().map(|a| object_index[a]).collect(),
        });
    }
    for (i, _) in objects.iter().enumerate() {
        let obj = ObjId(i as u32);
        for t in &type_defs {
            if has_type(obj, &t.name) {
                reached.insert(GroundAtom {
                    pred: pred_index[&t.name],
                    args: vec![obj],
                });
            }
        }
    }

    let subst = |atom: &crate::pddl::LiftedAtom, schema: &crate::pddl::ActionSchema, binding: &[ObjId]| {
        GroundAtom {
            pred: pred_index[&atom.pred],
            args: atom
                .args
                .iter()
                .map(|t| match t {
                    Term::Var(v) => {
                        let pos = schema.params.iter().position(|p| &p.name == v).unwrap();
                        binding[pos]
                    }
                    // parser rejects constants in schema bodies
                    Term::Obj(_) => unreachable!(),
                })
                .collect(),
        }
    };

    // delete-relaxed exploration: instantiate every binding whose (fully
    // substituted) precondition is contained in the reached set, then fold the
    // new add effects in and repeat to a fixpoint
    let mut instances: Vec<Inst> = Vec::new();
    let mut seen: HashSet<(usize, Vec<ObjId>)> = HashSet::new();
    let mut dropped_conflicting = 0usize;

    // candidate objects per parameter, respecting declared parameter types
    let param_domains: Vec<Vec<Vec<ObjId>>> = domain
        .schemas
        .iter()
        .map(|s| {
            s.params
                .iter()
                .map(|p| {
                    (0..objects.len() as u32)
                        .map(ObjId)
                        .filter(|o| match &p.ty {
                            Some(t) => has_type(*o, t),
                            None => true,
                        })
                        .collect()
                })
                .collect()
        })
        .collect();

    loop {
        let mut grew = false;
        for (si, schema) in domain.schemas.iter().enumerate() {
            let domains = &param_domains[si];
            let mut binding: Vec<ObjId> = Vec::with_capacity(domains.len());
            // iterative cartesian product in object-id order
            let mut stack: Vec<usize> = vec![0];
            if domains.is_empty() {
                stack.clear();
                binding.clear();
                if try_instantiate(
                    schema,
                    si,
                    &binding,
                    &subst,
                    &reached,
                    &mut seen,
                    &mut instances,
                    &mut dropped_conflicting,
                ) {
                    grew = true;
                }
            }
            while !stack.is_empty() {
                let depth = stack.len() - 1;
                let idx = stack[depth];
                if idx >= domains[depth].len() {
                    stack.pop();
                    binding.pop();
                    if let Some(t) = stack.last_mut() {
                        *t += 1;
                    }
                    continue;
                }
                binding.push(domains[depth][idx]);
                if stack.len() == domains.len() {
                    if try_instantiate(
                        schema,
                        si,
                        &binding,
                        &subst,
                        &reached,
                        &mut seen,
                        &mut instances,
                        &mut dropped_conflicting,
                    ) {
                        grew = true;
                    }
                    binding.pop();
                    stack[depth] += 1;
                } else {
                    stack.push(0);
                }
            }
            if instances.len() > cfg.max_actions {
                return Err(GroundError::ResourceLimit {
                    what: "actions",
                    limit: cfg.max_actions,
                });
            }
        }
        // fold in the add effects of everything instantiated so far
        let before = reached.len();
        for inst in &instances {
            for a in &inst.add {
                reached.insert(a.clone());
            }
        }
        if !grew && reached.len() == before {
            break;
        }
    }

    // universe: reached ∪ goal ∪ all static instantiations
    let mut universe: HashSet<GroundAtom> = reached.clone();
    for atom in &problem.goal {
        universe.insert(GroundAtom {
            pred: pred_index[&atom.pred],
            args: atom.args.iter().map(|a| object_index[a]).collect(),
        });
    }
    for (pi, pinfo) in predicates.iter().enumerate() {
        if !pinfo.is_static {
            continue;
        }
        let pred = PredId(pi as u32);
        let arg_domains: Vec<Vec<ObjId>> = if pinfo.is_type_pred {
            vec![(0..objects.len() as u32).map(ObjId).collect()]
        } else {
            domain
                .predicate(&pinfo.name)
                .map(|def| {
                    def.params
                        .iter()
                        .map(|p| {
                            (0..objects.len() as u32)
                                .map(ObjId)
                                .filter(|o| match &p.ty {
                                    Some(t) => has_type(*o, t),
                                    None => true,
                                })
                                .collect()
                        })
                        .collect()
                })
                .unwrap_or_default()
        };
        if arg_domains.iter().any(|d| d.is_empty()) {
            continue;
        }
        let mut idxs = vec![0usize; arg_domains.len()];
        'outer: loop {
            let args: Vec<ObjId> = idxs
                .iter()
                .enumerate()
                .map(|(d, &i)| arg_domains[d][i])
                .collect();
            universe.insert(GroundAtom { pred, args });
            if pinfo.arity == 0 {
                break;
            }
            let mut d = arg_domains.len();
            loop {
                if d == 0 {
                    break 'outer;
                }
                d -= 1;
                idxs[d] += 1;
                if idxs[d] < arg_domains[d].len() {
                    break;
                }
                idxs[d] = 0;
            }
        }
        if universe.len() > cfg.max_atoms {
            return Err(GroundError::ResourceLimit {
                what: "atoms",
                limit: cfg.max_atoms,
            });
        }
    }
    if universe.len() > cfg.max_atoms {
        return Err(GroundError::ResourceLimit {
            what: "atoms",
            limit: cfg.max_atoms,
        });
    }

    let mut atoms: Vec<GroundAtom> = universe.into_iter().collect();
    atoms.sort();
    let atom_index: HashMap<GroundAtom, AtomId> = atoms
        .iter()
        .enumerate()
        .map(|(i, a)| (a.clone(), AtomId(i as u32)))
        .collect();
    let n = atoms.len();

    // action ids: lexicographic by schema name, then binding object names
    let schema_names: Vec<String> = domain.schemas.iter().map(|s| s.name.clone()).collect();
    instances.sort_by(|a, b| {
        let ka = (
            &schema_names[a.schema],
            a.binding
                .iter()
                .map(|o| objects[o.idx()].name.as_str())
                .collect::<Vec<_>>(),
        );
        let kb = (
            &schema_names[b.schema],
            b.binding
                .iter()
                .map(|o| objects[o.idx()].name.as_str())
                .collect::<Vec<_>>(),
        );
        ka.cmp(&kb)
    });
    let mut actions = Vec::with_capacity(instances.len());
    let mut action_index = HashMap::new();
    for (i, inst) in instances.iter().enumerate() {
        let id = ActionId(i as u32);
        let to_set = |atoms_list: &[GroundAtom]| {
            BitSet::from_iter(n, atoms_list.iter().map(|a| atom_index[a].idx()))
        };
        actions.push(GroundAction {
            id,
            schema: inst.schema,
            binding: inst.binding.clone(),
            pre: to_set(&inst.pre),
            add: to_set(&inst.add),
            del: to_set(&inst.del),
        });
        action_index.insert((inst.schema, inst.binding.clone()), id);
    }

    let mut init = BitSet::new(n);
    for atom in &problem.init {
        let ga = GroundAtom {
            pred: pred_index[&atom.pred],
            args: atom.args.iter().map(|a| object_index[a]).collect(),
        };
        init.insert(atom_index[&ga].idx());
    }
    let mut statics_true = BitSet::new(n);
    let mut statics_false = BitSet::new(n);
    for (i, a) in atoms.iter().enumerate() {
        if predicates[a.pred.idx()].is_static {
            if init.contains(i) || reached.contains(a) {
                statics_true.insert(i);
            } else {
                statics_false.insert(i);
            }
        }
    }
    // type atoms are true by declaration even though they are not in :init
    for a in reached.iter() {
        if predicates[a.pred.idx()].is_type_pred {
            init.insert(atom_index[a].idx());
        }
    }

    let mut goal = BitSet::new(n);
    let mut goal_atoms = Vec::new();
    for atom in &problem.goal {
        let ga = GroundAtom {
            pred: pred_index[&atom.pred],
            args: atom.args.iter().map(|a| object_index[a]).collect(),
        };
        let id = atom_index[&ga];
        goal.insert(id.idx());
        goal_atoms.push(id);
    }

    let mut pruned = BitSet::new(n);
    for (i, a) in atoms.iter().enumerate() {
        if !reached.contains(a) {
            pruned.insert(i);
        }
    }

    let degenerate_goal = goal.is_subset_of(&init);

    Ok(GroundTask {
        domain_name: domain.name.clone(),
        problem_name: problem.name.clone(),
        objects,
        predicates,
        atoms,
        actions,
        schema_names,
        init,
        goal,
        goal_atoms,
        statics_true,
        statics_false,
        pruned,
        degenerate_goal,
        dropped_conflicting,
        type_defs,
        atom_index,
        action_index,
        object_index,
        pred_index,
    })
}

/// One grounded (but not yet id-assigned) action instantiation.
struct Inst {
    schema: usize,
    binding: Vec<ObjId>,
    pre: Vec<GroundAtom>,
    add: Vec<GroundAtom>,
    del: Vec<GroundAtom>,
}

#[allow(clippy::too_many_arguments)]
fn try_instantiate(
    schema: &crate::pddl::ActionSchema,
    si: usize,
    binding: &[ObjId],
    subst: &impl Fn(&crate::pddl::LiftedAtom, &crate::pddl::ActionSchema, &[ObjId]) -> GroundAtom,
    reached: &HashSet<GroundAtom>,
    seen: &mut HashSet<(usize, Vec<ObjId>)>,
    instances: &mut Vec<Inst>,
    dropped_conflicting: &mut usize,
) -> bool {
    if seen.contains(&(si, binding.to_vec())) {
        return false;
    }
    let pre: Vec<GroundAtom> = schema.pre.iter().map(|a| subst(a, schema, binding)).collect();
    if !pre.iter().all(|p| reached.contains(p)) {
        return false;
    }
    seen.insert((si, binding.to_vec()));
    let add: Vec<GroundAtom> = schema.add.iter().map(|a| subst(a, schema, binding)).collect();
    let del: Vec<GroundAtom> = schema.del.iter().map(|a| subst(a, schema, binding)).collect();
    if add.iter().any(|a| del.contains(a)) {
        *dropped_conflicting += 1;
        return false;
    }
    instances.push(Inst {
        schema: si,
        binding: binding.to_vec(),
        pre,
        add,
        del,
    });
    true
}

#[cfg(test)]
mod tests {
    use super::*;
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
    fn ferry_small_instance_counts() {
        let t = load("ferry", "p01");
        assert_eq!(t.num_actions(), 10);
        let count_schema = |name: &str| {
            t.actions
                .iter()
                .filter(|a| t.schema_names[a.schema] == name)
                .count()
        };
        assert_eq!(count_schema("sail"), 2);
        assert_eq!(count_schema("board"), 4);
        assert_eq!(count_schema("debark"), 4);
        // statics: 16 not-eq + 4 car + 4 location; dynamics: 2 at-ferry +
        // 4 at + 2 on + empty-ferry
        assert_eq!(t.num_atoms(), 33);
        assert_eq!(t.statics_true.count(), 6);
        assert_eq!(t.statics_false.count(), 18);
        assert_eq!(t.pruned.count(), 18);
        assert_eq!(t.dropped_conflicting, 0);
        assert!(!t.degenerate_goal);
        assert_eq!(t.init.count(), 9);

        let at = t.atom_from_text("(at c0 l0)").unwrap();
        assert!(t.init.contains(at.idx()));
        assert!(!t.is_static(at));
        assert_eq!(t.goal_atoms.len(), 1);
        assert_eq!(t.atom_text(t.goal_atoms[0]), "(at c0 l1)");

        // ill-typed static instantiations exist as permanently-false atoms
        let bogus = t.atom_from_text("(location c0)").unwrap();
        assert!(t.statics_false.contains(bogus.idx()));
        assert!(t.is_static(bogus));
        let bogus2 = t.atom_from_text("(car l0)").unwrap();
        assert!(t.statics_false.contains(bogus2.idx()));
        assert!(t.statics_true.contains(t.atom_from_text("(car c0)").unwrap().idx()));
    }

    #[test]
    fn ferry_action_text_round_trip() {
        let t = load("ferry", "p01");
        for a in &t.actions {
            let text = t.action_text(a.id);
            assert_eq!(t.action_from_text(&text), Some(a.id));
        }
        assert!(t.action_from_text("(sail l0 l0)").is_none());
        assert!(t.action_from_text("(fly l0 l1)").is_none());
    }

    #[test]
    fn atom_ids_sorted_and_stable() {
        let t = load("ferry", "p01");
        for w in t.atoms.windows(2) {
            assert!(w[0] < w[1]);
        }
        for (i, a) in t.atoms.iter().enumerate() {
            assert_eq!(t.atom_id(a), Some(AtomId(i as u32)));
        }
        let names: Vec<String> = t
            .actions
            .iter()
            .map(|a| t.action_text(a.id))
            .collect();
        let mut sorted = names.clone();
        sorted.sort();
        assert_eq!(names, sorted);
    }

    #[test]
    fn blocksworld_types_become_static_atoms() {
        let t = load("blocksworld", "p01");
        let ta = t.atom_from_text("(block block_1)").unwrap();
        assert!(t.is_static(ta));
        assert!(t.pred_of(ta).is_type_pred);
        assert!(t.statics_true.contains(ta.idx()));
        assert!(t.init.contains(ta.idx()));
        // self-stacking instantiations conflict (add and delete (clear x))
        assert!(t.dropped_conflicting > 0);
        for a in &t.actions {
            if t.schema_names[a.schema] == "stack" || t.schema_names[a.schema] == "unstack" {
                assert_ne!(a.binding[0], a.binding[1]);
            }
        }
    }

    #[test]
    fn gripper_move_to_same_room_dropped() {
        let t = load("gripper", "p01");
        assert!(t.dropped_conflicting > 0);
        for a in &t.actions {
            if t.schema_names[a.schema] == "move" {
                assert_ne!(a.binding[0], a.binding[1]);
            }
        }
        // typed universe never contains ill-typed bindings
        assert!(t.atom_from_text("(at-robby ball1)").is_none());
    }

    #[test]
    fn swap_agents_and_items_always_differ() {
        let t = load("swap", "p01");
        assert!(t.num_actions() > 0);
        assert!(t.dropped_conflicting > 0);
        for a in &t.actions {
            assert_ne!(a.binding[0], a.binding[1], "agents must differ");
            assert_ne!(a.binding[2], a.binding[3], "items must differ");
        }
    }

    #[test]
    fn type_name_collision_rejected() {
        let dom = parse_domain(
            "(define (domain d) (:requirements :strips :typing)
               (:types block)
               (:predicates (block ?b) (on ?a ?b - block))
               (:action no-op :parameters (?b - block)
                 :precondition (and (block ?b)) :effect (and (on ?b ?b))))",
        )
        .unwrap();
        let prob = parse_problem(
            "(define (problem p) (:domain d) (:objects a - block)
               (:init (block a)) (:goal (and (block a))))",
            &dom,
        )
        .unwrap();
        let err = ground_task(&dom, &prob, &GroundCfg::default()).unwrap_err();
        assert!(matches!(err, GroundError::TypeNameCollision(name) if name == "block"));
    }

    #[test]
    fn degenerate_goal_flagged() {
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
        assert!(t.degenerate_goal);
    }

    #[test]
    fn action_cap_enforced() {
        let dom = parse_domain(
            "(define (domain d) (:requirements :strips)
               (:predicates (p ?x) (q ?x ?y))
               (:action link :parameters (?x ?y)
                 :precondition (and (p ?x) (p ?y)) :effect (and (q ?x ?y))))",
        )
        .unwrap();
        let prob = parse_problem(
            "(define (problem pr) (:domain d)
               (:objects a b c d e)
               (:init (p a) (p b) (p c) (p d) (p e))
               (:goal (and (q a b))))",
            &dom,
        )
        .unwrap();
        let cfg = GroundCfg {
            max_actions: 10,
            ..GroundCfg::default()
        };
        let err = ground_task(&dom, &prob, &cfg).unwrap_err();
        assert!(matches!(err, GroundError::ResourceLimit { what: "actions", .. }));
    }

    #[test]
    fn goal_only_atom_enters_universe_pruned() {
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
        // q(b) needs p(b), which is never true; the atom stays in the
        // universe but is flagged pruned
        let qb = t.atom_from_text("(q b)").unwrap();
        assert!(t.pruned.contains(qb.idx()));
        assert!(!t.is_static(qb));
        assert_eq!(t.num_actions(), 1);
    }
}
