//! Turns states, facts, actions, and goals into natural-language text.
//!
//! All output is deterministic: atoms render in id order except goal facts,
//! which keep their problem-source order, and every phrasing comes from the
//! domain's [`TemplateSet`]. `parse_action_name` inverts action rendering:
//! it accepts any phrasing of any schema and resolves to a unique ground
//! action or returns `None`.

use std::collections::{BTreeMap, HashSet};

use crate::ground::{ActionId, AtomId, GroundTask, ObjId, PredId};
use crate::render::template::{
    ComposeAlt, JoinStyle, Section, StateRule, TemplateError, TemplateSet,
};
use crate::transition::State;

/// `a`, `a and b`, `a, b, and c`.
pub fn comma_and(items: &[String]) -> String {
    match items {
        [] => String::new(),
        [one] => one.clone(),
        [a, b] => format!("{a} and {b}"),
        _ => {
            let head = &items[..items.len() - 1];
            format!("{}, and {}", head.join(", "), items[items.len() - 1])
        }
    }
}

fn join_list(items: &[String], style: JoinStyle) -> String {
    match style {
        JoinStyle::Semicolon => items.join("; "),
        JoinStyle::Comma => items.join(", "),
        JoinStyle::And => items.join(" and "),
        JoinStyle::CommaAnd => comma_and(items),
    }
}

fn subst(template: &str, lookup: impl Fn(&str) -> String) -> String {
    let mut out = String::with_capacity(template.len());
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let Some(close) = rest[open..].find('}') else {
            break;
        };
        out.push_str(&rest[..open]);
        out.push_str(&lookup(&rest[open + 1..open + close]));
        rest = &rest[open + close + 1..];
    }
    out.push_str(rest);
    out
}

fn subst_args(task: &GroundTask, template: &str, args: &[ObjId]) -> String {
    subst(template, |ph| {
        let idx: usize = ph.parse().expect("validated placeholder index");
        task.object_name(args[idx]).to_string()
    })
}

/// Objects denoted by an intro pool name: a type, or a static unary predicate.
fn pool_objects(task: &GroundTask, name: &str) -> Vec<ObjId> {
    let typed = task.objects_of_type(name);
    if !typed.is_empty() {
        return typed;
    }
    match task.pred_id(name) {
        Some(p) => task.objects_with_static(p),
        None => Vec::new(),
    }
}

/// The intro paragraph: template lines with `{count:x}`/`{list:x}` resolved,
/// joined by double spaces.
pub fn render_intro(task: &GroundTask, tpl: &TemplateSet) -> String {
    let lines: Vec<String> = tpl
        .intro
        .iter()
        .map(|line| {
            subst(line, |ph| {
                if let Some(name) = ph.strip_prefix("count:") {
                    pool_objects(task, name).len().to_string()
                } else if let Some(name) = ph.strip_prefix("list:") {
                    let names: Vec<String> = pool_objects(task, name)
                        .iter()
                        .map(|o| task.object_name(*o).to_string())
                        .collect();
                    comma_and(&names)
                } else {
                    debug_assert!(false, "unvalidated intro placeholder {{{ph}}}");
                    String::new()
                }
            })
        })
        .collect();
    lines.join("  ")
}

/// One standalone fact sentence, e.g. `The ferry is at l1 location`.
pub fn render_fact(task: &GroundTask, tpl: &TemplateSet, atom: AtomId) -> String {
    let ga = &task.atoms[atom.idx()];
    let pred = &task.predicates[ga.pred.idx()];
    match tpl.fact_template(&pred.name) {
        Some(t) => subst_args(task, t, &ga.args),
        None => {
            debug_assert!(false, "no fact template for {}", pred.name);
            task.atom_text(atom)
        }
    }
}

/// Several facts as one conjunctive sentence.
pub fn render_facts(task: &GroundTask, tpl: &TemplateSet, atoms: &[AtomId]) -> String {
    let texts: Vec<String> = atoms.iter().map(|a| render_fact(task, tpl, *a)).collect();
    comma_and(&texts)
}

/// The goal sentence; goal facts keep problem-source order.
pub fn render_goal(task: &GroundTask, tpl: &TemplateSet) -> String {
    format!(
        "The goal is to reach a state where the following facts hold: {}.",
        render_facts(task, tpl, &task.goal_atoms)
    )
}

/// State text without the `Currently, ` lead; empty when no dynamic atom
/// is true. Compose and group sections apply in template-file order, then
/// unconsumed atoms fall back to their predicate's `state:` sentence.
pub fn render_state(task: &GroundTask, tpl: &TemplateSet, s: &State) -> String {
    let dynamic: Vec<AtomId> = s
        .atoms()
        .into_iter()
        .filter(|a| {
            let p = task.pred_of(*a);
            !p.is_static && !p.is_type_pred
        })
        .collect();
    let mut consumed: HashSet<AtomId> = HashSet::new();
    let mut fragments: Vec<String> = Vec::new();

    for section in &tpl.sections {
        match section {
            Section::Compose { alts, .. } => loop {
                let fired = alts.iter().find_map(|alt| {
                    match_alt(task, alt, &dynamic, &consumed).map(|m| (alt, m))
                });
                let Some((alt, (chosen, binding))) = fired else {
                    break;
                };
                consumed.extend(chosen);
                fragments.push(subst(&alt.text, |ph| {
                    let var = ph.strip_prefix('?').expect("validated compose placeholder");
                    task.object_name(binding[var]).to_string()
                }));
            },
            Section::Group(g) => {
                let pid = task.pred_id(&g.pred).expect("validated group predicate");
                let members: Vec<AtomId> = dynamic
                    .iter()
                    .copied()
                    .filter(|a| task.atoms[a.idx()].pred == pid && !consumed.contains(a))
                    .collect();
                if members.is_empty() {
                    continue;
                }
                consumed.extend(&members);
                let body = match g.by {
                    None => {
                        let items: Vec<String> = members
                            .iter()
                            .map(|a| subst_args(task, &g.item, &task.atoms[a.idx()].args))
                            .collect();
                        join_list(&items, g.join)
                    }
                    Some(k) => {
                        // First-seen key order; members stay in atom-id order.
                        let mut keys: Vec<ObjId> = Vec::new();
                        let mut groups: BTreeMap<ObjId, Vec<ObjId>> = BTreeMap::new();
                        for a in &members {
                            let args = &task.atoms[a.idx()].args;
                            let key = args[k];
                            if !groups.contains_key(&key) {
                                keys.push(key);
                            }
                            // Convention: grouped predicates are binary, the
                            // non-key argument names the member.
                            let member = args[1 - k];
                            groups.entry(key).or_default().push(member);
                        }
                        let items: Vec<String> = keys
                            .iter()
                            .map(|key| {
                                let names: Vec<String> = groups[key]
                                    .iter()
                                    .map(|o| task.object_name(*o).to_string())
                                    .collect();
                                let item_tpl = if names.len() == 1 {
                                    g.item_singular.as_deref().unwrap_or(&g.item)
                                } else {
                                    &g.item
                                };
                                subst(item_tpl, |ph| match ph {
                                    "members" => comma_and(&names),
                                    "key" => task.object_name(*key).to_string(),
                                    _ => unreachable!("validated group placeholder"),
                                })
                            })
                            .collect();
                        join_list(&items, g.join)
                    }
                };
                fragments.push(if g.lead.is_empty() {
                    body
                } else {
                    format!("{} {}", g.lead, body)
                });
            }
        }
    }

    for a in &dynamic {
        if consumed.contains(a) {
            continue;
        }
        let pred = task.pred_of(*a);
        match tpl.predicates.get(&pred.name).and_then(|p| p.state.as_ref()) {
            Some(StateRule::Text(t)) => {
                fragments.push(subst_args(task, t, &task.atoms[a.idx()].args))
            }
            Some(StateRule::Omit) => {}
            None => debug_assert!(false, "unconsumed atom {} lacks state rule", task.atom_text(*a)),
        }
    }

    if fragments.is_empty() {
        String::new()
    } else {
        format!("{}.", fragments.join(". "))
    }
}

/// Matches one compose alternative against unconsumed atoms, lowest atom ids
/// first. Returns the consumed atoms and the variable binding.
#[allow(clippy::type_complexity)]
fn match_alt<'t>(
    task: &GroundTask,
    alt: &'t ComposeAlt,
    dynamic: &[AtomId],
    consumed: &HashSet<AtomId>,
) -> Option<(Vec<AtomId>, BTreeMap<&'t str, ObjId>)> {
    fn rec<'t>(
        task: &GroundTask,
        alt: &'t ComposeAlt,
        dynamic: &[AtomId],
        consumed: &HashSet<AtomId>,
        k: usize,
        chosen: &mut Vec<AtomId>,
        binding: &mut BTreeMap<&'t str, ObjId>,
    ) -> bool {
        let Some(pat) = alt.patterns.get(k) else {
            return true;
        };
        let pid = task.pred_id(&pat.pred).expect("validated compose predicate");
        for a in dynamic {
            if consumed.contains(a) || chosen.contains(a) || task.atoms[a.idx()].pred != pid {
                continue;
            }
            let args = &task.atoms[a.idx()].args;
            let mut added: Vec<&'t str> = Vec::new();
            let mut ok = true;
            for (var, obj) in pat.vars.iter().zip(args) {
                match binding.get(var.as_str()) {
                    Some(b) if b == obj => {}
                    Some(_) => {
                        ok = false;
                        break;
                    }
                    None => {
                        binding.insert(var.as_str(), *obj);
                        added.push(var.as_str());
                    }
                }
            }
            if ok {
                chosen.push(*a);
                if rec(task, alt, dynamic, consumed, k + 1, chosen, binding) {
                    return true;
                }
                chosen.pop();
            }
            for key in added {
                binding.remove(key);
            }
        }
        false
    }

    let mut chosen = Vec::new();
    let mut binding = BTreeMap::new();
    if rec(task, alt, dynamic, consumed, 0, &mut chosen, &mut binding) {
        Some((chosen, binding))
    } else {
        None
    }
}

/// Full question context: intro, then the current state, then optionally
/// the goal. Segments join with double spaces.
pub fn render_context(
    task: &GroundTask,
    tpl: &TemplateSet,
    s: &State,
    include_goal: bool,
) -> String {
    let mut parts = vec![render_intro(task, tpl)];
    let state = render_state(task, tpl, s);
    if !state.is_empty() {
        parts.push(format!("Currently, {state}"));
    }
    if include_goal {
        parts.push(render_goal(task, tpl));
    }
    parts.join("  ")
}

/// Canonical phrasing of a ground action.
pub fn render_action(task: &GroundTask, tpl: &TemplateSet, a: ActionId) -> String {
    render_action_variant(task, tpl, a, 0)
}

/// Renders with phrasing `variant % phrasing_count`; variant 0 is canonical.
pub fn render_action_variant(
    task: &GroundTask,
    tpl: &TemplateSet,
    a: ActionId,
    variant: usize,
) -> String {
    let ga = task.action(a);
    let schema = &task.schema_names[ga.schema];
    let phrasings = &tpl.actions[schema].phrasings;
    subst_args(task, &phrasings[variant % phrasings.len()], &ga.binding)
}

/// Renders the action through a corrupt template: same arguments, but the
/// text must not resolve to any real action.
pub fn render_corrupt_action(
    task: &GroundTask,
    tpl: &TemplateSet,
    a: ActionId,
    variant: usize,
) -> String {
    let ga = task.action(a);
    let schema = &task.schema_names[ga.schema];
    let corrupt = &tpl.actions[schema].corrupt;
    subst_args(task, &corrupt[variant % corrupt.len()], &ga.binding)
}

/// Renders the canonical phrasing of `schema` with raw argument names, which
/// need not name real objects; used to build near-miss action texts that are
/// expected to resolve to no ground action.
pub fn render_action_with_names(
    tpl: &TemplateSet,
    schema: &str,
    names: &[String],
) -> Option<String> {
    let phrasing = tpl.actions.get(schema)?.phrasings.first()?;
    Some(subst(phrasing, |ph| {
        let idx: usize = ph.parse().expect("validated placeholder index");
        names[idx].clone()
    }))
}

/// A plan as comma-separated canonical action phrasings.
pub fn render_plan(task: &GroundTask, tpl: &TemplateSet, actions: &[ActionId]) -> String {
    let texts: Vec<String> = actions
        .iter()
        .map(|a| render_action(task, tpl, *a))
        .collect();
    texts.join(", ")
}

fn normalize(text: &str) -> String {
    let lowered = text.to_lowercase();
    let mut out = String::with_capacity(lowered.len());
    for word in lowered.split_whitespace() {
        if !out.is_empty() {
            out.push(' ');
        }
        out.push_str(word);
    }
    while out.ends_with(['.', '?', '!']) {
        out.pop();
        while out.ends_with(' ') {
            out.pop();
        }
    }
    out
}

/// Matches a phrasing template against normalized text. Returns, for each
/// placeholder, `(parameter index, captured token)`.
fn match_pattern(template: &str, text: &str) -> Option<Vec<(usize, String)>> {
    enum Seg {
        Lit(String),
        Arg(usize),
    }
    let mut segs = Vec::new();
    let mut rest = template;
    while let Some(open) = rest.find('{') {
        let close = rest[open..].find('}')? + open;
        if open > 0 {
            segs.push(Seg::Lit(rest[..open].to_string()));
        }
        segs.push(Seg::Arg(rest[open + 1..close].parse().ok()?));
        rest = &rest[close + 1..];
    }
    if !rest.is_empty() {
        segs.push(Seg::Lit(rest.to_string()));
    }

    let mut pos = 0usize;
    let mut caps = Vec::new();
    for seg in &segs {
        match seg {
            Seg::Lit(l) => {
                if !text[pos..].starts_with(l.as_str()) {
                    return None;
                }
                pos += l.len();
            }
            Seg::Arg(i) => {
                // Object names are single whitespace-free tokens.
                let token_end = text[pos..]
                    .find(char::is_whitespace)
                    .map_or(text.len(), |e| pos + e);
                if token_end == pos {
                    return None;
                }
                caps.push((*i, text[pos..token_end].to_string()));
                pos = token_end;
            }
        }
    }
    (pos == text.len()).then_some(caps)
}

/// Resolves action text in any known phrasing to a unique ground action.
/// Ambiguous, corrupt, or unmatched text yields `None`. Matching is
/// case-insensitive and ignores surrounding whitespace and trailing
/// punctuation.
pub fn parse_action_name(task: &GroundTask, tpl: &TemplateSet, text: &str) -> Option<ActionId> {
    let text = normalize(text);
    let mut candidates: Vec<ActionId> = Vec::new();
    for (schema_idx, schema) in task.schema_names.iter().enumerate() {
        let Some(section) = tpl.actions.get(schema) else {
            continue;
        };
        for phrasing in &section.phrasings {
            let Some(caps) = match_pattern(&normalize(phrasing), &text) else {
                continue;
            };
            for action in &task.actions {
                if action.schema != schema_idx {
                    continue;
                }
                let hit = caps
                    .iter()
                    .all(|(i, tok)| task.object_name(action.binding[*i]) == tok);
                if hit && !candidates.contains(&action.id) {
                    candidates.push(action.id);
                }
            }
        }
    }
    match candidates.as_slice() {
        [single] => Some(*single),
        _ => None,
    }
}

/// Rendering-level template checks against one ground task:
///
/// * canonical action texts are pairwise distinct,
/// * every phrasing of every ground action parses back to that action,
/// * no corrupt phrasing parses to any action.
pub fn validate_rendering(task: &GroundTask, tpl: &TemplateSet) -> Result<(), TemplateError> {
    let fail = |msg: String| TemplateError::Invalid {
        domain: task.domain_name.clone(),
        msg,
    };
    let mut seen: BTreeMap<String, ActionId> = BTreeMap::new();
    for action in &task.actions {
        let canonical = render_action(task, tpl, action.id);
        if let Some(other) = seen.insert(canonical.clone(), action.id) {
            return Err(fail(format!(
                "canonical phrasing '{canonical}' renders both {} and {}",
                task.action_text(other),
                task.action_text(action.id)
            )));
        }
        let schema = &task.schema_names[action.schema];
        for v in 0..tpl.phrasing_count(schema) {
            let text = render_action_variant(task, tpl, action.id, v);
            if parse_action_name(task, tpl, &text) != Some(action.id) {
                return Err(fail(format!(
                    "phrasing '{text}' does not parse back to {}",
                    task.action_text(action.id)
                )));
            }
        }
        for v in 0..tpl.corrupt_count(schema) {
            let text = render_corrupt_action(task, tpl, action.id, v);
            if let Some(got) = parse_action_name(task, tpl, &text) {
                return Err(fail(format!(
                    "corrupt phrasing '{text}' parses to real action {}",
                    task.action_text(got)
                )));
            }
        }
    }
    // Unused: validate() already requires fact templates for all non-hidden
    // predicates; spot-check instantiation over the whole universe.
    for i in 0..task.num_atoms() {
        let id = AtomId(i as u32);
        let pred = task.pred_of(id);
        if !tpl.is_hidden(&pred.name) {
            let _ = render_fact(task, tpl, id);
        }
    }
    Ok(())
}

/// Predicate ids whose atoms may appear in questions: not hidden by the
/// template file.
pub fn askable_preds(task: &GroundTask, tpl: &TemplateSet) -> Vec<PredId> {
    task.predicates
        .iter()
        .enumerate()
        .filter(|(_, p)| !tpl.is_hidden(&p.name))
        .map(|(i, _)| PredId(i as u32))
        .collect()
}
