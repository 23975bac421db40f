//! Per-domain phrasing templates, loaded from plain text files.
//!
//! A template file is line oriented. `;` starts a comment, blank lines are
//! skipped, and `[...]` headers open sections:
//!
//! * `[domain_intro]` - prose lines; each line becomes one intro segment.
//!   Lines may use `{count:name}` and `{list:name}` where `name` is a type
//!   or a static unary predicate.
//! * `[predicate p]` - `fact:` gives the standalone sentence for one atom
//!   (`{i}` is argument `i`), `state:` the fallback state sentence (`~`
//!   omits the predicate from state text), `hidden: true` keeps the
//!   predicate out of question pools.
//! * `[compose name]` - `when p(?x) q(?x ?y): text {?x} {?y}` alternatives,
//!   tried in order against the not-yet-rendered atoms; variables unify on
//!   shared names and each match consumes its atoms.
//! * `[group p by i]` / `[group p]` - renders all remaining atoms of `p` as
//!   one sentence. Keys: `lead:`, `item:` (`{members}`/`{key}` for grouped
//!   form, `{i}` otherwise), `item_singular:`, `join:` (semicolon, comma,
//!   and, comma_and).
//! * `[action a]` - one phrasing per line, `{i}` is parameter `i`; the first
//!   is canonical and every phrasing must mention every parameter.
//! * `[corrupt_action a]` - phrasings that look like actions of the domain
//!   but must never parse back to a real one.
//!
//! State sections (compose and group) apply in file order; atoms no section
//! consumed fall back to their predicate's `state:` sentence.

use std::collections::BTreeMap;
use std::path::Path;

use thiserror::Error;

use crate::ground::GroundTask;

#[derive(Debug, Error)]
pub enum TemplateError {
    #[error("template file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("template line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("template for {domain}: {msg}")]
    Invalid { domain: String, msg: String },
}

fn perr(line: usize, msg: impl Into<String>) -> TemplateError {
    TemplateError::Parse {
        line,
        msg: msg.into(),
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JoinStyle {
    Semicolon,
    Comma,
    And,
    CommaAnd,
}

#[derive(Debug, Default)]
pub(crate) struct PredTemplate {
    pub(crate) fact: Option<String>,
    pub(crate) state: Option<StateRule>,
    pub(crate) hidden: bool,
}

#[derive(Debug)]
pub(crate) enum StateRule {
    Text(String),
    Omit,
}

#[derive(Debug)]
pub(crate) struct Pattern {
    pub(crate) pred: String,
    pub(crate) vars: Vec<String>,
}

#[derive(Debug)]
pub(crate) struct ComposeAlt {
    pub(crate) patterns: Vec<Pattern>,
    pub(crate) text: String,
}

#[derive(Debug)]
pub(crate) struct GroupRule {
    pub(crate) pred: String,
    pub(crate) by: Option<usize>,
    pub(crate) lead: String,
    pub(crate) item: String,
    pub(crate) item_singular: Option<String>,
    pub(crate) join: JoinStyle,
    pub(crate) line: usize,
}

#[derive(Debug)]
pub(crate) enum Section {
    Compose {
        name: String,
        alts: Vec<ComposeAlt>,
    },
    Group(GroupRule),
}

#[derive(Debug)]
pub(crate) struct ActionTemplates {
    pub(crate) phrasings: Vec<String>,
    pub(crate) corrupt: Vec<String>,
}

/// Parsed phrasing rules for one domain.
#[derive(Debug)]
pub struct TemplateSet {
    pub(crate) intro: Vec<String>,
    pub(crate) predicates: BTreeMap<String, PredTemplate>,
    pub(crate) sections: Vec<Section>,
    pub(crate) actions: BTreeMap<String, ActionTemplates>,
}

enum Cursor {
    None,
    Intro,
    Pred(String),
    Compose(usize),
    Group(usize),
    Action(String),
    Corrupt(String),
}

impl TemplateSet {
    pub fn parse_str(input: &str) -> Result<TemplateSet, TemplateError> {
        let mut set = TemplateSet {
            intro: Vec::new(),
            predicates: BTreeMap::new(),
            sections: Vec::new(),
            actions: BTreeMap::new(),
        };
        let mut cur = Cursor::None;
        // Group keys may be absent; checked when the section closes.
        let mut open_groups: Vec<usize> = Vec::new();

        for (no, raw) in input.lines().enumerate() {
            let no = no + 1;
            let line = raw.trim_end();
            let trimmed = line.trim_start();
            if trimmed.is_empty() || trimmed.starts_with(';') {
                continue;
            }
            if trimmed.starts_with('[') {
                cur = set.open_section(trimmed, no, &mut open_groups)?;
                continue;
            }
            match &cur {
                Cursor::None => return Err(perr(no, "content before any section header")),
                Cursor::Intro => set.intro.push(trimmed.to_string()),
                Cursor::Pred(name) => {
                    let (key, value) = split_kv(trimmed, no)?;
                    let entry = set.predicates.get_mut(name).expect("section opened");
                    match key {
                        "fact" => entry.fact = Some(value.to_string()),
                        "state" => {
                            entry.state = Some(if value == "~" {
                                StateRule::Omit
                            } else {
                                StateRule::Text(value.to_string())
                            })
                        }
                        "hidden" => match value {
                            "true" => entry.hidden = true,
                            "false" => entry.hidden = false,
                            other => {
                                return Err(perr(no, format!("hidden must be true or false, got '{other}'")))
                            }
                        },
                        other => return Err(perr(no, format!("unknown predicate key '{other}'"))),
                    }
                }
                Cursor::Compose(idx) => {
                    let rest = trimmed
                        .strip_prefix("when ")
                        .ok_or_else(|| perr(no, "compose lines must start with 'when '"))?;
                    let alt = parse_compose_alt(rest, no)?;
                    match &mut set.sections[*idx] {
                        Section::Compose { alts, .. } => alts.push(alt),
                        Section::Group(_) => unreachable!(),
                    }
                }
                Cursor::Group(idx) => {
                    let (key, value) = split_kv(trimmed, no)?;
                    let Section::Group(g) = &mut set.sections[*idx] else {
                        unreachable!()
                    };
                    match key {
                        "lead" => g.lead = value.to_string(),
                        "item" => g.item = value.to_string(),
                        "item_singular" => g.item_singular = Some(value.to_string()),
                        "join" => {
                            g.join = match value {
                                "semicolon" => JoinStyle::Semicolon,
                                "comma" => JoinStyle::Comma,
                                "and" => JoinStyle::And,
                                "comma_and" => JoinStyle::CommaAnd,
                                other => {
                                    return Err(perr(no, format!("unknown join style '{other}'")))
                                }
                            }
                        }
                        other => return Err(perr(no, format!("unknown group key '{other}'"))),
                    }
                }
                Cursor::Action(name) => {
                    set.actions
                        .get_mut(name)
                        .expect("section opened")
                        .phrasings
                        .push(trimmed.to_string());
                }
                Cursor::Corrupt(name) => {
                    set.actions
                        .get_mut(name)
                        .expect("section opened")
                        .corrupt
                        .push(trimmed.to_string());
                }
            }
        }

        for idx in open_groups {
            let Section::Group(g) = &set.sections[idx] else {
                unreachable!()
            };
            if g.item.is_empty() {
                return Err(perr(g.line, format!("group for '{}' has no item template", g.pred)));
            }
            let need: &[&str] = if g.by.is_some() {
                &["members"]
            } else {
                &[]
            };
            for n in need {
                if !placeholders(&g.item).iter().any(|p| p == n) {
                    return Err(perr(
                        g.line,
                        format!("grouped item template must mention {{{n}}}"),
                    ));
                }
            }
        }
        Ok(set)
    }

    fn open_section(
        &mut self,
        line: &str,
        no: usize,
        open_groups: &mut Vec<usize>,
    ) -> Result<Cursor, TemplateError> {
        let inner = line
            .strip_prefix('[')
            .and_then(|s| s.strip_suffix(']'))
            .ok_or_else(|| perr(no, "malformed section header"))?;
        let words: Vec<&str> = inner.split_whitespace().collect();
        match words.as_slice() {
            ["domain_intro"] => Ok(Cursor::Intro),
            ["predicate", name] => {
                self.predicates.entry(name.to_string()).or_default();
                Ok(Cursor::Pred(name.to_string()))
            }
            ["compose", name] => {
                self.sections.push(Section::Compose {
                    name: name.to_string(),
                    alts: Vec::new(),
                });
                Ok(Cursor::Compose(self.sections.len() - 1))
            }
            ["group", pred] | ["group", pred, "by", _] => {
                let by = match words.as_slice() {
                    [_, _, _, idx] => Some(idx.parse::<usize>().map_err(|_| {
                        perr(no, format!("group 'by' index '{idx}' is not a number"))
                    })?),
                    _ => None,
                };
                self.sections.push(Section::Group(GroupRule {
                    pred: pred.to_string(),
                    by,
                    lead: String::new(),
                    item: String::new(),
                    item_singular: None,
                    join: JoinStyle::CommaAnd,
                    line: no,
                }));
                open_groups.push(self.sections.len() - 1);
                Ok(Cursor::Group(self.sections.len() - 1))
            }
            ["action", name] => {
                self.actions
                    .entry(name.to_string())
                    .or_insert_with(|| ActionTemplates {
                        phrasings: Vec::new(),
                        corrupt: Vec::new(),
                    });
                Ok(Cursor::Action(name.to_string()))
            }
            ["corrupt_action", name] => {
                self.actions
                    .entry(name.to_string())
                    .or_insert_with(|| ActionTemplates {
                        phrasings: Vec::new(),
                        corrupt: Vec::new(),
                    });
                Ok(Cursor::Corrupt(name.to_string()))
            }
            _ => Err(perr(no, format!("unknown section '[{inner}]'"))),
        }
    }

    /// True when the predicate is excluded from question pools.
    pub fn is_hidden(&self, pred: &str) -> bool {
        self.predicates.get(pred).is_some_and(|p| p.hidden)
    }

    pub(crate) fn fact_template(&self, pred: &str) -> Option<&str> {
        self.predicates.get(pred).and_then(|p| p.fact.as_deref())
    }

    /// Number of phrasings for a schema; 0 when the schema is unknown.
    pub fn phrasing_count(&self, schema: &str) -> usize {
        self.actions.get(schema).map_or(0, |a| a.phrasings.len())
    }

    /// Number of corrupt phrasings for a schema.
    pub fn corrupt_count(&self, schema: &str) -> usize {
        self.actions.get(schema).map_or(0, |a| a.corrupt.len())
    }

    /// Structural checks against one ground task. Rendering round-trips are
    /// checked separately by [`crate::render::validate_rendering`].
    pub fn validate(&self, task: &GroundTask) -> Result<(), TemplateError> {
        let fail = |msg: String| TemplateError::Invalid {
            domain: task.domain_name.clone(),
            msg,
        };

        for name in self.predicates.keys() {
            if task.pred_id(name).is_none() {
                return Err(fail(format!("template names unknown predicate '{name}'")));
            }
        }
        for name in self.actions.keys() {
            if !task.schema_names.iter().any(|s| s == name) {
                return Err(fail(format!("template names unknown action '{name}'")));
            }
        }

        let grouped: Vec<&str> = self
            .sections
            .iter()
            .filter_map(|s| match s {
                Section::Group(g) => Some(g.pred.as_str()),
                Section::Compose { .. } => None,
            })
            .collect();

        for p in &task.predicates {
            let entry = self.predicates.get(&p.name);
            let hidden = entry.is_some_and(|e| e.hidden);
            if !hidden && entry.and_then(|e| e.fact.as_ref()).is_none() {
                return Err(fail(format!("predicate '{}' has no fact template", p.name)));
            }
            if let Some(fact) = entry.and_then(|e| e.fact.as_ref()) {
                check_indexed(fact, p.arity)
                    .map_err(|m| fail(format!("fact template for '{}': {m}", p.name)))?;
            }
            let dynamic = !p.is_static && !p.is_type_pred;
            if dynamic {
                let covered = grouped.contains(&p.name.as_str())
                    || entry.is_some_and(|e| e.state.is_some());
                if !covered {
                    return Err(fail(format!(
                        "dynamic predicate '{}' has no state template and no group",
                        p.name
                    )));
                }
                if let Some(StateRule::Text(t)) = entry.and_then(|e| e.state.as_ref()) {
                    check_indexed(t, p.arity)
                        .map_err(|m| fail(format!("state template for '{}': {m}", p.name)))?;
                }
            }
        }

        for section in &self.sections {
            match section {
                Section::Group(g) => {
                    let Some(pid) = task.pred_id(&g.pred) else {
                        return Err(fail(format!("group names unknown predicate '{}'", g.pred)));
                    };
                    let info = &task.predicates[pid.idx()];
                    if info.is_static || info.is_type_pred {
                        return Err(fail(format!("group on static predicate '{}'", g.pred)));
                    }
                    match g.by {
                        Some(k) => {
                            if k >= info.arity {
                                return Err(fail(format!(
                                    "group by {k} exceeds arity {} of '{}'",
                                    info.arity, g.pred
                                )));
                            }
                            for ph in placeholders(&g.item) {
                                if ph != "members" && ph != "key" {
                                    return Err(fail(format!(
                                        "grouped item for '{}' uses unknown placeholder {{{ph}}}",
                                        g.pred
                                    )));
                                }
                            }
                        }
                        None => {
                            check_indexed(&g.item, info.arity)
                                .map_err(|m| fail(format!("item for '{}': {m}", g.pred)))?;
                        }
                    }
                }
                Section::Compose { name, alts } => {
                    if alts.is_empty() {
                        return Err(fail(format!("compose '{name}' has no alternatives")));
                    }
                    for alt in alts {
                        let mut bound = Vec::new();
                        for pat in &alt.patterns {
                            let Some(pid) = task.pred_id(&pat.pred) else {
                                return Err(fail(format!(
                                    "compose '{name}' names unknown predicate '{}'",
                                    pat.pred
                                )));
                            };
                            let info = &task.predicates[pid.idx()];
                            if info.is_static || info.is_type_pred {
                                return Err(fail(format!(
                                    "compose '{name}' matches static predicate '{}'",
                                    pat.pred
                                )));
                            }
                            if pat.vars.len() != info.arity {
                                return Err(fail(format!(
                                    "compose '{name}': '{}' takes {} arguments, pattern has {}",
                                    pat.pred,
                                    info.arity,
                                    pat.vars.len()
                                )));
                            }
                            bound.extend(pat.vars.iter().cloned());
                        }
                        for ph in placeholders(&alt.text) {
                            let var = ph
                                .strip_prefix('?')
                                .ok_or_else(|| fail(format!("compose '{name}' uses non-variable placeholder {{{ph}}}")))?;
                            if !bound.iter().any(|v| v == var) {
                                return Err(fail(format!(
                                    "compose '{name}' text uses unbound variable ?{var}"
                                )));
                            }
                        }
                    }
                }
            }
        }

        for schema in &task.schema_names {
            let Some(tpl) = self.actions.get(schema) else {
                return Err(fail(format!("action '{schema}' has no template section")));
            };
            if tpl.phrasings.is_empty() {
                return Err(fail(format!("action '{schema}' has no phrasings")));
            }
            if tpl.corrupt.is_empty() {
                return Err(fail(format!("action '{schema}' has no corrupt phrasing")));
            }
            let arity = task
                .actions
                .iter()
                .find(|a| task.schema_names[a.schema] == *schema)
                .map(|a| a.binding.len());
            // A schema with no ground instances cannot be arity-checked here;
            // phrasings for it are never rendered either.
            if let Some(arity) = arity {
                for text in tpl.phrasings.iter().chain(&tpl.corrupt) {
                    check_full_arity(text, arity)
                        .map_err(|m| fail(format!("phrasing for '{schema}': {m}")))?;
                }
            }
        }

        for line in &self.intro {
            for ph in placeholders(line) {
                let name = ph
                    .strip_prefix("count:")
                    .or_else(|| ph.strip_prefix("list:"))
                    .ok_or_else(|| fail(format!("intro placeholder {{{ph}}} is not count: or list:")))?;
                if !intro_name_resolvable(task, name) {
                    return Err(fail(format!(
                        "intro placeholder {{{ph}}}: '{name}' is neither a type nor a static unary predicate"
                    )));
                }
            }
        }
        Ok(())
    }
}

/// True when `name` denotes an object pool: a declared type or a static
/// unary predicate.
pub(crate) fn intro_name_resolvable(task: &GroundTask, name: &str) -> bool {
    if (0..task.objects.len()).any(|i| task.object_has_type(crate::ground::ObjId(i as u32), name)) {
        return true;
    }
    task.pred_id(name).is_some_and(|p| {
        let info = &task.predicates[p.idx()];
        info.arity == 1 && info.is_static && !info.is_type_pred
    })
}

fn split_kv(line: &str, no: usize) -> Result<(&str, &str), TemplateError> {
    let (key, value) = line
        .split_once(':')
        .ok_or_else(|| perr(no, "expected 'key: value'"))?;
    Ok((key.trim(), value.strip_prefix(' ').unwrap_or(value)))
}

fn parse_compose_alt(rest: &str, no: usize) -> Result<ComposeAlt, TemplateError> {
    let mut patterns = Vec::new();
    let mut chars = rest.char_indices().peekable();
    let text;
    loop {
        while let Some(&(_, c)) = chars.peek() {
            if c == ' ' {
                chars.next();
            } else {
                break;
            }
        }
        match chars.peek() {
            Some(&(i, ':')) => {
                text = rest[i + 1..].strip_prefix(' ').unwrap_or(&rest[i + 1..]);
                break;
            }
            Some(_) => {}
            None => return Err(perr(no, "compose alternative has no ': text' part")),
        }
        let start = chars.peek().expect("peeked").0;
        let mut open = None;
        for (i, c) in chars.by_ref() {
            if c == '(' {
                open = Some(i);
                break;
            }
            if c == ':' || c == ' ' {
                return Err(perr(no, format!("expected 'pred(...)' in pattern near '{}'", &rest[start..i])));
            }
        }
        let open = open.ok_or_else(|| perr(no, "pattern is missing '('"))?;
        let mut close = None;
        for (i, c) in chars.by_ref() {
            if c == ')' {
                close = Some(i);
                break;
            }
        }
        let close = close.ok_or_else(|| perr(no, "pattern is missing ')'"))?;
        let pred = rest[start..open].to_string();
        let mut vars = Vec::new();
        for tok in rest[open + 1..close].split_whitespace() {
            let v = tok
                .strip_prefix('?')
                .ok_or_else(|| perr(no, format!("pattern argument '{tok}' must start with '?'")))?;
            vars.push(v.to_string());
        }
        patterns.push(Pattern { pred, vars });
    }
    if patterns.is_empty() {
        return Err(perr(no, "compose alternative has no patterns"));
    }
    Ok(ComposeAlt {
        patterns,
        text: text.to_string(),
    })
}

/// All `{...}` placeholder bodies in order.
pub(crate) fn placeholders(text: &str) -> Vec<String> {
    let mut out = Vec::new();
    let mut rest = text;
    while let Some(open) = rest.find('{') {
        let Some(close) = rest[open..].find('}') else {
            break;
        };
        out.push(rest[open + 1..open + close].to_string());
        rest = &rest[open + close + 1..];
    }
    out
}

fn check_indexed(text: &str, arity: usize) -> Result<(), String> {
    for ph in placeholders(text) {
        let idx: usize = ph
            .parse()
            .map_err(|_| format!("placeholder {{{ph}}} is not an index"))?;
        if idx >= arity {
            return Err(format!("placeholder {{{idx}}} exceeds arity {arity}"));
        }
    }
    Ok(())
}

fn check_full_arity(text: &str, arity: usize) -> Result<(), String> {
    check_indexed(text, arity)?;
    let present: Vec<usize> = placeholders(text)
        .iter()
        .filter_map(|p| p.parse().ok())
        .collect();
    for i in 0..arity {
        if !present.contains(&i) {
            return Err(format!("placeholder {{{i}}} is missing; every parameter must appear"));
        }
    }
    Ok(())
}

/// Reads, parses, and structurally validates `<dir>/<domain>.tpl`.
pub fn load_template_file(dir: &Path, domain: &str) -> Result<TemplateSet, TemplateError> {
    let path = dir.join(format!("{domain}.tpl"));
    let text = std::fs::read_to_string(&path).map_err(|source| TemplateError::Io {
        path: path.display().to_string(),
        source,
    })?;
    TemplateSet::parse_str(&text)
}
