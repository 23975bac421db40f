//! Recursive-descent parser over an s-expression tree, with semantic checks.

use super::lexer::{lex, Tok, Token};
use super::*;
use std::collections::{HashMap, HashSet};

enum Sexp {
    Sym(String, usize, usize),
    List(Vec<Sexp>, usize, usize),
}

impl Sexp {
    fn pos(&self) -> (usize, usize) {
        match self {
            Sexp::Sym(_, l, c) | Sexp::List(_, l, c) => (*l, *c),
        }
    }

    fn sym(&self) -> Option<&str> {
        match self {
            Sexp::Sym(s, _, _) => Some(s),
            _ => None,
        }
    }
}

fn syntax<T>(line: usize, col: usize, message: impl Into<String>) -> Result<T, PddlError> {
    Err(PddlError::Syntax {
        line,
        col,
        message: message.into(),
    })
}

fn unsupported<T>(line: usize, col: usize, construct: impl Into<String>) -> Result<T, PddlError> {
    Err(PddlError::Unsupported {
        construct: construct.into(),
        line,
        col,
    })
}

fn semantic<T>(message: impl Into<String>) -> Result<T, PddlError> {
    Err(PddlError::Semantic {
        message: message.into(),
    })
}

/// Parses the single top-level s-expression, rejecting trailing input.
fn parse_sexp(text: &str) -> Result<Sexp, PddlError> {
    let tokens = lex(text)?;
    let mut pos = 0usize;
    let sexp = parse_one(&tokens, &mut pos)?;
    if pos != tokens.len() {
        let t = &tokens[pos];
        return syntax(t.line, t.col, "trailing input after top-level form");
    }
    Ok(sexp)
}

fn parse_one(tokens: &[Token], pos: &mut usize) -> Result<Sexp, PddlError> {
    let Some(t) = tokens.get(*pos) else {
        let last = tokens.last().unwrap();
        return syntax(last.line, last.col, "unexpected end of input: unbalanced parentheses");
    };
    *pos += 1;
    match &t.tok {
        Tok::Sym(s) => Ok(Sexp::Sym(s.clone(), t.line, t.col)),
        Tok::LParen => {
            let mut items = Vec::new();
            loop {
                match tokens.get(*pos) {
                    None => {
                        return syntax(t.line, t.col, "unclosed parenthesis");
                    }
                    Some(Token { tok: Tok::RParen, .. }) => {
                        *pos += 1;
                        return Ok(Sexp::List(items, t.line, t.col));
                    }
                    Some(_) => items.push(parse_one(tokens, pos)?),
                }
            }
        }
        Tok::RParen => syntax(t.line, t.col, "unexpected closing parenthesis"),
    }
}

/// `(a b - t c - u d)` style typed list. Entries after the final `-`-less
/// tail stay untyped (`None`); callers decide the default.
fn parse_typed_list(items: &[Sexp]) -> Result<Vec<(String, Option<String>, usize, usize)>, PddlError> {
    let mut out: Vec<(String, Option<String>, usize, usize)> = Vec::new();
    let mut pending: Vec<usize> = Vec::new();
    let mut i = 0;
    while i < items.len() {
        let (line, col) = items[i].pos();
        let Some(s) = items[i].sym() else {
            return syntax(line, col, "expected a name in typed list");
        };
        if s == "-" {
            if pending.is_empty() {
                return syntax(line, col, "dangling '-' in typed list");
            }
            i += 1;
            let Some(ty_item) = items.get(i) else {
                return syntax(line, col, "missing type name after '-'");
            };
            let (tl, tc) = ty_item.pos();
            let Some(ty) = ty_item.sym() else {
                return syntax(tl, tc, "expected a type name after '-'");
            };
            for idx in pending.drain(..) {
                out[idx].1 = Some(ty.to_string());
            }
            i += 1;
        } else {
            pending.push(out.len());
            out.push((s.to_string(), None, line, col));
            i += 1;
        }
    }
    Ok(out)
}

fn parse_lifted_atom(sexp: &Sexp) -> Result<(LiftedAtom, usize, usize), PddlError> {
    let (line, col) = sexp.pos();
    let Sexp::List(items, _, _) = sexp else {
        return syntax(line, col, "expected an atom");
    };
    let Some(head) = items.first() else {
        return syntax(line, col, "empty atom");
    };
    let Some(pred) = head.sym() else {
        return syntax(line, col, "atom must start with a predicate name");
    };
    if pred.starts_with(':') || pred == "and" || pred == "not" {
        return syntax(line, col, format!("'{pred}' is not a predicate name"));
    }
    if pred == "=" {
        return unsupported(line, col, "equality atom '='");
    }
    let mut args = Vec::new();
    for item in &items[1..] {
        let (al, ac) = item.pos();
        let Some(s) = item.sym() else {
            return syntax(al, ac, "atom arguments must be names");
        };
        if let Some(v) = s.strip_prefix('?') {
            args.push(Term::Var(v.to_string()));
        } else {
            args.push(Term::Obj(s.to_string()));
        }
    }
    Ok((
        LiftedAtom {
            pred: pred.to_string(),
            args,
        },
        line,
        col,
    ))
}

/// Flattens `(and ...)` or a single form into conjunct s-expressions.
fn conjuncts(sexp: &Sexp) -> Vec<&Sexp> {
    if let Sexp::List(items, _, _) = sexp {
        if items.first().and_then(|h| h.sym()) == Some("and") {
            return items[1..].iter().collect();
        }
    }
    vec![sexp]
}

const KNOWN_UNSUPPORTED: &[&str] = &[
    "or", "not", "imply", "forall", "exists", "when", "increase", "decrease", "assign",
    "scale-up", "scale-down", "=", ">", "<", ">=", "<=",
];

fn check_formula_head<'a>(sexp: &'a Sexp, what: &str) -> Result<&'a Sexp, PddlError> {
    if let Sexp::List(items, line, col) = sexp {
        if let Some(head) = items.first().and_then(|h| h.sym()) {
            if KNOWN_UNSUPPORTED.contains(&head) {
                return unsupported(*line, *col, format!("'{head}' in {what}"));
            }
        }
    }
    Ok(sexp)
}

fn parse_precondition(sexp: &Sexp) -> Result<Vec<LiftedAtom>, PddlError> {
    let mut out = Vec::new();
    for c in conjuncts(sexp) {
        let c = check_formula_head(c, "precondition")?;
        out.push(parse_lifted_atom(c)?.0);
    }
    Ok(out)
}

fn parse_effect(sexp: &Sexp) -> Result<(Vec<LiftedAtom>, Vec<LiftedAtom>), PddlError> {
    let mut add = Vec::new();
    let mut del = Vec::new();
    for c in conjuncts(sexp) {
        if let Sexp::List(items, line, col) = c {
            match items.first().and_then(|h| h.sym()) {
                Some("not") => {
                    if items.len() != 2 {
                        return syntax(*line, *col, "'not' takes exactly one atom");
                    }
                    del.push(parse_lifted_atom(&items[1])?.0);
                    continue;
                }
                Some(head) if KNOWN_UNSUPPORTED.contains(&head) => {
                    return unsupported(*line, *col, format!("'{head}' in effect"));
                }
                _ => {}
            }
        }
        add.push(parse_lifted_atom(c)?.0);
    }
    Ok((add, del))
}

/// Parses a `(define (domain ...) ...)` form and checks it semantically.
pub fn parse_domain(text: &str) -> Result<LiftedDomain, PddlError> {
    let sexp = parse_sexp(text)?;
    let (line, col) = sexp.pos();
    let Sexp::List(items, _, _) = &sexp else {
        return syntax(line, col, "expected (define ...)");
    };
    if items.first().and_then(|h| h.sym()) != Some("define") {
        return syntax(line, col, "expected (define ...)");
    }

    let mut name = None;
    let mut requirements = Vec::new();
    let mut types = Vec::new();
    let mut predicates: Option<Vec<PredicateDef>> = None;
    let mut schemas = Vec::new();

    for item in &items[1..] {
        let (il, ic) = item.pos();
        let Sexp::List(section, _, _) = item else {
            return syntax(il, ic, "expected a (...) section");
        };
        let head = section.first().and_then(|h| h.sym()).unwrap_or("");
        match head {
            "domain" => {
                let Some(n) = section.get(1).and_then(|s| s.sym()) else {
                    return syntax(il, ic, "missing domain name");
                };
                name = Some(n.to_string());
            }
            ":requirements" => {
                for r in &section[1..] {
                    let (rl, rc) = r.pos();
                    let Some(req) = r.sym() else {
                        return syntax(rl, rc, "expected a requirement flag");
                    };
                    match req {
                        ":strips" | ":typing" => requirements.push(req.to_string()),
                        other => return unsupported(rl, rc, format!("requirement {other}")),
                    }
                }
            }
            ":types" => {
                for (ty, parent, tl, tc) in parse_typed_list(&section[1..])? {
                    if ty == "object" {
                        return syntax(tl, tc, "'object' is a built-in type");
                    }
                    types.push(TypeDef {
                        name: ty,
                        parent: parent.unwrap_or_else(|| "object".to_string()),
                    });
                }
            }
            ":predicates" => {
                let mut defs = Vec::new();
                for p in &section[1..] {
                    let (pl, pc) = p.pos();
                    let Sexp::List(pitems, _, _) = p else {
                        return syntax(pl, pc, "expected a predicate declaration");
                    };
                    let Some(pname) = pitems.first().and_then(|h| h.sym()) else {
                        return syntax(pl, pc, "missing predicate name");
                    };
                    let params = parse_typed_list(&pitems[1..])?
                        .into_iter()
                        .map(|(n, ty, vl, vc)| {
                            let Some(v) = n.strip_prefix('?') else {
                                return syntax(vl, vc, format!("predicate parameter '{n}' must start with '?'"));
                            };
                            Ok(Param {
                                name: v.to_string(),
                                ty,
                            })
                        })
                        .collect::<Result<Vec<_>, _>>()?;
                    defs.push(PredicateDef {
                        name: pname.to_string(),
                        params,
                    });
                }
                predicates = Some(defs);
            }
            ":action" => {
                let Some(aname) = section.get(1).and_then(|s| s.sym()) else {
                    return syntax(il, ic, "missing action name");
                };
                let mut params = Vec::new();
                let mut pre = Vec::new();
                let mut eff = None;
                let mut i = 2;
                while i < section.len() {
                    let key = section[i].sym().unwrap_or("");
                    let (kl, kc) = section[i].pos();
                    let Some(value) = section.get(i + 1) else {
                        return syntax(kl, kc, format!("missing value for {key}"));
                    };
                    match key {
                        ":parameters" => {
                            let Sexp::List(pitems, _, _) = value else {
                                return syntax(kl, kc, ":parameters expects a list");
                            };
                            params = parse_typed_list(pitems)?
                                .into_iter()
                                .map(|(n, ty, vl, vc)| {
                                    let Some(v) = n.strip_prefix('?') else {
                                        return syntax(vl, vc, format!("parameter '{n}' must start with '?'"));
                                    };
                                    Ok(Param {
                                        name: v.to_string(),
                                        ty,
                                    })
                                })
                                .collect::<Result<Vec<_>, _>>()?;
                        }
                        ":precondition" => pre = parse_precondition(value)?,
                        ":effect" => eff = Some(parse_effect(value)?),
                        other => return syntax(kl, kc, format!("unknown action key '{other}'")),
                    }
                    i += 2;
                }
                let Some((add, del)) = eff else {
                    return syntax(il, ic, format!("action {aname} has no :effect"));
                };
                schemas.push(ActionSchema {
                    name: aname.to_string(),
                    params,
                    pre,
                    add,
                    del,
                });
            }
            ":constants" => return unsupported(il, ic, "constants section"),
            ":functions" => return unsupported(il, ic, "functions section"),
            other => return syntax(il, ic, format!("unknown domain section '{other}'")),
        }
    }

    let Some(name) = name else {
        return semantic("missing (domain <name>) section");
    };
    let domain = LiftedDomain {
        name,
        requirements,
        types,
        predicates: predicates.unwrap_or_default(),
        schemas,
    };
    check_domain(&domain)?;
    Ok(domain)
}

fn check_domain(d: &LiftedDomain) -> Result<(), PddlError> {
    let typed = !d.types.is_empty();
    if typed && !d.requirements.iter().any(|r| r == ":typing") {
        return semantic("domain declares :types without the :typing requirement");
    }

    let mut type_names: HashSet<&str> = d.types.iter().map(|t| t.name.as_str()).collect();
    type_names.insert("object");
    for t in &d.types {
        if !type_names.contains(t.parent.as_str()) {
            return semantic(format!("type '{}' has undeclared parent '{}'", t.name, t.parent));
        }
    }
    // reject cyclic hierarchies: walking to the root must terminate
    for t in &d.types {
        let mut cur = t.parent.as_str();
        let mut hops = 0;
        while cur != "object" {
            hops += 1;
            if hops > d.types.len() {
                return semantic(format!("type hierarchy cycle involving '{}'", t.name));
            }
            cur = d
                .types
                .iter()
                .find(|x| x.name == cur)
                .map(|x| x.parent.as_str())
                .unwrap_or("object");
        }
    }

    let mut preds: HashMap<&str, usize> = HashMap::new();
    for p in &d.predicates {
        if preds.insert(p.name.as_str(), p.params.len()).is_some() {
            return semantic(format!("duplicate predicate declaration '{}'", p.name));
        }
        for param in &p.params {
            check_type_ref(d, typed, &param.ty, &format!("predicate {}", p.name))?;
        }
    }

    let mut seen_actions = HashSet::new();
    for a in &d.schemas {
        if !seen_actions.insert(a.name.as_str()) {
            return semantic(format!("duplicate action '{}'", a.name));
        }
        let mut param_names = HashSet::new();
        for p in &a.params {
            if !param_names.insert(p.name.as_str()) {
                return semantic(format!("duplicate parameter '?{}' in action {}", p.name, a.name));
            }
            check_type_ref(d, typed, &p.ty, &format!("action {}", a.name))?;
        }
        for (atoms, part) in [(&a.pre, "precondition"), (&a.add, "effect"), (&a.del, "effect")] {
            for atom in atoms.iter() {
                let Some(&arity) = preds.get(atom.pred.as_str()) else {
                    return semantic(format!(
                        "action {} uses undeclared predicate '{}'",
                        a.name, atom.pred
                    ));
                };
                if atom.args.len() != arity {
                    return semantic(format!(
                        "predicate '{}' used with arity {} in action {} (declared {})",
                        atom.pred,
                        atom.args.len(),
                        a.name,
                        arity
                    ));
                }
                for arg in &atom.args {
                    match arg {
                        Term::Var(v) => {
                            if !param_names.contains(v.as_str()) {
                                return semantic(format!(
                                    "unbound variable '?{v}' in {part} of action {}",
                                    a.name
                                ));
                            }
                        }
                        Term::Obj(o) => {
                            return semantic(format!(
                                "object constant '{o}' in action {}: constants are not supported",
                                a.name
                            ));
                        }
                    }
                }
            }
        }
    }
    Ok(())
}

fn check_type_ref(
    d: &LiftedDomain,
    typed: bool,
    ty: &Option<String>,
    ctx: &str,
) -> Result<(), PddlError> {
    match ty {
        None => Ok(()),
        Some(t) => {
            if !typed {
                return semantic(format!("{ctx} uses type '{t}' but the domain declares no :types"));
            }
            if t != "object" && !d.types.iter().any(|x| &x.name == t) {
                return semantic(format!("{ctx} references undeclared type '{t}'"));
            }
            Ok(())
        }
    }
}

fn parse_ground_atom(sexp: &Sexp, what: &str) -> Result<GroundAtomText, PddlError> {
    let (atom, line, col) = parse_lifted_atom(sexp)?;
    let mut args = Vec::new();
    for t in atom.args {
        match t {
            Term::Obj(o) => args.push(o),
            Term::Var(v) => {
                return syntax(line, col, format!("variable '?{v}' not allowed in {what}"));
            }
        }
    }
    Ok(GroundAtomText {
        pred: atom.pred,
        args,
    })
}

/// Parses a `(define (problem ...) ...)` form against its domain.
pub fn parse_problem(text: &str, domain: &LiftedDomain) -> Result<LiftedProblem, PddlError> {
    let sexp = parse_sexp(text)?;
    let (line, col) = sexp.pos();
    let Sexp::List(items, _, _) = &sexp else {
        return syntax(line, col, "expected (define ...)");
    };
    if items.first().and_then(|h| h.sym()) != Some("define") {
        return syntax(line, col, "expected (define ...)");
    }

    let mut name = None;
    let mut domain_name = None;
    let mut objects = Vec::new();
    let mut init: Option<Vec<GroundAtomText>> = None;
    let mut goal: Option<Vec<GroundAtomText>> = None;

    for item in &items[1..] {
        let (il, ic) = item.pos();
        let Sexp::List(section, _, _) = item else {
            return syntax(il, ic, "expected a (...) section");
        };
        let head = section.first().and_then(|h| h.sym()).unwrap_or("");
        match head {
            "problem" => {
                let Some(n) = section.get(1).and_then(|s| s.sym()) else {
                    return syntax(il, ic, "missing problem name");
                };
                name = Some(n.to_string());
            }
            ":domain" => {
                let Some(n) = section.get(1).and_then(|s| s.sym()) else {
                    return syntax(il, ic, "missing domain reference");
                };
                domain_name = Some(n.to_string());
            }
            ":objects" => {
                for (obj, ty, _, _) in parse_typed_list(&section[1..])? {
                    objects.push(TypedObject { name: obj, ty });
                }
            }
            ":init" => {
                let mut atoms = Vec::new();
                for a in &section[1..] {
                    if let Sexp::List(fitems, fl, fc) = a {
                        if fitems.first().and_then(|h| h.sym()) == Some("=") {
                            return unsupported(*fl, *fc, "numeric fluent in :init");
                        }
                    }
                    atoms.push(parse_ground_atom(a, ":init")?);
                }
                init = Some(atoms);
            }
            ":goal" => {
                let Some(body) = section.get(1) else {
                    return syntax(il, ic, "empty :goal section");
                };
                let mut atoms = Vec::new();
                for c in conjuncts(body) {
                    let c = check_formula_head(c, "goal")?;
                    atoms.push(parse_ground_atom(c, ":goal")?);
                }
                goal = Some(atoms);
            }
            ":metric" => return unsupported(il, ic, "metric section"),
            other => return syntax(il, ic, format!("unknown problem section '{other}'")),
        }
    }

    let Some(name) = name else {
        return semantic("missing (problem <name>) section");
    };
    let Some(domain_name) = domain_name else {
        return semantic("missing (:domain <name>) section");
    };
    if domain_name != domain.name {
        return semantic(format!(
            "problem references domain '{domain_name}' but was parsed against '{}'",
            domain.name
        ));
    }
    let Some(init) = init else {
        return semantic(format!("problem {name} has no :init section"));
    };
    let Some(goal) = goal else {
        return semantic(format!("problem {name} has no :goal section"));
    };

    let problem = LiftedProblem {
        name,
        domain_name,
        objects,
        init,
        goal,
    };
    check_problem(domain, &problem)?;
    Ok(problem)
}

fn check_problem(d: &LiftedDomain, p: &LiftedProblem) -> Result<(), PddlError> {
    let typed = !d.types.is_empty();
    let mut obj_types: HashMap<&str, Option<&str>> = HashMap::new();
    for o in &p.objects {
        if obj_types
            .insert(o.name.as_str(), o.ty.as_deref())
            .is_some()
        {
            return semantic(format!("duplicate object '{}'", o.name));
        }
        match (&o.ty, typed) {
            (Some(t), true) => {
                if t != "object" && !d.types.iter().any(|x| &x.name == t) {
                    return semantic(format!("object '{}' has undeclared type '{t}'", o.name));
                }
            }
            (Some(t), false) => {
                return semantic(format!(
                    "object '{}' declares type '{t}' but the domain is untyped",
                    o.name
                ));
            }
            (None, true) => {
                return semantic(format!(
                    "object '{}' needs a type in the typed domain '{}'",
                    o.name, d.name
                ));
            }
            (None, false) => {}
        }
    }

    for (atoms, what) in [(&p.init, ":init"), (&p.goal, ":goal")] {
        for atom in atoms.iter() {
            let Some(def) = d.predicate(&atom.pred) else {
                return semantic(format!("{what} uses undeclared predicate '{}'", atom.pred));
            };
            if atom.args.len() != def.params.len() {
                return semantic(format!(
                    "{what} atom {atom} has arity {} (declared {})",
                    atom.args.len(),
                    def.params.len()
                ));
            }
            for (arg, param) in atom.args.iter().zip(&def.params) {
                let Some(&obj_ty) = obj_types.get(arg.as_str()) else {
                    return semantic(format!("{what} atom {atom} uses undeclared object '{arg}'"));
                };
                if let Some(want) = &param.ty {
                    let got = obj_ty.unwrap_or("object");
                    if !d.is_subtype(got, want) {
                        return semantic(format!(
                            "{what} atom {atom}: object '{arg}' of type '{got}' where '{want}' is required"
                        ));
                    }
                }
            }
        }
    }
    Ok(())
}
