//! Canonical PDDL printer; `parse(print(parse(f)))` equals `parse(f)`.

use super::*;
use std::fmt::Write;

fn write_params(out: &mut String, params: &[Param]) {
    for (i, p) in params.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        let _ = write!(out, "?{}", p.name);
        if let Some(ty) = &p.ty {
            let _ = write!(out, " - {ty}");
        }
    }
}

fn write_atom(out: &mut String, atom: &LiftedAtom) {
    let _ = write!(out, "({}", atom.pred);
    for arg in &atom.args {
        match arg {
            Term::Var(v) => {
                let _ = write!(out, " ?{v}");
            }
            Term::Obj(o) => {
                let _ = write!(out, " {o}");
            }
        }
    }
    out.push(')');
}

pub fn print_domain(d: &LiftedDomain) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (domain {})", d.name);
    if !d.requirements.is_empty() {
        let _ = writeln!(out, "  (:requirements {})", d.requirements.join(" "));
    }
    if !d.types.is_empty() {
        out.push_str("  (:types");
        for t in &d.types {
            let _ = write!(out, " {} - {}", t.name, t.parent);
        }
        out.push_str(")\n");
    }
    if !d.predicates.is_empty() {
        out.push_str("  (:predicates\n");
        for p in &d.predicates {
            let _ = write!(out, "    ({}", p.name);
            if !p.params.is_empty() {
                out.push(' ');
                write_params(&mut out, &p.params);
            }
            out.push_str(")\n");
        }
        out.push_str("  )\n");
    }
    for a in &d.schemas {
        let _ = writeln!(out, "  (:action {}", a.name);
        out.push_str("    :parameters (");
        write_params(&mut out, &a.params);
        out.push_str(")\n");
        out.push_str("    :precondition (and");
        for atom in &a.pre {
            out.push(' ');
            write_atom(&mut out, atom);
        }
        out.push_str(")\n");
        out.push_str("    :effect (and");
        for atom in &a.add {
            out.push(' ');
            write_atom(&mut out, atom);
        }
        for atom in &a.del {
            out.push_str(" (not ");
            write_atom(&mut out, atom);
            out.push(')');
        }
        out.push_str("))\n");
    }
    out.push_str(")\n");
    out
}

pub fn print_problem(p: &LiftedProblem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "(define (problem {})", p.name);
    let _ = writeln!(out, "  (:domain {})", p.domain_name);
    if !p.objects.is_empty() {
        out.push_str("  (:objects");
        for o in &p.objects {
            let _ = write!(out, " {}", o.name);
            if let Some(ty) = &o.ty {
                let _ = write!(out, " - {ty}");
            }
        }
        out.push_str(")\n");
    }
    out.push_str("  (:init\n");
    for atom in &p.init {
        let _ = writeln!(out, "    {atom}");
    }
    out.push_str("  )\n");
    out.push_str("  (:goal (and");
    for atom in &p.goal {
        let _ = write!(out, " {atom}");
    }
    out.push_str("))\n)\n");
    out
}
