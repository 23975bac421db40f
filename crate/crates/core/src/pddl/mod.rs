//! PDDL front end for the STRIPS + `:typing` fragment.
//!
//! Everything outside that fragment (ADL, negative preconditions, conditional
//! effects, quantifiers, equality, numeric fluents, constants) is rejected
//! with an error naming the construct. Identifiers are case-insensitive and
//! normalized to lowercase; `;` comments are stripped.

mod lexer;
mod parser;
mod printer;

pub use parser::{parse_domain, parse_problem};
pub use printer::{print_domain, print_problem};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum PddlError {
    #[error("syntax error at {line}:{col}: {message}")]
    Syntax {
        line: usize,
        col: usize,
        message: String,
    },
    #[error("unsupported construct at {line}:{col}: {construct}")]
    Unsupported {
        construct: String,
        line: usize,
        col: usize,
    },
    #[error("semantic error: {message}")]
    Semantic { message: String },
}

/// Variable or object occurrence inside a lifted atom.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    /// `?x` style variable, stored without the question mark.
    Var(String),
    /// Object constant named directly in a schema body.
    Obj(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedAtom {
    pub pred: String,
    pub args: Vec<Term>,
}

/// Action or predicate parameter; `ty` is `None` in untyped domains.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub ty: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PredicateDef {
    pub name: String,
    pub params: Vec<Param>,
}

/// Type with its declared parent; the root type `object` is implicit.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypeDef {
    pub name: String,
    pub parent: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActionSchema {
    pub name: String,
    pub params: Vec<Param>,
    pub pre: Vec<LiftedAtom>,
    pub add: Vec<LiftedAtom>,
    pub del: Vec<LiftedAtom>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedDomain {
    pub name: String,
    pub requirements: Vec<String>,
    pub types: Vec<TypeDef>,
    pub predicates: Vec<PredicateDef>,
    pub schemas: Vec<ActionSchema>,
}

impl LiftedDomain {
    pub fn predicate(&self, name: &str) -> Option<&PredicateDef> {
        self.predicates.iter().find(|p| p.name == name)
    }

    /// True when `sub` equals `sup` or is a declared descendant of it.
    pub fn is_subtype(&self, sub: &str, sup: &str) -> bool {
        if sub == sup || sup == "object" {
            return true;
        }
        let mut cur = sub;
        // type hierarchies are shallow; cycle-checked at parse time
        for _ in 0..=self.types.len() {
            match self.types.iter().find(|t| t.name == cur) {
                Some(t) => {
                    if t.parent == sup {
                        return true;
                    }
                    cur = &t.parent;
                }
                None => return false,
            }
        }
        false
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TypedObject {
    pub name: String,
    pub ty: Option<String>,
}

/// Ground atom as written in `:init` / `:goal`.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct GroundAtomText {
    pub pred: String,
    pub args: Vec<String>,
}

impl std::fmt::Display for GroundAtomText {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "({}", self.pred)?;
        for a in &self.args {
            write!(f, " {a}")?;
        }
        write!(f, ")")
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LiftedProblem {
    pub name: String,
    pub domain_name: String,
    pub objects: Vec<TypedObject>,
    pub init: Vec<GroundAtomText>,
    /// Goal conjuncts in source order; rendering preserves this order.
    pub goal: Vec<GroundAtomText>,
}
