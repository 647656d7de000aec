//! Front end for the constrained, line-oriented Z-like notation.
//!
//! A specification is a sequence of `given` lines and `schema ... end`
//! blocks. Inside a schema, `delta`/`xi`/`includes` pull in other schemas,
//! `decl` introduces typed names and `pred` adds one predicate per line.
//! Type text is kept opaque.

mod lexer;
mod parser;
mod print;
mod resolve;

use std::fmt;
use std::ops::Deref;

use serde::Serialize;
use thiserror::Error;

pub use parser::parse_specification;
pub use print::{print_pred, print_specification, print_term};
pub use resolve::resolve_inclusions;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SpecError {
    #[error("line {line}: syntax error, expected {expected}")]
    Syntax { line: usize, expected: String },
    #[error("duplicate schema `{0}`")]
    DuplicateSchema(String),
    #[error("duplicate declaration of `{name}` in schema `{schema}`")]
    DuplicateDeclaration { schema: String, name: String },
    #[error("unknown included schema `{0}`")]
    UnknownInclusion(String),
    #[error("cyclic inclusion: {}", .0.join(" -> "))]
    CyclicInclusion(Vec<String>),
}

impl SpecError {
    /// Source line of the error, when it has one.
    pub fn line(&self) -> Option<usize> {
        match self {
            SpecError::Syntax { line, .. } => Some(*line),
            _ => None,
        }
    }
}

/// How an identifier occurrence is decorated: `x`, `x'`, `x?` or `x!`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum Decoration {
    Plain,
    Primed,
    Input,
    Output,
}

impl Decoration {
    pub fn suffix(self) -> &'static str {
        match self {
            Decoration::Plain => "",
            Decoration::Primed => "'",
            Decoration::Input => "?",
            Decoration::Output => "!",
        }
    }

    /// Primed and output occurrences refer to the after state.
    pub fn is_after_state(self) -> bool {
        matches!(self, Decoration::Primed | Decoration::Output)
    }
}

/// 1-based source position.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Position {
    pub line: usize,
    pub column: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IdentOccurrence {
    /// Base name without decoration; `ctr` and `ctr'` share `ctr`.
    pub name: String,
    pub decoration: Decoration,
    pub pos: Position,
}

impl fmt::Display for IdentOccurrence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.name, self.decoration.suffix())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    IntDiv,
    Mod,
    Union,
    Inter,
}

impl BinaryOp {
    pub fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::IntDiv => "div",
            BinaryOp::Mod => "mod",
            BinaryOp::Union => "union",
            BinaryOp::Inter => "inter",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Card,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OpaqueKind {
    Set,
    Sequence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Term {
    Ident(IdentOccurrence),
    Literal(String),
    Apply {
        func: IdentOccurrence,
        args: Vec<Term>,
    },
    Binary {
        op: BinaryOp,
        lhs: Box<Term>,
        rhs: Box<Term>,
    },
    Unary {
        op: UnaryOp,
        operand: Box<Term>,
    },
    /// Set and sequence displays; only their identifier occurrences matter.
    Opaque {
        kind: OpaqueKind,
        items: Vec<Term>,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RelOp {
    Eq,
    Neq,
    Lt,
    Le,
    Gt,
    Ge,
    In,
    NotIn,
    SubsetEq,
}

impl RelOp {
    pub fn symbol(self) -> &'static str {
        match self {
            RelOp::Eq => "=",
            RelOp::Neq => "/=",
            RelOp::Lt => "<",
            RelOp::Le => "<=",
            RelOp::Gt => ">",
            RelOp::Ge => ">=",
            RelOp::In => "in",
            RelOp::NotIn => "notin",
            RelOp::SubsetEq => "subseteq",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum PredExpr {
    Relation { op: RelOp, lhs: Term, rhs: Term },
    /// A term used as a predicate (boolean literal, flag, application).
    Atom(Term),
    Not(Box<PredExpr>),
    And(Box<PredExpr>, Box<PredExpr>),
    Or(Box<PredExpr>, Box<PredExpr>),
    Implies(Box<PredExpr>, Box<PredExpr>),
}

impl Term {
    pub fn visit_idents<'a>(&'a self, f: &mut impl FnMut(&'a IdentOccurrence)) {
        match self {
            Term::Ident(id) => f(id),
            Term::Literal(_) => {}
            Term::Apply { func, args } => {
                f(func);
                args.iter().for_each(|a| a.visit_idents(f));
            }
            Term::Binary { lhs, rhs, .. } => {
                lhs.visit_idents(f);
                rhs.visit_idents(f);
            }
            Term::Unary { operand, .. } => operand.visit_idents(f),
            Term::Opaque { items, .. } => items.iter().for_each(|a| a.visit_idents(f)),
        }
    }

    fn erase_positions(&mut self) {
        match self {
            Term::Ident(id) => id.pos = Position::default(),
            Term::Literal(_) => {}
            Term::Apply { func, args } => {
                func.pos = Position::default();
                args.iter_mut().for_each(Term::erase_positions);
            }
            Term::Binary { lhs, rhs, .. } => {
                lhs.erase_positions();
                rhs.erase_positions();
            }
            Term::Unary { operand, .. } => operand.erase_positions(),
            Term::Opaque { items, .. } => items.iter_mut().for_each(Term::erase_positions),
        }
    }
}

impl PredExpr {
    /// Visits every identifier occurrence in source order.
    pub fn visit_idents<'a>(&'a self, f: &mut impl FnMut(&'a IdentOccurrence)) {
        match self {
            PredExpr::Relation { lhs, rhs, .. } => {
                lhs.visit_idents(f);
                rhs.visit_idents(f);
            }
            PredExpr::Atom(t) => t.visit_idents(f),
            PredExpr::Not(p) => p.visit_idents(f),
            PredExpr::And(a, b) | PredExpr::Or(a, b) | PredExpr::Implies(a, b) => {
                a.visit_idents(f);
                b.visit_idents(f);
            }
        }
    }

    pub fn idents(&self) -> Vec<&IdentOccurrence> {
        let mut out = Vec::new();
        self.visit_idents(&mut |id| out.push(id));
        out
    }

    /// Number of `and` connectives at any depth.
    pub fn and_count(&self) -> usize {
        self.count_connectives(&|p| matches!(p, PredExpr::And(..)))
    }

    /// Number of `or` connectives at any depth.
    pub fn or_count(&self) -> usize {
        self.count_connectives(&|p| matches!(p, PredExpr::Or(..)))
    }

    fn count_connectives(&self, is_match: &dyn Fn(&PredExpr) -> bool) -> usize {
        let own = usize::from(is_match(self));
        own + match self {
            PredExpr::Relation { .. } | PredExpr::Atom(_) => 0,
            PredExpr::Not(p) => p.count_connectives(is_match),
            PredExpr::And(a, b) | PredExpr::Or(a, b) | PredExpr::Implies(a, b) => {
                a.count_connectives(is_match) + b.count_connectives(is_match)
            }
        }
    }

    /// Splits at top-level `and` into conjuncts, left to right.
    pub fn conjuncts(&self) -> Vec<&PredExpr> {
        match self {
            PredExpr::And(a, b) => {
                let mut out = a.conjuncts();
                out.extend(b.conjuncts());
                out
            }
            other => vec![other],
        }
    }

    fn erase_positions(&mut self) {
        match self {
            PredExpr::Relation { lhs, rhs, .. } => {
                lhs.erase_positions();
                rhs.erase_positions();
            }
            PredExpr::Atom(t) => t.erase_positions(),
            PredExpr::Not(p) => p.erase_positions(),
            PredExpr::And(a, b) | PredExpr::Or(a, b) | PredExpr::Implies(a, b) => {
                a.erase_positions();
                b.erase_positions();
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InclusionKind {
    Delta,
    Xi,
    Includes,
}

impl InclusionKind {
    pub fn keyword(self) -> &'static str {
        match self {
            InclusionKind::Delta => "delta",
            InclusionKind::Xi => "xi",
            InclusionKind::Includes => "includes",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Inclusion {
    pub kind: InclusionKind,
    pub target: String,
    pub line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Declaration {
    pub name: String,
    pub decoration: Decoration,
    pub type_text: String,
    pub line: usize,
    /// Schema the declaration was imported from; `None` when written locally.
    pub origin: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PredicateKind {
    Stated,
    /// `x' = x` added by a `xi` inclusion.
    XiEquality,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Predicate {
    pub expr: PredExpr,
    pub kind: PredicateKind,
    pub line: usize,
    pub origin: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaDef {
    pub name: String,
    pub line: usize,
    pub inclusions: Vec<Inclusion>,
    pub declarations: Vec<Declaration>,
    pub predicates: Vec<Predicate>,
}

impl SchemaDef {
    pub fn new(name: impl Into<String>) -> Self {
        SchemaDef {
            name: name.into(),
            line: 0,
            inclusions: Vec::new(),
            declarations: Vec::new(),
            predicates: Vec::new(),
        }
    }

    pub fn local_declarations(&self) -> impl Iterator<Item = &Declaration> {
        self.declarations.iter().filter(|d| d.origin.is_none())
    }

    pub fn local_predicates(&self) -> impl Iterator<Item = &Predicate> {
        self.predicates
            .iter()
            .filter(|p| p.origin.is_none() && p.kind == PredicateKind::Stated)
    }

    /// Distinct base names of plain declarations, in declaration order.
    pub fn state_variables(&self) -> Vec<&Declaration> {
        let mut seen = std::collections::BTreeSet::new();
        self.declarations
            .iter()
            .filter(|d| d.decoration == Decoration::Plain && seen.insert(d.name.as_str()))
            .collect()
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Specification {
    pub given_sets: Vec<String>,
    pub schemas: Vec<SchemaDef>,
}

impl Specification {
    pub fn schema(&self, name: &str) -> Option<&SchemaDef> {
        self.schemas.iter().find(|s| s.name == name)
    }

    /// Copy with every source position cleared, for layout-independent
    /// comparison of two parses.
    pub fn without_positions(&self) -> Specification {
        let mut out = self.clone();
        for schema in &mut out.schemas {
            schema.line = 0;
            schema.inclusions.iter_mut().for_each(|i| i.line = 0);
            schema.declarations.iter_mut().for_each(|d| d.line = 0);
            for p in &mut schema.predicates {
                p.line = 0;
                p.expr.erase_positions();
            }
        }
        out
    }
}

/// A specification whose inclusions have been expanded.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ResolvedSpec(Specification);

impl ResolvedSpec {
    pub fn into_inner(self) -> Specification {
        self.0
    }
}

impl Deref for ResolvedSpec {
    type Target = Specification;

    fn deref(&self) -> &Specification {
        &self.0
    }
}

/// Parses and expands in one step.
pub fn load_specification(source: &str) -> Result<ResolvedSpec, SpecError> {
    resolve_inclusions(&parse_specification(source)?)
}
