//! Front end for the Ada-flavoured mini language.
//!
//! Each subprogram becomes a [`CodeUnit`] carrying its per-line
//! classification, resolved jumps, decision tallies, call sites and global
//! accesses. Keywords are case-insensitive; identifiers are compared as
//! written.

mod lexer;
mod parser;

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

pub use parser::parse_code_unlinked;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CodeError {
    #[error("line {line}: syntax error, expected {expected}")]
    Syntax { line: usize, expected: String },
    #[error("line {line}: goto to unknown label `{name}`")]
    UnresolvedLabel { name: String, line: usize },
    #[error("line {line}: exit outside of any loop")]
    UnresolvedExit { line: usize },
    #[error("subprogram `{0}` is defined more than once")]
    DuplicateUnit(String),
}

impl CodeError {
    pub fn line(&self) -> Option<usize> {
        match self {
            CodeError::Syntax { line, .. }
            | CodeError::UnresolvedLabel { line, .. }
            | CodeError::UnresolvedExit { line } => Some(*line),
            CodeError::DuplicateUnit(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum UnitKind {
    Procedure,
    Function,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum ParamMode {
    In,
    Out,
    InOut,
}

impl ParamMode {
    pub fn is_input(self) -> bool {
        matches!(self, ParamMode::In | ParamMode::InOut)
    }

    pub fn is_output(self) -> bool {
        matches!(self, ParamMode::Out | ParamMode::InOut)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Param {
    pub name: String,
    pub mode: ParamMode,
    pub type_text: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum LineClass {
    Blank,
    Comment,
    /// Subprogram specification lines and the `begin` line.
    Header,
    Declarative,
    Executable,
    /// The closing `end NAME;` line.
    Terminator,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum JumpKind {
    Goto,
    Exit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Jump {
    pub kind: JumpKind,
    pub source: usize,
    pub target: usize,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DecisionCounts {
    pub ifs: usize,
    pub elsifs: usize,
    pub whiles: usize,
    pub fors: usize,
    pub exit_whens: usize,
    /// Number of `when` alternatives of each `case` statement.
    pub case_alternatives: Vec<usize>,
    pub and_thens: usize,
    pub or_elses: usize,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CallSite {
    pub callee: String,
    pub line: usize,
}

/// A bare global name passed as an actual parameter; becomes a write when
/// the callee's formal at `position` has an `out` mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct ArgPass {
    pub callee: String,
    pub position: usize,
    pub name: String,
    /// Passed in a call statement. Such names are reads only when the
    /// formal is an input (or the callee is unknown).
    pub statement: bool,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CodeUnit {
    pub name: String,
    pub kind: UnitKind,
    pub params: Vec<Param>,
    /// First and last physical line, inclusive.
    pub span: (usize, usize),
    /// Line holding `is`, closing the subprogram specification.
    pub header_end: usize,
    pub begin_line: usize,
    /// One class per line of `span`.
    pub line_classes: Vec<LineClass>,
    pub jumps: Vec<Jump>,
    pub decisions: DecisionCounts,
    /// Call sites with multiplicity, in source order.
    pub calls: Vec<CallSite>,
    pub global_reads: BTreeSet<String>,
    pub global_writes: BTreeSet<String>,
    /// Source text of the span.
    pub source: String,
    pub(crate) statement_calls: Vec<CallSite>,
    pub(crate) applications: Vec<CallSite>,
    pub(crate) arg_passes: Vec<ArgPass>,
    pub(crate) direct_reads: BTreeSet<String>,
    pub(crate) direct_writes: BTreeSet<String>,
}

impl CodeUnit {
    pub fn class_of(&self, line: usize) -> Option<LineClass> {
        line.checked_sub(self.span.0)
            .and_then(|i| self.line_classes.get(i))
            .copied()
    }

    pub fn class_count(&self, class: LineClass) -> usize {
        self.line_classes.iter().filter(|c| **c == class).count()
    }

    pub fn span_len(&self) -> usize {
        self.span.1 - self.span.0 + 1
    }

    pub fn callees(&self) -> BTreeSet<&str> {
        self.calls.iter().map(|c| c.callee.as_str()).collect()
    }

    /// Number of call sites naming `callee`.
    pub fn call_site_count(&self, callee: &str) -> usize {
        self.calls.iter().filter(|c| c.callee == callee).count()
    }
}

/// `--` comments of a source file as (line, text after the dashes).
pub fn comments(source: &str) -> Result<Vec<(usize, String)>, CodeError> {
    Ok(lexer::tokenize(source)?.comments)
}

/// Parses one source file and links its units against each other.
pub fn parse_code(source: &str) -> Result<Vec<CodeUnit>, CodeError> {
    let mut units = parse_code_unlinked(source)?;
    link_units(&mut units)?;
    Ok(units)
}

/// Resolves cross-unit facts: expression applications naming a known unit
/// become calls, and globals passed to `out`/`in out` formals become
/// writes.
pub fn link_units(units: &mut [CodeUnit]) -> Result<(), CodeError> {
    let mut modes: BTreeMap<String, Vec<ParamMode>> = BTreeMap::new();
    for u in units.iter() {
        let modes_of = u.params.iter().map(|p| p.mode).collect();
        if modes.insert(u.name.clone(), modes_of).is_some() {
            return Err(CodeError::DuplicateUnit(u.name.clone()));
        }
    }
    for u in units.iter_mut() {
        let mut calls: Vec<CallSite> = u
            .statement_calls
            .iter()
            .chain(u.applications.iter().filter(|a| modes.contains_key(&a.callee)))
            .cloned()
            .collect();
        calls.sort_by_key(|c| c.line);
        u.calls = calls;
        u.global_reads = u.direct_reads.clone();
        u.global_writes = u.direct_writes.clone();
        for pass in &u.arg_passes {
            let mode = modes.get(&pass.callee).and_then(|m| m.get(pass.position));
            if mode.is_some_and(|m| m.is_output()) {
                u.global_writes.insert(pass.name.clone());
            }
            if pass.statement && mode.is_none_or(|m| m.is_input()) {
                u.global_reads.insert(pass.name.clone());
            }
        }
    }
    Ok(())
}

/// Parses several files as one corpus. Errors carry the failing file name.
pub fn parse_files<'a>(
    files: impl IntoIterator<Item = (&'a str, &'a str)>,
) -> Result<Vec<CodeUnit>, (String, CodeError)> {
    let mut units = Vec::new();
    for (name, src) in files {
        units.extend(parse_code_unlinked(src).map_err(|e| (name.to_string(), e))?);
    }
    link_units(&mut units).map_err(|e| (String::new(), e))?;
    Ok(units)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum VertexKind {
    Unit,
    External,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct CallGraph {
    pub vertices: BTreeMap<String, VertexKind>,
    pub edges: BTreeSet<(String, String)>,
}

impl CallGraph {
    pub fn callers_of<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .iter()
            .filter(move |(_, callee)| callee == name)
            .map(|(caller, _)| caller.as_str())
    }

    pub fn callees_of<'a>(&'a self, name: &'a str) -> impl Iterator<Item = &'a str> + 'a {
        self.edges
            .iter()
            .filter(move |(caller, _)| caller == name)
            .map(|(_, callee)| callee.as_str())
    }
}

pub fn build_call_graph(units: &[CodeUnit]) -> CallGraph {
    let mut graph = CallGraph::default();
    for u in units {
        graph.vertices.insert(u.name.clone(), VertexKind::Unit);
    }
    for u in units {
        for call in &u.calls {
            graph
                .vertices
                .entry(call.callee.clone())
                .or_insert(VertexKind::External);
            graph.edges.insert((u.name.clone(), call.callee.clone()));
        }
    }
    graph
}
