//! Specification Relationship Net: schemas split into primes, with
//! reconstructed control and data dependencies.
//!
//! Control dependencies come from guards. A guard is a predicate prime that
//! mentions only before-state and input identifiers; it controls every other
//! non-guard predicate prime of its schema. Data dependencies link a prime
//! that defines a variable to a prime that uses it, and every declaration to
//! the predicates that mention the declared name. Inter-schema arcs connect
//! an after-state definition by a predicate in one schema to a plain use in
//! another, when both schemas include a schema declaring the variable.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write;

use crate::spec::{print_pred, Decoration, PredicateKind, ResolvedSpec, SchemaDef};

pub type PrimeId = usize;

/// (base name, decoration)
pub type Occurrence = (String, Decoration);

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PrimeKind {
    Declaration,
    Predicate,
    XiEquality,
}

impl PrimeKind {
    pub fn is_predicate(self) -> bool {
        !matches!(self, PrimeKind::Declaration)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Prime {
    pub id: PrimeId,
    pub schema: String,
    pub kind: PrimeKind,
    /// Declarations define their declared name; predicates define every
    /// primed or output occurrence.
    pub def_set: BTreeSet<Occurrence>,
    /// Plain and input occurrences.
    pub uses: BTreeSet<Occurrence>,
    pub is_guard: bool,
    pub line: usize,
    pub origin: Option<String>,
    pub text: String,
}

impl Prime {
    pub fn def_names(&self) -> BTreeSet<&str> {
        self.def_set.iter().map(|(n, _)| n.as_str()).collect()
    }

    pub fn use_set(&self) -> BTreeSet<&str> {
        self.uses.iter().map(|(n, _)| n.as_str()).collect()
    }

    fn mentions(&self, name: &str) -> bool {
        self.def_set.iter().chain(&self.uses).any(|(n, _)| n == name)
    }
}

/// Splits one inclusion-expanded schema into primes, numbered from 0.
pub fn split_primes(schema: &SchemaDef) -> Vec<Prime> {
    let mut primes = Vec::new();
    for decl in &schema.declarations {
        primes.push(Prime {
            id: primes.len(),
            schema: schema.name.clone(),
            kind: PrimeKind::Declaration,
            def_set: BTreeSet::from([(decl.name.clone(), decl.decoration)]),
            uses: BTreeSet::new(),
            is_guard: false,
            line: decl.line,
            origin: decl.origin.clone(),
            text: format!(
                "{}{} : {}",
                decl.name,
                decl.decoration.suffix(),
                decl.type_text
            ),
        });
    }
    for pred in &schema.predicates {
        let kind = match pred.kind {
            PredicateKind::Stated => PrimeKind::Predicate,
            PredicateKind::XiEquality => PrimeKind::XiEquality,
        };
        for conjunct in pred.expr.conjuncts() {
            let mut def_set = BTreeSet::new();
            let mut uses = BTreeSet::new();
            conjunct.visit_idents(&mut |id| {
                let occ = (id.name.clone(), id.decoration);
                if id.decoration.is_after_state() {
                    def_set.insert(occ);
                } else {
                    uses.insert(occ);
                }
            });
            primes.push(Prime {
                id: primes.len(),
                schema: schema.name.clone(),
                kind,
                is_guard: def_set.is_empty(),
                def_set,
                uses,
                line: pred.line,
                origin: pred.origin.clone(),
                text: print_pred(conjunct),
            });
        }
    }
    primes
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct DataArc {
    pub src: PrimeId,
    pub dst: PrimeId,
    pub var: String,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InterSchemaArc {
    pub src_schema: usize,
    pub dst_schema: usize,
    pub src: PrimeId,
    pub dst: PrimeId,
    pub var: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SchemaNode {
    pub name: String,
    /// Global prime ids, contiguous.
    pub primes: std::ops::Range<PrimeId>,
    /// Directly included schema names.
    pub included: BTreeSet<String>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Srn {
    pub primes: Vec<Prime>,
    pub schemas: Vec<SchemaNode>,
    pub control_arcs: BTreeSet<(PrimeId, PrimeId)>,
    pub data_arcs: BTreeSet<DataArc>,
    pub interschema_arcs: BTreeSet<InterSchemaArc>,
}

impl Srn {
    pub fn schema_index(&self, name: &str) -> Option<usize> {
        self.schemas.iter().position(|s| s.name == name)
    }

    pub fn schema_primes(&self, schema: usize) -> &[Prime] {
        &self.primes[self.schemas[schema].primes.clone()]
    }

    pub fn control_arcs_of(&self, schema: usize) -> impl Iterator<Item = &(PrimeId, PrimeId)> {
        let range = self.schemas[schema].primes.clone();
        self.control_arcs
            .iter()
            .filter(move |(s, _)| range.contains(s))
    }

    pub fn data_arcs_of(&self, schema: usize) -> impl Iterator<Item = &DataArc> {
        let range = self.schemas[schema].primes.clone();
        self.data_arcs.iter().filter(move |a| range.contains(&a.src))
    }

    /// Graph description in DOT syntax, for inspection.
    pub fn to_dot(&self) -> String {
        let mut out = String::from("digraph srn {\n");
        for (si, schema) in self.schemas.iter().enumerate() {
            let _ = writeln!(out, "  subgraph cluster_{si} {{\n    label=\"{}\";", schema.name);
            for p in self.schema_primes(si) {
                let _ = writeln!(
                    out,
                    "    p{} [label=\"{}\", kind=\"{:?}\", guard={}];",
                    p.id,
                    p.text.replace('"', "\\\""),
                    p.kind,
                    p.is_guard
                );
            }
            out.push_str("  }\n");
        }
        for (s, d) in &self.control_arcs {
            let _ = writeln!(out, "  p{s} -> p{d} [type=control];");
        }
        for a in &self.data_arcs {
            let _ = writeln!(out, "  p{} -> p{} [type=data, var=\"{}\"];", a.src, a.dst, a.var);
        }
        for a in &self.interschema_arcs {
            let _ = writeln!(
                out,
                "  p{} -> p{} [type=interschema, var=\"{}\"];",
                a.src, a.dst, a.var
            );
        }
        out.push_str("}\n");
        out
    }
}

pub fn build_srn(spec: &ResolvedSpec) -> Srn {
    let mut primes = Vec::new();
    let mut schemas = Vec::new();
    for schema in &spec.schemas {
        let start = primes.len();
        for mut p in split_primes(schema) {
            p.id += start;
            primes.push(p);
        }
        schemas.push(SchemaNode {
            name: schema.name.clone(),
            primes: start..primes.len(),
            included: schema.inclusions.iter().map(|i| i.target.clone()).collect(),
        });
    }

    let mut control_arcs = BTreeSet::new();
    let mut data_arcs = BTreeSet::new();
    for node in &schemas {
        let local = &primes[node.primes.clone()];
        for p in local {
            for q in local {
                if p.id == q.id {
                    continue;
                }
                if p.is_guard && q.kind.is_predicate() && !q.is_guard {
                    control_arcs.insert((p.id, q.id));
                }
                if !q.kind.is_predicate() {
                    continue;
                }
                match p.kind {
                    PrimeKind::Declaration => {
                        for (name, _) in &p.def_set {
                            if q.mentions(name) {
                                data_arcs.insert(DataArc {
                                    src: p.id,
                                    dst: q.id,
                                    var: name.clone(),
                                });
                            }
                        }
                    }
                    _ => {
                        let used = q.use_set();
                        for name in p.def_names() {
                            if used.contains(name) {
                                data_arcs.insert(DataArc {
                                    src: p.id,
                                    dst: q.id,
                                    var: name.to_string(),
                                });
                            }
                        }
                    }
                }
            }
        }
    }

    // Names declared by each schema, for the shared-state condition.
    let declared: BTreeMap<&str, BTreeSet<&str>> = spec
        .schemas
        .iter()
        .map(|s| {
            (
                s.name.as_str(),
                s.declarations.iter().map(|d| d.name.as_str()).collect(),
            )
        })
        .collect();
    let mut interschema_arcs = BTreeSet::new();
    for (ai, a) in schemas.iter().enumerate() {
        for (bi, b) in schemas.iter().enumerate() {
            if ai == bi {
                continue;
            }
            let shared: BTreeSet<&str> = a
                .included
                .intersection(&b.included)
                .flat_map(|s| declared.get(s.as_str()).into_iter().flatten().copied())
                .collect();
            if shared.is_empty() {
                continue;
            }
            for p in primes[a.primes.clone()].iter().filter(|p| p.kind.is_predicate()) {
                for (var, deco) in &p.def_set {
                    if !deco.is_after_state() || !shared.contains(var.as_str()) {
                        continue;
                    }
                    for q in &primes[b.primes.clone()] {
                        if q.uses.contains(&(var.clone(), Decoration::Plain)) {
                            interschema_arcs.insert(InterSchemaArc {
                                src_schema: ai,
                                dst_schema: bi,
                                src: p.id,
                                dst: q.id,
                                var: var.clone(),
                            });
                        }
                    }
                }
            }
        }
    }

    Srn {
        primes,
        schemas,
        control_arcs,
        data_arcs,
        interschema_arcs,
    }
}
