use std::collections::{BTreeMap, BTreeSet};

use super::{
    Declaration, Decoration, IdentOccurrence, InclusionKind, Position, PredExpr, Predicate,
    PredicateKind, ResolvedSpec, SchemaDef, SpecError, Specification, Term,
};

/// Expands `delta`, `xi` and `includes` into the including schema.
///
/// * `delta S` imports every state variable of `S` (its plain declarations,
///   after `S` is itself expanded) in plain and primed form.
/// * `xi S` does the same and adds one synthetic `x' = x` predicate per
///   state variable.
/// * `includes S` copies all declarations and predicate conjuncts of `S`.
///
/// Imported elements carry their origin schema. Elements imported earlier
/// are discarded before expansion, so resolving a resolved specification
/// is a no-op. A declaration already present under the same name and
/// decoration is not imported twice.
pub fn resolve_inclusions(spec: &Specification) -> Result<ResolvedSpec, SpecError> {
    let index: BTreeMap<&str, usize> = spec
        .schemas
        .iter()
        .enumerate()
        .map(|(i, s)| (s.name.as_str(), i))
        .collect();
    let mut ctx = Expander {
        spec,
        index,
        done: vec![None; spec.schemas.len()],
        stack: Vec::new(),
    };
    for i in 0..spec.schemas.len() {
        ctx.expand(i)?;
    }
    let schemas = ctx.done.into_iter().map(|s| s.expect("expanded")).collect();
    Ok(ResolvedSpec(Specification {
        given_sets: spec.given_sets.clone(),
        schemas,
    }))
}

struct Expander<'a> {
    spec: &'a Specification,
    index: BTreeMap<&'a str, usize>,
    done: Vec<Option<SchemaDef>>,
    stack: Vec<usize>,
}

impl Expander<'_> {
    fn expand(&mut self, idx: usize) -> Result<(), SpecError> {
        if self.done[idx].is_some() {
            return Ok(());
        }
        if let Some(at) = self.stack.iter().position(|&s| s == idx) {
            let mut path: Vec<String> = self.stack[at..]
                .iter()
                .map(|&s| self.spec.schemas[s].name.clone())
                .collect();
            path.push(self.spec.schemas[idx].name.clone());
            return Err(SpecError::CyclicInclusion(path));
        }
        self.stack.push(idx);

        let source = &self.spec.schemas[idx];
        let mut declarations = Vec::new();
        let mut predicates = Vec::new();
        for inc in &source.inclusions {
            let target = *self
                .index
                .get(inc.target.as_str())
                .ok_or_else(|| SpecError::UnknownInclusion(inc.target.clone()))?;
            self.expand(target)?;
            let included = self.done[target].as_ref().expect("expanded");
            let origin = Some(included.name.clone());
            match inc.kind {
                InclusionKind::Delta | InclusionKind::Xi => {
                    let state = included.state_variables();
                    for var in &state {
                        for decoration in [Decoration::Plain, Decoration::Primed] {
                            declarations.push(Declaration {
                                name: var.name.clone(),
                                decoration,
                                type_text: var.type_text.clone(),
                                line: inc.line,
                                origin: origin.clone(),
                            });
                        }
                    }
                    if inc.kind == InclusionKind::Xi {
                        for var in &state {
                            predicates.push(Predicate {
                                expr: xi_equality(&var.name),
                                kind: PredicateKind::XiEquality,
                                line: inc.line,
                                origin: origin.clone(),
                            });
                        }
                    }
                }
                InclusionKind::Includes => {
                    for d in &included.declarations {
                        declarations.push(Declaration {
                            origin: d.origin.clone().or_else(|| origin.clone()),
                            ..d.clone()
                        });
                    }
                    for p in &included.predicates {
                        predicates.push(Predicate {
                            origin: p.origin.clone().or_else(|| origin.clone()),
                            ..p.clone()
                        });
                    }
                }
            }
        }
        declarations.extend(source.local_declarations().cloned());
        predicates.extend(source.local_predicates().cloned());

        let mut seen = BTreeSet::new();
        declarations.retain(|d| seen.insert((d.name.clone(), d.decoration)));

        self.done[idx] = Some(SchemaDef {
            name: source.name.clone(),
            line: source.line,
            inclusions: source.inclusions.clone(),
            declarations,
            predicates,
        });
        self.stack.pop();
        Ok(())
    }
}

fn xi_equality(name: &str) -> PredExpr {
    let occ = |decoration| {
        Term::Ident(IdentOccurrence {
            name: name.to_string(),
            decoration,
            pos: Position::default(),
        })
    };
    PredExpr::Relation {
        op: super::RelOp::Eq,
        lhs: occ(Decoration::Primed),
        rhs: occ(Decoration::Plain),
    }
}
