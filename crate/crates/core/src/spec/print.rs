use std::fmt::Write;

use super::{OpaqueKind, PredExpr, Specification, Term, UnaryOp};

/// Renders the locally written part of a specification back to source
/// form; inclusion-imported elements are left out. Nested compound
/// subexpressions are fully parenthesised.
pub fn print_specification(spec: &Specification) -> String {
    let mut out = String::new();
    if !spec.given_sets.is_empty() {
        let _ = writeln!(out, "given {}", spec.given_sets.join(", "));
    }
    for schema in &spec.schemas {
        let _ = writeln!(out, "schema {}", schema.name);
        for inc in &schema.inclusions {
            let _ = writeln!(out, "  {} {}", inc.kind.keyword(), inc.target);
        }
        for d in schema.local_declarations() {
            let _ = writeln!(
                out,
                "  decl {}{} : {}",
                d.name,
                d.decoration.suffix(),
                d.type_text
            );
        }
        for p in schema.local_predicates() {
            let _ = writeln!(out, "  pred {}", print_pred(&p.expr));
        }
        out.push_str("end\n");
    }
    out
}

pub fn print_pred(p: &PredExpr) -> String {
    match p {
        PredExpr::Relation { op, lhs, rhs } => {
            format!("{} {} {}", print_term(lhs), op.symbol(), print_term(rhs))
        }
        PredExpr::Atom(t) => print_term(t),
        PredExpr::Not(inner) => format!("not {}", pred_operand(inner)),
        PredExpr::And(a, b) => format!("{} and {}", pred_operand(a), pred_operand(b)),
        PredExpr::Or(a, b) => format!("{} or {}", pred_operand(a), pred_operand(b)),
        PredExpr::Implies(a, b) => format!("{} implies {}", pred_operand(a), pred_operand(b)),
    }
}

fn pred_operand(p: &PredExpr) -> String {
    match p {
        PredExpr::Relation { .. } | PredExpr::Atom(_) => print_pred(p),
        _ => format!("({})", print_pred(p)),
    }
}

pub fn print_term(t: &Term) -> String {
    match t {
        Term::Ident(id) => id.to_string(),
        Term::Literal(s) => s.clone(),
        Term::Apply { func, args } => format!("{}({})", func, join_terms(args)),
        Term::Binary { op, lhs, rhs } => {
            format!("{} {} {}", term_operand(lhs), op.symbol(), term_operand(rhs))
        }
        Term::Unary { op, operand } => {
            let sym = match op {
                UnaryOp::Neg => "-",
                UnaryOp::Card => "#",
            };
            format!("{sym}{}", term_operand(operand))
        }
        Term::Opaque { kind, items } => match kind {
            OpaqueKind::Set => format!("{{{}}}", join_terms(items)),
            OpaqueKind::Sequence => format!("[{}]", join_terms(items)),
        },
    }
}

fn term_operand(t: &Term) -> String {
    match t {
        Term::Binary { .. } | Term::Unary { .. } => format!("({})", print_term(t)),
        _ => print_term(t),
    }
}

fn join_terms(items: &[Term]) -> String {
    items.iter().map(print_term).collect::<Vec<_>>().join(", ")
}
