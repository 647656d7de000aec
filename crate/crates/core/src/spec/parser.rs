use std::collections::BTreeSet;

use super::lexer::{strip_comment, tokenize, Tok, Token};
use super::{
    BinaryOp, Declaration, Decoration, IdentOccurrence, Inclusion, InclusionKind, OpaqueKind,
    PredExpr, Predicate, PredicateKind, RelOp, SchemaDef, SpecError, Specification, Term, UnaryOp,
};

/// Parses the line-oriented notation into an unexpanded [`Specification`].
pub fn parse_specification(source: &str) -> Result<Specification, SpecError> {
    let tokens = tokenize(source)?;
    let lines: Vec<&str> = source.lines().map(strip_comment).collect();
    let mut parser = Parser {
        tokens,
        lines,
        pos: 0,
    };
    let spec = parser.specification()?;

    let mut names = BTreeSet::new();
    for schema in &spec.schemas {
        if !names.insert(schema.name.as_str()) {
            return Err(SpecError::DuplicateSchema(schema.name.clone()));
        }
    }
    for schema in &spec.schemas {
        if let Some(inc) = schema
            .inclusions
            .iter()
            .find(|i| !names.contains(i.target.as_str()))
        {
            return Err(SpecError::UnknownInclusion(inc.target.clone()));
        }
    }
    Ok(spec)
}

struct Parser<'a> {
    tokens: Vec<Token>,
    lines: Vec<&'a str>,
    pos: usize,
}

type PResult<T> = Result<T, SpecError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn line(&self) -> usize {
        self.tokens[self.pos].pos.line
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if self.pos + 1 < self.tokens.len() {
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: impl Into<String>) -> PResult<T> {
        Err(SpecError::Syntax {
            line: self.line(),
            expected: expected.into(),
        })
    }

    fn skip_newlines(&mut self) {
        while *self.peek() == Tok::Newline {
            self.bump();
        }
    }

    fn eat_word(&mut self, w: &str) -> bool {
        if matches!(self.peek(), Tok::Word(x) if *x == w) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if matches!(self.peek(), Tok::Sym(x) if *x == s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<()> {
        if self.eat_sym(s) {
            Ok(())
        } else {
            self.error(format!("`{s}`"))
        }
    }

    fn plain_name(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(name, Decoration::Plain) => {
                self.bump();
                Ok(name)
            }
            _ => self.error("name"),
        }
    }

    fn end_of_line(&mut self) -> PResult<()> {
        match self.peek() {
            Tok::Newline | Tok::Eof => {
                self.skip_newlines();
                Ok(())
            }
            _ => self.error("end of line"),
        }
    }

    fn specification(&mut self) -> PResult<Specification> {
        let mut spec = Specification::default();
        loop {
            self.skip_newlines();
            match self.peek() {
                Tok::Eof => return Ok(spec),
                Tok::Word("given") => {
                    self.bump();
                    spec.given_sets.push(self.plain_name()?);
                    while self.eat_sym(",") {
                        spec.given_sets.push(self.plain_name()?);
                    }
                    self.end_of_line()?;
                }
                Tok::Word("schema") => spec.schemas.push(self.schema()?),
                _ => return self.error("`given` or `schema`"),
            }
        }
    }

    fn schema(&mut self) -> PResult<SchemaDef> {
        let line = self.line();
        self.bump();
        let mut schema = SchemaDef::new(self.plain_name()?);
        schema.line = line;
        let mut seen = BTreeSet::new();
        loop {
            self.skip_newlines();
            let line = self.line();
            let kind = match self.peek() {
                Tok::Word("delta") => Some(InclusionKind::Delta),
                Tok::Word("xi") => Some(InclusionKind::Xi),
                Tok::Word("includes") => Some(InclusionKind::Includes),
                _ => None,
            };
            if let Some(kind) = kind {
                self.bump();
                let target = self.plain_name()?;
                schema.inclusions.push(Inclusion { kind, target, line });
                continue;
            }
            match self.peek() {
                Tok::Word("decl") => {
                    self.bump();
                    for decl in self.declaration_line(line)? {
                        if !seen.insert((decl.name.clone(), decl.decoration)) {
                            return Err(SpecError::DuplicateDeclaration {
                                schema: schema.name.clone(),
                                name: format!("{}{}", decl.name, decl.decoration.suffix()),
                            });
                        }
                        schema.declarations.push(decl);
                    }
                }
                Tok::Word("pred") => {
                    self.bump();
                    let expr = self.pred()?;
                    self.end_of_line()?;
                    schema.predicates.push(Predicate {
                        expr,
                        kind: PredicateKind::Stated,
                        line,
                        origin: None,
                    });
                }
                Tok::Word("end") => {
                    self.bump();
                    return Ok(schema);
                }
                _ => return self.error("`delta`, `xi`, `includes`, `decl`, `pred` or `end`"),
            }
        }
    }

    fn declaration_line(&mut self, line: usize) -> PResult<Vec<Declaration>> {
        let mut names = Vec::new();
        loop {
            match self.peek().clone() {
                Tok::Ident(name, decoration) => {
                    self.bump();
                    names.push((name, decoration));
                }
                _ => return self.error("declared name"),
            }
            if !self.eat_sym(",") {
                break;
            }
        }
        if !matches!(self.peek(), Tok::Sym(":")) {
            return self.error("`:`");
        }
        let colon = self.bump();
        let text = self.lines[colon.pos.line - 1][colon.offset + 1..].trim().to_string();
        if text.is_empty() {
            return self.error("type text");
        }
        while !matches!(self.peek(), Tok::Newline | Tok::Eof) {
            self.bump();
        }
        self.skip_newlines();
        Ok(names
            .into_iter()
            .map(|(name, decoration)| Declaration {
                name,
                decoration,
                type_text: text.clone(),
                line,
                origin: None,
            })
            .collect())
    }

    // implies < or < and < not < relation
    fn pred(&mut self) -> PResult<PredExpr> {
        let lhs = self.disjunction()?;
        if self.eat_word("implies") {
            let rhs = self.pred()?;
            return Ok(PredExpr::Implies(Box::new(lhs), Box::new(rhs)));
        }
        Ok(lhs)
    }

    fn disjunction(&mut self) -> PResult<PredExpr> {
        let mut lhs = self.conjunction()?;
        while self.eat_word("or") {
            let rhs = self.conjunction()?;
            lhs = PredExpr::Or(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn conjunction(&mut self) -> PResult<PredExpr> {
        let mut lhs = self.negation()?;
        while self.eat_word("and") {
            let rhs = self.negation()?;
            lhs = PredExpr::And(Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn negation(&mut self) -> PResult<PredExpr> {
        if self.eat_word("not") {
            return Ok(PredExpr::Not(Box::new(self.negation()?)));
        }
        self.pred_primary()
    }

    fn pred_primary(&mut self) -> PResult<PredExpr> {
        if matches!(self.peek(), Tok::Sym("(")) {
            // Either a parenthesised predicate or a term like `(a + b) = c`.
            let save = self.pos;
            self.bump();
            if let Ok(inner) = self.pred() {
                if self.eat_sym(")") && !self.at_term_continuation() {
                    return Ok(inner);
                }
            }
            self.pos = save;
        }
        let lhs = self.term()?;
        match self.rel_op() {
            Some(op) => {
                let rhs = self.term()?;
                Ok(PredExpr::Relation { op, lhs, rhs })
            }
            None => Ok(PredExpr::Atom(lhs)),
        }
    }

    fn at_term_continuation(&self) -> bool {
        match self.peek() {
            Tok::Sym(s) => ["=", "/=", "<", "<=", ">", ">=", "+", "-", "*", "/"].contains(s),
            Tok::Word(w) => ["in", "notin", "subseteq", "div", "mod", "union", "inter"].contains(w),
            _ => false,
        }
    }

    fn rel_op(&mut self) -> Option<RelOp> {
        let op = match self.peek() {
            Tok::Sym("=") => RelOp::Eq,
            Tok::Sym("/=") => RelOp::Neq,
            Tok::Sym("<") => RelOp::Lt,
            Tok::Sym("<=") => RelOp::Le,
            Tok::Sym(">") => RelOp::Gt,
            Tok::Sym(">=") => RelOp::Ge,
            Tok::Word("in") => RelOp::In,
            Tok::Word("notin") => RelOp::NotIn,
            Tok::Word("subseteq") => RelOp::SubsetEq,
            _ => return None,
        };
        self.bump();
        Some(op)
    }

    fn term(&mut self) -> PResult<Term> {
        let mut lhs = self.product()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("+") => BinaryOp::Add,
                Tok::Sym("-") => BinaryOp::Sub,
                Tok::Word("union") => BinaryOp::Union,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.product()?;
            lhs = Term::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn product(&mut self) -> PResult<Term> {
        let mut lhs = self.unary()?;
        loop {
            let op = match self.peek() {
                Tok::Sym("*") => BinaryOp::Mul,
                Tok::Sym("/") => BinaryOp::Div,
                Tok::Word("div") => BinaryOp::IntDiv,
                Tok::Word("mod") => BinaryOp::Mod,
                Tok::Word("inter") => BinaryOp::Inter,
                _ => return Ok(lhs),
            };
            self.bump();
            let rhs = self.unary()?;
            lhs = Term::Binary {
                op,
                lhs: Box::new(lhs),
                rhs: Box::new(rhs),
            };
        }
    }

    fn unary(&mut self) -> PResult<Term> {
        let op = match self.peek() {
            Tok::Sym("-") => UnaryOp::Neg,
            Tok::Sym("#") => UnaryOp::Card,
            _ => return self.term_primary(),
        };
        self.bump();
        Ok(Term::Unary {
            op,
            operand: Box::new(self.unary()?),
        })
    }

    fn term_list(&mut self, close: &str) -> PResult<Vec<Term>> {
        let mut items = Vec::new();
        if self.eat_sym(close) {
            return Ok(items);
        }
        loop {
            items.push(self.term()?);
            if self.eat_sym(close) {
                return Ok(items);
            }
            self.expect_sym(",")?;
        }
    }

    fn term_primary(&mut self) -> PResult<Term> {
        let tok = self.tokens[self.pos].clone();
        match tok.tok {
            Tok::Number(n) => {
                self.bump();
                Ok(Term::Literal(n))
            }
            Tok::Str(s) => {
                self.bump();
                Ok(Term::Literal(format!("\"{s}\"")))
            }
            Tok::Word(w @ ("true" | "false")) => {
                self.bump();
                Ok(Term::Literal(w.to_string()))
            }
            Tok::Ident(name, decoration) => {
                self.bump();
                let occ = IdentOccurrence {
                    name,
                    decoration,
                    pos: tok.pos,
                };
                if matches!(self.peek(), Tok::Sym("(")) {
                    self.bump();
                    let args = self.term_list(")")?;
                    Ok(Term::Apply { func: occ, args })
                } else {
                    Ok(Term::Ident(occ))
                }
            }
            Tok::Sym("(") => {
                self.bump();
                let inner = self.term()?;
                self.expect_sym(")")?;
                Ok(inner)
            }
            Tok::Sym("{") => {
                self.bump();
                Ok(Term::Opaque {
                    kind: OpaqueKind::Set,
                    items: self.term_list("}")?,
                })
            }
            Tok::Sym("[") => {
                self.bump();
                Ok(Term::Opaque {
                    kind: OpaqueKind::Sequence,
                    items: self.term_list("]")?,
                })
            }
            _ => self.error("term"),
        }
    }
}
