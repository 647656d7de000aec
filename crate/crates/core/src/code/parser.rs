use std::collections::{BTreeMap, BTreeSet};

use super::lexer::{tokenize, Tok, Token};
use super::{
    ArgPass, CallSite, CodeError, CodeUnit, DecisionCounts, Jump, JumpKind, LineClass, Param,
    ParamMode, UnitKind,
};

/// Role of a token, used to classify the physical line it sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Role {
    Terminator,
    Header,
    Declarative,
    Executable,
}

/// Parses one file without cross-unit linking; see [`super::link_units`].
pub fn parse_code_unlinked(source: &str) -> Result<Vec<CodeUnit>, CodeError> {
    let lexed = tokenize(source)?;
    let comment_lines: BTreeSet<usize> = lexed.comments.iter().map(|(l, _)| *l).collect();
    let lines: Vec<&str> = source.lines().collect();
    let mut p = Parser {
        tokens: lexed.tokens,
        pos: 0,
        role: Role::Header,
        roles: BTreeMap::new(),
        globals: BTreeSet::new(),
        unit: UnitState::default(),
    };
    let mut units = Vec::new();
    loop {
        match p.peek() {
            Tok::Eof => break,
            Tok::Kw("procedure") | Tok::Kw("function") => {
                let mut unit = p.subprogram()?;
                unit.line_classes = (unit.span.0..=unit.span.1)
                    .map(|l| classify(l, &p.roles, &comment_lines, &lines))
                    .collect();
                unit.source = lines[unit.span.0 - 1..unit.span.1].join("\n");
                units.push(unit);
            }
            Tok::Ident(_) => {
                let names = p.declaration(true)?;
                p.globals.extend(names);
            }
            _ => return p.error("global declaration or subprogram"),
        }
    }
    Ok(units)
}

fn classify(
    line: usize,
    roles: &BTreeMap<usize, Role>,
    comments: &BTreeSet<usize>,
    lines: &[&str],
) -> LineClass {
    match roles.get(&line) {
        Some(Role::Executable) => LineClass::Executable,
        Some(Role::Declarative) => LineClass::Declarative,
        Some(Role::Header) => LineClass::Header,
        Some(Role::Terminator) => LineClass::Terminator,
        None if comments.contains(&line) => LineClass::Comment,
        None => {
            debug_assert!(lines[line - 1].trim().is_empty());
            LineClass::Blank
        }
    }
}

#[derive(Default)]
struct UnitState {
    locals: BTreeSet<String>,
    reads: Vec<String>,
    writes: Vec<String>,
    statement_calls: Vec<CallSite>,
    applications: Vec<CallSite>,
    arg_passes: Vec<ArgPass>,
    decisions: DecisionCounts,
    labels: BTreeMap<String, usize>,
    gotos: Vec<(String, usize)>,
    jumps: Vec<Jump>,
    /// Pending exit source lines for each open loop.
    loops: Vec<Vec<usize>>,
}

struct Parser {
    tokens: Vec<Token>,
    pos: usize,
    role: Role,
    /// Highest-priority role seen on each line.
    roles: BTreeMap<usize, Role>,
    globals: BTreeSet<String>,
    unit: UnitState,
}

type PResult<T> = Result<T, CodeError>;

impl Parser {
    fn peek(&self) -> &Tok {
        &self.tokens[self.pos].tok
    }

    fn peek_at(&self, n: usize) -> &Tok {
        &self.tokens[(self.pos + n).min(self.tokens.len() - 1)].tok
    }

    fn line(&self) -> usize {
        self.tokens[self.pos].line
    }

    fn bump(&mut self) -> Token {
        let t = self.tokens[self.pos].clone();
        if t.tok != Tok::Eof {
            let role = self.roles.entry(t.line).or_insert(self.role);
            *role = (*role).max(self.role);
            self.pos += 1;
        }
        t
    }

    fn error<T>(&self, expected: impl Into<String>) -> PResult<T> {
        Err(CodeError::Syntax {
            line: self.line(),
            expected: expected.into(),
        })
    }

    fn is_kw(&self, kw: &str) -> bool {
        matches!(self.peek(), Tok::Kw(k) if *k == kw)
    }

    fn is_sym(&self, s: &str) -> bool {
        matches!(self.peek(), Tok::Sym(x) if *x == s)
    }

    fn eat_kw(&mut self, kw: &str) -> bool {
        if self.is_kw(kw) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn eat_sym(&mut self, s: &str) -> bool {
        if self.is_sym(s) {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect_kw(&mut self, kw: &str) -> PResult<Token> {
        if self.is_kw(kw) {
            Ok(self.bump())
        } else {
            self.error(format!("`{kw}`"))
        }
    }

    fn expect_sym(&mut self, s: &str) -> PResult<Token> {
        if self.is_sym(s) {
            Ok(self.bump())
        } else {
            self.error(format!("`{s}`"))
        }
    }

    fn ident(&mut self) -> PResult<String> {
        match self.peek().clone() {
            Tok::Ident(name) => {
                self.bump();
                Ok(name)
            }
            _ => self.error("identifier"),
        }
    }

    /// `A, B : [constant] type-text [:= expr];` returning the names.
    fn declaration(&mut self, global: bool) -> PResult<Vec<String>> {
        let mut names = vec![self.ident()?];
        while self.eat_sym(",") {
            names.push(self.ident()?);
        }
        self.expect_sym(":")?;
        self.eat_kw("constant");
        let mut type_tokens = 0;
        while !self.is_sym(";") && !self.is_sym(":=") {
            if matches!(self.peek(), Tok::Eof) {
                return self.error("`;`");
            }
            self.bump();
            type_tokens += 1;
        }
        if type_tokens == 0 {
            return self.error("type");
        }
        if self.eat_sym(":=") {
            if global {
                // Initialisers of globals belong to no unit.
                let saved = std::mem::take(&mut self.unit);
                self.expr()?;
                self.unit = saved;
            } else {
                self.expr()?;
            }
        }
        self.expect_sym(";")?;
        Ok(names)
    }

    fn params(&mut self) -> PResult<Vec<Param>> {
        let mut params = Vec::new();
        if !self.eat_sym("(") {
            return Ok(params);
        }
        if self.eat_sym(")") {
            return Ok(params);
        }
        loop {
            let mut names = vec![self.ident()?];
            while self.eat_sym(",") {
                names.push(self.ident()?);
            }
            self.expect_sym(":")?;
            let mode = if self.eat_kw("in") {
                if self.eat_kw("out") {
                    ParamMode::InOut
                } else {
                    ParamMode::In
                }
            } else if self.eat_kw("out") {
                ParamMode::Out
            } else {
                ParamMode::In
            };
            let mut type_text = Vec::new();
            while !self.is_sym(";") && !self.is_sym(")") {
                match self.bump().tok {
                    Tok::Ident(s) | Tok::Number(s) => type_text.push(s),
                    Tok::Kw(k) => type_text.push(k.to_string()),
                    Tok::Sym(s) => type_text.push(s.to_string()),
                    Tok::Eof => return self.error("`)`"),
                    _ => {}
                }
            }
            if type_text.is_empty() {
                return self.error("parameter type");
            }
            for name in names {
                params.push(Param {
                    name,
                    mode,
                    type_text: type_text.join(" "),
                });
            }
            if self.eat_sym(")") {
                return Ok(params);
            }
            self.expect_sym(";")?;
        }
    }

    fn subprogram(&mut self) -> PResult<CodeUnit> {
        self.unit = UnitState::default();
        self.role = Role::Header;
        let first = self.bump();
        let kind = if first.tok == Tok::Kw("function") {
            UnitKind::Function
        } else {
            UnitKind::Procedure
        };
        let name = self.ident()?;
        let params = self.params()?;
        if kind == UnitKind::Function {
            self.expect_kw("return")?;
            self.ident()?;
        }
        let is_tok = self.expect_kw("is")?;
        self.unit.locals.extend(params.iter().map(|p| p.name.clone()));

        self.role = Role::Declarative;
        while matches!(self.peek(), Tok::Ident(_)) {
            let names = self.declaration(false)?;
            self.unit.locals.extend(names);
        }
        if self.is_kw("procedure") || self.is_kw("function") {
            return self.error("`begin` (nested subprograms are not supported)");
        }
        self.role = Role::Header;
        let begin = self.expect_kw("begin")?;

        self.role = Role::Executable;
        self.statements(&["end"])?;

        self.role = Role::Terminator;
        self.expect_kw("end")?;
        if let Tok::Ident(end_name) = self.peek().clone() {
            if end_name != name {
                return self.error(format!("`end {name}`"));
            }
            self.bump();
        }
        let last = self.expect_sym(";")?;

        let state = std::mem::take(&mut self.unit);
        let mut jumps = state.jumps;
        for (label, line) in state.gotos {
            match state.labels.get(&label) {
                Some(&target) => jumps.push(Jump {
                    kind: JumpKind::Goto,
                    source: line,
                    target,
                }),
                None => return Err(CodeError::UnresolvedLabel { name: label, line }),
            }
        }
        jumps.retain(|j| j.source != j.target);
        jumps.sort_by_key(|j| (j.source, j.target));

        let visible_global =
            |n: &String| self.globals.contains(n) && !state.locals.contains(n);
        Ok(CodeUnit {
            name,
            kind,
            params,
            span: (first.line, last.line),
            header_end: is_tok.line,
            begin_line: begin.line,
            line_classes: Vec::new(),
            jumps,
            decisions: state.decisions,
            calls: Vec::new(),
            global_reads: BTreeSet::new(),
            global_writes: BTreeSet::new(),
            source: String::new(),
            statement_calls: state.statement_calls,
            applications: state.applications,
            arg_passes: state
                .arg_passes
                .into_iter()
                .filter(|a| visible_global(&a.name))
                .collect(),
            direct_reads: state.reads.iter().filter(|n| visible_global(n)).cloned().collect(),
            direct_writes: state.writes.iter().filter(|n| visible_global(n)).cloned().collect(),
        })
    }

    fn at_any_kw(&self, stops: &[&str]) -> bool {
        stops.iter().any(|k| self.is_kw(k))
    }

    fn statements(&mut self, stops: &[&str]) -> PResult<()> {
        while !self.at_any_kw(stops) {
            if matches!(self.peek(), Tok::Eof) {
                return self.error(format!("`{}`", stops[0]));
            }
            self.statement()?;
        }
        Ok(())
    }

    fn statement(&mut self) -> PResult<()> {
        let line = self.line();
        match self.peek().clone() {
            Tok::Ident(name) => self.name_statement(name),
            Tok::Kw("null") => {
                self.bump();
                self.expect_sym(";")?;
                Ok(())
            }
            Tok::Kw("if") => self.if_statement(),
            Tok::Kw("while") => {
                self.bump();
                self.unit.decisions.whiles += 1;
                self.expr()?;
                self.loop_body()
            }
            Tok::Kw("for") => {
                self.bump();
                self.unit.decisions.fors += 1;
                let var = self.ident()?;
                self.unit.locals.insert(var);
                self.expect_kw("in")?;
                self.eat_kw("reverse");
                self.simple_expr()?;
                if self.eat_sym("..") {
                    self.simple_expr()?;
                }
                self.loop_body()
            }
            Tok::Kw("loop") => self.loop_body(),
            Tok::Kw("case") => self.case_statement(),
            Tok::Kw("return") => {
                self.bump();
                if !self.is_sym(";") {
                    self.expr()?;
                }
                self.expect_sym(";")?;
                Ok(())
            }
            Tok::Kw("goto") => {
                self.bump();
                let label = self.ident()?;
                self.expect_sym(";")?;
                self.unit.gotos.push((label, line));
                Ok(())
            }
            Tok::Sym("<<") => {
                self.bump();
                let label = self.ident()?;
                self.expect_sym(">>")?;
                self.unit.labels.insert(label, line);
                Ok(())
            }
            Tok::Kw("exit") => {
                self.bump();
                if self.eat_kw("when") {
                    self.unit.decisions.exit_whens += 1;
                    self.expr()?;
                }
                self.expect_sym(";")?;
                match self.unit.loops.last_mut() {
                    Some(pending) => pending.push(line),
                    None => return Err(CodeError::UnresolvedExit { line }),
                }
                Ok(())
            }
            _ => self.error("statement"),
        }
    }

    fn name_statement(&mut self, name: String) -> PResult<()> {
        let line = self.line();
        self.bump();
        while self.is_sym(".") {
            self.bump();
            self.ident()?;
        }
        let args = if self.is_sym("(") {
            Some(self.call_args()?)
        } else {
            None
        };
        if self.eat_sym(":=") {
            // Index expressions of the target are reads.
            self.unit
                .reads
                .extend(args.into_iter().flatten().flatten());
            self.unit.writes.push(name);
            self.expr()?;
            self.expect_sym(";")?;
            return Ok(());
        }
        self.expect_sym(";")?;
        for (position, arg) in args.unwrap_or_default().into_iter().enumerate() {
            if let Some(arg) = arg {
                self.unit.arg_passes.push(ArgPass {
                    callee: name.clone(),
                    position,
                    name: arg,
                    statement: true,
                });
            }
        }
        self.unit.statement_calls.push(CallSite { callee: name, line });
        Ok(())
    }

    /// Parses `( args )`; yields, per position, the bare name passed there.
    /// Bare names are not recorded as reads here; the caller decides.
    fn call_args(&mut self) -> PResult<Vec<Option<String>>> {
        self.expect_sym("(")?;
        let mut out = Vec::new();
        if self.eat_sym(")") {
            return Ok(out);
        }
        loop {
            if matches!(self.peek(), Tok::Ident(_)) && matches!(self.peek_at(1), Tok::Sym("=>")) {
                self.bump();
                self.bump();
            }
            let bare = match (self.peek().clone(), self.peek_at(1)) {
                (Tok::Ident(n), Tok::Sym(",") | Tok::Sym(")")) => Some(n),
                _ => None,
            };
            if bare.is_some() {
                self.bump();
            } else {
                self.expr()?;
            }
            out.push(bare);
            if self.eat_sym(")") {
                return Ok(out);
            }
            self.expect_sym(",")?;
        }
    }

    fn if_statement(&mut self) -> PResult<()> {
        self.bump();
        self.unit.decisions.ifs += 1;
        self.expr()?;
        self.expect_kw("then")?;
        self.statements(&["elsif", "else", "end"])?;
        while self.eat_kw("elsif") {
            self.unit.decisions.elsifs += 1;
            self.expr()?;
            self.expect_kw("then")?;
            self.statements(&["elsif", "else", "end"])?;
        }
        if self.eat_kw("else") {
            self.statements(&["end"])?;
        }
        self.expect_kw("end")?;
        self.expect_kw("if")?;
        self.expect_sym(";")?;
        Ok(())
    }

    fn loop_body(&mut self) -> PResult<()> {
        self.expect_kw("loop")?;
        self.unit.loops.push(Vec::new());
        self.statements(&["end"])?;
        let end = self.expect_kw("end")?;
        self.expect_kw("loop")?;
        self.expect_sym(";")?;
        let pending = self.unit.loops.pop().unwrap_or_default();
        for source in pending {
            self.unit.jumps.push(Jump {
                kind: JumpKind::Exit,
                source,
                target: end.line,
            });
        }
        Ok(())
    }

    fn case_statement(&mut self) -> PResult<()> {
        self.bump();
        self.expr()?;
        self.expect_kw("is")?;
        let mut alternatives = 0;
        while self.eat_kw("when") {
            alternatives += 1;
            if !self.eat_kw("others") {
                loop {
                    self.simple_expr()?;
                    if self.eat_sym("..") {
                        self.simple_expr()?;
                    }
                    if !self.eat_sym("|") {
                        break;
                    }
                }
            }
            self.expect_sym("=>")?;
            self.statements(&["when", "end"])?;
        }
        self.expect_kw("end")?;
        self.expect_kw("case")?;
        self.expect_sym(";")?;
        self.unit.decisions.case_alternatives.push(alternatives);
        Ok(())
    }

    fn expr(&mut self) -> PResult<()> {
        self.relation()?;
        loop {
            if self.eat_kw("and") {
                if self.eat_kw("then") {
                    self.unit.decisions.and_thens += 1;
                }
            } else if self.eat_kw("or") {
                if self.eat_kw("else") {
                    self.unit.decisions.or_elses += 1;
                }
            } else if !self.eat_kw("xor") {
                return Ok(());
            }
            self.relation()?;
        }
    }

    fn relation(&mut self) -> PResult<()> {
        self.simple_expr()?;
        if ["=", "/=", "<", "<=", ">", ">="].iter().any(|s| self.is_sym(s)) {
            self.bump();
            self.simple_expr()?;
        } else if self.is_kw("in") || (self.is_kw("not") && self.peek_at(1) == &Tok::Kw("in")) {
            self.eat_kw("not");
            self.bump();
            self.simple_expr()?;
            if self.eat_sym("..") {
                self.simple_expr()?;
            }
        }
        Ok(())
    }

    fn simple_expr(&mut self) -> PResult<()> {
        if self.is_sym("+") || self.is_sym("-") {
            self.bump();
        }
        self.term()?;
        while self.is_sym("+") || self.is_sym("-") || self.is_sym("&") {
            self.bump();
            self.term()?;
        }
        Ok(())
    }

    fn term(&mut self) -> PResult<()> {
        self.factor()?;
        while self.is_sym("*") || self.is_sym("/") || self.is_kw("mod") || self.is_kw("rem") {
            self.bump();
            self.factor()?;
        }
        Ok(())
    }

    fn factor(&mut self) -> PResult<()> {
        if self.eat_kw("not") || self.eat_kw("abs") {
            return self.primary();
        }
        self.primary()?;
        if self.eat_sym("**") {
            self.primary()?;
        }
        Ok(())
    }

    fn primary(&mut self) -> PResult<()> {
        let line = self.line();
        match self.peek().clone() {
            Tok::Number(_) | Tok::Str(_) | Tok::Char(_) | Tok::Kw("null") => {
                self.bump();
                Ok(())
            }
            Tok::Sym("(") => {
                self.bump();
                self.expr()?;
                self.expect_sym(")")?;
                Ok(())
            }
            Tok::Ident(name) => {
                self.bump();
                while self.is_sym(".") {
                    self.bump();
                    self.ident()?;
                }
                if self.is_sym("(") {
                    let args = self.call_args()?;
                    for (position, arg) in args.into_iter().enumerate() {
                        if let Some(arg) = arg {
                            self.unit.reads.push(arg.clone());
                            self.unit.arg_passes.push(ArgPass {
                                callee: name.clone(),
                                position,
                                name: arg,
                                statement: false,
                            });
                        }
                    }
                    self.unit.applications.push(CallSite {
                        callee: name.clone(),
                        line,
                    });
                }
                if self.eat_sym("'") {
                    self.ident()?;
                }
                self.unit.reads.push(name);
                Ok(())
            }
            _ => self.error("expression"),
        }
    }
}
