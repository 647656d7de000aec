use super::{Decoration, Position, SpecError};

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String, Decoration),
    Number(String),
    Str(String),
    /// Reserved word, lowercase.
    Word(&'static str),
    Sym(&'static str),
    /// Character outside the expression alphabet; legal only in type text.
    Other(char),
    Newline,
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub pos: Position,
    /// Byte offset within the line, used to slice opaque type text.
    pub offset: usize,
}

const WORDS: &[&str] = &[
    "given", "schema", "delta", "xi", "includes", "decl", "pred", "end", "and", "or", "implies",
    "not", "in", "notin", "subseteq", "div", "mod", "union", "inter", "true", "false",
];

const SYMBOLS: &[&str] = &[
    "/=", "<=", ">=", "=", "<", ">", "(", ")", "{", "}", "[", "]", ",", ":", "+", "-", "*", "/",
    "#",
];

/// Strips a `--` comment, ignoring dashes inside string literals.
pub(crate) fn strip_comment(line: &str) -> &str {
    let bytes = line.as_bytes();
    let mut in_str = false;
    let mut i = 0;
    while i < bytes.len() {
        match bytes[i] {
            b'"' => in_str = !in_str,
            b'-' if !in_str && bytes.get(i + 1) == Some(&b'-') => return &line[..i],
            _ => {}
        }
        i += 1;
    }
    line
}

pub(crate) fn tokenize(source: &str) -> Result<Vec<Token>, SpecError> {
    let mut out = Vec::new();
    for (idx, raw) in source.lines().enumerate() {
        let line_no = idx + 1;
        let line = strip_comment(raw);
        let chars: Vec<(usize, char)> = line.char_indices().collect();
        let mut i = 0;
        while i < chars.len() {
            let (off, c) = chars[i];
            let pos = Position {
                line: line_no,
                column: i + 1,
            };
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c.is_alphabetic() || c == '_' {
                let start = i;
                while i < chars.len() && (chars[i].1.is_alphanumeric() || chars[i].1 == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                let decoration = match chars.get(i).map(|&(_, c)| c) {
                    Some('\'') => Some(Decoration::Primed),
                    Some('?') => Some(Decoration::Input),
                    Some('!') => Some(Decoration::Output),
                    _ => None,
                };
                let tok = match WORDS.iter().find(|w| **w == word) {
                    Some(w) if decoration.is_none() => Tok::Word(w),
                    Some(_) => {
                        return Err(SpecError::Syntax {
                            line: line_no,
                            expected: format!("identifier (`{word}` is reserved)"),
                        })
                    }
                    None => {
                        if decoration.is_some() {
                            i += 1;
                        }
                        Tok::Ident(word, decoration.unwrap_or(Decoration::Plain))
                    }
                };
                out.push(Token {
                    tok,
                    pos,
                    offset: off,
                });
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len() && (chars[i].1.is_ascii_digit() || chars[i].1 == '.') {
                    // `1..n` is not a decimal
                    if chars[i].1 == '.' && chars.get(i + 1).map(|x| x.1) == Some('.') {
                        break;
                    }
                    i += 1;
                }
                let text: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                out.push(Token {
                    tok: Tok::Number(text),
                    pos,
                    offset: off,
                });
                continue;
            }
            if c == '"' {
                let start = i + 1;
                i += 1;
                while i < chars.len() && chars[i].1 != '"' {
                    i += 1;
                }
                if i >= chars.len() {
                    return Err(SpecError::Syntax {
                        line: line_no,
                        expected: "closing `\"`".into(),
                    });
                }
                let text: String = chars[start..i].iter().map(|&(_, c)| c).collect();
                i += 1;
                out.push(Token {
                    tok: Tok::Str(text),
                    pos,
                    offset: off,
                });
                continue;
            }
            let rest = &line[off..];
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(sym) => {
                    i += sym.chars().count();
                    out.push(Token {
                        tok: Tok::Sym(sym),
                        pos,
                        offset: off,
                    });
                }
                None => {
                    i += 1;
                    out.push(Token {
                        tok: Tok::Other(c),
                        pos,
                        offset: off,
                    });
                }
            }
        }
        out.push(Token {
            tok: Tok::Newline,
            pos: Position {
                line: line_no,
                column: chars.len() + 1,
            },
            offset: line.len(),
        });
    }
    let last = out.last().map(|t| t.pos.line).unwrap_or(1);
    out.push(Token {
        tok: Tok::Eof,
        pos: Position {
            line: last,
            column: 1,
        },
        offset: 0,
    });
    Ok(out)
}
