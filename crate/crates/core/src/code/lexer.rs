use super::CodeError;

#[derive(Debug, Clone, PartialEq)]
pub(crate) enum Tok {
    Ident(String),
    /// Reserved word, lowercased.
    Kw(&'static str),
    Number(String),
    Str(String),
    Char(char),
    Sym(&'static str),
    Eof,
}

#[derive(Debug, Clone)]
pub(crate) struct Token {
    pub tok: Tok,
    pub line: usize,
}

#[derive(Debug, Clone, Default)]
pub(crate) struct Lexed {
    pub tokens: Vec<Token>,
    /// Lines that carry a `--` comment, with the comment text after `--`.
    pub comments: Vec<(usize, String)>,
    pub line_count: usize,
}

const KEYWORDS: &[&str] = &[
    "procedure", "function", "is", "begin", "end", "if", "then", "elsif", "else", "while", "loop",
    "for", "in", "out", "case", "when", "goto", "exit", "return", "null", "and", "or", "not",
    "xor", "mod", "rem", "abs", "others", "reverse", "constant",
];

const SYMBOLS: &[&str] = &[
    ":=", "..", "=>", "<<", ">>", "/=", "<=", ">=", "**", "(", ")", ";", ":", ",", "+", "-", "*",
    "/", "&", "<", ">", "=", ".", "|", "'",
];

pub(crate) fn tokenize(source: &str) -> Result<Lexed, CodeError> {
    let mut out = Lexed::default();
    for (idx, line) in source.lines().enumerate() {
        let line_no = idx + 1;
        out.line_count = line_no;
        let chars: Vec<char> = line.chars().collect();
        let mut i = 0;
        while i < chars.len() {
            let c = chars[i];
            if c.is_whitespace() {
                i += 1;
                continue;
            }
            if c == '-' && chars.get(i + 1) == Some(&'-') {
                out.comments
                    .push((line_no, chars[i + 2..].iter().collect::<String>()));
                break;
            }
            if c.is_alphabetic() {
                let start = i;
                while i < chars.len() && (chars[i].is_alphanumeric() || chars[i] == '_') {
                    i += 1;
                }
                let word: String = chars[start..i].iter().collect();
                let lower = word.to_ascii_lowercase();
                let tok = match KEYWORDS.iter().find(|k| **k == lower) {
                    Some(k) => Tok::Kw(k),
                    None => Tok::Ident(word),
                };
                out.tokens.push(Token { tok, line: line_no });
                continue;
            }
            if c.is_ascii_digit() {
                let start = i;
                while i < chars.len()
                    && (chars[i].is_ascii_alphanumeric()
                        || chars[i] == '_'
                        || chars[i] == '#'
                        || (chars[i] == '.' && chars.get(i + 1) != Some(&'.')))
                {
                    i += 1;
                }
                out.tokens.push(Token {
                    tok: Tok::Number(chars[start..i].iter().collect()),
                    line: line_no,
                });
                continue;
            }
            if c == '"' {
                let start = i + 1;
                i += 1;
                while i < chars.len() && chars[i] != '"' {
                    i += 1;
                }
                if i >= chars.len() {
                    return Err(CodeError::Syntax {
                        line: line_no,
                        expected: "closing `\"`".into(),
                    });
                }
                out.tokens.push(Token {
                    tok: Tok::Str(chars[start..i].iter().collect()),
                    line: line_no,
                });
                i += 1;
                continue;
            }
            if c == '\'' && chars.get(i + 2) == Some(&'\'') {
                out.tokens.push(Token {
                    tok: Tok::Char(chars[i + 1]),
                    line: line_no,
                });
                i += 3;
                continue;
            }
            let rest: String = chars[i..chars.len().min(i + 2)].iter().collect();
            match SYMBOLS.iter().find(|s| rest.starts_with(**s)) {
                Some(sym) => {
                    out.tokens.push(Token {
                        tok: Tok::Sym(sym),
                        line: line_no,
                    });
                    i += sym.len();
                }
                None => {
                    return Err(CodeError::Syntax {
                        line: line_no,
                        expected: format!("a token, found `{c}`"),
                    })
                }
            }
        }
    }
    out.tokens.push(Token {
        tok: Tok::Eof,
        line: out.line_count.max(1),
    });
    Ok(out)
}
