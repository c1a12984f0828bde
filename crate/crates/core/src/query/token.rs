//! Tokenizer. Keywords are case-insensitive, identifiers case-sensitive.

use std::fmt;

use super::QueryError;

#[derive(Debug, Clone, PartialEq)]
pub enum Tok {
    Ident(String),
    Param(String),
    Int(i64),
    Float(f64),
    Str(String),
    // Keywords (uppercased at lex time).
    Match,
    Optional,
    Where,
    With,
    Unwind,
    Return,
    As,
    Order,
    By,
    Limit,
    Distinct,
    In,
    Not,
    And,
    Asc,
    Desc,
    // Punctuation.
    LParen,
    RParen,
    LBracket,
    RBracket,
    Comma,
    Dot,
    Colon,
    Pipe,
    Semicolon,
    Eq,
    Plus,
    Dash,
    Lt,
    Gt,
    Eof,
}

impl fmt::Display for Tok {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Tok::Ident(s) => return write!(f, "identifier `{s}`"),
            Tok::Param(s) => return write!(f, "parameter ${s}"),
            Tok::Int(i) => return write!(f, "integer {i}"),
            Tok::Float(x) => return write!(f, "float {x}"),
            Tok::Str(s) => return write!(f, "string {s:?}"),
            Tok::Match => "MATCH",
            Tok::Optional => "OPTIONAL",
            Tok::Where => "WHERE",
            Tok::With => "WITH",
            Tok::Unwind => "UNWIND",
            Tok::Return => "RETURN",
            Tok::As => "AS",
            Tok::Order => "ORDER",
            Tok::By => "BY",
            Tok::Limit => "LIMIT",
            Tok::Distinct => "DISTINCT",
            Tok::In => "IN",
            Tok::Not => "NOT",
            Tok::And => "AND",
            Tok::Asc => "ASC",
            Tok::Desc => "DESC",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::Comma => ",",
            Tok::Dot => ".",
            Tok::Colon => ":",
            Tok::Pipe => "|",
            Tok::Semicolon => ";",
            Tok::Eq => "=",
            Tok::Plus => "+",
            Tok::Dash => "-",
            Tok::Lt => "<",
            Tok::Gt => ">",
            Tok::Eof => "end of input",
        };
        write!(f, "{s}")
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

#[derive(Debug, Clone)]
pub struct Spanned {
    pub tok: Tok,
    pub pos: Pos,
}

fn keyword(upper: &str) -> Option<Tok> {
    Some(match upper {
        "MATCH" => Tok::Match,
        "OPTIONAL" => Tok::Optional,
        "WHERE" => Tok::Where,
        "WITH" => Tok::With,
        "UNWIND" => Tok::Unwind,
        "RETURN" => Tok::Return,
        "AS" => Tok::As,
        "ORDER" => Tok::Order,
        "BY" => Tok::By,
        "LIMIT" => Tok::Limit,
        "DISTINCT" => Tok::Distinct,
        "IN" => Tok::In,
        "NOT" => Tok::Not,
        "AND" => Tok::And,
        "ASC" => Tok::Asc,
        "DESC" => Tok::Desc,
        _ => return None,
    })
}

pub fn tokenize(text: &str) -> Result<Vec<Spanned>, QueryError> {
    let mut out = Vec::new();
    let mut chars = text.chars().peekable();
    let mut line = 1u32;
    let mut col = 1u32;

    macro_rules! bump {
        () => {{
            let c = chars.next();
            if let Some(c) = c {
                if c == '\n' {
                    line += 1;
                    col = 1;
                } else {
                    col += 1;
                }
            }
            c
        }};
    }

    loop {
        let pos = Pos { line, col };
        let Some(&c) = chars.peek() else {
            out.push(Spanned { tok: Tok::Eof, pos });
            return Ok(out);
        };
        if c.is_whitespace() {
            bump!();
            continue;
        }
        let tok = match c {
            '(' => {
                bump!();
                Tok::LParen
            }
            ')' => {
                bump!();
                Tok::RParen
            }
            '[' => {
                bump!();
                Tok::LBracket
            }
            ']' => {
                bump!();
                Tok::RBracket
            }
            ',' => {
                bump!();
                Tok::Comma
            }
            '.' => {
                bump!();
                Tok::Dot
            }
            ':' => {
                bump!();
                Tok::Colon
            }
            '|' => {
                bump!();
                Tok::Pipe
            }
            ';' => {
                bump!();
                Tok::Semicolon
            }
            '=' => {
                bump!();
                Tok::Eq
            }
            '+' => {
                bump!();
                Tok::Plus
            }
            '-' => {
                bump!();
                Tok::Dash
            }
            '<' => {
                bump!();
                Tok::Lt
            }
            '>' => {
                bump!();
                Tok::Gt
            }
            '$' => {
                bump!();
                let name = take_ident(&mut chars, &mut line, &mut col);
                if name.is_empty() {
                    return Err(QueryError::syntax(pos, "parameter name", "$"));
                }
                Tok::Param(name)
            }
            '\'' | '"' => {
                let quote = c;
                bump!();
                let mut s = String::new();
                loop {
                    match bump!() {
                        None => return Err(QueryError::syntax(pos, "closing quote", "end of input")),
                        Some(ch) if ch == quote => break,
                        Some('\\') => match bump!() {
                            Some('n') => s.push('\n'),
                            Some('t') => s.push('\t'),
                            Some(e @ ('\\' | '\'' | '"')) => s.push(e),
                            other => {
                                return Err(QueryError::syntax(
                                    pos,
                                    "escape character",
                                    &other.map(String::from).unwrap_or_else(|| "end of input".into()),
                                ))
                            }
                        },
                        Some(ch) => s.push(ch),
                    }
                }
                Tok::Str(s)
            }
            d if d.is_ascii_digit() => {
                let mut s = String::new();
                while let Some(&ch) = chars.peek() {
                    if ch.is_ascii_digit() {
                        s.push(ch);
                        bump!();
                    } else {
                        break;
                    }
                }
                let mut is_float = false;
                if let Some('.') = chars.peek() {
                    // Lookahead: `1.x` only counts as a float when a digit
                    // follows the dot (ids never do arithmetic here).
                    let mut probe = chars.clone();
                    probe.next();
                    if probe.peek().is_some_and(|c| c.is_ascii_digit()) {
                        is_float = true;
                        s.push('.');
                        bump!();
                        while let Some(&ch) = chars.peek() {
                            if ch.is_ascii_digit() {
                                s.push(ch);
                                bump!();
                            } else {
                                break;
                            }
                        }
                    }
                }
                if is_float {
                    Tok::Float(s.parse().map_err(|_| QueryError::syntax(pos, "float", &s))?)
                } else {
                    Tok::Int(s.parse().map_err(|_| QueryError::syntax(pos, "integer", &s))?)
                }
            }
            a if a.is_alphabetic() || a == '_' => {
                let word = take_ident(&mut chars, &mut line, &mut col);
                keyword(&word.to_ascii_uppercase()).unwrap_or(Tok::Ident(word))
            }
            other => {
                return Err(QueryError::syntax(pos, "token", &other.to_string()));
            }
        };
        out.push(Spanned { tok, pos });
    }
}

fn take_ident(
    chars: &mut std::iter::Peekable<std::str::Chars<'_>>,
    line: &mut u32,
    col: &mut u32,
) -> String {
    let mut s = String::new();
    while let Some(&ch) = chars.peek() {
        if ch.is_alphanumeric() || ch == '_' {
            s.push(ch);
            chars.next();
            if ch == '\n' {
                *line += 1;
                *col = 1;
            } else {
                *col += 1;
            }
        } else {
            break;
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lexes_pattern_arrows_and_keywords() {
        let toks = tokenize("MATCH (n:PAPER)-[:CITES]->(m) return distinct m;").unwrap();
        let kinds: Vec<&Tok> = toks.iter().map(|s| &s.tok).collect();
        assert!(matches!(kinds[0], Tok::Match));
        assert!(kinds.iter().any(|t| matches!(t, Tok::Dash)));
        assert!(kinds.iter().any(|t| matches!(t, Tok::Return)));
        assert!(kinds.iter().any(|t| matches!(t, Tok::Distinct)));
        assert!(matches!(kinds.last().unwrap(), Tok::Eof));
    }

    #[test]
    fn positions_track_lines() {
        let toks = tokenize("MATCH (n)\nRETURN n").unwrap();
        let ret = toks.iter().find(|s| s.tok == Tok::Return).unwrap();
        assert_eq!(ret.pos.line, 2);
        assert_eq!(ret.pos.col, 1);
    }

    #[test]
    fn params_and_floats() {
        let toks = tokenize("LIMIT $MAX_NEIGHBOURS WHERE 0.5").unwrap();
        assert!(toks.iter().any(|s| s.tok == Tok::Param("MAX_NEIGHBOURS".into())));
        assert!(toks.iter().any(|s| s.tok == Tok::Float(0.5)));
    }
}
