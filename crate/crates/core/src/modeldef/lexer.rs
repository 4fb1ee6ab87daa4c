//! Tokenizer for the model language and its LaTeX expression subset.

use std::fmt;

use crate::error::{JetError, Result};

#[derive(Clone, Copy, PartialEq, Eq, Debug, Default)]
pub struct Pos {
    pub line: usize,
    pub col: usize,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Clone, PartialEq, Eq, Debug)]
pub enum Tok {
    Ident(String),
    Int(i64),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Underscore,
    LParen,
    RParen,
    LBracket,
    RBracket,
    LBrace,
    RBrace,
    Comma,
    Semi,
    Colon,
    Eq,
    DotDot,
    /// `\frac`
    Frac,
    Newline,
    Eof,
}

impl Tok {
    /// How the token is named in diagnostics.
    pub fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Int(i) => format!("integer `{i}`"),
            Tok::Newline => "end of line".into(),
            Tok::Eof => "end of input".into(),
            Tok::Frac => "`\\frac`".into(),
            t => format!("`{}`", t.symbol()),
        }
    }

    fn symbol(&self) -> &'static str {
        match self {
            Tok::Plus => "+",
            Tok::Minus => "-",
            Tok::Star => "*",
            Tok::Slash => "/",
            Tok::Caret => "^",
            Tok::Underscore => "_",
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBracket => "[",
            Tok::RBracket => "]",
            Tok::LBrace => "{",
            Tok::RBrace => "}",
            Tok::Comma => ",",
            Tok::Semi => ";",
            Tok::Colon => ":",
            Tok::Eq => "=",
            Tok::DotDot => "..",
            _ => "",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Token {
    pub tok: Tok,
    pub pos: Pos,
}

fn syntax(pos: Pos, found: impl Into<String>, expected: &[&str]) -> JetError {
    JetError::Syntax {
        line: pos.line,
        col: pos.col,
        found: found.into(),
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
}

struct Lexer {
    chars: Vec<char>,
    i: usize,
    pos: Pos,
}

impl Lexer {
    fn peek(&self, k: usize) -> Option<char> {
        self.chars.get(self.i + k).copied()
    }

    fn bump(&mut self) -> Option<char> {
        let c = self.chars.get(self.i).copied()?;
        self.i += 1;
        if c == '\n' {
            self.pos.line += 1;
            self.pos.col = 1;
        } else {
            self.pos.col += 1;
        }
        Some(c)
    }

    fn eat_str(&mut self, s: &str) -> bool {
        let n = s.chars().count();
        if self.chars[self.i..].iter().take(n).copied().eq(s.chars()) {
            for _ in 0..n {
                self.bump();
            }
            true
        } else {
            false
        }
    }

    fn word(&mut self) -> String {
        let mut s = String::new();
        while let Some(c) = self.peek(0) {
            let joins = c == '_' && self.peek(1).is_some_and(|d| d.is_ascii_alphanumeric());
            if c.is_ascii_alphanumeric() || joins {
                s.push(c);
                self.bump();
            } else {
                break;
            }
        }
        s
    }

    /// `\name`, `\mathrm{name}`, `\sqrt{|g|}`, `\frac`, `\cdot`, `\,`.
    fn command(&mut self, start: Pos) -> Result<Option<Tok>> {
        self.bump();
        if self.eat_str(",") || self.eat_str("cdot") {
            return Ok(Some(Tok::Star));
        }
        if self.eat_str("sqrt{|g|}") {
            return Ok(Some(Tok::Ident("sqrtg".into())));
        }
        if self.eat_str("mathrm{") {
            let w = self.word();
            if w.is_empty() || !self.eat_str("}") {
                return Err(syntax(start, "malformed `\\mathrm`", &["\\mathrm{name}"]));
            }
            return Ok(Some(Tok::Ident(w)));
        }
        let w = self.word();
        match w.as_str() {
            "" => Err(syntax(start, "`\\`", &["LaTeX command"])),
            "frac" => Ok(Some(Tok::Frac)),
            "left" | "right" => Ok(None),
            _ => Ok(Some(Tok::Ident(w))),
        }
    }
}

/// Splits `src` into tokens. `#` starts a comment running to the end of the line.
/// Line breaks inside parentheses and brackets are dropped.
pub fn tokenize(src: &str) -> Result<Vec<Token>> {
    let mut lx = Lexer {
        chars: src.chars().collect(),
        i: 0,
        pos: Pos { line: 1, col: 1 },
    };
    let mut out = Vec::new();
    let mut depth = 0usize;
    while let Some(c) = lx.peek(0) {
        let pos = lx.pos;
        let tok = match c {
            ' ' | '\t' | '\r' => {
                lx.bump();
                continue;
            }
            '#' => {
                while lx.peek(0).is_some_and(|c| c != '\n') {
                    lx.bump();
                }
                continue;
            }
            '\n' => {
                lx.bump();
                if depth > 0 {
                    continue;
                }
                Tok::Newline
            }
            '\\' => match lx.command(pos)? {
                Some(t) => t,
                None => continue,
            },
            '0'..='9' => {
                let mut v: i64 = 0;
                while let Some(d) = lx.peek(0).and_then(|c| c.to_digit(10)) {
                    v = v
                        .checked_mul(10)
                        .and_then(|v| v.checked_add(d as i64))
                        .ok_or_else(|| syntax(pos, "integer literal", &["smaller integer"]))?;
                    lx.bump();
                }
                Tok::Int(v)
            }
            c if c.is_ascii_alphabetic() => Tok::Ident(lx.word()),
            '.' if lx.peek(1) == Some('.') => {
                lx.bump();
                lx.bump();
                Tok::DotDot
            }
            _ => {
                let t = match c {
                    '+' => Tok::Plus,
                    '-' => Tok::Minus,
                    '*' => Tok::Star,
                    '/' => Tok::Slash,
                    '^' => Tok::Caret,
                    '_' => Tok::Underscore,
                    '(' => Tok::LParen,
                    ')' => Tok::RParen,
                    '[' => Tok::LBracket,
                    ']' => Tok::RBracket,
                    '{' => Tok::LBrace,
                    '}' => Tok::RBrace,
                    ',' => Tok::Comma,
                    ';' => Tok::Semi,
                    ':' => Tok::Colon,
                    '=' => Tok::Eq,
                    other => return Err(syntax(pos, format!("character `{other}`"), &["token"])),
                };
                lx.bump();
                t
            }
        };
        match tok {
            Tok::LParen | Tok::LBracket => depth += 1,
            Tok::RParen | Tok::RBracket => depth = depth.saturating_sub(1),
            _ => {}
        }
        out.push(Token { tok, pos });
    }
    out.push(Token {
        tok: Tok::Eof,
        pos: lx.pos,
    });
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toks(s: &str) -> Vec<Tok> {
        tokenize(s).unwrap().into_iter().map(|t| t.tok).collect()
    }

    #[test]
    fn identifiers_keep_inner_underscores() {
        assert_eq!(
            toks("L_H g_{0}"),
            vec![
                Tok::Ident("L_H".into()),
                Tok::Ident("g".into()),
                Tok::Underscore,
                Tok::LBrace,
                Tok::Int(0),
                Tok::RBrace,
                Tok::Eof
            ]
        );
    }

    #[test]
    fn latex_commands() {
        assert_eq!(
            toks(r"\frac{1}{2} \, \sqrt{|g|} \cdot \kappa \mathrm{ginv}"),
            vec![
                Tok::Frac,
                Tok::LBrace,
                Tok::Int(1),
                Tok::RBrace,
                Tok::LBrace,
                Tok::Int(2),
                Tok::RBrace,
                Tok::Star,
                Tok::Ident("sqrtg".into()),
                Tok::Star,
                Tok::Ident("kappa".into()),
                Tok::Ident("ginv".into()),
                Tok::Eof
            ]
        );
    }

    #[test]
    fn positions_and_comments() {
        let t = tokenize("dim 4 # four\n  field").unwrap();
        assert_eq!(t[2].tok, Tok::Newline);
        assert_eq!(t[3].pos, Pos { line: 2, col: 3 });
    }

    #[test]
    fn stray_character_is_reported() {
        let e = tokenize("a $ b").unwrap_err();
        assert!(matches!(
            e,
            JetError::Syntax {
                line: 1,
                col: 3,
                ..
            }
        ));
    }
}
