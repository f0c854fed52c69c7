//! Tokenizer for HDDL text.
//!
//! Keywords and identifiers are case-insensitive and folded to lower case.
//! `;` starts a comment running to the end of the line.

use std::sync::Arc;

use crate::diag::Diagnostic;
use crate::span::Span;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    LParen,
    RParen,
    /// Standalone `-` separating names from their type.
    Dash,
    /// `<` in ordering constraints.
    Lt,
    /// `=` in equality formulas and constraints.
    Eq,
    /// `:`-prefixed keyword, stored without the colon.
    Keyword(String),
    /// `?`-prefixed variable, stored without the question mark.
    Var(String),
    /// Plain name.
    Ident(String),
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::LParen => "`(`".to_string(),
            TokenKind::RParen => "`)`".to_string(),
            TokenKind::Dash => "`-`".to_string(),
            TokenKind::Lt => "`<`".to_string(),
            TokenKind::Eq => "`=`".to_string(),
            TokenKind::Keyword(k) => format!("`:{k}`"),
            TokenKind::Var(v) => format!("`?{v}`"),
            TokenKind::Ident(s) => format!("`{s}`"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub span: Span,
}

struct Lexer<'a> {
    file: Arc<str>,
    chars: std::iter::Peekable<std::str::Chars<'a>>,
    line: u32,
    col: u32,
}

impl<'a> Lexer<'a> {
    fn bump(&mut self) -> Option<char> {
        let c = self.chars.next()?;
        if c == '\n' {
            self.line += 1;
            self.col = 1;
        } else {
            self.col += 1;
        }
        Some(c)
    }

    fn here(&self) -> (u32, u32) {
        (self.line, self.col)
    }

    fn span(&self, start: (u32, u32), end: (u32, u32)) -> Span {
        Span::new(self.file.clone(), start.0, start.1, end.0, end.1)
    }
}

fn is_name_start(c: char) -> bool {
    c.is_ascii_alphabetic()
}

fn is_name_char(c: char) -> bool {
    c.is_ascii_alphanumeric() || c == '-' || c == '_'
}

/// Tokenize `text`, reporting `file` in every span.
pub fn tokenize(file: &str, text: &str) -> Result<Vec<Token>, Diagnostic> {
    let mut lx = Lexer { file: Arc::from(file), chars: text.chars().peekable(), line: 1, col: 1 };
    let mut tokens = Vec::new();
    loop {
        // Skip whitespace and comments.
        loop {
            match lx.chars.peek() {
                Some(c) if c.is_whitespace() => {
                    lx.bump();
                }
                Some(';') => {
                    while let Some(&c) = lx.chars.peek() {
                        if c == '\n' {
                            break;
                        }
                        lx.bump();
                    }
                }
                _ => break,
            }
        }
        let start = lx.here();
        let c = match lx.bump() {
            Some(c) => c,
            None => break,
        };
        let single = |kind: TokenKind, lx: &Lexer| Token { kind, span: lx.span(start, start) };
        match c {
            '(' => tokens.push(single(TokenKind::LParen, &lx)),
            ')' => tokens.push(single(TokenKind::RParen, &lx)),
            '<' => tokens.push(single(TokenKind::Lt, &lx)),
            '=' => tokens.push(single(TokenKind::Eq, &lx)),
            '-' => {
                // A `-` immediately followed by a name character would be a
                // malformed identifier; names cannot start with `-`.
                tokens.push(single(TokenKind::Dash, &lx));
            }
            ':' | '?' => {
                let mut name = String::new();
                let mut end = start;
                match lx.chars.peek() {
                    Some(&n) if is_name_start(n) => {}
                    _ => {
                        return Err(Diagnostic::error(
                            "lex-error",
                            lx.span(start, start),
                            format!("`{c}` must be followed by a name"),
                        ));
                    }
                }
                while let Some(&n) = lx.chars.peek() {
                    if is_name_char(n) {
                        end = lx.here();
                        lx.bump();
                        name.push(n.to_ascii_lowercase());
                    } else {
                        break;
                    }
                }
                let kind = if c == ':' { TokenKind::Keyword(name) } else { TokenKind::Var(name) };
                tokens.push(Token { kind, span: lx.span(start, end) });
            }
            c if is_name_start(c) => {
                let mut name = String::new();
                name.push(c.to_ascii_lowercase());
                let mut end = start;
                while let Some(&n) = lx.chars.peek() {
                    if is_name_char(n) {
                        end = lx.here();
                        lx.bump();
                        name.push(n.to_ascii_lowercase());
                    } else {
                        break;
                    }
                }
                tokens.push(Token { kind: TokenKind::Ident(name), span: lx.span(start, end) });
            }
            other => {
                return Err(Diagnostic::error(
                    "lex-error",
                    lx.span(start, start),
                    format!("illegal character `{other}`"),
                ));
            }
        }
    }
    Ok(tokens)
}
