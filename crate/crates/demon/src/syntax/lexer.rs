//! Hand-rolled lexer shared by the program, assertion, and proof-script
//! parsers. Tokens carry line/column positions for diagnostics.

use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Pos {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Pos {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TokenKind {
    Ident(String),
    Int(String),
    // Punctuation and operators.
    Assign,    // :=
    Semi,      // ;
    Comma,     // ,
    LParen,    // (
    RParen,    // )
    LBrace,    // {
    RBrace,    // }
    LBracket,  // [
    RBracket,  // ]
    LList,     // <<
    RList,     // >>
    Amp,       // &
    AndAnd,    // &&
    OrOr,      // ||
    Bang,      // !
    Plus,      // +
    Minus,     // -
    Star,      // *
    Slash,     // /
    Eq,        // =
    Ne,        // !=
    Lt,        // <
    Le,        // <=
    Gt,        // >
    Ge,        // >=
    Arrow,     // ->
    LeftArrow, // <-
    PlusLBracket, // +[   (probabilistic choice opener)
    OPlusOpen,    // (+   (assertion/probability opener)
    DotDot,    // ..
    Colon,     // :
    SlashBackslash, // /\
    Eof,
}

impl TokenKind {
    pub fn describe(&self) -> String {
        match self {
            TokenKind::Ident(s) => format!("identifier `{s}`"),
            TokenKind::Int(s) => format!("integer `{s}`"),
            TokenKind::Assign => "`:=`".into(),
            TokenKind::Semi => "`;`".into(),
            TokenKind::Comma => "`,`".into(),
            TokenKind::LParen => "`(`".into(),
            TokenKind::RParen => "`)`".into(),
            TokenKind::LBrace => "`{`".into(),
            TokenKind::RBrace => "`}`".into(),
            TokenKind::LBracket => "`[`".into(),
            TokenKind::RBracket => "`]`".into(),
            TokenKind::LList => "`<<`".into(),
            TokenKind::RList => "`>>`".into(),
            TokenKind::Amp => "`&`".into(),
            TokenKind::AndAnd => "`&&`".into(),
            TokenKind::OrOr => "`||`".into(),
            TokenKind::Bang => "`!`".into(),
            TokenKind::Plus => "`+`".into(),
            TokenKind::Minus => "`-`".into(),
            TokenKind::Star => "`*`".into(),
            TokenKind::Slash => "`/`".into(),
            TokenKind::Eq => "`=`".into(),
            TokenKind::Ne => "`!=`".into(),
            TokenKind::Lt => "`<`".into(),
            TokenKind::Le => "`<=`".into(),
            TokenKind::Gt => "`>`".into(),
            TokenKind::Ge => "`>=`".into(),
            TokenKind::Arrow => "`->`".into(),
            TokenKind::LeftArrow => "`<-`".into(),
            TokenKind::PlusLBracket => "`+[`".into(),
            TokenKind::OPlusOpen => "`(+`".into(),
            TokenKind::DotDot => "`..`".into(),
            TokenKind::Colon => "`:`".into(),
            TokenKind::SlashBackslash => "`/\\`".into(),
            TokenKind::Eof => "end of input".into(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Token {
    pub kind: TokenKind,
    pub pos: Pos,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LexError {
    #[error("unexpected character `{ch}` at {pos}")]
    UnexpectedChar { ch: char, pos: Pos },
}

pub fn tokenize(src: &str) -> Result<Vec<Token>, LexError> {
    let mut out = Vec::new();
    let mut chars = src.chars().peekable();
    let mut line: u32 = 1;
    let mut col: u32 = 1;

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
            out.push(Token {
                kind: TokenKind::Eof,
                pos,
            });
            return Ok(out);
        };
        match c {
            ' ' | '\t' | '\r' | '\n' => {
                bump!();
            }
            '#' => {
                // Line comment.
                while let Some(&c) = chars.peek() {
                    if c == '\n' {
                        break;
                    }
                    bump!();
                }
            }
            '0'..='9' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_digit() {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                out.push(Token {
                    kind: TokenKind::Int(s),
                    pos,
                });
            }
            'a'..='z' | 'A'..='Z' | '_' => {
                let mut s = String::new();
                while let Some(&c) = chars.peek() {
                    if c.is_ascii_alphanumeric() || c == '_' {
                        s.push(c);
                        bump!();
                    } else {
                        break;
                    }
                }
                out.push(Token {
                    kind: TokenKind::Ident(s),
                    pos,
                });
            }
            _ => {
                bump!();
                let kind = match c {
                    ';' => TokenKind::Semi,
                    ',' => TokenKind::Comma,
                    ')' => TokenKind::RParen,
                    '{' => TokenKind::LBrace,
                    '}' => TokenKind::RBrace,
                    '[' => TokenKind::LBracket,
                    ']' => TokenKind::RBracket,
                    '*' => TokenKind::Star,
                    '(' => {
                        if chars.peek() == Some(&'+') {
                            bump!();
                            TokenKind::OPlusOpen
                        } else {
                            TokenKind::LParen
                        }
                    }
                    '+' => {
                        if chars.peek() == Some(&'[') {
                            bump!();
                            TokenKind::PlusLBracket
                        } else {
                            TokenKind::Plus
                        }
                    }
                    '-' => {
                        if chars.peek() == Some(&'>') {
                            bump!();
                            TokenKind::Arrow
                        } else {
                            TokenKind::Minus
                        }
                    }
                    '/' => {
                        if chars.peek() == Some(&'\\') {
                            bump!();
                            TokenKind::SlashBackslash
                        } else {
                            TokenKind::Slash
                        }
                    }
                    ':' => {
                        if chars.peek() == Some(&'=') {
                            bump!();
                            TokenKind::Assign
                        } else {
                            TokenKind::Colon
                        }
                    }
                    '=' => TokenKind::Eq,
                    '!' => {
                        if chars.peek() == Some(&'=') {
                            bump!();
                            TokenKind::Ne
                        } else {
                            TokenKind::Bang
                        }
                    }
                    '<' => match chars.peek() {
                        Some(&'=') => {
                            bump!();
                            TokenKind::Le
                        }
                        Some(&'-') => {
                            bump!();
                            TokenKind::LeftArrow
                        }
                        Some(&'<') => {
                            bump!();
                            TokenKind::LList
                        }
                        _ => TokenKind::Lt,
                    },
                    '>' => match chars.peek() {
                        Some(&'=') => {
                            bump!();
                            TokenKind::Ge
                        }
                        Some(&'>') => {
                            bump!();
                            TokenKind::RList
                        }
                        _ => TokenKind::Gt,
                    },
                    '&' => {
                        if chars.peek() == Some(&'&') {
                            bump!();
                            TokenKind::AndAnd
                        } else {
                            TokenKind::Amp
                        }
                    }
                    '|' => {
                        if chars.peek() == Some(&'|') {
                            bump!();
                            TokenKind::OrOr
                        } else {
                            return Err(LexError::UnexpectedChar { ch: c, pos });
                        }
                    }
                    '.' => {
                        if chars.peek() == Some(&'.') {
                            bump!();
                            TokenKind::DotDot
                        } else {
                            return Err(LexError::UnexpectedChar { ch: c, pos });
                        }
                    }
                    other => return Err(LexError::UnexpectedChar { ch: other, pos }),
                };
                out.push(Token { kind, pos });
            }
        }
    }
}
