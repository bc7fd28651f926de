//! Line tokenizer.
//!
//! Keywords are matched case-insensitively wherever they start, the way the
//! original ROM crunches a line: `FORI=1TO9` reads as `FOR I = 1 TO 9`, and an
//! identifier ends as soon as a keyword begins inside it.

use std::fmt;

use super::error::LexError;

pub const MAX_LINE_LEN: usize = 255;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Keyword {
    Poke,
    Peek,
    For,
    To,
    Step,
    Next,
    If,
    Then,
    Goto,
    Gosub,
    Return,
    Let,
    Print,
    Rem,
    End,
    Dim,
    Int,
    Rnd,
    Abs,
    And,
    Or,
    Not,
}

impl Keyword {
    pub const ALL: [Keyword; 22] = [
        Keyword::Poke,
        Keyword::Peek,
        Keyword::For,
        Keyword::To,
        Keyword::Step,
        Keyword::Next,
        Keyword::If,
        Keyword::Then,
        Keyword::Goto,
        Keyword::Gosub,
        Keyword::Return,
        Keyword::Let,
        Keyword::Print,
        Keyword::Rem,
        Keyword::End,
        Keyword::Dim,
        Keyword::Int,
        Keyword::Rnd,
        Keyword::Abs,
        Keyword::And,
        Keyword::Or,
        Keyword::Not,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Keyword::Poke => "POKE",
            Keyword::Peek => "PEEK",
            Keyword::For => "FOR",
            Keyword::To => "TO",
            Keyword::Step => "STEP",
            Keyword::Next => "NEXT",
            Keyword::If => "IF",
            Keyword::Then => "THEN",
            Keyword::Goto => "GOTO",
            Keyword::Gosub => "GOSUB",
            Keyword::Return => "RETURN",
            Keyword::Let => "LET",
            Keyword::Print => "PRINT",
            Keyword::Rem => "REM",
            Keyword::End => "END",
            Keyword::Dim => "DIM",
            Keyword::Int => "INT",
            Keyword::Rnd => "RND",
            Keyword::Abs => "ABS",
            Keyword::And => "AND",
            Keyword::Or => "OR",
            Keyword::Not => "NOT",
        }
    }
}

impl fmt::Display for Keyword {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Operator {
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    Eq,
    Lt,
    Gt,
    Le,
    Ge,
    Ne,
}

impl Operator {
    pub fn as_str(self) -> &'static str {
        match self {
            Operator::Plus => "+",
            Operator::Minus => "-",
            Operator::Star => "*",
            Operator::Slash => "/",
            Operator::Caret => "^",
            Operator::Eq => "=",
            Operator::Lt => "<",
            Operator::Gt => ">",
            Operator::Le => "<=",
            Operator::Ge => ">=",
            Operator::Ne => "<>",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum TokenKind {
    Number(f64),
    Identifier(String),
    Keyword(Keyword),
    Operator(Operator),
    Str(String),
    /// Everything after `REM` up to the end of the line.
    Remark(String),
    Colon,
    Comma,
    Semicolon,
    LParen,
    RParen,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Token {
    pub kind: TokenKind,
    pub text: String,
    /// 1-based source line.
    pub line: usize,
    /// 1-based column of the first character.
    pub column: usize,
}

fn keyword_at(chars: &[char], pos: usize) -> Option<Keyword> {
    let mut best: Option<Keyword> = None;
    for kw in Keyword::ALL {
        let word = kw.as_str();
        if pos + word.len() > chars.len() {
            continue;
        }
        let matches = word
            .chars()
            .zip(&chars[pos..])
            .all(|(k, c)| c.to_ascii_uppercase() == k);
        if matches && !best.is_some_and(|b| b.as_str().len() >= word.len()) {
            best = Some(kw);
        }
    }
    best
}

/// Tokenizes one physical line. `line` is only used for positions.
pub fn tokenize(text: &str, line: usize) -> Result<Vec<Token>, LexError> {
    if text.chars().count() > MAX_LINE_LEN {
        return Err(LexError { line, column: MAX_LINE_LEN + 1, message: "line too long".into() });
    }
    let chars: Vec<char> = text.chars().collect();
    let mut tokens = Vec::new();
    let mut pos = 0;
    while pos < chars.len() {
        let c = chars[pos];
        let column = pos + 1;
        let start = pos;
        let push = |tokens: &mut Vec<Token>, kind: TokenKind, end: usize| {
            tokens.push(Token {
                kind,
                text: chars[start..end].iter().collect(),
                line,
                column,
            });
        };
        if c == ' ' || c == '\t' || c == '\r' {
            pos += 1;
            continue;
        }
        if let Some(kw) = keyword_at(&chars, pos) {
            pos += kw.as_str().len();
            push(&mut tokens, TokenKind::Keyword(kw), pos);
            if kw == Keyword::Rem {
                let rest: String = chars[pos..].iter().collect();
                tokens.push(Token {
                    kind: TokenKind::Remark(rest.clone()),
                    text: rest,
                    line,
                    column: pos + 1,
                });
                break;
            }
            continue;
        }
        if c.is_ascii_alphabetic() {
            pos += 1;
            while pos < chars.len()
                && chars[pos].is_ascii_alphanumeric()
                && keyword_at(&chars, pos).is_none()
            {
                pos += 1;
            }
            let name: String = chars[start..pos].iter().collect::<String>().to_ascii_uppercase();
            push(&mut tokens, TokenKind::Identifier(name), pos);
            continue;
        }
        if c.is_ascii_digit() || (c == '.' && chars.get(pos + 1).is_some_and(|d| d.is_ascii_digit())) {
            while pos < chars.len() && chars[pos].is_ascii_digit() {
                pos += 1;
            }
            if pos < chars.len() && chars[pos] == '.' {
                pos += 1;
                while pos < chars.len() && chars[pos].is_ascii_digit() {
                    pos += 1;
                }
            }
            if pos < chars.len() && (chars[pos] == 'E' || chars[pos] == 'e') {
                let mut p = pos + 1;
                if p < chars.len() && (chars[p] == '+' || chars[p] == '-') {
                    p += 1;
                }
                if p < chars.len() && chars[p].is_ascii_digit() {
                    while p < chars.len() && chars[p].is_ascii_digit() {
                        p += 1;
                    }
                    pos = p;
                }
            }
            let literal: String = chars[start..pos].iter().collect();
            let value: f64 = literal.parse().map_err(|_| LexError {
                line,
                column,
                message: format!("malformed number '{literal}'"),
            })?;
            if !value.is_finite() {
                return Err(LexError { line, column, message: "number overflow".into() });
            }
            push(&mut tokens, TokenKind::Number(value), pos);
            continue;
        }
        let (kind, len) = match c {
            '"' => {
                let close = chars[pos + 1..].iter().position(|&ch| ch == '"');
                let end = close.map_or(chars.len(), |i| pos + 1 + i);
                let body: String = chars[pos + 1..end].iter().collect();
                let len = end - pos + usize::from(close.is_some());
                (TokenKind::Str(body), len)
            }
            ':' => (TokenKind::Colon, 1),
            ',' => (TokenKind::Comma, 1),
            ';' => (TokenKind::Semicolon, 1),
            '(' => (TokenKind::LParen, 1),
            ')' => (TokenKind::RParen, 1),
            '+' => (TokenKind::Operator(Operator::Plus), 1),
            '-' => (TokenKind::Operator(Operator::Minus), 1),
            '*' => (TokenKind::Operator(Operator::Star), 1),
            '/' => (TokenKind::Operator(Operator::Slash), 1),
            '^' => (TokenKind::Operator(Operator::Caret), 1),
            '=' => (TokenKind::Operator(Operator::Eq), 1),
            '<' => match chars.get(pos + 1) {
                Some('=') => (TokenKind::Operator(Operator::Le), 2),
                Some('>') => (TokenKind::Operator(Operator::Ne), 2),
                _ => (TokenKind::Operator(Operator::Lt), 1),
            },
            '>' => match chars.get(pos + 1) {
                Some('=') => (TokenKind::Operator(Operator::Ge), 2),
                _ => (TokenKind::Operator(Operator::Gt), 1),
            },
            other => {
                return Err(LexError {
                    line,
                    column,
                    message: format!("illegal character '{}'", other.escape_default()),
                })
            }
        };
        pos += len;
        push(&mut tokens, kind, pos);
    }
    Ok(tokens)
}
