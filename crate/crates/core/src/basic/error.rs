use std::fmt;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
#[error("line {line}, column {column}: {message}")]
pub struct LexError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

/// A program that failed to parse.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub struct ParseError {
    /// 1-based physical line in the source text.
    pub source_line: usize,
    /// BASIC line number, when one was read.
    pub line_number: Option<u32>,
    pub column: Option<usize>,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "?SYNTAX ERROR")?;
        if let Some(n) = self.line_number {
            write!(f, " IN {n}")?;
        }
        write!(f, " (source line {}", self.source_line)?;
        if let Some(c) = self.column {
            write!(f, ", column {c}")?;
        }
        write!(f, "): {}", self.message)
    }
}

impl From<LexError> for ParseError {
    fn from(e: LexError) -> Self {
        ParseError {
            source_line: e.line,
            line_number: None,
            column: Some(e.column),
            message: e.message,
        }
    }
}

/// Interpreter error classes, named after the messages the ROM prints.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RuntimeErrorKind {
    DivisionByZero,
    BadSubscript,
    IllegalQuantity,
    UndefinedStatement,
    NextWithoutFor,
    ReturnWithoutGosub,
    StackOverflow,
    RedimensionedArray,
    Overflow,
}

impl RuntimeErrorKind {
    pub fn message(self) -> &'static str {
        match self {
            RuntimeErrorKind::DivisionByZero => "DIVISION BY ZERO",
            RuntimeErrorKind::BadSubscript => "BAD SUBSCRIPT",
            RuntimeErrorKind::IllegalQuantity => "ILLEGAL QUANTITY",
            RuntimeErrorKind::UndefinedStatement => "UNDEF'D STATEMENT",
            RuntimeErrorKind::NextWithoutFor => "NEXT WITHOUT FOR",
            RuntimeErrorKind::ReturnWithoutGosub => "RETURN WITHOUT GOSUB",
            RuntimeErrorKind::StackOverflow => "STACK OVERFLOW",
            RuntimeErrorKind::RedimensionedArray => "REDIM'D ARRAY",
            RuntimeErrorKind::Overflow => "OVERFLOW",
        }
    }
}

impl fmt::Display for RuntimeErrorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.message())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error)]
#[error("?{kind} ERROR IN {line}")]
pub struct RuntimeError {
    pub kind: RuntimeErrorKind,
    /// Line number of the statement that failed.
    pub line: u32,
}
