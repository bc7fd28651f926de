//! Parsed program representation and its canonical listing.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

pub const MAX_LINE_NUMBER: u32 = 63999;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
    Not,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinaryOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
    Eq,
    Ne,
    Lt,
    Gt,
    Le,
    Ge,
    And,
    Or,
}

impl BinaryOp {
    fn symbol(self) -> &'static str {
        match self {
            BinaryOp::Add => "+",
            BinaryOp::Sub => "-",
            BinaryOp::Mul => "*",
            BinaryOp::Div => "/",
            BinaryOp::Pow => "^",
            BinaryOp::Eq => "=",
            BinaryOp::Ne => "<>",
            BinaryOp::Lt => "<",
            BinaryOp::Gt => ">",
            BinaryOp::Le => "<=",
            BinaryOp::Ge => ">=",
            BinaryOp::And => " AND ",
            BinaryOp::Or => " OR ",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Function {
    Int,
    Rnd,
    Abs,
    Peek,
}

impl Function {
    fn name(self) -> &'static str {
        match self {
            Function::Int => "INT",
            Function::Rnd => "RND",
            Function::Abs => "ABS",
            Function::Peek => "PEEK",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Number(f64),
    Var(String),
    Index(String, Box<Expr>),
    Call(Function, Box<Expr>),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinaryOp, Box<Expr>, Box<Expr>),
    /// Explicit parentheses, kept so listings reproduce the source grouping.
    Paren(Box<Expr>),
}

#[derive(Debug, Clone, PartialEq)]
pub enum LValue {
    Var(String),
    Index(String, Expr),
}

#[derive(Debug, Clone, PartialEq)]
pub enum IfTarget {
    /// `IF c THEN 100`
    Line(u32),
    /// `IF c THEN stmt...`: the rest of the line runs only when `c` holds.
    Inline,
}

#[derive(Debug, Clone, PartialEq)]
pub enum PrintItem {
    Expr(Expr),
    Text(String),
    Semicolon,
    Comma,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Statement {
    Let { target: LValue, value: Expr, keyword: bool },
    Poke { address: Expr, value: Expr },
    For { var: String, start: Expr, limit: Expr, step: Option<Expr> },
    Next { vars: Vec<String> },
    If { condition: Expr, target: IfTarget },
    Goto(u32),
    Gosub(u32),
    Return,
    Print(Vec<PrintItem>),
    Dim(Vec<(String, Expr)>),
    Rem(String),
    End,
}

/// A parsed program: line number to statement list.
#[derive(Debug, Clone, Default)]
pub struct Program {
    pub lines: BTreeMap<u32, Vec<Statement>>,
    pub source_text: String,
}

impl PartialEq for Program {
    fn eq(&self, other: &Self) -> bool {
        self.lines == other.lines
    }
}

impl Program {
    pub fn is_empty(&self) -> bool {
        self.lines.is_empty()
    }

    pub fn first_line(&self) -> Option<u32> {
        self.lines.keys().next().copied()
    }

    pub fn statement_count(&self) -> usize {
        self.lines.values().map(Vec::len).sum()
    }

    /// Canonical listing: ascending line order, upper-case keywords and names.
    pub fn list(&self) -> String {
        let mut out = String::new();
        for (n, stmts) in &self.lines {
            let _ = write!(out, "{n} ");
            for (i, s) in stmts.iter().enumerate() {
                if i > 0 {
                    let after_inline_if =
                        matches!(stmts[i - 1], Statement::If { target: IfTarget::Inline, .. });
                    out.push_str(if after_inline_if { " " } else { ":" });
                }
                let _ = write!(out, "{s}");
            }
            out.push('\n');
        }
        out
    }
}

/// Formats a literal so that it lexes back to the same value.
pub fn format_number(v: f64) -> String {
    let a = v.abs();
    if a != 0.0 && !(1e-6..1e16).contains(&a) {
        format!("{v:E}")
    } else {
        format!("{v}")
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Expr::Number(v) => f.write_str(&format_number(*v)),
            Expr::Var(name) => f.write_str(name),
            Expr::Index(name, i) => write!(f, "{name}({i})"),
            Expr::Call(func, arg) => write!(f, "{}({arg})", func.name()),
            Expr::Unary(UnaryOp::Neg, e) => write!(f, "-{e}"),
            Expr::Unary(UnaryOp::Not, e) => write!(f, "NOT {e}"),
            Expr::Binary(op, l, r) => write!(f, "{l}{}{r}", op.symbol()),
            Expr::Paren(e) => write!(f, "({e})"),
        }
    }
}

impl fmt::Display for LValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            LValue::Var(n) => f.write_str(n),
            LValue::Index(n, i) => write!(f, "{n}({i})"),
        }
    }
}

impl fmt::Display for Statement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Statement::Let { target, value, keyword } => {
                if *keyword {
                    f.write_str("LET ")?;
                }
                write!(f, "{target}={value}")
            }
            Statement::Poke { address, value } => write!(f, "POKE {address},{value}"),
            Statement::For { var, start, limit, step } => {
                write!(f, "FOR {var}={start} TO {limit}")?;
                if let Some(s) = step {
                    write!(f, " STEP {s}")?;
                }
                Ok(())
            }
            Statement::Next { vars } => {
                f.write_str("NEXT")?;
                if !vars.is_empty() {
                    write!(f, " {}", vars.join(","))?;
                }
                Ok(())
            }
            Statement::If { condition, target } => match target {
                IfTarget::Line(n) => write!(f, "IF {condition} THEN {n}"),
                IfTarget::Inline => write!(f, "IF {condition} THEN"),
            },
            Statement::Goto(n) => write!(f, "GOTO {n}"),
            Statement::Gosub(n) => write!(f, "GOSUB {n}"),
            Statement::Return => f.write_str("RETURN"),
            Statement::Print(items) => {
                f.write_str("PRINT")?;
                if !items.is_empty() {
                    f.write_str(" ")?;
                }
                for item in items {
                    match item {
                        PrintItem::Expr(e) => write!(f, "{e}")?,
                        PrintItem::Text(t) => write!(f, "\"{t}\"")?,
                        PrintItem::Semicolon => f.write_str(";")?,
                        PrintItem::Comma => f.write_str(",")?,
                    }
                }
                Ok(())
            }
            Statement::Dim(decls) => {
                f.write_str("DIM ")?;
                for (i, (name, size)) in decls.iter().enumerate() {
                    if i > 0 {
                        f.write_str(",")?;
                    }
                    write!(f, "{name}({size})")?;
                }
                Ok(())
            }
            Statement::Rem(text) => write!(f, "REM{text}"),
            Statement::End => f.write_str("END"),
        }
    }
}
