//! A BASIC 2.0 subset: tokenizer, parser, canonical lister and an
//! interpreter that drives a [`MemoryBus`] on a simulated clock.

mod ast;
mod bus;
mod error;
mod parser;
mod token;
mod vm;

pub use ast::{
    format_number, BinaryOp, Expr, Function, IfTarget, LValue, PrintItem, Program, Statement,
    UnaryOp, MAX_LINE_NUMBER,
};
pub use bus::{C64Bus, MemoryBus};
pub use error::{LexError, ParseError, RuntimeError, RuntimeErrorKind};
pub use parser::parse_program;
pub use token::{tokenize, Keyword, Operator, Token, TokenKind, MAX_LINE_LEN};
pub use vm::{
    format_print_number, run, ForFrame, HaltReason, Pc, RunLimits, RunReport, Vm, VmConfig,
    VmState, DEFAULT_STATEMENT_COST_US, MAX_STACK_DEPTH,
};

/// Canonical listing of a program.
pub fn list_program(program: &Program) -> String {
    program.list()
}
