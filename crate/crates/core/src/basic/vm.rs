//! Statement interpreter with a simulated clock.
//!
//! Every executed statement costs the same configurable number of simulated
//! microseconds, so `sim_clock_us == statements_executed * statement_cost_us`
//! at all times.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand_core::{RngCore, SeedableRng};
use rand_xoshiro::SplitMix64;

use super::ast::*;
use super::bus::MemoryBus;
use super::error::{RuntimeError, RuntimeErrorKind};

pub const DEFAULT_STATEMENT_COST_US: u64 = 1000;
pub const MAX_STACK_DEPTH: usize = 64;
/// Size of an array used before any `DIM`: indices 0..=10.
const AUTO_DIM: usize = 10;
const MAX_DIM: f64 = 32767.0;
const PRINT_ZONE: usize = 10;

type Kind = RuntimeErrorKind;

/// Two significant characters of a variable name.
type VarKey = [u8; 2];

fn var_key(name: &str) -> VarKey {
    let b = name.as_bytes();
    [b.first().copied().unwrap_or(0), b.get(1).copied().unwrap_or(0)]
}

/// Position of a statement: line number and index within the line.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub struct Pc {
    pub line: u32,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ForFrame {
    var: VarKey,
    pub limit: f64,
    pub step: f64,
    /// First statement of the loop body.
    pub resume: Pc,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum HaltReason {
    /// The program has no lines.
    Empty,
    /// An `END` statement ran.
    End,
    /// Execution fell off the last line.
    EndOfProgram,
    StatementLimit,
    TimeLimit,
    Error(RuntimeError),
}

impl fmt::Display for HaltReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            HaltReason::Empty => f.write_str("empty"),
            HaltReason::End => f.write_str("end"),
            HaltReason::EndOfProgram => f.write_str("end-of-program"),
            HaltReason::StatementLimit => f.write_str("statement-limit"),
            HaltReason::TimeLimit => f.write_str("time-limit"),
            HaltReason::Error(_) => f.write_str("error"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VmConfig {
    pub statement_cost_us: u64,
    pub seed: u64,
}

impl Default for VmConfig {
    fn default() -> Self {
        Self { statement_cost_us: DEFAULT_STATEMENT_COST_US, seed: 0 }
    }
}

#[derive(Debug, Clone)]
pub struct VmState {
    variables: BTreeMap<VarKey, f64>,
    arrays: BTreeMap<VarKey, Vec<f64>>,
    pub for_stack: Vec<ForFrame>,
    pub gosub_stack: Vec<Pc>,
    /// Next statement to run; `None` once execution ran past the last line.
    pub pc: Option<Pc>,
    pub sim_clock_us: u64,
    pub statements_executed: u64,
    rng: SplitMix64,
    last_rnd: Option<f64>,
    pub halted: Option<HaltReason>,
    /// Text written by `PRINT`.
    pub output: String,
    column: usize,
}

impl VmState {
    /// Value of a scalar variable (0 when never assigned).
    pub fn variable(&self, name: &str) -> f64 {
        self.variables.get(&var_key(&name.to_ascii_uppercase())).copied().unwrap_or(0.0)
    }

    pub fn array(&self, name: &str) -> Option<&[f64]> {
        self.arrays.get(&var_key(&name.to_ascii_uppercase())).map(Vec::as_slice)
    }
}

enum Flow {
    Continue,
    Jump(Pc),
    NextLine,
    /// Resume at a position that may sit past the end of its line.
    Resume(Pc),
    Halt,
    Off,
}

/// Interpreter bound to one program.
#[derive(Debug, Clone)]
pub struct Vm {
    program: Arc<Program>,
    config: VmConfig,
    state: VmState,
}

impl Vm {
    pub fn new(program: Program, config: VmConfig) -> Self {
        Self::with_shared(Arc::new(program), config)
    }

    pub fn with_shared(program: Arc<Program>, config: VmConfig) -> Self {
        let pc = program.first_line().map(|line| Pc { line, index: 0 });
        let halted = if pc.is_none() { Some(HaltReason::Empty) } else { None };
        let state = VmState {
            variables: BTreeMap::new(),
            arrays: BTreeMap::new(),
            for_stack: Vec::new(),
            gosub_stack: Vec::new(),
            pc,
            sim_clock_us: 0,
            statements_executed: 0,
            rng: SplitMix64::seed_from_u64(config.seed),
            last_rnd: None,
            halted,
            output: String::new(),
            column: 0,
        };
        Self { program, config, state }
    }

    pub fn state(&self) -> &VmState {
        &self.state
    }

    pub fn config(&self) -> &VmConfig {
        &self.config
    }

    pub fn program(&self) -> &Program {
        &self.program
    }

    pub fn is_halted(&self) -> bool {
        self.state.halted.is_some()
    }

    pub fn halt(&mut self, reason: HaltReason) {
        self.state.halted = Some(reason);
    }

    /// First valid position at or after `pc`.
    fn normalize(&self, pc: Pc) -> Option<Pc> {
        if let Some(stmts) = self.program.lines.get(&pc.line) {
            if pc.index < stmts.len() {
                return Some(pc);
            }
        }
        self.next_line(pc.line)
    }

    fn next_line(&self, line: u32) -> Option<Pc> {
        self.program
            .lines
            .range(line.saturating_add(1)..)
            .next()
            .map(|(&line, _)| Pc { line, index: 0 })
    }

    fn line_start(&self, line: u32) -> Result<Pc, Kind> {
        if self.program.lines.contains_key(&line) {
            Ok(Pc { line, index: 0 })
        } else {
            Err(Kind::UndefinedStatement)
        }
    }

    /// Executes the statement at the program counter and returns the simulated
    /// time it took. Returns 0 without doing anything once halted.
    pub fn step<B: MemoryBus + ?Sized>(&mut self, bus: &mut B) -> Result<u64, RuntimeError> {
        if self.state.halted.is_some() {
            return Ok(0);
        }
        let Some(pc) = self.state.pc else {
            self.state.halted = Some(HaltReason::EndOfProgram);
            return Ok(0);
        };
        let program = Arc::clone(&self.program);
        let stmt = &program.lines[&pc.line][pc.index];
        let flow = match self.exec(stmt, pc, bus) {
            Ok(flow) => flow,
            Err(kind) => {
                let err = RuntimeError { kind, line: pc.line };
                self.state.halted = Some(HaltReason::Error(err));
                return Err(err);
            }
        };
        let cost = self.config.statement_cost_us;
        self.state.sim_clock_us += cost;
        self.state.statements_executed += 1;
        self.state.pc = match flow {
            Flow::Continue => self.normalize(Pc { line: pc.line, index: pc.index + 1 }),
            Flow::Jump(target) => Some(target),
            Flow::Resume(target) => self.normalize(target),
            Flow::NextLine => self.next_line(pc.line),
            Flow::Halt => {
                self.state.halted = Some(HaltReason::End);
                None
            }
            Flow::Off => None,
        };
        if self.state.pc.is_none() && self.state.halted.is_none() {
            self.state.halted = Some(HaltReason::EndOfProgram);
        }
        Ok(cost)
    }

    fn exec<B: MemoryBus + ?Sized>(&mut self, stmt: &Statement, pc: Pc, bus: &mut B) -> Result<Flow, Kind> {
        match stmt {
            Statement::Let { target, value, .. } => {
                let v = self.eval(value, bus)?;
                match target {
                    LValue::Var(name) => {
                        self.state.variables.insert(var_key(name), v);
                    }
                    LValue::Index(name, idx) => {
                        let i = self.eval(idx, bus)?;
                        *self.element(name, i)? = v;
                    }
                }
                Ok(Flow::Continue)
            }
            Statement::Poke { address, value } => {
                let a = to_address(self.eval(address, bus)?)?;
                let v = self.eval(value, bus)?;
                if !(0.0..256.0).contains(&v) {
                    return Err(Kind::IllegalQuantity);
                }
                bus.poke(a, v as u8);
                Ok(Flow::Continue)
            }
            Statement::For { var, start, limit, step } => {
                let start = self.eval(start, bus)?;
                let limit = self.eval(limit, bus)?;
                let step = match step {
                    Some(s) => self.eval(s, bus)?,
                    None => 1.0,
                };
                let key = var_key(var);
                self.state.variables.insert(key, start);
                if let Some(pos) = self.state.for_stack.iter().rposition(|f| f.var == key) {
                    self.state.for_stack.truncate(pos);
                }
                let resume = Pc { line: pc.line, index: pc.index + 1 };
                if loop_finished(start, limit, step) {
                    return Ok(match self.matching_next(resume) {
                        Some(after) => Flow::Resume(after),
                        None => Flow::Off,
                    });
                }
                if self.state.for_stack.len() >= MAX_STACK_DEPTH {
                    return Err(Kind::StackOverflow);
                }
                self.state.for_stack.push(ForFrame { var: key, limit, step, resume });
                Ok(Flow::Continue)
            }
            Statement::Next { vars } => self.exec_next(vars),
            Statement::If { condition, target } => {
                if self.eval(condition, bus)? == 0.0 {
                    return Ok(Flow::NextLine);
                }
                match target {
                    IfTarget::Line(n) => Ok(Flow::Jump(self.line_start(*n)?)),
                    IfTarget::Inline => Ok(Flow::Continue),
                }
            }
            Statement::Goto(n) => Ok(Flow::Jump(self.line_start(*n)?)),
            Statement::Gosub(n) => {
                let target = self.line_start(*n)?;
                if self.state.gosub_stack.len() >= MAX_STACK_DEPTH {
                    return Err(Kind::StackOverflow);
                }
                self.state.gosub_stack.push(Pc { line: pc.line, index: pc.index + 1 });
                Ok(Flow::Jump(target))
            }
            Statement::Return => {
                let resume = self.state.gosub_stack.pop().ok_or(Kind::ReturnWithoutGosub)?;
                Ok(Flow::Resume(resume))
            }
            Statement::Print(items) => {
                self.exec_print(items, bus)?;
                Ok(Flow::Continue)
            }
            Statement::Dim(decls) => {
                for (name, size) in decls {
                    let n = self.eval(size, bus)?.floor();
                    if !(0.0..=MAX_DIM).contains(&n) {
                        return Err(Kind::IllegalQuantity);
                    }
                    let key = var_key(name);
                    if self.state.arrays.contains_key(&key) {
                        return Err(Kind::RedimensionedArray);
                    }
                    self.state.arrays.insert(key, vec![0.0; n as usize + 1]);
                }
                Ok(Flow::Continue)
            }
            Statement::Rem(_) => Ok(Flow::NextLine),
            Statement::End => Ok(Flow::Halt),
        }
    }

    fn exec_next(&mut self, vars: &[String]) -> Result<Flow, Kind> {
        let names: Vec<Option<VarKey>> = if vars.is_empty() {
            vec![None]
        } else {
            vars.iter().map(|v| Some(var_key(v))).collect()
        };
        for name in names {
            let pos = match name {
                None => self.state.for_stack.len().checked_sub(1),
                Some(key) => self.state.for_stack.iter().rposition(|f| f.var == key),
            }
            .ok_or(Kind::NextWithoutFor)?;
            self.state.for_stack.truncate(pos + 1);
            let frame = &self.state.for_stack[pos];
            let (key, limit, step, resume) = (frame.var, frame.limit, frame.step, frame.resume);
            let value = self.state.variables.get(&key).copied().unwrap_or(0.0) + step;
            if !value.is_finite() {
                return Err(Kind::Overflow);
            }
            self.state.variables.insert(key, value);
            if !loop_finished(value, limit, step) {
                return Ok(Flow::Resume(resume));
            }
            self.state.for_stack.pop();
        }
        Ok(Flow::Continue)
    }

    /// Position just past the `NEXT` closing a loop whose body starts at
    /// `body`, found by scanning forward and counting nested `FOR`s.
    fn matching_next(&self, body: Pc) -> Option<Pc> {
        let mut depth = 0usize;
        for (&line, stmts) in self.program.lines.range(body.line..) {
            let from = if line == body.line { body.index } else { 0 };
            for (index, stmt) in stmts.iter().enumerate().skip(from) {
                match stmt {
                    Statement::For { .. } => depth += 1,
                    Statement::Next { vars } => {
                        let closes = vars.len().max(1);
                        if closes > depth {
                            return Some(Pc { line, index: index + 1 });
                        }
                        depth -= closes;
                    }
                    _ => {}
                }
            }
        }
        None
    }

    fn exec_print<B: MemoryBus + ?Sized>(&mut self, items: &[PrintItem], bus: &mut B) -> Result<(), Kind> {
        for item in items {
            match item {
                PrintItem::Expr(e) => {
                    let v = self.eval(e, bus)?;
                    self.write(&format_print_number(v));
                }
                PrintItem::Text(t) => self.write(t),
                PrintItem::Semicolon => {}
                PrintItem::Comma => {
                    let pad = PRINT_ZONE - self.state.column % PRINT_ZONE;
                    self.write(&" ".repeat(pad));
                }
            }
        }
        if !matches!(items.last(), Some(PrintItem::Semicolon | PrintItem::Comma)) {
            self.state.output.push('\n');
            self.state.column = 0;
        }
        Ok(())
    }

    fn write(&mut self, s: &str) {
        self.state.output.push_str(s);
        self.state.column += s.chars().count();
    }

    fn element(&mut self, name: &str, index: f64) -> Result<&mut f64, Kind> {
        let arr = self
            .state
            .arrays
            .entry(var_key(name))
            .or_insert_with(|| vec![0.0; AUTO_DIM + 1]);
        let i = index.floor();
        if !(0.0..arr.len() as f64).contains(&i) {
            return Err(Kind::BadSubscript);
        }
        Ok(&mut arr[i as usize])
    }

    fn rnd(&mut self, arg: f64) -> f64 {
        if arg == 0.0 {
            if let Some(v) = self.state.last_rnd {
                return v;
            }
        } else if arg < 0.0 {
            self.state.rng = SplitMix64::seed_from_u64(arg.to_bits());
        }
        let v = (self.state.rng.next_u64() >> 11) as f64 / (1u64 << 53) as f64;
        self.state.last_rnd = Some(v);
        v
    }

    /// Evaluates an expression against the current state.
    pub fn eval<B: MemoryBus + ?Sized>(&mut self, expr: &Expr, bus: &mut B) -> Result<f64, Kind> {
        let v = match expr {
            Expr::Number(v) => *v,
            Expr::Var(name) => self.state.variables.get(&var_key(name)).copied().unwrap_or(0.0),
            Expr::Index(name, idx) => {
                let i = self.eval(idx, bus)?;
                *self.element(name, i)?
            }
            Expr::Paren(e) => self.eval(e, bus)?,
            Expr::Call(func, arg) => {
                let a = self.eval(arg, bus)?;
                match func {
                    Function::Int => a.floor(),
                    Function::Abs => a.abs(),
                    Function::Rnd => self.rnd(a),
                    Function::Peek => f64::from(bus.peek(to_address(a)?)),
                }
            }
            Expr::Unary(UnaryOp::Neg, e) => -self.eval(e, bus)?,
            Expr::Unary(UnaryOp::Not, e) => f64::from(!to_int16(self.eval(e, bus)?)?),
            Expr::Binary(op, l, r) => {
                let a = self.eval(l, bus)?;
                let b = self.eval(r, bus)?;
                match op {
                    BinaryOp::Add => a + b,
                    BinaryOp::Sub => a - b,
                    BinaryOp::Mul => a * b,
                    BinaryOp::Div => {
                        if b == 0.0 {
                            return Err(Kind::DivisionByZero);
                        }
                        a / b
                    }
                    BinaryOp::Pow => a.powf(b),
                    BinaryOp::Eq => truth(a == b),
                    BinaryOp::Ne => truth(a != b),
                    BinaryOp::Lt => truth(a < b),
                    BinaryOp::Gt => truth(a > b),
                    BinaryOp::Le => truth(a <= b),
                    BinaryOp::Ge => truth(a >= b),
                    BinaryOp::And => f64::from(to_int16(a)? & to_int16(b)?),
                    BinaryOp::Or => f64::from(to_int16(a)? | to_int16(b)?),
                }
            }
        };
        if v.is_nan() {
            Err(Kind::IllegalQuantity)
        } else if v.is_infinite() {
            Err(Kind::Overflow)
        } else {
            Ok(v)
        }
    }
}

fn truth(b: bool) -> f64 {
    if b {
        -1.0
    } else {
        0.0
    }
}

fn loop_finished(value: f64, limit: f64, step: f64) -> bool {
    if step >= 0.0 {
        value > limit
    } else {
        value < limit
    }
}

fn to_address(v: f64) -> Result<u16, Kind> {
    if (0.0..65536.0).contains(&v) {
        Ok(v as u16)
    } else {
        Err(Kind::IllegalQuantity)
    }
}

fn to_int16(v: f64) -> Result<i16, Kind> {
    let f = v.floor();
    if (-32768.0..=32767.0).contains(&f) {
        Ok(f as i16)
    } else {
        Err(Kind::IllegalQuantity)
    }
}

/// Numbers print with a leading sign column and a trailing space.
pub fn format_print_number(v: f64) -> String {
    let sign = if v < 0.0 { "-" } else { " " };
    let a = v.abs();
    let body = if a.fract() == 0.0 && a < 1e9 {
        format!("{a}")
    } else {
        // nine significant digits
        let r: f64 = format!("{a:.8e}").parse().unwrap_or(a);
        if (0.01..1e9).contains(&r) {
            format!("{r}")
        } else {
            format!("{r:E}")
        }
    };
    format!("{sign}{body} ")
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct RunLimits {
    pub max_sim_time_us: Option<u64>,
    pub max_statements: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RunReport {
    pub halt_reason: HaltReason,
    pub statements_executed: u64,
    pub final_sim_time_us: u64,
    pub output: String,
}

/// Runs a program from its lowest line until it ends, fails or hits a limit.
pub fn run<B: MemoryBus + ?Sized>(
    program: &Program,
    bus: &mut B,
    limits: RunLimits,
    config: VmConfig,
) -> Result<RunReport, RuntimeError> {
    let mut vm = Vm::new(program.clone(), config);
    vm.run(bus, limits)
}

impl Vm {
    /// Steps until halted or a limit is reached.
    pub fn run<B: MemoryBus + ?Sized>(&mut self, bus: &mut B, limits: RunLimits) -> Result<RunReport, RuntimeError> {
        while self.state.halted.is_none() {
            if limits.max_statements.is_some_and(|m| self.state.statements_executed >= m) {
                self.state.halted = Some(HaltReason::StatementLimit);
                break;
            }
            if limits.max_sim_time_us.is_some_and(|m| self.state.sim_clock_us >= m) {
                self.state.halted = Some(HaltReason::TimeLimit);
                break;
            }
            self.step(bus)?;
        }
        Ok(RunReport {
            halt_reason: self.state.halted.expect("loop exits only when halted"),
            statements_executed: self.state.statements_executed,
            final_sim_time_us: self.state.sim_clock_us,
            output: self.state.output.clone(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::basic::parse_program;

    #[derive(Debug, Default)]
    struct Ram {
        mem: Vec<u8>,
        writes: Vec<(u16, u8)>,
    }

    impl MemoryBus for Ram {
        fn poke(&mut self, address: u16, value: u8) {
            if self.mem.is_empty() {
                self.mem = vec![0; 65536];
            }
            self.mem[usize::from(address)] = value;
            self.writes.push((address, value));
        }
        fn peek(&self, address: u16) -> u8 {
            self.mem.get(usize::from(address)).copied().unwrap_or(0)
        }
    }

    fn run_src(src: &str) -> Result<(RunReport, Ram), RuntimeError> {
        let p = parse_program(src).unwrap();
        let mut ram = Ram::default();
        let limits = RunLimits { max_statements: Some(100_000), ..Default::default() };
        run(&p, &mut ram, limits, VmConfig::default()).map(|r| (r, ram))
    }

    fn eval_src(expr: &str) -> Result<f64, Kind> {
        let p = parse_program(&format!("10 A={expr}")).unwrap();
        let Statement::Let { value, .. } = &p.lines[&10][0] else { unreachable!() };
        let mut vm = Vm::new(p.clone(), VmConfig { seed: 12345, ..Default::default() });
        vm.eval(value, &mut Ram::default())
    }

    #[test]
    fn arithmetic_and_truth_values() {
        assert_eq!(eval_src("2+3*4"), Ok(14.0));
        assert_eq!(eval_src("(5>2) AND (1>3)"), Ok(0.0));
        assert_eq!(eval_src("(5>2)"), Ok(-1.0));
        assert_eq!(eval_src("NOT 0"), Ok(-1.0));
        assert_eq!(eval_src("INT(-2.5)"), Ok(-3.0));
        assert_eq!(eval_src("ABS(-4)"), Ok(4.0));
        assert_eq!(eval_src("2^3^2"), Ok(64.0));
        assert_eq!(eval_src("-2^2"), Ok(4.0));
        assert_eq!(eval_src("12 OR 3"), Ok(15.0));
    }

    #[test]
    fn arithmetic_errors() {
        assert_eq!(eval_src("1/0"), Err(Kind::DivisionByZero));
        assert_eq!(eval_src("(-8)^0.5"), Err(Kind::IllegalQuantity));
        assert_eq!(eval_src("10^400"), Err(Kind::Overflow));
        assert_eq!(eval_src("40000 AND 1"), Err(Kind::IllegalQuantity));
    }

    #[test]
    fn rnd_is_seeded() {
        let a = eval_src("INT(RND(1)*16)").unwrap();
        let b = eval_src("INT(RND(1)*16)").unwrap();
        assert_eq!(a, b);
        assert!((0.0..16.0).contains(&a));
    }

    #[test]
    fn rnd_zero_repeats_and_negative_reseeds() {
        let (r, _) = run_src("10 A=RND(1):B=RND(0):C=RND(-3):D=RND(-3)\n20 PRINT A=B;C=D").unwrap();
        assert_eq!(r.output, "-1 -1 \n");
    }

    #[test]
    fn poke_reaches_bus_and_costs_one_statement() {
        let (r, ram) = run_src("10 POKE 54296,15").unwrap();
        assert_eq!(ram.writes, vec![(54296, 15)]);
        assert_eq!(r.final_sim_time_us, DEFAULT_STATEMENT_COST_US);
    }

    #[test]
    fn for_loop_counts() {
        let (r, _) = run_src("10 C=0\n20 FOR I=1 TO 3\n30 C=C+1\n40 NEXT\n50 PRINT C").unwrap();
        assert_eq!(r.output, " 3 \n");
    }

    #[test]
    fn zero_trip_loop_skips_body() {
        let (r, _) = run_src("10 FOR I=5 TO 1\n20 PRINT \"X\"\n30 NEXT I\n40 PRINT I").unwrap();
        assert_eq!(r.output, " 5 \n");
    }

    #[test]
    fn poke_out_of_range() {
        let e = run_src("10 POKE 70000,1").unwrap_err();
        assert_eq!(e, RuntimeError { kind: Kind::IllegalQuantity, line: 10 });
        let e = run_src("10 POKE 1,256").unwrap_err();
        assert_eq!(e.kind, Kind::IllegalQuantity);
    }

    #[test]
    fn flow_errors() {
        assert_eq!(run_src("10 GOTO 999").unwrap_err().kind, Kind::UndefinedStatement);
        assert_eq!(run_src("10 NEXT").unwrap_err().kind, Kind::NextWithoutFor);
        assert_eq!(run_src("10 RETURN").unwrap_err().kind, Kind::ReturnWithoutGosub);
        assert_eq!(run_src("10 GOSUB 10").unwrap_err().kind, Kind::StackOverflow);
        assert_eq!(run_src("10 DIM A(3)\n20 A(4)=1").unwrap_err().kind, Kind::BadSubscript);
        assert_eq!(run_src("10 DIM A(3)\n20 DIM A(3)").unwrap_err().kind, Kind::RedimensionedArray);
    }

    #[test]
    fn empty_program() {
        let (r, _) = run_src("").unwrap();
        assert_eq!(r.halt_reason, HaltReason::Empty);
        assert_eq!(r.statements_executed, 0);
    }

    #[test]
    fn statement_limit() {
        let (r, _) = run_src("10 GOTO 10").unwrap();
        assert_eq!(r.halt_reason, HaltReason::StatementLimit);
        let p = parse_program("10 GOTO 10").unwrap();
        let limits = RunLimits { max_statements: Some(1000), max_sim_time_us: None };
        let r = run(&p, &mut Ram::default(), limits, VmConfig::default()).unwrap();
        assert_eq!(r.statements_executed, 1000);
        let limits = RunLimits { max_statements: None, max_sim_time_us: Some(5500) };
        let r = run(&p, &mut Ram::default(), limits, VmConfig::default()).unwrap();
        assert_eq!((r.halt_reason, r.statements_executed), (HaltReason::TimeLimit, 6));
    }

    #[test]
    fn gosub_return_and_end() {
        let (r, _) = run_src("10 GOSUB 100:PRINT \"B\"\n20 END\n100 PRINT \"A\";\n110 RETURN").unwrap();
        assert_eq!(r.output, "AB\n");
        assert_eq!(r.halt_reason, HaltReason::End);
    }

    #[test]
    fn inline_if_skips_rest_of_line() {
        let (r, _) = run_src("10 X=1:IF X>5 THEN PRINT \"NO\":PRINT \"NO\"\n20 PRINT \"YES\"").unwrap();
        assert_eq!(r.output, "YES\n");
    }

    #[test]
    fn long_names_share_two_significant_characters() {
        let (r, _) = run_src("10 FREQ=7\n20 PRINT FR").unwrap();
        assert_eq!(r.output, " 7 \n");
    }

    #[test]
    fn print_zones_and_number_format() {
        let (r, _) = run_src("10 PRINT 1,-2;\n20 PRINT 0.5").unwrap();
        assert_eq!(r.output, " 1        -2  0.5 \n");
        assert_eq!(format_print_number(1.0 / 3.0), " 0.333333333 ");
        assert_eq!(format_print_number(1e12), " 1E12 ");
    }

    #[test]
    fn next_with_variable_list() {
        let (r, _) = run_src("10 FOR I=1 TO 2:FOR J=1 TO 3\n20 C=C+1\n30 NEXT J,I\n40 PRINT C").unwrap();
        assert_eq!(r.output, " 6 \n");
    }

    #[test]
    fn peek_reads_bus() {
        let (r, _) = run_src("10 POKE 4096,77\n20 PRINT PEEK(4096)").unwrap();
        assert_eq!(r.output, " 77 \n");
    }
}
