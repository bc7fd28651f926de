//! Recursive-descent parser for program text.
//!
//! Expression precedence, loosest first: `OR`, `AND`, comparisons, `+ -`,
//! `* /`, `^`, unary `-`/`NOT`, then primaries.

use super::ast::*;
use super::error::ParseError;
use super::token::{tokenize, Keyword, Operator, Token, TokenKind};

/// Parses a whole program. Later duplicates of a line number replace earlier
/// ones; a line holding only a number deletes that line.
pub fn parse_program(source: &str) -> Result<Program, ParseError> {
    let mut program = Program { source_text: source.to_string(), ..Default::default() };
    for (idx, raw) in source.lines().enumerate() {
        let source_line = idx + 1;
        if raw.trim().is_empty() {
            continue;
        }
        let tokens = tokenize(raw, source_line)?;
        let (number, rest) = match tokens.split_first() {
            Some((Token { kind: TokenKind::Number(n), text, .. }, rest))
                if text.bytes().all(|b| b.is_ascii_digit()) =>
            {
                (*n, rest)
            }
            _ => {
                return Err(ParseError {
                    source_line,
                    line_number: None,
                    column: tokens.first().map(|t| t.column),
                    message: "missing line number".into(),
                })
            }
        };
        if !(1.0..=f64::from(MAX_LINE_NUMBER)).contains(&number) {
            return Err(ParseError {
                source_line,
                line_number: None,
                column: Some(tokens[0].column),
                message: format!("line number {number} out of range 1..{MAX_LINE_NUMBER}"),
            });
        }
        let number = number as u32;
        if rest.is_empty() {
            program.lines.remove(&number);
            continue;
        }
        let mut p = LineParser { tokens: rest, pos: 0, source_line, line_number: number };
        let statements = p.parse_line()?;
        program.lines.insert(number, statements);
    }
    Ok(program)
}

struct LineParser<'a> {
    tokens: &'a [Token],
    pos: usize,
    source_line: usize,
    line_number: u32,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> LineParser<'a> {
    fn error(&self, message: impl Into<String>) -> ParseError {
        ParseError {
            source_line: self.source_line,
            line_number: Some(self.line_number),
            column: self.tokens.get(self.pos).map(|t| t.column),
            message: message.into(),
        }
    }

    fn peek(&self) -> Option<&'a TokenKind> {
        self.tokens.get(self.pos).map(|t| &t.kind)
    }

    fn bump(&mut self) -> Option<&'a TokenKind> {
        let t = self.tokens.get(self.pos).map(|t| &t.kind);
        if t.is_some() {
            self.pos += 1;
        }
        t
    }

    fn at_keyword(&self, kw: Keyword) -> bool {
        matches!(self.peek(), Some(TokenKind::Keyword(k)) if *k == kw)
    }

    fn eat_keyword(&mut self, kw: Keyword) -> bool {
        if self.at_keyword(kw) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect_keyword(&mut self, kw: Keyword) -> PResult<()> {
        if self.eat_keyword(kw) {
            Ok(())
        } else {
            Err(self.error(format!("expected {kw}")))
        }
    }

    fn eat(&mut self, kind: &TokenKind) -> bool {
        if self.peek() == Some(kind) {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    fn expect(&mut self, kind: TokenKind, what: &str) -> PResult<()> {
        if self.eat(&kind) {
            Ok(())
        } else {
            Err(self.error(format!("expected {what}")))
        }
    }

    fn at_statement_end(&self) -> bool {
        matches!(self.peek(), None | Some(TokenKind::Colon))
    }

    fn parse_line(&mut self) -> PResult<Vec<Statement>> {
        let mut out = Vec::new();
        loop {
            if self.eat(&TokenKind::Colon) {
                continue;
            }
            if self.peek().is_none() {
                break;
            }
            let stmt = self.parse_statement()?;
            let inline_if = matches!(stmt, Statement::If { target: IfTarget::Inline, .. });
            out.push(stmt);
            if inline_if {
                // the statement after THEN follows without a separator
                continue;
            }
            if !self.at_statement_end() {
                return Err(self.error("unexpected token after statement"));
            }
        }
        if out.is_empty() {
            return Err(self.error("empty line"));
        }
        Ok(out)
    }

    fn line_target(&mut self) -> PResult<u32> {
        let tok = self.tokens.get(self.pos);
        match tok {
            Some(Token { kind: TokenKind::Number(n), text, .. })
                if text.bytes().all(|b| b.is_ascii_digit())
                    && *n <= f64::from(MAX_LINE_NUMBER) =>
            {
                self.pos += 1;
                Ok(*n as u32)
            }
            _ => Err(self.error("expected line number")),
        }
    }

    fn identifier(&mut self) -> PResult<String> {
        match self.peek() {
            Some(TokenKind::Identifier(name)) => {
                self.pos += 1;
                Ok(name.clone())
            }
            _ => Err(self.error("expected variable name")),
        }
    }

    fn parse_statement(&mut self) -> PResult<Statement> {
        let Some(tok) = self.peek() else {
            return Err(self.error("expected statement"));
        };
        match tok {
            TokenKind::Identifier(_) => self.parse_assignment(false),
            TokenKind::Keyword(kw) => {
                let kw = *kw;
                self.pos += 1;
                match kw {
                    Keyword::Let => self.parse_assignment(true),
                    Keyword::Poke => {
                        let address = self.expr()?;
                        self.expect(TokenKind::Comma, "','")?;
                        let value = self.expr()?;
                        Ok(Statement::Poke { address, value })
                    }
                    Keyword::For => {
                        let var = self.identifier()?;
                        self.expect(TokenKind::Operator(Operator::Eq), "'='")?;
                        let start = self.expr()?;
                        self.expect_keyword(Keyword::To)?;
                        let limit = self.expr()?;
                        let step = if self.eat_keyword(Keyword::Step) { Some(self.expr()?) } else { None };
                        Ok(Statement::For { var, start, limit, step })
                    }
                    Keyword::Next => {
                        let mut vars = Vec::new();
                        if !self.at_statement_end() {
                            vars.push(self.identifier()?);
                            while self.eat(&TokenKind::Comma) {
                                vars.push(self.identifier()?);
                            }
                        }
                        Ok(Statement::Next { vars })
                    }
                    Keyword::If => {
                        let condition = self.expr()?;
                        self.expect_keyword(Keyword::Then)?;
                        if matches!(self.peek(), Some(TokenKind::Number(_))) {
                            Ok(Statement::If { condition, target: IfTarget::Line(self.line_target()?) })
                        } else if self.at_statement_end() {
                            Err(self.error("expected line number or statement after THEN"))
                        } else {
                            Ok(Statement::If { condition, target: IfTarget::Inline })
                        }
                    }
                    Keyword::Goto => Ok(Statement::Goto(self.line_target()?)),
                    Keyword::Gosub => Ok(Statement::Gosub(self.line_target()?)),
                    Keyword::Return => Ok(Statement::Return),
                    Keyword::End => Ok(Statement::End),
                    Keyword::Print => self.parse_print(),
                    Keyword::Dim => {
                        let mut decls = Vec::new();
                        loop {
                            let name = self.identifier()?;
                            self.expect(TokenKind::LParen, "'('")?;
                            let size = self.expr()?;
                            self.expect(TokenKind::RParen, "')'")?;
                            decls.push((name, size));
                            if !self.eat(&TokenKind::Comma) {
                                break;
                            }
                        }
                        Ok(Statement::Dim(decls))
                    }
                    Keyword::Rem => match self.bump() {
                        Some(TokenKind::Remark(text)) => Ok(Statement::Rem(text.clone())),
                        None => Ok(Statement::Rem(String::new())),
                        Some(_) => Err(self.error("malformed REM")),
                    },
                    other => {
                        self.pos -= 1;
                        Err(self.error(format!("{other} cannot start a statement")))
                    }
                }
            }
            _ => Err(self.error("expected statement")),
        }
    }

    fn parse_assignment(&mut self, keyword: bool) -> PResult<Statement> {
        let name = self.identifier()?;
        let target = if self.eat(&TokenKind::LParen) {
            let idx = self.expr()?;
            self.expect(TokenKind::RParen, "')'")?;
            LValue::Index(name, idx)
        } else {
            LValue::Var(name)
        };
        self.expect(TokenKind::Operator(Operator::Eq), "'='")?;
        let value = self.expr()?;
        Ok(Statement::Let { target, value, keyword })
    }

    fn parse_print(&mut self) -> PResult<Statement> {
        let mut items = Vec::new();
        while !self.at_statement_end() {
            match self.peek() {
                Some(TokenKind::Semicolon) => {
                    self.pos += 1;
                    items.push(PrintItem::Semicolon);
                }
                Some(TokenKind::Comma) => {
                    self.pos += 1;
                    items.push(PrintItem::Comma);
                }
                _ => {
                    // juxtaposed items print as if separated by ';'
                    if matches!(items.last(), Some(PrintItem::Expr(_) | PrintItem::Text(_))) {
                        items.push(PrintItem::Semicolon);
                    }
                    if let Some(TokenKind::Str(s)) = self.peek() {
                        self.pos += 1;
                        items.push(PrintItem::Text(s.clone()));
                    } else {
                        items.push(PrintItem::Expr(self.expr()?));
                    }
                }
            }
        }
        Ok(Statement::Print(items))
    }

    fn expr(&mut self) -> PResult<Expr> {
        self.or_expr()
    }

    fn or_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.and_expr()?;
        while self.eat_keyword(Keyword::Or) {
            let rhs = self.and_expr()?;
            lhs = Expr::Binary(BinaryOp::Or, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn and_expr(&mut self) -> PResult<Expr> {
        let mut lhs = self.comparison()?;
        while self.eat_keyword(Keyword::And) {
            let rhs = self.comparison()?;
            lhs = Expr::Binary(BinaryOp::And, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn comparison(&mut self) -> PResult<Expr> {
        let mut lhs = self.additive()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Operator(Operator::Eq)) => BinaryOp::Eq,
                Some(TokenKind::Operator(Operator::Ne)) => BinaryOp::Ne,
                Some(TokenKind::Operator(Operator::Lt)) => BinaryOp::Lt,
                Some(TokenKind::Operator(Operator::Gt)) => BinaryOp::Gt,
                Some(TokenKind::Operator(Operator::Le)) => BinaryOp::Le,
                Some(TokenKind::Operator(Operator::Ge)) => BinaryOp::Ge,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.additive()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn additive(&mut self) -> PResult<Expr> {
        let mut lhs = self.term()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Operator(Operator::Plus)) => BinaryOp::Add,
                Some(TokenKind::Operator(Operator::Minus)) => BinaryOp::Sub,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.term()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn term(&mut self) -> PResult<Expr> {
        let mut lhs = self.power()?;
        loop {
            let op = match self.peek() {
                Some(TokenKind::Operator(Operator::Star)) => BinaryOp::Mul,
                Some(TokenKind::Operator(Operator::Slash)) => BinaryOp::Div,
                _ => return Ok(lhs),
            };
            self.pos += 1;
            let rhs = self.power()?;
            lhs = Expr::Binary(op, Box::new(lhs), Box::new(rhs));
        }
    }

    fn power(&mut self) -> PResult<Expr> {
        let mut lhs = self.unary()?;
        while self.eat(&TokenKind::Operator(Operator::Caret)) {
            let rhs = self.unary()?;
            lhs = Expr::Binary(BinaryOp::Pow, Box::new(lhs), Box::new(rhs));
        }
        Ok(lhs)
    }

    fn unary(&mut self) -> PResult<Expr> {
        if self.eat(&TokenKind::Operator(Operator::Minus)) {
            return Ok(Expr::Unary(UnaryOp::Neg, Box::new(self.unary()?)));
        }
        if self.eat(&TokenKind::Operator(Operator::Plus)) {
            return self.unary();
        }
        if self.eat_keyword(Keyword::Not) {
            return Ok(Expr::Unary(UnaryOp::Not, Box::new(self.unary()?)));
        }
        self.primary()
    }

    fn call_arg(&mut self) -> PResult<Box<Expr>> {
        self.expect(TokenKind::LParen, "'('")?;
        let e = self.expr()?;
        self.expect(TokenKind::RParen, "')'")?;
        Ok(Box::new(e))
    }

    fn primary(&mut self) -> PResult<Expr> {
        let Some(tok) = self.peek() else {
            return Err(self.error("expected expression"));
        };
        match tok {
            TokenKind::Number(v) => {
                self.pos += 1;
                Ok(Expr::Number(*v))
            }
            TokenKind::Identifier(name) => {
                self.pos += 1;
                if self.peek() == Some(&TokenKind::LParen) {
                    Ok(Expr::Index(name.clone(), self.call_arg()?))
                } else {
                    Ok(Expr::Var(name.clone()))
                }
            }
            TokenKind::LParen => {
                self.pos += 1;
                let e = self.expr()?;
                self.expect(TokenKind::RParen, "')'")?;
                Ok(Expr::Paren(Box::new(e)))
            }
            TokenKind::Keyword(kw) => {
                let func = match kw {
                    Keyword::Int => Function::Int,
                    Keyword::Rnd => Function::Rnd,
                    Keyword::Abs => Function::Abs,
                    Keyword::Peek => Function::Peek,
                    _ => return Err(self.error(format!("unexpected {kw} in expression"))),
                };
                self.pos += 1;
                Ok(Expr::Call(func, self.call_arg()?))
            }
            _ => Err(self.error("expected expression")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_line_program() {
        let p = parse_program("10 S=54272\n20 POKE S+24,15\n").unwrap();
        assert_eq!(p.lines.len(), 2);
        assert_eq!(
            p.lines[&20],
            vec![Statement::Poke {
                address: Expr::Binary(
                    BinaryOp::Add,
                    Box::new(Expr::Var("S".into())),
                    Box::new(Expr::Number(24.0))
                ),
                value: Expr::Number(15.0),
            }]
        );
    }

    #[test]
    fn later_line_replaces_earlier() {
        let p = parse_program("10 PRINT 1\n20 END\n10 END\n").unwrap();
        assert_eq!(p.lines[&10], vec![Statement::End]);
        assert_eq!(p, parse_program("20 END\n10 END").unwrap());
    }

    #[test]
    fn bare_number_deletes_line() {
        let p = parse_program("10 PRINT 1\n20 END\n10\n").unwrap();
        assert_eq!(p.lines.keys().copied().collect::<Vec<_>>(), vec![20]);
    }

    #[test]
    fn missing_line_number() {
        let e = parse_program("GOTO 10").unwrap_err();
        assert_eq!(e.source_line, 1);
        assert!(e.message.contains("line number"));
    }

    #[test]
    fn malformed_statement_cites_line_number() {
        let e = parse_program("10 PRINT 1\n20 POKE 1\n").unwrap_err();
        assert_eq!(e.line_number, Some(20));
        assert_eq!(e.source_line, 2);
    }

    #[test]
    fn inline_if_keeps_following_statements() {
        let p = parse_program("10 IF X>9 THEN PRINT 1:X=0").unwrap();
        let line = &p.lines[&10];
        assert_eq!(line.len(), 3);
        assert!(matches!(line[0], Statement::If { target: IfTarget::Inline, .. }));
    }

    #[test]
    fn if_then_line() {
        let p = parse_program("10 IF X>9 THEN 100").unwrap();
        assert!(matches!(p.lines[&10][0], Statement::If { target: IfTarget::Line(100), .. }));
    }

    #[test]
    fn precedence_shapes() {
        let p = parse_program("10 A=2+3*4").unwrap();
        let Statement::Let { value, .. } = &p.lines[&10][0] else { panic!() };
        assert!(matches!(value, Expr::Binary(BinaryOp::Add, _, _)));
        let p = parse_program("10 A=1<2 AND 3<4 OR 0").unwrap();
        let Statement::Let { value, .. } = &p.lines[&10][0] else { panic!() };
        assert!(matches!(value, Expr::Binary(BinaryOp::Or, _, _)));
    }

    #[test]
    fn rejects_keyword_as_expression() {
        assert!(parse_program("10 A=THEN").is_err());
        assert!(parse_program("10 TO").is_err());
        assert!(parse_program("10 A=(1").is_err());
        assert!(parse_program("10 IF X THEN").is_err());
    }

    #[test]
    fn out_of_range_line_numbers() {
        assert!(parse_program("0 END").is_err());
        assert!(parse_program("64000 END").is_err());
        assert!(parse_program("63999 END").is_ok());
        assert!(parse_program("1.5 END").is_err());
    }

    #[test]
    fn empty_statements_are_dropped() {
        let p = parse_program("10 FOR I=1 TO 100:\n20 NEXT").unwrap();
        assert_eq!(p.lines[&10].len(), 1);
    }
}
