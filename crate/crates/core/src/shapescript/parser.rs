//! Recursive-descent parser producing the ShapeScript AST.

use super::ast::*;
use super::lexer::{lex, SpannedToken, Token};
use super::ParseError;

const MAX_EXPR_DEPTH: usize = 200;

pub fn parse_source(source: &str) -> Result<Program, ParseError> {
    let tokens = lex(source)?;
    let mut parser = Parser {
        tokens,
        pos: 0,
        depth: 0,
    };
    parser.parse_program()
}

struct Parser {
    tokens: Vec<SpannedToken>,
    pos: usize,
    depth: usize,
}

impl Parser {
    fn parse_program(&mut self) -> Result<Program, ParseError> {
        let mut statements = Vec::new();
        while !self.at_end() {
            statements.push(self.parse_stmt(true)?);
        }
        Ok(Program { statements })
    }

    // ── token helpers ────────────────────────────────────────────

    fn at_end(&self) -> bool {
        self.pos >= self.tokens.len()
    }

    fn peek(&self) -> Option<&Token> {
        self.tokens.get(self.pos).map(|(t, _)| t)
    }

    fn peek_span(&self) -> Span {
        self.tokens.get(self.pos).map_or_else(
            || {
                self.tokens
                    .last()
                    .map(|(_, s)| *s)
                    .unwrap_or(Span { line: 1, col: 1 })
            },
            |(_, s)| *s,
        )
    }

    fn advance(&mut self) -> Option<SpannedToken> {
        let tok = self.tokens.get(self.pos).cloned();
        if tok.is_some() {
            self.pos += 1;
        }
        tok
    }

    fn expect(&mut self, expected: &Token) -> Result<Span, ParseError> {
        match self.peek() {
            Some(tok) if std::mem::discriminant(tok) == std::mem::discriminant(expected) => {
                Ok(self.advance().unwrap().1)
            }
            Some(tok) => Err(ParseError::syntax(
                self.peek_span(),
                format!("expected {}, found {}", expected.describe(), tok.describe()),
            )),
            None => Err(ParseError::syntax(
                self.peek_span(),
                format!("expected {}, found end of input", expected.describe()),
            )),
        }
    }

    fn expect_ident(&mut self) -> Result<(String, Span), ParseError> {
        match self.peek() {
            Some(Token::Ident(_)) => {
                let (tok, span) = self.advance().unwrap();
                match tok {
                    Token::Ident(name) => Ok((name, span)),
                    _ => unreachable!(),
                }
            }
            Some(tok) => Err(ParseError::syntax(
                self.peek_span(),
                format!("expected identifier, found {}", tok.describe()),
            )),
            None => Err(ParseError::syntax(
                self.peek_span(),
                "expected identifier, found end of input",
            )),
        }
    }

    fn eat(&mut self, tok: &Token) -> bool {
        if self
            .peek()
            .map(|t| std::mem::discriminant(t) == std::mem::discriminant(tok))
            == Some(true)
        {
            self.pos += 1;
            true
        } else {
            false
        }
    }

    // ── statements ───────────────────────────────────────────────

    fn parse_stmt(&mut self, top_level: bool) -> Result<Stmt, ParseError> {
        let span = self.peek_span();
        match self.peek() {
            Some(Token::KwLet) => self.parse_let(span),
            Some(Token::KwFn) => {
                if !top_level {
                    return Err(ParseError::syntax(
                        span,
                        "function definitions cannot be nested",
                    ));
                }
                self.parse_fn(span)
            }
            Some(Token::KwFor) => self.parse_for(span),
            Some(Token::Ident(_)) => self.parse_call_like(span),
            Some(tok) => Err(ParseError::syntax(
                span,
                format!("expected a statement, found {}", tok.describe()),
            )),
            None => Err(ParseError::syntax(
                span,
                "expected a statement, found end of input",
            )),
        }
    }

    fn parse_let(&mut self, span: Span) -> Result<Stmt, ParseError> {
        self.expect(&Token::KwLet)?;
        let (name, _) = self.expect_ident()?;
        self.expect(&Token::Assign)?;
        let value = self.parse_expr()?;
        self.expect(&Token::Semicolon)?;
        Ok(Stmt {
            kind: StmtKind::Let { name, value },
            span,
        })
    }

    fn parse_fn(&mut self, span: Span) -> Result<Stmt, ParseError> {
        self.expect(&Token::KwFn)?;
        let (name, _) = self.expect_ident()?;
        self.expect(&Token::LParen)?;
        let mut params = Vec::new();
        if !matches!(self.peek(), Some(Token::RParen)) {
            loop {
                let (p, _) = self.expect_ident()?;
                params.push(p);
                if !self.eat(&Token::Comma) {
                    break;
                }
            }
        }
        self.expect(&Token::RParen)?;
        self.expect(&Token::LBrace)?;
        let mut body = Vec::new();
        while !matches!(self.peek(), Some(Token::RBrace)) {
            if self.at_end() {
                return Err(ParseError::syntax(
                    self.peek_span(),
                    "expected `}` to close function body, found end of input",
                ));
            }
            body.push(self.parse_stmt(false)?);
        }
        self.expect(&Token::RBrace)?;
        Ok(Stmt {
            kind: StmtKind::FnDef { name, params, body },
            span,
        })
    }

    fn parse_for(&mut self, span: Span) -> Result<Stmt, ParseError> {
        self.expect(&Token::KwFor)?;
        let (var, _) = self.expect_ident()?;
        self.expect(&Token::KwIn)?;
        let start = self.parse_range_bound()?;
        self.expect(&Token::DotDot)?;
        let end = self.parse_range_bound()?;
        self.expect(&Token::LBrace)?;
        let mut body = Vec::new();
        while !matches!(self.peek(), Some(Token::RBrace)) {
            if self.at_end() {
                return Err(ParseError::syntax(
                    self.peek_span(),
                    "expected `}` to close loop body, found end of input",
                ));
            }
            // `fn` stays top-level only; everything else nests.
            body.push(self.parse_stmt(false)?);
        }
        self.expect(&Token::RBrace)?;
        Ok(Stmt {
            kind: StmtKind::For {
                var,
                start,
                end,
                body,
            },
            span,
        })
    }

    /// Range bounds are primary expressions with optional negation (number,
    /// variable, builtin call, or a parenthesized expression), so `0..n`
    /// never swallows arithmetic.
    fn parse_range_bound(&mut self) -> Result<Expr, ParseError> {
        self.parse_unary()
    }

    /// Either a primitive statement (`cuboid(size=...)`) or a user function
    /// call (`leg(0.1)`), both terminated by `;`.
    fn parse_call_like(&mut self, span: Span) -> Result<Stmt, ParseError> {
        let (name, _) = self.expect_ident()?;
        self.expect(&Token::LParen)?;
        let stmt = if let Some(kind) = PrimitiveKind::from_name(&name) {
            let args = self.parse_kwargs()?;
            Stmt {
                kind: StmtKind::Primitive(PrimitiveStmt { kind, args }),
                span,
            }
        } else {
            let mut args = Vec::new();
            if !matches!(self.peek(), Some(Token::RParen)) {
                loop {
                    args.push(self.parse_expr()?);
                    if !self.eat(&Token::Comma) {
                        break;
                    }
                }
            }
            Stmt {
                kind: StmtKind::Call { name, args },
                span,
            }
        };
        self.expect(&Token::RParen)?;
        self.expect(&Token::Semicolon)?;
        Ok(stmt)
    }

    fn parse_kwargs(&mut self) -> Result<Vec<KwArg>, ParseError> {
        let mut args = Vec::new();
        if matches!(self.peek(), Some(Token::RParen)) {
            return Ok(args);
        }
        loop {
            let (name, span) = self.expect_ident()?;
            self.expect(&Token::Assign)?;
            let value = self.parse_arg_value()?;
            args.push(KwArg { name, value, span });
            if !self.eat(&Token::Comma) {
                break;
            }
        }
        Ok(args)
    }

    /// `(a, b, c)` is a triple; `(expr)` is a parenthesized scalar.
    fn parse_arg_value(&mut self) -> Result<ArgValue, ParseError> {
        if matches!(self.peek(), Some(Token::LParen)) {
            self.expect(&Token::LParen)?;
            let first = self.parse_expr()?;
            if self.eat(&Token::Comma) {
                let second = self.parse_expr()?;
                self.expect(&Token::Comma)?;
                let third = self.parse_expr()?;
                self.expect(&Token::RParen)?;
                return Ok(ArgValue::Triple(first, second, third));
            }
            self.expect(&Token::RParen)?;
            return Ok(ArgValue::Scalar(first));
        }
        Ok(ArgValue::Scalar(self.parse_expr()?))
    }

    // ── expressions ──────────────────────────────────────────────

    fn parse_expr(&mut self) -> Result<Expr, ParseError> {
        self.depth += 1;
        if self.depth > MAX_EXPR_DEPTH {
            return Err(ParseError::syntax(
                self.peek_span(),
                "expression nests too deeply",
            ));
        }
        let result = self.parse_additive();
        self.depth -= 1;
        result
    }

    fn parse_additive(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_multiplicative()?;
        loop {
            let op = match self.peek() {
                Some(Token::Plus) => BinOp::Add,
                Some(Token::Minus) => BinOp::Sub,
                _ => break,
            };
            let span = self.advance().unwrap().1;
            let rhs = self.parse_multiplicative()?;
            lhs = Expr {
                span,
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn parse_multiplicative(&mut self) -> Result<Expr, ParseError> {
        let mut lhs = self.parse_unary()?;
        loop {
            let op = match self.peek() {
                Some(Token::Star) => BinOp::Mul,
                Some(Token::Slash) => BinOp::Div,
                _ => break,
            };
            let span = self.advance().unwrap().1;
            let rhs = self.parse_unary()?;
            lhs = Expr {
                span,
                kind: ExprKind::Binary(op, Box::new(lhs), Box::new(rhs)),
            };
        }
        Ok(lhs)
    }

    fn parse_unary(&mut self) -> Result<Expr, ParseError> {
        if matches!(self.peek(), Some(Token::Minus)) {
            let span = self.advance().unwrap().1;
            self.depth += 1;
            if self.depth > MAX_EXPR_DEPTH {
                return Err(ParseError::syntax(span, "expression nests too deeply"));
            }
            let inner = self.parse_unary()?;
            self.depth -= 1;
            return Ok(Expr {
                span,
                kind: ExprKind::Unary(UnaryOp::Neg, Box::new(inner)),
            });
        }
        self.parse_primary()
    }

    fn parse_primary(&mut self) -> Result<Expr, ParseError> {
        let span = self.peek_span();
        match self.peek().cloned() {
            Some(Token::Number(n)) => {
                self.advance();
                Ok(Expr {
                    span,
                    kind: ExprKind::Number(n),
                })
            }
            Some(Token::Ident(name)) => {
                self.advance();
                if matches!(self.peek(), Some(Token::LParen)) {
                    self.advance();
                    let mut args = Vec::new();
                    if !matches!(self.peek(), Some(Token::RParen)) {
                        loop {
                            args.push(self.parse_expr()?);
                            if !self.eat(&Token::Comma) {
                                break;
                            }
                        }
                    }
                    self.expect(&Token::RParen)?;
                    let builtin = BuiltinFn::from_name(&name).ok_or_else(|| {
                        ParseError::analysis(
                            span,
                            format!("`{name}` is not a math function usable in expressions"),
                        )
                    })?;
                    return Ok(Expr {
                        span,
                        kind: ExprKind::Builtin(builtin, args),
                    });
                }
                Ok(Expr {
                    span,
                    kind: ExprKind::Var(name),
                })
            }
            Some(Token::LParen) => {
                self.advance();
                let inner = self.parse_expr()?;
                self.expect(&Token::RParen)?;
                Ok(inner)
            }
            Some(tok) => Err(ParseError::syntax(
                span,
                format!("expected an expression, found {}", tok.describe()),
            )),
            None => Err(ParseError::syntax(
                span,
                "expected an expression, found end of input",
            )),
        }
    }
}
