//! Static analysis: define-before-use scoping, recursion rejection, arity
//! checks, and primitive keyword-argument validation.

use super::ast::*;
use super::ParseError;
use std::collections::{HashMap, HashSet};

struct Scopes {
    stack: Vec<HashSet<String>>,
}

impl Scopes {
    fn contains(&self, name: &str) -> bool {
        name == "pi" || self.stack.iter().any(|s| s.contains(name))
    }

    fn bind(&mut self, name: &str) {
        self.stack.last_mut().unwrap().insert(name.to_string());
    }
}

struct Analyzer {
    scopes: Scopes,
    fns: HashMap<String, usize>,
}

pub fn analyze(program: &Program) -> Result<(), ParseError> {
    let mut a = Analyzer {
        scopes: Scopes {
            stack: vec![HashSet::new()],
        },
        fns: HashMap::new(),
    };
    for stmt in &program.statements {
        a.check_stmt(stmt, None, true)?;
    }
    Ok(())
}

impl Analyzer {
    fn check_stmt(
        &mut self,
        stmt: &Stmt,
        current_fn: Option<&str>,
        top_level: bool,
    ) -> Result<(), ParseError> {
        match &stmt.kind {
            StmtKind::Let { name, value } => {
                check_bindable(name, stmt.span)?;
                self.check_expr(value)?;
                self.scopes.bind(name);
                Ok(())
            }
            StmtKind::FnDef { name, params, body } => {
                if !top_level {
                    // Unreachable: the parser rejects nested `fn`.
                    return Err(ParseError::analysis(
                        stmt.span,
                        "function definitions cannot be nested",
                    ));
                }
                check_bindable(name, stmt.span)?;
                if self.fns.contains_key(name) || self.scopes.contains(name) {
                    return Err(ParseError::analysis(
                        stmt.span,
                        format!("`{name}` is already defined"),
                    ));
                }
                let mut frame = HashSet::new();
                for p in params {
                    check_bindable(p, stmt.span)?;
                    if !frame.insert(p.clone()) {
                        return Err(ParseError::analysis(
                            stmt.span,
                            format!("duplicate parameter `{p}` in function `{name}`"),
                        ));
                    }
                }
                self.scopes.stack.push(frame);
                let result: Result<(), ParseError> = body
                    .iter()
                    .try_for_each(|s| self.check_stmt(s, Some(name), false));
                self.scopes.stack.pop();
                result?;
                self.fns.insert(name.clone(), params.len());
                Ok(())
            }
            StmtKind::Call { name, args } => {
                for arg in args {
                    self.check_expr(arg)?;
                }
                if current_fn == Some(name.as_str()) {
                    return Err(ParseError::analysis(
                        stmt.span,
                        format!("function `{name}` calls itself; recursion is not allowed"),
                    ));
                }
                match self.fns.get(name) {
                    Some(&arity) if arity == args.len() => Ok(()),
                    Some(&arity) => Err(ParseError::analysis(
                        stmt.span,
                        format!(
                            "function `{name}` takes {arity} argument(s), {} given",
                            args.len()
                        ),
                    )),
                    None => Err(ParseError::analysis(
                        stmt.span,
                        format!("call to undefined function `{name}`"),
                    )),
                }
            }
            StmtKind::For {
                var,
                start,
                end,
                body,
            } => {
                check_bindable(var, stmt.span)?;
                self.check_expr(start)?;
                self.check_expr(end)?;
                let mut frame = HashSet::new();
                frame.insert(var.clone());
                self.scopes.stack.push(frame);
                let result: Result<(), ParseError> = body
                    .iter()
                    .try_for_each(|s| self.check_stmt(s, current_fn, false));
                self.scopes.stack.pop();
                result
            }
            StmtKind::Primitive(p) => self.check_primitive(p, stmt.span),
        }
    }

    fn check_expr(&self, expr: &Expr) -> Result<(), ParseError> {
        match &expr.kind {
            ExprKind::Number(_) => Ok(()),
            ExprKind::Var(name) => {
                if self.scopes.contains(name) {
                    Ok(())
                } else {
                    Err(ParseError::analysis(
                        expr.span,
                        format!("unbound identifier `{name}`"),
                    ))
                }
            }
            ExprKind::Unary(_, inner) => self.check_expr(inner),
            ExprKind::Binary(_, lhs, rhs) => {
                self.check_expr(lhs)?;
                self.check_expr(rhs)
            }
            ExprKind::Builtin(f, args) => {
                if args.len() != f.arity() {
                    return Err(ParseError::analysis(
                        expr.span,
                        format!(
                            "`{}` takes {} argument(s), {} given",
                            f.name(),
                            f.arity(),
                            args.len()
                        ),
                    ));
                }
                for arg in args {
                    self.check_expr(arg)?;
                }
                Ok(())
            }
        }
    }

    fn check_primitive(&self, p: &PrimitiveStmt, span: Span) -> Result<(), ParseError> {
        let table = kwarg_table(p.kind);
        let mut seen: HashSet<&str> = HashSet::new();
        for arg in &p.args {
            let entry = table.iter().find(|(n, _, _)| *n == arg.name);
            let Some((name, is_triple, _)) = entry else {
                return Err(ParseError::analysis(
                    arg.span,
                    format!("`{}` takes no argument named `{}`", p.kind.name(), arg.name),
                ));
            };
            if !seen.insert(name) {
                return Err(ParseError::analysis(
                    arg.span,
                    format!("duplicate argument `{}`", arg.name),
                ));
            }
            match (&arg.value, is_triple) {
                (ArgValue::Triple(a, b, c), true) => {
                    self.check_expr(a)?;
                    self.check_expr(b)?;
                    self.check_expr(c)?;
                }
                (ArgValue::Scalar(e), false) => self.check_expr(e)?,
                (ArgValue::Scalar(_), true) => {
                    return Err(ParseError::analysis(
                        arg.span,
                        format!("argument `{}` must be a triple `(x, y, z)`", arg.name),
                    ));
                }
                (ArgValue::Triple(..), false) => {
                    return Err(ParseError::analysis(
                        arg.span,
                        format!("argument `{}` must be a scalar", arg.name),
                    ));
                }
            }
        }
        for (name, _, required) in table {
            if *required && !seen.contains(name) {
                return Err(ParseError::analysis(
                    span,
                    format!("`{}` requires argument `{name}`", p.kind.name()),
                ));
            }
        }
        Ok(())
    }
}

fn check_bindable(name: &str, span: Span) -> Result<(), ParseError> {
    if is_reserved(name) {
        return Err(ParseError::analysis(
            span,
            format!("`{name}` is a reserved name and cannot be bound"),
        ));
    }
    Ok(())
}

/// Per-kind keyword argument table: (name, is_triple, required).
fn kwarg_table(kind: PrimitiveKind) -> &'static [(&'static str, bool, bool)] {
    match kind {
        PrimitiveKind::Cuboid => &[
            ("size", true, true),
            ("at", true, true),
            ("rot", true, false),
            ("scale", true, false),
        ],
        PrimitiveKind::Cylinder => &[
            ("radius", false, true),
            ("depth", false, true),
            ("at", true, true),
            ("rot", true, false),
            ("scale", true, false),
        ],
        PrimitiveKind::Sphere => &[
            ("radius", false, true),
            ("at", true, true),
            ("rot", true, false),
            ("scale", true, false),
        ],
        PrimitiveKind::Cone => &[
            ("radius_bottom", false, true),
            ("radius_top", false, true),
            ("depth", false, true),
            ("at", true, true),
            ("rot", true, false),
            ("scale", true, false),
        ],
    }
}
