//! AST for ShapeScript programs.
//!
//! Equality on AST nodes is structural and ignores source spans, so a
//! pretty-printed and re-parsed program compares equal to the original.

use std::fmt;

/// 1-based line/column position of a token or node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct Span {
    pub line: u32,
    pub col: u32,
}

impl fmt::Display for Span {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.line, self.col)
    }
}

/// A parsed and scope-checked ShapeScript program.
#[derive(Debug, Clone, PartialEq)]
pub struct Program {
    pub statements: Vec<Stmt>,
}

#[derive(Debug, Clone)]
pub struct Stmt {
    pub kind: StmtKind,
    pub span: Span,
}

// Span-agnostic structural equality.
impl PartialEq for Stmt {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum StmtKind {
    Let {
        name: String,
        value: Expr,
    },
    FnDef {
        name: String,
        params: Vec<String>,
        body: Vec<Stmt>,
    },
    /// Call to a user-defined function, statement position only.
    Call {
        name: String,
        args: Vec<Expr>,
    },
    For {
        var: String,
        start: Expr,
        end: Expr,
        body: Vec<Stmt>,
    },
    Primitive(PrimitiveStmt),
}

/// One of the four primitive kinds the DSL can instantiate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PrimitiveKind {
    Cuboid,
    Cylinder,
    Sphere,
    Cone,
}

impl PrimitiveKind {
    pub fn name(self) -> &'static str {
        match self {
            PrimitiveKind::Cuboid => "cuboid",
            PrimitiveKind::Cylinder => "cylinder",
            PrimitiveKind::Sphere => "sphere",
            PrimitiveKind::Cone => "cone",
        }
    }

    pub fn from_name(name: &str) -> Option<PrimitiveKind> {
        match name {
            "cuboid" => Some(PrimitiveKind::Cuboid),
            "cylinder" => Some(PrimitiveKind::Cylinder),
            "sphere" => Some(PrimitiveKind::Sphere),
            "cone" => Some(PrimitiveKind::Cone),
            _ => None,
        }
    }
}

/// A primitive statement with keyword arguments in source order.
#[derive(Debug, Clone, PartialEq)]
pub struct PrimitiveStmt {
    pub kind: PrimitiveKind,
    pub args: Vec<KwArg>,
}

#[derive(Debug, Clone)]
pub struct KwArg {
    pub name: String,
    pub value: ArgValue,
    pub span: Span,
}

impl PartialEq for KwArg {
    fn eq(&self, other: &Self) -> bool {
        self.name == other.name && self.value == other.value
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ArgValue {
    Scalar(Expr),
    Triple(Expr, Expr, Expr),
}

#[derive(Debug, Clone)]
pub struct Expr {
    pub kind: ExprKind,
    pub span: Span,
}

impl PartialEq for Expr {
    fn eq(&self, other: &Self) -> bool {
        self.kind == other.kind
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ExprKind {
    Number(f64),
    Var(String),
    Unary(UnaryOp, Box<Expr>),
    Binary(BinOp, Box<Expr>, Box<Expr>),
    Builtin(BuiltinFn, Vec<Expr>),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UnaryOp {
    Neg,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
}

impl BinOp {
    fn symbol(self) -> &'static str {
        match self {
            BinOp::Add => "+",
            BinOp::Sub => "-",
            BinOp::Mul => "*",
            BinOp::Div => "/",
        }
    }

    fn precedence(self) -> u8 {
        match self {
            BinOp::Add | BinOp::Sub => 1,
            BinOp::Mul | BinOp::Div => 2,
        }
    }
}

/// Math builtins callable in expression position.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BuiltinFn {
    Sin,
    Cos,
    Tan,
    Atan2,
    Sqrt,
    Abs,
    Min,
    Max,
    Radians,
}

impl BuiltinFn {
    pub fn name(self) -> &'static str {
        match self {
            BuiltinFn::Sin => "sin",
            BuiltinFn::Cos => "cos",
            BuiltinFn::Tan => "tan",
            BuiltinFn::Atan2 => "atan2",
            BuiltinFn::Sqrt => "sqrt",
            BuiltinFn::Abs => "abs",
            BuiltinFn::Min => "min",
            BuiltinFn::Max => "max",
            BuiltinFn::Radians => "radians",
        }
    }

    pub fn from_name(name: &str) -> Option<BuiltinFn> {
        match name {
            "sin" => Some(BuiltinFn::Sin),
            "cos" => Some(BuiltinFn::Cos),
            "tan" => Some(BuiltinFn::Tan),
            "atan2" => Some(BuiltinFn::Atan2),
            "sqrt" => Some(BuiltinFn::Sqrt),
            "abs" => Some(BuiltinFn::Abs),
            "min" => Some(BuiltinFn::Min),
            "max" => Some(BuiltinFn::Max),
            "radians" => Some(BuiltinFn::Radians),
            _ => None,
        }
    }

    pub fn arity(self) -> usize {
        match self {
            BuiltinFn::Atan2 | BuiltinFn::Min | BuiltinFn::Max => 2,
            _ => 1,
        }
    }
}

/// Names that cannot be rebound by `let`, `fn`, parameters, or loop vars.
pub fn is_reserved(name: &str) -> bool {
    name == "pi"
        || BuiltinFn::from_name(name).is_some()
        || PrimitiveKind::from_name(name).is_some()
        || matches!(name, "let" | "fn" | "for" | "in")
}

// ---------------------------------------------------------------------------
// Pretty-printer. The output re-parses to a structurally identical AST.
// ---------------------------------------------------------------------------

impl fmt::Display for Program {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl Program {
    /// Canonical source form of the program.
    pub fn pretty(&self) -> String {
        let mut out = String::new();
        for stmt in &self.statements {
            write_stmt(&mut out, stmt, 0);
        }
        out
    }
}

fn indent(out: &mut String, level: usize) {
    for _ in 0..level {
        out.push_str("    ");
    }
}

fn write_stmt(out: &mut String, stmt: &Stmt, level: usize) {
    indent(out, level);
    match &stmt.kind {
        StmtKind::Let { name, value } => {
            out.push_str("let ");
            out.push_str(name);
            out.push_str(" = ");
            write_expr(out, value, 0);
            out.push_str(";\n");
        }
        StmtKind::FnDef { name, params, body } => {
            out.push_str("fn ");
            out.push_str(name);
            out.push('(');
            for (i, p) in params.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(p);
            }
            out.push_str(") {\n");
            for s in body {
                write_stmt(out, s, level + 1);
            }
            indent(out, level);
            out.push_str("}\n");
        }
        StmtKind::Call { name, args } => {
            out.push_str(name);
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push_str(");\n");
        }
        StmtKind::For {
            var,
            start,
            end,
            body,
        } => {
            out.push_str("for ");
            out.push_str(var);
            out.push_str(" in ");
            // Range bounds bind tighter than `..` visually; additive
            // expressions and below get parentheses.
            write_range_bound(out, start);
            out.push_str("..");
            write_range_bound(out, end);
            out.push_str(" {\n");
            for s in body {
                write_stmt(out, s, level + 1);
            }
            indent(out, level);
            out.push_str("}\n");
        }
        StmtKind::Primitive(p) => {
            out.push_str(p.kind.name());
            out.push('(');
            for (i, arg) in p.args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                out.push_str(&arg.name);
                out.push('=');
                match &arg.value {
                    ArgValue::Scalar(e) => write_expr(out, e, 0),
                    ArgValue::Triple(a, b, c) => {
                        out.push('(');
                        write_expr(out, a, 0);
                        out.push_str(", ");
                        write_expr(out, b, 0);
                        out.push_str(", ");
                        write_expr(out, c, 0);
                        out.push(')');
                    }
                }
            }
            out.push_str(");\n");
        }
    }
}

fn write_range_bound(out: &mut String, expr: &Expr) {
    match &expr.kind {
        ExprKind::Number(_) | ExprKind::Var(_) | ExprKind::Builtin(..) | ExprKind::Unary(..) => {
            write_expr(out, expr, 0)
        }
        ExprKind::Binary(..) => {
            out.push('(');
            write_expr(out, expr, 0);
            out.push(')');
        }
    }
}

/// `min_prec` is the lowest binary precedence printable without parens.
fn write_expr(out: &mut String, expr: &Expr, min_prec: u8) {
    match &expr.kind {
        ExprKind::Number(n) => {
            // f64 Display round-trips exactly through the number lexer.
            out.push_str(&format!("{n}"));
        }
        ExprKind::Var(name) => out.push_str(name),
        ExprKind::Unary(UnaryOp::Neg, inner) => {
            let needs_paren = min_prec > 0;
            if needs_paren {
                out.push('(');
            }
            out.push('-');
            // Negation binds tighter than * and /, so any binary child
            // needs parens to round-trip.
            match inner.kind {
                ExprKind::Binary(..) => {
                    out.push('(');
                    write_expr(out, inner, 0);
                    out.push(')');
                }
                _ => write_expr(out, inner, 3),
            }
            if needs_paren {
                out.push(')');
            }
        }
        ExprKind::Binary(op, lhs, rhs) => {
            let prec = op.precedence();
            let needs_paren = prec < min_prec;
            if needs_paren {
                out.push('(');
            }
            write_expr(out, lhs, prec);
            out.push(' ');
            out.push_str(op.symbol());
            out.push(' ');
            // Left-associative operators: the right child must bind strictly
            // tighter to re-parse into the same tree.
            write_expr(out, rhs, prec + 1);
            if needs_paren {
                out.push(')');
            }
        }
        ExprKind::Builtin(f, args) => {
            out.push_str(f.name());
            out.push('(');
            for (i, a) in args.iter().enumerate() {
                if i > 0 {
                    out.push_str(", ");
                }
                write_expr(out, a, 0);
            }
            out.push(')');
        }
    }
}
