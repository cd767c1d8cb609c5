//! Parser and sandboxed interpreter for the ShapeScript modeling DSL.
//!
//! ShapeScript programs declare dimension variables, define part-building
//! functions, and place primitives (cuboid, cylinder, sphere, cone) with
//! optional rotation and scale. The interpreter is the sandbox: the language
//! has no I/O, no strings, and no external state, and every run is bounded
//! by [`ExecLimits`]. See `docs/shapescript.md` for the normative grammar.

mod analyze;
mod ast;
mod interp;
mod lexer;
mod parser;

pub use ast::{
    ArgValue, BinOp, BuiltinFn, Expr, ExprKind, KwArg, PrimitiveKind, PrimitiveStmt, Program, Span,
    Stmt, StmtKind, UnaryOp,
};

use crate::geom::Vec3;
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Resource bounds enforced during evaluation. All limits must be >= 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExecLimits {
    /// Total AST-node evaluations allowed for the whole run.
    pub max_steps: u64,
    /// Primitive instances a program may create.
    pub max_primitives: usize,
    /// Iterations allowed for any single loop.
    pub max_loop_iterations: u64,
}

impl Default for ExecLimits {
    fn default() -> Self {
        ExecLimits {
            max_steps: 1_000_000,
            max_primitives: 10_000,
            max_loop_iterations: 100_000,
        }
    }
}

/// Kind-specific dimensions of a primitive, all in meters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ShapeParams {
    Cuboid {
        size: Vec3,
    },
    Cylinder {
        radius: f64,
        depth: f64,
    },
    Sphere {
        radius: f64,
    },
    Cone {
        radius_bottom: f64,
        radius_top: f64,
        depth: f64,
    },
}

/// A fully resolved primitive placement produced by evaluation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PrimitiveInstance {
    pub shape: ShapeParams,
    /// Translation applied after rotation, meters.
    pub location: Vec3,
    /// Euler XYZ rotation, radians.
    pub rotation: Vec3,
    /// Per-axis scale applied before rotation; components positive.
    pub scale: Vec3,
}

impl PrimitiveInstance {
    pub fn kind(&self) -> PrimitiveKind {
        match self.shape {
            ShapeParams::Cuboid { .. } => PrimitiveKind::Cuboid,
            ShapeParams::Cylinder { .. } => PrimitiveKind::Cylinder,
            ShapeParams::Sphere { .. } => PrimitiveKind::Sphere,
            ShapeParams::Cone { .. } => PrimitiveKind::Cone,
        }
    }
}

/// Parse-time failure: either a malformed production or a scope/arity
/// violation found during static analysis.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ParseError {
    #[error("syntax error at {span}: {message}")]
    Syntax { span: Span, message: String },
    #[error("analysis error at {span}: {message}")]
    Analysis { span: Span, message: String },
}

impl ParseError {
    pub(crate) fn syntax(span: Span, message: impl Into<String>) -> Self {
        ParseError::Syntax {
            span,
            message: message.into(),
        }
    }

    pub(crate) fn analysis(span: Span, message: impl Into<String>) -> Self {
        ParseError::Analysis {
            span,
            message: message.into(),
        }
    }

    pub fn span(&self) -> Span {
        match self {
            ParseError::Syntax { span, .. } | ParseError::Analysis { span, .. } => *span,
        }
    }
}

/// Which [`ExecLimits`] bound was hit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LimitKind {
    Steps,
    Primitives,
    LoopIterations,
}

impl std::fmt::Display for LimitKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            LimitKind::Steps => write!(f, "max_steps"),
            LimitKind::Primitives => write!(f, "max_primitives"),
            LimitKind::LoopIterations => write!(f, "max_loop_iterations"),
        }
    }
}

/// Runtime failure during sandboxed evaluation.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum ExecError {
    #[error("limit exceeded at {span}: {limit}")]
    LimitExceeded { limit: LimitKind, span: Span },
    #[error("numeric error at {span}: {message}")]
    Numeric { span: Span, message: String },
    #[error("domain error at {span}: {message}")]
    Domain { span: Span, message: String },
}

/// Parse ShapeScript source into a scope-checked [`Program`].
///
/// The returned program has passed static analysis: every identifier is
/// bound before use, functions are top-level and non-recursive, call
/// arities match, and primitive keyword arguments are complete.
pub fn parse(source: &str) -> Result<Program, ParseError> {
    let program = parser::parse_source(source)?;
    analyze::analyze(&program)?;
    Ok(program)
}

/// Execute a parsed program, producing primitive instances in statement
/// order. Deterministic: the same program and limits always yield the same
/// instance list, bit for bit.
pub fn evaluate(
    program: &Program,
    limits: &ExecLimits,
) -> Result<Vec<PrimitiveInstance>, ExecError> {
    interp::run(program, limits)
}
