//! Tree-walking interpreter. Doubles as the sandbox: values are plain f64,
//! there is no I/O surface, and every loop and call is metered against
//! [`ExecLimits`](super::ExecLimits).

use super::ast::*;
use super::{ExecError, ExecLimits, LimitKind, PrimitiveInstance, ShapeParams};
use crate::geom::Vec3;
use std::collections::HashMap;

type Env = HashMap<String, f64>;

struct FnEntry<'p> {
    params: &'p [String],
    body: &'p [Stmt],
    /// Global bindings visible at the definition site; later rebindings of
    /// a global do not affect this function.
    captured: Env,
}

struct Interp<'p> {
    limits: &'p ExecLimits,
    steps: u64,
    instances: Vec<PrimitiveInstance>,
    fns: HashMap<&'p str, FnEntry<'p>>,
}

pub fn run(program: &Program, limits: &ExecLimits) -> Result<Vec<PrimitiveInstance>, ExecError> {
    debug_assert!(
        limits.max_steps >= 1 && limits.max_primitives >= 1 && limits.max_loop_iterations >= 1
    );
    let mut interp = Interp {
        limits,
        steps: 0,
        instances: Vec::new(),
        fns: HashMap::new(),
    };
    // stack[0] is the global scope; loops push local frames on top.
    let mut stack: Vec<Env> = vec![Env::new()];
    for stmt in &program.statements {
        interp.exec_stmt(stmt, &mut stack)?;
    }
    Ok(interp.instances)
}

fn lookup(stack: &[Env], name: &str) -> Option<f64> {
    for scope in stack.iter().rev() {
        if let Some(v) = scope.get(name) {
            return Some(*v);
        }
    }
    if name == "pi" {
        return Some(std::f64::consts::PI);
    }
    None
}

impl<'p> Interp<'p> {
    fn step(&mut self, span: Span) -> Result<(), ExecError> {
        self.steps += 1;
        if self.steps > self.limits.max_steps {
            return Err(ExecError::LimitExceeded {
                limit: LimitKind::Steps,
                span,
            });
        }
        Ok(())
    }

    fn exec_stmt(&mut self, stmt: &'p Stmt, stack: &mut Vec<Env>) -> Result<(), ExecError> {
        self.step(stmt.span)?;
        match &stmt.kind {
            StmtKind::Let { name, value } => {
                let v = self.eval(value, stack)?;
                stack.last_mut().unwrap().insert(name.clone(), v);
                Ok(())
            }
            StmtKind::FnDef { name, params, body } => {
                let captured = stack.first().unwrap().clone();
                self.fns.insert(
                    name.as_str(),
                    FnEntry {
                        params,
                        body,
                        captured,
                    },
                );
                Ok(())
            }
            StmtKind::Call { name, args } => {
                let mut values = Vec::with_capacity(args.len());
                for arg in args {
                    values.push(self.eval(arg, stack)?);
                }
                self.step(stmt.span)?;
                let entry = self.fns.get(name.as_str()).expect("analysis checked call");
                let mut env = entry.captured.clone();
                for (param, value) in entry.params.iter().zip(values) {
                    env.insert(param.clone(), value);
                }
                let body = entry.body;
                let mut fn_stack = vec![env];
                for s in body {
                    self.exec_stmt(s, &mut fn_stack)?;
                }
                Ok(())
            }
            StmtKind::For {
                var,
                start,
                end,
                body,
            } => {
                let start_v = self.eval(start, stack)?;
                let end_v = self.eval(end, stack)?;
                let lo = require_integer(start_v, start.span)?;
                let hi = require_integer(end_v, end.span)?;
                let count = if hi > lo { (hi - lo) as u64 } else { 0 };
                if count > self.limits.max_loop_iterations {
                    return Err(ExecError::LimitExceeded {
                        limit: LimitKind::LoopIterations,
                        span: stmt.span,
                    });
                }
                for i in lo..hi.max(lo) {
                    let mut frame = Env::new();
                    frame.insert(var.clone(), i as f64);
                    stack.push(frame);
                    let result: Result<(), ExecError> =
                        body.iter().try_for_each(|s| self.exec_stmt(s, stack));
                    stack.pop();
                    result?;
                }
                Ok(())
            }
            StmtKind::Primitive(p) => self.exec_primitive(p, stmt.span, stack),
        }
    }

    fn eval(&mut self, expr: &Expr, stack: &[Env]) -> Result<f64, ExecError> {
        self.step(expr.span)?;
        match &expr.kind {
            ExprKind::Number(n) => Ok(*n),
            ExprKind::Var(name) => {
                Ok(lookup(stack, name).expect("analysis checked identifier binding"))
            }
            ExprKind::Unary(UnaryOp::Neg, inner) => Ok(-self.eval(inner, stack)?),
            ExprKind::Binary(op, lhs, rhs) => {
                let a = self.eval(lhs, stack)?;
                let b = self.eval(rhs, stack)?;
                let v = match op {
                    BinOp::Add => a + b,
                    BinOp::Sub => a - b,
                    BinOp::Mul => a * b,
                    BinOp::Div => {
                        if b == 0.0 {
                            return Err(ExecError::Numeric {
                                span: expr.span,
                                message: "division by zero".into(),
                            });
                        }
                        a / b
                    }
                };
                require_finite(v, expr.span)
            }
            ExprKind::Builtin(f, args) => {
                let mut vals = [0.0f64; 2];
                for (i, arg) in args.iter().enumerate() {
                    vals[i] = self.eval(arg, stack)?;
                }
                let v = match f {
                    BuiltinFn::Sin => vals[0].sin(),
                    BuiltinFn::Cos => vals[0].cos(),
                    BuiltinFn::Tan => vals[0].tan(),
                    BuiltinFn::Atan2 => vals[0].atan2(vals[1]),
                    BuiltinFn::Sqrt => vals[0].sqrt(),
                    BuiltinFn::Abs => vals[0].abs(),
                    BuiltinFn::Min => vals[0].min(vals[1]),
                    BuiltinFn::Max => vals[0].max(vals[1]),
                    BuiltinFn::Radians => vals[0].to_radians(),
                };
                require_finite(v, expr.span)
            }
        }
    }

    fn exec_primitive(
        &mut self,
        p: &'p PrimitiveStmt,
        span: Span,
        stack: &[Env],
    ) -> Result<(), ExecError> {
        let mut scalars: HashMap<&str, f64> = HashMap::new();
        let mut triples: HashMap<&str, Vec3> = HashMap::new();
        for arg in &p.args {
            match &arg.value {
                ArgValue::Scalar(e) => {
                    let v = self.eval(e, stack)?;
                    scalars.insert(arg.name.as_str(), v);
                }
                ArgValue::Triple(a, b, c) => {
                    let v = Vec3::new(
                        self.eval(a, stack)?,
                        self.eval(b, stack)?,
                        self.eval(c, stack)?,
                    );
                    triples.insert(arg.name.as_str(), v);
                }
            }
        }

        let kind_name = p.kind.name();
        let positive = |name: &str, v: f64| -> Result<f64, ExecError> {
            if v > 0.0 {
                Ok(v)
            } else {
                Err(ExecError::Domain {
                    span,
                    message: format!("{kind_name} `{name}` must be positive, got {v}"),
                })
            }
        };
        let positive_triple = |name: &str, v: Vec3| -> Result<Vec3, ExecError> {
            if v.x > 0.0 && v.y > 0.0 && v.z > 0.0 {
                Ok(v)
            } else {
                Err(ExecError::Domain {
                    span,
                    message: format!(
                        "{kind_name} `{name}` components must be positive, got ({}, {}, {})",
                        v.x, v.y, v.z
                    ),
                })
            }
        };

        let shape = match p.kind {
            PrimitiveKind::Cuboid => ShapeParams::Cuboid {
                size: positive_triple("size", triples["size"])?,
            },
            PrimitiveKind::Cylinder => ShapeParams::Cylinder {
                radius: positive("radius", scalars["radius"])?,
                depth: positive("depth", scalars["depth"])?,
            },
            PrimitiveKind::Sphere => ShapeParams::Sphere {
                radius: positive("radius", scalars["radius"])?,
            },
            PrimitiveKind::Cone => {
                let radius_top = scalars["radius_top"];
                if radius_top < 0.0 {
                    return Err(ExecError::Domain {
                        span,
                        message: format!(
                            "cone `radius_top` must be non-negative, got {radius_top}"
                        ),
                    });
                }
                ShapeParams::Cone {
                    radius_bottom: positive("radius_bottom", scalars["radius_bottom"])?,
                    radius_top,
                    depth: positive("depth", scalars["depth"])?,
                }
            }
        };

        let location = triples["at"];
        let rotation = triples.get("rot").copied().unwrap_or(Vec3::ZERO);
        let scale = match triples.get("scale").copied() {
            Some(s) => positive_triple("scale", s)?,
            None => Vec3::ONE,
        };

        if self.instances.len() >= self.limits.max_primitives {
            return Err(ExecError::LimitExceeded {
                limit: LimitKind::Primitives,
                span,
            });
        }
        self.instances.push(PrimitiveInstance {
            shape,
            location,
            rotation,
            scale,
        });
        Ok(())
    }
}

fn require_finite(v: f64, span: Span) -> Result<f64, ExecError> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(ExecError::Numeric {
            span,
            message: "expression produced a non-finite value".into(),
        })
    }
}

/// Loop bounds must be exact integers within the f64-safe range.
fn require_integer(v: f64, span: Span) -> Result<i64, ExecError> {
    if v.is_finite() && v == v.trunc() && v.abs() <= 9_007_199_254_740_992.0 {
        Ok(v as i64)
    } else {
        Err(ExecError::Numeric {
            span,
            message: format!("loop bound must be an integer, got {v}"),
        })
    }
}
