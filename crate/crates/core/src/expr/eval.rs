use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{BinOp, Expr, ExprError, Func, Var};

/// Parameter name to value map.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ParamBindings(BTreeMap<String, f64>);

impl ParamBindings {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I, K>(pairs: I) -> Self
    where
        I: IntoIterator<Item = (K, f64)>,
        K: Into<String>,
    {
        ParamBindings(pairs.into_iter().map(|(k, v)| (k.into(), v)).collect())
    }

    pub fn insert(&mut self, name: impl Into<String>, value: f64) -> Option<f64> {
        self.0.insert(name.into(), value)
    }

    pub fn get(&self, name: &str) -> Option<f64> {
        self.0.get(name).copied()
    }

    pub fn contains(&self, name: &str) -> bool {
        self.0.contains_key(name)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, f64)> {
        self.0.iter().map(|(k, v)| (k.as_str(), *v))
    }

    pub fn names(&self) -> Vec<&str> {
        self.0.keys().map(String::as_str).collect()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

pub(super) struct Point {
    pub x: f64,
    pub y: f64,
    pub yp: f64,
}

fn domain(e: &Expr, reason: &str) -> ExprError {
    ExprError::Domain {
        expr: e.to_string(),
        reason: reason.to_string(),
    }
}

pub(super) fn eval(e: &Expr, at: &Point, params: &ParamBindings) -> Result<f64, ExprError> {
    let value = match e {
        Expr::Num(c) => return Ok(*c),
        Expr::Var(Var::X) => return Ok(at.x),
        Expr::Var(Var::Y) => return Ok(at.y),
        Expr::Var(Var::Yp) => return Ok(at.yp),
        Expr::Param(p) => {
            return params
                .get(p)
                .ok_or_else(|| ExprError::UnboundParameter(p.clone()))
        }
        Expr::Neg(inner) => -eval(inner, at, params)?,
        Expr::Bin(op, l, r) => {
            let a = eval(l, at, params)?;
            let b = eval(r, at, params)?;
            match op {
                BinOp::Add => a + b,
                BinOp::Sub => a - b,
                BinOp::Mul => a * b,
                BinOp::Div => {
                    if b == 0.0 {
                        return Err(domain(e, "division by zero"));
                    }
                    a / b
                }
                BinOp::Pow => {
                    if a < 0.0 && b.fract() != 0.0 {
                        return Err(domain(e, "non-integer power of a negative number"));
                    }
                    if a == 0.0 && b < 0.0 {
                        return Err(domain(e, "negative power of zero"));
                    }
                    if b == 2.0 {
                        a * a
                    } else if b.fract() == 0.0 && b.abs() <= 64.0 {
                        a.powi(b as i32)
                    } else {
                        a.powf(b)
                    }
                }
            }
        }
        Expr::Call(f, arg) => {
            let u = eval(arg, at, params)?;
            match f {
                Func::Sin => u.sin(),
                Func::Cos => u.cos(),
                Func::Tan => u.tan(),
                Func::Sec => {
                    let c = u.cos();
                    if c == 0.0 {
                        return Err(domain(e, "pole of sec"));
                    }
                    1.0 / c
                }
                Func::Exp => u.exp(),
                Func::Log => {
                    if u <= 0.0 {
                        return Err(domain(e, "logarithm of a non-positive number"));
                    }
                    u.ln()
                }
                Func::Sqrt => {
                    if u < 0.0 {
                        return Err(domain(e, "square root of a negative number"));
                    }
                    u.sqrt()
                }
                Func::Sinh => u.sinh(),
                Func::Cosh => u.cosh(),
                Func::Tanh => u.tanh(),
                Func::Asinh => u.asinh(),
                Func::Atan => u.atan(),
                Func::Abs => u.abs(),
                Func::Sign => {
                    if u > 0.0 {
                        1.0
                    } else if u < 0.0 {
                        -1.0
                    } else {
                        0.0
                    }
                }
            }
        }
    };
    if value.is_finite() {
        Ok(value)
    } else {
        Err(domain(e, "non-finite result"))
    }
}
