//! Closed-form expressions over the jet variables `x`, `y`, `yp` and named
//! parameters.
//!
//! Lagrangians, analytic paths, parametric solution families and test
//! directions are all written as [`Expr`] values. The module provides a small
//! recursive-descent parser, an evaluator with domain checking, exact symbolic
//! partial differentiation and a rule-based simplifier.

mod diff;
mod eval;
mod parse;
mod render;
mod simplify;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use thiserror::Error;

pub use eval::ParamBindings;
pub use parse::{parse, parse_declared};

/// Independent and dependent variables of a first-order Lagrangian.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Var {
    X,
    Y,
    Yp,
}

impl Var {
    pub fn name(self) -> &'static str {
        match self {
            Var::X => "x",
            Var::Y => "y",
            Var::Yp => "yp",
        }
    }

    pub fn from_name(name: &str) -> Option<Var> {
        match name {
            "x" => Some(Var::X),
            "y" => Some(Var::Y),
            "yp" => Some(Var::Yp),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BinOp {
    Add,
    Sub,
    Mul,
    Div,
    Pow,
}

impl BinOp {
    pub fn symbol(self) -> char {
        match self {
            BinOp::Add => '+',
            BinOp::Sub => '-',
            BinOp::Mul => '*',
            BinOp::Div => '/',
            BinOp::Pow => '^',
        }
    }
}

/// Supported elementary functions.
///
/// `sign` is not needed by any Lagrangian directly; it is the derivative of
/// `abs` (with `sign(0) = 0`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Func {
    Sin,
    Cos,
    Tan,
    Sec,
    Exp,
    Log,
    Sqrt,
    Sinh,
    Cosh,
    Tanh,
    Asinh,
    Atan,
    Abs,
    Sign,
}

impl Func {
    pub const ALL: [Func; 14] = [
        Func::Sin,
        Func::Cos,
        Func::Tan,
        Func::Sec,
        Func::Exp,
        Func::Log,
        Func::Sqrt,
        Func::Sinh,
        Func::Cosh,
        Func::Tanh,
        Func::Asinh,
        Func::Atan,
        Func::Abs,
        Func::Sign,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Func::Sin => "sin",
            Func::Cos => "cos",
            Func::Tan => "tan",
            Func::Sec => "sec",
            Func::Exp => "exp",
            Func::Log => "log",
            Func::Sqrt => "sqrt",
            Func::Sinh => "sinh",
            Func::Cosh => "cosh",
            Func::Tanh => "tanh",
            Func::Asinh => "asinh",
            Func::Atan => "atan",
            Func::Abs => "abs",
            Func::Sign => "sign",
        }
    }

    pub fn from_name(name: &str) -> Option<Func> {
        Func::ALL.iter().copied().find(|f| f.name() == name)
    }
}

/// Immutable expression tree.
///
/// Negative literals are stored as `Num(c)` with `c < 0`; the smart
/// constructors and the parser never produce `Neg(Num(_))`.
#[derive(Debug, Clone, PartialEq)]
pub enum Expr {
    Num(f64),
    Var(Var),
    Param(String),
    Neg(Box<Expr>),
    Bin(BinOp, Box<Expr>, Box<Expr>),
    Call(Func, Box<Expr>),
}

/// Symbol used as the differentiation variable.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Symbol {
    Var(Var),
    Param(String),
}

impl From<Var> for Symbol {
    fn from(v: Var) -> Self {
        Symbol::Var(v)
    }
}

impl From<&str> for Symbol {
    fn from(name: &str) -> Self {
        match Var::from_name(name) {
            Some(v) => Symbol::Var(v),
            None => Symbol::Param(name.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ExprError {
    #[error("syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
    #[error("unknown function `{name}` at offset {offset}")]
    UnknownFunction { name: String, offset: usize },
    #[error("unknown variable `{name}` at offset {offset}")]
    UnknownVariable { name: String, offset: usize },
    #[error("unbound parameter `{0}`")]
    UnboundParameter(String),
    #[error("domain violation in `{expr}`: {reason}")]
    Domain { expr: String, reason: String },
}

impl Expr {
    pub fn num(c: f64) -> Expr {
        Expr::Num(c)
    }

    pub fn var(v: Var) -> Expr {
        Expr::Var(v)
    }

    pub fn x() -> Expr {
        Expr::Var(Var::X)
    }

    pub fn param(name: impl Into<String>) -> Expr {
        Expr::Param(name.into())
    }

    #[allow(clippy::should_implement_trait)]
    pub fn neg(e: Expr) -> Expr {
        match e {
            Expr::Num(c) => Expr::Num(-c),
            other => Expr::Neg(Box::new(other)),
        }
    }

    pub fn bin(op: BinOp, l: Expr, r: Expr) -> Expr {
        Expr::Bin(op, Box::new(l), Box::new(r))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn add(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Add, l, r)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn sub(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Sub, l, r)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn mul(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Mul, l, r)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn div(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Div, l, r)
    }

    pub fn pow(l: Expr, r: Expr) -> Expr {
        Expr::bin(BinOp::Pow, l, r)
    }

    pub fn call(f: Func, arg: Expr) -> Expr {
        Expr::Call(f, Box::new(arg))
    }

    pub fn as_num(&self) -> Option<f64> {
        match self {
            Expr::Num(c) => Some(*c),
            _ => None,
        }
    }

    /// Number of nodes in the tree.
    pub fn size(&self) -> usize {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Param(_) => 1,
            Expr::Neg(e) | Expr::Call(_, e) => 1 + e.size(),
            Expr::Bin(_, l, r) => 1 + l.size() + r.size(),
        }
    }

    pub fn contains_var(&self, v: Var) -> bool {
        self.contains(&Symbol::Var(v))
    }

    pub fn contains(&self, s: &Symbol) -> bool {
        match (self, s) {
            (Expr::Var(a), Symbol::Var(b)) => a == b,
            (Expr::Param(a), Symbol::Param(b)) => a == b,
            (Expr::Num(_) | Expr::Var(_) | Expr::Param(_), _) => false,
            (Expr::Neg(e) | Expr::Call(_, e), _) => e.contains(s),
            (Expr::Bin(_, l, r), _) => l.contains(s) || r.contains(s),
        }
    }

    /// Names of all parameters referenced by the expression.
    pub fn params(&self) -> BTreeSet<String> {
        let mut out = BTreeSet::new();
        self.collect_params(&mut out);
        out
    }

    fn collect_params(&self, out: &mut BTreeSet<String>) {
        match self {
            Expr::Param(p) => {
                out.insert(p.clone());
            }
            Expr::Num(_) | Expr::Var(_) => {}
            Expr::Neg(e) | Expr::Call(_, e) => e.collect_params(out),
            Expr::Bin(_, l, r) => {
                l.collect_params(out);
                r.collect_params(out);
            }
        }
    }

    /// Replaces every occurrence of a variable by another expression.
    pub fn substitute(&self, v: Var, with: &Expr) -> Expr {
        self.map_leaves(&|leaf| match leaf {
            Expr::Var(w) if *w == v => Some(with.clone()),
            _ => None,
        })
    }

    /// Replaces bound parameters by their numeric values; unbound ones are
    /// left in place.
    pub fn bind(&self, params: &ParamBindings) -> Expr {
        self.map_leaves(&|leaf| match leaf {
            Expr::Param(p) => params.get(p).map(Expr::Num),
            _ => None,
        })
    }

    /// Replaces named parameters by expressions.
    pub fn substitute_params(&self, map: &BTreeMap<String, Expr>) -> Expr {
        self.map_leaves(&|leaf| match leaf {
            Expr::Param(p) => map.get(p).cloned(),
            _ => None,
        })
    }

    fn map_leaves(&self, f: &dyn Fn(&Expr) -> Option<Expr>) -> Expr {
        match self {
            Expr::Num(_) | Expr::Var(_) | Expr::Param(_) => f(self).unwrap_or_else(|| self.clone()),
            Expr::Neg(e) => Expr::neg(e.map_leaves(f)),
            Expr::Call(g, e) => Expr::call(*g, e.map_leaves(f)),
            Expr::Bin(op, l, r) => Expr::bin(*op, l.map_leaves(f), r.map_leaves(f)),
        }
    }

    /// Exact partial derivative, simplified.
    pub fn diff(&self, wrt: impl Into<Symbol>) -> Expr {
        diff::diff(self, &wrt.into()).simplify()
    }

    pub fn simplify(&self) -> Expr {
        simplify::simplify(self)
    }

    pub fn eval(&self, x: f64, y: f64, yp: f64, params: &ParamBindings) -> Result<f64, ExprError> {
        eval::eval(self, &eval::Point { x, y, yp }, params)
    }

    /// Evaluates an expression that only depends on `x` and bound parameters.
    pub fn eval_x(&self, x: f64, params: &ParamBindings) -> Result<f64, ExprError> {
        self.eval(x, 0.0, 0.0, params)
    }
}

impl fmt::Display for Expr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&render::render(self))
    }
}
