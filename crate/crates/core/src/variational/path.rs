use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::expr::{Expr, ParamBindings, Var};
use crate::odeint::{integrate, FieldError, OdeSolution, Options, Status};

use super::{Lagrangian, VariationalError, D33_THRESHOLD};

#[derive(Debug, Clone)]
enum Kind {
    Analytic {
        y: Expr,
        yp: Expr,
        ypp: Expr,
        params: ParamBindings,
    },
    Numeric {
        sol: Arc<OdeSolution>,
        lagrangian: Arc<Lagrangian>,
    },
}

/// A candidate critical path on `[a, b]`.
///
/// Numeric paths may start slightly to the right of `a` (singular left
/// endpoints) and may end before the requested `b` when the integration blew
/// up; `start()` and `b()` report the range actually covered. Between `a` and
/// `start()` a numeric path is held at its first value.
#[derive(Debug, Clone)]
pub struct Path {
    kind: Kind,
    a: f64,
    b: f64,
    start: f64,
    requested_b: f64,
}

impl Path {
    /// A closed-form path `y(x)`; its derivatives are taken symbolically.
    pub fn analytic(
        y: Expr,
        params: &ParamBindings,
        a: f64,
        b: f64,
    ) -> Result<Self, VariationalError> {
        if !(a < b) {
            return Err(VariationalError::InvalidInput(format!(
                "need a < b, got [{a}, {b}]"
            )));
        }
        if y.contains_var(Var::Y) || y.contains_var(Var::Yp) {
            return Err(VariationalError::InvalidInput(format!(
                "path `{y}` must depend on x only"
            )));
        }
        let y = y.bind(params).simplify();
        if let Some(p) = y.params().into_iter().next() {
            return Err(crate::expr::ExprError::UnboundParameter(p).into());
        }
        let yp = y.diff(Var::X);
        let ypp = yp.diff(Var::X);
        Ok(Path {
            kind: Kind::Analytic {
                y,
                yp,
                ypp,
                params: params.clone(),
            },
            a,
            b,
            start: a,
            requested_b: b,
        })
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// First abscissa at which the path is genuinely available.
    pub fn start(&self) -> f64 {
        self.start
    }

    /// Right end asked for at construction; differs from `b()` after a
    /// blow-up.
    pub fn requested_b(&self) -> f64 {
        self.requested_b
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self.kind, Kind::Numeric { .. })
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.kind {
            Kind::Analytic { y, .. } => Some(y),
            Kind::Numeric { .. } => None,
        }
    }

    pub fn solution(&self) -> Option<&OdeSolution> {
        match &self.kind {
            Kind::Numeric { sol, .. } => Some(sol),
            Kind::Analytic { .. } => None,
        }
    }

    fn check(&self, x: f64) -> Result<f64, VariationalError> {
        let slack = 1e-12 * (self.b - self.a).max(1.0);
        if !(x >= self.a - slack && x <= self.b + slack) {
            return Err(VariationalError::OutOfDomain {
                x,
                a: self.a,
                b: self.b,
            });
        }
        Ok(x.clamp(self.start, self.b))
    }

    /// `(y, y')` at `x`.
    pub fn point(&self, x: f64) -> Result<(f64, f64), VariationalError> {
        match &self.kind {
            Kind::Analytic { y, yp, params, .. } => {
                self.check(x)?;
                Ok((y.eval_x(x, params)?, yp.eval_x(x, params)?))
            }
            Kind::Numeric { sol, .. } => {
                let s = sol.eval(self.check(x)?)?;
                Ok((s[0], s[1]))
            }
        }
    }

    pub fn y(&self, x: f64) -> Result<f64, VariationalError> {
        Ok(self.point(x)?.0)
    }

    pub fn yp(&self, x: f64) -> Result<f64, VariationalError> {
        Ok(self.point(x)?.1)
    }

    /// `y''` at `x`: symbolic for analytic paths, from the explicit
    /// Euler-Lagrange equation for numeric ones.
    pub fn ypp(&self, x: f64) -> Result<f64, VariationalError> {
        match &self.kind {
            Kind::Analytic { ypp, params, .. } => {
                self.check(x)?;
                Ok(ypp.eval_x(x, params)?)
            }
            Kind::Numeric { sol, lagrangian } => {
                let xc = self.check(x)?;
                let s = sol.eval(xc)?;
                lagrangian.explicit_ypp(xc, s[0], s[1])
            }
        }
    }

    /// Points where the path is only piecewise smooth (integration nodes).
    pub fn breakpoints(&self) -> Vec<f64> {
        match &self.kind {
            Kind::Analytic { .. } => Vec::new(),
            Kind::Numeric { sol, .. } => sol.nodes().to_vec(),
        }
    }

    /// `y + t v` for an analytic path and a direction in `x`.
    pub fn perturbed(&self, v: &Expr, t: f64) -> Result<Path, VariationalError> {
        match &self.kind {
            Kind::Analytic { y, params, .. } => {
                let e = Expr::add(y.clone(), Expr::mul(Expr::num(t), v.clone()));
                Path::analytic(e, params, self.a, self.b)
            }
            Kind::Numeric { .. } => Err(VariationalError::InvalidInput(
                "only analytic paths can be perturbed symbolically".into(),
            )),
        }
    }
}

/// Euler-Lagrange residual `D2L - d/dx D3L` along `p` at `x`.
///
/// Numeric paths use the `y''` given by the explicit form of the equation.
pub fn el_residual(l: &Lagrangian, p: &Path, x: f64) -> Result<f64, VariationalError> {
    let xc = p.check(x)?;
    let (y, yp) = p.point(xc)?;
    Ok(l.residual(xc, y, yp, p.ypp(xc)?)?)
}

/// Residual of a numeric path with `y''` taken from the derivative of the
/// interpolated `y'`; measures how well the interpolant itself satisfies
/// the equation.
pub fn interpolant_residual(l: &Lagrangian, p: &Path, x: f64) -> Result<f64, VariationalError> {
    let Some(sol) = p.solution() else {
        return el_residual(l, p, x);
    };
    let xc = p.check(x)?;
    let s = sol.eval(xc)?;
    let d = sol.eval_derivative(xc)?;
    Ok(l.residual(xc, s[0], s[1], d[1])?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriticalCheck {
    pub max_residual: f64,
    pub worst_x: f64,
    /// `1e-8 (1 + max |D2L|)` over the grid.
    pub tolerance: f64,
    pub passes: bool,
    /// Largest [`interpolant_residual`] on the grid, for numeric paths.
    pub interpolant_residual: Option<f64>,
}

/// Samples the Euler-Lagrange residual on `n` equispaced points of the
/// covered range.
pub fn check_critical(
    l: &Lagrangian,
    p: &Path,
    n: usize,
) -> Result<CriticalCheck, VariationalError> {
    let (lo, hi) = (p.start(), p.b());
    let mut max_residual: f64 = 0.0;
    let mut worst_x = lo;
    let mut max_d2: f64 = 0.0;
    let mut interp: Option<f64> = p.is_numeric().then_some(0.0);
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let r = el_residual(l, p, x)?.abs();
        let (y, yp) = p.point(x)?;
        max_d2 = max_d2.max(l.at(&l.partials.d2, x, y, yp)?.abs());
        if r > max_residual {
            max_residual = r;
            worst_x = x;
        }
        if let Some(m) = interp.as_mut() {
            *m = m.max(interpolant_residual(l, p, x)?.abs());
        }
    }
    let tolerance = 1e-8 * (1.0 + max_d2);
    Ok(CriticalCheck {
        max_residual,
        worst_x,
        tolerance,
        passes: max_residual <= tolerance,
        interpolant_residual: interp,
    })
}

#[derive(Debug, Clone)]
pub struct IvpOptions {
    pub ode: Options,
    /// Start offset used when `D33L` vanishes at `a`; defaults to
    /// `1e-6 max(1, b - a)`.
    pub epsilon: Option<f64>,
}

impl Default for IvpOptions {
    fn default() -> Self {
        IvpOptions {
            ode: Options::default(),
            epsilon: None,
        }
    }
}

/// Integrates the explicit Euler-Lagrange equation from `(a, y_a, y'_a)`.
///
/// If `D33L` vanishes at the initial point the integration starts at
/// `a + epsilon` with the same initial data. A blow-up truncates the path;
/// `D33L` vanishing along the way aborts.
pub fn solve_el_ivp(
    l: &Lagrangian,
    a: f64,
    b: f64,
    y_a: f64,
    yp_a: f64,
    opts: &IvpOptions,
) -> Result<Path, VariationalError> {
    if !(a < b) {
        return Err(VariationalError::InvalidInput(format!(
            "need a < b, got [{a}, {b}]"
        )));
    }
    let singular = match l.p_coefficient(a, y_a, yp_a) {
        Ok(d33) => d33.abs() < D33_THRESHOLD,
        Err(_) => true,
    };
    let start = if singular {
        a + opts.epsilon.unwrap_or(1e-6 * (b - a).max(1.0))
    } else {
        a
    };
    let field = |x: f64, s: &[f64], out: &mut [f64]| -> Result<(), FieldError> {
        out[0] = s[1];
        out[1] = match l.explicit_ypp(x, s[0], s[1]) {
            Ok(v) => v,
            Err(VariationalError::Degenerate { x, value }) => {
                return Err(FieldError::Fatal(format!(
                    "D33L vanishes at x = {x} (value {value})"
                )))
            }
            Err(e) => return Err(FieldError::Domain(e.to_string())),
        };
        Ok(())
    };
    let sol = integrate(field, start, &[y_a, yp_a], b, &opts.ode, &[])?;
    let end = match sol.status() {
        Status::Completed | Status::EventStopped => b,
        Status::BlowUp { .. } | Status::StepFailure { .. } => sol.x_end(),
    };
    Ok(Path {
        kind: Kind::Numeric {
            sol: Arc::new(sol),
            lagrangian: Arc::new(l.clone()),
        },
        a,
        b: end,
        start,
        requested_b: b,
    })
}
