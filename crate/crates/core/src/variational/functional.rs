use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use crate::expr::{Expr, ParamBindings, Var};

use super::{integrate_pieces, merge_breaks, Lagrangian, Path, VariationalError};

const RTOL: f64 = 1e-12;
const ENDPOINT_TOL: f64 = 1e-10;

type Sampler = Arc<dyn Fn(f64) -> Result<(f64, f64), VariationalError> + Send + Sync>;

#[derive(Clone)]
enum Kind {
    Analytic { v: Expr, dv: Expr },
    Sampled { f: Sampler, breaks: Vec<f64> },
}

/// A variation `v` in `C1_0([a, b])`.
#[derive(Clone)]
pub struct TestDirection {
    kind: Kind,
    a: f64,
    b: f64,
}

impl fmt::Debug for TestDirection {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            Kind::Analytic { v, .. } => write!(f, "TestDirection({v} on [{}, {}])", self.a, self.b),
            Kind::Sampled { .. } => {
                write!(f, "TestDirection(<sampled> on [{}, {}])", self.a, self.b)
            }
        }
    }
}

impl TestDirection {
    /// A closed-form direction in `x`; it must vanish at both ends.
    pub fn new(v: Expr, a: f64, b: f64) -> Result<Self, VariationalError> {
        if v.contains_var(Var::Y) || v.contains_var(Var::Yp) {
            return Err(VariationalError::InvalidInput(format!(
                "direction `{v}` must depend on x only"
            )));
        }
        if let Some(p) = v.params().into_iter().next() {
            return Err(crate::expr::ExprError::UnboundParameter(p).into());
        }
        let dv = v.diff(Var::X);
        Self::validated(Kind::Analytic { v, dv }, a, b)
    }

    /// A direction given by a function returning `(v(x), v'(x))`, smooth
    /// between the listed breakpoints.
    pub fn from_fn<F>(f: F, a: f64, b: f64, breaks: Vec<f64>) -> Result<Self, VariationalError>
    where
        F: Fn(f64) -> Result<(f64, f64), VariationalError> + Send + Sync + 'static,
    {
        Self::validated(
            Kind::Sampled {
                f: Arc::new(f),
                breaks,
            },
            a,
            b,
        )
    }

    /// `sin(k pi (x - a) / (b - a))`.
    pub fn sine(k: u32, a: f64, b: f64) -> Self {
        let w = k as f64 * PI / (b - a);
        let arg = Expr::mul(Expr::num(w), Expr::sub(Expr::x(), Expr::num(a))).simplify();
        let v = Expr::call(crate::expr::Func::Sin, arg);
        let dv = v.diff(Var::X);
        TestDirection {
            kind: Kind::Analytic { v, dv },
            a,
            b,
        }
    }

    fn validated(kind: Kind, a: f64, b: f64) -> Result<Self, VariationalError> {
        if !(a < b) {
            return Err(VariationalError::InvalidInput(format!(
                "need a < b, got [{a}, {b}]"
            )));
        }
        let d = TestDirection { kind, a, b };
        for end in [a, b] {
            let (v, _) = d.eval(end)?;
            if v.abs() > ENDPOINT_TOL {
                return Err(VariationalError::InvalidInput(format!(
                    "direction must vanish at the endpoints, v({end}) = {v}"
                )));
            }
        }
        Ok(d)
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn expr(&self) -> Option<&Expr> {
        match &self.kind {
            Kind::Analytic { v, .. } => Some(v),
            Kind::Sampled { .. } => None,
        }
    }

    /// `(v(x), v'(x))`.
    pub fn eval(&self, x: f64) -> Result<(f64, f64), VariationalError> {
        match &self.kind {
            Kind::Analytic { v, dv } => {
                let none = ParamBindings::new();
                Ok((v.eval_x(x, &none)?, dv.eval_x(x, &none)?))
            }
            Kind::Sampled { f, .. } => f(x),
        }
    }

    fn breaks(&self) -> &[f64] {
        match &self.kind {
            Kind::Analytic { .. } => &[],
            Kind::Sampled { breaks, .. } => breaks,
        }
    }
}

fn span(p: &Path, v: &TestDirection) -> Result<Vec<f64>, VariationalError> {
    let tol = 1e-9 * (p.b() - p.a()).abs().max(1.0);
    if (p.a() - v.a).abs() > tol || (p.requested_b() - v.b).abs() > tol {
        return Err(VariationalError::InvalidInput(format!(
            "direction domain [{}, {}] differs from path domain [{}, {}]",
            v.a,
            v.b,
            p.a(),
            p.requested_b()
        )));
    }
    Ok(merge_breaks(
        p.start(),
        p.b(),
        p.breakpoints()
            .into_iter()
            .chain(v.breaks().iter().copied()),
    ))
}

/// `J(y) = int L(x, y, y') dx` over the covered range of the path.
pub fn action(l: &Lagrangian, p: &Path) -> Result<f64, VariationalError> {
    let breaks = merge_breaks(p.start(), p.b(), p.breakpoints());
    integrate_pieces(
        |x| {
            let (y, yp) = p.point(x)?;
            Ok(l.value(x, y, yp)?)
        },
        &breaks,
        RTOL,
    )
}

/// `dJ(y, v) = int (v D2L + v' D3L) dx`.
pub fn first_variation(
    l: &Lagrangian,
    p: &Path,
    v: &TestDirection,
) -> Result<f64, VariationalError> {
    let d = l.partials();
    integrate_pieces(
        |x| {
            let (y, yp) = p.point(x)?;
            let (w, dw) = v.eval(x)?;
            Ok(w * l.at(&d.d2, x, y, yp)? + dw * l.at(&d.d3, x, y, yp)?)
        },
        &span(p, v)?,
        RTOL,
    )
}

/// `int (P v'^2 + Q v^2) dx`, with no factor 1/2.
pub fn second_variation(
    l: &Lagrangian,
    p: &Path,
    v: &TestDirection,
) -> Result<f64, VariationalError> {
    integrate_pieces(
        |x| {
            let (y, yp) = p.point(x)?;
            let ypp = p.ypp(x)?;
            let (w, dw) = v.eval(x)?;
            Ok(l.p_coefficient(x, y, yp)? * dw * dw + l.q_coefficient(x, y, yp, ypp)? * w * w)
        },
        &span(p, v)?,
        RTOL,
    )
}

/// `int (D22L v^2 + 2 D23L v v' + D33L v'^2) dx`, the second derivative of
/// `t -> J(y + t v)` at zero.
pub fn second_variation_bilinear(
    l: &Lagrangian,
    p: &Path,
    v: &TestDirection,
) -> Result<f64, VariationalError> {
    let d = l.partials();
    integrate_pieces(
        |x| {
            let (y, yp) = p.point(x)?;
            let (w, dw) = v.eval(x)?;
            Ok(l.at(&d.d22, x, y, yp)? * w * w
                + 2.0 * l.at(&d.d23, x, y, yp)? * w * dw
                + l.at(&d.d33, x, y, yp)? * dw * dw)
        },
        &span(p, v)?,
        RTOL,
    )
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FriedrichsCheck {
    /// `int v^2`.
    pub lhs: f64,
    /// `(b - a)^2 / 2 * int v'^2`.
    pub rhs: f64,
    pub holds: bool,
}

pub fn friedrichs_check(v: &TestDirection) -> Result<FriedrichsCheck, VariationalError> {
    let breaks = merge_breaks(v.a, v.b, v.breaks().iter().copied());
    let lhs = integrate_pieces(|x| Ok(v.eval(x)?.0.powi(2)), &breaks, RTOL)?;
    let energy = integrate_pieces(|x| Ok(v.eval(x)?.1.powi(2)), &breaks, RTOL)?;
    let rhs = 0.5 * (v.b - v.a).powi(2) * energy;
    Ok(FriedrichsCheck {
        lhs,
        rhs,
        holds: lhs <= rhs + 1e-12,
    })
}

/// Lower bound `c` in `d2J(y, v) >= c ||v||^2_{H1}` given a margin `sigma`
/// with `d2J >= sigma int v'^2`.
pub fn coercivity_constant(sigma: f64, a: f64, b: f64) -> f64 {
    sigma / (1.0 + 0.5 * (b - a).powi(2))
}
