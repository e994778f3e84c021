//! Variational objects built from a Lagrangian `L(x, y, y')`: the
//! Euler-Lagrange residual and initial value solver, the action and its first
//! and second variations, convexity certificates and the Friedrichs
//! inequality.

mod convexity;
mod functional;
mod path;

use thiserror::Error;

use crate::expr::{parse, Expr, ExprError, ParamBindings, Var};
use crate::odeint::OdeError;

pub use convexity::{convexity_certificate, Convexity, ConvexityCertificate, Grid, Region};
pub use functional::{
    action, coercivity_constant, first_variation, friedrichs_check, second_variation,
    second_variation_bilinear, FriedrichsCheck, TestDirection,
};
pub use path::{check_critical, el_residual, solve_el_ivp, CriticalCheck, IvpOptions, Path};

/// Below this magnitude `D33L` is treated as zero.
pub const D33_THRESHOLD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum VariationalError {
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("D33L vanishes at x = {x} (value {value}); y'' is unavailable")]
    Degenerate { x: f64, value: f64 },
    #[error("x = {x} lies outside [{a}, {b}]")]
    OutOfDomain { x: f64, a: f64, b: f64 },
    #[error("integral did not settle: {0}")]
    Quadrature(String),
    #[error("{0}")]
    InvalidInput(String),
}

/// Second partials of `D3L` needed for the total derivative of `D23L`.
#[derive(Debug, Clone, PartialEq)]
pub struct Partials {
    pub d1: Expr,
    pub d2: Expr,
    pub d3: Expr,
    pub d13: Expr,
    pub d22: Expr,
    pub d23: Expr,
    pub d33: Expr,
    /// `D1(D23L)`, `D2(D23L)`, `D3(D23L)`.
    pub d123: Expr,
    pub d223: Expr,
    pub d233: Expr,
}

/// A Lagrangian with its parameters substituted and its partial derivatives
/// cached.
#[derive(Debug, Clone, PartialEq)]
pub struct Lagrangian {
    source: Expr,
    params: ParamBindings,
    expr: Expr,
    partials: Partials,
}

impl Lagrangian {
    pub fn new(source: Expr, params: ParamBindings) -> Result<Self, VariationalError> {
        if let Some(p) = source.params().into_iter().find(|p| !params.contains(p)) {
            return Err(ExprError::UnboundParameter(p).into());
        }
        let expr = source.bind(&params).simplify();
        let d1 = expr.diff(Var::X);
        let d2 = expr.diff(Var::Y);
        let d3 = expr.diff(Var::Yp);
        let d13 = d3.diff(Var::X);
        let d22 = d2.diff(Var::Y);
        let d23 = d3.diff(Var::Y);
        let d33 = d3.diff(Var::Yp);
        let d123 = d23.diff(Var::X);
        let d223 = d23.diff(Var::Y);
        let d233 = d23.diff(Var::Yp);
        Ok(Lagrangian {
            source,
            params,
            expr,
            partials: Partials {
                d1,
                d2,
                d3,
                d13,
                d22,
                d23,
                d33,
                d123,
                d223,
                d233,
            },
        })
    }

    pub fn parse(source: &str, params: ParamBindings) -> Result<Self, VariationalError> {
        Self::new(parse(source)?, params)
    }

    /// The expression as given, before parameter substitution.
    pub fn source(&self) -> &Expr {
        &self.source
    }

    pub fn params(&self) -> &ParamBindings {
        &self.params
    }

    /// The bound and simplified integrand.
    pub fn expr(&self) -> &Expr {
        &self.expr
    }

    pub fn partials(&self) -> &Partials {
        &self.partials
    }

    pub(crate) fn at(&self, e: &Expr, x: f64, y: f64, yp: f64) -> Result<f64, ExprError> {
        e.eval(x, y, yp, &self.params)
    }

    pub fn value(&self, x: f64, y: f64, yp: f64) -> Result<f64, ExprError> {
        self.at(&self.expr, x, y, yp)
    }

    /// `y''` from the Euler-Lagrange equation solved for the highest
    /// derivative.
    pub fn explicit_ypp(&self, x: f64, y: f64, yp: f64) -> Result<f64, VariationalError> {
        let p = &self.partials;
        let d33 = self.at(&p.d33, x, y, yp)?;
        if d33.abs() < D33_THRESHOLD {
            return Err(VariationalError::Degenerate { x, value: d33 });
        }
        let rhs = self.at(&p.d2, x, y, yp)?
            - self.at(&p.d13, x, y, yp)?
            - self.at(&p.d23, x, y, yp)? * yp;
        Ok(rhs / d33)
    }

    /// `D2L - (D13L + D23L y' + D33L y'')`.
    pub fn residual(&self, x: f64, y: f64, yp: f64, ypp: f64) -> Result<f64, ExprError> {
        let p = &self.partials;
        let total = self.at(&p.d13, x, y, yp)?
            + self.at(&p.d23, x, y, yp)? * yp
            + self.at(&p.d33, x, y, yp)? * ypp;
        Ok(self.at(&p.d2, x, y, yp)? - total)
    }

    /// Legendre coefficient `P = D33L`.
    pub fn p_coefficient(&self, x: f64, y: f64, yp: f64) -> Result<f64, ExprError> {
        self.at(&self.partials.d33, x, y, yp)
    }

    /// `Q = D22L - d/dx D23L` with the total derivative taken along a path
    /// through `(x, y, y', y'')`.
    pub fn q_coefficient(&self, x: f64, y: f64, yp: f64, ypp: f64) -> Result<f64, ExprError> {
        let p = &self.partials;
        let total = self.at(&p.d123, x, y, yp)?
            + self.at(&p.d223, x, y, yp)? * yp
            + self.at(&p.d233, x, y, yp)? * ypp;
        Ok(self.at(&p.d22, x, y, yp)? - total)
    }
}

/// Composite Gauss-Legendre integration over consecutive pieces, doubling the
/// panel count on each piece until the change drops below `rtol` times the
/// integral of `|f|` over the piece, or over all pieces (estimated with one
/// panel each).
pub(crate) fn integrate_pieces<F>(
    mut f: F,
    breaks: &[f64],
    rtol: f64,
) -> Result<f64, VariationalError>
where
    F: FnMut(f64) -> Result<f64, VariationalError>,
{
    use crate::odeint::GaussLegendre;
    thread_local! {
        static RULE: GaussLegendre = GaussLegendre::new(16);
    }
    let panel_sum =
        |f: &mut F, lo: f64, hi: f64, panels: usize| -> Result<(f64, f64), VariationalError> {
            RULE.with(|rule| {
                let width = (hi - lo) / panels as f64;
                let (mut acc, mut abs) = (0.0, 0.0);
                for k in 0..panels {
                    let pl = lo + width * k as f64;
                    let ph = if k + 1 == panels { hi } else { pl + width };
                    let half = 0.5 * (ph - pl);
                    let mid = 0.5 * (ph + pl);
                    for (t, w) in rule.nodes.iter().zip(&rule.weights) {
                        let x = mid + half * t;
                        let v = f(x)?;
                        if !v.is_finite() {
                            return Err(VariationalError::Quadrature(format!(
                                "non-finite integrand {v} at x = {x}"
                            )));
                        }
                        acc += w * half * v;
                        abs += w * half * v.abs();
                    }
                }
                Ok((acc, abs))
            })
        };
    let mut coarse = Vec::with_capacity(breaks.len());
    let mut global_abs = 0.0;
    for pair in breaks.windows(2) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi <= lo {
            coarse.push(0.0);
            continue;
        }
        let (v, abs) = panel_sum(&mut f, lo, hi, 1)?;
        coarse.push(v);
        global_abs += abs;
    }
    let mut total = 0.0;
    for (pair, first) in breaks.windows(2).zip(coarse) {
        let (lo, hi) = (pair[0], pair[1]);
        if hi <= lo {
            continue;
        }
        let mut panels = 1;
        let mut prev = first;
        loop {
            panels *= 2;
            let (cur, abs) = panel_sum(&mut f, lo, hi, panels)?;
            let tol = rtol * abs.max(global_abs) + 1e-300;
            if (cur - prev).abs() <= tol || (cur - prev).abs() <= 32.0 * f64::EPSILON * abs {
                total += cur;
                break;
            }
            if panels >= 1 << 12 {
                return Err(VariationalError::Quadrature(format!(
                    "no convergence on [{lo}, {hi}] after {panels} panels"
                )));
            }
            prev = cur;
        }
    }
    Ok(total)
}

/// Sorted, de-duplicated breakpoints within `[lo, hi]`, always including the
/// ends.
pub(crate) fn merge_breaks(lo: f64, hi: f64, extra: impl IntoIterator<Item = f64>) -> Vec<f64> {
    let mut v: Vec<f64> = std::iter::once(lo)
        .chain(extra.into_iter().filter(|&x| x > lo && x < hi))
        .chain(std::iter::once(hi))
        .collect();
    v.sort_by(f64::total_cmp);
    v.dedup_by(|a, b| (*a - *b).abs() <= 1e-14 * b.abs().max(1.0));
    v
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lane_emden(n: f64) -> Lagrangian {
        Lagrangian::parse(
            "x^2*(yp^2/2 - y^(n+1)/(n+1))",
            ParamBindings::from_pairs([("n", n)]),
        )
        .unwrap()
    }

    #[test]
    fn unbound_parameter_is_rejected() {
        let err = Lagrangian::parse("beta*yp^2", ParamBindings::new()).unwrap_err();
        assert_eq!(
            err,
            VariationalError::Expr(ExprError::UnboundParameter("beta".into()))
        );
    }

    #[test]
    fn cached_partials_match_diff() {
        let l = lane_emden(5.0);
        let e = l.expr();
        assert_eq!(l.partials().d3, e.diff(Var::Yp));
        assert_eq!(l.partials().d33, e.diff(Var::Yp).diff(Var::Yp));
        assert_eq!(l.partials().d22, e.diff(Var::Y).diff(Var::Y));
    }

    #[test]
    fn lane_emden_coefficients() {
        let l = lane_emden(5.0);
        let (x, y) = (0.8, 0.9);
        assert!((l.p_coefficient(x, y, 0.3).unwrap() - x * x).abs() < 1e-15);
        let q = l.q_coefficient(x, y, 0.3, 0.1).unwrap();
        assert!((q - (-5.0 * x * x * y.powi(4))).abs() < 1e-13);
    }

    #[test]
    fn explicit_form_for_damped_oscillator() {
        let l = Lagrangian::parse(
            "0.5*exp(beta*x)*(yp^2 - omega0^2*y^2)",
            ParamBindings::from_pairs([("beta", 0.5), ("omega0", 1.0)]),
        )
        .unwrap();
        // y'' + beta y' + omega0^2 y = 0
        let ypp = l.explicit_ypp(0.3, 0.7, -0.2).unwrap();
        assert!((ypp - (-0.5 * -0.2 - 0.7)).abs() < 1e-14);
        assert!((l.p_coefficient(1.0, 0.0, 0.0).unwrap() - 0.5f64.exp()).abs() < 1e-14);
        let q = l.q_coefficient(1.0, 0.3, 0.2, 0.1).unwrap();
        assert!((q + 0.5f64.exp()).abs() < 1e-14);
    }

    #[test]
    fn degenerate_hessian_is_reported() {
        let l = lane_emden(0.0);
        assert!(matches!(
            l.explicit_ypp(0.0, 1.0, 0.0),
            Err(VariationalError::Degenerate { .. })
        ));
    }

    #[test]
    fn pieces_integrate_smooth_and_kinked() {
        let v = integrate_pieces(|x| Ok(x.exp()), &[0.0, 1.0, 3.0], 1e-13).unwrap();
        assert!((v - (3f64.exp() - 1.0)).abs() < 1e-12);
        let v = integrate_pieces(
            |x| Ok((x - 0.3).abs()),
            &merge_breaks(0.0, 1.0, [0.3]),
            1e-13,
        )
        .unwrap();
        assert!((v - (0.045 + 0.245)).abs() < 1e-14);
    }
}
