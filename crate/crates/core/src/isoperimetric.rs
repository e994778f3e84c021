//! Maximum-entropy density under normalisation and second-moment constraints.
//!
//! The stationary density of `-∫ρ log ρ` subject to `∫ρ = 1` and
//! `∫x²ρ = σ²` has the form `ρ(x) = exp(-1 + λ1 + λ2 x²)`; the multipliers
//! are found by Newton's method on the two constraint residuals.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{Expr, ExprError, ParamBindings, Var};
use crate::odeint::{try_quadrature, QuadratureError};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IsoError {
    #[error("invalid problem: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Expr(#[from] ExprError),
    #[error("quadrature failed: {0}")]
    Quadrature(String),
    #[error(
        "Newton iteration did not converge in {iterations} iterations (residual {residual:e})"
    )]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("lambda2 = {lambda2} is not negative enough; the constraint integrals diverge")]
    Divergent { lambda2: f64 },
    #[error("density is not positive at x = {x} (value {value})")]
    NonPositiveDensity { x: f64, value: f64 },
}

impl From<QuadratureError<IsoError>> for IsoError {
    fn from(e: QuadratureError<IsoError>) -> Self {
        match e {
            QuadratureError::Integrand { source, .. } => source,
            other => IsoError::Quadrature(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MomentProblem {
    pub sigma: f64,
    /// Truncation half-width of the real line, in units of `sigma`.
    pub half_width: f64,
    pub nodes: usize,
}

impl MomentProblem {
    pub fn new(sigma: f64) -> Result<Self, IsoError> {
        Self::with_truncation(sigma, 12.0, 400)
    }

    pub fn with_truncation(sigma: f64, half_width: f64, nodes: usize) -> Result<Self, IsoError> {
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(IsoError::InvalidInput(format!(
                "sigma must be positive, got {sigma}"
            )));
        }
        if !(half_width >= 8.0 && half_width.is_finite()) {
            return Err(IsoError::InvalidInput(format!(
                "half-width must be at least 8 sigma, got {half_width}"
            )));
        }
        if nodes < 16 {
            return Err(IsoError::InvalidInput(format!(
                "need at least 16 quadrature nodes, got {nodes}"
            )));
        }
        Ok(MomentProblem {
            sigma,
            half_width,
            nodes,
        })
    }

    pub fn domain(&self) -> (f64, f64) {
        let w = self.half_width * self.sigma;
        (-w, w)
    }

    fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> Result<f64, IsoError> {
        let (lo, hi) = self.domain();
        Ok(try_quadrature(
            |x| Ok::<f64, IsoError>(f(x)),
            lo,
            hi,
            self.nodes,
        )?)
    }

    /// `∫x^{2k} ρ` for `k = 0, 1, 2`.
    fn moments(&self, l1: f64, l2: f64) -> Result<[f64; 3], IsoError> {
        let mut out = [0.0; 3];
        for (k, m) in out.iter_mut().enumerate() {
            *m = self.integrate(|x| x.powi(2 * k as i32) * density(l1, l2, x))?;
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiplierSolution {
    pub lambda1: f64,
    pub lambda2: f64,
    /// `∫ρ - 1`.
    pub residual_mass: f64,
    /// `∫x²ρ - σ²`.
    pub residual_moment: f64,
    pub iterations: usize,
}

impl MultiplierSolution {
    pub fn density(&self, x: f64) -> f64 {
        density(self.lambda1, self.lambda2, x)
    }

    /// The density as an expression in `x`.
    pub fn density_expr(&self) -> Expr {
        Expr::call(
            crate::expr::Func::Exp,
            Expr::add(
                Expr::num(self.lambda1 - 1.0),
                Expr::mul(
                    Expr::num(self.lambda2),
                    Expr::pow(Expr::x(), Expr::num(2.0)),
                ),
            ),
        )
    }
}

fn density(l1: f64, l2: f64, x: f64) -> f64 {
    (-1.0 + l1 + l2 * x * x).exp()
}

const MAX_ITERATIONS: usize = 50;
const DIVERGENCE_GUARD: f64 = -1e-8;

/// Newton's method from `(λ1, λ2) = (0, -1)`. Steps are shortened so that
/// `λ2` stays negative and the convex dual `∫ρ - λ1 - λ2 σ²` decreases.
pub fn solve_multipliers(prob: &MomentProblem) -> Result<MultiplierSolution, IsoError> {
    solve_multipliers_from(prob, (0.0, -1.0))
}

pub fn solve_multipliers_from(
    prob: &MomentProblem,
    start: (f64, f64),
) -> Result<MultiplierSolution, IsoError> {
    let s2 = prob.sigma * prob.sigma;
    let (mut l1, mut l2) = start;
    if l2 >= DIVERGENCE_GUARD {
        return Err(IsoError::Divergent { lambda2: l2 });
    }
    let dual = |l1: f64, l2: f64, m0: f64| m0 - l1 - l2 * s2;
    let mut m = prob.moments(l1, l2)?;
    let mut residual = f64::INFINITY;
    for it in 0..=MAX_ITERATIONS {
        let (f1, f2) = (m[0] - 1.0, m[1] - s2);
        residual = f1.abs().max(f2.abs() / s2.max(1.0));
        if residual <= 1e-12 {
            return Ok(MultiplierSolution {
                lambda1: l1,
                lambda2: l2,
                residual_mass: f1,
                residual_moment: f2,
                iterations: it,
            });
        }
        if it == MAX_ITERATIONS {
            break;
        }
        let det = m[0] * m[2] - m[1] * m[1];
        if !(det > 0.0) {
            return Err(IsoError::Quadrature(format!(
                "singular Newton matrix at ({l1}, {l2})"
            )));
        }
        let d1 = -(m[2] * f1 - m[1] * f2) / det;
        let d2 = -(-m[1] * f1 + m[0] * f2) / det;
        let mut t: f64 = 1.0;
        if l2 + d2 >= 0.5 * l2 {
            t = t.min(-0.5 * l2 / d2);
        }
        let g0 = dual(l1, l2, m[0]);
        let slope = f1 * d1 + f2 * d2;
        loop {
            let (n1, n2) = (l1 + t * d1, l2 + t * d2);
            let mn = prob.moments(n1, n2)?;
            if dual(n1, n2, mn[0]) <= g0 + 1e-4 * t * slope + 1e-15 * g0.abs() || t < 1e-10 {
                l1 = n1;
                l2 = n2;
                m = mn;
                break;
            }
            t *= 0.5;
        }
        if l2 >= DIVERGENCE_GUARD {
            return Err(IsoError::Divergent { lambda2: l2 });
        }
    }
    Err(IsoError::NonConvergence {
        iterations: MAX_ITERATIONS,
        residual,
    })
}

/// `det [[∫h1, ∫h2], [∫x²h1, ∫x²h2]]` over `domain`. A nonzero value means
/// the two constraints are independent along the directions `h1`, `h2`.
pub fn determinant_test(
    h1: &Expr,
    h2: &Expr,
    domain: (f64, f64),
    nodes: usize,
) -> Result<f64, IsoError> {
    let params = ParamBindings::new();
    let int = |h: &Expr, k: i32| -> Result<f64, IsoError> {
        Ok(try_quadrature(
            |x| Ok::<f64, IsoError>(x.powi(k) * h.eval_x(x, &params)?),
            domain.0,
            domain.1,
            nodes,
        )?)
    };
    let (a, b) = (int(h1, 0)?, int(h2, 0)?);
    let (c, d) = (int(h1, 2)?, int(h2, 2)?);
    Ok(a * d - b * c)
}

/// `-∫ρ log ρ` over `domain`.
pub fn entropy(rho: &Expr, domain: (f64, f64), nodes: usize) -> Result<f64, IsoError> {
    let params = ParamBindings::new();
    Ok(try_quadrature(
        |x| {
            let r = rho.eval_x(x, &params)?;
            if !(r > 0.0) {
                return Err(IsoError::NonPositiveDensity { x, value: r });
            }
            Ok(-r * r.ln())
        },
        domain.0,
        domain.1,
        nodes,
    )?)
}

/// `∫x^k ρ` over `domain`.
pub fn moment(rho: &Expr, k: i32, domain: (f64, f64), nodes: usize) -> Result<f64, IsoError> {
    let params = ParamBindings::new();
    Ok(try_quadrature(
        |x| Ok::<f64, IsoError>(x.powi(k) * rho.eval_x(x, &params)?),
        domain.0,
        domain.1,
        nodes,
    )?)
}

/// The density `ρ0 exp(ε h)`, renormalised and rescaled about the origin so
/// that it satisfies both constraints of `prob` again.
pub fn admissible_perturbation(
    rho0: &Expr,
    h: &Expr,
    eps: f64,
    prob: &MomentProblem,
) -> Result<Expr, IsoError> {
    let domain = prob.domain();
    let raw = Expr::mul(
        rho0.clone(),
        Expr::call(crate::expr::Func::Exp, Expr::mul(Expr::num(eps), h.clone())),
    );
    let z = moment(&raw, 0, domain, prob.nodes)?;
    let m2 = moment(&raw, 2, domain, prob.nodes)? / z;
    let s = m2.sqrt() / prob.sigma;
    let scaled = raw.substitute(Var::X, &Expr::mul(Expr::num(s), Expr::x()));
    Ok(Expr::mul(Expr::num(s / z), scaled))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::expr::parse;
    use std::f64::consts::PI;

    #[test]
    fn unit_sigma_multipliers() {
        let s = solve_multipliers(&MomentProblem::new(1.0).unwrap()).unwrap();
        assert!((s.lambda1 - (1.0 - 0.5 * (2.0 * PI).ln())).abs() < 1e-10);
        assert!((s.lambda2 + 0.5).abs() < 1e-12);
        assert!((s.density(0.0) - 1.0 / (2.0 * PI).sqrt()).abs() < 1e-12);
        assert!(s.iterations <= 50);
    }

    #[test]
    fn sigma_two_multipliers() {
        let s = solve_multipliers(&MomentProblem::new(2.0).unwrap()).unwrap();
        assert!((s.lambda2 + 0.125).abs() < 1e-12);
        assert!((s.lambda1 - (1.0 - (2.0 * (2.0 * PI).sqrt()).ln())).abs() < 1e-10);
    }

    #[test]
    fn invalid_problems() {
        assert!(MomentProblem::new(0.0).is_err());
        assert!(MomentProblem::with_truncation(1.0, 6.0, 400).is_err());
        let p = MomentProblem::new(1.0).unwrap();
        assert!(matches!(
            solve_multipliers_from(&p, (0.0, 0.0)),
            Err(IsoError::Divergent { .. })
        ));
    }

    #[test]
    fn determinant_examples() {
        let h1 = parse("exp(-x^2)").unwrap();
        let h2 = parse("x^2*exp(-x^2)").unwrap();
        let d = determinant_test(&h1, &h2, (-12.0, 12.0), 400).unwrap();
        assert!((d - PI / 2.0).abs() < 1e-12);
        assert!(
            determinant_test(&h1, &h1, (-12.0, 12.0), 400)
                .unwrap()
                .abs()
                < 1e-14
        );
        let odd = parse("x*exp(-x^2)").unwrap();
        assert!(
            determinant_test(&h1, &odd, (-12.0, 12.0), 400)
                .unwrap()
                .abs()
                < 1e-14
        );
    }

    #[test]
    fn entropy_examples() {
        let g = parse("exp(-x^2/2)/sqrt(2*3.141592653589793)").unwrap();
        let e = entropy(&g, (-12.0, 12.0), 400).unwrap();
        assert!((e - 0.5 * (2.0 * PI * 1f64.exp()).ln()).abs() < 1e-12);
        let u = entropy(&parse("0.5").unwrap(), (0.0, 2.0), 32).unwrap();
        assert!((u - 2f64.ln()).abs() < 1e-14);
        assert!(matches!(
            entropy(&parse("x").unwrap(), (-1.0, 1.0), 32),
            Err(IsoError::NonPositiveDensity { .. })
        ));
    }

    #[test]
    fn perturbation_is_admissible() {
        let p = MomentProblem::new(1.0).unwrap();
        let g = solve_multipliers(&p).unwrap().density_expr();
        let rho =
            admissible_perturbation(&g, &parse("cos(x) + 0.3*sin(2*x)").unwrap(), 0.2, &p).unwrap();
        assert!((moment(&rho, 0, p.domain(), 400).unwrap() - 1.0).abs() < 1e-12);
        assert!((moment(&rho, 2, p.domain(), 400).unwrap() - 1.0).abs() < 1e-12);
    }
}
