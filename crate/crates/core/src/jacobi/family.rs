use serde::{Deserialize, Serialize};

use crate::expr::{Expr, ParamBindings, Var};
use crate::variational::VariationalError;

use super::{JacobiError, JacobiSystem};

/// Parameter derivatives of a family of critical paths, sampled on a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FamilyJacobi {
    pub xs: Vec<f64>,
    pub d_alpha: Vec<f64>,
    pub d_beta: Vec<f64>,
    /// Largest `|-(P phi')' + Q phi|` over the grid for each derivative.
    pub residual_alpha: f64,
    pub residual_beta: f64,
    pub step_alpha: f64,
    pub step_beta: f64,
}

impl FamilyJacobi {
    pub fn max_residual(&self) -> f64 {
        self.residual_alpha.max(self.residual_beta)
    }
}

/// Differentiates a two-parameter family `y(x; alpha, beta)` of solutions
/// of the Euler-Lagrange equation with respect to each parameter. Each
/// derivative solves the Jacobi equation.
///
/// Parameter derivatives use central differences with step
/// `1e-5 max(1, |p0|)`; the x-derivatives needed for the residual are taken
/// symbolically before differencing.
#[allow(clippy::too_many_arguments)]
pub fn jacobi_from_family(
    family: &Expr,
    names: (&str, &str),
    at: (f64, f64),
    params: &ParamBindings,
    j: &JacobiSystem,
    lo: f64,
    hi: f64,
    n: usize,
) -> Result<FamilyJacobi, JacobiError> {
    let dy = family.diff(Var::X);
    let d2y = dy.diff(Var::X);
    let exprs = [family.clone(), dy, d2y];
    let eval = |x: f64, alpha: f64, beta: f64| -> Result<[f64; 3], JacobiError> {
        let mut b = params.clone();
        b.insert(names.0, alpha);
        b.insert(names.1, beta);
        let mut out = [0.0; 3];
        for (o, e) in out.iter_mut().zip(&exprs) {
            *o = e.eval_x(x, &b).map_err(VariationalError::from)?;
        }
        Ok(out)
    };
    let ha = 1e-5 * at.0.abs().max(1.0);
    let hb = 1e-5 * at.1.abs().max(1.0);
    let derivative = |x: f64, which: usize| -> Result<[f64; 3], JacobiError> {
        let (plus, minus, h) = if which == 0 {
            (eval(x, at.0 + ha, at.1)?, eval(x, at.0 - ha, at.1)?, ha)
        } else {
            (eval(x, at.0, at.1 + hb)?, eval(x, at.0, at.1 - hb)?, hb)
        };
        Ok([0, 1, 2].map(|k| (plus[k] - minus[k]) / (2.0 * h)))
    };
    let mut out = FamilyJacobi {
        xs: Vec::with_capacity(n),
        d_alpha: Vec::with_capacity(n),
        d_beta: Vec::with_capacity(n),
        residual_alpha: 0.0,
        residual_beta: 0.0,
        step_alpha: ha,
        step_beta: hb,
    };
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let (p, dp, q) = (j.p(x)?, j.p_derivative(x)?, j.q(x)?);
        let phi_a = derivative(x, 0)?;
        let phi_b = derivative(x, 1)?;
        let residual = |phi: [f64; 3]| (-(dp * phi[1] + p * phi[2]) + q * phi[0]).abs();
        out.residual_alpha = out.residual_alpha.max(residual(phi_a));
        out.residual_beta = out.residual_beta.max(residual(phi_b));
        out.xs.push(x);
        out.d_alpha.push(phi_a[0]);
        out.d_beta.push(phi_b[0]);
    }
    Ok(out)
}
