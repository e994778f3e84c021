use std::convert::Infallible;
use std::f64::consts::PI;

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QuadratureError<E = Infallible> {
    #[error("invalid quadrature request: {0}")]
    Invalid(String),
    #[error("non-finite integrand sample {value} at x = {x}")]
    NonFinite { x: f64, value: f64 },
    #[error("integrand failed at x = {x}: {source}")]
    Integrand { x: f64, source: E },
}

/// Gauss-Legendre rule on [-1, 1].
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    /// Nodes are the roots of P_n found by Newton iteration from the
    /// Chebyshev-like initial guesses; weights from P_n'.
    pub fn new(n: usize) -> Self {
        assert!(n >= 1, "Gauss-Legendre order must be positive");
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let m = n.div_ceil(2);
        for i in 0..m {
            let mut z = (PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre(n, z);
                dp = d;
                let dz = p / d;
                z -= dz;
                if dz.abs() < 1e-16 {
                    break;
                }
            }
            let (_, d) = legendre(n, z);
            if d != 0.0 {
                dp = d;
            }
            let w = 2.0 / ((1.0 - z * z) * dp * dp);
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = w;
            weights[n - 1 - i] = w;
        }
        if n % 2 == 1 {
            nodes[n / 2] = 0.0;
        }
        GaussLegendre { nodes, weights }
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Applies the rule on `[a, b]`.
    pub fn integrate<F, E>(&self, h: &mut F, a: f64, b: f64) -> Result<f64, QuadratureError<E>>
    where
        F: FnMut(f64) -> Result<f64, E>,
    {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (a + b);
        let mut acc = 0.0;
        for (t, w) in self.nodes.iter().zip(&self.weights) {
            let x = mid + half * t;
            let v = h(x).map_err(|source| QuadratureError::Integrand { x, source })?;
            if !v.is_finite() {
                return Err(QuadratureError::NonFinite { x, value: v });
            }
            acc += w * v;
        }
        Ok(acc * half)
    }
}

/// Value of P_n and its derivative at z.
fn legendre(n: usize, z: f64) -> (f64, f64) {
    let (mut p0, mut p1) = (1.0, z);
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let p2 = ((2.0 * kf - 1.0) * z * p1 - (kf - 1.0) * p0) / kf;
        p0 = p1;
        p1 = p2;
    }
    let d = n as f64 * (z * p1 - p0) / (z * z - 1.0);
    (p1, d)
}

const PANEL_ORDER: usize = 16;

/// Composite rule with at least `n` nodes: `ceil(n/16)` equal panels of a
/// common order.
fn panel_layout(n: usize) -> (usize, usize) {
    let panels = n.div_ceil(PANEL_ORDER);
    let order = n.div_ceil(panels);
    (panels, order)
}

pub fn try_quadrature<F, E>(mut h: F, a: f64, b: f64, n: usize) -> Result<f64, QuadratureError<E>>
where
    F: FnMut(f64) -> Result<f64, E>,
{
    if !(a < b) || !a.is_finite() || !b.is_finite() {
        return Err(QuadratureError::Invalid(format!(
            "need finite a < b, got [{a}, {b}]"
        )));
    }
    if n < 2 {
        return Err(QuadratureError::Invalid(format!(
            "need at least 2 nodes, got {n}"
        )));
    }
    let (panels, order) = panel_layout(n);
    let rule = GaussLegendre::new(order);
    let width = (b - a) / panels as f64;
    let mut total = 0.0;
    for k in 0..panels {
        let lo = a + width * k as f64;
        let hi = if k + 1 == panels {
            b
        } else {
            a + width * (k + 1) as f64
        };
        total += rule.integrate(&mut h, lo, hi)?;
    }
    Ok(total)
}

/// Composite Gauss-Legendre integral of `h` over `[a, b]` with at least `n`
/// nodes.
pub fn quadrature<F>(mut h: F, a: f64, b: f64, n: usize) -> Result<f64, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    try_quadrature(|x| Ok::<f64, Infallible>(h(x)), a, b, n)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureResult {
    pub value: f64,
    /// Upper bound on the change observed when the node count is doubled.
    pub error_estimate: f64,
}

pub fn quadrature_with_estimate<F>(
    mut h: F,
    a: f64,
    b: f64,
    n: usize,
) -> Result<QuadratureResult, QuadratureError>
where
    F: FnMut(f64) -> f64,
{
    let coarse = quadrature(&mut h, a, b, n)?;
    let fine = quadrature(&mut h, a, b, 2 * n)?;
    let roundoff = 64.0 * f64::EPSILON * coarse.abs().max(fine.abs());
    Ok(QuadratureResult {
        value: fine,
        error_estimate: (fine - coarse).abs() + roundoff,
    })
}
