//! The Jacobi accessory equation `-(P f')' + Q f = 0` along a critical path:
//! conjugate points, the normal form `v'' + r v = 0`, Sturm-type
//! certificates and the resulting minimality classification.

mod classify;
mod conjugate;
mod family;
mod sturm;

use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::odeint::{OdeError, Options};
use crate::variational::{Lagrangian, Path, VariationalError};

pub use classify::{
    classify, truncated_jacobi_direction, ClassificationReport, ClassifyOptions, Reason,
    SecondVariationCheck, Verdict,
};
pub use conjugate::{riccati_residual, ConjugateMethod, ConjugateReport, ZeroInfo};
pub use family::{jacobi_from_family, FamilyJacobi};
pub use sturm::{
    comparison_bounds, interlace_check, no_zeros_certificate, ComparisonBounds, InterlaceCheck,
    InterlaceVerdict, NoZerosCertificate, NoZerosVerdict,
};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JacobiError {
    #[error(transparent)]
    Variational(#[from] VariationalError),
    #[error(transparent)]
    Ode(#[from] OdeError),
    #[error("P is not of one sign: P({x}) = {value}")]
    NonPositiveP { x: f64, value: f64 },
    #[error("x = {x} is too close to a zero of the Jacobi field (f = {f})")]
    NearZero { x: f64, f: f64 },
    #[error("{0}")]
    Invalid(String),
}

type Coefficient = Arc<dyn Fn(f64) -> Result<f64, JacobiError> + Send + Sync>;

/// Sign pattern of `P` over the sampled interval.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum LegendreSign {
    Positive,
    Negative,
    Indefinite,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LegendreCheck {
    pub min_p: f64,
    pub max_p: f64,
    pub argmin: f64,
    pub sign: LegendreSign,
    /// Left end of the sampled range (shifted for singular endpoints).
    pub from: f64,
    pub samples: usize,
}

/// How the normal-form coefficient is obtained.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalFormInfo {
    /// `r = -Q/P - s''/s` with `s = sqrt|P|`, which equals
    /// `q - p^2/4 - p'/2` for `p = P'/P`, `q = -Q/P`.
    pub formula: String,
    /// Finite-difference step for `s''`.
    pub step: f64,
}

/// Coefficients `P`, `Q` of the Jacobi equation on `[a, b]`.
#[derive(Clone)]
pub struct JacobiSystem {
    p: Coefficient,
    q: Coefficient,
    a: f64,
    b: f64,
    start: f64,
    singular: bool,
    h: f64,
    ode: Options,
}

impl std::fmt::Debug for JacobiSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("JacobiSystem")
            .field("a", &self.a)
            .field("b", &self.b)
            .field("start", &self.start)
            .field("singular", &self.singular)
            .finish()
    }
}

/// Options for [`build_jacobi`].
#[derive(Debug, Clone, Default)]
pub struct JacobiOptions {
    /// Start offset for singular left endpoints; defaults to
    /// `1e-6 max(1, b - a)`.
    pub epsilon: Option<f64>,
    pub ode: Option<Options>,
}

/// `P = D33L` and `Q = D22L - d/dx D23L` along `path`.
///
/// The left endpoint is singular when `P(a)` cannot be evaluated or is
/// negligible next to the largest sampled `|P|`; the system then starts at
/// `a + epsilon`.
pub fn build_jacobi(
    l: &Lagrangian,
    path: &Path,
    opts: &JacobiOptions,
) -> Result<JacobiSystem, JacobiError> {
    let (lp, pp) = (Arc::new(l.clone()), Arc::new(path.clone()));
    let p: Coefficient = {
        let (l, path) = (lp.clone(), pp.clone());
        Arc::new(move |x| {
            let (y, yp) = path.point(x)?;
            Ok(l.p_coefficient(x, y, yp).map_err(VariationalError::from)?)
        })
    };
    let q: Coefficient = {
        let (l, path) = (lp, pp);
        Arc::new(move |x| {
            let (y, yp) = path.point(x)?;
            let ypp = path.ypp(x)?;
            Ok(l.q_coefficient(x, y, yp, ypp)
                .map_err(VariationalError::from)?)
        })
    };
    let (a, b) = (path.a(), path.b());
    let mut sys = JacobiSystem::with_coefficients(p, q, a, b)?;
    sys.ode = opts.ode.clone().unwrap_or_default();
    let eps = opts.epsilon.unwrap_or(1e-6 * (b - a).max(1.0));
    let scale = (0..=64)
        .map(|i| a + (b - a) * i as f64 / 64.0)
        .filter_map(|x| (sys.p)(x).ok())
        .fold(0.0f64, |m, v| m.max(v.abs()));
    let singular = match (sys.p)(a) {
        Ok(pa) => pa.abs() <= 1e-12 * scale.max(f64::MIN_POSITIVE),
        Err(_) => true,
    };
    if singular || path.start() > a {
        sys.singular = singular;
        sys.start = (a + eps).max(path.start());
    }
    Ok(sys)
}

impl JacobiSystem {
    fn with_coefficients(
        p: Coefficient,
        q: Coefficient,
        a: f64,
        b: f64,
    ) -> Result<Self, JacobiError> {
        if !(a < b) {
            return Err(JacobiError::Invalid(format!("need a < b, got [{a}, {b}]")));
        }
        Ok(JacobiSystem {
            p,
            q,
            a,
            b,
            start: a,
            singular: false,
            h: 1e-4 * (b - a),
            ode: Options::default(),
        })
    }

    /// A system with explicit coefficient functions and a regular left end.
    pub fn from_coefficients<P, Q>(p: P, q: Q, a: f64, b: f64) -> Result<Self, JacobiError>
    where
        P: Fn(f64) -> f64 + Send + Sync + 'static,
        Q: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::with_coefficients(
            Arc::new(move |x| Ok(p(x))),
            Arc::new(move |x| Ok(q(x))),
            a,
            b,
        )
    }

    /// `v'' + r v = 0` written as a Jacobi system (`P = 1`, `Q = -r`).
    pub fn from_normal_form<R>(r: R, a: f64, b: f64) -> Result<Self, JacobiError>
    where
        R: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        Self::from_coefficients(|_| 1.0, move |x| -r(x), a, b)
    }

    /// Treats the left endpoint as singular, starting at `a + epsilon`.
    pub fn with_singular_start(mut self, epsilon: f64) -> Self {
        self.singular = true;
        self.start = self.a + epsilon;
        self
    }

    pub fn with_ode_options(mut self, ode: Options) -> Self {
        self.ode = ode;
        self
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    /// Where integration starts: `a`, or `a + epsilon` when singular.
    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn is_singular(&self) -> bool {
        self.singular
    }

    pub fn ode_options(&self) -> &Options {
        &self.ode
    }

    pub fn p(&self, x: f64) -> Result<f64, JacobiError> {
        (self.p)(x)
    }

    pub fn q(&self, x: f64) -> Result<f64, JacobiError> {
        (self.q)(x)
    }

    /// Left end of the range used for sampled checks: `start`, moved in by
    /// `1e-3 (b - a)` for singular endpoints.
    pub fn sample_from(&self) -> f64 {
        if self.singular {
            self.start.max(self.a + 1e-3 * (self.b - self.a))
        } else {
            self.start
        }
    }

    /// Samples `P` on `n` points of `[sample_from, b]`.
    pub fn legendre(&self, n: usize) -> Result<LegendreCheck, JacobiError> {
        let from = self.sample_from();
        let (mut min_p, mut max_p, mut argmin) = (f64::INFINITY, f64::NEG_INFINITY, from);
        for i in 0..n {
            let x = from + (self.b - from) * i as f64 / (n - 1) as f64;
            let v = self.p(x)?;
            if v < min_p {
                min_p = v;
                argmin = x;
            }
            max_p = max_p.max(v);
        }
        let sign = if min_p > 1e-12 * max_p.abs() && min_p > 0.0 {
            LegendreSign::Positive
        } else if max_p < -1e-12 * min_p.abs() && max_p < 0.0 {
            LegendreSign::Negative
        } else {
            LegendreSign::Indefinite
        };
        Ok(LegendreCheck {
            min_p,
            max_p,
            argmin,
            sign,
            from,
            samples: n,
        })
    }

    fn sqrt_p(&self, x: f64) -> Result<f64, JacobiError> {
        Ok(self.p(x)?.abs().sqrt())
    }

    /// `(s, s', s'')` for `s = sqrt|P|` by five-point differences, one-sided
    /// near the ends of `[start, b]`.
    pub(crate) fn s_derivatives(&self, x: f64) -> Result<(f64, f64, f64), JacobiError> {
        let h = self.h;
        let s = |t: f64| self.sqrt_p(t);
        if x - 2.0 * h >= self.start && x + 2.0 * h <= self.b {
            let f = [
                s(x - 2.0 * h)?,
                s(x - h)?,
                s(x)?,
                s(x + h)?,
                s(x + 2.0 * h)?,
            ];
            let d1 = (f[0] - 8.0 * f[1] + 8.0 * f[3] - f[4]) / (12.0 * h);
            let d2 = (-f[0] + 16.0 * f[1] - 30.0 * f[2] + 16.0 * f[3] - f[4]) / (12.0 * h * h);
            return Ok((f[2], d1, d2));
        }
        let dir = if x - 2.0 * h < self.start { 1.0 } else { -1.0 };
        let g = dir * h;
        let f = [
            s(x)?,
            s(x + g)?,
            s(x + 2.0 * g)?,
            s(x + 3.0 * g)?,
            s(x + 4.0 * g)?,
        ];
        let d1 = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) / (12.0 * g);
        let d2 = (35.0 * f[0] - 104.0 * f[1] + 114.0 * f[2] - 56.0 * f[3] + 11.0 * f[4])
            / (12.0 * h * h);
        Ok((f[0], d1, d2))
    }

    /// `P'` by the same stencils.
    pub(crate) fn p_derivative(&self, x: f64) -> Result<f64, JacobiError> {
        let (s, ds, _) = self.s_derivatives(x)?;
        Ok(2.0 * s * ds * self.p(x)?.signum())
    }

    /// Normal-form coefficient `r(x)`; zeros of `v = f sqrt|P|` solving
    /// `v'' + r v = 0` coincide with zeros of the Jacobi field `f`.
    pub fn r(&self, x: f64) -> Result<f64, JacobiError> {
        let p = self.p(x)?;
        if p == 0.0 || !p.is_finite() {
            return Err(JacobiError::NonPositiveP { x, value: p });
        }
        let (s, _, s2) = self.s_derivatives(x)?;
        Ok(-self.q(x)? / p - s2 / s)
    }

    pub fn normal_form_info(&self) -> NormalFormInfo {
        NormalFormInfo {
            formula: "r = -Q/P - (sqrt|P|)''/sqrt|P|".into(),
            step: self.h,
        }
    }
}
