use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::odeint::Options;
use crate::variational::{
    check_critical, coercivity_constant, convexity_certificate, second_variation, Convexity,
    ConvexityCertificate, CriticalCheck, Grid, Lagrangian, Path, Region, TestDirection,
    VariationalError,
};

use super::{
    build_jacobi, comparison_bounds, interlace_check, no_zeros_certificate, ComparisonBounds,
    ConjugateReport, InterlaceCheck, JacobiError, JacobiOptions, JacobiSystem, LegendreCheck,
    LegendreSign, NoZerosCertificate, NoZerosVerdict,
};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Verdict {
    LocalMinimum,
    LocalMaximum,
    /// The first conjugate point `c` lies inside `(a, b)`.
    MinimalityFailsBeyond {
        c: f64,
    },
    GlobalMinimumByConvexity,
    GlobalMaximumByConcavity,
    Indeterminate,
}

impl Verdict {
    pub fn name(&self) -> &'static str {
        match self {
            Verdict::LocalMinimum => "LOCAL_MINIMUM",
            Verdict::LocalMaximum => "LOCAL_MAXIMUM",
            Verdict::MinimalityFailsBeyond { .. } => "MINIMALITY_FAILS_BEYOND",
            Verdict::GlobalMinimumByConvexity => "GLOBAL_MINIMUM_BY_CONVEXITY",
            Verdict::GlobalMaximumByConcavity => "GLOBAL_MAXIMUM_BY_CONCAVITY",
            Verdict::Indeterminate => "INDETERMINATE",
        }
    }
}

/// One link in the certificate chain behind a verdict.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Reason {
    pub code: String,
    pub detail: String,
}

impl Reason {
    fn new(code: &str, detail: impl Into<String>) -> Self {
        Reason {
            code: code.into(),
            detail: detail.into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SecondVariationKind {
    /// The Jacobi field cut off at the conjugate point.
    TruncatedJacobi,
    /// `sin(k pi (x - a)/(b - a))`, `k = 1, 2, ...`.
    SineBasis,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SecondVariationCheck {
    pub kind: SecondVariationKind,
    pub values: Vec<f64>,
    /// Truncated field: value `<= 1e-6`; sine basis: all values `> 0`.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coercivity {
    /// `sigma = min P / 2`.
    pub sigma: f64,
    /// `sigma / (1 + (b - a)^2 / 2)`.
    pub constant: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SturmBlock {
    pub no_zeros: Option<NoZerosCertificate>,
    pub comparison: Option<ComparisonBounds>,
    pub interlace: Option<InterlaceCheck>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassificationReport {
    pub verdict: Verdict,
    /// `[a, b]`, or `[a, c)` when minimality fails beyond `c`.
    pub valid_interval: (f64, f64),
    pub reasons: Vec<Reason>,
    pub critical: CriticalCheck,
    pub convexity: Option<ConvexityCertificate>,
    pub legendre: Option<LegendreCheck>,
    /// Start of the Jacobi integration when the left end is singular.
    pub singular_start: Option<f64>,
    pub sturm: SturmBlock,
    pub conjugate: Option<ConjugateReport>,
    pub second_variation: Option<SecondVariationCheck>,
    pub coercivity: Option<Coercivity>,
}

#[derive(Debug, Clone)]
pub struct ClassifyOptions {
    /// Box for the convexity certificate; skipped when `None`.
    pub region: Option<Region>,
    pub grid: Grid,
    pub epsilon: Option<f64>,
    pub ode: Option<Options>,
    pub legendre: bool,
    pub sturm: bool,
    pub conjugate: bool,
    /// Number of sine directions for the second-variation cross-check; 0
    /// disables it.
    pub second_variation_directions: usize,
}

impl Default for ClassifyOptions {
    fn default() -> Self {
        ClassifyOptions {
            region: None,
            grid: Grid::default(),
            epsilon: None,
            ode: None,
            legendre: true,
            sturm: true,
            conjugate: true,
            second_variation_directions: 12,
        }
    }
}

fn smoothstep(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0)
    } else {
        (t * t * (3.0 - 2.0 * t), 6.0 * t * (1.0 - t))
    }
}

/// The Jacobi field restricted to `[a, c]` and extended by zero, made `C1`
/// by cubic blends of width `1e-7 (c - a)` (at `c`, and at `a` when the left
/// end is singular).
pub fn truncated_jacobi_direction(
    j: &JacobiSystem,
    c: f64,
    b: f64,
) -> Result<TestDirection, JacobiError> {
    let f = Arc::new(j.jacobi_field()?);
    let a = j.a();
    let delta = 1e-7 * (c - a);
    let left = j.is_singular();
    let sys = j.clone();
    let start = j.start();
    let sol = f.clone();
    let eval = move |x: f64| -> Result<(f64, f64), VariationalError> {
        if x >= c {
            return Ok((0.0, 0.0));
        }
        let (fx, dfx) = if x < start {
            (sol.eval(start)?[0], 0.0)
        } else {
            let s = sol.eval(x.min(sol.x_end()))?;
            let p = sys
                .p(x)
                .map_err(|e| VariationalError::InvalidInput(e.to_string()))?;
            (s[0], s[1] / p)
        };
        let (cr, dcr) = smoothstep((c - x) / delta);
        let (cl, dcl) = if left {
            smoothstep((x - a) / delta)
        } else {
            (1.0, 0.0)
        };
        let chi = cr * cl;
        let dchi = -dcr / delta * cl + cr * dcl / delta;
        Ok((fx * chi, dfx * chi + fx * dchi))
    };
    let mut breaks: Vec<f64> = f.nodes().iter().copied().filter(|&x| x < c).collect();
    breaks.extend([c - delta, c]);
    if left {
        breaks.extend([a + delta, start]);
    }
    Ok(TestDirection::from_fn(eval, a, b, breaks)?)
}

fn definite(sign: LegendreSign) -> Option<bool> {
    match sign {
        LegendreSign::Positive => Some(true),
        LegendreSign::Negative => Some(false),
        LegendreSign::Indefinite => None,
    }
}

fn local(positive: bool) -> Verdict {
    if positive {
        Verdict::LocalMinimum
    } else {
        Verdict::LocalMaximum
    }
}

/// Classification pipeline: convexity short-circuit, Legendre sign, the
/// no-zeros certificate, then the conjugate-point search. Every enabled
/// block is computed and reported even after the verdict is settled.
pub fn classify(
    l: &Lagrangian,
    p: &Path,
    opts: &ClassifyOptions,
) -> Result<ClassificationReport, JacobiError> {
    let (a, b) = (p.a(), p.b());
    let critical = check_critical(l, p, 1001)?;
    let mut reasons = Vec::new();
    let mut verdict: Option<Verdict> = None;
    let mut report = ClassificationReport {
        verdict: Verdict::Indeterminate,
        valid_interval: (a, b),
        reasons: Vec::new(),
        critical: critical.clone(),
        convexity: None,
        legendre: None,
        singular_start: None,
        sturm: SturmBlock::default(),
        conjugate: None,
        second_variation: None,
        coercivity: None,
    };
    if !critical.passes {
        reasons.push(Reason::new(
            "not_critical",
            format!(
                "Euler-Lagrange residual {:.3e} at x = {} exceeds {:.3e}",
                critical.max_residual, critical.worst_x, critical.tolerance
            ),
        ));
        report.reasons = reasons;
        return Ok(report);
    }
    if p.b() < p.requested_b() {
        reasons.push(Reason::new(
            "path_truncated",
            format!("path ends at {} before {}", p.b(), p.requested_b()),
        ));
    }

    if let Some(region) = &opts.region {
        let cert = convexity_certificate(l, region, opts.grid);
        match cert.verdict {
            Convexity::Convex => {
                reasons.push(Reason::new(
                    "convex",
                    "Hessian in (y, yp) is positive semidefinite on the region",
                ));
                verdict = Some(Verdict::GlobalMinimumByConvexity);
            }
            Convexity::Concave => {
                reasons.push(Reason::new(
                    "concave",
                    "Hessian in (y, yp) is negative semidefinite on the region",
                ));
                verdict = Some(Verdict::GlobalMaximumByConcavity);
            }
            Convexity::Inconclusive => {}
        }
        report.convexity = Some(cert);
    }

    let jopts = JacobiOptions {
        epsilon: opts.epsilon,
        ode: opts.ode.clone(),
    };
    let j = build_jacobi(l, p, &jopts)?;
    if j.is_singular() {
        report.singular_start = Some(j.start());
    }
    let legendre = j.legendre(2001)?;
    let sign = definite(legendre.sign);
    if opts.legendre {
        match sign {
            Some(true) => reasons.push(Reason::new(
                "legendre",
                format!("P > 0 on the interval (min P = {:.6e})", legendre.min_p),
            )),
            Some(false) => reasons.push(Reason::new(
                "legendre",
                format!("P < 0 on the interval (max P = {:.6e})", legendre.max_p),
            )),
            None => {
                reasons.push(Reason::new(
                    "legendre_indefinite",
                    format!(
                        "P changes sign: min {:.6e}, max {:.6e}",
                        legendre.min_p, legendre.max_p
                    ),
                ));
                verdict.get_or_insert(Verdict::Indeterminate);
            }
        }
    }
    report.legendre = Some(legendre.clone());
    let Some(positive) = sign else {
        report.verdict = verdict.unwrap_or(Verdict::Indeterminate);
        report.reasons = reasons;
        return Ok(report);
    };

    if opts.sturm {
        match no_zeros_certificate(&j) {
            Ok(cert) => {
                if cert.verdict == NoZerosVerdict::CertifiedNoConjugatePoints && verdict.is_none() {
                    reasons.push(Reason::new(
                        "no_zeros_certificate",
                        format!("max r = {:.6e} < 0", cert.max_r),
                    ));
                    verdict = Some(local(positive));
                }
                report.sturm.no_zeros = Some(cert);
            }
            Err(e) => reasons.push(Reason::new("normal_form_unavailable", e.to_string())),
        }
        if let Ok(Some(bounds)) = comparison_bounds(&j, j.sample_from(), b) {
            report.sturm.comparison = Some(bounds);
            if let Ok(check) = interlace_check(&j) {
                report.sturm.interlace = Some(check);
            }
        }
    }

    let mut conjugate_inside = None;
    if opts.conjugate {
        let rep = j.first_conjugate_point()?;
        match rep.conjugate_point {
            Some(c) if (c - b).abs() <= 1e-9 * b.abs().max(1.0) => {
                reasons.push(Reason::new(
                    "boundary_conjugate_point",
                    format!("first conjugate point {c} coincides with b"),
                ));
                verdict.get_or_insert(Verdict::Indeterminate);
            }
            Some(c) => {
                reasons.push(Reason::new(
                    "conjugate_point",
                    format!("first conjugate point at {c}"),
                ));
                conjugate_inside = Some(c);
                if verdict.is_none() {
                    verdict = Some(Verdict::MinimalityFailsBeyond { c });
                    report.valid_interval = (a, c);
                }
            }
            None if rep.reached_b => {
                reasons.push(Reason::new(
                    "no_conjugate_point",
                    format!("no zero of the Jacobi field in ({a}, {b}]"),
                ));
                verdict.get_or_insert(local(positive));
            }
            None => {
                reasons.push(Reason::new(
                    "search_truncated",
                    format!("integration stopped at {}", rep.searched_to),
                ));
                verdict.get_or_insert(Verdict::Indeterminate);
            }
        }
        report.conjugate = Some(rep);
    }

    if let Some(c) = conjugate_inside {
        let v = truncated_jacobi_direction(&j, c, p.requested_b())?;
        let s = second_variation(l, p, &v)?;
        report.second_variation = Some(SecondVariationCheck {
            kind: SecondVariationKind::TruncatedJacobi,
            values: vec![s],
            consistent: s <= 1e-6,
        });
    } else if positive && opts.second_variation_directions > 0 && report.conjugate.is_some() {
        let values = (1..=opts.second_variation_directions as u32)
            .map(|k| second_variation(l, p, &TestDirection::sine(k, a, p.requested_b())))
            .collect::<Result<Vec<f64>, _>>()?;
        let consistent = values.iter().all(|&v| v > 0.0);
        report.second_variation = Some(SecondVariationCheck {
            kind: SecondVariationKind::SineBasis,
            values,
            consistent,
        });
    }

    let verdict = verdict.unwrap_or(Verdict::Indeterminate);
    if positive
        && matches!(
            verdict,
            Verdict::LocalMinimum | Verdict::GlobalMinimumByConvexity
        )
    {
        let sigma = 0.5 * legendre.min_p;
        report.coercivity = Some(Coercivity {
            sigma,
            constant: coercivity_constant(sigma, a, b),
        });
    }
    report.verdict = verdict;
    report.reasons = reasons;
    Ok(report)
}
