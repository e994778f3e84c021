use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::odeint::EventSpec;

use super::{JacobiError, JacobiSystem};

const SAMPLES: usize = 2001;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum NoZerosVerdict {
    CertifiedNoConjugatePoints,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoZerosCertificate {
    pub verdict: NoZerosVerdict,
    pub max_r: f64,
    pub argmax: f64,
    pub samples: usize,
    pub tolerance: f64,
}

fn sample_r(j: &JacobiSystem, lo: f64, hi: f64, n: usize) -> Result<Vec<(f64, f64)>, JacobiError> {
    (0..n)
        .map(|i| {
            let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
            Ok((x, j.r(x)?))
        })
        .collect()
}

/// If `r <= -tol` everywhere, no nontrivial solution of `v'' + r v = 0` has
/// two zeros, so no point is conjugate to `a`.
pub fn no_zeros_certificate(j: &JacobiSystem) -> Result<NoZerosCertificate, JacobiError> {
    let tol = 1e-12;
    let samples = sample_r(j, j.sample_from(), j.b(), SAMPLES)?;
    let (argmax, max_r) = samples
        .iter()
        .copied()
        .fold((f64::NAN, f64::NEG_INFINITY), |acc, s| {
            if s.1 > acc.1 {
                s
            } else {
                acc
            }
        });
    let verdict = if max_r <= -tol {
        NoZerosVerdict::CertifiedNoConjugatePoints
    } else {
        NoZerosVerdict::NotApplicable
    };
    Ok(NoZerosCertificate {
        verdict,
        max_r,
        argmax,
        samples: SAMPLES,
        tolerance: tol,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComparisonBounds {
    /// `m^2 = min r`, `M^2 = max r` on the interval.
    pub r_min: f64,
    pub r_max: f64,
    /// Consecutive zeros are at least `pi / M` apart.
    pub gap_lo: f64,
    /// and at most `pi / m` apart.
    pub gap_hi: f64,
}

/// Golden-section search for an extremum of `f` on `[lo, hi]`; `sign = 1`
/// minimises, `-1` maximises.
fn golden<F: Fn(f64) -> Result<f64, JacobiError>>(
    f: F,
    mut lo: f64,
    mut hi: f64,
    sign: f64,
) -> Result<f64, JacobiError> {
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = hi - g * (hi - lo);
    let mut d = lo + g * (hi - lo);
    let (mut fc, mut fd) = (sign * f(c)?, sign * f(d)?);
    for _ in 0..80 {
        if (hi - lo).abs() <= 1e-12 * hi.abs().max(1.0) {
            break;
        }
        if fc < fd {
            hi = d;
            d = c;
            fd = fc;
            c = hi - g * (hi - lo);
            fc = sign * f(c)?;
        } else {
            lo = c;
            c = d;
            fc = fd;
            d = lo + g * (hi - lo);
            fd = sign * f(d)?;
        }
    }
    Ok(sign * fc.min(fd))
}

/// Sturm comparison with the constant-coefficient equations `v'' + m^2 v = 0`
/// and `v'' + M^2 v = 0`. Returns `None` when `min r <= 0`.
pub fn comparison_bounds(
    j: &JacobiSystem,
    lo: f64,
    hi: f64,
) -> Result<Option<ComparisonBounds>, JacobiError> {
    let samples = sample_r(j, lo, hi, SAMPLES)?;
    let step = (hi - lo) / (SAMPLES - 1) as f64;
    let (imin, _) = samples
        .iter()
        .enumerate()
        .fold(
            (0, f64::INFINITY),
            |acc, (i, s)| if s.1 < acc.1 { (i, s.1) } else { acc },
        );
    let (imax, _) = samples
        .iter()
        .enumerate()
        .fold((0, f64::NEG_INFINITY), |acc, (i, s)| {
            if s.1 > acc.1 {
                (i, s.1)
            } else {
                acc
            }
        });
    let bracket = |i: usize| ((samples[i].0 - step).max(lo), (samples[i].0 + step).min(hi));
    let (l0, h0) = bracket(imin);
    let r_min = golden(|x| j.r(x), l0, h0, 1.0)?.min(samples[imin].1);
    let (l1, h1) = bracket(imax);
    let r_max = golden(|x| j.r(x), l1, h1, -1.0)?.max(samples[imax].1);
    if r_min <= 0.0 {
        return Ok(None);
    }
    Ok(Some(ComparisonBounds {
        r_min,
        r_max,
        gap_lo: PI / r_max.sqrt(),
        gap_hi: PI / r_min.sqrt(),
    }))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum InterlaceVerdict {
    Holds,
    Fails,
    NotApplicable,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InterlaceCheck {
    pub verdict: InterlaceVerdict,
    /// Zeros of the solution vanishing at the start (the start included).
    pub zeros_first: Vec<f64>,
    pub zeros_second: Vec<f64>,
}

/// Checks that the zeros of two independent solutions alternate.
///
/// A regular system uses `(f, w) = (0, P)` and `(1, 0)` at the start; a
/// singular one uses the normal form with `(v, v') = (0, 1)` and `(1, 0)`.
pub fn interlace_check(j: &JacobiSystem) -> Result<InterlaceCheck, JacobiError> {
    let x0 = j.start();
    let zeros =
        |sol: crate::odeint::OdeSolution| sol.events().iter().map(|e| e.x).collect::<Vec<f64>>();
    let (mut z1, z2) = if j.is_singular() {
        (
            zeros(j.normal_form_solution(0.0, 1.0)?),
            zeros(j.normal_form_solution(1.0, 0.0)?),
        )
    } else {
        let p0 = j.p(x0)?;
        let ev = || [EventSpec::component(0)];
        (
            zeros(j.integrate_f([0.0, p0], &ev())?),
            zeros(j.integrate_f([1.0, 0.0], &ev())?),
        )
    };
    z1.insert(0, x0);
    if z1.len() < 2 || z2.len() < 2 {
        return Ok(InterlaceCheck {
            verdict: InterlaceVerdict::NotApplicable,
            zeros_first: z1,
            zeros_second: z2,
        });
    }
    let mut merged: Vec<(f64, u8)> = z1
        .iter()
        .map(|&x| (x, 1))
        .chain(z2.iter().map(|&x| (x, 2)))
        .collect();
    merged.sort_by(|a, b| a.0.total_cmp(&b.0));
    let alternates = merged
        .windows(2)
        .all(|w| w[0].1 != w[1].1 && w[0].0 < w[1].0);
    let verdict = if alternates {
        InterlaceVerdict::Holds
    } else {
        InterlaceVerdict::Fails
    };
    Ok(InterlaceCheck {
        verdict,
        zeros_first: z1,
        zeros_second: z2,
    })
}
