use std::fmt::Write as _;
use std::str::FromStr;

use crate::jacobi::JacobiSystem;

use super::problem::ProblemFile;
use super::run::jacobi_for;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Profile {
    P,
    Q,
    R,
    Field,
}

impl FromStr for Profile {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "P" => Ok(Profile::P),
            "Q" => Ok(Profile::Q),
            "r" => Ok(Profile::R),
            "field" | "jacobi_field" => Ok(Profile::Field),
            other => Err(format!(
                "unknown profile `{other}` (expected P, Q, r or field)"
            )),
        }
    }
}

/// Cubic extrapolation of `r` from four points just inside the sampled
/// range, for abscissae left of it.
fn r_extrapolated(j: &JacobiSystem, x: f64) -> Result<f64, String> {
    let x0 = j.sample_from();
    let h = 1e-3 * (j.b() - j.a());
    let ys = (0..4)
        .map(|k| j.r(x0 + k as f64 * h).map_err(|e| e.to_string()))
        .collect::<Result<Vec<f64>, _>>()?;
    let t = (x - x0) / h;
    let mut acc = 0.0;
    for (k, yk) in ys.iter().enumerate() {
        let mut w = 1.0;
        for m in 0..4 {
            if m != k {
                w *= (t - m as f64) / (k as f64 - m as f64);
            }
        }
        acc += w * yk;
    }
    Ok(acc)
}

/// `n` rows `x,value` on `[a, b]`.
///
/// At a singular left endpoint, `r` left of the first reliable sample is
/// extrapolated and the Jacobi field is taken to vanish linearly.
pub fn profile(file: &ProblemFile, what: Profile, n: usize) -> Result<Vec<(f64, f64)>, String> {
    if n < 2 {
        return Err("need at least 2 samples".into());
    }
    if file.path.is_none() {
        return Err("profiles need a [path] section".into());
    }
    let (_, _, j) = jacobi_for(file)?;
    let (a, b) = (j.a(), j.b());
    let xs: Vec<f64> = (0..n)
        .map(|i| {
            if i + 1 == n {
                b
            } else {
                a + (b - a) * i as f64 / (n - 1) as f64
            }
        })
        .collect();
    match what {
        Profile::P => xs
            .iter()
            .map(|&x| Ok((x, j.p(x).map_err(|e| e.to_string())?)))
            .collect(),
        Profile::Q => xs
            .iter()
            .map(|&x| Ok((x, j.q(x).map_err(|e| e.to_string())?)))
            .collect(),
        Profile::R => {
            let legendre = j.legendre(2001).map_err(|e| e.to_string())?;
            if legendre.sign == crate::jacobi::LegendreSign::Indefinite {
                return Err(format!(
                    "r is unavailable: P changes sign (min {}, max {})",
                    legendre.min_p, legendre.max_p
                ));
            }
            xs.iter()
                .map(|&x| {
                    let v = if x < j.sample_from() {
                        r_extrapolated(&j, x)?
                    } else {
                        j.r(x).map_err(|e| e.to_string())?
                    };
                    Ok((x, v))
                })
                .collect()
        }
        Profile::Field => {
            let f = j.jacobi_field().map_err(|e| e.to_string())?;
            let (lo, hi) = f.range();
            let f_lo = f.eval(lo).map_err(|e| e.to_string())?[0];
            xs.iter()
                .map(|&x| {
                    let v = if x <= lo {
                        if lo > a {
                            f_lo * (x - a) / (lo - a)
                        } else {
                            f_lo
                        }
                    } else {
                        f.eval(x.min(hi)).map_err(|e| e.to_string())?[0]
                    };
                    Ok((x, v))
                })
                .collect()
        }
    }
}

pub fn to_csv(rows: &[(f64, f64)]) -> String {
    let mut out = String::from("x,value\n");
    for (x, v) in rows {
        let _ = writeln!(out, "{x},{v}");
    }
    out
}
