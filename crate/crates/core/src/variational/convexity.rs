use serde::{Deserialize, Serialize};

use super::Lagrangian;

/// Box in `(x, y, y')`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub x: (f64, f64),
    pub y: (f64, f64),
    pub yp: (f64, f64),
}

/// Sample counts per axis (at least 2 each).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Grid {
    pub nx: usize,
    pub ny: usize,
    pub nyp: usize,
}

impl Default for Grid {
    fn default() -> Self {
        Grid {
            nx: 17,
            ny: 17,
            nyp: 17,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum Convexity {
    Convex,
    Concave,
    Inconclusive,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvexityCertificate {
    pub verdict: Convexity,
    pub samples: usize,
    /// `1e-10 (1 + largest sampled |entry|)`.
    pub tolerance: f64,
    pub min_d22: f64,
    pub max_d22: f64,
    pub min_d33: f64,
    pub max_d33: f64,
    pub min_det: f64,
    /// Set when a sample could not be evaluated.
    pub failure: Option<String>,
}

fn axis(range: (f64, f64), n: usize) -> impl Iterator<Item = f64> {
    let n = n.max(2);
    (0..n).map(move |i| range.0 + (range.1 - range.0) * i as f64 / (n - 1) as f64)
}

/// Checks the sign of the Hessian `[[D22L, D23L], [D23L, D33L]]` over a grid
/// on `region`.
///
/// A convex verdict means every critical path is a global minimum among
/// paths with the same endpoints; a concave verdict, a global maximum.
pub fn convexity_certificate(l: &Lagrangian, region: &Region, grid: Grid) -> ConvexityCertificate {
    let d = l.partials();
    let mut cert = ConvexityCertificate {
        verdict: Convexity::Inconclusive,
        samples: 0,
        tolerance: 0.0,
        min_d22: f64::INFINITY,
        max_d22: f64::NEG_INFINITY,
        min_d33: f64::INFINITY,
        max_d33: f64::NEG_INFINITY,
        min_det: f64::INFINITY,
        failure: None,
    };
    let mut largest: f64 = 0.0;
    for x in axis(region.x, grid.nx) {
        for y in axis(region.y, grid.ny) {
            for yp in axis(region.yp, grid.nyp) {
                let hessian = [&d.d22, &d.d23, &d.d33].map(|e| l.at(e, x, y, yp));
                let (a, b, c) = match hessian {
                    [Ok(a), Ok(b), Ok(c)] => (a, b, c),
                    [Err(e), ..] | [_, Err(e), _] | [.., Err(e)] => {
                        cert.failure = Some(format!("at (x, y, yp) = ({x}, {y}, {yp}): {e}"));
                        return cert;
                    }
                };
                let det = a * c - b * b;
                cert.samples += 1;
                cert.min_d22 = cert.min_d22.min(a);
                cert.max_d22 = cert.max_d22.max(a);
                cert.min_d33 = cert.min_d33.min(c);
                cert.max_d33 = cert.max_d33.max(c);
                cert.min_det = cert.min_det.min(det);
                largest = largest.max(a.abs()).max(b.abs()).max(c.abs());
            }
        }
    }
    let tol = 1e-10 * (1.0 + largest);
    cert.tolerance = tol;
    cert.verdict = if cert.min_d22 >= -tol && cert.min_d33 >= -tol && cert.min_det >= -tol {
        Convexity::Convex
    } else if cert.max_d22 <= tol && cert.max_d33 <= tol && cert.min_det >= -tol {
        Convexity::Concave
    } else {
        Convexity::Inconclusive
    };
    cert
}
