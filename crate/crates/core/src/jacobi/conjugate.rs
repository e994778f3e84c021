use serde::{Deserialize, Serialize};

use crate::odeint::{integrate, EventSpec, FieldError, OdeSolution, Status};

use super::{JacobiError, JacobiSystem, LegendreCheck, LegendreSign};

/// Which solution was searched for zeros.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConjugateMethod {
    /// The Jacobi field `f` with `f(a) = 0`, `f'(a) = 1`.
    JacobiField,
    /// The normal-form solution `v` with `v(a + eps) = eps`, `v' = 1`.
    NormalForm,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ZeroInfo {
    pub x: f64,
    pub slope: f64,
    pub simple: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConjugateReport {
    pub legendre: LegendreCheck,
    pub method: ConjugateMethod,
    /// First zero after the start, if any lies in `(a, b]`.
    pub conjugate_point: Option<f64>,
    pub zeros: Vec<ZeroInfo>,
    /// Largest `|solution|` seen; zero simplicity is judged against it.
    pub scale: f64,
    /// The search reached `b` without the integration stopping early.
    pub reached_b: bool,
    /// Where the search ended.
    pub searched_to: f64,
    /// Conjugate points do not depend on the normalisation `f'(a) = 1`.
    pub normalisation: String,
}

fn integration_failure(status: &Status) -> Option<f64> {
    match status {
        Status::BlowUp { last_good_x } | Status::StepFailure { last_good_x, .. } => {
            Some(*last_good_x)
        }
        _ => None,
    }
}

impl JacobiSystem {
    /// Integrates `f' = w / P`, `w' = Q f` from the start with `f = 0`,
    /// `w = P` (so `f' = 1`), recording the zeros of `f`.
    ///
    /// For a singular left end the initial data come from the normal-form
    /// solution `v(eps) = eps`, `v'(eps) = 1` through `f = v / sqrt|P|`.
    pub fn jacobi_field(&self) -> Result<OdeSolution, JacobiError> {
        let x0 = self.start;
        let p0 = self.p(x0)?;
        if p0 == 0.0 || !p0.is_finite() {
            return Err(JacobiError::NonPositiveP { x: x0, value: p0 });
        }
        self.require_definite_p()?;
        let init = if self.singular {
            let eps = x0 - self.a;
            let (s, ds, _) = self.s_derivatives(x0)?;
            [eps / s, p0.signum() * s * (s - eps * ds)]
        } else {
            [0.0, p0]
        };
        self.integrate_f(init, &[EventSpec::component(0)])
    }

    fn require_definite_p(&self) -> Result<(), JacobiError> {
        let check = self.legendre(2001)?;
        if check.sign == LegendreSign::Indefinite {
            let bad = if check.max_p > 0.0 {
                check.argmin
            } else {
                check.from
            };
            return Err(JacobiError::NonPositiveP {
                x: bad,
                value: self.p(bad)?,
            });
        }
        Ok(())
    }

    /// Same system from arbitrary `(f, w)` data at the start.
    pub(crate) fn integrate_f(
        &self,
        init: [f64; 2],
        events: &[EventSpec],
    ) -> Result<OdeSolution, JacobiError> {
        let x0 = self.start;
        let sign = self.p(x0)?.signum();
        let field = |x: f64, s: &[f64], out: &mut [f64]| -> Result<(), FieldError> {
            let p = self.p(x).map_err(|e| FieldError::Domain(e.to_string()))?;
            if p * sign <= 0.0 || !p.is_finite() {
                return Err(FieldError::Fatal(format!(
                    "P changes sign or vanishes at x = {x} (P = {p})"
                )));
            }
            let q = self.q(x).map_err(|e| FieldError::Domain(e.to_string()))?;
            out[0] = s[1] / p;
            out[1] = q * s[0];
            Ok(())
        };
        Ok(integrate(field, x0, &init, self.b, &self.ode, events)?)
    }

    /// Integrates `v'' + r v = 0` from the start.
    pub fn normal_form_solution(&self, v0: f64, dv0: f64) -> Result<OdeSolution, JacobiError> {
        let field = |x: f64, s: &[f64], out: &mut [f64]| -> Result<(), FieldError> {
            let r = self.r(x).map_err(|e| match e {
                JacobiError::NonPositiveP { .. } => FieldError::Fatal(e.to_string()),
                other => FieldError::Domain(other.to_string()),
            })?;
            out[0] = s[1];
            out[1] = -r * s[0];
            Ok(())
        };
        let ev = [EventSpec::component(0)];
        Ok(integrate(
            field,
            self.start,
            &[v0, dv0],
            self.b,
            &self.ode,
            &ev,
        )?)
    }

    /// The normal-form counterpart of [`jacobi_field`](Self::jacobi_field):
    /// `v(a) = 0`, `v'(a) = sqrt|P(a)|` for a regular end and
    /// `v(a + eps) = eps`, `v'(a + eps) = 1` for a singular one.
    pub fn normal_field(&self) -> Result<OdeSolution, JacobiError> {
        if self.singular {
            self.normal_form_solution(self.start - self.a, 1.0)
        } else {
            self.normal_form_solution(0.0, self.p(self.start)?.abs().sqrt())
        }
    }

    /// Slope of the solution at a zero: `w / P` for the Jacobi field, `v'`
    /// for the normal form.
    fn slope(&self, method: ConjugateMethod, x: f64, state: &[f64]) -> Result<f64, JacobiError> {
        Ok(match method {
            ConjugateMethod::JacobiField => state[1] / self.p(x)?,
            ConjugateMethod::NormalForm => state[1],
        })
    }

    /// Zeros of the Jacobi field after the start, located on `(a, b]`.
    ///
    /// A regular endpoint uses the Jacobi field `f`; a singular one uses the
    /// normal-form solution started at `a + eps`.
    pub fn first_conjugate_point(&self) -> Result<ConjugateReport, JacobiError> {
        let legendre = self.legendre(2001)?;
        let (method, sol) = if self.singular {
            (ConjugateMethod::NormalForm, self.normal_field()?)
        } else {
            (ConjugateMethod::JacobiField, self.jacobi_field()?)
        };
        let scale = sol.states().iter().fold(0.0f64, |m, s| m.max(s[0].abs()));
        let mut zeros = Vec::new();
        for e in sol.events_for(0) {
            let slope = self.slope(method, e.x, &e.state)?;
            zeros.push(ZeroInfo {
                x: e.x,
                slope,
                simple: slope.abs() > 1e-9 * scale,
            });
        }
        let end = sol.x_end();
        let reached_b = integration_failure(sol.status()).is_none();
        // a zero landing exactly on b produces no sign change
        let last = sol.final_state();
        let near_b = zeros
            .last()
            .is_some_and(|z| (z.x - end).abs() <= 1e-9 * end.abs().max(1.0));
        if reached_b && !near_b && last[0].abs() <= 1e-9 * scale {
            let slope = self.slope(method, end, last)?;
            zeros.push(ZeroInfo {
                x: end,
                slope,
                simple: slope.abs() > 1e-9 * scale,
            });
        }
        Ok(ConjugateReport {
            legendre,
            method,
            conjugate_point: zeros.first().map(|z| z.x),
            zeros,
            scale,
            reached_b,
            searched_to: end,
            normalisation: match method {
                ConjugateMethod::JacobiField => {
                    "f(a) = 0, f'(a) = 1; zeros are independent of the scale".into()
                }
                ConjugateMethod::NormalForm => {
                    "v(a+eps) = eps, v'(a+eps) = 1 for v = f sqrt|P|".into()
                }
            },
        })
    }
}

/// `g' + Q - g^2 / P` for `g = -P f'/f`, with `g'` by central differences of
/// the interpolated field. The step shrinks near zeros of `f`, where `g` has
/// poles.
///
/// `f` is a solution of the Jacobi system in `(f, w = P f')` form, such as
/// the output of [`JacobiSystem::jacobi_field`].
pub fn riccati_residual(j: &JacobiSystem, f: &OdeSolution, x: f64) -> Result<f64, JacobiError> {
    let scale = f.states().iter().fold(0.0f64, |m, s| m.max(s[0].abs()));
    let g = |t: f64| -> Result<f64, JacobiError> {
        let s = f.eval(t)?;
        Ok(-s[1] / s[0])
    };
    let sx = f.eval(x)?;
    let fx = sx[0];
    if fx.abs() <= 1e-6 * scale {
        return Err(JacobiError::NearZero { x, f: fx });
    }
    let (lo, hi) = f.range();
    let to_zero = (fx * j.p(x)? / sx[1]).abs();
    let h = (1e-3 * (hi - lo)).min(1e-2 * to_zero);
    let dg = if x - 3.0 * h >= lo && x + 3.0 * h <= hi {
        (45.0 * (g(x + h)? - g(x - h)?) - 9.0 * (g(x + 2.0 * h)? - g(x - 2.0 * h)?)
            + (g(x + 3.0 * h)? - g(x - 3.0 * h)?))
            / (60.0 * h)
    } else {
        let k = if x - 3.0 * h < lo { h } else { -h };
        (-25.0 * g(x)? + 48.0 * g(x + k)? - 36.0 * g(x + 2.0 * k)? + 16.0 * g(x + 3.0 * k)?
            - 3.0 * g(x + 4.0 * k)?)
            / (12.0 * k)
    };
    let gx = g(x)?;
    Ok(dg + j.q(x)? - gx * gx / j.p(x)?)
}

#[cfg(test)]
mod tests {
    use std::f64::consts::PI;

    use super::*;
    use crate::expr::{parse, ParamBindings};
    use crate::jacobi::{build_jacobi, JacobiOptions};
    use crate::variational::{Lagrangian, Path};

    fn damped(beta: f64, omega0: f64, b: f64) -> JacobiSystem {
        JacobiSystem::from_coefficients(
            move |x| (beta * x).exp(),
            move |x| -omega0 * omega0 * (beta * x).exp(),
            0.0,
            b,
        )
        .unwrap()
    }

    #[test]
    fn damped_oscillator_conjugate_point() {
        let rep = damped(0.5, 1.0, 5.0).first_conjugate_point().unwrap();
        let c = 2.0 * PI / (4.0f64 - 0.25).sqrt();
        assert!((rep.conjugate_point.unwrap() - c).abs() < 1e-6);
        assert!(rep.zeros.iter().all(|z| z.simple));
        assert_eq!(rep.method, ConjugateMethod::JacobiField);
    }

    #[test]
    fn harmonic_zeros_are_multiples_of_pi() {
        let j = damped(0.0, 1.0, 10.0);
        let f = j.jacobi_field().unwrap();
        let zs: Vec<f64> = f.events().iter().map(|e| e.x).collect();
        assert_eq!(zs.len(), 3);
        for (k, z) in zs.iter().enumerate() {
            assert!((z - (k + 1) as f64 * PI).abs() < 1e-9);
        }
        assert!((f.eval(1.0).unwrap()[0] - 1f64.sin()).abs() < 1e-8);
    }

    #[test]
    fn lane_emden_singular_protocol() {
        let l = Lagrangian::parse("x^2*(yp^2/2 - y^6/6)", ParamBindings::new()).unwrap();
        let p = Path::analytic(
            parse("sqrt(3)/sqrt(3+x^2)").unwrap(),
            &ParamBindings::new(),
            0.0,
            2.5,
        )
        .unwrap();
        let j = build_jacobi(&l, &p, &JacobiOptions::default()).unwrap();
        let rep = j.first_conjugate_point().unwrap();
        assert_eq!(rep.method, ConjugateMethod::NormalForm);
        assert!((rep.conjugate_point.unwrap() - 3f64.sqrt()).abs() < 1e-6);
        // f = v / x has the same zero
        let f = j.jacobi_field().unwrap();
        assert!((f.events()[0].x - 3f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn boundary_zero_is_reported() {
        let j = damped(0.0, 1.0, PI);
        let rep = j.first_conjugate_point().unwrap();
        let c = rep.conjugate_point.expect("zero at b");
        assert!((c - PI).abs() < 1e-9);
    }

    #[test]
    fn riccati_residual_on_sine() {
        let j = damped(0.0, 1.0, 3.0);
        let f = j.jacobi_field().unwrap();
        assert!(riccati_residual(&j, &f, PI / 4.0).unwrap().abs() < 1e-6);
        let j = damped(0.0, 1.0, 4.0);
        let f = j.jacobi_field().unwrap();
        let z = f.events()[0].x;
        assert!(matches!(
            riccati_residual(&j, &f, z),
            Err(JacobiError::NearZero { .. })
        ));
    }

    #[test]
    fn sign_change_of_p_aborts() {
        let j = JacobiSystem::from_coefficients(|x| 1.0 - x, |_| 0.0, 0.0, 2.0).unwrap();
        assert!(matches!(
            j.jacobi_field(),
            Err(JacobiError::NonPositiveP { .. })
        ));
    }
}
