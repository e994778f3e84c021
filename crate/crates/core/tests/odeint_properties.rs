use std::f64::consts::PI;

use varcalc::odeint::{integrate, EventSpec, FieldError, Options, Status};

fn oscillator(_x: f64, s: &[f64], out: &mut [f64]) -> Result<(), FieldError> {
    out[0] = s[1];
    out[1] = -s[0];
    Ok(())
}

fn endpoint_error(opts: &Options, x1: f64) -> f64 {
    let sol = integrate(oscillator, 0.0, &[0.0, 1.0], x1, opts, &[]).unwrap();
    let s = sol.final_state();
    ((s[0] - x1.sin()).powi(2) + (s[1] - x1.cos()).powi(2)).sqrt()
}

#[test]
fn fixed_step_convergence_is_fifth_order() {
    // huge tolerance plus a step cap pins the step size
    let mut ratios = Vec::new();
    let mut prev = None;
    for k in 0..4 {
        let h = 0.2 / 2f64.powi(k);
        let opts = Options {
            rtol: 1e3,
            atol: 1e3,
            h0: Some(h),
            h_max: Some(h),
            ..Options::default()
        };
        let e = endpoint_error(&opts, 4.0);
        if let Some(p) = prev {
            ratios.push(p / e);
        }
        prev = Some(e);
    }
    for r in &ratios {
        assert!(*r >= 16.0, "halving h only reduced the error by {r}");
    }
}

#[test]
fn tolerance_decades_reduce_error_consistently() {
    let tols = [1e-5, 1e-6, 1e-7, 1e-8, 1e-9, 1e-10];
    let errs: Vec<f64> = tols
        .iter()
        .map(|&t| endpoint_error(&Options::with_tolerances(t, t), 10.0))
        .collect();
    let decades = (tols.len() - 1) as f64;
    let mean_ratio = (errs[0] / errs[errs.len() - 1]).powf(1.0 / decades);
    // error ~ tol^(6/5) with local extrapolation
    assert!(
        mean_ratio >= 10.0,
        "errors {errs:?}, mean ratio per decade {mean_ratio}"
    );
    eprintln!("mean error ratio per tolerance decade: {mean_ratio:.2}");
}

#[test]
fn event_locations_do_not_depend_on_initial_step() {
    let ev = || [EventSpec::component(0)];
    let zeros = |h0: f64| -> Vec<f64> {
        let opts = Options {
            h0: Some(h0),
            ..Options::default()
        };
        let ev = ev();
        let sol = integrate(oscillator, 0.0, &[0.0, 1.0], 20.0, &opts, &ev).unwrap();
        sol.events().iter().map(|e| e.x).collect()
    };
    let a = zeros(1e-2);
    let b = zeros(1e-3);
    assert_eq!(a.len(), 6);
    assert_eq!(a.len(), b.len());
    for (k, (p, q)) in a.iter().zip(&b).enumerate() {
        assert!((p - q).abs() <= 1e-10, "{p} vs {q}");
        assert!((p - (k + 1) as f64 * PI).abs() <= 1e-9);
    }
}

#[test]
fn energy_drift_over_ten_periods() {
    let sol = integrate(
        oscillator,
        0.0,
        &[0.0, 1.0],
        20.0 * PI,
        &Options::default(),
        &[],
    )
    .unwrap();
    let drift = sol
        .states()
        .iter()
        .map(|s| (s[0] * s[0] + s[1] * s[1] - 1.0).abs())
        .fold(0.0, f64::max);
    assert!(drift < 1e-6, "energy drift {drift}");
}

#[test]
fn lane_emden_n5_normal_form_first_zero() {
    let field = |x: f64, s: &[f64], out: &mut [f64]| {
        out[0] = s[1];
        out[1] = -45.0 / (3.0 + x * x).powi(2) * s[0];
        Ok(())
    };
    let ev = [EventSpec::component(0)];
    let sol = integrate(field, 1e-6, &[1e-6, 1.0], 10.0, &Options::default(), &ev).unwrap();
    let first = sol.events()[0].x;
    assert!((first - 3f64.sqrt()).abs() < 1e-6, "{first}");
    assert_eq!(sol.events().len(), 1, "only one zero after the origin");
    assert_eq!(*sol.status(), Status::Completed);
}
