use std::f64::consts::PI;

use varcalc::expr::{parse, ParamBindings};
use varcalc::jacobi::{classify, ClassifyOptions, Verdict};
use varcalc::variational::{solve_el_ivp, IvpOptions, Lagrangian, Path, Region};

fn bindings(pairs: &[(&str, f64)]) -> ParamBindings {
    ParamBindings::from_pairs(pairs.iter().copied())
}

fn region(a: f64, b: f64) -> Region {
    Region {
        x: (a, b),
        y: (-10.0, 10.0),
        yp: (-10.0, 10.0),
    }
}

fn opts(region: Region) -> ClassifyOptions {
    ClassifyOptions {
        region: Some(region),
        ..ClassifyOptions::default()
    }
}

#[test]
fn damped_oscillator_fails_beyond_closed_form() {
    let params = bindings(&[("beta", 0.5), ("omega0", 1.0), ("omega", 2.0)]);
    let l = Lagrangian::parse(
        "0.5*exp(beta*x)*(yp^2 - (beta*sin(omega*x) - omega*cos(omega*x))/(omega^2 + beta^2)*yp - omega0^2*y^2)",
        params,
    )
    .unwrap();
    let p = solve_el_ivp(&l, 0.0, 5.0, 0.0, 0.0, &IvpOptions::default()).unwrap();
    let rep = classify(&l, &p, &opts(region(0.0, 5.0))).unwrap();
    let c = 2.0 * PI / 3.75f64.sqrt();
    match rep.verdict {
        Verdict::MinimalityFailsBeyond { c: got } => assert!((got - c).abs() < 1e-6, "{got}"),
        other => panic!("{other:?}"),
    }
    let sv = rep.second_variation.unwrap();
    assert!(sv.consistent, "{sv:?}");
}

#[test]
fn lane_emden_n0_is_convex() {
    let l = Lagrangian::parse("x^2*(yp^2/2 - y^(n+1)/(n+1))", bindings(&[("n", 0.0)])).unwrap();
    let p = solve_el_ivp(&l, 0.0, 2.0, 1.0, 0.0, &IvpOptions::default()).unwrap();
    let rep = classify(&l, &p, &opts(region(0.0, 2.0))).unwrap();
    assert_eq!(rep.verdict, Verdict::GlobalMinimumByConvexity);
    assert!(rep.singular_start.is_some());
}

#[test]
fn lane_emden_n1_ladder() {
    let l = Lagrangian::parse("x^2*(yp^2/2 - y^(n+1)/(n+1))", bindings(&[("n", 1.0)])).unwrap();
    let p = solve_el_ivp(&l, 0.0, 13.0, 1.0, 0.0, &IvpOptions::default()).unwrap();
    let rep = classify(&l, &p, &opts(region(0.0, 13.0))).unwrap();
    match rep.verdict {
        Verdict::MinimalityFailsBeyond { c } => assert!((c - PI).abs() < 1e-5, "{c}"),
        other => panic!("{other:?}"),
    }
    let zeros: Vec<f64> = rep.conjugate.unwrap().zeros.iter().map(|z| z.x).collect();
    assert_eq!(zeros.len(), 4);
    for (k, z) in zeros.iter().enumerate() {
        assert!((z - (k + 1) as f64 * PI).abs() < 1e-5);
    }
    assert!(rep.second_variation.unwrap().consistent);
}

#[test]
fn lane_emden_n5_minimum_before_sqrt3() {
    let l = Lagrangian::parse("x^2*(yp^2/2 - y^(n+1)/(n+1))", bindings(&[("n", 5.0)])).unwrap();
    let y = parse("sqrt(3)/sqrt(3+x^2)").unwrap();
    let p = Path::analytic(y.clone(), &ParamBindings::new(), 0.0, 1.7).unwrap();
    let rep = classify(&l, &p, &opts(region(0.0, 1.7))).unwrap();
    assert_eq!(rep.verdict, Verdict::LocalMinimum, "{:?}", rep.reasons);
    assert!(rep.second_variation.unwrap().consistent);

    let p = Path::analytic(y, &ParamBindings::new(), 0.0, 2.5).unwrap();
    let rep = classify(&l, &p, &opts(region(0.0, 2.5))).unwrap();
    match rep.verdict {
        Verdict::MinimalityFailsBeyond { c } => assert!((c - 3f64.sqrt()).abs() < 1e-6, "{c}"),
        other => panic!("{other:?}"),
    }
    let sv = rep.second_variation.unwrap();
    assert!(sv.consistent, "{sv:?}");
}

#[test]
fn quantum_gravity_has_no_conjugate_point() {
    let params = bindings(&[("omega", 1.0)]);
    let l = Lagrangian::parse("0.5*exp(x/2)*(exp(-x)*yp^2 + omega*y^2)", params.clone()).unwrap();
    let p = Path::analytic(
        parse("exp(-2*sqrt(omega)*exp(x/2))").unwrap(),
        &params,
        0.0,
        4.0,
    )
    .unwrap();
    let rep = classify(&l, &p, &opts(region(0.0, 4.0))).unwrap();
    assert_eq!(rep.verdict, Verdict::GlobalMinimumByConvexity);
    let conj = rep.conjugate.unwrap();
    assert!(conj.conjugate_point.is_none() && conj.reached_b);
    assert!(rep.second_variation.unwrap().consistent);
}

#[test]
fn square_root_hamiltonian_has_no_conjugate_point() {
    let params = bindings(&[("gamma", 1.0), ("A0", 1.0)]);
    let l = Lagrangian::parse("-exp(gamma*x)*sqrt(1-yp^2)", params.clone()).unwrap();
    let y = parse("-A0*asinh(exp(-gamma*x)*abs(A0))/(gamma*abs(A0))").unwrap();
    let p = Path::analytic(y, &params, 0.0, 10.0).unwrap();
    let r = Region {
        x: (0.0, 10.0),
        y: (-10.0, 10.0),
        yp: (-0.99, 0.99),
    };
    let rep = classify(&l, &p, &opts(r)).unwrap();
    assert_eq!(rep.verdict, Verdict::GlobalMinimumByConvexity);
    assert!(rep.conjugate.unwrap().conjugate_point.is_none());
}

#[test]
fn quartic_kink_certified_by_negative_r() {
    let params = bindings(&[("lambda", 1.0), ("m", 1.0)]);
    let l = Lagrangian::parse("yp^2/2 + lambda/4*(y^2 - m^2/lambda)^2", params.clone()).unwrap();
    let p = Path::analytic(
        parse("m*sqrt(2/lambda)*sec(m*x)").unwrap(),
        &params,
        -1.5,
        1.5,
    )
    .unwrap();
    let rep = classify(&l, &p, &opts(region(-1.5, 1.5))).unwrap();
    assert_eq!(rep.verdict, Verdict::LocalMinimum);
    assert_eq!(
        rep.reasons
            .iter()
            .filter(|r| r.code == "no_zeros_certificate")
            .count(),
        1
    );
    assert!(rep.sturm.no_zeros.unwrap().max_r <= -5.0 + 1e-6);
}

#[test]
fn non_critical_path_is_indeterminate() {
    let l = Lagrangian::parse("(yp^2 - y^2)/2", ParamBindings::new()).unwrap();
    let p = Path::analytic(parse("x^2").unwrap(), &ParamBindings::new(), 0.0, 1.0).unwrap();
    let rep = classify(&l, &p, &ClassifyOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Indeterminate);
    assert_eq!(rep.reasons[0].code, "not_critical");
}

#[test]
fn boundary_conjugate_point_is_indeterminate() {
    let l = Lagrangian::parse("(yp^2 - y^2)/2", ParamBindings::new()).unwrap();
    let p = Path::analytic(parse("0").unwrap(), &ParamBindings::new(), 0.0, PI).unwrap();
    let rep = classify(&l, &p, &ClassifyOptions::default()).unwrap();
    assert_eq!(rep.verdict, Verdict::Indeterminate);
    assert!(rep
        .reasons
        .iter()
        .any(|r| r.code == "boundary_conjugate_point"));
}
