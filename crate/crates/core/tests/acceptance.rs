//! Acceptance criteria, one pass/fail line each.

use std::f64::consts::PI;
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::process::ExitCode;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use varcalc::cli::run::jacobi_for;
use varcalc::cli::{analyze_source, ProblemFile, FIXTURES};
use varcalc::expr::{parse, Expr, ParamBindings};
use varcalc::isoperimetric::{solve_multipliers, MomentProblem};
use varcalc::jacobi::{
    build_jacobi, classify, comparison_bounds, interlace_check, jacobi_from_family, ClassificationReport,
    ClassifyOptions, InterlaceVerdict, JacobiOptions, JacobiSystem, Verdict,
};
use varcalc::odeint::Options;
use varcalc::variational::{
    action, convexity_certificate, first_variation, second_variation, solve_el_ivp, Convexity, Grid,
    IvpOptions, Lagrangian, Path, Region, TestDirection,
};

type Outcome = Result<String, String>;

fn check(cond: bool, msg: impl Into<String>) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg.into())
    }
}

fn bindings(pairs: &[(&str, f64)]) -> ParamBindings {
    ParamBindings::from_pairs(pairs.iter().copied())
}

fn region(a: f64, b: f64) -> Region {
    Region { x: (a, b), y: (-10.0, 10.0), yp: (-10.0, 10.0) }
}

fn fixture(name: &str) -> ProblemFile {
    ProblemFile::parse(FIXTURES.iter().find(|f| f.name == name).unwrap().source).unwrap()
}

fn fixture_classification(name: &str) -> ClassificationReport {
    let f = FIXTURES.iter().find(|f| f.name == name).unwrap();
    analyze_source(f.source, None).classification.unwrap()
}

const DAMPED: &str =
    "0.5*exp(beta*x)*(yp^2 - (beta*sin(omega*x) - omega*cos(omega*x))/(omega^2 + beta^2)*yp - omega0^2*y^2)";

fn damped_report(omega0: f64, beta: f64) -> ClassificationReport {
    let l = Lagrangian::parse(DAMPED, bindings(&[("beta", beta), ("omega0", omega0), ("omega", 2.0)])).unwrap();
    let p = solve_el_ivp(&l, 0.0, 5.0, 0.0, 0.0, &IvpOptions::default()).unwrap();
    classify(&l, &p, &ClassifyOptions::default()).unwrap()
}

const DAMPED_GRID: [(f64, f64); 8] =
    [(1.0, 0.0), (1.0, 0.25), (1.0, 0.5), (1.0, 1.0), (2.0, 0.0), (2.0, 0.25), (2.0, 0.5), (2.0, 1.0)];

fn lane_emden(n: f64) -> Lagrangian {
    Lagrangian::parse("x^2*(yp^2/2 - y^(n+1)/(n+1))", bindings(&[("n", n)])).unwrap()
}

fn damped_conjugate_points() -> Outcome {
    let mut worst: f64 = 0.0;
    for (omega0, beta) in DAMPED_GRID {
        let rep = damped_report(omega0, beta);
        let exact = 2.0 * PI / (4.0 * omega0 * omega0 - beta * beta).sqrt();
        let Verdict::MinimalityFailsBeyond { c } = rep.verdict else {
            return Err(format!("omega0 {omega0}, beta {beta}: verdict {:?}", rep.verdict));
        };
        check((c - exact).abs() <= 1e-6, format!("omega0 {omega0}, beta {beta}: c {c} vs {exact}"))?;
        if beta == 0.0 {
            check((c - PI / omega0).abs() <= 1e-6, format!("beta 0: c {c} vs pi/omega0"))?;
        }
        worst = worst.max((c - exact).abs());
    }
    Ok(format!("8 cases, max |c - 2 pi / sqrt(4 omega0^2 - beta^2)| = {worst:.2e}"))
}

fn lane_emden_n5() -> Outcome {
    let p = Path::analytic(parse("sqrt(3)/sqrt(3+x^2)").unwrap(), &ParamBindings::new(), 0.0, 2.5).unwrap();
    let rep = classify(&lane_emden(5.0), &p, &ClassifyOptions::default()).unwrap();
    let Verdict::MinimalityFailsBeyond { c } = rep.verdict else {
        return Err(format!("verdict {:?}", rep.verdict));
    };
    let err = (c - 3f64.sqrt()).abs();
    check(err <= 1e-6, format!("c = {c}"))?;
    check(rep.singular_start.is_some(), "left endpoint not treated as singular")?;
    Ok(format!("c = {c:.10}, |c - sqrt 3| = {err:.2e}"))
}

fn lane_emden_n1() -> Outcome {
    let l = lane_emden(1.0);
    let p = solve_el_ivp(&l, 0.0, 13.0, 1.0, 0.0, &IvpOptions::default()).unwrap();
    let rep = classify(&l, &p, &ClassifyOptions::default()).unwrap();
    let Verdict::MinimalityFailsBeyond { c } = rep.verdict else {
        return Err(format!("verdict {:?}", rep.verdict));
    };
    check((c - PI).abs() <= 1e-5, format!("c = {c}"))?;
    let zeros: Vec<f64> = rep.conjugate.unwrap().zeros.iter().map(|z| z.x).collect();
    check(zeros.len() >= 4, format!("zeros {zeros:?}"))?;
    let mut worst: f64 = 0.0;
    for k in 1..=4 {
        let err = (zeros[k - 1] - k as f64 * PI).abs();
        check(err <= 1e-5, format!("zero {k}: {}", zeros[k - 1]))?;
        worst = worst.max(err);
    }
    Ok(format!("c = {c:.10}, ladder k pi (k = 1..4) max err {worst:.2e}"))
}

fn lane_emden_n0() -> Outcome {
    let l = lane_emden(0.0);
    let cert = convexity_certificate(&l, &region(0.0, 2.0), Grid::default());
    check(cert.verdict == Convexity::Convex, format!("certificate {:?}", cert.verdict))?;
    let p = solve_el_ivp(&l, 0.0, 2.0, 1.0, 0.0, &IvpOptions::default()).unwrap();
    let opts = ClassifyOptions { region: Some(region(0.0, 2.0)), ..ClassifyOptions::default() };
    let rep = classify(&l, &p, &opts).unwrap();
    check(rep.verdict == Verdict::GlobalMinimumByConvexity, format!("verdict {:?}", rep.verdict))?;
    Ok("CONVEX, GLOBAL_MINIMUM_BY_CONVEXITY".into())
}

fn no_conjugate_examples() -> Outcome {
    for name in ["quantum_gravity_1d", "sqrt_hamiltonian"] {
        let rep = fixture_classification(name);
        let conj = rep.conjugate.as_ref().ok_or(format!("{name}: no conjugate block"))?;
        check(conj.conjugate_point.is_none(), format!("{name}: conjugate point {:?}", conj.conjugate_point))?;
        check(conj.reached_b, format!("{name}: search stopped at {}", conj.searched_to))?;
    }
    let (_, _, j) = jacobi_for(&fixture("quantum_gravity_1d")).unwrap();
    let f = j.with_ode_options(Options::with_tolerances(1e-12, 1e-14)).jacobi_field().unwrap();
    let exact = |x: f64| (2.0 * ((x / 2.0).exp() - 1.0)).sinh();
    let n = 401;
    let xs: Vec<f64> = (0..n).map(|i| 4.0 * i as f64 / (n - 1) as f64).collect();
    let got: Vec<f64> = xs.iter().map(|&x| f.eval(x).unwrap()[0]).collect();
    let (gmax, emax) = (got.iter().fold(0.0f64, |m, v| m.max(v.abs())), exact(4.0));
    let worst = xs.iter().zip(&got).map(|(&x, g)| (g / gmax - exact(x) / emax).abs()).fold(0.0, f64::max);
    check(worst <= 1e-6, format!("normalised field error {worst:.2e}"))?;
    Ok(format!("no conjugate points; normalised field vs sinh(2(e^(x/2) - 1)) max err {worst:.2e}"))
}

fn quartic_certificate() -> Outcome {
    let params = bindings(&[("lambda", 1.0), ("m", 1.0)]);
    let l = Lagrangian::parse("yp^2/2 + lambda/4*(y^2 - m^2/lambda)^2", params.clone()).unwrap();
    let p = Path::analytic(parse("m*sqrt(2/lambda)*sec(m*x)").unwrap(), &params, -1.55, 1.55).unwrap();
    let j = build_jacobi(&l, &p, &JacobiOptions::default()).unwrap();
    let n = 3101;
    let max_r = (0..n)
        .map(|i| j.r(-1.55 + 3.1 * i as f64 / (n - 1) as f64).unwrap())
        .fold(f64::NEG_INFINITY, f64::max);
    check(max_r <= -5.0 + 1e-6, format!("max r = {max_r}"))?;
    let rep = fixture_classification("quartic_kink");
    check(rep.verdict == Verdict::LocalMinimum, format!("verdict {:?}", rep.verdict))?;
    check(rep.reasons.iter().any(|r| r.code == "no_zeros_certificate"), "verdict not from the no-zeros certificate")?;
    Ok(format!("max r on [-1.55, 1.55] = {max_r:.9}, LOCAL_MINIMUM via no-zeros certificate"))
}

fn entropy_multipliers() -> Outcome {
    let (mut e1, mut e2, mut ed): (f64, f64, f64) = (0.0, 0.0, 0.0);
    for sigma in [0.5, 1.0, 2.0, 5.0] {
        let s = solve_multipliers(&MomentProblem::new(sigma).unwrap()).map_err(|e| e.to_string())?;
        let l1 = 1.0 + (1.0 / ((2.0 * PI).sqrt() * sigma)).ln();
        let l2 = -1.0 / (2.0 * sigma * sigma);
        e1 = e1.max((s.lambda1 - l1).abs());
        e2 = e2.max((s.lambda2 - l2).abs());
        for i in 0..=1000 {
            let x = -4.0 * sigma + 8.0 * sigma * i as f64 / 1000.0;
            let g = (-x * x / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma);
            ed = ed.max((s.density(x) - g).abs());
        }
    }
    check(e1 <= 1e-8 && e2 <= 1e-10 && ed <= 1e-8, format!("errors lambda1 {e1:.2e}, lambda2 {e2:.2e}, density {ed:.2e}"))?;
    Ok(format!("sigma in {{0.5, 1, 2, 5}}: lambda1 err {e1:.2e}, lambda2 err {e2:.2e}, density err {ed:.2e}"))
}

fn poly(cs: &[f64]) -> String {
    cs.iter().enumerate().map(|(i, c)| format!("({c})*x^{i}")).collect::<Vec<_>>().join(" + ")
}

fn variation_oracle() -> Outcome {
    const MONOMIALS: [&str; 10] = ["1", "x", "y", "yp", "y^2", "yp^2", "x*y*yp", "y^2*yp", "yp^3", "x^2*y^3"];
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst: f64 = 0.0;
    for case in 0..200 {
        let src = MONOMIALS
            .iter()
            .map(|m| format!("({})*{m}", rng.gen_range(-1.0..1.0)))
            .collect::<Vec<_>>()
            .join(" + ");
        let a = rng.gen_range(-1.0..0.5);
        let b = a + rng.gen_range(0.5..2.0);
        let ycs: Vec<f64> = (0..3).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let vcs: Vec<f64> = (0..2).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let l = Lagrangian::parse(&src, ParamBindings::new()).unwrap();
        let p = Path::analytic(parse(&poly(&ycs)).unwrap(), &ParamBindings::new(), a, b).unwrap();
        let v: Expr = parse(&format!("(x - ({a}))*(({b}) - x)*({})", poly(&vcs))).unwrap();
        let dir = TestDirection::new(v.clone(), a, b).unwrap();
        let j = |t: f64| action(&l, &p.perturbed(&v, t).unwrap()).unwrap();
        let rich = |coarse: f64, fine: f64| (4.0 * fine - coarse) / 3.0;
        let d1 = |h: f64| (j(h) - j(-h)) / (2.0 * h);
        let j0 = j(0.0);
        let d2 = |h: f64| (j(h) - 2.0 * j0 + j(-h)) / (h * h);
        let fd1 = rich(d1(1e-2), d1(5e-3));
        let fd2 = rich(d2(1e-2), d2(5e-3));
        let ex1 = first_variation(&l, &p, &dir).unwrap();
        let ex2 = second_variation(&l, &p, &dir).unwrap();
        let r1 = (fd1 - ex1).abs() / ex1.abs().max(1.0);
        let r2 = (fd2 - ex2).abs() / ex2.abs().max(1.0);
        check(r1 <= 1e-6 && r2 <= 1e-6, format!("case {case}: first {fd1} vs {ex1}, second {fd2} vs {ex2}"))?;
        worst = worst.max(r1).max(r2);
    }
    Ok(format!("200 random cases, max relative deviation {worst:.2e}"))
}

fn second_variation_consistency() -> Outcome {
    let mut reports: Vec<(String, ClassificationReport)> = DAMPED_GRID
        .iter()
        .map(|&(w, b)| (format!("damped({w}, {b})"), damped_report(w, b)))
        .collect();
    for f in FIXTURES.iter().filter(|f| f.name != "entropy") {
        reports.push((f.name.to_string(), fixture_classification(f.name)));
    }
    let p = Path::analytic(parse("sqrt(3)/sqrt(3+x^2)").unwrap(), &ParamBindings::new(), 0.0, 2.5).unwrap();
    reports.push(("lane_emden_n5 on [0, 2.5]".into(), classify(&lane_emden(5.0), &p, &ClassifyOptions::default()).unwrap()));
    let (mut truncated, mut sine) = (0, 0);
    for (name, rep) in &reports {
        let conj = rep.conjugate.as_ref().and_then(|c| c.conjugate_point);
        let min_p = rep.legendre.as_ref().map(|l| l.min_p).unwrap_or(f64::NAN);
        let sv = rep.second_variation.as_ref().ok_or(format!("{name}: no second-variation block"))?;
        match conj {
            Some(_) if matches!(rep.verdict, Verdict::MinimalityFailsBeyond { .. }) => {
                check(sv.values.iter().any(|&v| v <= 1e-6), format!("{name}: {:?}", sv.values))?;
                truncated += 1;
            }
            None if min_p > 0.0 => {
                check(sv.values.len() == 12 && sv.values.iter().all(|&v| v > 0.0), format!("{name}: {:?}", sv.values))?;
                sine += 1;
            }
            _ => {}
        }
    }
    Ok(format!("{truncated} conjugate cases with second variation <= 1e-6, {sine} cases with 12 positive sine directions"))
}

fn fourier_system(rng: &mut ChaCha8Rng, len: f64) -> JacobiSystem {
    let k: f64 = rng.gen_range(1.0..3.0);
    let w: f64 = rng.gen_range(0.3..2.0);
    let raw: Vec<(f64, f64)> = (0..3).map(|_| (rng.gen_range(-1.0..1.0), rng.gen_range(0.0..2.0 * PI))).collect();
    let total: f64 = raw.iter().map(|t| t.0.abs()).sum();
    let terms: Vec<(f64, f64)> = raw.into_iter().map(|(a, phi)| (0.5 * k * k * a / total, phi)).collect();
    JacobiSystem::from_normal_form(
        move |x| k * k + terms.iter().enumerate().map(|(n, (a, phi))| a * ((n + 1) as f64 * w * x + phi).sin()).sum::<f64>(),
        0.0,
        len,
    )
    .unwrap()
}

fn sturm_suite() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for case in 0..50 {
        let (amp, freq, k, c, d) = (
            rng.gen_range(0.0..0.5),
            rng.gen_range(0.2..3.0),
            rng.gen_range(1.0..3.0),
            rng.gen_range(-0.5..0.5),
            rng.gen_range(0.2..3.0),
        );
        let j = JacobiSystem::from_coefficients(
            move |x: f64| 1.0 + amp * (freq * x).sin(),
            move |x: f64| -(k * k) * (1.0 + c * (d * x).cos()),
            0.0,
            4.0 * PI,
        )
        .unwrap();
        let ic = interlace_check(&j).unwrap();
        check(ic.verdict == InterlaceVerdict::Holds, format!("interlacing case {case}: {ic:?}"))?;
    }
    let mut gaps = 0;
    for case in 0..50 {
        let len = rng.gen_range(6.0..14.0);
        let j = fourier_system(&mut rng, len);
        let bounds = comparison_bounds(&j, 0.0, len).unwrap().ok_or("r not positive")?;
        let mut zs = vec![0.0];
        zs.extend(j.jacobi_field().unwrap().events().iter().map(|e| e.x));
        for g in zs.windows(2).map(|w| w[1] - w[0]) {
            check(g >= bounds.gap_lo - 1e-6 && g <= bounds.gap_hi + 1e-6, format!("comparison case {case}: gap {g} outside {bounds:?}"))?;
            gaps += 1;
        }
    }
    let mut zeros = 0;
    for f in FIXTURES.iter().filter(|f| f.name != "entropy") {
        let (_, _, j) = jacobi_for(&fixture(f.name)).unwrap();
        let rep = j.first_conjugate_point().unwrap();
        for z in &rep.zeros {
            check(z.simple && z.slope.abs() > 1e-9 * rep.scale, format!("{}: zero {z:?} not simple", f.name))?;
            zeros += 1;
        }
    }
    Ok(format!("50 interlacing cases, {gaps} gaps bracketed, {zeros} fixture zeros simple"))
}

fn family_check() -> Outcome {
    let p = Path::analytic(parse("sqrt(3)/sqrt(3+x^2)").unwrap(), &ParamBindings::new(), 0.0, 3.0).unwrap();
    let j = build_jacobi(&lane_emden(5.0), &p, &JacobiOptions::default()).unwrap();
    let family = parse("sqrt(alpha/((alpha*x)^2/beta + beta/3))").unwrap();
    let fam = jacobi_from_family(&family, ("alpha", "beta"), (1.0, 3.0), &ParamBindings::new(), &j, 0.1, 3.0, 291)
        .map_err(|e| e.to_string())?;
    let worst = fam
        .xs
        .iter()
        .zip(&fam.d_alpha)
        .map(|(x, d)| (d + 3f64.sqrt() * (x * x - 3.0) / (2.0 * (x * x + 3.0).powf(1.5))).abs())
        .fold(0.0, f64::max);
    check(worst <= 1e-5, format!("d y / d alpha error {worst:.2e}"))?;
    check(fam.residual_alpha <= 1e-4, format!("Jacobi residual {:.2e}", fam.residual_alpha))?;
    Ok(format!("d y / d alpha max err {worst:.2e}, Jacobi residual {:.2e}", fam.residual_alpha))
}

fn main() -> ExitCode {
    let criteria: [(&str, fn() -> Outcome); 11] = [
        ("damped oscillator conjugate points", damped_conjugate_points),
        ("Lane-Emden n=5 conjugate point", lane_emden_n5),
        ("Lane-Emden n=1 zero ladder", lane_emden_n1),
        ("Lane-Emden n=0 convexity", lane_emden_n0),
        ("quantum gravity and square-root Hamiltonian", no_conjugate_examples),
        ("quartic kink r-certificate", quartic_certificate),
        ("entropy multipliers", entropy_multipliers),
        ("variation formulas vs finite differences", variation_oracle),
        ("conjugate point and second variation", second_variation_consistency),
        ("Sturm suite", sturm_suite),
        ("parametric family", family_check),
    ];
    let mut failed = 0;
    for (i, (name, run)) in criteria.iter().enumerate() {
        let outcome = catch_unwind(AssertUnwindSafe(run)).unwrap_or_else(|e| {
            let msg = e
                .downcast_ref::<String>()
                .cloned()
                .or_else(|| e.downcast_ref::<&str>().map(|s| s.to_string()))
                .unwrap_or_default();
            Err(format!("panicked: {msg}"))
        });
        match outcome {
            Ok(detail) => println!("criterion {:>2} PASS  {name}: {detail}", i + 1),
            Err(detail) => {
                failed += 1;
                println!("criterion {:>2} FAIL  {name}: {detail}", i + 1);
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
