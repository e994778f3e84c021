use std::f64::consts::{E, PI};
use std::time::Instant;

use crate::expr::{parse, Expr, ParamBindings};
use crate::isoperimetric::{
    admissible_perturbation, determinant_test, entropy, solve_multipliers, MomentProblem,
};
use crate::jacobi::{
    build_jacobi, classify, riccati_residual, ClassifyOptions, JacobiError, JacobiOptions,
    JacobiSystem, Verdict,
};
use crate::odeint::Options;
use crate::variational::{
    check_critical, convexity_certificate, solve_el_ivp, Convexity, IvpOptions, Lagrangian, Path,
    Region,
};

use super::problem::{ConstraintSection, PathSection, ProblemFile};
use super::report::{ClosedForm, IsoperimetricBlock, Report, RiccatiBlock, RiccatiSample};

/// The Riccati diagnostic differentiates the interpolated field, so it is
/// computed from a tighter integration than the other checks.
const RICCATI_RTOL: f64 = 1e-12;

fn ms(t: Instant) -> f64 {
    t.elapsed().as_secs_f64() * 1e3
}

/// Reads, validates and analyses a problem file. Failures are recorded in
/// the report.
pub fn analyze_file(path: &std::path::Path) -> Report {
    let src = path.display().to_string();
    match std::fs::read_to_string(path) {
        Ok(text) => analyze_source(&text, Some(src)),
        Err(e) => Report::new(Some(src.clone()), None).failed(format!("{src}: {e}")),
    }
}

pub fn analyze_source(text: &str, source: Option<String>) -> Report {
    match ProblemFile::parse(text) {
        Ok(file) => analyze(&file, source),
        Err(e) => {
            let msg = match &source {
                Some(s) => format!("{s}: {e}"),
                None => e.to_string(),
            };
            Report::new(source, None).failed(msg)
        }
    }
}

pub fn analyze(file: &ProblemFile, source: Option<String>) -> Report {
    let total = Instant::now();
    let mut report = Report::new(source, Some(file.clone()));
    let outcome = match &file.constraints {
        Some(ConstraintSection::MaxEntropy {
            sigma,
            nodes,
            perturbations,
        }) => run_entropy(file, *sigma, *nodes, *perturbations, &mut report),
        None => run_path(file, &mut report),
    };
    let mut report = match outcome {
        Ok(()) => report,
        Err(e) => {
            let timings = std::mem::take(&mut report.timings_ms);
            let mut r = report.failed(e);
            r.timings_ms = timings;
            r
        }
    };
    report.timings_ms.insert("total".into(), ms(total));
    report
}

/// The path described by the file.
pub fn build_path(file: &ProblemFile, l: &Lagrangian) -> Result<Path, String> {
    let (a, b) = (file.problem.a, file.problem.b);
    match &file.path {
        Some(PathSection::Analytic { expression }) => {
            let y = parse(expression).map_err(|e| e.to_string())?;
            Path::analytic(y, &file.bindings(), a, b).map_err(|e| e.to_string())
        }
        Some(PathSection::SolveIvp { y_a, yp_a }) => {
            let opts = IvpOptions {
                ode: file.ode_options(),
                epsilon: file.analysis.epsilon,
            };
            solve_el_ivp(l, a, b, *y_a, *yp_a, &opts).map_err(|e| e.to_string())
        }
        None => Err("no [path] section".into()),
    }
}

pub fn jacobi_for(file: &ProblemFile) -> Result<(Lagrangian, Path, JacobiSystem), String> {
    let l = file.lagrangian().map_err(|e| e.to_string())?;
    let p = build_path(file, &l)?;
    let j = build_jacobi(
        &l,
        &p,
        &JacobiOptions {
            epsilon: file.analysis.epsilon,
            ode: Some(file.ode_options()),
        },
    )
    .map_err(|e| e.to_string())?;
    Ok((l, p, j))
}

fn run_path(file: &ProblemFile, report: &mut Report) -> Result<(), String> {
    let t = Instant::now();
    let l = file.lagrangian().map_err(|e| e.to_string())?;
    let p = build_path(file, &l)?;
    report.timings_ms.insert("path".into(), ms(t));

    let an = &file.analysis;
    let t = Instant::now();
    let opts = ClassifyOptions {
        region: an.convexity.then(|| file.region()),
        grid: file.grid(),
        epsilon: an.epsilon,
        ode: Some(file.ode_options()),
        legendre: an.legendre,
        sturm: an.sturm,
        conjugate: an.conjugate,
        second_variation_directions: an.second_variation_directions,
    };
    let rep = classify(&l, &p, &opts).map_err(|e| e.to_string())?;
    report.timings_ms.insert("classify".into(), ms(t));
    report.set_verdict(&rep.verdict);

    if an.riccati && rep.critical.passes {
        let t = Instant::now();
        let ode =
            Options::with_tolerances(an.rtol.min(RICCATI_RTOL), an.atol.min(RICCATI_RTOL * 1e-2));
        let j = build_jacobi(
            &l,
            &p,
            &JacobiOptions {
                epsilon: an.epsilon,
                ode: Some(ode),
            },
        )
        .map_err(|e| e.to_string())?;
        report.riccati = Some(riccati_block(&j, an.riccati_samples).map_err(|e| e.to_string())?);
        report.timings_ms.insert("riccati".into(), ms(t));
    }
    report.classification = Some(rep);
    Ok(())
}

/// Riccati residual at interior sample points where the Jacobi field is
/// not close to a zero.
pub fn riccati_block(j: &JacobiSystem, n: usize) -> Result<RiccatiBlock, JacobiError> {
    let f = j.jacobi_field()?;
    let (lo, hi) = f.range();
    let mut block = RiccatiBlock {
        samples: Vec::new(),
        max_abs_residual: 0.0,
        skipped: Vec::new(),
    };
    for i in 1..=n {
        let x = lo + (hi - lo) * i as f64 / (n + 1) as f64;
        match riccati_residual(j, &f, x) {
            Ok(r) => {
                block.max_abs_residual = block.max_abs_residual.max(r.abs());
                block.samples.push(RiccatiSample { x, residual: r });
            }
            Err(JacobiError::NearZero { .. }) => block.skipped.push(x),
            Err(e) => return Err(e),
        }
    }
    Ok(block)
}

/// Deterministic perturbation directions used for the maximality check.
pub fn perturbation_directions(n: usize, sigma: f64) -> Vec<(Expr, f64)> {
    (1..=n)
        .map(|k| {
            let src = format!(
                "cos({}*x) + 0.5*sin({}*x) - 0.3*exp(-x^2/{})",
                k as f64 / (4.0 * sigma),
                (k + 1) as f64 / (6.0 * sigma),
                2.0 * sigma * sigma
            );
            (
                parse(&src).expect("perturbation parses"),
                0.05 + 0.01 * k as f64,
            )
        })
        .collect()
}

fn run_entropy(
    file: &ProblemFile,
    sigma: f64,
    nodes: usize,
    perturbations: usize,
    report: &mut Report,
) -> Result<(), String> {
    let t = Instant::now();
    let prob = MomentProblem::with_truncation(sigma, file.problem.b / sigma, nodes)
        .map_err(|e| e.to_string())?;
    let sol = solve_multipliers(&prob).map_err(|e| e.to_string())?;
    let rho = sol.density_expr();
    let domain = prob.domain();
    let closed = ClosedForm {
        lambda1: 1.0 + (1.0 / ((2.0 * PI).sqrt() * sigma)).ln(),
        lambda2: -1.0 / (2.0 * sigma * sigma),
        entropy: 0.5 * (2.0 * PI * E * sigma * sigma).ln(),
    };
    let density_max_error = (0..=800)
        .map(|i| {
            let x = -4.0 * sigma + 8.0 * sigma * i as f64 / 800.0;
            let exact = (-x * x / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma);
            (sol.density(x) - exact).abs()
        })
        .fold(0.0, f64::max);
    let x2rho = Expr::mul(Expr::pow(Expr::x(), Expr::num(2.0)), rho.clone());
    let determinant = determinant_test(&rho, &x2rho, domain, nodes).map_err(|e| e.to_string())?;
    let h = entropy(&rho, domain, nodes).map_err(|e| e.to_string())?;
    let perturbed_entropies = perturbation_directions(perturbations, sigma)
        .iter()
        .map(|(dir, eps)| {
            let r = admissible_perturbation(&rho, dir, *eps, &prob)?;
            entropy(&r, domain, nodes)
        })
        .collect::<Result<Vec<f64>, _>>()
        .map_err(|e| e.to_string())?;
    let maximal = perturbed_entropies.iter().all(|&e| e < h);
    report.timings_ms.insert("multipliers".into(), ms(t));

    let t = Instant::now();
    let mut params = file.bindings();
    params.insert("lambda1", sol.lambda1);
    params.insert("lambda2", sol.lambda2);
    let augmented = format!("({}) + lambda1*y + lambda2*x^2*y", file.problem.lagrangian);
    let l = Lagrangian::parse(&augmented, params).map_err(|e| e.to_string())?;
    let path = Path::analytic(rho.clone(), &ParamBindings::new(), domain.0, domain.1)
        .map_err(|e| e.to_string())?;
    let critical = check_critical(&l, &path, 1001).map_err(|e| e.to_string())?;
    let y_max = sol.density(0.0);
    let region = Region {
        x: domain,
        y: (sol.density(domain.1), y_max),
        yp: (file.analysis.yp_range[0], file.analysis.yp_range[1]),
    };
    let concavity = convexity_certificate(&l, &region, file.grid());
    let verdict = match (critical.passes, concavity.verdict) {
        (true, Convexity::Concave) => Verdict::GlobalMaximumByConcavity,
        (true, Convexity::Convex) => Verdict::GlobalMinimumByConvexity,
        _ => Verdict::Indeterminate,
    };
    report.timings_ms.insert("certificate".into(), ms(t));
    report.set_verdict(&verdict);
    report.isoperimetric = Some(IsoperimetricBlock {
        verdict,
        problem: prob,
        multipliers: sol,
        closed_form: closed,
        density_max_error,
        determinant,
        entropy: h,
        perturbed_entropies,
        maximal,
        critical,
        concavity,
    });
    Ok(())
}
