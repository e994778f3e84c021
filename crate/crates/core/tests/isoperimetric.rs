use std::f64::consts::{E, PI};

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use varcalc::expr::{parse, ParamBindings};
use varcalc::isoperimetric::{
    admissible_perturbation, determinant_test, entropy, solve_multipliers, MomentProblem,
};

const SIGMAS: [f64; 4] = [0.5, 1.0, 2.0, 5.0];

/// Composite Simpson rule on `n` (even) panels.
fn simpson(f: impl Fn(f64) -> f64, a: f64, b: f64, n: usize) -> f64 {
    let h = (b - a) / n as f64;
    let inner: f64 = (1..n).map(|i| f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 }).sum();
    (f(a) + inner + f(b)) * h / 3.0
}

#[test]
fn multipliers_match_closed_forms() {
    for sigma in SIGMAS {
        let s = solve_multipliers(&MomentProblem::new(sigma).unwrap()).unwrap();
        let l1 = 1.0 + (1.0 / ((2.0 * PI).sqrt() * sigma)).ln();
        let l2 = -1.0 / (2.0 * sigma * sigma);
        assert!((s.lambda1 - l1).abs() <= 1e-8, "sigma {sigma}: {} vs {l1}", s.lambda1);
        assert!((s.lambda2 - l2).abs() <= 1e-10, "sigma {sigma}: {} vs {l2}", s.lambda2);
        assert!(s.residual_mass.abs() <= 1e-10);
        assert!(s.residual_moment.abs() <= 1e-10 * sigma * sigma);
        assert!((s.lambda2 * sigma * sigma + 0.5).abs() <= 1e-9);
    }
}

#[test]
fn density_matches_gaussian() {
    for sigma in SIGMAS {
        let s = solve_multipliers(&MomentProblem::new(sigma).unwrap()).unwrap();
        for i in 0..=800 {
            let x = -4.0 * sigma + 8.0 * sigma * i as f64 / 800.0;
            let g = (-x * x / (2.0 * sigma * sigma)).exp() / ((2.0 * PI).sqrt() * sigma);
            assert!((s.density(x) - g).abs() <= 1e-8, "sigma {sigma}, x {x}");
        }
    }
}

#[test]
fn gaussian_entropy() {
    for sigma in SIGMAS {
        let prob = MomentProblem::new(sigma).unwrap();
        let s = solve_multipliers(&prob).unwrap();
        let h = entropy(&s.density_expr(), prob.domain(), prob.nodes).unwrap();
        let exact = 0.5 * (2.0 * PI * E * sigma * sigma).ln();
        assert!((h - exact).abs() <= 1e-9, "sigma {sigma}: {h} vs {exact}");
    }
}

#[test]
fn perturbations_lose_entropy() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for sigma in [1.0, 2.0] {
        let prob = MomentProblem::new(sigma).unwrap();
        let s = solve_multipliers(&prob).unwrap();
        let rho0 = s.density_expr();
        let best = entropy(&rho0, prob.domain(), prob.nodes).unwrap();
        let (lo, hi) = prob.domain();
        for _ in 0..20 {
            let (a, b, c) = (rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(0.1..2.0));
            let h = parse(&format!("({a})*cos({c}*x/({sigma})) + ({b})*sin(x/({sigma}))*exp(-x^2/(4*({sigma})^2))"))
                .unwrap();
            let eps = rng.gen_range(0.05..0.3);
            let rho = admissible_perturbation(&rho0, &h, eps, &prob).unwrap();
            let params = ParamBindings::new();
            let f = |x: f64| rho.eval_x(x, &params).unwrap();
            let mass = simpson(&f, lo, hi, 20_000);
            let m2 = simpson(|x| x * x * f(x), lo, hi, 20_000);
            assert!((mass - 1.0).abs() <= 1e-8, "{mass}");
            assert!((m2 - sigma * sigma).abs() <= 1e-8 * sigma * sigma, "{m2}");
            let hp = simpson(|x| -f(x) * f(x).ln(), lo, hi, 20_000);
            assert!(hp < best, "perturbed entropy {hp} not below {best}");
        }
    }
}

#[test]
fn determinant_examples() {
    let d = |h1: &str, h2: &str| determinant_test(&parse(h1).unwrap(), &parse(h2).unwrap(), (-12.0, 12.0), 400).unwrap();
    assert!((d("exp(-x^2)", "x^2*exp(-x^2)") - PI / 2.0).abs() <= 1e-12);
    assert!(d("exp(-x^2)", "exp(-x^2)").abs() <= 1e-14);
    assert!(d("exp(-x^2)", "x*exp(-x^2)").abs() <= 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(50))]

    #[test]
    fn even_pairs_have_nonzero_determinant(a in 0.2f64..3.0, b in 0.2f64..3.0) {
        prop_assume!((a - b).abs() > 0.05);
        let h1 = parse(&format!("exp(-({a})*x^2)")).unwrap();
        let h2 = parse(&format!("exp(-({b})*x^2)")).unwrap();
        let det = determinant_test(&h1, &h2, (-12.0, 12.0), 400).unwrap();
        let exact = PI / (2.0 * (a * b).sqrt()) * (1.0 / b - 1.0 / a);
        prop_assert!((det - exact).abs() <= 1e-10 * exact.abs().max(1.0), "{det} vs {exact}");
        prop_assert!(det.abs() > 1e-3);
    }

    #[test]
    fn multipliers_scale_with_sigma(sigma in 0.3f64..6.0) {
        let s = solve_multipliers(&MomentProblem::new(sigma).unwrap()).unwrap();
        prop_assert!((s.lambda2 * sigma * sigma + 0.5).abs() <= 1e-9);
        let l1 = 1.0 - (2.0 * PI).sqrt().ln() - sigma.ln();
        prop_assert!((s.lambda1 - l1).abs() <= 1e-8);
    }
}
