use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::expr::{parse, ParamBindings};
use crate::odeint::Options;
use crate::variational::{Grid, Lagrangian, Region};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ProblemError {
    #[error("{0}")]
    Syntax(String),
    #[error("line {line}: {message}")]
    Invalid { line: usize, message: String },
    #[error("{0}")]
    Io(String),
}

/// A problem description: Lagrangian, interval, parameters, the path to
/// analyse and the checks to run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemFile {
    pub problem: ProblemSection,
    #[serde(default)]
    pub params: BTreeMap<String, f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathSection>,
    #[serde(default)]
    pub analysis: AnalysisSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constraints: Option<ConstraintSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemSection {
    #[serde(default)]
    pub name: String,
    pub lagrangian: String,
    pub a: f64,
    pub b: f64,
    /// Display name of the independent variable.
    #[serde(default = "default_variable")]
    pub variable: String,
}

fn default_variable() -> String {
    "x".into()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum PathSection {
    SolveIvp { y_a: f64, yp_a: f64 },
    Analytic { expression: String },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AnalysisSection {
    pub legendre: bool,
    pub conjugate: bool,
    pub sturm: bool,
    pub convexity: bool,
    pub second_variation_directions: usize,
    pub riccati: bool,
    pub riccati_samples: usize,
    /// Offset from a singular left endpoint.
    pub epsilon: Option<f64>,
    pub y_range: [f64; 2],
    pub yp_range: [f64; 2],
    pub grid: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl Default for AnalysisSection {
    fn default() -> Self {
        AnalysisSection {
            legendre: true,
            conjugate: true,
            sturm: true,
            convexity: true,
            second_variation_directions: 12,
            riccati: false,
            riccati_samples: 21,
            epsilon: None,
            y_range: [-10.0, 10.0],
            yp_range: [-10.0, 10.0],
            grid: 17,
            rtol: 1e-10,
            atol: 1e-12,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ConstraintSection {
    /// `∫y = 1`, `∫x²y = sigma²` on `[a, b] = [-W sigma, W sigma]`.
    MaxEntropy {
        sigma: f64,
        #[serde(default = "default_nodes")]
        nodes: usize,
        #[serde(default = "default_perturbations")]
        perturbations: usize,
    },
}

fn default_nodes() -> usize {
    400
}

fn default_perturbations() -> usize {
    20
}

fn line_of_key(src: &str, section: &str, key: &str) -> usize {
    let mut in_section = false;
    for (i, line) in src.lines().enumerate() {
        let t = line.trim();
        if t.starts_with('[') {
            in_section = t.trim_matches(|c| c == '[' || c == ']').trim() == section;
            continue;
        }
        if in_section && t.split('=').next().map(str::trim) == Some(key) {
            return i + 1;
        }
    }
    src.lines()
        .position(|l| l.trim().trim_matches(|c| c == '[' || c == ']').trim() == section)
        .map_or(1, |i| i + 1)
}

impl ProblemFile {
    /// Parses and validates a problem file.
    pub fn parse(src: &str) -> Result<Self, ProblemError> {
        let file: ProblemFile = toml::from_str(src).map_err(|e| {
            let line = e
                .span()
                .map(|s| src[..s.start.min(src.len())].lines().count().max(1));
            match line {
                Some(line) => ProblemError::Invalid {
                    line,
                    message: e.message().to_string(),
                },
                None => ProblemError::Syntax(e.to_string()),
            }
        })?;
        file.validate(src)?;
        Ok(file)
    }

    pub fn read(path: &std::path::Path) -> Result<Self, ProblemError> {
        let src = std::fs::read_to_string(path)
            .map_err(|e| ProblemError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&src)
    }

    fn validate(&self, src: &str) -> Result<(), ProblemError> {
        let err = |section: &str, key: &str, message: String| ProblemError::Invalid {
            line: line_of_key(src, section, key),
            message,
        };
        let p = &self.problem;
        if !(p.a.is_finite() && p.b.is_finite() && p.a < p.b) {
            return Err(err(
                "problem",
                "b",
                format!("need a < b, got a = {}, b = {}", p.a, p.b),
            ));
        }
        let bindings = self.bindings();
        let l = parse(&p.lagrangian).map_err(|e| err("problem", "lagrangian", e.to_string()))?;
        for name in l.params() {
            if self.constraints.is_some() && (name == "lambda1" || name == "lambda2") {
                continue;
            }
            if !bindings.contains(&name) {
                return Err(err(
                    "problem",
                    "lagrangian",
                    format!("parameter `{name}` is not bound in [params]"),
                ));
            }
        }
        match (&self.path, &self.constraints) {
            (None, None) => return Err(err("path", "mode", "a [path] section is required".into())),
            (Some(_), Some(_)) => {
                return Err(err(
                    "path",
                    "mode",
                    "[path] and [constraints] are mutually exclusive".into(),
                ));
            }
            (Some(PathSection::Analytic { expression }), None) => {
                let y = parse(expression).map_err(|e| err("path", "expression", e.to_string()))?;
                if let Some(name) = y.params().into_iter().find(|n| !bindings.contains(n)) {
                    return Err(err(
                        "path",
                        "expression",
                        format!("parameter `{name}` is not bound in [params]"),
                    ));
                }
            }
            (Some(PathSection::SolveIvp { y_a, yp_a }), None) => {
                if !(y_a.is_finite() && yp_a.is_finite()) {
                    return Err(err("path", "y_a", "initial values must be finite".into()));
                }
            }
            (None, Some(ConstraintSection::MaxEntropy { sigma, nodes, .. })) => {
                if !(*sigma > 0.0) {
                    return Err(err(
                        "constraints",
                        "sigma",
                        format!("sigma must be positive, got {sigma}"),
                    ));
                }
                if p.a != -p.b || p.b / sigma < 8.0 {
                    return Err(err(
                        "problem",
                        "b",
                        format!(
                            "domain must be [-W sigma, W sigma] with W >= 8, got [{}, {}]",
                            p.a, p.b
                        ),
                    ));
                }
                if *nodes < 16 {
                    return Err(err(
                        "constraints",
                        "nodes",
                        format!("need at least 16 nodes, got {nodes}"),
                    ));
                }
            }
        }
        let an = &self.analysis;
        for (key, r) in [("y_range", an.y_range), ("yp_range", an.yp_range)] {
            if !(r[0] < r[1]) {
                return Err(err(
                    "analysis",
                    key,
                    format!("empty range [{}, {}]", r[0], r[1]),
                ));
            }
        }
        if an.grid < 2 {
            return Err(err(
                "analysis",
                "grid",
                "grid needs at least 2 points per axis".into(),
            ));
        }
        if let Some(eps) = an.epsilon {
            if !(eps > 0.0 && eps < p.b - p.a) {
                return Err(err(
                    "analysis",
                    "epsilon",
                    format!("epsilon must lie in (0, b - a), got {eps}"),
                ));
            }
        }
        if !(an.rtol > 0.0 && an.atol > 0.0) {
            return Err(err(
                "analysis",
                "rtol",
                "tolerances must be positive".into(),
            ));
        }
        Ok(())
    }

    pub fn bindings(&self) -> ParamBindings {
        ParamBindings::from_pairs(self.params.iter().map(|(k, v)| (k.as_str(), *v)))
    }

    pub fn lagrangian(&self) -> Result<Lagrangian, crate::variational::VariationalError> {
        Lagrangian::parse(&self.problem.lagrangian, self.bindings())
    }

    pub fn region(&self) -> Region {
        let an = &self.analysis;
        Region {
            x: (self.problem.a, self.problem.b),
            y: (an.y_range[0], an.y_range[1]),
            yp: (an.yp_range[0], an.yp_range[1]),
        }
    }

    pub fn grid(&self) -> Grid {
        let n = self.analysis.grid;
        Grid {
            nx: n,
            ny: n,
            nyp: n,
        }
    }

    pub fn ode_options(&self) -> Options {
        Options::with_tolerances(self.analysis.rtol, self.analysis.atol)
    }
}
