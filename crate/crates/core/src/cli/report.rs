use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::isoperimetric::{MomentProblem, MultiplierSolution};
use crate::jacobi::{ClassificationReport, Verdict};
use crate::variational::{ConvexityCertificate, CriticalCheck};

use super::problem::ProblemFile;

pub const SCHEMA_VERSION: u32 = 1;

pub const VERDICTS: [&str; 6] = [
    "LOCAL_MINIMUM",
    "LOCAL_MAXIMUM",
    "MINIMALITY_FAILS_BEYOND",
    "GLOBAL_MINIMUM_BY_CONVEXITY",
    "GLOBAL_MAXIMUM_BY_CONCAVITY",
    "INDETERMINATE",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Tool {
    pub name: String,
    pub version: String,
}

impl Default for Tool {
    fn default() -> Self {
        Tool {
            name: env!("CARGO_PKG_NAME").into(),
            version: env!("CARGO_PKG_VERSION").into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    Ok,
    Error,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiSample {
    pub x: f64,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RiccatiBlock {
    pub samples: Vec<RiccatiSample>,
    pub max_abs_residual: f64,
    /// Sample points skipped because the field is too close to a zero.
    pub skipped: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClosedForm {
    pub lambda1: f64,
    pub lambda2: f64,
    pub entropy: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IsoperimetricBlock {
    pub verdict: Verdict,
    pub problem: MomentProblem,
    pub multipliers: MultiplierSolution,
    pub closed_form: ClosedForm,
    /// Largest deviation from the Gaussian density on `[-4 sigma, 4 sigma]`.
    pub density_max_error: f64,
    /// Constraint determinant for the directions `rho` and `x² rho`.
    pub determinant: f64,
    pub entropy: f64,
    /// Entropies of renormalised perturbations `rho exp(eps h)`.
    pub perturbed_entropies: Vec<f64>,
    pub maximal: bool,
    pub critical: CriticalCheck,
    pub concavity: ConvexityCertificate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub schema_version: u32,
    pub tool: Tool,
    pub source: Option<String>,
    pub input: Option<ProblemFile>,
    pub status: RunStatus,
    pub verdict: Option<String>,
    pub conjugate_point: Option<f64>,
    pub error: Option<String>,
    pub classification: Option<ClassificationReport>,
    pub riccati: Option<RiccatiBlock>,
    pub isoperimetric: Option<IsoperimetricBlock>,
    /// Wall-clock milliseconds per stage; not part of the deterministic
    /// content.
    pub timings_ms: BTreeMap<String, f64>,
}

impl Report {
    pub fn new(source: Option<String>, input: Option<ProblemFile>) -> Self {
        Report {
            schema_version: SCHEMA_VERSION,
            tool: Tool::default(),
            source,
            input,
            status: RunStatus::Ok,
            verdict: None,
            conjugate_point: None,
            error: None,
            classification: None,
            riccati: None,
            isoperimetric: None,
            timings_ms: BTreeMap::new(),
        }
    }

    pub fn failed(mut self, message: impl Into<String>) -> Self {
        self.status = RunStatus::Error;
        self.error = Some(message.into());
        self.verdict = None;
        self.conjugate_point = None;
        self.classification = None;
        self.riccati = None;
        self.isoperimetric = None;
        self
    }

    pub fn set_verdict(&mut self, v: &Verdict) {
        self.verdict = Some(v.name().into());
        self.conjugate_point = match v {
            Verdict::MinimalityFailsBeyond { c } => Some(*c),
            _ => None,
        };
    }

    /// 0 for a verdict, 2 for `INDETERMINATE`, 1 for an error.
    pub fn exit_code(&self) -> i32 {
        match (self.status, self.verdict.as_deref()) {
            (RunStatus::Ok, Some("INDETERMINATE")) => 2,
            (RunStatus::Ok, Some(_)) => 0,
            _ => 1,
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialises")
    }
}

/// The report with its timing block emptied.
pub fn without_timings(mut v: Value) -> Value {
    if let Some(obj) = v.as_object_mut() {
        obj.insert("timings_ms".into(), Value::Object(Default::default()));
    }
    v
}

/// Checks that `v` is a complete report carrying a verdict. Error reports
/// are rejected.
pub fn validate_report(v: &Value) -> Result<(), Vec<String>> {
    let mut problems = Vec::new();
    let Some(obj) = v.as_object() else {
        return Err(vec!["report is not a JSON object".into()]);
    };
    let required = [
        "schema_version",
        "tool",
        "source",
        "input",
        "status",
        "verdict",
        "conjugate_point",
        "error",
        "classification",
        "riccati",
        "isoperimetric",
        "timings_ms",
    ];
    for key in required {
        if !obj.contains_key(key) {
            problems.push(format!("missing field `{key}`"));
        }
    }
    for key in obj.keys() {
        if !required.contains(&key.as_str()) {
            problems.push(format!("unknown field `{key}`"));
        }
    }
    if !problems.is_empty() {
        return Err(problems);
    }
    if obj["schema_version"].as_u64() != Some(SCHEMA_VERSION as u64) {
        problems.push(format!("schema_version must be {SCHEMA_VERSION}"));
    }
    let tool_ok = obj["tool"].get("name").is_some_and(Value::is_string)
        && obj["tool"].get("version").is_some_and(Value::is_string);
    if !tool_ok {
        problems.push("tool must carry string name and version".into());
    }
    if !obj["timings_ms"]
        .as_object()
        .is_some_and(|t| t.values().all(Value::is_number))
    {
        problems.push("timings_ms must map stage names to numbers".into());
    }
    match obj["status"].as_str() {
        Some("ok") => {}
        Some("error") => problems.push(format!(
            "report carries an error: {}",
            obj["error"].as_str().unwrap_or("unknown")
        )),
        _ => problems.push("status must be \"ok\" or \"error\"".into()),
    }
    if !obj["error"].is_null() {
        problems.push("error must be null in a successful report".into());
    }
    if !obj["input"].is_object() {
        problems.push("input echo is missing".into());
    }
    let verdict = obj["verdict"].as_str();
    match verdict {
        Some(name) if VERDICTS.contains(&name) => {}
        Some(name) => problems.push(format!("unknown verdict `{name}`")),
        None => problems.push("no verdict".into()),
    }
    let classification = &obj["classification"];
    let iso = &obj["isoperimetric"];
    let inner = match (classification.is_null(), iso.is_null()) {
        (false, true) => classification.get("verdict"),
        (true, false) => iso.get("verdict"),
        _ => {
            problems.push("exactly one of classification and isoperimetric must be present".into());
            None
        }
    };
    if let (Some(inner), Some(name)) = (inner, verdict) {
        if inner.get("kind").and_then(Value::as_str) != Some(name) {
            problems.push("top-level verdict disagrees with the analysis block".into());
        }
    }
    if verdict == Some("MINIMALITY_FAILS_BEYOND") {
        let c = obj["conjugate_point"].as_f64();
        let inner_c = inner.and_then(|v| v.get("c")).and_then(Value::as_f64);
        if c.is_none() || c != inner_c {
            problems.push(
                "MINIMALITY_FAILS_BEYOND needs a conjugate_point matching the analysis block"
                    .into(),
            );
        }
    } else if !obj["conjugate_point"].is_null() {
        problems.push("conjugate_point is only set for MINIMALITY_FAILS_BEYOND".into());
    }
    if let Some(c) = classification.as_object() {
        for key in ["verdict", "valid_interval", "reasons", "critical"] {
            if !c.contains_key(key) {
                problems.push(format!("classification lacks `{key}`"));
            }
        }
    }
    if let Some(i) = iso.as_object() {
        for key in [
            "multipliers",
            "closed_form",
            "entropy",
            "critical",
            "concavity",
        ] {
            if !i.contains_key(key) {
                problems.push(format!("isoperimetric lacks `{key}`"));
            }
        }
    }
    if problems.is_empty() {
        Ok(())
    } else {
        Err(problems)
    }
}
