//! Run reports and their JSON/CSV rendering.

use num_complex::Complex64;
use serde_json::{json, Map, Value};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Provenance {
    PaperFormula,
    DerivedOracle,
    GoldenRegression,
}

impl Provenance {
    fn as_str(self) -> &'static str {
        match self {
            Provenance::PaperFormula => "paper-formula",
            Provenance::DerivedOracle => "derived-oracle",
            Provenance::GoldenRegression => "golden-regression",
        }
    }
}

#[derive(Clone, Debug)]
pub struct Assertion {
    pub name: String,
    pub passed: bool,
    pub provenance: Provenance,
    /// Failing convergence assertions exit with 3 rather than 1.
    pub convergence: bool,
    pub value: Option<f64>,
    pub tolerance: Option<f64>,
}

impl Assertion {
    pub fn new(name: impl Into<String>, passed: bool, provenance: Provenance) -> Self {
        Assertion {
            name: name.into(),
            passed,
            provenance,
            convergence: false,
            value: None,
            tolerance: None,
        }
    }

    /// `value < tolerance`.
    pub fn below(name: impl Into<String>, value: f64, tolerance: f64, provenance: Provenance) -> Self {
        Assertion {
            value: Some(value),
            tolerance: Some(tolerance),
            ..Assertion::new(name, value < tolerance, provenance)
        }
    }

    pub fn convergence(mut self) -> Self {
        self.convergence = true;
        self
    }

    fn to_json(&self) -> Value {
        json!({
            "name": self.name,
            "passed": self.passed,
            "provenance": self.provenance.as_str(),
            "value": self.value,
            "tolerance": self.tolerance,
        })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Pass,
    Fail,
    UsageError,
    NotConverged,
}

impl Verdict {
    pub fn exit_code(self) -> u8 {
        match self {
            Verdict::Pass => 0,
            Verdict::Fail => 1,
            Verdict::UsageError => 2,
            Verdict::NotConverged => 3,
        }
    }

    fn as_str(self) -> &'static str {
        match self {
            Verdict::Pass => "pass",
            Verdict::Fail => "fail",
            Verdict::UsageError => "error",
            Verdict::NotConverged => "not_converged",
        }
    }
}

/// A command failure carrying the exit status it maps to.
#[derive(Debug)]
pub struct Failure {
    pub message: String,
    pub verdict: Verdict,
}

impl Failure {
    pub fn usage(message: impl Into<String>) -> Self {
        Failure {
            message: message.into(),
            verdict: Verdict::UsageError,
        }
    }
}

impl From<holoflow::Error> for Failure {
    fn from(e: holoflow::Error) -> Self {
        let verdict = match e {
            holoflow::Error::NonConvergence { .. } => Verdict::NotConverged,
            _ => Verdict::UsageError,
        };
        Failure {
            message: e.to_string(),
            verdict,
        }
    }
}

/// Row of a plot table.
#[derive(Clone, Copy, Debug)]
pub struct CsvRow {
    pub eps: f64,
    pub big_l: f64,
    pub value: Complex64,
    pub err: f64,
}

#[derive(Debug, Default)]
pub struct Outcome {
    pub results: Map<String, Value>,
    pub assertions: Vec<Assertion>,
    pub rows: Option<Vec<CsvRow>>,
}

impl Outcome {
    pub fn result(&mut self, key: &str, value: Value) {
        self.results.insert(key.to_string(), value);
    }

    pub fn assert(&mut self, a: Assertion) {
        self.assertions.push(a);
    }

    pub fn verdict(&self) -> Verdict {
        if self.assertions.iter().any(|a| !a.passed && a.convergence) {
            Verdict::NotConverged
        } else if self.assertions.iter().any(|a| !a.passed) {
            Verdict::Fail
        } else {
            Verdict::Pass
        }
    }
}

pub fn complex(z: Complex64) -> Value {
    json!({ "re": z.re, "im": z.im })
}

pub fn complex_vec(zs: &[Complex64]) -> Value {
    Value::Array(zs.iter().copied().map(complex).collect())
}

pub struct Report<'a> {
    pub command: &'a str,
    pub argv: &'a [String],
    pub inputs: &'a Map<String, Value>,
    pub seed: u64,
    pub outcome: Result<&'a Outcome, &'a Failure>,
}

impl Report<'_> {
    pub fn verdict(&self) -> Verdict {
        match self.outcome {
            Ok(o) => o.verdict(),
            Err(f) => f.verdict,
        }
    }

    pub fn to_json(&self) -> String {
        let (results, assertions, error) = match self.outcome {
            Ok(o) => (
                Value::Object(o.results.clone()),
                o.assertions.iter().map(Assertion::to_json).collect(),
                Value::Null,
            ),
            Err(f) => (Value::Object(Map::new()), Vec::new(), Value::String(f.message.clone())),
        };
        let doc = json!({
            "schema_version": SCHEMA_VERSION,
            "command": self.command,
            "argv": self.argv,
            "inputs": self.inputs,
            "seed": self.seed,
            "results": results,
            "assertions": assertions,
            "error": error,
            "verdict": self.verdict().as_str(),
        });
        let mut text = serde_json::to_string_pretty(&doc).expect("JSON values always serialize");
        text.push('\n');
        text
    }
}

/// Shortest round-trip decimal, in exponent form outside `[1e-4, 1e15)`.
fn csv_float(v: f64) -> String {
    let a = v.abs();
    if a == 0.0 || !v.is_finite() || (1e-4..1e15).contains(&a) {
        format!("{v}")
    } else {
        format!("{v:e}")
    }
}

pub fn to_csv(rows: &[CsvRow]) -> String {
    let mut out = String::from("eps,L,re,im,err\n");
    for r in rows {
        let fields = [r.eps, r.big_l, r.value.re, r.value.im, r.err].map(csv_float);
        out.push_str(&fields.join(","));
        out.push('\n');
    }
    out
}
