//! Machine-readable reports and their human rendering.

use std::collections::BTreeMap;
use std::fmt::{self, Write as _};

use serde::{Deserialize, Serialize};

use pepkit::rational::Exact;

use crate::config::Tolerances;

/// A number together with the tolerance it was produced or judged with.
/// Non-finite values are encoded as the strings `"NaN"`, `"inf"`, `"-inf"`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Measured {
    #[serde(with = "float")]
    pub value: f64,
    pub tol: f64,
}

impl Measured {
    pub fn new(value: f64, tol: f64) -> Self {
        Self { value, tol }
    }

    /// A closed-form value; the tolerance is zero.
    pub fn exact(value: f64) -> Self {
        Self { value, tol: 0.0 }
    }

    pub fn within(&self) -> bool {
        self.value.abs() <= self.tol
    }
}

mod float {
    use serde::{Deserialize, Deserializer, Serializer};

    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Repr {
        Num(f64),
        Text(String),
    }

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_str("NaN")
        } else if v.is_infinite() {
            s.serialize_str(if *v > 0.0 { "inf" } else { "-inf" })
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        use serde::de::Error;
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(v),
            Repr::Text(t) => match t.as_str() {
                "NaN" => Ok(f64::NAN),
                "inf" => Ok(f64::INFINITY),
                "-inf" => Ok(f64::NEG_INFINITY),
                other => Err(D::Error::custom(format!("not a number: {other:?}"))),
            },
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Outcome {
    Pass,
    SolverFailure,
    Violation,
}

impl Outcome {
    pub fn exit_code(self) -> i32 {
        match self {
            Outcome::Pass => 0,
            Outcome::SolverFailure => 1,
            Outcome::Violation => 2,
        }
    }

    /// The worse of two outcomes; a solver failure outranks a violation.
    pub fn and(self, other: Outcome) -> Outcome {
        use Outcome::*;
        match (self, other) {
            (SolverFailure, _) | (_, SolverFailure) => SolverFailure,
            (Violation, _) | (_, Violation) => Violation,
            _ => Pass,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    pub status: String,
    pub iterations: usize,
    pub rel_gap: Measured,
    pub primal_infeas: Measured,
    pub dual_infeas: Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveSection {
    pub optimum: Measured,
    pub analytic: Measured,
    /// Closed form of the analytic bound when the inputs are rational.
    pub analytic_exact: Option<Exact>,
    /// `optimum - analytic`, judged against the bound tolerance.
    pub gap: Measured,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualRow {
    /// Certificate name (`y1`, ...) for one-step problems.
    pub name: Option<String>,
    pub tag: String,
    pub numeric: Measured,
    pub closed_form: Option<Exact>,
    pub abs_diff: Option<Measured>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DualsSection {
    pub rows: Vec<DualRow>,
    pub diagnostics: Diagnostics,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Term {
    pub term: String,
    pub coefficient: Exact,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CheckResult {
    pub name: String,
    pub pass: bool,
    /// Largest residual coefficient, for identity checks.
    pub max_abs_residual: Option<Exact>,
    pub tol: Exact,
    pub offending: Vec<Term>,
    pub detail: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifyTrial {
    pub index: usize,
    pub mu: Exact,
    #[serde(rename = "L")]
    pub l: Exact,
    pub eps: Option<Exact>,
    pub checks: Vec<CheckResult>,
}

impl CertifyTrial {
    pub fn pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CertifySection {
    pub trials: Vec<CertifyTrial>,
    pub passed: usize,
    pub total: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StepRow {
    pub iteration: usize,
    pub f_gap: f64,
    pub step: f64,
    /// `ratio - rate`, judged against the ratio tolerance.
    pub ratio: Option<f64>,
    pub deviation: Option<Measured>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExampleRun {
    pub label: String,
    pub rate: Measured,
    pub steps: Vec<StepRow>,
    pub equality: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RandomTrial {
    pub index: usize,
    pub dim: usize,
    /// Largest exact line-search ratio minus the rate.
    pub exact_ls_excess: Measured,
    /// Largest noisy ratio minus the noisy rate, when `--eps` is given.
    pub noisy_excess: Option<Measured>,
    pub fixed_step_bound: bool,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulateSection {
    pub mode: String,
    pub examples: Vec<ExampleRun>,
    pub random: Vec<RandomTrial>,
    pub max_ratio: Option<Measured>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExportSection {
    pub format: String,
    pub path: Option<String>,
    pub constraints: usize,
    pub blocks: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Report {
    pub command: String,
    /// Inputs as given on the command line, with defaults filled in.
    pub inputs: BTreeMap<String, String>,
    pub tolerances: Tolerances,
    pub outcome: Outcome,
    pub notices: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solve: Option<SolveSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duals: Option<DualsSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certify: Option<CertifySection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub simulate: Option<SimulateSection>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub export: Option<ExportSection>,
}

impl Report {
    pub fn new(command: &str, inputs: BTreeMap<String, String>, tolerances: Tolerances) -> Self {
        Self {
            command: command.to_string(),
            inputs,
            tolerances,
            outcome: Outcome::Pass,
            notices: Vec::new(),
            solve: None,
            duals: None,
            certify: None,
            simulate: None,
            export: None,
        }
    }

    pub fn to_json(&self) -> Result<String, serde_json::Error> {
        serde_json::to_string_pretty(self)
    }

    pub fn from_json(s: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(s)
    }

    pub fn exit_code(&self) -> i32 {
        self.outcome.exit_code()
    }
}

fn verdict(ok: bool) -> &'static str {
    if ok {
        "PASS"
    } else {
        "FAIL"
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.12}"))
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let inputs: Vec<String> = self.inputs.iter().map(|(k, v)| format!("{k}={v}")).collect();
        writeln!(f, "{} [{}]", self.command, inputs.join(" "))?;
        if let Some(s) = &self.solve {
            writeln!(f, "  optimum   {:.12}  (tol_gap {:e})", s.optimum.value, s.optimum.tol)?;
            match &s.analytic_exact {
                Some(q) => writeln!(f, "  analytic  {:.12}  = {q}", s.analytic.value)?,
                None => writeln!(f, "  analytic  {:.12}", s.analytic.value)?,
            }
            writeln!(f, "  gap       {:.3e}  (tol {:e})", s.gap.value, s.gap.tol)?;
            write_diag(f, &s.diagnostics)?;
        }
        if let Some(d) = &self.duals {
            writeln!(f, "  {:<5} {:<22} {:>16} {:>22} {:>10}", "name", "tag", "numeric", "closed form", "abs diff")?;
            for r in &d.rows {
                let cf = r.closed_form.as_ref().map_or("-".to_string(), |q| q.to_string());
                let diff = r.abs_diff.map_or("-".to_string(), |m| format!("{:.2e}", m.value));
                writeln!(
                    f,
                    "  {:<5} {:<22} {:>16.10} {:>22} {:>10}",
                    r.name.as_deref().unwrap_or(""),
                    r.tag,
                    r.numeric.value,
                    cf,
                    diff
                )?;
            }
            write_diag(f, &d.diagnostics)?;
        }
        if let Some(c) = &self.certify {
            for t in &c.trials {
                let eps = t.eps.as_ref().map_or(String::new(), |e| format!(" eps={e}"));
                writeln!(f, "  #{:<4} mu={} L={}{eps}  {}", t.index, t.mu, t.l, verdict(t.pass()))?;
                for ch in &t.checks {
                    if c.trials.len() == 1 || !ch.pass {
                        writeln!(f, "        {:<28} {}", ch.name, verdict(ch.pass))?;
                    }
                    for term in &ch.offending {
                        writeln!(f, "          {} : {}", term.term, term.coefficient)?;
                    }
                    for d in &ch.detail {
                        writeln!(f, "          {d}")?;
                    }
                }
            }
            writeln!(f, "  {}/{} PASS", c.passed, c.total)?;
        }
        if let Some(s) = &self.simulate {
            for run in &s.examples {
                writeln!(f, "  {}  rate {:.12}", run.label, run.rate.value)?;
                writeln!(f, "  {:>4} {:>22} {:>16} {:>16}", "iter", "f_gap", "step", "ratio")?;
                for r in &run.steps {
                    writeln!(f, "  {:>4} {:>22.15e} {:>16.10} {:>16}", r.iteration, r.f_gap, r.step, opt(r.ratio))?;
                }
                writeln!(f, "  equality {}", verdict(run.equality))?;
            }
            if !s.random.is_empty() {
                let failed: Vec<&RandomTrial> = s.random.iter().filter(|t| !t.pass).collect();
                for t in failed.iter().take(20) {
                    let mut line = String::new();
                    let _ = write!(line, "  trial {} (dim {}): excess {:.3e}", t.index, t.dim, t.exact_ls_excess.value);
                    if let Some(n) = t.noisy_excess {
                        let _ = write!(line, ", noisy excess {:.3e}", n.value);
                    }
                    let _ = write!(line, ", fixed-step bound {}", verdict(t.fixed_step_bound));
                    writeln!(f, "{line}")?;
                }
                writeln!(f, "  {}/{} trials PASS", s.random.len() - failed.len(), s.random.len())?;
            }
            if let Some(m) = s.max_ratio {
                writeln!(f, "  max ratio {:.15}", m.value)?;
            }
        }
        if let Some(e) = &self.export {
            let dest = e.path.as_deref().unwrap_or("stdout");
            writeln!(f, "  wrote {} ({} constraints, blocks {:?}) to {dest}", e.format, e.constraints, e.blocks)?;
        }
        for n in &self.notices {
            writeln!(f, "  note: {n}")?;
        }
        write!(f, "  outcome: {:?}", self.outcome)
    }
}

fn write_diag(f: &mut fmt::Formatter<'_>, d: &Diagnostics) -> fmt::Result {
    writeln!(
        f,
        "  solver    {} after {} iterations; rel_gap {:.2e}, pinf {:.2e}, dinf {:.2e}",
        d.status, d.iterations, d.rel_gap.value, d.primal_infeas.value, d.dual_infeas.value
    )
}
