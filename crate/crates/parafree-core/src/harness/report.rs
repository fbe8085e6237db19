use serde::{Deserialize, Serialize};

/// Outcome of one experiment. `Inconclusive` is mandatory whenever the
/// experiment's own error estimate exceeds the violation it would otherwise
/// report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Verdict {
    Pass,
    Fail,
    Inconclusive,
}

/// A self-describing experiment result: a small table plus verdict and
/// provenance. Wall time is kept out of the serialized form so report files
/// are byte-reproducible.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentReport {
    pub name: String,
    pub instance: String,
    pub params: String,
    pub headers: Vec<String>,
    pub rows: Vec<Vec<f64>>,
    pub verdict: Verdict,
    pub tolerance: f64,
    pub notes: Vec<String>,
    /// Offending rows, one line each; nonempty exactly when verdict is Fail.
    pub failures: Vec<String>,
    #[serde(skip)]
    pub wall_ms: u128,
}

impl ExperimentReport {
    pub fn new(name: &str, instance: &str, params: String) -> Self {
        Self {
            name: name.into(),
            instance: instance.into(),
            params,
            headers: Vec::new(),
            rows: Vec::new(),
            verdict: Verdict::Pass,
            tolerance: 0.0,
            notes: Vec::new(),
            failures: Vec::new(),
            wall_ms: 0,
        }
    }

    /// Register a violation, downgrading to Fail unless the error estimate
    /// swamps it (then Inconclusive, per the gating rule).
    pub fn violation(&mut self, magnitude: f64, error_estimate: f64, line: String) {
        if magnitude <= error_estimate {
            self.notes
                .push(format!("inconclusive (error {error_estimate:.2e} >= violation {magnitude:.2e}): {line}"));
            if self.verdict == Verdict::Pass {
                self.verdict = Verdict::Inconclusive;
            }
        } else {
            self.failures.push(line);
            self.verdict = Verdict::Fail;
        }
    }

    pub fn inconclusive(&mut self, note: String) {
        self.notes.push(note);
        if self.verdict == Verdict::Pass {
            self.verdict = Verdict::Inconclusive;
        }
    }

    pub fn summary_line(&self) -> String {
        format!(
            "{:<28} {:<14} {:?}  rows={} tol={:.2e}{}",
            self.name,
            self.instance,
            self.verdict,
            self.rows.len(),
            self.tolerance,
            if self.failures.is_empty() {
                String::new()
            } else {
                format!("  failures={}", self.failures.len())
            }
        )
    }
}
