//! Experiment presets that reproduce each result at desk scale and report
//! pass/fail verdicts.

mod config;
mod domain;
mod presets;

use std::fmt;
use std::path::PathBuf;
use std::time::Duration;

use serde::Serialize;

pub use config::{ExperimentConfig, Precision, PRESETS};
pub use domain::DomainSpec;
pub use presets::{reproduce_all, run_experiment, run_experiment_in, Summary, Workspace};

/// Outcome of one acceptance check.
#[derive(Debug, Clone, Serialize)]
pub struct Verdict {
    pub preset: String,
    pub check: String,
    pub measured: f64,
    pub target: f64,
    pub tolerance: f64,
    /// How `measured` is compared with `target` and `tolerance`.
    pub rule: String,
    pub pass: bool,
}

impl Verdict {
    pub fn new(preset: &str, check: impl Into<String>, measured: f64, target: f64, tolerance: f64, rule: &str, pass: bool) -> Self {
        Self {
            preset: preset.to_string(),
            check: check.into(),
            measured,
            target,
            tolerance,
            rule: rule.to_string(),
            pass: pass && measured.is_finite(),
        }
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {} | {} | measured={:.6e} target={:.6e} tol={:.1e} ({})",
            if self.pass { "PASS" } else { "FAIL" },
            self.preset,
            self.check,
            self.measured,
            self.target,
            self.tolerance,
            self.rule
        )
    }
}

/// Verdicts and artifacts of one preset run.
#[derive(Debug, Clone)]
pub struct Report {
    pub id: String,
    pub verdicts: Vec<Verdict>,
    pub files: Vec<PathBuf>,
    pub elapsed: Duration,
}

impl Report {
    pub fn passed(&self) -> bool {
        !self.verdicts.is_empty() && self.verdicts.iter().all(|v| v.pass)
    }
}
