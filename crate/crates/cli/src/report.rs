//! JSON report printed on standard output for every command.

use std::path::PathBuf;
use std::time::{SystemTime, UNIX_EPOCH};

use isoclinic_core::mum::MeasurementDefect;
use isoclinic_core::{Error, Tolerance};
use serde::Serialize;
use serde_json::{json, Value};

#[derive(Debug, Serialize)]
pub struct ToleranceUsed {
    pub abs: f64,
    pub rel: f64,
}

#[derive(Debug, Serialize)]
pub struct Report {
    pub command: String,
    pub verdict: bool,
    pub max_residual: f64,
    pub tolerance_used: ToleranceUsed,
    pub payload: Value,
    pub artifacts_written: Vec<PathBuf>,
    /// Seconds since the Unix epoch; omitted under `--reproducible`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub timestamp: Option<u64>,
}

/// What a command hands back before the global fields are filled in.
#[derive(Debug)]
pub struct Outcome {
    pub verdict: bool,
    pub max_residual: f64,
    pub payload: Value,
    pub artifacts_written: Vec<PathBuf>,
}

impl Outcome {
    pub fn pass(max_residual: f64, payload: Value) -> Self {
        Outcome {
            verdict: true,
            max_residual,
            payload,
            artifacts_written: Vec::new(),
        }
    }

    pub fn with_artifacts(mut self, paths: Vec<PathBuf>) -> Self {
        self.artifacts_written.extend(paths);
        self
    }

    /// Failed check reported by the library as an error.
    pub fn from_verdict_error(e: &Error) -> Self {
        let locus = failure_locus(e);
        let residual = locus["residual"].as_f64().unwrap_or(0.0);
        Outcome {
            verdict: false,
            max_residual: residual,
            payload: json!({ "failure": locus }),
            artifacts_written: Vec::new(),
        }
    }

    pub fn into_report(self, command: &str, tol: &Tolerance, reproducible: bool) -> Report {
        let timestamp = (!reproducible).then(|| {
            SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map(|d| d.as_secs())
                .unwrap_or(0)
        });
        Report {
            command: command.to_string(),
            verdict: self.verdict,
            max_residual: self.max_residual,
            tolerance_used: ToleranceUsed {
                abs: tol.abs_tol,
                rel: tol.rel_tol,
            },
            payload: self.payload,
            artifacts_written: self.artifacts_written,
            timestamp,
        }
    }
}

/// `{kind, message, indices, residual}` for an error that is a failed check.
pub fn failure_locus(e: &Error) -> Value {
    let (indices, residual): (Vec<usize>, Option<f64>) = match e {
        Error::ConditionFailed { i, j, residual } | Error::IsoclinicViolation { i, j, residual } => {
            (vec![*i, *j], Some(*residual))
        }
        Error::NotScaledIsometry { index, residual } => (vec![*index], Some(*residual)),
        Error::CrossPairFailed {
            m1,
            m2,
            a,
            b,
            residual,
        } => (vec![*m1, *m2, *a, *b], Some(*residual)),
        Error::RelationViolated {
            indices, residual, ..
        } => (indices.clone(), Some(*residual)),
        Error::InvalidMeasurement(d) => match d {
            MeasurementDefect::NotProjection { index, residual } => (vec![*index], Some(*residual)),
            MeasurementDefect::NotOrthogonal { a, b, residual } => (vec![*a, *b], Some(*residual)),
            MeasurementDefect::Incomplete { residual } => (vec![], Some(*residual)),
        },
        Error::HypothesisViolation { residual, .. } | Error::NotCompatible { residual } => {
            (vec![], Some(*residual))
        }
        _ => (vec![], None),
    };
    json!({
        "kind": kind_name(e),
        "message": e.to_string(),
        "indices": indices,
        "residual": residual,
    })
}

fn kind_name(e: &Error) -> &'static str {
    match e {
        Error::ConditionFailed { .. } => "condition_failed",
        Error::IsoclinicViolation { .. } => "isoclinic_violation",
        Error::NotScaledIsometry { .. } => "not_scaled_isometry",
        Error::CrossPairFailed { .. } => "cross_pair_failed",
        Error::RelationViolated { .. } => "relation_violated",
        Error::InvalidMeasurement(_) => "invalid_measurement",
        Error::HypothesisViolation { .. } => "hypothesis_violation",
        Error::NotCompatible { .. } => "not_compatible",
        _ => "error",
    }
}
