use serde::{Deserialize, Serialize};
use serde_json::Value;

/// Which error the pass decision is based on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Criterion {
    Abs,
    Rel,
}

/// Outcome of one check, serialized as one JSON line.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub check_id: String,
    pub max_abs_error: f64,
    pub max_rel_error: f64,
    pub tolerance: f64,
    pub criterion: Criterion,
    pub pass: bool,
    pub metadata: Value,
}

impl VerificationReport {
    pub fn new(check_id: &str, max_abs_error: f64, max_rel_error: f64, tolerance: f64, criterion: Criterion, metadata: Value) -> Self {
        let err = match criterion {
            Criterion::Abs => max_abs_error,
            Criterion::Rel => max_rel_error,
        };
        VerificationReport {
            check_id: check_id.into(),
            max_abs_error,
            max_rel_error,
            tolerance,
            criterion,
            pass: err <= tolerance,
            metadata,
        }
    }

    /// The error the pass decision compares against the tolerance.
    pub fn error(&self) -> f64 {
        match self.criterion {
            Criterion::Abs => self.max_abs_error,
            Criterion::Rel => self.max_rel_error,
        }
    }

    pub fn to_json_line(&self) -> String {
        serde_json::to_string(self).expect("report serializes")
    }
}
