//! Structured warnings shared across the pipeline. Warnings never abort a
//! run; they accompany the emitted reactions in the output report.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum WarningCode {
    UnmatchedLabel,
    NoMapping,
    VerifyFailed,
    UnknownAbbreviation,
    AmbiguousAssignment,
    RegistryConflict,
    RowSkipped,
    UnresolvedProduct,
    UnresolvedReactant,
    MalformedYield,
    InvalidStructure,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Warning {
    pub code: WarningCode,
    /// The identifier or placeholder label the warning is about.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    pub message: String,
}

impl Warning {
    pub fn new(code: WarningCode, message: impl Into<String>) -> Warning {
        Warning {
            code,
            label: None,
            message: message.into(),
        }
    }

    pub fn labeled(code: WarningCode, label: impl Into<String>, message: impl Into<String>) -> Warning {
        Warning {
            code,
            label: Some(label.into()),
            message: message.into(),
        }
    }
}

impl std::fmt::Display for Warning {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match &self.label {
            Some(label) => write!(f, "[{:?}] {}: {}", self.code, label, self.message),
            None => write!(f, "[{:?}] {}", self.code, self.message),
        }
    }
}
