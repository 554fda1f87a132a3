//! R-group resolution: text-defined substituents, template/product graph
//! diff inference, and substrate-scope expansion.

mod abbrev;
mod infer;
mod scope;

pub use abbrev::{parse_rgroup_text, AbbreviationTable};
pub use infer::{infer_rgroups_from_product, Assignments, HYDROGEN_KEY};
pub use scope::{resolve_by_text, resolve_substrate_scope, ScopeOutcome};

use crate::molgraph::{MolError, MoleculeGraph, PlaceholderLabel, Substituent};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RgroupError {
    #[error("label `{0}` is not digits followed by an optional letter suffix")]
    UnparseableLabel(String),
    #[error("missing definitions for labels: {}", .0.join(", "))]
    MissingDefinition(Vec<String>),
    #[error("template is not a substructure of the product")]
    NoMapping,
    #[error(transparent)]
    Mol(#[from] MolError),
}

/// An identifier split into its numeric prefix and letter suffix.
/// Products associate with their template through equal prefixes: "3a"
/// belongs to template "3", while "39" does not.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct LabelParts {
    pub prefix: String,
    pub suffix: Option<String>,
}

/// Split a maximal leading digit run from a trailing letter suffix of one
/// or two lowercase letters.
pub fn parse_label(text: &str) -> Result<LabelParts, RgroupError> {
    let text = text.trim();
    let digits: String = text.chars().take_while(|c| c.is_ascii_digit()).collect();
    if digits.is_empty() {
        return Err(RgroupError::UnparseableLabel(text.to_string()));
    }
    let rest = &text[digits.len()..];
    if rest.is_empty() {
        return Ok(LabelParts {
            prefix: digits,
            suffix: None,
        });
    }
    if rest.len() <= 2 && rest.chars().all(|c| c.is_ascii_lowercase()) {
        return Ok(LabelParts {
            prefix: digits,
            suffix: Some(rest.to_string()),
        });
    }
    Err(RgroupError::UnparseableLabel(text.to_string()))
}

/// One `R... = ...` clause resolved to a substituent.
#[derive(Debug, Clone, PartialEq)]
pub struct RGroupDefinition {
    pub label: PlaceholderLabel,
    pub substituent: Substituent,
}

/// A reaction whose reactants and products may contain placeholders,
/// keyed by the numeric prefix of its product label.
#[derive(Debug, Clone)]
pub struct ReactionTemplate {
    pub reactants: Vec<MoleculeGraph>,
    pub products: Vec<MoleculeGraph>,
    pub template_label: String,
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn label_with_suffix() {
        let parts = parse_label("3a").unwrap();
        assert_eq!(parts.prefix, "3");
        assert_eq!(parts.suffix.as_deref(), Some("a"));
        let parts = parse_label("1u").unwrap();
        assert_eq!(parts.prefix, "1");
        assert_eq!(parts.suffix.as_deref(), Some("u"));
        let parts = parse_label("12aa").unwrap();
        assert_eq!(parts.prefix, "12");
        assert_eq!(parts.suffix.as_deref(), Some("aa"));
    }

    #[test]
    fn bare_number_has_no_suffix() {
        // "39" stays prefix 39: it never associates with template "3".
        let parts = parse_label("39").unwrap();
        assert_eq!(parts.prefix, "39");
        assert_eq!(parts.suffix, None);
    }

    #[test]
    fn rejects_non_labels() {
        assert!(parse_label("abc").is_err());
        assert!(parse_label("3A").is_err());
        assert!(parse_label("3abc").is_err());
        assert!(parse_label("").is_err());
    }
}
