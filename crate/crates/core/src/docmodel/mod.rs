//! Document data model: the (figures, texts, tables) triple, the
//! model-output token grammars, the identifier registry, and JSON I/O.
//!
//! The JSON field names used here are normative for the external
//! interfaces; unknown fields are preserved on load and ignored by logic.

mod registry;
mod tokens;

pub use registry::{build_registry, normalize_identifier, Registry};
pub use tokens::{
    parse_coref_sequence, parse_detection_sequence, serialize_coref_sequence,
    serialize_detection_sequence, CorefPair, Identifier, Token,
};

use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum DocError {
    #[error("schema violation at {pointer}: {message}")]
    SchemaViolation { pointer: String, message: String },
    #[error("I/O error: {0}")]
    Io(#[from] std::io::Error),
    #[error("malformed JSON: {0}")]
    Json(#[from] serde_json::Error),
}

fn violation(pointer: impl Into<String>, message: impl Into<String>) -> DocError {
    DocError::SchemaViolation {
        pointer: pointer.into(),
        message: message.into(),
    }
}

/// Axis-aligned box in discrete coordinate bins (0–999), corners encoded
/// as (x1, y1) top-left and (x2, y2) bottom-right.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(from = "[u16; 4]", into = "[u16; 4]")]
pub struct BoundingBox {
    pub x1: u16,
    pub y1: u16,
    pub x2: u16,
    pub y2: u16,
}

pub const COORD_BINS: u16 = 1000;

impl BoundingBox {
    pub fn new(x1: u16, y1: u16, x2: u16, y2: u16) -> BoundingBox {
        BoundingBox { x1, y1, x2, y2 }
    }

    fn check(&self) -> Result<(), String> {
        if self.x1 >= COORD_BINS || self.y1 >= COORD_BINS || self.x2 >= COORD_BINS || self.y2 >= COORD_BINS {
            return Err(format!("coordinate bin out of range 0..{COORD_BINS}"));
        }
        if self.x1 > self.x2 || self.y1 > self.y2 {
            return Err("box corners out of order (x1 > x2 or y1 > y2)".into());
        }
        Ok(())
    }
}

impl From<[u16; 4]> for BoundingBox {
    fn from(v: [u16; 4]) -> Self {
        BoundingBox::new(v[0], v[1], v[2], v[3])
    }
}

impl From<BoundingBox> for [u16; 4] {
    fn from(b: BoundingBox) -> Self {
        [b.x1, b.y1, b.x2, b.y2]
    }
}

/// A molecule detected in a figure, optionally with its recognized
/// structure and its coreferenced identifier label.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct MoleculeEntity {
    #[serde(default = "default_bbox")]
    pub bbox: BoundingBox,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub smiles: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub label: Option<String>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

fn default_bbox() -> BoundingBox {
    BoundingBox::new(0, 0, 0, 0)
}

impl Default for BoundingBox {
    fn default() -> Self {
        default_bbox()
    }
}

/// One parsed reaction diagram: reactant entities, free-text condition
/// lines above/below the arrow, product entities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ReactionScheme {
    #[serde(default)]
    pub reactants: Vec<MoleculeEntity>,
    #[serde(default)]
    pub conditions_text: Vec<String>,
    #[serde(default)]
    pub products: Vec<MoleculeEntity>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Figure {
    #[serde(default)]
    pub coref_pairs: Vec<MoleculeEntity>,
    #[serde(default)]
    pub schemes: Vec<ReactionScheme>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ConditionRole {
    Catalyst,
    Solvent,
    Temperature,
    Time,
    Yield,
    Other,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionToken {
    pub role: ConditionRole,
    pub text: String,
}

/// A reaction extracted from text: products and reactants referenced by
/// identifier, plus role-tagged condition tokens.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TextReaction {
    #[serde(default)]
    pub product_ids: Vec<String>,
    #[serde(default)]
    pub reactant_ids: Vec<String>,
    #[serde(default)]
    pub conditions: Vec<ConditionToken>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Footnote {
    pub marker: String,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct TableRecord {
    #[serde(default)]
    pub headers: Vec<String>,
    #[serde(default)]
    pub rows: Vec<Vec<String>>,
    #[serde(default)]
    pub footnotes: Vec<Footnote>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

/// The document triple: per-modality extraction records.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Document {
    #[serde(default)]
    pub figures: Vec<Figure>,
    #[serde(default)]
    pub texts: Vec<TextReaction>,
    #[serde(default)]
    pub tables: Vec<TableRecord>,
    #[serde(flatten)]
    pub extra: serde_json::Map<String, serde_json::Value>,
}

impl Document {
    /// Structural checks beyond what serde enforces, reported with a JSON
    /// pointer to the offending element.
    pub fn validate(&self) -> Result<(), DocError> {
        for (fi, figure) in self.figures.iter().enumerate() {
            for (pi, pair) in figure.coref_pairs.iter().enumerate() {
                pair.bbox.check().map_err(|m| {
                    violation(format!("/figures/{fi}/coref_pairs/{pi}/bbox"), m)
                })?;
            }
            for (si, scheme) in figure.schemes.iter().enumerate() {
                if scheme.products.is_empty() {
                    return Err(violation(
                        format!("/figures/{fi}/schemes/{si}/products"),
                        "scheme products must be nonempty",
                    ));
                }
                for (mi, m) in scheme
                    .reactants
                    .iter()
                    .chain(scheme.products.iter())
                    .enumerate()
                {
                    m.bbox.check().map_err(|msg| {
                        violation(format!("/figures/{fi}/schemes/{si}/molecules/{mi}"), msg)
                    })?;
                }
            }
        }
        for (ti, text) in self.texts.iter().enumerate() {
            if text.product_ids.is_empty() {
                return Err(violation(
                    format!("/texts/{ti}/product_ids"),
                    "text reaction product_ids must be nonempty",
                ));
            }
        }
        for (ti, table) in self.tables.iter().enumerate() {
            for (ri, row) in table.rows.iter().enumerate() {
                if row.len() != table.headers.len() {
                    return Err(violation(
                        format!("/tables/{ti}/rows/{ri}"),
                        format!(
                            "row has {} cells but table has {} headers",
                            row.len(),
                            table.headers.len()
                        ),
                    ));
                }
            }
        }
        Ok(())
    }
}

/// One structured configuration of reaction metadata. `raw` preserves the
/// source table cells losslessly.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ConditionSet {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub temperature: Option<ValueWithUnit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub time: Option<ValueWithUnit>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub solvent: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub catalyst: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub reagents: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yield_percent: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub yield_raw: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub notes: Vec<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub raw: BTreeMap<String, String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ValueWithUnit {
    pub value: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unit: Option<String>,
}

/// A complete extracted reaction: reactant and product structure sets
/// plus zero or more condition configurations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Reaction {
    pub reactants: BTreeSet<String>,
    pub products: BTreeSet<String>,
    #[serde(default)]
    pub conditions: Vec<ConditionSet>,
}

/// Output report: the reaction list plus structured warnings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ReactionReport {
    pub reactions: Vec<Reaction>,
    #[serde(default)]
    pub warnings: Vec<crate::report::Warning>,
}

pub fn load_document(path: &Path) -> Result<Document, DocError> {
    let text = std::fs::read_to_string(path)?;
    let document: Document = serde_json::from_str(&text)?;
    document.validate()?;
    Ok(document)
}

pub fn document_from_str(text: &str) -> Result<Document, DocError> {
    let document: Document = serde_json::from_str(text)?;
    document.validate()?;
    Ok(document)
}

pub fn save_reactions(path: &Path, report: &ReactionReport) -> Result<(), DocError> {
    let mut text = serde_json::to_string_pretty(report)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

pub fn load_reactions(path: &Path) -> Result<ReactionReport, DocError> {
    let text = std::fs::read_to_string(path)?;
    Ok(serde_json::from_str(&text)?)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_document() {
        let doc = document_from_str(r#"{"figures":[],"texts":[],"tables":[]}"#).unwrap();
        assert!(doc.figures.is_empty() && doc.texts.is_empty() && doc.tables.is_empty());
    }

    #[test]
    fn unknown_fields_preserved() {
        let doc = document_from_str(
            r#"{"figures":[],"texts":[],"tables":[],"source_pdf":"x.pdf"}"#,
        )
        .unwrap();
        assert_eq!(
            doc.extra.get("source_pdf").and_then(|v| v.as_str()),
            Some("x.pdf")
        );
    }

    #[test]
    fn row_length_mismatch_has_pointer() {
        let err = document_from_str(
            r#"{"figures":[],"texts":[],"tables":[{"headers":["a","b"],"rows":[["1","2"],["3"]],"footnotes":[]}]}"#,
        )
        .unwrap_err();
        match err {
            DocError::SchemaViolation { pointer, .. } => {
                assert_eq!(pointer, "/tables/0/rows/1");
            }
            other => panic!("expected schema violation, got {other}"),
        }
    }

    #[test]
    fn bbox_bounds_checked() {
        let err = document_from_str(
            r#"{"figures":[{"coref_pairs":[{"bbox":[10,10,2000,20]}],"schemes":[]}],"texts":[],"tables":[]}"#,
        )
        .unwrap_err();
        assert!(matches!(err, DocError::SchemaViolation { .. }));
    }

    #[test]
    fn reaction_report_round_trip() {
        let report = ReactionReport {
            reactions: vec![Reaction {
                reactants: ["CCO".to_string()].into(),
                products: ["CC=O".to_string()].into(),
                conditions: vec![ConditionSet {
                    yield_percent: Some(87.0),
                    yield_raw: Some("87%".into()),
                    ..Default::default()
                }],
            }],
            warnings: vec![],
        };
        let dir = std::env::temp_dir().join("rxnfuse-docmodel-test");
        std::fs::create_dir_all(&dir).unwrap();
        let path = dir.join("report.json");
        save_reactions(&path, &report).unwrap();
        let loaded = load_reactions(&path).unwrap();
        assert_eq!(loaded, report);
    }
}
