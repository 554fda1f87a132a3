//! Identifier registry: the mapping from text labels (e.g. "1a") to the
//! structures they name, built from figure coreference pairs.

use super::Document;
use crate::molgraph::{canonical_key, parse_smiles};
use crate::report::{Warning, WarningCode};
use std::collections::BTreeMap;

pub type Registry = BTreeMap<String, String>;

/// Strip bold/italic markers, enclosing parentheses and trailing
/// punctuation from an identifier. Comparison stays case-sensitive.
pub fn normalize_identifier(text: &str) -> String {
    let mut s = text.trim();
    loop {
        let before = s;
        for marker in ["**", "__", "*", "_"] {
            if s.len() >= 2 * marker.len() && s.starts_with(marker) && s.ends_with(marker) {
                s = &s[marker.len()..s.len() - marker.len()];
            }
        }
        if (s.starts_with('(') && s.ends_with(')')) || (s.starts_with('[') && s.ends_with(']')) {
            s = &s[1..s.len() - 1];
        }
        s = s.trim().trim_end_matches(['.', ',', ':', ';']);
        if s == before {
            break;
        }
    }
    s.to_string()
}

/// Build the identifier -> SMILES map from every figure's coreference
/// pairs. The first binding of a label wins; conflicting later bindings
/// are reported as warnings, not applied.
pub fn build_registry(document: &Document) -> (Registry, Vec<Warning>) {
    let mut registry = Registry::new();
    let mut warnings = Vec::new();
    for figure in &document.figures {
        for pair in &figure.coref_pairs {
            let (Some(label), Some(smiles)) = (&pair.label, &pair.smiles) else {
                continue;
            };
            let label = normalize_identifier(label);
            if label.is_empty() {
                continue;
            }
            match registry.get(&label) {
                None => {
                    registry.insert(label, smiles.clone());
                }
                Some(existing) if structures_equal(existing, smiles) => {}
                Some(existing) => {
                    warnings.push(Warning::labeled(
                        WarningCode::RegistryConflict,
                        label.clone(),
                        format!(
                            "identifier already bound to `{existing}`; ignoring `{smiles}`"
                        ),
                    ));
                }
            }
        }
    }
    (registry, warnings)
}

fn structures_equal(a: &str, b: &str) -> bool {
    if a == b {
        return true;
    }
    match (parse_smiles(a), parse_smiles(b)) {
        (Ok(ga), Ok(gb)) => canonical_key(&ga) == canonical_key(&gb),
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docmodel::{Figure, MoleculeEntity};

    fn pair(label: &str, smiles: &str) -> MoleculeEntity {
        MoleculeEntity {
            label: Some(label.to_string()),
            smiles: Some(smiles.to_string()),
            ..Default::default()
        }
    }

    fn doc_with_pairs(pairs: Vec<MoleculeEntity>) -> Document {
        Document {
            figures: vec![Figure {
                coref_pairs: pairs,
                ..Default::default()
            }],
            ..Default::default()
        }
    }

    #[test]
    fn simple_binding() {
        let doc = doc_with_pairs(vec![pair("1a", "CCO")]);
        let (registry, warnings) = build_registry(&doc);
        assert_eq!(registry.get("1a").map(String::as_str), Some("CCO"));
        assert!(warnings.is_empty());
    }

    #[test]
    fn first_binding_wins_with_warning() {
        let doc = doc_with_pairs(vec![pair("1a", "CCO"), pair("1a", "CCN")]);
        let (registry, warnings) = build_registry(&doc);
        assert_eq!(registry.get("1a").map(String::as_str), Some("CCO"));
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].code, WarningCode::RegistryConflict);
        assert_eq!(warnings[0].label.as_deref(), Some("1a"));
    }

    #[test]
    fn equivalent_rebinding_is_not_a_conflict() {
        let doc = doc_with_pairs(vec![pair("1a", "CCO"), pair("1a", "OCC")]);
        let (_, warnings) = build_registry(&doc);
        assert!(warnings.is_empty());
    }

    #[test]
    fn pair_without_identifier_skipped() {
        let doc = doc_with_pairs(vec![MoleculeEntity {
            smiles: Some("CCO".into()),
            ..Default::default()
        }]);
        let (registry, _) = build_registry(&doc);
        assert!(registry.is_empty());
    }

    #[test]
    fn normalization() {
        assert_eq!(normalize_identifier(" (1a) "), "1a");
        assert_eq!(normalize_identifier("**3d**"), "3d");
        assert_eq!(normalize_identifier("4b."), "4b");
        assert_eq!(normalize_identifier("[12]"), "12");
        assert_eq!(normalize_identifier("1A"), "1A");
        let doc = doc_with_pairs(vec![pair("(1a)", "CCO"), pair("1a", "CCO")]);
        let (registry, warnings) = build_registry(&doc);
        assert_eq!(registry.len(), 1);
        assert!(warnings.is_empty());
    }

    #[test]
    fn idempotent_and_order_stable() {
        let doc = doc_with_pairs(vec![pair("2b", "c1ccccc1"), pair("1a", "CCO")]);
        let (r1, w1) = build_registry(&doc);
        let (r2, w2) = build_registry(&doc);
        assert_eq!(r1, r2);
        assert_eq!(w1, w2);
        assert_eq!(
            r1.keys().cloned().collect::<Vec<_>>(),
            vec!["1a".to_string(), "2b".to_string()]
        );
    }
}
