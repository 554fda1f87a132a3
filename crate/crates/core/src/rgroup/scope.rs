//! Substrate-scope resolution over one figure: a template scheme plus a
//! grid of labeled concrete products. R-groups come either from text
//! definitions in the scheme or from template/product graph diffs; every
//! emitted reaction is verified by re-substitution.

use super::abbrev::{parse_rgroup_text, AbbreviationTable};
use super::infer::infer_rgroups_from_product;
use super::{parse_label, RGroupDefinition, ReactionTemplate, RgroupError};
use crate::docmodel::{normalize_identifier, ConditionSet, Figure, Reaction, Registry};
use crate::molgraph::{
    attach_fragment, canonical_key_opts, parse_smiles, write_smiles, MoleculeGraph,
};
use crate::report::{Warning, WarningCode};
use std::collections::BTreeSet;

#[derive(Debug, Default)]
pub struct ScopeOutcome {
    pub reactions: Vec<Reaction>,
    pub warnings: Vec<Warning>,
}

/// Substitute text-defined R-groups into every reactant and product of the
/// template. Errors if any placeholder label lacks a definition.
pub fn resolve_by_text(
    template: &ReactionTemplate,
    defs: &[RGroupDefinition],
) -> Result<Reaction, RgroupError> {
    let mut all_labels: BTreeSet<_> = BTreeSet::new();
    for graph in template.reactants.iter().chain(&template.products) {
        all_labels.extend(graph.placeholder_labels());
    }
    let missing: Vec<String> = all_labels
        .iter()
        .filter(|l| !defs.iter().any(|d| d.label == **l))
        .map(|l| l.as_str().to_string())
        .collect();
    if !missing.is_empty() {
        return Err(RgroupError::MissingDefinition(missing));
    }

    let substitute = |graph: &MoleculeGraph| -> Result<String, RgroupError> {
        let mut current = graph.clone();
        for label in graph.placeholder_labels() {
            let def = defs.iter().find(|d| d.label == label).expect("checked");
            current = attach_fragment(&current, &label, &def.substituent)?;
        }
        Ok(write_smiles(&current))
    };

    let mut reactants = BTreeSet::new();
    for graph in &template.reactants {
        reactants.insert(substitute(graph)?);
    }
    let mut products = BTreeSet::new();
    for graph in &template.products {
        products.insert(substitute(graph)?);
    }
    Ok(Reaction {
        reactants,
        products,
        conditions: Vec::new(),
    })
}

/// A definition line has an `=` in every clause ("R1 = Me, R2 = H");
/// anything else is ordinary conditions text.
fn is_definition_line(line: &str) -> bool {
    let clauses: Vec<&str> = line
        .split([',', ';'])
        .map(str::trim)
        .filter(|c| !c.is_empty())
        .collect();
    !clauses.is_empty() && clauses.iter().all(|c| c.contains('='))
}

struct TemplateProduct {
    label: String,
    prefix: String,
    graph: MoleculeGraph,
    /// Position within the template's parsed product list.
    product_index: usize,
}

/// Resolve one figure's substrate scope into concrete reactions.
pub fn resolve_substrate_scope(
    figure: &Figure,
    registry: &Registry,
    abbreviations: &AbbreviationTable,
) -> ScopeOutcome {
    let mut outcome = ScopeOutcome::default();
    let Some(scheme) = figure.schemes.first() else {
        return outcome;
    };

    // Parse template molecules.
    let mut reactant_graphs: Vec<MoleculeGraph> = Vec::new();
    for entity in &scheme.reactants {
        match entity.smiles.as_deref().map(parse_smiles) {
            Some(Ok(g)) => reactant_graphs.push(g),
            Some(Err(e)) => outcome.warnings.push(Warning::new(
                WarningCode::InvalidStructure,
                format!("template reactant failed to parse: {e}"),
            )),
            None => {}
        }
    }
    let mut product_graphs: Vec<(usize, MoleculeGraph)> = Vec::new();
    for (i, entity) in scheme.products.iter().enumerate() {
        match entity.smiles.as_deref().map(parse_smiles) {
            Some(Ok(g)) => product_graphs.push((i, g)),
            Some(Err(e)) => outcome.warnings.push(Warning::new(
                WarningCode::InvalidStructure,
                format!("template product failed to parse: {e}"),
            )),
            None => {}
        }
    }

    // Split scheme text into R-group definition lines and plain conditions.
    let mut definition_lines: Vec<&str> = Vec::new();
    let mut condition_notes: Vec<String> = Vec::new();
    for line in &scheme.conditions_text {
        if is_definition_line(line) {
            definition_lines.push(line);
        } else if !line.trim().is_empty() {
            condition_notes.push(line.trim().to_string());
        }
    }
    let base_conditions: Vec<ConditionSet> = if condition_notes.is_empty() {
        Vec::new()
    } else {
        vec![ConditionSet {
            notes: condition_notes,
            ..Default::default()
        }]
    };

    let template = ReactionTemplate {
        reactants: reactant_graphs,
        products: product_graphs.iter().map(|(_, g)| g.clone()).collect(),
        template_label: String::new(),
    };
    let mut template_labels: BTreeSet<_> = BTreeSet::new();
    for graph in template.reactants.iter().chain(&template.products) {
        template_labels.extend(graph.placeholder_labels());
    }

    // Text-defined R-groups: each definition line is one substrate entry.
    for line in definition_lines {
        let (defs, warns) = parse_rgroup_text(line, abbreviations);
        outcome.warnings.extend(warns);
        if template_labels.is_empty() || defs.is_empty() {
            continue;
        }
        match resolve_by_text(&template, &defs) {
            Ok(mut reaction) => {
                reaction.conditions = base_conditions.clone();
                outcome.reactions.push(reaction);
            }
            Err(RgroupError::MissingDefinition(labels)) => {
                outcome.warnings.push(Warning::new(
                    WarningCode::NoMapping,
                    format!(
                        "definition line `{line}` misses labels: {}",
                        labels.join(", ")
                    ),
                ));
            }
            Err(e) => {
                outcome.warnings.push(Warning::new(
                    WarningCode::VerifyFailed,
                    format!("substitution failed for `{line}`: {e}"),
                ));
            }
        }
    }

    // Figure-defined substrate grid: associate coref pairs with template
    // products through label prefixes.
    let mut template_products: Vec<TemplateProduct> = Vec::new();
    for (product_index, &(entity_index, ref graph)) in product_graphs.iter().enumerate() {
        let Some(raw_label) = scheme.products[entity_index].label.as_deref() else {
            continue;
        };
        let label = normalize_identifier(raw_label);
        if let Ok(parts) = parse_label(&label) {
            template_products.push(TemplateProduct {
                label,
                prefix: parts.prefix,
                graph: graph.clone(),
                product_index,
            });
        }
    }

    // Deterministic: entries sorted by normalized label.
    let mut entries: Vec<(String, &crate::docmodel::MoleculeEntity)> = figure
        .coref_pairs
        .iter()
        .filter(|p| p.smiles.is_some() && p.label.is_some())
        .map(|p| (normalize_identifier(p.label.as_deref().unwrap()), p))
        .filter(|(label, _)| !label.is_empty())
        .collect();
    entries.sort_by(|a, b| a.0.cmp(&b.0));

    for (label, pair) in entries {
        if template_products.iter().any(|tp| tp.label == label) {
            continue; // the template itself, drawn in the grid
        }
        let parts = match parse_label(&label) {
            Ok(p) => p,
            Err(_) => {
                outcome.warnings.push(Warning::labeled(
                    WarningCode::UnmatchedLabel,
                    label.clone(),
                    "label is not a digit prefix with letter suffix",
                ));
                continue;
            }
        };
        let Some(tp) = template_products
            .iter()
            .find(|tp| tp.prefix == parts.prefix)
        else {
            outcome.warnings.push(Warning::labeled(
                WarningCode::UnmatchedLabel,
                label.clone(),
                format!(
                    "prefix `{}` matches no template product label",
                    parts.prefix
                ),
            ));
            continue;
        };
        let concrete = match parse_smiles(pair.smiles.as_deref().unwrap()) {
            Ok(g) => g,
            Err(e) => {
                outcome.warnings.push(Warning::labeled(
                    WarningCode::InvalidStructure,
                    label.clone(),
                    format!("product structure failed to parse: {e}"),
                ));
                continue;
            }
        };
        match resolve_entry(&template, tp, &concrete, &label, registry) {
            Ok((mut reaction, ambiguous)) => {
                reaction.conditions = base_conditions.clone();
                if ambiguous {
                    outcome.warnings.push(Warning::labeled(
                        WarningCode::AmbiguousAssignment,
                        label.clone(),
                        "symmetric template admits several assignments; smallest chosen",
                    ));
                }
                outcome.reactions.push(reaction);
            }
            Err(w) => outcome.warnings.push(w),
        }
    }
    outcome
}

/// Resolve one labeled concrete product against its template: infer,
/// substitute everywhere, verify by re-substitution.
fn resolve_entry(
    template: &ReactionTemplate,
    tp: &TemplateProduct,
    concrete: &MoleculeGraph,
    label: &str,
    _registry: &Registry,
) -> Result<(Reaction, bool), Warning> {
    let assignments = match infer_rgroups_from_product(&tp.graph, concrete) {
        Ok(a) => a,
        Err(RgroupError::NoMapping) => {
            return Err(Warning::labeled(
                WarningCode::NoMapping,
                label,
                "template product is not a substructure of this product",
            ))
        }
        Err(e) => {
            return Err(Warning::labeled(
                WarningCode::NoMapping,
                label,
                format!("inference failed: {e}"),
            ))
        }
    };

    let substitute = |graph: &MoleculeGraph| -> Result<MoleculeGraph, Warning> {
        let mut current = graph.clone();
        for lab in graph.placeholder_labels() {
            let Some(sub) = assignments.map.get(&lab) else {
                return Err(Warning::labeled(
                    WarningCode::NoMapping,
                    label,
                    format!("no inferred substituent for `{}`", lab.as_str()),
                ));
            };
            current = attach_fragment(&current, &lab, sub).map_err(|e| {
                Warning::labeled(
                    WarningCode::VerifyFailed,
                    label,
                    format!("substitution failed: {e}"),
                )
            })?;
        }
        Ok(current)
    };

    // Mandatory re-substitution closure check on the matched product.
    let substituted_product = substitute(&tp.graph)?;
    if canonical_key_opts(&substituted_product, true) != canonical_key_opts(concrete, true) {
        return Err(Warning::labeled(
            WarningCode::VerifyFailed,
            label,
            "re-substituted template does not reproduce the product",
        ));
    }

    let mut reactants = BTreeSet::new();
    for graph in &template.reactants {
        reactants.insert(write_smiles(&substitute(graph)?));
    }
    let mut products = BTreeSet::new();
    for (i, graph) in template.products.iter().enumerate() {
        if i == tp.product_index {
            // Keep the concrete drawing; it may carry stereo detail the
            // template omitted.
            products.insert(write_smiles(concrete));
        } else {
            products.insert(write_smiles(&substitute(graph)?));
        }
    }
    Ok((
        Reaction {
            reactants,
            products,
            conditions: Vec::new(),
        },
        assignments.ambiguous,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::docmodel::MoleculeEntity;
    use crate::molgraph::{canonical_key, Fragment, PlaceholderLabel, Substituent};

    fn entity(smiles: &str, label: Option<&str>) -> MoleculeEntity {
        MoleculeEntity {
            smiles: Some(smiles.to_string()),
            label: label.map(String::from),
            ..Default::default()
        }
    }

    fn template_single(product: &str) -> ReactionTemplate {
        ReactionTemplate {
            reactants: vec![parse_smiles("[R1]c1ccc(Br)cc1").unwrap()],
            products: vec![parse_smiles(product).unwrap()],
            template_label: "3".into(),
        }
    }

    #[test]
    fn resolve_by_text_phenol() {
        let template = ReactionTemplate {
            reactants: vec![],
            products: vec![parse_smiles("[R1]c1ccccc1").unwrap()],
            template_label: String::new(),
        };
        let defs = vec![RGroupDefinition {
            label: PlaceholderLabel::new("R1").unwrap(),
            substituent: Substituent::Group(Fragment::from_smiles("O", 0).unwrap()),
        }];
        let reaction = resolve_by_text(&template, &defs).unwrap();
        let phenol = write_smiles(&parse_smiles("Oc1ccccc1").unwrap());
        assert!(reaction.products.contains(&phenol));
    }

    #[test]
    fn resolve_by_text_missing_definition() {
        let template = template_single("[R1]c1ccc([R2])cc1");
        let defs = vec![RGroupDefinition {
            label: PlaceholderLabel::new("R1").unwrap(),
            substituent: Substituent::Hydrogen,
        }];
        match resolve_by_text(&template, &defs) {
            Err(RgroupError::MissingDefinition(labels)) => {
                assert_eq!(labels, vec!["R2".to_string()])
            }
            other => panic!("expected missing definition, got {other:?}"),
        }
    }

    #[test]
    fn per_graph_substitution() {
        // The same label in reactant and product both substitute.
        let template = ReactionTemplate {
            reactants: vec![parse_smiles("[R]C=O").unwrap()],
            products: vec![parse_smiles("[R]CO").unwrap()],
            template_label: String::new(),
        };
        let defs = vec![RGroupDefinition {
            label: PlaceholderLabel::new("R").unwrap(),
            substituent: Substituent::Group(Fragment::from_smiles("C", 0).unwrap()),
        }];
        let reaction = resolve_by_text(&template, &defs).unwrap();
        let acetaldehyde = write_smiles(&parse_smiles("CC=O").unwrap());
        let ethanol = write_smiles(&parse_smiles("CCO").unwrap());
        assert!(reaction.reactants.contains(&acetaldehyde));
        assert!(reaction.products.contains(&ethanol));
    }

    fn scope_figure() -> Figure {
        Figure {
            coref_pairs: vec![
                entity("Cc1ccc(C=O)cc1", Some("3a")),
                entity("O=Cc1ccccc1", Some("3b")),
                entity("COc1ccc(C=O)cc1", Some("3c")),
                entity("O=Cc1ccc(C(F)(F)F)cc1", Some("3d")),
            ],
            schemes: vec![crate::docmodel::ReactionScheme {
                reactants: vec![entity("[R1]c1ccc(Br)cc1", None)],
                conditions_text: vec!["CO, Pd cat.".into()],
                products: vec![entity("[R1]c1ccc(C=O)cc1", Some("3"))],
                ..Default::default()
            }],
            ..Default::default()
        }
    }

    #[test]
    fn four_substrates_resolve() {
        let outcome =
            resolve_substrate_scope(&scope_figure(), &Registry::new(), &AbbreviationTable::builtin());
        assert_eq!(outcome.reactions.len(), 4, "warnings: {:?}", outcome.warnings);
        for reaction in &outcome.reactions {
            for smiles in reaction.reactants.iter().chain(&reaction.products) {
                let g = parse_smiles(smiles).unwrap();
                assert!(!g.has_placeholders(), "placeholder leaked: {smiles}");
            }
            assert_eq!(reaction.conditions.len(), 1);
        }
        // 3b is the R = H entry: reactant bromobenzene.
        let bromobenzene = write_smiles(&parse_smiles("Brc1ccccc1").unwrap());
        assert!(outcome
            .reactions
            .iter()
            .any(|r| r.reactants.contains(&bromobenzene)));
    }

    #[test]
    fn mislabeled_39_entry_warns() {
        let mut figure = scope_figure();
        figure.coref_pairs.push(entity("CCc1ccc(C=O)cc1", Some("39")));
        let outcome =
            resolve_substrate_scope(&figure, &Registry::new(), &AbbreviationTable::builtin());
        assert_eq!(outcome.reactions.len(), 4);
        let unmatched: Vec<_> = outcome
            .warnings
            .iter()
            .filter(|w| w.code == WarningCode::UnmatchedLabel)
            .collect();
        assert_eq!(unmatched.len(), 1);
        assert_eq!(unmatched[0].label.as_deref(), Some("39"));
    }

    #[test]
    fn empty_figure_empty_output() {
        let figure = Figure::default();
        let outcome =
            resolve_substrate_scope(&figure, &Registry::new(), &AbbreviationTable::builtin());
        assert!(outcome.reactions.is_empty());
        assert!(outcome.warnings.is_empty());
    }

    #[test]
    fn order_invariance() {
        let mut reversed = scope_figure();
        reversed.coref_pairs.reverse();
        let a = resolve_substrate_scope(
            &scope_figure(),
            &Registry::new(),
            &AbbreviationTable::builtin(),
        );
        let b = resolve_substrate_scope(&reversed, &Registry::new(), &AbbreviationTable::builtin());
        assert_eq!(a.reactions, b.reactions);
    }

    #[test]
    fn text_defined_scope() {
        let figure = Figure {
            coref_pairs: vec![],
            schemes: vec![crate::docmodel::ReactionScheme {
                reactants: vec![entity("[R]c1ccc(Br)cc1", None)],
                conditions_text: vec![
                    "Pd, base".into(),
                    "R = Me".into(),
                    "R = OMe".into(),
                ],
                products: vec![entity("[R]c1ccc(C#N)cc1", Some("2"))],
                ..Default::default()
            }],
            ..Default::default()
        };
        let outcome =
            resolve_substrate_scope(&figure, &Registry::new(), &AbbreviationTable::builtin());
        assert_eq!(outcome.reactions.len(), 2, "warnings: {:?}", outcome.warnings);
        let tolunitrile = write_smiles(&parse_smiles("Cc1ccc(C#N)cc1").unwrap());
        assert!(outcome.reactions[0].products.contains(&tolunitrile));
    }

    #[test]
    fn resubstitution_closure_holds() {
        let outcome =
            resolve_substrate_scope(&scope_figure(), &Registry::new(), &AbbreviationTable::builtin());
        // Every emitted product set contains the concrete product whose
        // canonical key matches a fresh parse.
        for reaction in &outcome.reactions {
            for p in &reaction.products {
                let g = parse_smiles(p).unwrap();
                assert_eq!(write_smiles(&g), *p, "products are canonical");
                let _ = canonical_key(&g);
            }
        }
    }
}
