//! R-group inference by template/product graph diff: map the template
//! product into the concrete product; the connected unmapped fragments
//! seeded at each placeholder's matched atom are the substituents.

use super::RgroupError;
use crate::molgraph::{
    canonical_key_opts, match_substructure, Atom, AtomMapping, Bond, Fragment, MatchOptions,
    MatchTarget, MoleculeGraph, PlaceholderLabel, StereoRef, Substituent,
};
use std::collections::{BTreeMap, BTreeSet};

/// Canonical key used to order and compare the hydrogen substituent.
pub const HYDROGEN_KEY: &str = "[H]";

#[derive(Debug, Clone)]
pub struct Assignments {
    pub map: BTreeMap<PlaceholderLabel, Substituent>,
    /// Several non-isomorphic assignment sets fit a symmetric template;
    /// the lexicographically smallest one was chosen.
    pub ambiguous: bool,
}

impl Assignments {
    /// (label, fragment key) pairs, the comparison form used for the
    /// deterministic tie-break.
    fn signature(map: &BTreeMap<PlaceholderLabel, Substituent>) -> Vec<(String, String)> {
        map.iter()
            .map(|(label, sub)| (label.as_str().to_string(), substituent_key(sub)))
            .collect()
    }
}

pub fn substituent_key(sub: &Substituent) -> String {
    match sub {
        Substituent::Hydrogen => HYDROGEN_KEY.to_string(),
        Substituent::Group(frag) => fragment_key(frag),
    }
}

/// Attachment-position-sensitive canonical key: a placeholder is bonded
/// to the attachment atom (consuming the hydrogen the junction frees)
/// before canonicalizing.
pub fn fragment_key(frag: &Fragment) -> String {
    let graph = frag.graph();
    let mut atoms: Vec<Atom> = Vec::with_capacity(graph.atom_count() + 1);
    for (i, atom) in graph.atoms().iter().enumerate() {
        let mut atom = atom.clone();
        let h = graph.total_h(i);
        atom.explicit_h = Some(if i == frag.attachment() {
            h.saturating_sub(1)
        } else {
            h
        });
        atom.stereo = None;
        atoms.push(atom);
    }
    let anchor = Atom::placeholder("*").expect("anchor label");
    atoms.push(anchor);
    let mut bonds: Vec<Bond> = graph.bonds().to_vec();
    bonds.push(Bond::new(
        frag.attachment(),
        atoms.len() - 1,
        crate::molgraph::BondOrder::Single,
    ));
    match MoleculeGraph::rebuilt(atoms, bonds, Vec::new()) {
        Ok(g) => canonical_key_opts(&g, true),
        Err(_) => format!("!{}", canonical_key_opts(graph, true)),
    }
}

/// Infer the substituent of every placeholder in `template_product` from
/// a concrete, placeholder-free product.
pub fn infer_rgroups_from_product(
    template_product: &MoleculeGraph,
    concrete_product: &MoleculeGraph,
) -> Result<Assignments, RgroupError> {
    let options = MatchOptions {
        placeholder_wildcard: true,
        ignore_stereo: true,
    };
    let mappings = match_substructure(template_product, concrete_product, options);
    if mappings.is_empty() {
        return Err(RgroupError::NoMapping);
    }

    // Each valid mapping yields one candidate assignment set.
    let mut candidates: Vec<(usize, Vec<(String, String)>, BTreeMap<PlaceholderLabel, Substituent>)> =
        Vec::new();
    for mapping in &mappings {
        if let Some(map) = assignment_for_mapping(template_product, concrete_product, mapping) {
            let hydrogens = map
                .values()
                .filter(|s| matches!(s, Substituent::Hydrogen))
                .count();
            let signature = Assignments::signature(&map);
            if !candidates
                .iter()
                .any(|(h, sig, _)| *h == hydrogens && *sig == signature)
            {
                candidates.push((hydrogens, signature, map));
            }
        }
    }
    if candidates.is_empty() {
        return Err(RgroupError::NoMapping);
    }
    // Prefer maximal heavy-atom coverage (fewest hydrogen assignments),
    // then the lexicographically smallest signature.
    candidates.sort_by(|a, b| a.0.cmp(&b.0).then_with(|| a.1.cmp(&b.1)));
    let best_h = candidates[0].0;
    let ambiguous = candidates.iter().filter(|(h, _, _)| *h == best_h).count() > 1;
    let (_, _, map) = candidates.into_iter().next().unwrap();
    Ok(Assignments { map, ambiguous })
}

/// Extract and validate the fragment assignment induced by one mapping.
/// Returns `None` when the mapping does not explain the whole product or
/// when same-label sites disagree.
fn assignment_for_mapping(
    template: &MoleculeGraph,
    concrete: &MoleculeGraph,
    mapping: &AtomMapping,
) -> Option<BTreeMap<PlaceholderLabel, Substituent>> {
    let covered: BTreeSet<usize> = template
        .atoms()
        .iter()
        .enumerate()
        .filter(|(_, a)| !a.is_placeholder())
        .filter_map(|(p, _)| match mapping.target_of(p) {
            Some(MatchTarget::Atom(t)) => Some(t),
            _ => None,
        })
        .collect();

    let mut claimed: BTreeSet<usize> = BTreeSet::new();
    let mut expected_junctions: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut per_label: BTreeMap<PlaceholderLabel, Vec<Substituent>> = BTreeMap::new();

    for (p, atom) in template.atoms().iter().enumerate() {
        let Some(label) = atom.placeholder_label() else {
            continue;
        };
        match mapping.target_of(p)? {
            MatchTarget::ImplicitH { .. } => {
                per_label
                    .entry(label.clone())
                    .or_default()
                    .push(Substituent::Hydrogen);
            }
            MatchTarget::Atom(seed) => {
                // Connected unmapped fragment reachable from the seed.
                let mut fragment_atoms: Vec<usize> = Vec::new();
                let mut seen = BTreeSet::new();
                seen.insert(seed);
                let mut stack = vec![seed];
                while let Some(v) = stack.pop() {
                    fragment_atoms.push(v);
                    for &(nbr, _) in concrete.neighbors(v) {
                        if !covered.contains(&nbr) && seen.insert(nbr) {
                            stack.push(nbr);
                        }
                    }
                }
                fragment_atoms.sort_unstable();
                // Distinct placeholder sites must claim disjoint fragments.
                for &a in &fragment_atoms {
                    if !claimed.insert(a) {
                        return None;
                    }
                }
                // The junction bond ties the seed to the atom matched by
                // the placeholder's pattern neighbor.
                let mut junction_units: u8 = 0;
                for &(q, pb) in template.neighbors(p) {
                    let Some(MatchTarget::Atom(tq)) = mapping.target_of(q) else {
                        return None;
                    };
                    expected_junctions.insert((tq.min(seed), tq.max(seed)));
                    junction_units = junction_units
                        .saturating_add((template.bond(pb).order.twice_order() + 1) / 2);
                }
                let fragment =
                    extract_fragment(concrete, &fragment_atoms, seed, junction_units)?;
                per_label
                    .entry(label.clone())
                    .or_default()
                    .push(Substituent::Group(fragment));
            }
        }
    }

    // Every unmapped atom must belong to exactly one claimed fragment.
    for t in 0..concrete.atom_count() {
        if !covered.contains(&t) && !claimed.contains(&t) {
            return None;
        }
    }
    // Every covered-to-unmapped bond must be an expected junction.
    for bond in concrete.bonds() {
        let a_cov = covered.contains(&bond.a);
        let b_cov = covered.contains(&bond.b);
        if a_cov != b_cov {
            let key = (bond.a.min(bond.b), bond.a.max(bond.b));
            if !expected_junctions.contains(&key) {
                return None;
            }
        }
    }

    // Same label at several sites must carry the same substituent.
    let mut map = BTreeMap::new();
    for (label, subs) in per_label {
        let keys: BTreeSet<String> = subs.iter().map(substituent_key).collect();
        if keys.len() != 1 {
            return None;
        }
        map.insert(label, subs.into_iter().next().unwrap());
    }
    Some(map)
}

/// Build a Fragment from a subset of the concrete product. The attachment
/// atom regains the hydrogens consumed by the junction bond so that
/// re-substitution restores the original counts.
fn extract_fragment(
    concrete: &MoleculeGraph,
    atom_indices: &[usize],
    seed: usize,
    junction_units: u8,
) -> Option<Fragment> {
    let mut remap = BTreeMap::new();
    for (new_idx, &old) in atom_indices.iter().enumerate() {
        remap.insert(old, new_idx);
    }
    let mut atoms = Vec::with_capacity(atom_indices.len());
    for &old in atom_indices {
        let mut atom = concrete.atom(old).clone();
        let mut h = concrete.total_h(old);
        if old == seed {
            h = h.saturating_add(junction_units);
        }
        atom.explicit_h = Some(h);
        if let Some(stereo) = &atom.stereo {
            let ok = stereo.refs.iter().all(|r| match r {
                StereoRef::Atom(a) => remap.contains_key(a),
                StereoRef::ImplicitH => true,
            });
            if !ok || old == seed {
                atom.stereo = None;
            }
        }
        if let Some(stereo) = &mut atom.stereo {
            for r in &mut stereo.refs {
                if let StereoRef::Atom(a) = r {
                    *a = remap[a];
                }
            }
        }
        atoms.push(atom);
    }
    let mut bonds = Vec::new();
    for bond in concrete.bonds() {
        if let (Some(&a), Some(&b)) = (remap.get(&bond.a), remap.get(&bond.b)) {
            bonds.push(Bond::new(a, b, bond.order));
        }
    }
    let graph = MoleculeGraph::rebuilt(atoms, bonds, Vec::new()).ok()?;
    Fragment::new(graph, remap[&seed]).ok()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn infer(template: &str, product: &str) -> Result<Assignments, RgroupError> {
        let t = parse_smiles(template).unwrap();
        let p = parse_smiles(product).unwrap();
        infer_rgroups_from_product(&t, &p)
    }

    fn key_of(assignments: &Assignments, label: &str) -> String {
        let label = PlaceholderLabel::new(label).unwrap();
        substituent_key(assignments.map.get(&label).unwrap())
    }

    #[test]
    fn methyl_from_aldehyde_pair() {
        let a = infer("[R1]c1ccc(C=O)cc1", "Cc1ccc(C=O)cc1").unwrap();
        assert!(!a.ambiguous);
        let methyl = Fragment::from_smiles("C", 0).unwrap();
        assert_eq!(key_of(&a, "R1"), fragment_key(&methyl));
    }

    #[test]
    fn hydrogen_when_no_substituent() {
        let a = infer("[R1]c1ccc(C=O)cc1", "O=Cc1ccccc1").unwrap();
        assert!(!a.ambiguous);
        assert_eq!(key_of(&a, "R1"), HYDROGEN_KEY);
    }

    #[test]
    fn symmetric_template_flagged_ambiguous() {
        let a = infer("[R1]C(=O)[R2]", "CC(=O)CC").unwrap();
        assert!(a.ambiguous);
        // Both (Me, Et) and (Et, Me) fit; the tie-break hands R1 the
        // lexicographically smaller fragment key.
        let methyl = fragment_key(&Fragment::from_smiles("C", 0).unwrap());
        let ethyl = fragment_key(&Fragment::from_smiles("CC", 0).unwrap());
        let smaller = methyl.clone().min(ethyl.clone());
        let larger = methyl.max(ethyl);
        assert_eq!(key_of(&a, "R1"), smaller);
        assert_eq!(key_of(&a, "R2"), larger);
        // Deterministic across repeated runs.
        let b = infer("[R1]C(=O)[R2]", "CC(=O)CC").unwrap();
        assert_eq!(key_of(&a, "R1"), key_of(&b, "R1"));
    }

    #[test]
    fn no_mapping_error() {
        let err = infer("[R1]c1ccc(C=O)cc1", "CCCC");
        assert!(matches!(err, Err(RgroupError::NoMapping)));
    }

    #[test]
    fn multi_site_same_label_must_agree() {
        let a = infer("[R1]C(=O)[R1]", "CC(=O)C").unwrap();
        assert!(!a.ambiguous);
        let methyl = Fragment::from_smiles("C", 0).unwrap();
        assert_eq!(key_of(&a, "R1"), fragment_key(&methyl));
        // Methyl/ethyl cannot both be R1.
        let err = infer("[R1]C(=O)[R1]", "CC(=O)CC");
        assert!(matches!(err, Err(RgroupError::NoMapping)));
    }

    #[test]
    fn branched_fragment_extracted_whole() {
        let a = infer("[R1]c1ccc(C=O)cc1", "CC(C)c1ccc(C=O)cc1").unwrap();
        let isopropyl = Fragment::from_smiles("C(C)C", 0).unwrap();
        assert_eq!(key_of(&a, "R1"), fragment_key(&isopropyl));
    }

    #[test]
    fn attachment_position_matters_in_fragment_key() {
        // n-propyl attached at the end differs from attachment in the middle.
        let end = Fragment::from_smiles("CCC", 0).unwrap();
        let middle = Fragment::from_smiles("CCC", 1).unwrap();
        assert_ne!(fragment_key(&end), fragment_key(&middle));
    }
}
