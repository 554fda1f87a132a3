//! Bounded rule-based tautomer enumeration: 1,3- and 1,5-proton shifts
//! between a heteroatom (N, O, S) and a carbon across conjugated paths,
//! breadth-first with depth and population limits.

use super::{canonical_key, Atom, Bond, BondOrder, MolError, MoleculeGraph};
use std::collections::HashSet;

#[derive(Debug, Clone, Copy)]
pub struct TautomerConfig {
    /// Maximum number of shifts applied from the input structure.
    pub max_depth: usize,
    /// Maximum number of distinct tautomers enumerated per molecule.
    pub max_tautomers: usize,
}

impl Default for TautomerConfig {
    fn default() -> Self {
        TautomerConfig {
            max_depth: 4,
            max_tautomers: 1000,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TautomerVerdict {
    pub equivalent: bool,
    /// Enumeration hit its budget; the verdict fell back to direct
    /// canonical-key equality.
    pub budget_limited: bool,
}

/// All tautomers reachable within the configured budget, starting with
/// the input itself. The boolean reports whether the budget was hit.
pub fn enumerate_tautomers(
    graph: &MoleculeGraph,
    config: TautomerConfig,
) -> (Vec<MoleculeGraph>, bool) {
    let mut seen: HashSet<String> = HashSet::new();
    seen.insert(canonical_key(graph));
    let mut out = vec![graph.clone()];
    let mut frontier = vec![graph.clone()];
    let mut budget_hit = false;

    'depth: for _ in 0..config.max_depth {
        let mut next = Vec::new();
        for current in &frontier {
            for shifted in apply_shifts(current) {
                let key = canonical_key(&shifted);
                if seen.insert(key) {
                    if out.len() >= config.max_tautomers {
                        budget_hit = true;
                        break 'depth;
                    }
                    out.push(shifted.clone());
                    next.push(shifted);
                }
            }
        }
        if next.is_empty() {
            break;
        }
        frontier = next;
    }
    (out, budget_hit)
}

/// True when the rule-based tautomer sets of `a` and `b` share a
/// canonical key. Falls back to direct key equality when either
/// enumeration exceeds its budget.
pub fn tautomer_equivalent(
    a: &MoleculeGraph,
    b: &MoleculeGraph,
    config: TautomerConfig,
) -> TautomerVerdict {
    // Shifts preserve the molecular formula, so different formulas can
    // never be tautomers.
    if a.molecular_formula() != b.molecular_formula() {
        return TautomerVerdict {
            equivalent: false,
            budget_limited: false,
        };
    }
    if canonical_key(a) == canonical_key(b) {
        return TautomerVerdict {
            equivalent: true,
            budget_limited: false,
        };
    }
    let (tautomers_a, hit_a) = enumerate_tautomers(a, config);
    let (tautomers_b, hit_b) = enumerate_tautomers(b, config);
    if hit_a || hit_b {
        return TautomerVerdict {
            equivalent: canonical_key(a) == canonical_key(b),
            budget_limited: true,
        };
    }
    let keys_a: HashSet<String> = tautomers_a.iter().map(canonical_key).collect();
    let equivalent = tautomers_b.iter().any(|t| keys_a.contains(&canonical_key(t)));
    TautomerVerdict {
        equivalent,
        budget_limited: false,
    }
}

fn is_shift_element(atom: &Atom) -> Option<&'static str> {
    let e = atom.as_element()?;
    let sym = e.symbol();
    matches!(sym, "C" | "N" | "O" | "S").then_some(sym)
}

fn endpoints_allowed(donor: &str, acceptor: &str) -> bool {
    let hetero = |s: &str| matches!(s, "N" | "O" | "S");
    (hetero(donor) && acceptor == "C") || (donor == "C" && hetero(acceptor))
}

/// Every graph produced by one 1,3 or 1,5 proton shift.
fn apply_shifts(graph: &MoleculeGraph) -> Vec<MoleculeGraph> {
    let mut results = Vec::new();
    for donor in 0..graph.atom_count() {
        let Some(donor_sym) = is_shift_element(graph.atom(donor)) else {
            continue;
        };
        if graph.total_h(donor) == 0 {
            continue;
        }
        // 1,3: donor -single- mid =double= acceptor
        for &(mid, b1) in graph.neighbors(donor) {
            if graph.bond(b1).order != BondOrder::Single
                || is_shift_element(graph.atom(mid)).is_none()
            {
                continue;
            }
            for &(acceptor, b2) in graph.neighbors(mid) {
                if acceptor == donor || graph.bond(b2).order != BondOrder::Double {
                    continue;
                }
                let Some(acc_sym) = is_shift_element(graph.atom(acceptor)) else {
                    continue;
                };
                if !endpoints_allowed(donor_sym, acc_sym) {
                    continue;
                }
                if let Ok(shifted) = shift(graph, donor, acceptor, &[(b1, true), (b2, false)]) {
                    results.push(shifted);
                }
                // 1,5: extend the path by -single- then =double=.
                for &(a4, b3) in graph.neighbors(acceptor) {
                    if a4 == mid
                        || a4 == donor
                        || graph.bond(b3).order != BondOrder::Single
                        || is_shift_element(graph.atom(a4)).is_none()
                    {
                        continue;
                    }
                    for &(a5, b4) in graph.neighbors(a4) {
                        if a5 == acceptor
                            || a5 == mid
                            || a5 == donor
                            || graph.bond(b4).order != BondOrder::Double
                        {
                            continue;
                        }
                        let Some(far_sym) = is_shift_element(graph.atom(a5)) else {
                            continue;
                        };
                        if !endpoints_allowed(donor_sym, far_sym) {
                            continue;
                        }
                        if let Ok(shifted) = shift(
                            graph,
                            donor,
                            a5,
                            &[(b1, true), (b2, false), (b3, true), (b4, false)],
                        ) {
                            results.push(shifted);
                        }
                    }
                }
            }
        }
    }
    results
}

/// Move one hydrogen from donor to acceptor, flipping the orders of the
/// path bonds (`true` = single becomes double).
fn shift(
    graph: &MoleculeGraph,
    donor: usize,
    acceptor: usize,
    path: &[(usize, bool)],
) -> Result<MoleculeGraph, MolError> {
    let mut atoms: Vec<Atom> = Vec::with_capacity(graph.atom_count());
    for (i, atom) in graph.atoms().iter().enumerate() {
        let mut atom = atom.clone();
        let mut h = graph.total_h(i);
        if i == donor {
            h -= 1;
        } else if i == acceptor {
            h += 1;
        }
        atom.explicit_h = Some(h);
        if i == donor || i == acceptor {
            atom.stereo = None;
        }
        atom.aromatic = atom.aromatic && i != donor && i != acceptor;
        atoms.push(atom);
    }
    let path_bonds: Vec<usize> = path.iter().map(|&(b, _)| b).collect();
    let bonds: Vec<Bond> = graph
        .bonds()
        .iter()
        .enumerate()
        .map(|(bi, bond)| {
            let order = match path.iter().find(|&&(b, _)| b == bi) {
                Some(&(_, true)) => BondOrder::Double,
                Some(&(_, false)) => BondOrder::Single,
                None => bond.order,
            };
            Bond::new(bond.a, bond.b, order)
        })
        .collect();
    let stereo_bonds = graph
        .stereo_bonds()
        .iter()
        .filter(|s| !path_bonds.contains(&s.bond))
        .cloned()
        .collect();
    MoleculeGraph::rebuilt(atoms, bonds, stereo_bonds)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    fn verdict(a: &str, b: &str) -> TautomerVerdict {
        let ga = parse_smiles(a).unwrap();
        let gb = parse_smiles(b).unwrap();
        tautomer_equivalent(&ga, &gb, TautomerConfig::default())
    }

    #[test]
    fn keto_enol_acetone() {
        let v = verdict("CC(=O)C", "CC(O)=C");
        assert!(v.equivalent);
        assert!(!v.budget_limited);
    }

    #[test]
    fn reflexive() {
        assert!(verdict("CC(=O)C", "CC(=O)C").equivalent);
    }

    #[test]
    fn different_formula_not_tautomers() {
        assert!(!verdict("CC(=O)C", "CCO").equivalent);
    }

    #[test]
    fn symmetric_on_pairs() {
        for (a, b) in [
            ("CC(=O)C", "CC(O)=C"),
            ("CC(=O)CC(=O)C", "CC(O)=CC(=O)C"),
            ("CCO", "CCN"),
        ] {
            assert_eq!(verdict(a, b).equivalent, verdict(b, a).equivalent);
        }
    }

    #[test]
    fn formula_preserved_by_enumeration() {
        let g = parse_smiles("CC(=O)CC(=O)C").unwrap();
        let (tautomers, hit) = enumerate_tautomers(&g, TautomerConfig::default());
        assert!(!hit);
        assert!(tautomers.len() > 1, "diketone should enumerate tautomers");
        let formula = g.molecular_formula();
        for t in &tautomers {
            assert_eq!(t.molecular_formula(), formula);
        }
    }

    #[test]
    fn budget_fallback() {
        let g = parse_smiles("CC(=O)C").unwrap();
        let h = parse_smiles("CC(O)=C").unwrap();
        let tight = TautomerConfig {
            max_depth: 4,
            max_tautomers: 1,
        };
        let v = tautomer_equivalent(&g, &h, tight);
        assert!(v.budget_limited);
        assert!(!v.equivalent, "fallback compares direct keys");
    }

    #[test]
    fn acetamide_reaches_imidic_acid_through_carbon() {
        // The direct O->N shift is hetero-hetero and excluded, but two
        // C<->heteroatom shifts connect the pair through the enol form.
        let v = verdict("CC(=O)N", "CC(O)=N");
        assert!(v.equivalent);
    }

    #[test]
    fn hetero_hetero_only_pair_excluded() {
        // Formamide has no C-H donor path, so no shift applies at all and
        // the hetero-hetero route stays closed.
        let g = parse_smiles("NC=O").unwrap();
        let (tautomers, hit) = enumerate_tautomers(&g, TautomerConfig::default());
        assert!(!hit);
        assert_eq!(tautomers.len(), 1);
        assert!(!verdict("NC=O", "N=CO").equivalent);
    }
}
