//! Aromaticity perception over SSSR rings.
//!
//! A ring becomes aromatic when either every member bond was already
//! written aromatic (input-declared form), or every member is an sp2
//! C/N/O/S and the pi-electron count satisfies 4n+2 under simple
//! contribution rules. Kekulized inputs normalize to the aromatic form so
//! structure comparison never depends on drawing convention.

use super::rings::{sssr, Ring};
use super::{BondOrder, MolError, MoleculeGraph};

pub fn perceive(graph: &mut MoleculeGraph) -> Result<(), MolError> {
    let rings = sssr(graph);

    // Fixpoint: marking one ring aromatic can make a fused neighbor pass.
    loop {
        let mut changed = false;
        for ring in &rings {
            if ring.bonds.iter().all(|&b| graph.bonds[b].order == BondOrder::Aromatic) {
                continue;
            }
            if ring_is_aromatic(graph, ring) {
                for &b in &ring.bonds {
                    graph.bonds[b].order = BondOrder::Aromatic;
                }
                for &a in &ring.atoms {
                    graph.atoms[a].aromatic = true;
                }
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    // Every aromatic bond must now sit inside some all-aromatic ring.
    let mut in_aromatic_ring = vec![false; graph.bonds.len()];
    for ring in &rings {
        if ring.bonds.iter().all(|&b| graph.bonds[b].order == BondOrder::Aromatic) {
            for &b in &ring.bonds {
                in_aromatic_ring[b] = true;
            }
        }
    }
    for (bi, bond) in graph.bonds.iter().enumerate() {
        if bond.order == BondOrder::Aromatic && !in_aromatic_ring[bi] {
            return Err(MolError::InvalidAromaticity { atom: bond.a });
        }
    }
    for (ai, atom) in graph.atoms.iter().enumerate() {
        if atom.aromatic {
            let ok = graph.adjacency[ai]
                .iter()
                .any(|&(_, b)| graph.bonds[b].order == BondOrder::Aromatic);
            if !ok {
                return Err(MolError::InvalidAromaticity { atom: ai });
            }
        }
    }
    Ok(())
}

fn ring_is_aromatic(graph: &MoleculeGraph, ring: &Ring) -> bool {
    // Input-declared: trust rings whose every bond was written aromatic.
    if ring.bonds.iter().all(|&b| graph.bonds[b].order == BondOrder::Aromatic) {
        return true;
    }

    let in_ring = |atom: usize| ring.atoms.contains(&atom);
    let mut pi = 0u32;
    for &a in &ring.atoms {
        let atom = &graph.atoms[a];
        let element = match atom.as_element() {
            Some(e) => e,
            None => return false,
        };
        let sym = element.symbol();
        if !matches!(sym, "C" | "N" | "O" | "S") {
            return false;
        }
        let mut has_in_ring_pi = false;
        let mut has_exo_double = false;
        let mut has_triple = false;
        for &(nbr, b) in &graph.adjacency[a] {
            match graph.bonds[b].order {
                BondOrder::Double | BondOrder::Aromatic => {
                    if in_ring(nbr) && ring.bonds.contains(&b) {
                        has_in_ring_pi = true;
                    } else {
                        has_exo_double = true;
                    }
                }
                BondOrder::Triple => has_triple = true,
                BondOrder::Single => {}
            }
        }
        if has_triple {
            return false;
        }
        if has_in_ring_pi {
            pi += 1;
        } else if has_exo_double {
            // sp2 but contributes no ring electrons (e.g. quinone carbonyl).
        } else if matches!(sym, "N" | "O" | "S") {
            // Lone-pair donor (pyrrole N, furan O, thiophene S).
            pi += 2;
        } else {
            // sp3 carbon breaks the ring.
            return false;
        }
    }
    pi >= 2 && (pi - 2) % 4 == 0
}

#[cfg(test)]
mod tests {
    use crate::molgraph::{parse_smiles, BondOrder};

    #[test]
    fn kekulized_benzene_aromatizes() {
        let g = parse_smiles("C1=CC=CC=C1").unwrap();
        assert!(g.atoms().iter().all(|a| a.aromatic));
        assert!(g.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
    }

    #[test]
    fn kekulized_naphthalene_aromatizes() {
        let g = parse_smiles("C1=CC2=CC=CC=C2C=C1").unwrap();
        assert!(g.atoms().iter().all(|a| a.aromatic));
    }

    #[test]
    fn heteroaromatics() {
        for s in ["C1=CC=CS1", "C1=CC=CO1", "C1=CC=C[NH]1", "C1=CC=NC=C1"] {
            let g = parse_smiles(s).unwrap();
            assert!(
                g.atoms().iter().all(|a| a.aromatic),
                "{s} should fully aromatize"
            );
        }
    }

    #[test]
    fn cyclohexane_and_quinone_stay_kekule() {
        let g = parse_smiles("C1CCCCC1").unwrap();
        assert!(g.atoms().iter().all(|a| !a.aromatic));
        // para-benzoquinone: 4 pi electrons in the ring, not aromatic.
        let g = parse_smiles("O=C1C=CC(=O)C=C1").unwrap();
        assert!(g.atoms().iter().all(|a| !a.aromatic));
    }

    #[test]
    fn acyclic_aromatic_rejected() {
        assert!(parse_smiles("cc").is_err());
    }

    #[test]
    fn cyclobutadiene_kekule_not_aromatized() {
        let g = parse_smiles("C1=CC=C1").unwrap();
        assert!(g.atoms().iter().all(|a| !a.aromatic));
    }
}
