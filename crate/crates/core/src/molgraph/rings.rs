//! Smallest set of smallest rings, used by aromaticity perception.

use super::MoleculeGraph;

/// One ring: atom indices in traversal order plus the member bond indices.
#[derive(Debug, Clone)]
pub struct Ring {
    pub atoms: Vec<usize>,
    pub bonds: Vec<usize>,
}

/// Compute an SSSR: for every bond, find the smallest cycle through it,
/// then greedily keep cycles that are linearly independent over GF(2)
/// until `bonds - atoms + components` rings are collected.
pub fn sssr(graph: &MoleculeGraph) -> Vec<Ring> {
    let n_bonds = graph.bonds().len();
    let n_atoms = graph.atom_count();
    let n_components = graph.components().len();
    let target = (n_bonds + n_components).saturating_sub(n_atoms);
    if target == 0 {
        return Vec::new();
    }

    let mut candidates: Vec<Ring> = Vec::new();
    for (bi, bond) in graph.bonds().iter().enumerate() {
        if let Some(path) = shortest_path_avoiding(graph, bond.a, bond.b, bi) {
            let mut atoms = path;
            let mut bonds = Vec::with_capacity(atoms.len());
            for w in atoms.windows(2) {
                bonds.push(graph.bond_between(w[0], w[1]).expect("path edge"));
            }
            bonds.push(bi);
            // Normalize for dedup: rotate/reflect so the smallest atom leads.
            let key = {
                let mut k = atoms.clone();
                k.sort_unstable();
                k
            };
            if !candidates.iter().any(|r| {
                let mut k = r.atoms.clone();
                k.sort_unstable();
                k == key
            }) {
                atoms.shrink_to_fit();
                candidates.push(Ring { atoms, bonds });
            }
        }
    }
    candidates.sort_by_key(|r| r.atoms.len());

    let words = n_bonds.div_ceil(64);
    let mut basis: Vec<Vec<u64>> = Vec::new();
    let mut chosen = Vec::new();
    for ring in candidates {
        if chosen.len() == target {
            break;
        }
        let mut vec = vec![0u64; words];
        for &b in &ring.bonds {
            vec[b / 64] ^= 1 << (b % 64);
        }
        // Gaussian elimination against the current basis; rows are not in
        // echelon form, so reduce to a fixpoint.
        loop {
            let mut changed = false;
            for row in &basis {
                let pivot = row.iter().position(|&w| w != 0).unwrap();
                let bit = row[pivot].trailing_zeros();
                if vec[pivot] & (1 << bit) != 0 {
                    for (v, r) in vec.iter_mut().zip(row) {
                        *v ^= r;
                    }
                    changed = true;
                }
            }
            if !changed {
                break;
            }
        }
        if vec.iter().any(|&w| w != 0) {
            basis.push(vec);
            chosen.push(ring);
        }
    }
    chosen
}

/// BFS shortest path from `from` to `to` that does not use bond `skip`.
fn shortest_path_avoiding(
    graph: &MoleculeGraph,
    from: usize,
    to: usize,
    skip: usize,
) -> Option<Vec<usize>> {
    let n = graph.atom_count();
    let mut prev = vec![usize::MAX; n];
    let mut seen = vec![false; n];
    let mut queue = std::collections::VecDeque::new();
    seen[from] = true;
    queue.push_back(from);
    while let Some(v) = queue.pop_front() {
        if v == to {
            let mut path = vec![to];
            let mut cur = to;
            while cur != from {
                cur = prev[cur];
                path.push(cur);
            }
            path.reverse();
            return Some(path);
        }
        for &(nbr, bi) in graph.neighbors(v) {
            if bi == skip || seen[nbr] {
                continue;
            }
            seen[nbr] = true;
            prev[nbr] = v;
            queue.push_back(nbr);
        }
    }
    None
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::parse_smiles;

    #[test]
    fn benzene_has_one_ring() {
        let g = parse_smiles("C1=CC=CC=C1").unwrap();
        let rings = sssr(&g);
        assert_eq!(rings.len(), 1);
        assert_eq!(rings[0].atoms.len(), 6);
        assert_eq!(rings[0].bonds.len(), 6);
    }

    #[test]
    fn naphthalene_has_two_six_rings() {
        let g = parse_smiles("C1=CC2=CC=CC=C2C=C1").unwrap();
        let rings = sssr(&g);
        assert_eq!(rings.len(), 2);
        assert!(rings.iter().all(|r| r.atoms.len() == 6));
    }

    #[test]
    fn chain_has_no_rings() {
        let g = parse_smiles("CCCC").unwrap();
        assert!(sssr(&g).is_empty());
    }

    #[test]
    fn spiro_rings_found() {
        let g = parse_smiles("C1CCC2(CC1)CCCC2").unwrap();
        let rings = sssr(&g);
        assert_eq!(rings.len(), 2);
    }
}
