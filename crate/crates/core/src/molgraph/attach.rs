//! Fragment attachment: substitute every placeholder carrying a label
//! with a fresh copy of a fragment, or with a hydrogen.

use super::{Atom, Bond, BondOrder, MolError, MoleculeGraph, PlaceholderLabel, StereoRef};

/// A substituent graph plus the atom that bonds to the template. The
/// fragment is written as its hydrogen-saturated parent; attachment
/// consumes hydrogens (or spare valence) at the attachment atom.
#[derive(Debug, Clone, PartialEq)]
pub struct Fragment {
    graph: MoleculeGraph,
    attachment: usize,
}

impl Fragment {
    pub fn new(graph: MoleculeGraph, attachment: usize) -> Result<Fragment, MolError> {
        if attachment >= graph.atom_count() {
            return Err(MolError::BadAttachment(attachment));
        }
        if free_valence(&graph, attachment) < 1 {
            return Err(MolError::ValenceOverflow {
                atom: attachment,
                detail: "attachment atom has no free valence".into(),
            });
        }
        Ok(Fragment { graph, attachment })
    }

    pub fn from_smiles(text: &str, attachment: usize) -> Result<Fragment, MolError> {
        Fragment::new(super::parse_smiles(text)?, attachment)
    }

    pub fn graph(&self) -> &MoleculeGraph {
        &self.graph
    }

    pub fn attachment(&self) -> usize {
        self.attachment
    }
}

/// A fragment or the special hydrogen substituent (`R = H`).
#[derive(Debug, Clone, PartialEq)]
pub enum Substituent {
    Hydrogen,
    Group(Fragment),
}

/// Hydrogens available for new bonds, plus unfilled standard valence.
fn free_valence(graph: &MoleculeGraph, atom: usize) -> u8 {
    let a = graph.atom(atom);
    if a.is_placeholder() {
        return 1;
    }
    let element = match a.as_element() {
        Some(e) => e,
        None => return 0,
    };
    let h = graph.total_h(atom);
    let max = match element.max_valence(a.charge) {
        Some(m) => m,
        None => return h,
    };
    let twice: u16 = graph
        .neighbors(atom)
        .iter()
        .map(|&(_, b)| graph.bond(b).order.twice_order() as u16)
        .sum();
    let load = twice.div_ceil(2) as u8 + h;
    // Hydrogens are consumable, plus any unfilled standard valence.
    h.saturating_add(max.saturating_sub(load))
}

/// Join two graphs with a single bond between `a_at` and `b_at`, consuming
/// one hydrogen (or spare valence) on each side. Used to chain condensed
/// formula groups.
pub(crate) fn join_single(
    left: &MoleculeGraph,
    a_at: usize,
    right: &MoleculeGraph,
    b_at: usize,
) -> Result<MoleculeGraph, MolError> {
    for (g, at) in [(left, a_at), (right, b_at)] {
        if free_valence(g, at) < 1 {
            return Err(MolError::ValenceOverflow {
                atom: at,
                detail: "no free valence for chain bond".into(),
            });
        }
    }
    let offset = left.atom_count();
    let mut atoms: Vec<Atom> = Vec::with_capacity(offset + right.atom_count());
    for (i, atom) in left.atoms().iter().enumerate() {
        let mut atom = atom.clone();
        let h = left.total_h(i);
        atom.explicit_h = Some(if i == a_at { h.saturating_sub(1) } else { h });
        atoms.push(atom);
    }
    for (i, atom) in right.atoms().iter().enumerate() {
        let mut atom = atom.clone();
        let h = right.total_h(i);
        atom.explicit_h = Some(if i == b_at { h.saturating_sub(1) } else { h });
        if let Some(stereo) = &mut atom.stereo {
            for r in &mut stereo.refs {
                if let StereoRef::Atom(a) = r {
                    *a += offset;
                }
            }
        }
        atoms.push(atom);
    }
    atoms[a_at].stereo = None;
    atoms[offset + b_at].stereo = None;
    let mut bonds: Vec<Bond> = left.bonds().to_vec();
    for bond in right.bonds() {
        bonds.push(Bond::new(bond.a + offset, bond.b + offset, bond.order));
    }
    bonds.push(Bond::new(a_at, offset + b_at, BondOrder::Single));
    MoleculeGraph::rebuilt(atoms, bonds, Vec::new())
}

/// Replace every placeholder atom carrying `label` by the substituent.
/// Each occurrence receives a fresh copy of the fragment; the hydrogen
/// substituent deletes the placeholder and increments its neighbor's
/// hydrogen count.
pub fn attach_fragment(
    template: &MoleculeGraph,
    label: &PlaceholderLabel,
    substituent: &Substituent,
) -> Result<MoleculeGraph, MolError> {
    let sites = template.placeholder_indices(label);
    if sites.is_empty() {
        return Err(MolError::LabelNotFound(label.as_str().to_string()));
    }
    let is_site = |i: usize| sites.contains(&i);

    // Kept template atoms, hydrogen counts materialized. Tetrahedral tags
    // referencing a substitution site are stale and dropped.
    let mut remap = vec![usize::MAX; template.atom_count()];
    let mut atoms: Vec<Atom> = Vec::new();
    for (i, atom) in template.atoms().iter().enumerate() {
        if is_site(i) {
            continue;
        }
        let mut atom = atom.clone();
        atom.explicit_h = Some(template.total_h(i));
        if let Some(stereo) = &atom.stereo {
            let stale = stereo
                .refs
                .iter()
                .any(|r| matches!(r, StereoRef::Atom(a) if is_site(*a)));
            if stale {
                atom.stereo = None;
            }
        }
        remap[i] = atoms.len();
        atoms.push(atom);
    }
    // Remap surviving stereo references into the new index space.
    for atom in &mut atoms {
        if let Some(stereo) = &mut atom.stereo {
            for r in &mut stereo.refs {
                if let StereoRef::Atom(a) = r {
                    *a = remap[*a];
                }
            }
        }
    }

    let mut bonds: Vec<Bond> = Vec::new();
    for bond in template.bonds() {
        if is_site(bond.a) || is_site(bond.b) {
            continue;
        }
        bonds.push(Bond::new(remap[bond.a], remap[bond.b], bond.order));
    }

    // Atoms whose environment changes lose their tetrahedral tags.
    let mut touched: Vec<usize> = Vec::new();

    for &site in &sites {
        let junctions: Vec<(usize, BondOrder)> = template
            .neighbors(site)
            .iter()
            .map(|&(nbr, b)| (nbr, template.bond(b).order))
            .collect();
        if junctions.iter().any(|&(nbr, _)| is_site(nbr)) {
            return Err(MolError::ValenceOverflow {
                atom: site,
                detail: "adjacent placeholders cannot be substituted".into(),
            });
        }
        match substituent {
            Substituent::Hydrogen => {
                if junctions.len() > 1 {
                    return Err(MolError::ValenceOverflow {
                        atom: site,
                        detail: "hydrogen substituent cannot bridge two atoms".into(),
                    });
                }
                if let Some(&(nbr, order)) = junctions.first() {
                    if order != BondOrder::Single {
                        return Err(MolError::ValenceOverflow {
                            atom: site,
                            detail: "hydrogen substituent requires a single bond".into(),
                        });
                    }
                    let ni = remap[nbr];
                    atoms[ni].explicit_h = Some(atoms[ni].explicit_h.unwrap_or(0) + 1);
                    touched.push(ni);
                }
            }
            Substituent::Group(frag) => {
                let offset = atoms.len();
                for (fi, atom) in frag.graph.atoms().iter().enumerate() {
                    let mut atom = atom.clone();
                    atom.explicit_h = Some(frag.graph.total_h(fi));
                    if let Some(stereo) = &mut atom.stereo {
                        for r in &mut stereo.refs {
                            if let StereoRef::Atom(a) = r {
                                *a += offset;
                            }
                        }
                    }
                    atoms.push(atom);
                }
                for bond in frag.graph.bonds() {
                    bonds.push(Bond::new(bond.a + offset, bond.b + offset, bond.order));
                }
                let att = offset + frag.attachment;
                // Each junction bond consumes hydrogens or spare valence.
                let mut needed: u8 = 0;
                for &(nbr, order) in &junctions {
                    bonds.push(Bond::new(remap[nbr], att, order));
                    needed = needed.saturating_add((order.twice_order() + 1) / 2);
                    touched.push(remap[nbr]);
                }
                let have = free_valence(&frag.graph, frag.attachment);
                if have < needed {
                    return Err(MolError::ValenceOverflow {
                        atom: att,
                        detail: format!(
                            "attachment needs {needed} valence, fragment provides {have}"
                        ),
                    });
                }
                let old_h = frag.graph.total_h(frag.attachment);
                atoms[att].explicit_h = Some(old_h.saturating_sub(needed));
                touched.push(att);
            }
        }
    }

    for &i in &touched {
        atoms[i].stereo = None;
    }

    if atoms.is_empty() {
        return Err(MolError::EmptyGraph);
    }
    MoleculeGraph::rebuilt(atoms, bonds, Vec::new())
}
