//! Molecular graph core: SMILES parsing/writing, canonicalization,
//! aromaticity perception, substructure matching, fragment attachment and
//! tautomer enumeration.
//!
//! All operations are pure functions on immutable graphs; nothing in this
//! module holds global state.

mod aromaticity;
mod attach;
mod canon;
mod matcher;
mod rings;
mod smiles;
mod tautomer;

pub use attach::{attach_fragment, Fragment, Substituent};
pub(crate) use attach::join_single;
pub use canon::{canonical_key, canonical_key_opts, write_smiles};
pub use matcher::{match_substructure, AtomMapping, MatchOptions, MatchTarget};
pub use smiles::parse_smiles;
pub use tautomer::{enumerate_tautomers, tautomer_equivalent, TautomerConfig, TautomerVerdict};

use crate::element::Element;
use std::collections::BTreeMap;
use thiserror::Error;

/// Label of an R-group placeholder atom, e.g. "R", "R1", "*".
/// Labels compare by exact string equality.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PlaceholderLabel(String);

impl PlaceholderLabel {
    pub fn new(text: impl Into<String>) -> Result<Self, MolError> {
        let text = text.into();
        if text.is_empty() {
            return Err(MolError::EmptyPlaceholderLabel);
        }
        Ok(PlaceholderLabel(text))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl std::fmt::Display for PlaceholderLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

/// What an atom node is: a real element or an R-group placeholder.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum AtomKind {
    Element(Element),
    Placeholder(PlaceholderLabel),
}

/// Tetrahedral parity as written in SMILES.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Parity {
    /// `@` — anticlockwise.
    Ccw,
    /// `@@` — clockwise.
    Cw,
}

impl Parity {
    pub fn flipped(self) -> Parity {
        match self {
            Parity::Ccw => Parity::Cw,
            Parity::Cw => Parity::Ccw,
        }
    }
}

/// A neighbor slot in a tetrahedral reference order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum StereoRef {
    Atom(usize),
    ImplicitH,
}

/// Tetrahedral stereo descriptor: the four neighbors in reference order
/// plus the parity of the arrangement when viewed from the first.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Tetrahedral {
    pub refs: Vec<StereoRef>,
    pub parity: Parity,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Atom {
    pub kind: AtomKind,
    pub charge: i8,
    pub isotope: Option<u16>,
    /// Hydrogen count as written (bracket atoms) or materialized by graph
    /// surgery. `None` means "derive by the standard-valence rule".
    pub explicit_h: Option<u8>,
    pub aromatic: bool,
    pub stereo: Option<Tetrahedral>,
}

impl Atom {
    pub fn element(sym: &str) -> Result<Atom, MolError> {
        let element = Element::from_symbol(sym)
            .ok_or_else(|| MolError::UnknownElement(sym.to_string()))?;
        Ok(Atom {
            kind: AtomKind::Element(element),
            charge: 0,
            isotope: None,
            explicit_h: None,
            aromatic: false,
            stereo: None,
        })
    }

    pub fn placeholder(label: &str) -> Result<Atom, MolError> {
        Ok(Atom {
            kind: AtomKind::Placeholder(PlaceholderLabel::new(label)?),
            charge: 0,
            isotope: None,
            explicit_h: None,
            aromatic: false,
            stereo: None,
        })
    }

    pub fn is_placeholder(&self) -> bool {
        matches!(self.kind, AtomKind::Placeholder(_))
    }

    pub fn placeholder_label(&self) -> Option<&PlaceholderLabel> {
        match &self.kind {
            AtomKind::Placeholder(l) => Some(l),
            AtomKind::Element(_) => None,
        }
    }

    pub fn as_element(&self) -> Option<Element> {
        match &self.kind {
            AtomKind::Element(e) => Some(*e),
            AtomKind::Placeholder(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Twice the nominal bond order; aromatic counts as 1.5.
    pub fn twice_order(self) -> u8 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }
}

/// Direction tag on a single bond (`/` = up, `\` = down), relative to the
/// bond's stored (a, b) orientation.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BondDir {
    Up,
    Down,
}

impl BondDir {
    pub fn flipped(self) -> BondDir {
        match self {
            BondDir::Up => BondDir::Down,
            BondDir::Down => BondDir::Up,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    /// Raw directional tag from parsing; normalized into
    /// [`DoubleBondStereo`] records when the graph is finalized.
    pub dir: Option<BondDir>,
}

impl Bond {
    pub fn new(a: usize, b: usize, order: BondOrder) -> Bond {
        Bond {
            a,
            b,
            order,
            dir: None,
        }
    }

    pub fn other(&self, atom: usize) -> usize {
        if atom == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Normalized cis/trans configuration of one double bond: reference
/// neighbors on each end and whether they lie on the same side.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DoubleBondStereo {
    pub bond: usize,
    pub ref_a: usize,
    pub ref_b: usize,
    pub same_side: bool,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MolError {
    #[error("malformed SMILES at offset {offset}: {message}")]
    MalformedSmiles { offset: usize, message: String },
    #[error("unknown element symbol `{0}`")]
    UnknownElement(String),
    #[error("placeholder label must be nonempty")]
    EmptyPlaceholderLabel,
    #[error("bond endpoints out of range or degenerate ({a}, {b})")]
    InvalidBond { a: usize, b: usize },
    #[error("duplicate bond between atoms {a} and {b}")]
    DuplicateBond { a: usize, b: usize },
    #[error("aromatic bond outside any perceived aromatic ring (atom {atom})")]
    InvalidAromaticity { atom: usize },
    #[error("graph must contain at least one atom")]
    EmptyGraph,
    #[error("placeholder label `{0}` not found in template")]
    LabelNotFound(String),
    #[error("valence overflow at atom {atom}: {detail}")]
    ValenceOverflow { atom: usize, detail: String },
    #[error("fragment attachment index {0} out of range")]
    BadAttachment(usize),
}

/// Attributed molecular graph. Atoms and bonds are index-addressed; the
/// adjacency list, resolved hydrogen counts and normalized double-bond
/// stereo are derived at construction and kept in sync by every operation
/// that returns a new graph.
#[derive(Debug, Clone, PartialEq)]
pub struct MoleculeGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    total_h: Vec<u8>,
    stereo_bonds: Vec<DoubleBondStereo>,
}

impl MoleculeGraph {
    /// Build and finalize a graph: validates bonds, resolves hydrogen
    /// counts, derives double-bond stereo from directional tags and runs
    /// aromaticity perception.
    pub fn from_parts(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<MoleculeGraph, MolError> {
        if atoms.is_empty() {
            return Err(MolError::EmptyGraph);
        }
        let n = atoms.len();
        let mut seen = std::collections::HashSet::new();
        for bond in &bonds {
            if bond.a >= n || bond.b >= n || bond.a == bond.b {
                return Err(MolError::InvalidBond {
                    a: bond.a,
                    b: bond.b,
                });
            }
            let key = (bond.a.min(bond.b), bond.a.max(bond.b));
            if !seen.insert(key) {
                return Err(MolError::DuplicateBond { a: key.0, b: key.1 });
            }
        }
        let mut graph = MoleculeGraph {
            atoms,
            bonds,
            adjacency: Vec::new(),
            total_h: Vec::new(),
            stereo_bonds: Vec::new(),
        };
        graph.rebuild_adjacency();
        graph.resolve_hydrogens();
        graph.derive_bond_stereo();
        aromaticity::perceive(&mut graph)?;
        Ok(graph)
    }

    fn rebuild_adjacency(&mut self) {
        let mut adj = vec![Vec::new(); self.atoms.len()];
        for (i, bond) in self.bonds.iter().enumerate() {
            adj[bond.a].push((bond.b, i));
            adj[bond.b].push((bond.a, i));
        }
        self.adjacency = adj;
    }

    /// Resolve total hydrogen counts. Atoms with `explicit_h` keep it;
    /// others get the standard-valence derivation: smallest standard
    /// valence covering the bond order sum, aromatic atoms one less than
    /// their plain count with aromatic bonds taken as order one.
    fn resolve_hydrogens(&mut self) {
        let mut counts = Vec::with_capacity(self.atoms.len());
        for (i, atom) in self.atoms.iter().enumerate() {
            if let Some(h) = atom.explicit_h {
                counts.push(h);
                continue;
            }
            let element = match atom.as_element() {
                Some(e) => e,
                None => {
                    counts.push(0);
                    continue;
                }
            };
            let valences = element.standard_valences();
            if valences.is_empty() {
                counts.push(0);
                continue;
            }
            let h = if atom.aromatic {
                let degree: u8 = self.adjacency[i]
                    .iter()
                    .map(|&(_, b)| match self.bonds[b].order {
                        BondOrder::Double => 2,
                        BondOrder::Triple => 3,
                        _ => 1,
                    })
                    .sum();
                (valences[0] as i16 - degree as i16 - 1).max(0) as u8
            } else {
                let twice_sum: u16 = self.adjacency[i]
                    .iter()
                    .map(|&(_, b)| self.bonds[b].order.twice_order() as u16)
                    .sum();
                let sum = twice_sum.div_ceil(2) as u8;
                match valences.iter().find(|&&v| v >= sum) {
                    Some(&v) => v - sum,
                    None => 0,
                }
            };
            counts.push(h);
        }
        self.total_h = counts;
    }

    /// Convert raw `/` and `\` tags into normalized double-bond stereo
    /// records, then clear the tags.
    fn derive_bond_stereo(&mut self) {
        if self.bonds.iter().all(|b| b.dir.is_none()) {
            return;
        }
        let mut records = Vec::new();
        for (bi, bond) in self.bonds.iter().enumerate() {
            if bond.order != BondOrder::Double {
                continue;
            }
            let pick_ref = |end: usize| -> Option<(usize, BondDir)> {
                let mut best: Option<(usize, BondDir)> = None;
                for &(nbr, nb) in &self.adjacency[end] {
                    let b = &self.bonds[nb];
                    if b.order != BondOrder::Single {
                        continue;
                    }
                    if let Some(dir) = b.dir {
                        // Orient the tag as seen outward from the double-bond atom.
                        let outward = if b.a == end { dir } else { dir.flipped() };
                        if best.is_none() || nbr < best.unwrap().0 {
                            best = Some((nbr, outward));
                        }
                    }
                }
                best
            };
            if let (Some((ref_a, dir_a)), Some((ref_b, dir_b))) =
                (pick_ref(bond.a), pick_ref(bond.b))
            {
                records.push(DoubleBondStereo {
                    bond: bi,
                    ref_a,
                    ref_b,
                    same_side: dir_a == dir_b,
                });
            }
        }
        for bond in &mut self.bonds {
            bond.dir = None;
        }
        self.stereo_bonds = records;
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    /// Neighbors of atom `i` as (neighbor index, bond index).
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<usize> {
        self.adjacency[a]
            .iter()
            .find(|&&(nbr, _)| nbr == b)
            .map(|&(_, bond)| bond)
    }

    /// Resolved hydrogen count of atom `i` (explicit or derived).
    pub fn total_h(&self, i: usize) -> u8 {
        self.total_h[i]
    }

    pub fn stereo_bonds(&self) -> &[DoubleBondStereo] {
        &self.stereo_bonds
    }

    pub fn has_placeholders(&self) -> bool {
        self.atoms.iter().any(Atom::is_placeholder)
    }

    /// Indices of placeholder atoms carrying the given label.
    pub fn placeholder_indices(&self, label: &PlaceholderLabel) -> Vec<usize> {
        self.atoms
            .iter()
            .enumerate()
            .filter(|(_, a)| a.placeholder_label() == Some(label))
            .map(|(i, _)| i)
            .collect()
    }

    /// Distinct placeholder labels, sorted.
    pub fn placeholder_labels(&self) -> Vec<PlaceholderLabel> {
        let mut labels: Vec<PlaceholderLabel> = self
            .atoms
            .iter()
            .filter_map(|a| a.placeholder_label().cloned())
            .collect();
        labels.sort();
        labels.dedup();
        labels
    }

    pub fn heavy_atom_count(&self) -> usize {
        self.atoms.iter().filter(|a| !a.is_placeholder()).count()
    }

    /// Hill-order molecular formula over real atoms, counting resolved
    /// hydrogens. Placeholders are excluded.
    pub fn molecular_formula(&self) -> String {
        let mut counts: BTreeMap<&'static str, usize> = BTreeMap::new();
        let mut hydrogens: usize = 0;
        for (i, atom) in self.atoms.iter().enumerate() {
            if let Some(e) = atom.as_element() {
                *counts.entry(e.symbol()).or_insert(0) += 1;
                hydrogens += self.total_h[i] as usize;
            }
        }
        hydrogens += counts.remove("H").unwrap_or(0);
        let carbons = counts.remove("C").unwrap_or(0);
        let mut out = String::new();
        let mut push = |sym: &str, n: usize| {
            if n == 0 {
                return;
            }
            out.push_str(sym);
            if n > 1 {
                out.push_str(&n.to_string());
            }
        };
        push("C", carbons);
        push("H", hydrogens);
        for (sym, n) in counts {
            push(sym, n);
        }
        out
    }

    /// Connected components as sorted atom index lists.
    pub fn components(&self) -> Vec<Vec<usize>> {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut out = Vec::new();
        for start in 0..n {
            if seen[start] {
                continue;
            }
            let mut comp = vec![start];
            seen[start] = true;
            let mut stack = vec![start];
            while let Some(v) = stack.pop() {
                for &(nbr, _) in &self.adjacency[v] {
                    if !seen[nbr] {
                        seen[nbr] = true;
                        comp.push(nbr);
                        stack.push(nbr);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }

    /// Relabel atoms: atom `i` moves to index `perm[i]`. Bonds, stereo
    /// references and derived data are remapped. `perm` must be a
    /// permutation of `0..atom_count()`.
    pub fn permuted(&self, perm: &[usize]) -> MoleculeGraph {
        assert_eq!(perm.len(), self.atoms.len());
        let n = self.atoms.len();
        let mut atoms: Vec<Option<Atom>> = vec![None; n];
        for (i, atom) in self.atoms.iter().enumerate() {
            let mut atom = atom.clone();
            if let Some(stereo) = &mut atom.stereo {
                for r in &mut stereo.refs {
                    if let StereoRef::Atom(a) = r {
                        *a = perm[*a];
                    }
                }
            }
            // Carry the resolved hydrogen count so reconstruction cannot
            // reinterpret the atom in its new context.
            atom.explicit_h = Some(self.total_h[i]);
            atoms[perm[i]] = Some(atom);
        }
        let atoms: Vec<Atom> = atoms.into_iter().map(Option::unwrap).collect();
        let bonds: Vec<Bond> = self
            .bonds
            .iter()
            .map(|b| Bond {
                a: perm[b.a],
                b: perm[b.b],
                order: b.order,
                dir: None,
            })
            .collect();
        let mut graph = MoleculeGraph {
            atoms,
            bonds,
            adjacency: Vec::new(),
            total_h: Vec::new(),
            stereo_bonds: self
                .stereo_bonds
                .iter()
                .map(|s| DoubleBondStereo {
                    bond: s.bond,
                    ref_a: perm[s.ref_a],
                    ref_b: perm[s.ref_b],
                    same_side: s.same_side,
                })
                .collect(),
        };
        graph.rebuild_adjacency();
        graph.resolve_hydrogens();
        graph
    }

    /// Internal constructor for surgery results: callers must have
    /// materialized hydrogen counts on every atom whose environment
    /// changed. Re-runs validation and aromaticity perception.
    pub(crate) fn rebuilt(
        atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        stereo_bonds: Vec<DoubleBondStereo>,
    ) -> Result<MoleculeGraph, MolError> {
        let mut graph = MoleculeGraph::from_parts(atoms, bonds)?;
        graph.stereo_bonds = stereo_bonds
            .into_iter()
            .filter(|s| {
                s.bond < graph.bonds.len()
                    && graph.bonds[s.bond].order == BondOrder::Double
                    && graph.bond_between(graph.bonds[s.bond].a, s.ref_a).is_some()
                    && graph.bond_between(graph.bonds[s.bond].b, s.ref_b).is_some()
            })
            .collect();
        Ok(graph)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn implicit_hydrogen_standard_valences() {
        let g = parse_smiles("C").unwrap();
        assert_eq!(g.total_h(0), 4);
        let g = parse_smiles("O").unwrap();
        assert_eq!(g.total_h(0), 2);
        let g = parse_smiles("CS").unwrap();
        assert_eq!(g.total_h(1), 1);
        // Sulfone sulfur: bond sum 6 picks the highest standard valence.
        let g = parse_smiles("CS(=O)(=O)C").unwrap();
        assert_eq!(g.total_h(1), 0);
    }

    #[test]
    fn aromatic_hydrogen_counts() {
        let g = parse_smiles("c1ccccc1").unwrap();
        for i in 0..6 {
            assert_eq!(g.total_h(i), 1, "benzene CH");
        }
        let g = parse_smiles("c1ccncc1").unwrap();
        let n_idx = g
            .atoms()
            .iter()
            .position(|a| a.as_element().map(|e| e.symbol()) == Some("N"))
            .unwrap();
        assert_eq!(g.total_h(n_idx), 0, "pyridine N carries no H");
        let g = parse_smiles("c1cc[nH]c1").unwrap();
        let n_idx = g
            .atoms()
            .iter()
            .position(|a| a.as_element().map(|e| e.symbol()) == Some("N"))
            .unwrap();
        assert_eq!(g.total_h(n_idx), 1, "pyrrole NH explicit");
    }

    #[test]
    fn kekulized_pyrrole_keeps_its_hydrogen() {
        let g = parse_smiles("C1=CC=C[NH]1").unwrap();
        let n_idx = g
            .atoms()
            .iter()
            .position(|a| a.as_element().map(|e| e.symbol()) == Some("N"))
            .unwrap();
        assert!(g.atom(n_idx).aromatic, "ring should aromatize");
        assert_eq!(g.total_h(n_idx), 1, "NH count frozen before perception");
    }

    #[test]
    fn molecular_formula_hill_order() {
        let g = parse_smiles("CCO").unwrap();
        assert_eq!(g.molecular_formula(), "C2H6O");
        let g = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(g.molecular_formula(), "C6H6");
        let g = parse_smiles("[Na+].[Cl-]").unwrap();
        assert_eq!(g.molecular_formula(), "ClNa");
    }

    #[test]
    fn duplicate_bond_rejected() {
        let atoms = vec![Atom::element("C").unwrap(), Atom::element("C").unwrap()];
        let bonds = vec![
            Bond::new(0, 1, BondOrder::Single),
            Bond::new(1, 0, BondOrder::Double),
        ];
        assert!(matches!(
            MoleculeGraph::from_parts(atoms, bonds),
            Err(MolError::DuplicateBond { .. })
        ));
    }

    #[test]
    fn components_split() {
        let g = parse_smiles("CC.O").unwrap();
        let comps = g.components();
        assert_eq!(comps.len(), 2);
        assert_eq!(comps[0], vec![0, 1]);
        assert_eq!(comps[1], vec![2]);
    }
}
