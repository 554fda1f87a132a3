//! Subgraph isomorphism: VF2-style backtracking search returning every
//! embedding of a pattern graph in a target. Placeholder atoms act as
//! wildcards when enabled, optionally matching an implicit hydrogen of
//! their mapped neighbor.

use super::{BondOrder, MoleculeGraph, StereoRef};
use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, Default)]
pub struct MatchOptions {
    /// Placeholder atoms match any target atom, or an implicit hydrogen of
    /// the atom their pattern neighbor maps to.
    pub placeholder_wildcard: bool,
    /// Skip tetrahedral and double-bond stereo compatibility checks.
    pub ignore_stereo: bool,
}

/// Where one pattern atom landed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum MatchTarget {
    Atom(usize),
    /// A placeholder matched an implicit hydrogen of target atom `of`.
    ImplicitH { of: usize },
}

/// Injective map from pattern atom indices to match targets.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct AtomMapping {
    pairs: BTreeMap<usize, MatchTarget>,
}

impl AtomMapping {
    pub fn target_of(&self, pattern_atom: usize) -> Option<MatchTarget> {
        self.pairs.get(&pattern_atom).copied()
    }

    pub fn pairs(&self) -> impl Iterator<Item = (usize, MatchTarget)> + '_ {
        self.pairs.iter().map(|(&p, &t)| (p, t))
    }

    /// Target atom indices covered by real (non-hydrogen) matches.
    pub fn covered_target_atoms(&self) -> Vec<usize> {
        let mut v: Vec<usize> = self
            .pairs
            .values()
            .filter_map(|t| match t {
                MatchTarget::Atom(a) => Some(*a),
                MatchTarget::ImplicitH { .. } => None,
            })
            .collect();
        v.sort_unstable();
        v
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

/// All embeddings of `pattern` in `target`, deduplicated and sorted by
/// their mapped index tuples.
pub fn match_substructure(
    pattern: &MoleculeGraph,
    target: &MoleculeGraph,
    options: MatchOptions,
) -> Vec<AtomMapping> {
    let order = pattern_order(pattern, options);
    let mut state = SearchState {
        pattern,
        target,
        options,
        order,
        mapping: vec![None; pattern.atom_count()],
        target_used: vec![false; target.atom_count()],
        h_used: vec![0; target.atom_count()],
        results: Vec::new(),
    };
    state.search(0);
    let mut results = state.results;
    results.sort();
    results.dedup();
    results
}

/// Pattern atoms in match order: real atoms first (connectivity-guided),
/// placeholders last so their neighbors are bound when they are tried.
fn pattern_order(pattern: &MoleculeGraph, options: MatchOptions) -> Vec<usize> {
    let n = pattern.atom_count();
    let treat_wild =
        |i: usize| options.placeholder_wildcard && pattern.atom(i).is_placeholder();
    let mut order: Vec<usize> = Vec::with_capacity(n);
    let mut placed = vec![false; n];
    while order.len() < n {
        // Next atom: adjacent to the placed set if possible, real before
        // wildcard, lowest index breaking ties.
        let mut candidate: Option<(bool, bool, usize)> = None; // (not adjacent, wild, idx)
        for i in 0..n {
            if placed[i] {
                continue;
            }
            let adjacent = pattern.neighbors(i).iter().any(|&(nbr, _)| placed[nbr]);
            let key = (!adjacent, treat_wild(i), i);
            if candidate.is_none() || key < candidate.unwrap() {
                candidate = Some(key);
            }
        }
        let (_, _, idx) = candidate.unwrap();
        placed[idx] = true;
        order.push(idx);
    }
    order
}

struct SearchState<'a> {
    pattern: &'a MoleculeGraph,
    target: &'a MoleculeGraph,
    options: MatchOptions,
    order: Vec<usize>,
    mapping: Vec<Option<MatchTarget>>,
    target_used: Vec<bool>,
    h_used: Vec<u8>,
    results: Vec<AtomMapping>,
}

impl<'a> SearchState<'a> {
    fn search(&mut self, depth: usize) {
        if depth == self.order.len() {
            if self.options.ignore_stereo || self.stereo_consistent() {
                let pairs: BTreeMap<usize, MatchTarget> = self
                    .mapping
                    .iter()
                    .enumerate()
                    .map(|(p, t)| (p, t.unwrap()))
                    .collect();
                self.results.push(AtomMapping { pairs });
            }
            return;
        }
        let p = self.order[depth];
        let wild = self.options.placeholder_wildcard && self.pattern.atom(p).is_placeholder();

        for t in 0..self.target.atom_count() {
            if self.target_used[t] {
                continue;
            }
            let compatible =
                wild || atoms_compatible(self.pattern.atom(p), self.target.atom(t));
            if !compatible || !self.bonds_consistent(p, t) {
                continue;
            }
            self.mapping[p] = Some(MatchTarget::Atom(t));
            self.target_used[t] = true;
            self.search(depth + 1);
            self.target_used[t] = false;
            self.mapping[p] = None;
        }

        if wild {
            if let Some(of) = self.hydrogen_host(p) {
                if self.h_used[of] < self.target.total_h(of) {
                    self.mapping[p] = Some(MatchTarget::ImplicitH { of });
                    self.h_used[of] += 1;
                    self.search(depth + 1);
                    self.h_used[of] -= 1;
                    self.mapping[p] = None;
                }
            }
        }
    }

    /// Placeholder `p` may stand for a hydrogen only when it hangs off a
    /// single mapped neighbor through a single bond.
    fn hydrogen_host(&self, p: usize) -> Option<usize> {
        let nbrs = self.pattern.neighbors(p);
        if nbrs.len() != 1 {
            return None;
        }
        let (q, bond) = nbrs[0];
        if self.pattern.bond(bond).order != BondOrder::Single {
            return None;
        }
        match self.mapping[q] {
            Some(MatchTarget::Atom(tq)) => Some(tq),
            _ => None,
        }
    }

    /// Every pattern bond from `p` to an already-mapped atom must map to a
    /// target bond of identical order.
    fn bonds_consistent(&self, p: usize, t: usize) -> bool {
        for &(q, pbond) in self.pattern.neighbors(p) {
            match self.mapping[q] {
                None => continue,
                Some(MatchTarget::Atom(tq)) => {
                    match self.target.bond_between(t, tq) {
                        Some(tbond) => {
                            if self.target.bond(tbond).order != self.pattern.bond(pbond).order {
                                return false;
                            }
                        }
                        None => return false,
                    }
                }
                Some(MatchTarget::ImplicitH { of }) => {
                    // The hydrogen lives on the atom the placeholder's
                    // neighbor mapped to; p is that neighbor.
                    if of != t {
                        return false;
                    }
                }
            }
        }
        true
    }

    fn stereo_consistent(&self) -> bool {
        // Tetrahedral centers in the pattern must agree with the target.
        for (p, atom) in self.pattern.atoms().iter().enumerate() {
            let Some(pst) = atom.stereo.as_ref() else {
                continue;
            };
            if pst.refs.len() != 4 {
                continue;
            }
            let Some(MatchTarget::Atom(t)) = self.mapping[p] else {
                continue;
            };
            let Some(tst) = self.target.atom(t).stereo.as_ref() else {
                return false;
            };
            if tst.refs.len() != 4 {
                return false;
            }
            let translated: Option<Vec<StereoRef>> = pst
                .refs
                .iter()
                .map(|r| match r {
                    StereoRef::ImplicitH => Some(StereoRef::ImplicitH),
                    StereoRef::Atom(q) => match self.mapping[*q] {
                        Some(MatchTarget::Atom(tq)) => Some(StereoRef::Atom(tq)),
                        Some(MatchTarget::ImplicitH { .. }) => Some(StereoRef::ImplicitH),
                        None => None,
                    },
                })
                .collect();
            let Some(translated) = translated else {
                return false;
            };
            match permutation_parity_refs(&tst.refs, &translated) {
                Some(even) => {
                    let expected = if even { tst.parity } else { tst.parity.flipped() };
                    if expected != pst.parity {
                        return false;
                    }
                }
                None => return false,
            }
        }
        // Double-bond configurations must be preserved.
        for record in self.pattern.stereo_bonds() {
            let bond = self.pattern.bond(record.bond);
            let (Some(MatchTarget::Atom(t1)), Some(MatchTarget::Atom(t2))) =
                (self.mapping[bond.a], self.mapping[bond.b])
            else {
                continue;
            };
            let (Some(MatchTarget::Atom(tra)), Some(MatchTarget::Atom(trb))) =
                (self.mapping[record.ref_a], self.mapping[record.ref_b])
            else {
                continue;
            };
            let Some(tbond_idx) = self.target.bond_between(t1, t2) else {
                return false;
            };
            let Some(trec) = self
                .target
                .stereo_bonds()
                .iter()
                .find(|s| s.bond == tbond_idx)
            else {
                return false;
            };
            let tbond = self.target.bond(tbond_idx);
            // Align endpoints, then count reference flips on each side.
            let (want_a, want_b) = if tbond.a == t1 { (tra, trb) } else { (trb, tra) };
            let mut same = trec.same_side;
            if trec.ref_a != want_a {
                if self.other_substituent(tbond.a, tbond.b, trec.ref_a) != Some(want_a) {
                    return false;
                }
                same = !same;
            }
            if trec.ref_b != want_b {
                if self.other_substituent(tbond.b, tbond.a, trec.ref_b) != Some(want_b) {
                    return false;
                }
                same = !same;
            }
            if same != record.same_side {
                return false;
            }
        }
        true
    }

    /// The substituent on `atom` that is neither the double-bond partner
    /// nor the given reference.
    fn other_substituent(&self, atom: usize, partner: usize, reference: usize) -> Option<usize> {
        self.target
            .neighbors(atom)
            .iter()
            .map(|&(nbr, _)| nbr)
            .find(|&nbr| nbr != partner && nbr != reference)
    }
}

fn atoms_compatible(p: &super::Atom, t: &super::Atom) -> bool {
    match (&p.kind, &t.kind) {
        (super::AtomKind::Element(pe), super::AtomKind::Element(te)) => {
            pe == te && p.charge == t.charge && p.isotope == t.isotope
        }
        (super::AtomKind::Placeholder(pl), super::AtomKind::Placeholder(tl)) => pl == tl,
        _ => false,
    }
}

fn permutation_parity_refs(from: &[StereoRef], to: &[StereoRef]) -> Option<bool> {
    let mut indices = Vec::with_capacity(to.len());
    let mut used = vec![false; from.len()];
    for item in to {
        let pos = (0..from.len()).find(|&i| !used[i] && from[i] == *item)?;
        used[pos] = true;
        indices.push(pos);
    }
    let mut inversions = 0;
    for i in 0..indices.len() {
        for j in i + 1..indices.len() {
            if indices[i] > indices[j] {
                inversions += 1;
            }
        }
    }
    Some(inversions % 2 == 0)
}
