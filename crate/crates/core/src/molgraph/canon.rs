//! Canonicalization: Morgan-style iterative invariant refinement with
//! orbit splitting, followed by a canonical DFS traversal that emits a
//! canonical SMILES string. Equal keys hold exactly for isomorphic graphs
//! under the active stereo policy, because the emitted string is a
//! faithful, reparseable encoding of the graph.

use super::{BondDir, BondOrder, MoleculeGraph, Parity, StereoRef};
use std::collections::HashMap;

/// Canonical SMILES with stereo descriptors included.
pub fn write_smiles(graph: &MoleculeGraph) -> String {
    canonical_key_opts(graph, false)
}

/// Canonical key under the default (stereo-sensitive) policy.
pub fn canonical_key(graph: &MoleculeGraph) -> String {
    canonical_key_opts(graph, false)
}

/// Canonical key; with `ignore_stereo` all tetrahedral tags and
/// directional marks are omitted.
pub fn canonical_key_opts(graph: &MoleculeGraph, ignore_stereo: bool) -> String {
    let ranks = refine(graph, initial_ranks(graph));
    let mut best: Option<String> = None;
    let mut leaves = 0usize;
    explore(graph, ranks, ignore_stereo, &mut best, &mut leaves);
    best.expect("graph has at least one labeling")
}

const MAX_LEAVES: usize = 100_000;

fn order_code(order: BondOrder) -> u8 {
    match order {
        BondOrder::Single => 1,
        BondOrder::Double => 2,
        BondOrder::Triple => 3,
        BondOrder::Aromatic => 4,
    }
}

fn initial_ranks(graph: &MoleculeGraph) -> Vec<usize> {
    #[derive(PartialEq, Eq, PartialOrd, Ord)]
    struct Key<'a> {
        placeholder: Option<&'a str>,
        atomic: u8,
        charge: i8,
        isotope: u16,
        aromatic: bool,
        hydrogens: u8,
        degree: usize,
    }
    let keys: Vec<Key> = graph
        .atoms()
        .iter()
        .enumerate()
        .map(|(i, a)| Key {
            placeholder: a.placeholder_label().map(|l| l.as_str()),
            atomic: a.as_element().map(|e| e.atomic_number()).unwrap_or(0),
            charge: a.charge,
            isotope: a.isotope.unwrap_or(0),
            aromatic: a.aromatic,
            hydrogens: graph.total_h(i),
            degree: graph.neighbors(i).len(),
        })
        .collect();
    ranks_from_keys(&keys)
}

fn ranks_from_keys<K: Ord>(keys: &[K]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..keys.len()).collect();
    idx.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut ranks = vec![0usize; keys.len()];
    let mut rank = 0;
    for w in 0..idx.len() {
        if w > 0 && keys[idx[w]] != keys[idx[w - 1]] {
            rank += 1;
        }
        ranks[idx[w]] = rank;
    }
    ranks
}

/// Iterative neighborhood refinement until the partition stabilizes.
fn refine(graph: &MoleculeGraph, mut ranks: Vec<usize>) -> Vec<usize> {
    let n = graph.atom_count();
    let mut distinct = ranks.iter().copied().max().map_or(0, |m| m + 1);
    loop {
        let keys: Vec<(usize, Vec<(usize, u8)>)> = (0..n)
            .map(|i| {
                let mut nbrs: Vec<(usize, u8)> = graph
                    .neighbors(i)
                    .iter()
                    .map(|&(nbr, b)| (ranks[nbr], order_code(graph.bond(b).order)))
                    .collect();
                nbrs.sort_unstable();
                (ranks[i], nbrs)
            })
            .collect();
        let new_ranks = ranks_from_keys(&keys);
        let new_distinct = new_ranks.iter().copied().max().map_or(0, |m| m + 1);
        ranks = new_ranks;
        if new_distinct == distinct {
            return ranks;
        }
        distinct = new_distinct;
    }
}

/// Depth-first search over tie splits; keeps the lexicographically
/// smallest emitted string.
fn explore(
    graph: &MoleculeGraph,
    ranks: Vec<usize>,
    ignore_stereo: bool,
    best: &mut Option<String>,
    leaves: &mut usize,
) {
    if *leaves >= MAX_LEAVES {
        return;
    }
    // Smallest tied rank class.
    let mut tied: Option<(usize, Vec<usize>)> = None;
    let max_rank = ranks.iter().copied().max().unwrap_or(0);
    for r in 0..=max_rank {
        let members: Vec<usize> = (0..ranks.len()).filter(|&i| ranks[i] == r).collect();
        if members.len() > 1 {
            tied = Some((r, members));
            break;
        }
    }
    match tied {
        None => {
            *leaves += 1;
            let s = emit(graph, &ranks, ignore_stereo);
            if best.as_ref().is_none_or(|b| s < *b) {
                *best = Some(s);
            }
        }
        Some((_, members)) => {
            for &chosen in &members {
                let keys: Vec<(usize, u8)> = (0..ranks.len())
                    .map(|i| (ranks[i], u8::from(i != chosen)))
                    .collect();
                let split = refine(graph, ranks_from_keys(&keys));
                explore(graph, split, ignore_stereo, best, leaves);
            }
        }
    }
}

struct Traversal {
    /// Emission order of atoms.
    order: Vec<usize>,
    position: Vec<usize>,
    parent: Vec<Option<usize>>,
    children: Vec<Vec<usize>>,
    /// Ring digit tokens per atom, in written order:
    /// (partner, bond, digit, opens_here).
    digit_tokens: Vec<Vec<(usize, usize, u16, bool)>>,
}

fn traverse(graph: &MoleculeGraph, ranks: &[usize]) -> (Traversal, Vec<usize>) {
    let n = graph.atom_count();
    let mut tr = Traversal {
        order: Vec::with_capacity(n),
        position: vec![usize::MAX; n],
        parent: vec![None; n],
        children: vec![Vec::new(); n],
        digit_tokens: vec![Vec::new(); n],
    };
    let mut ring_open: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n]; // at open atom: (close atom, bond)
    let mut ring_close: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut visited = vec![false; n];
    let mut component_roots = Vec::new();

    // Roots in rank order so every component is covered.
    let mut atom_by_rank: Vec<usize> = (0..n).collect();
    atom_by_rank.sort_by_key(|&i| ranks[i]);

    for &root in &atom_by_rank {
        if visited[root] {
            continue;
        }
        component_roots.push(root);
        visited[root] = true;
        tr.position[root] = tr.order.len();
        tr.order.push(root);
        let mut stack = vec![(root, 0usize)];
        while let Some(&mut (atom, ref mut next)) = stack.last_mut() {
            let mut nbrs: Vec<(usize, usize)> = graph.neighbors(atom).to_vec();
            nbrs.sort_by_key(|&(nbr, _)| ranks[nbr]);
            if *next >= nbrs.len() {
                stack.pop();
                continue;
            }
            let (nbr, bond) = nbrs[*next];
            *next += 1;
            if !visited[nbr] {
                visited[nbr] = true;
                tr.parent[nbr] = Some(atom);
                tr.children[atom].push(nbr);
                tr.position[nbr] = tr.order.len();
                tr.order.push(nbr);
                stack.push((nbr, 0));
            } else if tr.parent[atom] != Some(nbr) {
                // Back edge, recorded once from the later endpoint.
                let already = ring_close[atom].iter().any(|&(_, b)| b == bond)
                    || ring_open[atom].iter().any(|&(_, b)| b == bond);
                if !already {
                    ring_open[nbr].push((atom, bond));
                    ring_close[atom].push((nbr, bond));
                }
            }
        }
    }

    // Digit assignment in emission order: close first (freeing digits),
    // then open with the smallest free digit.
    let mut free: std::collections::BinaryHeap<std::cmp::Reverse<u16>> =
        (1..100).map(std::cmp::Reverse).collect();
    let mut digit_of_bond: HashMap<usize, u16> = HashMap::new();
    for &atom in &tr.order {
        let mut closes = ring_close[atom].clone();
        closes.sort_by_key(|&(partner, _)| tr.position[partner]);
        let mut close_tokens: Vec<(usize, usize, u16, bool)> = closes
            .iter()
            .map(|&(partner, bond)| {
                let digit = digit_of_bond[&bond];
                free.push(std::cmp::Reverse(digit));
                (partner, bond, digit, false)
            })
            .collect();
        close_tokens.sort_by_key(|&(_, _, digit, _)| digit);
        let mut opens = ring_open[atom].clone();
        opens.sort_by_key(|&(partner, _)| tr.position[partner]);
        let open_tokens: Vec<(usize, usize, u16, bool)> = opens
            .iter()
            .map(|&(partner, bond)| {
                let std::cmp::Reverse(digit) = free.pop().expect("ring digit pool");
                digit_of_bond.insert(bond, digit);
                (partner, bond, digit, true)
            })
            .collect();
        tr.digit_tokens[atom] = close_tokens.into_iter().chain(open_tokens).collect();
    }

    (tr, component_roots)
}

/// Assign directional marks to the single bonds referenced by the graph's
/// double-bond stereo records. Values are stored as the direction seen
/// outward from `from`.
fn assign_direction_marks(
    graph: &MoleculeGraph,
    tr: &Traversal,
) -> HashMap<usize, (usize, BondDir)> {
    let mut marks: HashMap<usize, (usize, BondDir)> = HashMap::new();
    let mut records: Vec<&super::DoubleBondStereo> = graph.stereo_bonds().iter().collect();
    records.sort_by_key(|s| {
        let b = graph.bond(s.bond);
        let (pa, pb) = (tr.position[b.a], tr.position[b.b]);
        (pa.min(pb), pa.max(pb))
    });
    for record in records {
        let bond = graph.bond(record.bond);
        let (d1, d2) = (bond.a, bond.b);
        let b1 = match graph.bond_between(d1, record.ref_a) {
            Some(b) => b,
            None => continue,
        };
        let b2 = match graph.bond_between(d2, record.ref_b) {
            Some(b) => b,
            None => continue,
        };
        let outward = |marks: &HashMap<usize, (usize, BondDir)>, b: usize, from: usize| {
            marks
                .get(&b)
                .map(|&(f, d)| if f == from { d } else { d.flipped() })
        };
        let o1 = match outward(&marks, b1, d1) {
            Some(d) => d,
            None => {
                marks.insert(b1, (d1, BondDir::Up));
                BondDir::Up
            }
        };
        let o2_wanted = if record.same_side { o1 } else { o1.flipped() };
        match outward(&marks, b2, d2) {
            Some(existing) if existing != o2_wanted => {
                // Inconsistent conjugated assignment; leave this bond
                // unexpressed rather than emit a wrong configuration.
                continue;
            }
            Some(_) => {}
            None => {
                marks.insert(b2, (d2, o2_wanted));
            }
        }
    }
    marks
}

fn emit(graph: &MoleculeGraph, ranks: &[usize], ignore_stereo: bool) -> String {
    let (tr, component_roots) = traverse(graph, ranks);
    let marks = if ignore_stereo {
        HashMap::new()
    } else {
        assign_direction_marks(graph, &tr)
    };

    let mut fragments: Vec<String> = Vec::new();
    for &root in &component_roots {
        let mut out = String::new();
        write_atom_recursive(graph, &tr, &marks, ignore_stereo, root, &mut out);
        fragments.push(out);
    }
    fragments.sort();
    fragments.join(".")
}

fn write_atom_recursive(
    graph: &MoleculeGraph,
    tr: &Traversal,
    marks: &HashMap<usize, (usize, BondDir)>,
    ignore_stereo: bool,
    atom: usize,
    out: &mut String,
) {
    out.push_str(&atom_token(graph, tr, ignore_stereo, atom));
    for &(partner, bond, digit, opens) in &tr.digit_tokens[atom] {
        // The mark slot of a ring digit reads outward from this atom; only
        // the closing site writes it.
        let _ = partner;
        if !opens {
            out.push_str(&bond_symbol(graph, marks, ignore_stereo, bond, atom));
        } else {
            out.push_str(&plain_bond_symbol(graph, bond));
        }
        if digit < 10 {
            out.push((b'0' + digit as u8) as char);
        } else {
            out.push('%');
            out.push_str(&format!("{digit:02}"));
        }
    }
    let children = &tr.children[atom];
    for (i, &child) in children.iter().enumerate() {
        let bond = graph.bond_between(atom, child).expect("tree edge");
        let last = i + 1 == children.len();
        if !last {
            out.push('(');
        }
        out.push_str(&bond_symbol(graph, marks, ignore_stereo, bond, atom));
        write_atom_recursive(graph, tr, marks, ignore_stereo, child, out);
        if !last {
            out.push(')');
        }
    }
}

/// Bond symbol read in the writing direction (outward from `from`).
fn bond_symbol(
    graph: &MoleculeGraph,
    marks: &HashMap<usize, (usize, BondDir)>,
    ignore_stereo: bool,
    bond: usize,
    from: usize,
) -> String {
    if !ignore_stereo {
        if let Some(&(f, dir)) = marks.get(&bond) {
            let outward = if f == from { dir } else { dir.flipped() };
            return match outward {
                BondDir::Up => "/".to_string(),
                BondDir::Down => "\\".to_string(),
            };
        }
    }
    plain_bond_symbol(graph, bond)
}

fn plain_bond_symbol(graph: &MoleculeGraph, bond: usize) -> String {
    let b = graph.bond(bond);
    match b.order {
        BondOrder::Single => {
            if graph.atom(b.a).aromatic && graph.atom(b.b).aromatic {
                "-".to_string()
            } else {
                String::new()
            }
        }
        BondOrder::Double => "=".to_string(),
        BondOrder::Triple => "#".to_string(),
        BondOrder::Aromatic => String::new(),
    }
}

/// Hydrogen count a bare (organic-subset) atom would re-derive on parse.
fn bare_derived_h(graph: &MoleculeGraph, atom: usize) -> Option<u8> {
    let a = graph.atom(atom);
    let element = a.as_element()?;
    if !element.organic_subset() {
        return None;
    }
    if a.charge != 0 || a.isotope.is_some() {
        return None;
    }
    if a.aromatic && !matches!(element.symbol(), "B" | "C" | "N" | "O" | "P" | "S") {
        return None;
    }
    let valences = element.standard_valences();
    if valences.is_empty() {
        return Some(0);
    }
    Some(if a.aromatic {
        let degree: i16 = graph
            .neighbors(atom)
            .iter()
            .map(|&(_, b)| match graph.bond(b).order {
                BondOrder::Double => 2i16,
                BondOrder::Triple => 3,
                _ => 1,
            })
            .sum();
        (valences[0] as i16 - degree - 1).max(0) as u8
    } else {
        let twice: u16 = graph
            .neighbors(atom)
            .iter()
            .map(|&(_, b)| graph.bond(b).order.twice_order() as u16)
            .sum();
        let sum = twice.div_ceil(2) as u8;
        match valences.iter().find(|&&v| v >= sum) {
            Some(&v) => v - sum,
            None => 0,
        }
    })
}

fn atom_token(graph: &MoleculeGraph, tr: &Traversal, ignore_stereo: bool, atom: usize) -> String {
    let a = graph.atom(atom);
    if let Some(label) = a.placeholder_label() {
        return format!("[{label}]");
    }
    let element = a.as_element().expect("element atom");
    let total_h = graph.total_h(atom);

    let parity = if ignore_stereo {
        None
    } else {
        emitted_parity(graph, tr, atom)
    };

    let symbol = if a.aromatic {
        element.symbol().to_lowercase()
    } else {
        element.symbol().to_string()
    };

    let needs_bracket = parity.is_some()
        || a.charge != 0
        || a.isotope.is_some()
        || !element.organic_subset()
        || (a.aromatic && !matches!(element.symbol(), "B" | "C" | "N" | "O" | "P" | "S"))
        || bare_derived_h(graph, atom) != Some(total_h);

    if !needs_bracket {
        return symbol;
    }
    let mut token = String::from("[");
    if let Some(iso) = a.isotope {
        token.push_str(&iso.to_string());
    }
    token.push_str(&symbol);
    if let Some(p) = parity {
        token.push_str(match p {
            Parity::Ccw => "@",
            Parity::Cw => "@@",
        });
    }
    if total_h == 1 {
        token.push('H');
    } else if total_h > 1 {
        token.push('H');
        token.push_str(&total_h.to_string());
    }
    match a.charge {
        0 => {}
        1 => token.push('+'),
        -1 => token.push('-'),
        c if c > 1 => token.push_str(&format!("+{c}")),
        c => token.push_str(&format!("-{}", -c)),
    }
    token.push(']');
    token
}

/// Tetrahedral parity re-oriented to the emission neighbor order.
fn emitted_parity(graph: &MoleculeGraph, tr: &Traversal, atom: usize) -> Option<Parity> {
    let stereo = graph.atom(atom).stereo.as_ref()?;
    if stereo.refs.len() != 4 {
        return None;
    }
    let mut emission: Vec<StereoRef> = Vec::with_capacity(4);
    if let Some(p) = tr.parent[atom] {
        emission.push(StereoRef::Atom(p));
    }
    if graph.total_h(atom) == 1 {
        emission.push(StereoRef::ImplicitH);
    }
    for &(partner, _, _, _) in &tr.digit_tokens[atom] {
        emission.push(StereoRef::Atom(partner));
    }
    for &child in &tr.children[atom] {
        emission.push(StereoRef::Atom(child));
    }
    if emission.len() != 4 {
        return None;
    }
    let even = permutation_parity(&stereo.refs, &emission)?;
    Some(if even {
        stereo.parity
    } else {
        stereo.parity.flipped()
    })
}

/// True when mapping `from` onto `to` is an even permutation. `None` when
/// the two are not the same multiset.
fn permutation_parity(from: &[StereoRef], to: &[StereoRef]) -> Option<bool> {
    let mut indices = Vec::with_capacity(to.len());
    let mut used = vec![false; from.len()];
    for item in to {
        let pos = from
            .iter()
            .enumerate()
            .position(|(i, r)| !used[i] && r == item)?;
        used[pos] = true;
        indices.push(pos);
    }
    let mut inversions = 0usize;
    for i in 0..indices.len() {
        for j in i + 1..indices.len() {
            if indices[i] > indices[j] {
                inversions += 1;
            }
        }
    }
    Some(inversions % 2 == 0)
}
