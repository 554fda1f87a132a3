//! SMILES parser: organic-subset atoms, bracket atoms with charge, isotope
//! and H-count, ring closures (including `%nn`), branches, dots,
//! tetrahedral `@`/`@@` and directional `/` `\` bonds.
//!
//! Placeholders are recognized from bracket atoms of the form `[R]`,
//! `[R1]`, `[*]` and `[*:n]` (the map number `n` becomes label `Rn`).

use super::{
    Atom, AtomKind, Bond, BondDir, BondOrder, MolError, MoleculeGraph, Parity, PlaceholderLabel,
    StereoRef, Tetrahedral,
};
use crate::element::Element;
use std::collections::HashMap;

#[derive(Clone, Copy)]
struct PendingBond {
    order: Option<BondOrder>,
    dir: Option<BondDir>,
}

#[derive(Clone)]
enum Slot {
    Filled(StereoRef),
    PendingRing(u16),
}

struct Parser<'a> {
    bytes: &'a [u8],
    pos: usize,
    atoms: Vec<Atom>,
    atom_offsets: Vec<usize>,
    bonds: Vec<Bond>,
    prev: Option<usize>,
    branch_stack: Vec<usize>,
    pending: Option<PendingBond>,
    rings: HashMap<u16, (usize, Option<PendingBond>, usize)>,
    stereo_order: Vec<Vec<Slot>>,
}

pub fn parse_smiles(text: &str) -> Result<MoleculeGraph, MolError> {
    if text.is_empty() {
        return Err(err(0, "empty SMILES"));
    }
    let mut parser = Parser {
        bytes: text.as_bytes(),
        pos: 0,
        atoms: Vec::new(),
        atom_offsets: Vec::new(),
        bonds: Vec::new(),
        prev: None,
        branch_stack: Vec::new(),
        pending: None,
        rings: HashMap::new(),
        stereo_order: Vec::new(),
    };
    parser.run()?;
    let offsets = parser.atom_offsets.clone();
    let atoms = std::mem::take(&mut parser.atoms);
    let bonds = std::mem::take(&mut parser.bonds);
    MoleculeGraph::from_parts(atoms, bonds).map_err(|e| match e {
        MolError::InvalidAromaticity { atom } => err(
            offsets.get(atom).copied().unwrap_or(0),
            "aromatic atom or bond outside any perceived aromatic ring",
        ),
        other => other,
    })
}

fn err(offset: usize, message: impl Into<String>) -> MolError {
    MolError::MalformedSmiles {
        offset,
        message: message.into(),
    }
}

impl<'a> Parser<'a> {
    fn run(&mut self) -> Result<(), MolError> {
        while self.pos < self.bytes.len() {
            let c = self.bytes[self.pos];
            match c {
                b'(' => {
                    let prev = self
                        .prev
                        .ok_or_else(|| err(self.pos, "branch before any atom"))?;
                    if self.pending.is_some() {
                        return Err(err(self.pos, "bond symbol before branch open"));
                    }
                    self.branch_stack.push(prev);
                    self.pos += 1;
                }
                b')' => {
                    if self.pending.is_some() {
                        return Err(err(self.pos, "dangling bond symbol before branch close"));
                    }
                    let restored = self
                        .branch_stack
                        .pop()
                        .ok_or_else(|| err(self.pos, "unmatched closing parenthesis"))?;
                    self.prev = Some(restored);
                    self.pos += 1;
                }
                b'.' => {
                    if self.pending.is_some() {
                        return Err(err(self.pos, "bond symbol before dot"));
                    }
                    if self.prev.is_none() {
                        return Err(err(self.pos, "dot with no preceding atom"));
                    }
                    self.prev = None;
                    self.pos += 1;
                }
                b'-' | b'=' | b'#' | b':' | b'/' | b'\\' => {
                    if self.pending.is_some() {
                        return Err(err(self.pos, "two bond symbols in a row"));
                    }
                    if self.prev.is_none() {
                        return Err(err(self.pos, "bond symbol before any atom"));
                    }
                    let (order, dir) = match c {
                        b'-' => (Some(BondOrder::Single), None),
                        b'=' => (Some(BondOrder::Double), None),
                        b'#' => (Some(BondOrder::Triple), None),
                        b':' => (Some(BondOrder::Aromatic), None),
                        b'/' => (Some(BondOrder::Single), Some(BondDir::Up)),
                        _ => (Some(BondOrder::Single), Some(BondDir::Down)),
                    };
                    self.pending = Some(PendingBond { order, dir });
                    self.pos += 1;
                }
                b'0'..=b'9' | b'%' => self.ring_closure()?,
                b'[' => self.bracket_atom()?,
                _ => self.organic_atom()?,
            }
        }
        if self.pending.is_some() {
            return Err(err(self.bytes.len(), "dangling bond symbol at end"));
        }
        if !self.branch_stack.is_empty() {
            return Err(err(self.bytes.len(), "unclosed branch"));
        }
        if let Some((_, (_, _, offset))) = self.rings.iter().next() {
            return Err(err(*offset, "unclosed ring bond"));
        }
        self.finish_stereo()?;
        Ok(())
    }

    fn organic_atom(&mut self) -> Result<(), MolError> {
        let start = self.pos;
        let rest = &self.bytes[self.pos..];
        let (sym, aromatic, len) = match rest {
            [b'C', b'l', ..] => ("Cl", false, 2),
            [b'B', b'r', ..] => ("Br", false, 2),
            [b'B', ..] => ("B", false, 1),
            [b'C', ..] => ("C", false, 1),
            [b'N', ..] => ("N", false, 1),
            [b'O', ..] => ("O", false, 1),
            [b'P', ..] => ("P", false, 1),
            [b'S', ..] => ("S", false, 1),
            [b'F', ..] => ("F", false, 1),
            [b'I', ..] => ("I", false, 1),
            [b'b', ..] => ("B", true, 1),
            [b'c', ..] => ("C", true, 1),
            [b'n', ..] => ("N", true, 1),
            [b'o', ..] => ("O", true, 1),
            [b'p', ..] => ("P", true, 1),
            [b's', ..] => ("S", true, 1),
            [other, ..] => {
                return Err(err(start, format!("unexpected character `{}`", *other as char)))
            }
            [] => return Err(err(start, "unexpected end of input")),
        };
        self.pos += len;
        let mut atom = Atom::element(sym)?;
        atom.aromatic = aromatic;
        self.push_atom(atom, start, None)
    }

    fn bracket_atom(&mut self) -> Result<(), MolError> {
        let start = self.pos;
        self.pos += 1; // '['
        let isotope = self.read_digits().map(|(v, _)| v as u16);

        let mut atom = self.read_bracket_symbol(start)?;
        atom.isotope = isotope;

        // Chirality tag.
        let mut parity = None;
        if self.peek() == Some(b'@') {
            self.pos += 1;
            if self.peek() == Some(b'@') {
                self.pos += 1;
                parity = Some(Parity::Cw);
            } else {
                parity = Some(Parity::Ccw);
            }
        }

        // Hydrogen count; bracket atoms default to zero hydrogens.
        let mut hcount: u8 = 0;
        if self.peek() == Some(b'H') {
            self.pos += 1;
            hcount = match self.read_digits() {
                Some((v, _)) => v.min(9) as u8,
                None => 1,
            };
        }
        if !atom.is_placeholder() {
            atom.explicit_h = Some(hcount);
        }

        // Charge.
        let mut charge: i16 = 0;
        match self.peek() {
            Some(b'+') => {
                self.pos += 1;
                charge = 1;
                if let Some((v, _)) = self.read_digits() {
                    charge = v as i16;
                } else {
                    while self.peek() == Some(b'+') {
                        self.pos += 1;
                        charge += 1;
                    }
                }
            }
            Some(b'-') => {
                self.pos += 1;
                charge = -1;
                if let Some((v, _)) = self.read_digits() {
                    charge = -(v as i16);
                } else {
                    while self.peek() == Some(b'-') {
                        self.pos += 1;
                        charge -= 1;
                    }
                }
            }
            _ => {}
        }
        atom.charge = charge.clamp(-15, 15) as i8;

        // Atom map class: turns a wildcard into a numbered placeholder.
        if self.peek() == Some(b':') {
            self.pos += 1;
            let (map, _) = self
                .read_digits()
                .ok_or_else(|| err(self.pos, "expected digits after `:`"))?;
            if let AtomKind::Placeholder(label) = &atom.kind {
                if label.as_str() == "*" {
                    atom.kind = AtomKind::Placeholder(PlaceholderLabel::new(format!("R{map}"))?);
                }
            }
        }

        if self.peek() != Some(b']') {
            return Err(err(self.pos, "expected `]`"));
        }
        self.pos += 1;
        self.push_atom(atom, start, parity)
    }

    fn read_bracket_symbol(&mut self, bracket_start: usize) -> Result<Atom, MolError> {
        let c = self
            .peek()
            .ok_or_else(|| err(self.pos, "unterminated bracket atom"))?;
        if c == b'*' {
            self.pos += 1;
            return Atom::placeholder("*");
        }
        if c == b'R' {
            // `[R]` / `[R<digits>]` are placeholders; `[Rx]` with a lowercase
            // letter is a two-letter element (Rn is radon, not R+n).
            let next = self.bytes.get(self.pos + 1).copied();
            match next {
                Some(b'a'..=b'z') => {}
                _ => {
                    self.pos += 1;
                    let mut label = String::from("R");
                    if let Some((v, digits)) = self.read_digits() {
                        let _ = v;
                        label.push_str(&digits);
                    }
                    return Atom::placeholder(&label);
                }
            }
        }
        if c.is_ascii_uppercase() {
            // Greedy two-letter element, falling back to one letter.
            if let Some(&c2) = self.bytes.get(self.pos + 1) {
                if c2.is_ascii_lowercase() {
                    let two = std::str::from_utf8(&self.bytes[self.pos..self.pos + 2]).unwrap();
                    if Element::from_symbol(two).is_some() {
                        self.pos += 2;
                        return Atom::element(two);
                    }
                }
            }
            let one = std::str::from_utf8(&self.bytes[self.pos..self.pos + 1]).unwrap();
            self.pos += 1;
            return Atom::element(one).map_err(|_| {
                err(
                    bracket_start + 1,
                    format!("unknown element symbol `{one}`"),
                )
            });
        }
        if c.is_ascii_lowercase() {
            let aromatic_symbols: [(&[u8], &str); 8] = [
                (b"se", "Se"),
                (b"as", "As"),
                (b"b", "B"),
                (b"c", "C"),
                (b"n", "N"),
                (b"o", "O"),
                (b"p", "P"),
                (b"s", "S"),
            ];
            for (pat, sym) in aromatic_symbols {
                if self.bytes[self.pos..].starts_with(pat) {
                    self.pos += pat.len();
                    let mut atom = Atom::element(sym)?;
                    atom.aromatic = true;
                    return Ok(atom);
                }
            }
        }
        Err(err(self.pos, "expected element symbol, `*` or `R` label"))
    }

    fn ring_closure(&mut self) -> Result<(), MolError> {
        let start = self.pos;
        let prev = self
            .prev
            .ok_or_else(|| err(start, "ring closure before any atom"))?;
        let digit: u16 = if self.bytes[self.pos] == b'%' {
            if self.pos + 2 >= self.bytes.len()
                || !self.bytes[self.pos + 1].is_ascii_digit()
                || !self.bytes[self.pos + 2].is_ascii_digit()
            {
                return Err(err(start, "`%` ring closure needs two digits"));
            }
            let v = (self.bytes[self.pos + 1] - b'0') as u16 * 10
                + (self.bytes[self.pos + 2] - b'0') as u16;
            self.pos += 3;
            v
        } else {
            let v = (self.bytes[self.pos] - b'0') as u16;
            self.pos += 1;
            v
        };
        let pending = self.pending.take();
        match self.rings.remove(&digit) {
            None => {
                self.rings.insert(digit, (prev, pending, start));
                self.stereo_order[prev].push(Slot::PendingRing(digit));
            }
            Some((open_atom, open_bond, open_offset)) => {
                if open_atom == prev {
                    return Err(err(start, "ring closure to the same atom"));
                }
                if self.bond_exists(open_atom, prev) {
                    return Err(err(start, "duplicate ring bond"));
                }
                let order = match (open_bond.and_then(|p| p.order), pending.and_then(|p| p.order))
                {
                    (Some(a), Some(b)) if a != b => {
                        return Err(err(start, "conflicting ring bond orders"))
                    }
                    (Some(a), _) => a,
                    (None, Some(b)) => b,
                    (None, None) => self.default_order(open_atom, prev),
                };
                // Directional tags are read outward from the atom they
                // follow; normalize to the stored (open -> close) direction.
                let dir = match (open_bond.and_then(|p| p.dir), pending.and_then(|p| p.dir)) {
                    (Some(d), _) => Some(d),
                    (None, Some(d)) => Some(d.flipped()),
                    (None, None) => None,
                };
                let _ = open_offset;
                self.add_bond(open_atom, prev, order, dir);
                // Fill the reserved stereo slot on the opening atom.
                for slot in &mut self.stereo_order[open_atom] {
                    if matches!(slot, Slot::PendingRing(d) if *d == digit) {
                        *slot = Slot::Filled(StereoRef::Atom(prev));
                        break;
                    }
                }
                self.stereo_order[prev].push(Slot::Filled(StereoRef::Atom(open_atom)));
            }
        }
        Ok(())
    }

    fn push_atom(
        &mut self,
        atom: Atom,
        offset: usize,
        parity: Option<Parity>,
    ) -> Result<(), MolError> {
        let idx = self.atoms.len();
        let bracket_h = atom.explicit_h.unwrap_or(0);
        self.atoms.push(atom);
        self.atom_offsets.push(offset);
        self.stereo_order.push(Vec::new());

        if let Some(prev) = self.prev {
            let pending = self.pending.take();
            let order = pending
                .and_then(|p| p.order)
                .unwrap_or_else(|| self.default_order(prev, idx));
            let dir = pending.and_then(|p| p.dir);
            if self.bond_exists(prev, idx) {
                return Err(err(offset, "duplicate bond"));
            }
            self.add_bond(prev, idx, order, dir);
            self.stereo_order[prev].push(Slot::Filled(StereoRef::Atom(idx)));
            self.stereo_order[idx].push(Slot::Filled(StereoRef::Atom(prev)));
        } else if self.pending.is_some() {
            return Err(err(offset, "bond symbol with no preceding atom"));
        }

        if parity.is_some() && bracket_h == 1 {
            self.stereo_order[idx].push(Slot::Filled(StereoRef::ImplicitH));
        }
        if let Some(p) = parity {
            // Temporarily record parity; reference order is completed once
            // all neighbors are known.
            self.atoms[idx].stereo = Some(Tetrahedral {
                refs: Vec::new(),
                parity: p,
            });
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn finish_stereo(&mut self) -> Result<(), MolError> {
        for (idx, atom) in self.atoms.iter_mut().enumerate() {
            if let Some(stereo) = &mut atom.stereo {
                let refs: Vec<StereoRef> = self.stereo_order[idx]
                    .iter()
                    .filter_map(|s| match s {
                        Slot::Filled(r) => Some(*r),
                        Slot::PendingRing(_) => None,
                    })
                    .collect();
                if refs.len() == 4 {
                    stereo.refs = refs;
                } else {
                    // Under- or over-specified centers carry no usable
                    // parity; drop the tag.
                    atom.stereo = None;
                }
            }
        }
        Ok(())
    }

    fn default_order(&self, a: usize, b: usize) -> BondOrder {
        if self.atoms[a].aromatic && self.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn bond_exists(&self, a: usize, b: usize) -> bool {
        self.bonds
            .iter()
            .any(|bond| (bond.a == a && bond.b == b) || (bond.a == b && bond.b == a))
    }

    fn add_bond(&mut self, a: usize, b: usize, order: BondOrder, dir: Option<BondDir>) {
        self.bonds.push(Bond { a, b, order, dir });
    }

    fn peek(&self) -> Option<u8> {
        self.bytes.get(self.pos).copied()
    }

    fn read_digits(&mut self) -> Option<(u32, String)> {
        let start = self.pos;
        while self.peek().is_some_and(|c| c.is_ascii_digit()) {
            self.pos += 1;
        }
        if self.pos == start {
            return None;
        }
        let s = std::str::from_utf8(&self.bytes[start..self.pos]).unwrap();
        Some((s.parse().unwrap_or(u32::MAX), s.to_string()))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_atom() {
        let g = parse_smiles("C").unwrap();
        assert_eq!(g.atom_count(), 1);
        assert_eq!(g.total_h(0), 4);
    }

    #[test]
    fn benzene() {
        let g = parse_smiles("c1ccccc1").unwrap();
        assert_eq!(g.atom_count(), 6);
        assert!(g.atoms().iter().all(|a| a.aromatic));
        assert_eq!(g.bonds().len(), 6);
        assert!(g.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
    }

    #[test]
    fn placeholder_brackets() {
        let g = parse_smiles("[R1]c1ccccc1").unwrap();
        assert_eq!(g.atom_count(), 7);
        assert_eq!(g.atom(0).placeholder_label().unwrap().as_str(), "R1");
        let g = parse_smiles("[R]C").unwrap();
        assert_eq!(g.atom(0).placeholder_label().unwrap().as_str(), "R");
        let g = parse_smiles("[*]C").unwrap();
        assert_eq!(g.atom(0).placeholder_label().unwrap().as_str(), "*");
        let g = parse_smiles("[*:3]C").unwrap();
        assert_eq!(g.atom(0).placeholder_label().unwrap().as_str(), "R3");
        // [Rn] with a lowercase letter is radon, not a placeholder.
        let g = parse_smiles("[Rn]").unwrap();
        assert!(!g.atom(0).is_placeholder());
        assert_eq!(g.atom(0).as_element().unwrap().symbol(), "Rn");
    }

    #[test]
    fn bracket_features() {
        let g = parse_smiles("[13CH4]").unwrap();
        assert_eq!(g.atom(0).isotope, Some(13));
        assert_eq!(g.total_h(0), 4);
        let g = parse_smiles("[O-]").unwrap();
        assert_eq!(g.atom(0).charge, -1);
        let g = parse_smiles("[NH4+]").unwrap();
        assert_eq!(g.atom(0).charge, 1);
        assert_eq!(g.total_h(0), 4);
        let g = parse_smiles("[Fe+2]").unwrap();
        assert_eq!(g.atom(0).charge, 2);
        let g = parse_smiles("[O--]").unwrap();
        assert_eq!(g.atom(0).charge, -2);
    }

    #[test]
    fn branches_and_rings() {
        let g = parse_smiles("CC(C)C").unwrap();
        assert_eq!(g.atom_count(), 4);
        assert_eq!(g.neighbors(1).len(), 3);
        let g = parse_smiles("C1CC1").unwrap();
        assert_eq!(g.bonds().len(), 3);
        let g = parse_smiles("C%12CC%12").unwrap();
        assert_eq!(g.bonds().len(), 3);
    }

    #[test]
    fn dot_separates_components() {
        let g = parse_smiles("[Na+].[Cl-]").unwrap();
        assert_eq!(g.components().len(), 2);
        assert_eq!(g.bonds().len(), 0);
    }

    #[test]
    fn errors_carry_offsets() {
        match parse_smiles("C1CC") {
            Err(MolError::MalformedSmiles { offset, .. }) => assert_eq!(offset, 1),
            other => panic!("expected unclosed ring error, got {other:?}"),
        }
        match parse_smiles("C(C") {
            Err(MolError::MalformedSmiles { .. }) => {}
            other => panic!("expected unclosed branch, got {other:?}"),
        }
        match parse_smiles("CC=") {
            Err(MolError::MalformedSmiles { offset, .. }) => assert_eq!(offset, 3),
            other => panic!("expected dangling bond, got {other:?}"),
        }
        match parse_smiles("[Xx]") {
            Err(MolError::MalformedSmiles { offset, .. }) => assert_eq!(offset, 1),
            other => panic!("expected unknown element, got {other:?}"),
        }
        assert!(parse_smiles("").is_err());
        assert!(parse_smiles("C==C").is_err());
        assert!(parse_smiles("C..C").is_err());
    }

    #[test]
    fn ring_bond_order_agreement() {
        assert!(parse_smiles("C=1CCCCC=1").is_ok());
        assert!(parse_smiles("C=1CCCCC-1").is_err());
        // Order may be given on either side alone.
        let g = parse_smiles("C=1CCCCC1").unwrap();
        assert!(g
            .bonds()
            .iter()
            .any(|b| b.order == BondOrder::Double && b.a == 0));
    }

    #[test]
    fn stereo_parsed() {
        let g = parse_smiles("N[C@@H](C)C(=O)O").unwrap();
        let stereo = g.atom(1).stereo.as_ref().unwrap();
        assert_eq!(stereo.parity, Parity::Cw);
        assert_eq!(stereo.refs.len(), 4);
        assert_eq!(stereo.refs[0], StereoRef::Atom(0));
        assert_eq!(stereo.refs[1], StereoRef::ImplicitH);
        let g = parse_smiles("F/C=C/F").unwrap();
        assert_eq!(g.stereo_bonds().len(), 1);
        assert!(!g.stereo_bonds()[0].same_side);
        let g = parse_smiles("F/C=C\\F").unwrap();
        assert!(g.stereo_bonds()[0].same_side);
    }
}
