//! Periodic table lookup: symbols, atomic numbers, standard valences.

/// A chemical element, stored by atomic number (1-based).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Element(pub u8);

const SYMBOLS: [&str; 118] = [
    "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S", "Cl",
    "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga", "Ge", "As",
    "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd", "Ag", "Cd",
    "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm", "Sm", "Eu",
    "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os", "Ir", "Pt",
    "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa", "U", "Np",
    "Pu", "Am", "Cm", "Bk", "Cf", "Es", "Fm", "Md", "No", "Lr", "Rf", "Db", "Sg", "Bh", "Hs",
    "Mt", "Ds", "Rg", "Cn", "Nh", "Fl", "Mc", "Lv", "Ts", "Og",
];

impl Element {
    pub fn from_symbol(sym: &str) -> Option<Element> {
        SYMBOLS
            .iter()
            .position(|&s| s == sym)
            .map(|i| Element(i as u8 + 1))
    }

    pub fn symbol(&self) -> &'static str {
        SYMBOLS[(self.0 - 1) as usize]
    }

    pub fn atomic_number(&self) -> u8 {
        self.0
    }

    /// Standard valences used for implicit-hydrogen derivation, smallest
    /// first. Elements outside this table never receive implicit hydrogens.
    pub fn standard_valences(&self) -> &'static [u8] {
        match self.symbol() {
            "B" => &[3],
            "C" => &[4],
            "N" => &[3],
            "O" => &[2],
            "P" => &[3, 5],
            "S" => &[2, 4, 6],
            "F" | "Cl" | "Br" | "I" => &[1],
            "H" => &[1],
            "Si" => &[4],
            _ => &[],
        }
    }

    /// Largest standard valence, used for junction checks when attaching
    /// fragments. Positive charge frees one extra bond site.
    pub fn max_valence(&self, charge: i8) -> Option<u8> {
        let vs = self.standard_valences();
        let base = *vs.last()?;
        Some(base.saturating_add(charge.max(0) as u8))
    }

    /// Elements that may carry the aromatic flag in SMILES.
    pub fn aromatic_capable(&self) -> bool {
        matches!(self.symbol(), "B" | "C" | "N" | "O" | "P" | "S" | "Se" | "As")
    }

    /// Organic-subset elements may be written bare (no brackets) in SMILES.
    pub fn organic_subset(&self) -> bool {
        matches!(
            self.symbol(),
            "B" | "C" | "N" | "O" | "P" | "S" | "F" | "Cl" | "Br" | "I"
        )
    }
}

impl std::fmt::Display for Element {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.symbol())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbol_round_trip() {
        for (i, sym) in SYMBOLS.iter().enumerate() {
            let e = Element::from_symbol(sym).unwrap();
            assert_eq!(e.atomic_number() as usize, i + 1);
            assert_eq!(e.symbol(), *sym);
        }
        assert!(Element::from_symbol("Xx").is_none());
        assert!(Element::from_symbol("").is_none());
    }

    #[test]
    fn valences() {
        let c = Element::from_symbol("C").unwrap();
        assert_eq!(c.standard_valences(), &[4]);
        let s = Element::from_symbol("S").unwrap();
        assert_eq!(s.standard_valences(), &[2, 4, 6]);
        let fe = Element::from_symbol("Fe").unwrap();
        assert!(fe.standard_valences().is_empty());
    }
}
