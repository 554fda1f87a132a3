//! Abbreviation dictionary and the condensed-formula fallback parser for
//! right-hand sides of R-group definitions like "R1 = 4-MeC6H4, R2 = H".

use super::{RGroupDefinition, RgroupError};
use crate::molgraph::{
    join_single, parse_smiles, Fragment, MoleculeGraph, PlaceholderLabel, Substituent,
};
use crate::report::{Warning, WarningCode};
use std::collections::BTreeMap;

/// Name -> fragment SMILES with the attachment at atom 0. "H" maps to the
/// hydrogen marker. Shipped as data and extensible at runtime.
const BUILTIN: &[(&str, &str)] = &[
    ("Me", "C"),
    ("Et", "CC"),
    ("nPr", "CCC"),
    ("n-Pr", "CCC"),
    ("Pr", "CCC"),
    ("iPr", "C(C)C"),
    ("i-Pr", "C(C)C"),
    ("nBu", "CCCC"),
    ("n-Bu", "CCCC"),
    ("Bu", "CCCC"),
    ("tBu", "C(C)(C)C"),
    ("t-Bu", "C(C)(C)C"),
    ("Ph", "c1ccccc1"),
    ("Bn", "Cc1ccccc1"),
    ("OMe", "OC"),
    ("OEt", "OCC"),
    ("OH", "O"),
    ("NH2", "N"),
    ("NMe2", "N(C)C"),
    ("NO2", "[N+](=O)[O-]"),
    ("CN", "C#N"),
    ("CF3", "C(F)(F)F"),
    ("F", "F"),
    ("Cl", "Cl"),
    ("Br", "Br"),
    ("I", "I"),
    ("Ac", "C(C)=O"),
    ("OAc", "OC(C)=O"),
    ("Ts", "S(=O)(=O)c1ccc(C)cc1"),
    ("Boc", "C(=O)OC(C)(C)C"),
    ("Cbz", "C(=O)OCc1ccccc1"),
    ("Ms", "S(C)(=O)=O"),
    ("TMS", "[Si](C)(C)C"),
    ("SMe", "SC"),
    ("SH", "S"),
    ("CHO", "C=O"),
    ("CO2H", "C(=O)O"),
    ("COOH", "C(=O)O"),
    ("CO2Me", "C(=O)OC"),
    ("CO2Et", "C(=O)OCC"),
];

#[derive(Debug, Clone)]
pub struct AbbreviationTable {
    entries: BTreeMap<String, String>,
}

impl Default for AbbreviationTable {
    fn default() -> Self {
        AbbreviationTable::builtin()
    }
}

impl AbbreviationTable {
    pub fn builtin() -> AbbreviationTable {
        AbbreviationTable {
            entries: BUILTIN
                .iter()
                .map(|&(k, v)| (k.to_string(), v.to_string()))
                .collect(),
        }
    }

    /// Add or override entries (name -> fragment SMILES, attachment 0).
    pub fn with_overrides(mut self, extra: &[(String, String)]) -> AbbreviationTable {
        for (k, v) in extra {
            self.entries.insert(k.clone(), v.clone());
        }
        self
    }

    /// Resolve a name through the dictionary alone.
    pub fn lookup(&self, name: &str) -> Option<Result<Substituent, RgroupError>> {
        if name == "H" {
            return Some(Ok(Substituent::Hydrogen));
        }
        let smiles = self.entries.get(name)?;
        Some(
            Fragment::from_smiles(smiles, 0)
                .map(Substituent::Group)
                .map_err(RgroupError::Mol),
        )
    }

    /// Full resolution order: dictionary, then condensed formula, then
    /// SMILES. "Ar" resolves to phenyl with a warning.
    pub fn resolve(&self, text: &str) -> Result<(Substituent, Option<Warning>), RgroupError> {
        let text = text.trim();
        if text == "Ar" {
            let phenyl = Fragment::from_smiles("c1ccccc1", 0)?;
            return Ok((
                Substituent::Group(phenyl),
                Some(Warning::labeled(
                    WarningCode::UnknownAbbreviation,
                    "Ar",
                    "generic aryl defaulted to phenyl",
                )),
            ));
        }
        if let Some(result) = self.lookup(text) {
            return Ok((result?, None));
        }
        if let Some(sub) = parse_condensed(text, self) {
            return Ok((sub, None));
        }
        if let Ok(fragment) = Fragment::from_smiles(text, 0) {
            return Ok((Substituent::Group(fragment), None));
        }
        Err(RgroupError::UnparseableLabel(text.to_string()))
    }
}

/// Parse text like "R1 = 4-MeC6H4; R2 = H" into definitions. Clauses that
/// do not resolve produce `unknown-abbreviation` warnings carrying the
/// clause verbatim; the rest still resolve.
pub fn parse_rgroup_text(
    text: &str,
    table: &AbbreviationTable,
) -> (Vec<RGroupDefinition>, Vec<Warning>) {
    let mut defs = Vec::new();
    let mut warnings = Vec::new();
    for clause in text.split([',', ';']) {
        let clause = clause.trim();
        if clause.is_empty() {
            continue;
        }
        let Some((lhs, rhs)) = clause.split_once('=') else {
            warnings.push(Warning::new(
                WarningCode::UnknownAbbreviation,
                format!("clause has no `=`: `{clause}`"),
            ));
            continue;
        };
        let label_text = normalize_label_text(lhs);
        let rhs = rhs.trim();
        if label_text.is_empty() || rhs.is_empty() || !is_label_like(&label_text) {
            warnings.push(Warning::new(
                WarningCode::UnknownAbbreviation,
                format!("unrecognized definition clause `{clause}`"),
            ));
            continue;
        }
        match table.resolve(rhs) {
            Ok((substituent, warning)) => {
                warnings.extend(warning);
                defs.push(RGroupDefinition {
                    label: PlaceholderLabel::new(label_text).expect("nonempty label"),
                    substituent,
                });
            }
            Err(_) => {
                warnings.push(Warning::labeled(
                    WarningCode::UnknownAbbreviation,
                    label_text,
                    format!("unresolvable right-hand side `{rhs}` in `{clause}`"),
                ));
            }
        }
    }
    (defs, warnings)
}

/// Map superscript digits to ASCII so "R¹" and "R1" agree.
pub(crate) fn normalize_label_text(text: &str) -> String {
    text.trim()
        .chars()
        .map(|c| match c {
            '¹' => '1',
            '²' => '2',
            '³' => '3',
            '⁰' => '0',
            '⁴'..='⁹' => (b'4' + (c as u32 - '⁴' as u32) as u8) as char,
            other => other,
        })
        .collect()
}

fn is_label_like(text: &str) -> bool {
    let mut chars = text.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic())
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '\'')
}

/// A chainable group: head bonds toward the attachment point, tail (when
/// present) bonds to the next group.
struct Piece {
    graph: MoleculeGraph,
    head: usize,
    tail: Option<usize>,
}

fn piece(smiles: &str, head: usize, tail: Option<usize>) -> Piece {
    Piece {
        graph: parse_smiles(smiles).expect("builtin piece"),
        head,
        tail,
    }
}

/// Chain tokens tried longest-first at each position.
fn chain_token(text: &str, table: &AbbreviationTable) -> Vec<(usize, PieceKind)> {
    let mut options: Vec<(usize, PieceKind)> = Vec::new();
    let linkers: &[(&str, &str, usize, usize)] = &[
        // (token, smiles, head, tail)
        ("CO2", "C(=O)O", 0, 2),
        ("COO", "C(=O)O", 0, 2),
        ("SO2", "S(=O)=O", 0, 0),
        ("CH2", "C", 0, 0),
        ("CF2", "C(F)F", 0, 0),
        ("NH", "N", 0, 0),
        ("N", "N", 0, 0),
        ("O", "O", 0, 0),
        ("S", "S", 0, 0),
    ];
    for &(token, smiles, head, tail) in linkers {
        if text.starts_with(token) {
            options.push((token.len(), PieceKind::Linker(smiles, head, tail)));
        }
    }
    // Dictionary entries and a few spellings act as terminals.
    let mut terminal_names: Vec<&str> = table.entries.keys().map(String::as_str).collect();
    terminal_names.push("CH3");
    terminal_names.push("H");
    terminal_names.sort_by_key(|n| std::cmp::Reverse(n.len()));
    for name in terminal_names {
        if text.starts_with(name) {
            options.push((name.len(), PieceKind::Terminal(name.to_string())));
        }
    }
    options.sort_by_key(|&(len, _)| std::cmp::Reverse(len));
    options
}

enum PieceKind {
    Linker(&'static str, usize, usize),
    Terminal(String),
}

/// Condensed linear formula: either `<pos>-<group>C6H4` (substituted
/// phenylene carrying the attachment) or a chain of linker groups ending
/// in a terminal, e.g. "CO2Et", "OCF3", "CH2CH2OH".
fn parse_condensed(text: &str, table: &AbbreviationTable) -> Option<Substituent> {
    if text == "C6H5" {
        return Some(Substituent::Group(
            Fragment::from_smiles("c1ccccc1", 0).ok()?,
        ));
    }
    if let Some(rest) = text.strip_suffix("C6H4") {
        let (position, group_text) = match rest.split_once('-') {
            Some((digits, tail)) if digits.chars().all(|c| c.is_ascii_digit()) => {
                (digits.parse::<usize>().ok()?, tail)
            }
            _ => (4, rest),
        };
        if !(2..=6).contains(&position) || group_text.is_empty() {
            return None;
        }
        let sub = resolve_inner(group_text, table)?;
        let ring = parse_smiles("c1ccccc1").ok()?;
        return match sub {
            Substituent::Hydrogen => Some(Substituent::Group(Fragment::new(ring, 0).ok()?)),
            Substituent::Group(frag) => {
                // Ring atom 0 is the attachment; position n sits n-1 atoms
                // around the ring.
                let joined =
                    join_single(&ring, position - 1, frag.graph(), frag.attachment()).ok()?;
                Some(Substituent::Group(Fragment::new(joined, 0).ok()?))
            }
        };
    }
    chain_pieces(text, table)
}

/// Resolve the substituent part of an aryl formula: dictionary first,
/// then chain, then SMILES.
fn resolve_inner(text: &str, table: &AbbreviationTable) -> Option<Substituent> {
    if let Some(Ok(sub)) = table.lookup(text) {
        return Some(sub);
    }
    if let Some(sub) = chain_pieces(text, table) {
        return Some(sub);
    }
    Fragment::from_smiles(text, 0).ok().map(Substituent::Group)
}

/// Greedy-with-backtracking chain assembly.
fn chain_pieces(text: &str, table: &AbbreviationTable) -> Option<Substituent> {
    fn rec(text: &str, table: &AbbreviationTable) -> Option<Option<Piece>> {
        // None = no parse; Some(None) = consumed everything with a bare H.
        if text.is_empty() {
            return None;
        }
        for (len, kind) in chain_token(text, table) {
            let rest = &text[len..];
            match kind {
                PieceKind::Terminal(name) => {
                    if !rest.is_empty() {
                        continue;
                    }
                    if name == "H" {
                        return Some(None);
                    }
                    let sub = match table.lookup(&name) {
                        Some(Ok(s)) => s,
                        _ if name == "CH3" => {
                            Substituent::Group(Fragment::from_smiles("C", 0).ok()?)
                        }
                        _ => continue,
                    };
                    return match sub {
                        Substituent::Hydrogen => Some(None),
                        Substituent::Group(f) => Some(Some(Piece {
                            graph: f.graph().clone(),
                            head: f.attachment(),
                            tail: None,
                        })),
                    };
                }
                PieceKind::Linker(smiles, head, tail) => {
                    if rest.is_empty() {
                        // A linker may end a chain; its tail hydrogen stays.
                        return Some(Some(piece(smiles, head, Some(tail))));
                    }
                    if let Some(rest_piece) = rec(rest, table) {
                        let this = piece(smiles, head, Some(tail));
                        match rest_piece {
                            None => return Some(Some(this)),
                            Some(next) => {
                                let joined = join_single(
                                    &this.graph,
                                    this.tail.unwrap(),
                                    &next.graph,
                                    next.head,
                                )
                                .ok()?;
                                return Some(Some(Piece {
                                    graph: joined,
                                    head: this.head,
                                    tail: None,
                                }));
                            }
                        }
                    }
                }
            }
        }
        None
    }

    match rec(text, table)? {
        None => Some(Substituent::Hydrogen),
        Some(piece) => Some(Substituent::Group(
            Fragment::new(piece.graph, piece.head).ok()?,
        )),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{attach_fragment, canonical_key, write_smiles};

    fn table() -> AbbreviationTable {
        AbbreviationTable::builtin()
    }

    fn attach_to_benzene(sub: &Substituent) -> String {
        let template = parse_smiles("[R1]c1ccccc1").unwrap();
        let label = PlaceholderLabel::new("R1").unwrap();
        write_smiles(&attach_fragment(&template, &label, sub).unwrap())
    }

    fn expect_same(sub: &Substituent, smiles_of_result: &str) {
        let got = attach_to_benzene(sub);
        let want = write_smiles(&parse_smiles(smiles_of_result).unwrap());
        assert_eq!(got, want);
    }

    #[test]
    fn builtin_entries_all_parse() {
        let t = table();
        for (name, _) in BUILTIN {
            let resolved = t.lookup(name).unwrap();
            assert!(resolved.is_ok(), "builtin `{name}` must resolve");
        }
    }

    #[test]
    fn simple_definitions() {
        let (defs, warnings) = parse_rgroup_text("R = Me", &table());
        assert!(warnings.is_empty());
        assert_eq!(defs.len(), 1);
        assert_eq!(defs[0].label.as_str(), "R");
        match &defs[0].substituent {
            Substituent::Group(f) => assert_eq!(f.graph().atom_count(), 1),
            other => panic!("expected methyl fragment, got {other:?}"),
        }
    }

    #[test]
    fn hydrogen_marker() {
        let (defs, _) = parse_rgroup_text("R2 = H", &table());
        assert_eq!(defs.len(), 1);
        assert_eq!(defs[0].substituent, Substituent::Hydrogen);
    }

    #[test]
    fn two_clause_definitions() {
        let (defs, warnings) = parse_rgroup_text("R1 = OMe; R2 = Ph", &table());
        assert!(warnings.is_empty());
        assert_eq!(defs.len(), 2);
        // Verify fragments against independently parsed structures.
        expect_same(&defs[0].substituent, "COc1ccccc1");
        expect_same(&defs[1].substituent, "c1ccc(-c2ccccc2)cc1");
    }

    #[test]
    fn unknown_abbreviation_warns_with_clause() {
        let (defs, warnings) = parse_rgroup_text("R1 = Xyz123", &table());
        assert!(defs.is_empty());
        assert_eq!(warnings.len(), 1);
        assert_eq!(warnings[0].code, WarningCode::UnknownAbbreviation);
        assert!(warnings[0].message.contains("Xyz123"));
    }

    #[test]
    fn aryl_defaults_to_phenyl_with_warning() {
        let (defs, warnings) = parse_rgroup_text("Ar = Ar", &table());
        assert_eq!(defs.len(), 1);
        assert_eq!(warnings.len(), 1);
    }

    #[test]
    fn condensed_para_tolyl() {
        let (sub, _) = table().resolve("4-MeC6H4").unwrap();
        expect_same(&sub, "Cc1ccc(-c2ccccc2)cc1");
    }

    #[test]
    fn condensed_meta_chloro() {
        let (sub, _) = table().resolve("3-ClC6H4").unwrap();
        expect_same(&sub, "Clc1cccc(-c2ccccc2)c1");
    }

    #[test]
    fn condensed_ester_chain() {
        let (sub, _) = table().resolve("CO2Et").unwrap();
        expect_same(&sub, "CCOC(=O)c1ccccc1");
    }

    #[test]
    fn condensed_chains() {
        let (sub, _) = table().resolve("OCF3").unwrap();
        expect_same(&sub, "FC(F)(F)Oc1ccccc1");
        let (sub, _) = table().resolve("CH2OH").unwrap();
        expect_same(&sub, "OCc1ccccc1");
        let (sub, _) = table().resolve("NHAc").unwrap();
        expect_same(&sub, "CC(=O)Nc1ccccc1");
        let (sub, _) = table().resolve("C6H5").unwrap();
        expect_same(&sub, "c1ccc(-c2ccccc2)cc1");
    }

    #[test]
    fn smiles_fallback() {
        let (sub, _) = table().resolve("OC(F)F").unwrap();
        expect_same(&sub, "FC(F)Oc1ccccc1");
    }

    #[test]
    fn overrides_extend_table() {
        let t = table().with_overrides(&[("Mes".to_string(), "c1c(C)cc(C)cc1C".to_string())]);
        let (sub, warning) = t.resolve("Mes").unwrap();
        assert!(warning.is_none());
        match sub {
            Substituent::Group(f) => {
                let mesitylene = parse_smiles("c1c(C)cc(C)cc1C").unwrap();
                assert_eq!(canonical_key(f.graph()), canonical_key(&mesitylene));
            }
            other => panic!("expected fragment, got {other:?}"),
        }
    }
}
