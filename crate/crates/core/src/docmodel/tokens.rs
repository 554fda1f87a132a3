//! Token grammars for the detection and coreference model outputs.
//!
//! An entity is five discrete tokens `x1 y1 x2 y2 [Mol]` (or `[Idt]`).
//! Detection output is zero or more molecules; coreference output is zero
//! or more molecules each optionally followed by its identifier.

use super::{BoundingBox, MoleculeEntity, COORD_BINS};
use thiserror::Error;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Token {
    Coord(u16),
    Mol,
    Idt,
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("grammar violation at token offset {offset}: {message}")]
pub struct GrammarError {
    pub offset: usize,
    pub message: String,
}

fn grammar(offset: usize, message: impl Into<String>) -> GrammarError {
    GrammarError {
        offset,
        message: message.into(),
    }
}

/// Identifier region paired with a molecule. The text is filled in by OCR
/// downstream of the token grammar; it stays empty until then.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Identifier {
    pub bbox: BoundingBox,
    pub text: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorefPair {
    pub molecule: MoleculeEntity,
    pub identifier: Option<Identifier>,
}

enum Group {
    Mol(BoundingBox),
    Idt(BoundingBox),
}

/// Read one five-token group starting at `pos`.
fn read_group(tokens: &[Token], pos: usize) -> Result<Group, GrammarError> {
    let mut coords = [0u16; 4];
    for (k, slot) in coords.iter_mut().enumerate() {
        match tokens.get(pos + k) {
            Some(&Token::Coord(v)) => {
                if v >= COORD_BINS {
                    return Err(grammar(
                        pos + k,
                        format!("coordinate {v} out of range 0..{COORD_BINS}"),
                    ));
                }
                *slot = v;
            }
            Some(_) => {
                return Err(grammar(pos + k, "expected coordinate, found type token"))
            }
            None => return Err(grammar(pos + k, "truncated group: expected coordinate")),
        }
    }
    let bbox = BoundingBox::new(coords[0], coords[1], coords[2], coords[3]);
    if coords[0] > coords[2] {
        return Err(grammar(pos + 2, "x1 > x2"));
    }
    if coords[1] > coords[3] {
        return Err(grammar(pos + 3, "y1 > y2"));
    }
    match tokens.get(pos + 4) {
        Some(Token::Mol) => Ok(Group::Mol(bbox)),
        Some(Token::Idt) => Ok(Group::Idt(bbox)),
        Some(Token::Coord(_)) => Err(grammar(
            pos + 4,
            "group not terminated by a type token",
        )),
        None => Err(grammar(pos + 4, "truncated group: expected type token")),
    }
}

/// Greedy left-to-right parse of `(Molecule)*`.
pub fn parse_detection_sequence(tokens: &[Token]) -> Result<Vec<MoleculeEntity>, GrammarError> {
    let mut out = Vec::new();
    let mut pos = 0;
    while pos < tokens.len() {
        match read_group(tokens, pos)? {
            Group::Mol(bbox) => out.push(MoleculeEntity {
                bbox,
                ..Default::default()
            }),
            Group::Idt(_) => {
                return Err(grammar(pos + 4, "identifier group in detection output"))
            }
        }
        pos += 5;
    }
    Ok(out)
}

/// Greedy left-to-right parse of `(Molecule [Identifier]?)*`. An
/// identifier group must follow a molecule group.
pub fn parse_coref_sequence(tokens: &[Token]) -> Result<Vec<CorefPair>, GrammarError> {
    let mut out: Vec<CorefPair> = Vec::new();
    let mut pos = 0;
    while pos < tokens.len() {
        match read_group(tokens, pos)? {
            Group::Mol(bbox) => out.push(CorefPair {
                molecule: MoleculeEntity {
                    bbox,
                    ..Default::default()
                },
                identifier: None,
            }),
            Group::Idt(bbox) => match out.last_mut() {
                Some(pair) if pair.identifier.is_none() => {
                    pair.identifier = Some(Identifier {
                        bbox,
                        text: String::new(),
                    });
                }
                _ => {
                    return Err(grammar(
                        pos + 4,
                        "identifier group without a preceding molecule group",
                    ))
                }
            },
        }
        pos += 5;
    }
    Ok(out)
}

fn push_box(tokens: &mut Vec<Token>, bbox: BoundingBox, terminal: Token) {
    tokens.push(Token::Coord(bbox.x1));
    tokens.push(Token::Coord(bbox.y1));
    tokens.push(Token::Coord(bbox.x2));
    tokens.push(Token::Coord(bbox.y2));
    tokens.push(terminal);
}

pub fn serialize_detection_sequence(entities: &[MoleculeEntity]) -> Vec<Token> {
    let mut tokens = Vec::with_capacity(entities.len() * 5);
    for e in entities {
        push_box(&mut tokens, e.bbox, Token::Mol);
    }
    tokens
}

pub fn serialize_coref_sequence(pairs: &[CorefPair]) -> Vec<Token> {
    let mut tokens = Vec::new();
    for pair in pairs {
        push_box(&mut tokens, pair.molecule.bbox, Token::Mol);
        if let Some(identifier) = &pair.identifier {
            push_box(&mut tokens, identifier.bbox, Token::Idt);
        }
    }
    tokens
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mol_group(x1: u16, y1: u16, x2: u16, y2: u16) -> Vec<Token> {
        vec![
            Token::Coord(x1),
            Token::Coord(y1),
            Token::Coord(x2),
            Token::Coord(y2),
            Token::Mol,
        ]
    }

    #[test]
    fn single_molecule() {
        let tokens = mol_group(10, 20, 50, 60);
        let entities = parse_detection_sequence(&tokens).unwrap();
        assert_eq!(entities.len(), 1);
        assert_eq!(entities[0].bbox, BoundingBox::new(10, 20, 50, 60));
    }

    #[test]
    fn empty_is_valid() {
        assert!(parse_detection_sequence(&[]).unwrap().is_empty());
        assert!(parse_coref_sequence(&[]).unwrap().is_empty());
    }

    #[test]
    fn truncated_group_offset() {
        let tokens = vec![Token::Coord(10), Token::Coord(20), Token::Coord(50)];
        let err = parse_detection_sequence(&tokens).unwrap_err();
        assert_eq!(err.offset, 3);
    }

    #[test]
    fn out_of_order_corners_rejected() {
        let tokens = mol_group(50, 20, 10, 60);
        let err = parse_detection_sequence(&tokens).unwrap_err();
        assert_eq!(err.offset, 2);
        let tokens = vec![
            Token::Coord(10),
            Token::Coord(2000),
            Token::Coord(50),
            Token::Coord(60),
            Token::Mol,
        ];
        let err = parse_detection_sequence(&tokens).unwrap_err();
        assert_eq!(err.offset, 1);
    }

    #[test]
    fn coref_pairs_with_and_without_identifier() {
        let mut tokens = mol_group(0, 0, 10, 10);
        tokens.extend([
            Token::Coord(0),
            Token::Coord(12),
            Token::Coord(10),
            Token::Coord(20),
            Token::Idt,
        ]);
        tokens.extend(mol_group(30, 0, 40, 10));
        let pairs = parse_coref_sequence(&tokens).unwrap();
        assert_eq!(pairs.len(), 2);
        assert!(pairs[0].identifier.is_some());
        assert!(pairs[1].identifier.is_none());
    }

    #[test]
    fn dangling_identifier_rejected() {
        let tokens = vec![
            Token::Coord(0),
            Token::Coord(0),
            Token::Coord(10),
            Token::Coord(10),
            Token::Idt,
        ];
        let err = parse_coref_sequence(&tokens).unwrap_err();
        assert_eq!(err.offset, 4);
        // Two identifiers after one molecule: the second dangles.
        let mut tokens = mol_group(0, 0, 10, 10);
        tokens.extend([
            Token::Coord(0),
            Token::Coord(0),
            Token::Coord(5),
            Token::Coord(5),
            Token::Idt,
        ]);
        tokens.extend([
            Token::Coord(6),
            Token::Coord(6),
            Token::Coord(9),
            Token::Coord(9),
            Token::Idt,
        ]);
        assert!(parse_coref_sequence(&tokens).is_err());
    }

    #[test]
    fn serializers_invert_parsers() {
        let mut tokens = mol_group(1, 2, 3, 4);
        tokens.extend([
            Token::Coord(5),
            Token::Coord(6),
            Token::Coord(7),
            Token::Coord(8),
            Token::Idt,
        ]);
        tokens.extend(mol_group(9, 10, 11, 12));
        let pairs = parse_coref_sequence(&tokens).unwrap();
        assert_eq!(serialize_coref_sequence(&pairs), tokens);
        let det = mol_group(1, 2, 3, 4);
        let entities = parse_detection_sequence(&det).unwrap();
        assert_eq!(serialize_detection_sequence(&entities), det);
    }
}
