//! Structured form of a Sprouts string: lands, regions, boundaries, vertex symbols.
//!
//! The text grammar is
//!
//! ```text
//! position := (region+ ']')* '!'      (split or simplified)
//!           | region* '!'             (raw, before land splitting)
//! region   := boundary+ '}'
//! boundary := symbol+ '.'
//! symbol   := '0' | '1' | '2' | 'a'..'z' | 'A'..'Z'
//! ```
//!
//! Lower-case letters are scoped to their boundary, upper-case letters to their
//! land (or to the whole position when the string carries no `]`).

use std::fmt;

use thiserror::Error;

use crate::draft::Draft;

/// A single symbol of a boundary walk.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum VertexSym {
    /// Isolated spot, 3 lives.
    Generic0,
    /// Spot with 2 lives, visible once.
    Generic1,
    /// Spot with 1 life, visible once from this region.
    Generic2,
    /// Letter whose occurrences all lie in one boundary ('a'..'z').
    Inner(u16),
    /// Letter shared between regions of a land ('A'..'Z').
    Link(u16),
}

impl VertexSym {
    pub fn is_generic(self) -> bool {
        matches!(
            self,
            VertexSym::Generic0 | VertexSym::Generic1 | VertexSym::Generic2
        )
    }

    /// Lives of a generic symbol. Letters depend on their context.
    pub fn generic_lives(self) -> Option<u8> {
        match self {
            VertexSym::Generic0 => Some(3),
            VertexSym::Generic1 => Some(2),
            VertexSym::Generic2 => Some(1),
            _ => None,
        }
    }

    pub fn to_char(self) -> Result<char, RenderError> {
        match self {
            VertexSym::Generic0 => Ok('0'),
            VertexSym::Generic1 => Ok('1'),
            VertexSym::Generic2 => Ok('2'),
            VertexSym::Inner(id) if id < 26 => Ok((b'a' + id as u8) as char),
            VertexSym::Link(id) if id < 26 => Ok((b'A' + id as u8) as char),
            VertexSym::Inner(id) => Err(RenderError::AlphabetExhausted { lower: true, id }),
            VertexSym::Link(id) => Err(RenderError::AlphabetExhausted { lower: false, id }),
        }
    }

    fn from_char(c: char) -> Option<VertexSym> {
        match c {
            '0' => Some(VertexSym::Generic0),
            '1' => Some(VertexSym::Generic1),
            '2' => Some(VertexSym::Generic2),
            'a'..='z' => Some(VertexSym::Inner(c as u16 - 'a' as u16)),
            'A'..='Z' => Some(VertexSym::Link(c as u16 - 'A' as u16)),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Boundary {
    pub symbols: Vec<VertexSym>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Region {
    pub boundaries: Vec<Boundary>,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Default)]
pub struct Land {
    pub regions: Vec<Region>,
}

/// Pipeline stage of a position.
///
/// `Raw` positions are rendered without land terminators and hold at most one
/// land. `Split` positions have delimited lands but no further guarantee.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Stage {
    Raw,
    Split,
    Simplified,
}

/// Lives of a letter that cannot be read off its occurrence count, e.g. a
/// vertex whose other side was removed together with a dead region.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub(crate) struct LivesOverride {
    pub land: usize,
    pub link: u16,
    pub lives: u8,
}

/// A whole Sprouts position. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Position {
    lands: Vec<Land>,
    stage: Stage,
    pub(crate) overrides: Vec<LivesOverride>,
}

/// Address of one symbol occurrence.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SymbolRef {
    pub land: usize,
    pub region: usize,
    pub boundary: usize,
    pub index: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseError {
    #[error("character {ch:?} at byte {at} is not part of the position alphabet")]
    BadChar { ch: char, at: usize },
    #[error("empty boundary at byte {at}")]
    EmptyBoundary { at: usize },
    #[error("empty region at byte {at}")]
    EmptyRegion { at: usize },
    #[error("empty land at byte {at}")]
    EmptyLand { at: usize },
    #[error("boundary not terminated by '.' before byte {at}")]
    MissingBoundaryEnd { at: usize },
    #[error("region not terminated by '}}' before byte {at}")]
    MissingRegionEnd { at: usize },
    #[error("land not terminated by ']' before byte {at}")]
    MissingLandEnd { at: usize },
    #[error("missing end-of-position '!'")]
    MissingEnd,
    #[error("unexpected text after '!' at byte {at}")]
    Trailing { at: usize },
    #[error("letter {0:?} occurs more than 3 times")]
    TooManyOccurrences(char),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RenderError {
    #[error("more than 26 {} letters needed (id {id})", if *lower { "lower-case" } else { "upper-case" })]
    AlphabetExhausted { lower: bool, id: u16 },
}

impl Position {
    pub fn new(lands: Vec<Land>, stage: Stage) -> Position {
        Position {
            lands,
            stage,
            overrides: Vec::new(),
        }
    }

    /// The position with no land at all, `!`.
    pub fn empty() -> Position {
        Position::new(Vec::new(), Stage::Simplified)
    }

    /// Starting position of the `spots`-spot game, in its raw form `A.B.C.}!`.
    pub fn start(spots: usize) -> Position {
        if spots == 0 {
            return Position::new(Vec::new(), Stage::Raw);
        }
        let boundaries = (0..spots)
            .map(|i| Boundary {
                symbols: vec![VertexSym::Link(i as u16)],
            })
            .collect();
        Position::new(
            vec![Land {
                regions: vec![Region { boundaries }],
            }],
            Stage::Raw,
        )
    }

    pub fn lands(&self) -> &[Land] {
        &self.lands
    }

    pub fn stage(&self) -> Stage {
        self.stage
    }

    pub fn is_empty(&self) -> bool {
        self.lands.is_empty()
    }

    pub fn land_count(&self) -> usize {
        self.lands.len()
    }

    pub(crate) fn with_stage(mut self, stage: Stage) -> Position {
        self.stage = stage;
        self
    }

    /// Single-land position holding a copy of land `i`.
    pub fn land_position(&self, i: usize) -> Position {
        Position::new(vec![self.lands[i].clone()], Stage::Simplified)
    }

    /// Concatenation of the lands of several positions.
    pub fn join<'a>(parts: impl IntoIterator<Item = &'a Position>) -> Position {
        let lands = parts
            .into_iter()
            .flat_map(|p| p.lands.iter().cloned())
            .collect();
        Position::new(lands, Stage::Simplified)
    }

    pub fn parse(text: &str) -> Result<Position, ParseError> {
        let bytes = text.as_bytes();
        let mut lands: Vec<Land> = Vec::new();
        let mut regions: Vec<Region> = Vec::new();
        let mut boundaries: Vec<Boundary> = Vec::new();
        let mut symbols: Vec<VertexSym> = Vec::new();
        let mut saw_land_end = false;
        let mut end = None;

        for (at, ch) in text.char_indices() {
            match ch {
                '.' => {
                    if symbols.is_empty() {
                        return Err(ParseError::EmptyBoundary { at });
                    }
                    boundaries.push(Boundary {
                        symbols: std::mem::take(&mut symbols),
                    });
                }
                '}' => {
                    if !symbols.is_empty() {
                        return Err(ParseError::MissingBoundaryEnd { at });
                    }
                    if boundaries.is_empty() {
                        return Err(ParseError::EmptyRegion { at });
                    }
                    regions.push(Region {
                        boundaries: std::mem::take(&mut boundaries),
                    });
                }
                ']' => {
                    if !symbols.is_empty() {
                        return Err(ParseError::MissingBoundaryEnd { at });
                    }
                    if !boundaries.is_empty() {
                        return Err(ParseError::MissingRegionEnd { at });
                    }
                    if regions.is_empty() {
                        return Err(ParseError::EmptyLand { at });
                    }
                    if !saw_land_end && !lands.is_empty() {
                        return Err(ParseError::MissingLandEnd { at });
                    }
                    saw_land_end = true;
                    lands.push(Land {
                        regions: std::mem::take(&mut regions),
                    });
                }
                '!' => {
                    if !symbols.is_empty() {
                        return Err(ParseError::MissingBoundaryEnd { at });
                    }
                    if !boundaries.is_empty() {
                        return Err(ParseError::MissingRegionEnd { at });
                    }
                    if saw_land_end && !regions.is_empty() {
                        return Err(ParseError::MissingLandEnd { at });
                    }
                    end = Some(at);
                    break;
                }
                _ => match VertexSym::from_char(ch) {
                    Some(sym) => symbols.push(sym),
                    None => return Err(ParseError::BadChar { ch, at }),
                },
            }
        }

        let Some(end) = end else {
            return Err(ParseError::MissingEnd);
        };
        if end + 1 < bytes.len() {
            return Err(ParseError::Trailing { at: end + 1 });
        }

        let stage = if saw_land_end {
            Stage::Split
        } else {
            if !regions.is_empty() {
                lands.push(Land { regions });
            }
            Stage::Raw
        };
        let position = Position::new(lands, stage);
        position.check_occurrences()?;
        Ok(position)
    }

    fn check_occurrences(&self) -> Result<(), ParseError> {
        for land in &self.lands {
            let mut links = [0u8; 26];
            for region in &land.regions {
                for boundary in &region.boundaries {
                    let mut inner = [0u8; 26];
                    for sym in &boundary.symbols {
                        let (count, ch) = match *sym {
                            VertexSym::Inner(id) => {
                                (&mut inner[id as usize], (b'a' + id as u8) as char)
                            }
                            VertexSym::Link(id) => {
                                (&mut links[id as usize], (b'A' + id as u8) as char)
                            }
                            _ => continue,
                        };
                        *count += 1;
                        if *count > 3 {
                            return Err(ParseError::TooManyOccurrences(ch));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    pub fn render(&self) -> Result<String, RenderError> {
        let mut out = String::new();
        for land in &self.lands {
            render_land_into(land, &mut out)?;
            if self.stage != Stage::Raw {
                out.push(']');
            }
        }
        out.push('!');
        Ok(out)
    }

    /// Lives of every symbol occurrence, in reading order.
    pub fn occurrence_lives(&self) -> Vec<(SymbolRef, u8)> {
        let draft = Draft::from_position(self);
        let mut out = Vec::new();
        for (l, land) in draft.lands.iter().enumerate() {
            for (r, region) in land.iter().enumerate() {
                for (b, boundary) in region.iter().enumerate() {
                    for (i, &v) in boundary.iter().enumerate() {
                        let at = SymbolRef {
                            land: l,
                            region: r,
                            boundary: b,
                            index: i,
                        };
                        out.push((at, draft.verts[v as usize].lives));
                    }
                }
            }
        }
        out
    }

    /// Lives of the vertex written at `at`.
    pub fn lives_at(&self, at: SymbolRef) -> Option<u8> {
        let draft = Draft::from_position(self);
        let v = *draft
            .lands
            .get(at.land)?
            .get(at.region)?
            .get(at.boundary)?
            .get(at.index)?;
        Some(draft.verts[v as usize].lives)
    }

    /// Sum of lives over distinct vertices.
    pub fn total_lives(&self) -> u32 {
        Draft::from_position(self).total_lives()
    }

    /// Sum of lives over distinct vertices visible in one region. A vertex
    /// shared with another region counts in both.
    pub fn region_lives(&self, land: usize, region: usize) -> u32 {
        let draft = Draft::from_position(self);
        draft.region_lives(&draft.lands[land][region])
    }

    /// Total lives of each land.
    pub fn land_lives(&self) -> Vec<u32> {
        let draft = Draft::from_position(self);
        (0..draft.lands.len())
            .map(|l| draft.land_lives(l))
            .collect()
    }
}

pub(crate) fn render_land_into(land: &Land, out: &mut String) -> Result<(), RenderError> {
    for region in &land.regions {
        for boundary in &region.boundaries {
            for sym in &boundary.symbols {
                out.push(sym.to_char()?);
            }
            out.push('.');
        }
        out.push('}');
    }
    Ok(())
}

impl fmt::Display for Position {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.render() {
            Ok(text) => f.write_str(&text),
            Err(e) => write!(f, "<{e}>"),
        }
    }
}

impl std::str::FromStr for Position {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Position::parse(s)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn round_trip(s: &str) {
        let p = Position::parse(s).unwrap();
        assert_eq!(p.render().unwrap(), s);
    }

    #[test]
    fn parses_single_spot() {
        let p = Position::parse("A.}!").unwrap();
        assert_eq!(p.land_count(), 1);
        assert_eq!(p.lands()[0].regions.len(), 1);
        assert_eq!(p.lands()[0].regions[0].boundaries.len(), 1);
        assert_eq!(
            p.lands()[0].regions[0].boundaries[0].symbols,
            vec![VertexSym::Link(0)]
        );
        assert_eq!(p.stage(), Stage::Raw);
    }

    #[test]
    fn parses_empty_position() {
        let p = Position::parse("!").unwrap();
        assert!(p.is_empty());
        assert_eq!(p.render().unwrap(), "!");
        assert_eq!(Position::empty().render().unwrap(), "!");
    }

    #[test]
    fn rejects_malformed_text() {
        assert_eq!(Position::parse("A.}"), Err(ParseError::MissingEnd));
        assert!(matches!(
            Position::parse("A}!"),
            Err(ParseError::MissingBoundaryEnd { .. })
        ));
        assert!(matches!(
            Position::parse("A.!"),
            Err(ParseError::MissingRegionEnd { .. })
        ));
        assert!(matches!(
            Position::parse("..}!"),
            Err(ParseError::EmptyBoundary { .. })
        ));
        assert!(matches!(
            Position::parse("A.}]B.}!"),
            Err(ParseError::MissingLandEnd { .. })
        ));
        assert!(matches!(
            Position::parse("A.x}!"),
            Err(ParseError::MissingBoundaryEnd { .. })
        ));
        assert!(matches!(
            Position::parse("A.3.}!"),
            Err(ParseError::BadChar { ch: '3', .. })
        ));
        assert!(matches!(
            Position::parse("A.}!x"),
            Err(ParseError::Trailing { .. })
        ));
        assert_eq!(
            Position::parse("AAAA.}!"),
            Err(ParseError::TooManyOccurrences('A'))
        );
    }

    #[test]
    fn round_trips_fixture_strings() {
        for s in [
            "0.0.0.0.0.0.AB.}0.0.0.0.0.AB.}]!",
            "0.1ab1bc2ca.ABC.}0.2ABC.}]12.AB.}AB.}]!",
            "AL.}AL.BNMCMN.}D.COFPGQFOCM.}E.HRISJSIUKTKUIR.FQGP.}KT.}!",
            "AB.}AB.12.}]0.2ABC.}0.1ab1bc2ca.CBA.}]!",
            "122a2a.22.2AB.}2A.}2C.}BC.}]1122.}]!",
            "A.B.C.}!",
            "!",
        ] {
            round_trip(s);
        }
    }

    #[test]
    fn render_fails_past_the_alphabet() {
        let p = Position::new(
            vec![Land {
                regions: vec![Region {
                    boundaries: vec![Boundary {
                        symbols: vec![VertexSym::Link(26)],
                    }],
                }],
            }],
            Stage::Split,
        );
        assert!(matches!(
            p.render(),
            Err(RenderError::AlphabetExhausted {
                lower: false,
                id: 26
            })
        ));
    }

    #[test]
    fn lives_of_symbols() {
        let p = Position::parse("0.12.}]!").unwrap();
        let lives: Vec<u8> = p.occurrence_lives().into_iter().map(|(_, l)| l).collect();
        assert_eq!(lives, vec![3, 2, 1]);

        // A occurs three times: dead.
        let p = Position::parse("ABA.}A.}!").unwrap();
        let at = SymbolRef {
            land: 0,
            region: 1,
            boundary: 0,
            index: 0,
        };
        assert_eq!(p.lives_at(at), Some(0));
        // B occurs once in a boundary with other vertices: one curve end.
        let at = SymbolRef {
            land: 0,
            region: 0,
            boundary: 0,
            index: 1,
        };
        assert_eq!(p.lives_at(at), Some(2));
    }

    #[test]
    fn total_and_region_lives() {
        assert_eq!(Position::parse("A.B.C.}!").unwrap().total_lives(), 9);
        assert_eq!(Position::parse("22.}]!").unwrap().total_lives(), 2);
        assert_eq!(Position::start(5).total_lives(), 15);

        let p = Position::parse("AL.}AL.12.}0.2PGQ.}0.1RS1SU2UR.QGP.}!").unwrap();
        // region "0.2PGQ.}": 3 + 1 + 1 + 1 + 1
        assert_eq!(p.region_lives(0, 2), 7);
        // region "AL.}": two shared letters with one life each
        assert_eq!(p.region_lives(0, 0), 2);
    }
}
