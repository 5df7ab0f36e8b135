#![allow(dead_code)]

use std::collections::HashSet;

use rand::seq::SliceRandom;
use rand::Rng;
use sprouts_core::{canonical_form, children, CanonicalKey, Position};

/// Rows of the 4-spot correspondence table: position and either an exact
/// nimber or nimbers it is known to differ from.
pub enum Known {
    Is(u32),
    Not(&'static [u32]),
}

pub const FOUR_SPOT_TABLE: &[(u32, &str, Known)] = &[
    (0, "0.0.0.0.}]!", Known::Not(&[0])),
    (1, "0.0.AB.}0.AB.}]!", Known::Is(0)),
    (2, "0.0.2.}]0.}]!", Known::Not(&[0])),
    (3, "0.0.AB.}AB.CD.}CD.}]!", Known::Not(&[0])),
    (4, "0.0.A.}1aAa.}]!", Known::Not(&[0])),
    (5, "0.0.}]0.2.}]!", Known::Not(&[0])),
    (6, "0.1aAa.}0.A.}]!", Known::Not(&[0])),
    (7, "0.AB.CD.}0.AB.}CD.}]!", Known::Not(&[0])),
    (8, "0.AB.}0.CD.}AB.CD.}]!", Known::Not(&[0])),
    (9, "0.AB.}1a1a.AB.}]!", Known::Not(&[0])),
    (10, "0.A.}0.A.}]0.}]!", Known::Not(&[0])),
    (11, "0.0.}]!", Known::Is(0)),
    (12, "0.AB.}AB.}]!", Known::Not(&[0])),
    (13, "1a1a.}]!", Known::Not(&[0])),
    (14, "0.}]!", Known::Is(0)),
    (15, "AB.}AB.}]!", Known::Is(1)),
    (16, "!", Known::Is(0)),
    (17, "ABCD.}ABCD.}]!", Known::Is(0)),
    (18, "2AB.}AB.}]!", Known::Not(&[0, 1])),
    (19, "AB.}AC.}BC.}]!", Known::Not(&[0])),
    (20, "0.2.}]!", Known::Is(1)),
    (21, "12.}]!", Known::Is(0)),
    (22, "22.}]!", Known::Is(1)),
    (23, "0.A.}0.A.}]!", Known::Is(1)),
    (24, "0.}]12.}]!", Known::Is(0)),
    (25, "0.AB.}2AB.}]!", Known::Is(0)),
    (26, "0.0.2.}]!", Known::Not(&[0])),
    (27, "0.A.}2A.}]!", Known::Not(&[0])),
    (28, "0.}]22.}]!", Known::Not(&[0])),
    (29, "1aAa.}2A.}]!", Known::Not(&[0])),
    (30, "2AB.}AB.CD.}CD.}]!", Known::Not(&[0])),
    (31, "22.}]AB.}AB.}]!", Known::Is(0)),
    (32, "0.0.}]12.}]!", Known::Is(0)),
    (33, "0.A.}1A.}]0.}]!", Known::Is(0)),
    (34, "0.A.}1A.}]!", Known::Is(0)),
    (35, "0.}]AB.}AB.}]!", Known::Not(&[0])),
    (36, "12.}]1.}]!", Known::Not(&[0])),
    (37, "1A.}ABC.}BC.}]!", Known::Not(&[0])),
    (38, "1.}]!", Known::Is(1)),
    (39, "0.AB.}2AB.}]0.}]!", Known::Is(0)),
    (40, "0.A.}0.A.}]AB.}AB.}]!", Known::Is(0)),
    (41, "0.A.}ABC.}BC.}]!", Known::Is(0)),
    (42, "0.A.}ABC.}BC.}]0.}]!", Known::Is(0)),
    (43, "12.}]AB.}AB.}]!", Known::Not(&[0])),
    (44, "ABC.}ADE.}BC.}DE.}]!", Known::Not(&[0])),
    (45, "0.AB.}1CD.}AB.CD.}]!", Known::Is(0)),
    (46, "0.2.}]1AB.}AB.}]!", Known::Not(&[0])),
    (47, "0.AB.}2AB.}]1.}]!", Known::Not(&[0])),
    (48, "0.AB.}2CD.}AB.CD.}]!", Known::Not(&[0])),
    (49, "0.AB.}ABC.}CDE.}DE.}]!", Known::Not(&[0])),
    (50, "0.AB.}AB.}]12.}]!", Known::Not(&[0])),
    (51, "0.A.}1B.}aAaB.}]!", Known::Not(&[0])),
    (52, "0.}]1AB.}2AB.}]!", Known::Not(&[0])),
    (53, "1aAa.}1BC.}ABC.}]!", Known::Not(&[0])),
    (54, "1AB.}AB.CD.}CD.EF.}EF.}]!", Known::Not(&[0])),
    (55, "1AB.}AB.}]!", Known::Not(&[1])),
    (56, "1AB.}2AB.}]!", Known::Is(1)),
    (57, "1.}]22.}]!", Known::Is(0)),
    (58, "0.}]1.}]AB.}AB.}]!", Known::Is(0)),
    (59, "12.}]1A.}2A.}]!", Known::Is(0)),
    (60, "1A.}2A.}]!", Known::Is(0)),
    (61, "2A.}2A.}]!", Known::Not(&[0])),
    (62, "1AB.}2AB.}]AB.}AB.}]!", Known::Is(0)),
    (63, "2AB.}2AB.}]!", Known::Not(&[1])),
    (64, "2A.}ABC.}BC.}]!", Known::Not(&[1])),
];

/// Other strings quoted as examples of the notation.
pub const FIXTURES: &[&str] = &[
    "A.}!",
    "A.B.C.}!",
    "AL.}AL.BNMCMN.}D.COFPGQFOCM.}E.HRISJSIUKTKUIR.FQGP.}KT.}!",
    "AL.}AL.BNN.}D.OPGQO.}E.HRSJSUTUR.QGP.}!",
    "AL.}AL.12.}0.2PGQ.}0.1RS1SU2UR.QGP.}!",
    "AL.}AL.12.}]0.2PGQ.}0.1RS1SU2UR.QGP.}]!",
    "AB.}AB.12.}]0.2ABC.}0.1ab1bc2ca.CBA.}]!",
    "0.1ab1bc2ca.ABC.}0.2ABC.}]12.AB.}AB.}]!",
    "122a2a.22.2AB.}2A.}2C.}BC.}]1122.}]!",
    "122a2a.22.2BA.}2A.}2C.}BC.}]1122.}]!",
    "ABCDEF.}ABCDEG.}FG.}]!",
    "ABCDEF.}ABCDGF.}EG.}]!",
    "ABCDEF.}ABCGEF.}DG.}]!",
    "ABCDEF.}ABGDEF.}CG.}]!",
    "ABCDEF.}BCDEFG.}AG.}]!",
    "0.0.0.0.0.0.AB.}0.0.0.0.0.AB.}]!",
    "0.0.A.}0.0.A.}]!",
    "0.0.0.A.}0.0.0.A.}]!",
    "1AB.}AB.}]22.}]!",
    "0.22.}]!",
    "0.0.0.0.0.0.0.22.}]!",
];

/// Every canonical position reachable from `root` in at most `depth` moves.
pub fn within_moves(root: &Position, depth: usize) -> Vec<Position> {
    let start = canonical_form(&sprouts_core::simplify(root)).position;
    let mut seen: HashSet<CanonicalKey> = HashSet::new();
    seen.insert(CanonicalKey::of_canonical(&start));
    let mut out = vec![start.clone()];
    let mut frontier = vec![start];
    for _ in 0..depth {
        let mut next = Vec::new();
        for p in &frontier {
            for c in children(p) {
                if seen.insert(CanonicalKey::of_canonical(&c)) {
                    out.push(c.clone());
                    next.push(c);
                }
            }
        }
        frontier = next;
    }
    out
}

/// A position reached by random moves from a start of at most `max_spots`
/// spots, with at most `max_lives` lives.
pub fn random_position(rng: &mut impl Rng, max_spots: usize, max_lives: u32) -> Position {
    loop {
        let spots = rng.gen_range(1..=max_spots);
        let mut p = canonical_form(&sprouts_core::simplify(&Position::start(spots))).position;
        let moves = rng.gen_range(0..=3 * spots);
        for _ in 0..moves {
            let kids = children(&p);
            match kids.choose(rng) {
                Some(c) => p = c.clone(),
                None => break,
            }
        }
        if p.total_lives() <= max_lives {
            return p;
        }
    }
}

/// One land of a random position.
pub fn random_land(rng: &mut impl Rng, max_lives: u32) -> Position {
    loop {
        let p = random_position(rng, 3, 9);
        if p.land_count() == 0 {
            continue;
        }
        let i = rng.gen_range(0..p.land_count());
        let land = p.land_position(i);
        if land.total_lives() <= max_lives {
            return land;
        }
    }
}
