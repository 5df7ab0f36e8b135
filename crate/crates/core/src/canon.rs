//! Pseudo-canonization: a deterministic representative string for each
//! simplified position, used as the transposition-table key.
//!
//! Strings compare under the order `0 < 1 < 2 < a < … < z < A < … < Z < . < } < ] < !`.
//! Each land is reduced by repeating one step until the sequence of strings
//! cycles: canonize every region (best rotation of each boundary, sorted
//! boundaries, better of the two orientations), sort the regions, then rename
//! upper-case letters by first appearance. The smallest string of
//! the cycle is the land's key, so canonizing a key gives the key back.

use std::cmp::Ordering;
use std::fmt;

use crate::position::{Boundary, Land, Position, Region, RenderError, Stage, VertexSym};

const INNER_BASE: u16 = 3;
const LINK_BASE: u16 = 0x1000;
const DOT: u16 = 0xFF00;
const REGION_END: u16 = 0xFF01;
const LAND_END: u16 = 0xFF02;
const POSITION_END: u16 = 0xFF03;

fn rank(c: char) -> u16 {
    match c {
        '0' => 0,
        '1' => 1,
        '2' => 2,
        'a'..='z' => INNER_BASE + (c as u16 - 'a' as u16),
        'A'..='Z' => LINK_BASE + (c as u16 - 'A' as u16),
        '.' => DOT,
        '}' => REGION_END,
        ']' => LAND_END,
        '!' => POSITION_END,
        _ => u16::MAX,
    }
}

/// Compares two position strings in the Sprouts lexicographic order.
pub fn compare_strings(a: &str, b: &str) -> Ordering {
    a.chars().map(rank).cmp(b.chars().map(rank))
}

/// Rendered text of a canonized position or land.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CanonicalKey(String);

impl CanonicalKey {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// Key of a position that is already in canonical form.
    pub fn of_canonical(p: &Position) -> CanonicalKey {
        CanonicalKey(p.render().expect("canonical positions render"))
    }

    /// Wraps text without checking that it is canonical.
    pub fn from_text_unchecked(text: impl Into<String>) -> CanonicalKey {
        CanonicalKey(text.into())
    }
}

impl Ord for CanonicalKey {
    fn cmp(&self, other: &Self) -> Ordering {
        compare_strings(&self.0, &other.0)
    }
}

impl PartialOrd for CanonicalKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for CanonicalKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for CanonicalKey {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

type CBoundary = Vec<u16>;
type CRegion = Vec<CBoundary>;
type CLand = Vec<CRegion>;

fn is_inner(c: u16) -> bool {
    (INNER_BASE..LINK_BASE).contains(&c)
}

fn is_link(c: u16) -> bool {
    (LINK_BASE..DOT).contains(&c)
}

fn sym_code(s: VertexSym) -> u16 {
    match s {
        VertexSym::Generic0 => 0,
        VertexSym::Generic1 => 1,
        VertexSym::Generic2 => 2,
        VertexSym::Inner(i) => INNER_BASE + i,
        VertexSym::Link(i) => LINK_BASE + i,
    }
}

fn code_sym(c: u16) -> VertexSym {
    match c {
        0 => VertexSym::Generic0,
        1 => VertexSym::Generic1,
        2 => VertexSym::Generic2,
        c if is_inner(c) => VertexSym::Inner(c - INNER_BASE),
        c => VertexSym::Link(c - LINK_BASE),
    }
}

fn land_codes(land: &Land) -> CLand {
    land.regions
        .iter()
        .map(|r| {
            r.boundaries
                .iter()
                .map(|b| b.symbols.iter().map(|&s| sym_code(s)).collect())
                .collect()
        })
        .collect()
}

/// Upper-case letters all look alike under the first comparison; their
/// actual names only break ties.
fn masked(c: u16) -> u16 {
    if is_link(c) {
        LINK_BASE
    } else {
        c
    }
}

/// A boundary or region text under two views: `m` with every upper-case
/// letter masked, `a` with the actual names. Comparisons use `m` first.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
struct View {
    m: Vec<u16>,
    a: Vec<u16>,
}

impl View {
    fn key(&self) -> (&[u16], &[u16]) {
        (&self.m, &self.a)
    }

    fn push(&mut self, c: u16) {
        self.m.push(masked(c));
        self.a.push(c);
    }
}

/// Smallest rotation of a boundary walk, lower-case letters renamed from
/// `a` in order of appearance.
fn canon_boundary(walk: &[u16], reversed: bool) -> View {
    let n = walk.len();
    let at = |k: usize| if reversed { walk[n - 1 - k] } else { walk[k] };
    let lead = |c: u16| if is_inner(c) { INNER_BASE } else { masked(c) };
    let first = (0..n).map(|k| lead(at(k))).min().unwrap_or(0);
    let mut best: Option<View> = None;
    let mut names: Vec<(u16, u16)> = Vec::new();
    for r in 0..n {
        if lead(at(r)) != first {
            continue;
        }
        let mut v = View {
            m: Vec::with_capacity(n),
            a: Vec::with_capacity(n),
        };
        names.clear();
        for k in 0..n {
            let c = at((r + k) % n);
            if is_inner(c) {
                let name = match names.iter().find(|(old, _)| *old == c) {
                    Some(&(_, new)) => new,
                    None => {
                        let new = INNER_BASE + names.len() as u16;
                        names.push((c, new));
                        new
                    }
                };
                v.push(name);
            } else {
                v.push(c);
            }
        }
        if best.as_ref().map_or(true, |b| v.key() < b.key()) {
            best = Some(v);
        }
    }
    best.unwrap_or_default()
}

fn with_dot(b: &[u16]) -> impl Iterator<Item = &u16> {
    b.iter().chain(std::iter::once(&DOT))
}

/// Sorted boundaries in the better of the two orientations, with the
/// region's text.
fn canon_region(region: &CRegion) -> (View, Vec<View>) {
    let orient = |reversed: bool| {
        let mut bs: Vec<View> = region.iter().map(|b| canon_boundary(b, reversed)).collect();
        bs.sort_by(|x, y| {
            with_dot(&x.m)
                .cmp(with_dot(&y.m))
                .then_with(|| with_dot(&x.a).cmp(with_dot(&y.a)))
        });
        let mut text = View::default();
        for b in &bs {
            text.m.extend_from_slice(&b.m);
            text.a.extend_from_slice(&b.a);
            text.push(DOT);
        }
        text.push(REGION_END);
        (text, bs)
    };
    let fwd = orient(false);
    let rev = orient(true);
    if rev.0.key() < fwd.0.key() {
        rev
    } else {
        fwd
    }
}

fn flatten_land(land: &CLand) -> Vec<u16> {
    let mut out = Vec::new();
    for r in land {
        for b in r {
            out.extend_from_slice(b);
            out.push(DOT);
        }
        out.push(REGION_END);
    }
    out
}

/// One reduction step: canonical regions, sorted, links renamed by appearance.
fn land_step(land: &CLand) -> CLand {
    let mut regions: Vec<(View, Vec<View>)> = land.iter().map(canon_region).collect();
    regions.sort_by(|x, y| x.0.key().cmp(&y.0.key()));
    let mut names: Vec<(u16, u16)> = Vec::new();
    regions
        .into_iter()
        .map(|(_, region)| {
            region
                .into_iter()
                .map(|b| {
                    b.a.into_iter()
                        .map(|c| {
                            if !is_link(c) {
                                return c;
                            }
                            match names.iter().find(|(old, _)| *old == c) {
                                Some(&(_, new)) => new,
                                None => {
                                    let new = LINK_BASE + names.len() as u16;
                                    names.push((c, new));
                                    new
                                }
                            }
                        })
                        .collect()
                })
                .collect()
        })
        .collect()
}

fn canon_land_codes(land: &Land) -> CLand {
    let mut cur = land_step(&land_codes(land));
    let mut seen: Vec<(Vec<u16>, CLand)> = vec![(flatten_land(&cur), cur.clone())];
    loop {
        cur = land_step(&cur);
        let flat = flatten_land(&cur);
        if let Some(i) = seen.iter().position(|(f, _)| *f == flat) {
            let (_, best) = seen
                .drain(i..)
                .min_by(|a, b| a.0.cmp(&b.0))
                .expect("cycle is non-empty");
            return best;
        }
        seen.push((flat, cur.clone()));
    }
}

fn codes_land(codes: &CLand) -> Land {
    Land {
        regions: codes
            .iter()
            .map(|r| Region {
                boundaries: r
                    .iter()
                    .map(|b| Boundary {
                        symbols: b.iter().map(|&c| code_sym(c)).collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// A position in canonical form together with its key.
#[derive(Debug, Clone)]
pub struct Canonical {
    pub position: Position,
    pub key: CanonicalKey,
}

/// Canonical form of one land, as a single-land position.
pub fn canonical_land(land: &Land) -> Result<Canonical, RenderError> {
    let land = codes_land(&canon_land_codes(land));
    let position = Position::new(vec![land], Stage::Simplified);
    let key = CanonicalKey(position.render()?);
    Ok(Canonical { position, key })
}

/// Key of one land, written as a single-land position (`…]!`).
pub fn canonize_land(land: &Land) -> Result<CanonicalKey, RenderError> {
    canonical_land(land).map(|c| c.key)
}

/// Canonical form of a simplified position: every land canonized, lands
/// sorted. Panics if a land needs more than 26 letters of one case.
pub fn canonical_form(p: &Position) -> Canonical {
    try_canonical_form(p).expect("position exceeds the letter alphabet")
}

pub fn try_canonical_form(p: &Position) -> Result<Canonical, RenderError> {
    let mut lands: Vec<(Vec<u16>, CLand)> = p
        .lands()
        .iter()
        .map(|l| {
            let c = canon_land_codes(l);
            let mut flat = flatten_land(&c);
            flat.push(LAND_END);
            (flat, c)
        })
        .collect();
    lands.sort_by(|a, b| a.0.cmp(&b.0));
    let position = Position::new(
        lands.iter().map(|(_, c)| codes_land(c)).collect(),
        Stage::Simplified,
    );
    let key = CanonicalKey(position.render()?);
    Ok(Canonical { position, key })
}

pub fn canonize(p: &Position) -> CanonicalKey {
    canonical_form(p).key
}

/// Number of distinct keys met while developing every position reachable
/// from the `spots`-spot start. `None` when more than `limit` keys are found.
pub fn count_complete_tree(spots: usize, limit: usize) -> Option<usize> {
    let start = crate::simplify::simplify(&Position::start(spots));
    let root = canonical_form(&start);
    let mut seen: std::collections::HashSet<CanonicalKey> = std::collections::HashSet::new();
    seen.insert(root.key);
    let mut stack = vec![root.position];
    while let Some(p) = stack.pop() {
        for child in crate::movegen::children(&p) {
            let key = CanonicalKey::of_canonical(&child);
            if seen.insert(key) {
                if seen.len() > limit {
                    return None;
                }
                stack.push(child);
            }
        }
    }
    Some(seen.len())
}
