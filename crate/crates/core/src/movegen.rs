//! Legal moves of a position: linking two boundaries of a region, or linking
//! a boundary to itself and splitting the region in two.

use std::collections::HashMap;

use crate::canon::{canonical_form, CanonicalKey};
use crate::draft::Draft;
use crate::position::{Boundary, Land, Position, Region, Stage, VertexSym};
use crate::simplify::simplify_draft;

/// Rewrites every vertex as an upper-case letter whose occurrence count
/// encodes its lives. A `1` alone in its boundary keeps a dead companion
/// letter (three occurrences) so that it does not read as an isolated spot.
pub fn materialize(p: &Position) -> Position {
    let mut lands = Vec::with_capacity(p.land_count());
    for land in p.lands() {
        let mut next = 0u16;
        let mut fresh = || {
            next += 1;
            VertexSym::Link(next - 1)
        };
        let mut links: HashMap<u16, VertexSym> = HashMap::new();
        let mut regions = Vec::new();
        for region in &land.regions {
            let mut boundaries = Vec::new();
            for boundary in &region.boundaries {
                let mut inner: HashMap<u16, VertexSym> = HashMap::new();
                let mut symbols = Vec::new();
                for &sym in &boundary.symbols {
                    match sym {
                        VertexSym::Generic0 => symbols.push(fresh()),
                        VertexSym::Generic1 => {
                            symbols.push(fresh());
                            if boundary.symbols.len() == 1 {
                                let dead = fresh();
                                symbols.extend([dead, dead, dead]);
                            }
                        }
                        VertexSym::Generic2 => {
                            let s = fresh();
                            symbols.extend([s, s]);
                        }
                        VertexSym::Inner(id) => {
                            symbols.push(*inner.entry(id).or_insert_with(&mut fresh))
                        }
                        VertexSym::Link(id) => {
                            symbols.push(*links.entry(id).or_insert_with(&mut fresh))
                        }
                    }
                }
                boundaries.push(Boundary { symbols });
            }
            regions.push(Region { boundaries });
        }
        lands.push(Land { regions });
    }
    let stage = if lands.len() <= 1 {
        Stage::Raw
    } else {
        Stage::Split
    };
    let mut out = Position::new(lands, stage);
    // lives that are not occurrence-derived survive as overrides
    out.overrides = p.overrides.clone();
    if !out.overrides.is_empty() {
        // overrides name letters of the input; rebuild through the draft instead
        let mut d = Draft::from_position(p);
        d.stage = stage;
        return d.to_position();
    }
    out
}

fn next_link(d: &Draft, land: usize) -> u16 {
    let mut next = 0;
    for region in &d.lands[land] {
        for b in region {
            for &v in b {
                if let VertexSym::Link(id) = d.verts[v as usize].name {
                    next = next.max(id + 1);
                }
            }
        }
    }
    next
}

/// True when the tail of a boundary walk after the linked vertex is empty:
/// the boundary is a single isolated spot.
fn isolated(d: &Draft, boundary: &[u32]) -> bool {
    boundary.len() == 1 && d.lives(boundary[0]) == 3
}

/// Position of each isolated spot among the isolated spots of its region.
fn spot_ranks(d: &Draft, region: &[Vec<u32>]) -> Vec<Option<usize>> {
    let mut n = 0;
    region
        .iter()
        .map(|b| {
            isolated(d, b).then(|| {
                n += 1;
                n - 1
            })
        })
        .collect()
}

/// With `reduce`, isolated spots of a region count as interchangeable and
/// only one representative move is produced per class.
pub(crate) fn two_boundary_drafts(d: &Draft, out: &mut Vec<Draft>, reduce: bool) {
    for (l, land) in d.lands.iter().enumerate() {
        let fresh = next_link(d, l);
        for (r, region) in land.iter().enumerate() {
            let ranks = spot_ranks(d, region);
            for bx in 0..region.len() {
                for by in bx + 1..region.len() {
                    if reduce {
                        let ok_x = ranks[bx].map_or(true, |k| k == 0);
                        let ok_y = match (ranks[bx], ranks[by]) {
                            (_, None) => true,
                            (Some(_), Some(k)) => k == 1,
                            (None, Some(k)) => k == 0,
                        };
                        if !(ok_x && ok_y) {
                            continue;
                        }
                    }
                    let x = &region[bx];
                    let y = &region[by];
                    for i in 0..x.len() {
                        if d.lives(x[i]) == 0 {
                            continue;
                        }
                        for j in 0..y.len() {
                            if d.lives(y[j]) == 0 {
                                continue;
                            }
                            let mut child = d.clone();
                            let z = child.add_vertex(1, VertexSym::Link(fresh));
                            let mut merged = Vec::with_capacity(x.len() + y.len() + 4);
                            merged.extend_from_slice(&x[..=i]);
                            merged.push(z);
                            if !isolated(d, y) {
                                merged.extend_from_slice(&y[j..]);
                            }
                            merged.extend_from_slice(&y[..=j]);
                            merged.push(z);
                            if !isolated(d, x) {
                                merged.extend_from_slice(&x[i..]);
                            }
                            child.verts[x[i] as usize].lives -= 1;
                            child.verts[y[j] as usize].lives -= 1;
                            let region = &mut child.lands[l][r];
                            region[bx] = merged;
                            region.remove(by);
                            out.push(child);
                        }
                    }
                }
            }
        }
    }
}

pub(crate) fn one_boundary_drafts(d: &Draft, out: &mut Vec<Draft>, reduce: bool) {
    for (l, land) in d.lands.iter().enumerate() {
        let fresh = next_link(d, l);
        for (r, region) in land.iter().enumerate() {
            let ranks = spot_ranks(d, region);
            for bi in 0..region.len() {
                if reduce && ranks[bi].is_some_and(|k| k > 0) {
                    continue;
                }
                // bits of the other boundaries that are isolated spots
                let spot_bits: Vec<u64> = (0..region.len())
                    .filter(|&k| k != bi)
                    .enumerate()
                    .filter(|&(_, k)| ranks[k].is_some())
                    .map(|(pos, _)| 1u64 << pos)
                    .collect();
                let x = &region[bi];
                let others: Vec<&Vec<u32>> = region
                    .iter()
                    .enumerate()
                    .filter(|&(k, _)| k != bi)
                    .map(|(_, b)| b)
                    .collect();
                for i in 0..x.len() {
                    for j in i..x.len() {
                        let (vi, vj) = (x[i], x[j]);
                        if i == j {
                            if d.lives(vi) < 2 {
                                continue;
                            }
                        } else if vi == vj || d.lives(vi) == 0 || d.lives(vj) == 0 {
                            continue;
                        }
                        let z_name = VertexSym::Link(fresh);
                        // walks of the two new boundaries, z standing in as u32::MAX
                        const Z: u32 = u32::MAX;
                        let mut outer: Vec<u32> = x[..=i].to_vec();
                        outer.push(Z);
                        let inner: Vec<u32> = if i == j {
                            if !isolated(d, x) {
                                outer.extend_from_slice(&x[i..]);
                            }
                            vec![vi, Z]
                        } else {
                            outer.extend_from_slice(&x[j..]);
                            let mut s = x[i..=j].to_vec();
                            s.push(Z);
                            s
                        };
                        for mask in 0u64..(1u64 << others.len()) {
                            // spots move as a block: only a prefix may go
                            // to the second region
                            if reduce
                                && spot_bits
                                    .windows(2)
                                    .any(|w| mask & w[0] == 0 && mask & w[1] != 0)
                            {
                                continue;
                            }
                            let mut child = d.clone();
                            let z = child.add_vertex(1, z_name);
                            if i == j {
                                child.verts[vi as usize].lives -= 2;
                            } else {
                                child.verts[vi as usize].lives -= 1;
                                child.verts[vj as usize].lives -= 1;
                            }
                            let sub = |w: &Vec<u32>| -> Vec<u32> {
                                w.iter().map(|&v| if v == Z { z } else { v }).collect()
                            };
                            let mut first = vec![sub(&outer)];
                            let mut second = vec![sub(&inner)];
                            for (k, b) in others.iter().enumerate() {
                                if mask & (1 << k) == 0 {
                                    first.push((*b).clone());
                                } else {
                                    second.push((*b).clone());
                                }
                            }
                            let land = &mut child.lands[l];
                            land[r] = first;
                            land.insert(r + 1, second);
                            out.push(child);
                        }
                    }
                }
            }
        }
    }
}

fn raw_output(drafts: Vec<Draft>) -> Vec<Position> {
    drafts.into_iter().map(|d| d.to_position()).collect()
}

/// All raw results of linking two different boundaries of a region.
/// Expects a materialized position; other inputs are materialized first.
pub fn two_boundary_moves(p: &Position) -> Vec<Position> {
    let d = Draft::from_position(&materialize(p));
    let mut out = Vec::new();
    two_boundary_drafts(&d, &mut out, false);
    raw_output(out)
}

/// All raw results of linking a boundary to itself, for every split of the
/// region's other boundaries between the two new regions.
pub fn one_boundary_moves(p: &Position) -> Vec<Position> {
    let d = Draft::from_position(&materialize(p));
    let mut out = Vec::new();
    one_boundary_drafts(&d, &mut out, false);
    raw_output(out)
}

/// Raw children straight from the lives table, without materializing.
#[cfg(test)]
pub(crate) fn raw_children(p: &Position) -> Vec<Draft> {
    raw_children_with(p, false)
}

fn raw_children_with(p: &Position, reduce: bool) -> Vec<Draft> {
    let d = Draft::from_position(p);
    let mut out = Vec::new();
    two_boundary_drafts(&d, &mut out, reduce);
    one_boundary_drafts(&d, &mut out, reduce);
    out
}

/// Simplified, canonized children, deduplicated and sorted by key.
pub fn children(p: &Position) -> Vec<Position> {
    let mut seen: HashMap<CanonicalKey, Position> = HashMap::new();
    for mut draft in raw_children_with(p, true) {
        simplify_draft(&mut draft);
        let canon = canonical_form(&draft.to_position());
        seen.entry(canon.key.clone()).or_insert(canon.position);
    }
    let mut out: Vec<(CanonicalKey, Position)> = seen.into_iter().collect();
    out.sort_by(|a, b| a.0.cmp(&b.0));
    out.into_iter().map(|(_, p)| p).collect()
}

/// Keys of [`children`], in order.
pub fn child_keys(p: &Position) -> Vec<CanonicalKey> {
    children(p)
        .iter()
        .map(|c| CanonicalKey::of_canonical(c))
        .collect()
}
