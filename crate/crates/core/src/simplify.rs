//! Reduction of raw strings: dead parts, generic vertices, lands, letter
//! names, and merging of boundaries in regions with few lives.

use std::collections::HashMap;

use crate::draft::{DRegion, Draft};
use crate::position::{Position, Stage, VertexSym};

/// Deletes dead vertices, then empty boundaries, then regions with at most
/// one life. Vertices that also live elsewhere keep their lives.
pub(crate) fn delete_dead_draft(d: &mut Draft) -> bool {
    let mut changed = false;
    let verts = &d.verts;
    for land in &mut d.lands {
        for region in land.iter_mut() {
            for b in region.iter_mut() {
                let before = b.len();
                b.retain(|&v| verts[v as usize].lives > 0);
                changed |= b.len() != before;
            }
            let before = region.len();
            region.retain(|b| !b.is_empty());
            changed |= region.len() != before;
        }
    }
    let mut lands = std::mem::take(&mut d.lands);
    for land in &mut lands {
        let before = land.len();
        land.retain(|region| !region.is_empty() && d.region_lives(region) > 1);
        changed |= land.len() != before;
    }
    lands.retain(|land| !land.is_empty());
    d.lands = lands;
    changed
}

struct Occurrences {
    // vertex -> list of (land, region, boundary, index)
    at: HashMap<u32, Vec<(usize, usize, usize, usize)>>,
}

fn occurrences(d: &Draft) -> Occurrences {
    let mut at: HashMap<u32, Vec<(usize, usize, usize, usize)>> = HashMap::new();
    for (l, land) in d.lands.iter().enumerate() {
        for (r, region) in land.iter().enumerate() {
            for (b, boundary) in region.iter().enumerate() {
                for (i, &v) in boundary.iter().enumerate() {
                    at.entry(v).or_default().push((l, r, b, i));
                }
            }
        }
    }
    Occurrences { at }
}

fn next_free_link(d: &Draft) -> u16 {
    d.verts
        .iter()
        .filter_map(|v| match v.name {
            VertexSym::Link(id) => Some(id + 1),
            _ => None,
        })
        .max()
        .unwrap_or(0)
}

/// Names vertices `0`, `1`, `2` where their lives allow it. A one-life vertex
/// seen twice in a row along a boundary loses its second occurrence.
pub(crate) fn genericize_draft(d: &mut Draft) -> bool {
    let occ = occurrences(d);
    let mut changed = false;
    let mut drop: Vec<(usize, usize, usize, usize)> = Vec::new();
    let mut fresh = next_free_link(d);
    let mut vertices: Vec<u32> = occ.at.keys().copied().collect();
    vertices.sort_unstable();
    for v in vertices {
        let places = &occ.at[&v];
        let lives = d.lives(v);
        let name = match (lives, places.len()) {
            (3, _) => Some(VertexSym::Generic0),
            (2, _) => Some(VertexSym::Generic1),
            (1, 1) => Some(VertexSym::Generic2),
            (1, 2) => {
                let (l0, r0, b0, i0) = places[0];
                let (l1, r1, b1, i1) = places[1];
                let len = d.lands[l0][r0][b0].len();
                let same = (l0, r0, b0) == (l1, r1, b1);
                if same && (i1 == i0 + 1 || (i0 == 0 && i1 == len - 1)) {
                    drop.push(places[1]);
                    Some(VertexSym::Generic2)
                } else {
                    None
                }
            }
            _ => None,
        };
        let vert = &mut d.verts[v as usize];
        match name {
            Some(n) => {
                if vert.name != n {
                    vert.name = n;
                    changed = true;
                }
            }
            None if vert.name.is_generic() => {
                vert.name = VertexSym::Link(fresh);
                fresh += 1;
                changed = true;
            }
            None => {}
        }
    }
    if !drop.is_empty() {
        changed = true;
        // remove from the back so indices stay valid
        drop.sort_unstable();
        for &(l, r, b, i) in drop.iter().rev() {
            d.lands[l][r][b].remove(i);
        }
    }
    changed
}

/// Groups regions into lands: maximal sets of regions linked by shared
/// vertices. Lands keep the order of their first region.
pub(crate) fn split_lands_draft(d: &mut Draft) -> bool {
    let regions: Vec<DRegion> = d.lands.iter().flatten().cloned().collect();
    let n = regions.len();
    let mut parent: Vec<usize> = (0..n).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut owner: HashMap<u32, usize> = HashMap::new();
    for (r, region) in regions.iter().enumerate() {
        for b in region {
            for &v in b {
                if let Some(&other) = owner.get(&v) {
                    let (a, c) = (find(&mut parent, other), find(&mut parent, r));
                    if a != c {
                        parent[a.max(c)] = a.min(c);
                    }
                } else {
                    owner.insert(v, r);
                }
            }
        }
    }
    let mut group_of: HashMap<usize, usize> = HashMap::new();
    let mut lands: Vec<Vec<DRegion>> = Vec::new();
    for (r, region) in regions.into_iter().enumerate() {
        let root = find(&mut parent, r);
        let g = *group_of.entry(root).or_insert_with(|| {
            lands.push(Vec::new());
            lands.len() - 1
        });
        lands[g].push(region);
    }
    let changed = lands != d.lands || d.stage == Stage::Raw;
    d.lands = lands;
    if d.stage == Stage::Raw {
        d.stage = Stage::Split;
    }
    changed
}

/// Lower-case names for vertices seen twice in one boundary, restarting at
/// `a` for each boundary; upper-case names for vertices shared between
/// regions, restarting at `A` for each land. Both in order of appearance.
pub(crate) fn rename_letters_draft(d: &mut Draft) -> bool {
    let occ = occurrences(d);
    let mut changed = false;
    let mut assigned: HashMap<u32, VertexSym> = HashMap::new();
    for (l, land) in d.lands.iter().enumerate() {
        let mut next_link = 0u16;
        for (r, region) in land.iter().enumerate() {
            for (b, boundary) in region.iter().enumerate() {
                let mut next_inner = 0u16;
                for &v in boundary {
                    if d.verts[v as usize].name.is_generic() || assigned.contains_key(&v) {
                        continue;
                    }
                    let places = &occ.at[&v];
                    let local = places
                        .iter()
                        .all(|&(l2, r2, b2, _)| (l2, r2, b2) == (l, r, b));
                    let name = if local {
                        next_inner += 1;
                        VertexSym::Inner(next_inner - 1)
                    } else {
                        next_link += 1;
                        VertexSym::Link(next_link - 1)
                    };
                    assigned.insert(v, name);
                }
            }
        }
    }
    for (v, name) in assigned {
        let vert = &mut d.verts[v as usize];
        if vert.name != name {
            vert.name = name;
            changed = true;
        }
    }
    changed
}

/// Concatenates the boundaries of every region with three lives or fewer.
pub(crate) fn merge_small_regions_draft(d: &mut Draft) -> bool {
    let mut changed = false;
    let mut lands = std::mem::take(&mut d.lands);
    for land in &mut lands {
        for region in land.iter_mut() {
            if region.len() > 1 && d.region_lives(region) <= 3 {
                let merged: Vec<u32> = region.concat();
                *region = vec![merged];
                changed = true;
            }
        }
    }
    d.lands = lands;
    changed
}

/// The full reduction, repeated until merging changes nothing.
pub(crate) fn simplify_draft(d: &mut Draft) {
    loop {
        delete_dead_draft(d);
        genericize_draft(d);
        split_lands_draft(d);
        rename_letters_draft(d);
        if !merge_small_regions_draft(d) {
            break;
        }
    }
    d.stage = Stage::Simplified;
}

fn via_draft(p: &Position, step: impl FnOnce(&mut Draft) -> bool) -> Position {
    let mut d = Draft::from_position(p);
    step(&mut d);
    d.to_position()
}

pub fn delete_dead(p: &Position) -> Position {
    via_draft(p, delete_dead_draft)
}

pub fn genericize(p: &Position) -> Position {
    via_draft(p, genericize_draft)
}

pub fn split_lands(p: &Position) -> Position {
    via_draft(p, split_lands_draft)
}

pub fn rename_letters(p: &Position) -> Position {
    via_draft(p, rename_letters_draft)
}

pub fn merge_small_regions(p: &Position) -> Position {
    via_draft(p, merge_small_regions_draft)
}

pub fn simplify(p: &Position) -> Position {
    let mut d = Draft::from_position(p);
    simplify_draft(&mut d);
    d.to_position().with_stage(Stage::Simplified)
}
