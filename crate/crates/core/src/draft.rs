//! Working form of a position: every vertex gets a global id and an explicit
//! lives count, so moves and simplification never depend on letter scoping.

use std::collections::HashMap;

use crate::position::{Boundary, Land, LivesOverride, Position, Region, Stage, VertexSym};

pub(crate) type DBoundary = Vec<u32>;
pub(crate) type DRegion = Vec<DBoundary>;
pub(crate) type DLand = Vec<DRegion>;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) struct Vert {
    pub lives: u8,
    pub name: VertexSym,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct Draft {
    pub lands: Vec<DLand>,
    pub verts: Vec<Vert>,
    pub stage: Stage,
}

/// Lives of a letter read from its occurrences.
fn occurrence_lives(count: usize, alone: bool) -> u8 {
    match count {
        1 if alone => 3,
        1 => 2,
        2 => 1,
        _ => 0,
    }
}

impl Draft {
    pub fn from_position(p: &Position) -> Draft {
        let mut verts: Vec<Vert> = Vec::new();
        let mut lands = Vec::with_capacity(p.lands().len());
        // (vertex, occurrence count, alone in its boundary)
        let mut letters: Vec<(u32, usize, bool)> = Vec::new();

        for (l, land) in p.lands().iter().enumerate() {
            let mut links: HashMap<u16, u32> = HashMap::new();
            let mut dland = Vec::with_capacity(land.regions.len());
            for region in &land.regions {
                let mut dregion = Vec::with_capacity(region.boundaries.len());
                for boundary in &region.boundaries {
                    let mut inner: HashMap<u16, u32> = HashMap::new();
                    let alone = boundary.symbols.len() == 1;
                    let mut db = Vec::with_capacity(boundary.symbols.len());
                    for &sym in &boundary.symbols {
                        let slot = match sym {
                            VertexSym::Inner(id) => Some(inner.entry(id)),
                            VertexSym::Link(id) => Some(links.entry(id)),
                            _ => None,
                        };
                        let v = match slot {
                            None => {
                                verts.push(Vert {
                                    lives: sym.generic_lives().unwrap_or(0),
                                    name: sym,
                                });
                                verts.len() as u32 - 1
                            }
                            Some(entry) => {
                                let v = *entry.or_insert_with(|| {
                                    verts.push(Vert {
                                        lives: 0,
                                        name: sym,
                                    });
                                    letters.push((verts.len() as u32 - 1, 0, true));
                                    verts.len() as u32 - 1
                                });
                                let rec = letters.iter_mut().rev().find(|r| r.0 == v).unwrap();
                                rec.1 += 1;
                                rec.2 = alone;
                                v
                            }
                        };
                        db.push(v);
                    }
                    dregion.push(db);
                }
                dland.push(dregion);
            }
            lands.push(dland);
            for o in p.overrides.iter().filter(|o| o.land == l) {
                if let Some(&v) = links.get(&o.link) {
                    // the letter record is resolved below; remember the override
                    letters.retain(|r| r.0 != v);
                    verts[v as usize].lives = o.lives;
                }
            }
        }
        for (v, count, alone) in letters {
            verts[v as usize].lives = occurrence_lives(count, alone);
        }
        Draft {
            lands,
            verts,
            stage: p.stage(),
        }
    }

    /// Back to the symbol form. Vertices whose name no longer fits their
    /// occurrences (a generic touched by a move, a lower-case letter spread
    /// over several boundaries) are given fresh upper-case names.
    pub fn to_position(&self) -> Position {
        let mut out_lands = Vec::with_capacity(self.lands.len());
        let mut overrides = Vec::new();
        for (l, land) in self.lands.iter().enumerate() {
            // occurrences per vertex: (count, first boundary key, spans boundaries, alone)
            let mut info: HashMap<u32, (usize, (usize, usize), bool, bool)> = HashMap::new();
            let mut next_link = 0u16;
            for (r, region) in land.iter().enumerate() {
                for (b, boundary) in region.iter().enumerate() {
                    for &v in boundary {
                        let e = info.entry(v).or_insert((0, (r, b), false, true));
                        e.0 += 1;
                        if e.1 != (r, b) {
                            e.2 = true;
                        }
                        e.3 = boundary.len() == 1;
                        if let VertexSym::Link(id) = self.verts[v as usize].name {
                            next_link = next_link.max(id + 1);
                        }
                    }
                }
            }
            let mut names: HashMap<u32, VertexSym> = HashMap::new();
            let mut order: Vec<u32> = Vec::new();
            for region in land {
                for boundary in region {
                    for &v in boundary {
                        if !names.contains_key(&v) {
                            names.insert(v, self.verts[v as usize].name);
                            order.push(v);
                        }
                    }
                }
            }
            for &v in &order {
                let vert = self.verts[v as usize];
                let (count, _, spans, alone) = info[&v];
                let fits = match vert.name {
                    VertexSym::Generic0 => count == 1 && vert.lives == 3,
                    VertexSym::Generic1 => count == 1 && vert.lives == 2,
                    VertexSym::Generic2 => count == 1 && vert.lives == 1,
                    VertexSym::Inner(_) => !spans && occurrence_lives(count, alone) == vert.lives,
                    VertexSym::Link(_) => true,
                };
                let name = if fits {
                    vert.name
                } else {
                    next_link += 1;
                    VertexSym::Link(next_link - 1)
                };
                names.insert(v, name);
                if let VertexSym::Link(id) = name {
                    if occurrence_lives(count, alone) != vert.lives {
                        overrides.push(LivesOverride {
                            land: l,
                            link: id,
                            lives: vert.lives,
                        });
                    }
                }
            }
            let regions = land
                .iter()
                .map(|region| Region {
                    boundaries: region
                        .iter()
                        .map(|b| Boundary {
                            symbols: b.iter().map(|v| names[v]).collect(),
                        })
                        .collect(),
                })
                .collect();
            out_lands.push(Land { regions });
        }
        let stage = if self.stage == Stage::Raw && out_lands.len() > 1 {
            Stage::Split
        } else {
            self.stage
        };
        let mut p = Position::new(out_lands, stage);
        overrides.sort();
        p.overrides = overrides;
        p
    }

    pub fn lives(&self, v: u32) -> u8 {
        self.verts[v as usize].lives
    }

    pub fn region_lives(&self, region: &DRegion) -> u32 {
        let mut seen: Vec<u32> = Vec::new();
        let mut total = 0;
        for b in region {
            for &v in b {
                if !seen.contains(&v) {
                    seen.push(v);
                    total += self.lives(v) as u32;
                }
            }
        }
        total
    }

    pub fn land_lives(&self, l: usize) -> u32 {
        let mut seen: Vec<u32> = Vec::new();
        let mut total = 0;
        for region in &self.lands[l] {
            for b in region {
                for &v in b {
                    if !seen.contains(&v) {
                        seen.push(v);
                        total += self.lives(v) as u32;
                    }
                }
            }
        }
        total
    }

    pub fn total_lives(&self) -> u32 {
        (0..self.lands.len()).map(|l| self.land_lives(l)).sum()
    }

    pub fn add_vertex(&mut self, lives: u8, name: VertexSym) -> u32 {
        self.verts.push(Vert { lives, name });
        self.verts.len() as u32 - 1
    }
}
