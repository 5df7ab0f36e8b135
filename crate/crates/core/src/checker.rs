//! Check computation: replays a proof using a table of previous results and
//! keeps only what the proof needs.
//!
//! At a losing couple every child is recomputed and proven winning. At a
//! winning couple the table names a losing child and only that child is
//! followed. A couple with several lands is split into its lands (each
//! proven by its own losing couple) and at most one remaining couple.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt::{self, Write as _};
use std::str::FromStr;

use thiserror::Error;

use crate::canon::{canonical_form, CanonicalKey};
use crate::engine::{Couple, Outcome};
use crate::movegen::children;
use crate::position::{Position, Stage};
use crate::store::Store;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum CheckError {
    #[error("reference table has no losing child for {0}")]
    Insufficient(CoupleId),
    #[error("reference table lacks the nimbers of several lands of {0}")]
    MissingLands(CoupleId),
    #[error("{0} does not have the outcome the reference table implies")]
    Mismatch(CoupleId),
}

/// A couple as it appears in a solution: canonical key and nim part.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CoupleId {
    pub key: CanonicalKey,
    pub nim: u32,
}

impl CoupleId {
    pub fn new(key: CanonicalKey, nim: u32) -> CoupleId {
        CoupleId { key, nim }
    }

    fn position(&self) -> Position {
        Position::parse(self.key.as_str())
            .expect("keys parse")
            .with_stage(Stage::Simplified)
    }
}

impl fmt::Display for CoupleId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}+{})", self.key, self.nim)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Evidence {
    /// No land left: losing exactly when the nim part is 0.
    End,
    /// Single land, every child listed and winning.
    All(Vec<CoupleId>),
    /// Single land, one losing child.
    Via(CoupleId),
    /// Several lands: the listed lands have the given nimbers; the optional
    /// remaining couple decides the outcome.
    Split {
        lands: Vec<(CanonicalKey, u32)>,
        rest: Option<CoupleId>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionNode {
    pub id: CoupleId,
    pub outcome: Outcome,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolutionTree {
    pub root: CoupleId,
    pub nodes: BTreeMap<CoupleId, SolutionNode>,
}

fn land_keys(p: &Position) -> Vec<CanonicalKey> {
    p.lands()
        .iter()
        .map(|l| CanonicalKey::of_canonical(&Position::new(vec![l.clone()], Stage::Simplified)))
        .collect()
}

/// Position children paired with `n`, then `(p+m)` for `m < n`.
fn child_couples(p: &Position, key: &CanonicalKey, n: u32) -> Vec<CoupleId> {
    let mut out: Vec<CoupleId> = children(p)
        .into_iter()
        .map(|c| CoupleId::new(CanonicalKey::of_canonical(&c), n))
        .collect();
    out.extend((0..n).map(|m| CoupleId::new(key.clone(), m)));
    out
}

struct Checker<'a> {
    reference: &'a Store,
    nodes: BTreeMap<CoupleId, SolutionNode>,
}

impl Checker<'_> {
    /// Losing according to the reference table alone.
    fn table_says_losing(&self, id: &CoupleId) -> bool {
        let p = id.position();
        let mut x = id.nim;
        for k in land_keys(&p) {
            match self.reference.get(&k) {
                Some(v) => x ^= v,
                None => return false,
            }
        }
        x == 0
    }

    fn check(&mut self, id: &CoupleId) -> Result<Outcome, CheckError> {
        if let Some(n) = self.nodes.get(id) {
            return Ok(n.outcome);
        }
        let p = id.position();
        let lands = land_keys(&p);
        let (outcome, evidence) = if lands.is_empty() {
            let o = if id.nim == 0 {
                Outcome::Loss
            } else {
                Outcome::Win
            };
            (o, Evidence::End)
        } else if lands.len() > 1 {
            let mut known = Vec::new();
            let mut unknown = Vec::new();
            for k in lands {
                match self.reference.get(&k) {
                    Some(v) => known.push((k, v)),
                    None => unknown.push(k),
                }
            }
            if unknown.len() > 1 {
                return Err(CheckError::MissingLands(id.clone()));
            }
            let mut x = id.nim;
            for (k, v) in &known {
                x ^= v;
                if self.check(&CoupleId::new(k.clone(), *v))? != Outcome::Loss {
                    return Err(CheckError::Mismatch(CoupleId::new(k.clone(), *v)));
                }
            }
            match unknown.pop() {
                None => {
                    let o = if x == 0 { Outcome::Loss } else { Outcome::Win };
                    (
                        o,
                        Evidence::Split {
                            lands: known,
                            rest: None,
                        },
                    )
                }
                Some(k) => {
                    let rest = CoupleId::new(k, x);
                    let o = self.check(&rest)?;
                    (
                        o,
                        Evidence::Split {
                            lands: known,
                            rest: Some(rest),
                        },
                    )
                }
            }
        } else {
            let kids = child_couples(&p, &id.key, id.nim);
            if self.reference.get(&id.key) == Some(id.nim) {
                for c in &kids {
                    if self.check(c)? != Outcome::Win {
                        return Err(CheckError::Mismatch(id.clone()));
                    }
                }
                let mut kids = kids;
                kids.sort();
                (Outcome::Loss, Evidence::All(kids))
            } else {
                let Some(c) = self.pick_losing(kids) else {
                    return Err(CheckError::Insufficient(id.clone()));
                };
                if self.check(&c)? != Outcome::Loss {
                    return Err(CheckError::Mismatch(c));
                }
                (Outcome::Win, Evidence::Via(c))
            }
        };
        self.nodes.insert(
            id.clone(),
            SolutionNode {
                id: id.clone(),
                outcome,
                evidence,
            },
        );
        Ok(outcome)
    }

    /// The losing child with the fewest lives plus nim part, then the
    /// smallest key.
    fn pick_losing(&self, kids: Vec<CoupleId>) -> Option<CoupleId> {
        kids.into_iter()
            .filter(|c| self.table_says_losing(c))
            .min_by_key(|c| (c.position().total_lives() + c.nim, c.clone()))
    }
}

/// Replays the proof of `(root+nim)` against `reference`. Returns the
/// solution tree and the records it relies on.
pub fn check_compute(
    root: &Position,
    nim: u32,
    reference: &Store,
) -> Result<(SolutionTree, Store), CheckError> {
    let root = Couple::new(root, nim);
    let id = CoupleId::new(root.key, nim);
    let mut ch = Checker {
        reference,
        nodes: BTreeMap::new(),
    };
    ch.check(&id)?;
    let tree = SolutionTree {
        root: id,
        nodes: ch.nodes,
    };
    let store = tree.records();
    Ok((tree, store))
}

impl SolutionTree {
    pub fn root_outcome(&self) -> Outcome {
        self.nodes[&self.root].outcome
    }

    /// Losing single-land couples: the records the proof uses.
    pub fn records(&self) -> Store {
        let store = Store::new();
        for n in self.nodes.values() {
            if let Evidence::All(_) = n.evidence {
                store
                    .put(n.id.key.clone(), n.id.nim)
                    .expect("one nimber per land in a consistent tree");
            }
        }
        store
    }

    pub fn to_text(&self) -> String {
        let mut out = String::new();
        writeln!(out, "root {} {}", self.root.key, self.root.nim).unwrap();
        for n in self.nodes.values() {
            write!(out, "{} {} {}", n.id.key, n.id.nim, n.outcome).unwrap();
            match &n.evidence {
                Evidence::End => out.push_str(" end"),
                Evidence::All(cs) => {
                    out.push_str(" all");
                    for c in cs {
                        write!(out, " {} {}", c.key, c.nim).unwrap();
                    }
                }
                Evidence::Via(c) => write!(out, " via {} {}", c.key, c.nim).unwrap(),
                Evidence::Split { lands, rest } => {
                    out.push_str(" split");
                    for (k, v) in lands {
                        write!(out, " {} {}", k, v).unwrap();
                    }
                    out.push_str(" ;");
                    if let Some(r) = rest {
                        write!(out, " {} {}", r.key, r.nim).unwrap();
                    }
                }
            }
            out.push('\n');
        }
        out
    }

    /// Graphviz drawing of the nodes whose position has at least
    /// `min_lives` lives. Losing couples are ellipses and couples with
    /// several lands are boxes. With numbered labels, the second value is
    /// the legend: one `number key nim outcome` line per node.
    pub fn to_dot(&self, min_lives: u32, labels: DotLabels) -> (String, Option<String>) {
        let shown: Vec<&SolutionNode> = self
            .nodes
            .values()
            .filter(|n| n.id.position().total_lives() >= min_lives)
            .collect();
        let index: HashMap<&CoupleId, usize> =
            shown.iter().enumerate().map(|(i, n)| (&n.id, i)).collect();
        let mut dot = String::from("digraph solution {\n");
        let mut legend = String::new();
        for (i, n) in shown.iter().enumerate() {
            let label = match labels {
                DotLabels::Full if n.id.nim == 0 => n.id.key.to_string(),
                DotLabels::Full => format!("{} + {}", n.id.key, n.id.nim),
                DotLabels::Numbers => {
                    writeln!(legend, "{} {} {} {}", i, n.id.key, n.id.nim, n.outcome).unwrap();
                    i.to_string()
                }
            };
            let shape = match (&n.evidence, n.outcome) {
                (Evidence::Split { .. }, _) => "box",
                (_, Outcome::Loss) => "ellipse",
                _ => "plaintext",
            };
            writeln!(dot, "  n{} [label=\"{}\", shape={}];", i, label, shape).unwrap();
        }
        for n in &shown {
            let from = index[&n.id];
            let targets: Vec<CoupleId> = match &n.evidence {
                Evidence::End => vec![],
                Evidence::All(cs) => cs.clone(),
                Evidence::Via(c) => vec![c.clone()],
                Evidence::Split { lands, rest } => lands
                    .iter()
                    .map(|(k, v)| CoupleId::new(k.clone(), *v))
                    .chain(rest.clone())
                    .collect(),
            };
            for t in targets {
                if let Some(to) = index.get(&t) {
                    writeln!(dot, "  n{} -> n{};", from, to).unwrap();
                }
            }
        }
        dot.push_str("}\n");
        let legend = match labels {
            DotLabels::Numbers => Some(legend),
            DotLabels::Full => None,
        };
        (dot, legend)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DotLabels {
    Full,
    Numbers,
}

impl FromStr for DotLabels {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(DotLabels::Full),
            "numbers" | "reference-numbers" => Ok(DotLabels::Numbers),
            _ => Err(format!("unknown label mode {s}")),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("line {line}: {reason}")]
pub struct TreeParseError {
    pub line: usize,
    pub reason: String,
}

impl FromStr for SolutionTree {
    type Err = TreeParseError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut lines = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty());
        let err = |line: usize, reason: &str| TreeParseError {
            line: line + 1,
            reason: reason.to_string(),
        };
        let key = |s: &str| CanonicalKey::from_text_unchecked(s);
        let num = |i: usize, s: &str| s.parse::<u32>().map_err(|_| err(i, "bad number"));
        let (i, first) = lines.next().ok_or_else(|| err(0, "empty solution"))?;
        let f: Vec<&str> = first.split(' ').collect();
        if f.len() != 3 || f[0] != "root" {
            return Err(err(i, "expected `root <key> <nim>`"));
        }
        let root = CoupleId::new(key(f[1]), num(i, f[2])?);
        let mut nodes = BTreeMap::new();
        for (i, line) in lines {
            let f: Vec<&str> = line.split(' ').collect();
            if f.len() < 4 {
                return Err(err(i, "short line"));
            }
            let id = CoupleId::new(key(f[0]), num(i, f[1])?);
            let outcome = match f[2] {
                "Win" => Outcome::Win,
                "Loss" => Outcome::Loss,
                _ => return Err(err(i, "bad outcome")),
            };
            let pairs = |fs: &[&str]| -> Result<Vec<CoupleId>, TreeParseError> {
                if fs.len() % 2 != 0 {
                    return Err(err(i, "odd field count"));
                }
                fs.chunks(2)
                    .map(|c| Ok(CoupleId::new(key(c[0]), num(i, c[1])?)))
                    .collect()
            };
            let evidence = match f[3] {
                "end" => Evidence::End,
                "all" => Evidence::All(pairs(&f[4..])?),
                "via" => {
                    let mut v = pairs(&f[4..])?;
                    if v.len() != 1 {
                        return Err(err(i, "via takes one couple"));
                    }
                    Evidence::Via(v.pop().unwrap())
                }
                "split" => {
                    let semi = f
                        .iter()
                        .position(|&t| t == ";")
                        .ok_or_else(|| err(i, "missing `;`"))?;
                    let lands = pairs(&f[4..semi])?
                        .into_iter()
                        .map(|c| (c.key, c.nim))
                        .collect();
                    let mut rest = pairs(&f[semi + 1..])?;
                    if rest.len() > 1 {
                        return Err(err(i, "at most one remaining couple"));
                    }
                    Evidence::Split {
                        lands,
                        rest: rest.pop(),
                    }
                }
                _ => return Err(err(i, "unknown evidence")),
            };
            nodes.insert(
                id.clone(),
                SolutionNode {
                    id,
                    outcome,
                    evidence,
                },
            );
        }
        Ok(SolutionTree { root, nodes })
    }
}

/// Failures found by [`verify_solution`]; empty means the proof holds.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct VerifyReport {
    pub failures: Vec<String>,
}

impl VerifyReport {
    pub fn passed(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Checks every node of a solution from the rules of the game alone.
pub fn verify_solution(tree: &SolutionTree) -> VerifyReport {
    let mut failures = Vec::new();
    let outcome_of = |id: &CoupleId| tree.nodes.get(id).map(|n| n.outcome);
    if !tree.nodes.contains_key(&tree.root) {
        failures.push(format!("root {} has no node", tree.root));
    }
    for n in tree.nodes.values() {
        let id = &n.id;
        let p = match Position::parse(id.key.as_str()) {
            Ok(p) => p.with_stage(Stage::Simplified),
            Err(e) => {
                failures.push(format!("{id}: {e}"));
                continue;
            }
        };
        if canonical_form(&p).key != id.key {
            failures.push(format!("{id}: key is not canonical"));
            continue;
        }
        let lands = land_keys(&p);
        let expect = |cond: bool, failures: &mut Vec<String>, what: &str| {
            if !cond {
                failures.push(format!("{id}: {what}"));
            }
        };
        match &n.evidence {
            Evidence::End => {
                expect(lands.is_empty(), &mut failures, "end node has lands");
                let o = if id.nim == 0 {
                    Outcome::Loss
                } else {
                    Outcome::Win
                };
                expect(
                    n.outcome == o,
                    &mut failures,
                    "wrong outcome for an empty position",
                );
            }
            Evidence::Split { lands: known, rest } => {
                let mut listed: Vec<CanonicalKey> = known.iter().map(|(k, _)| k.clone()).collect();
                listed.extend(rest.iter().map(|r| r.key.clone()));
                listed.sort();
                let mut actual = lands.clone();
                actual.sort();
                expect(
                    listed == actual,
                    &mut failures,
                    "split does not match the lands",
                );
                let mut x = id.nim;
                for (k, v) in known {
                    x ^= v;
                    let c = CoupleId::new(k.clone(), *v);
                    expect(
                        outcome_of(&c) == Some(Outcome::Loss),
                        &mut failures,
                        &format!("land nimber {c} is not proven"),
                    );
                }
                match rest {
                    Some(r) => {
                        expect(
                            r.nim == x,
                            &mut failures,
                            "remaining couple has the wrong nim part",
                        );
                        expect(
                            outcome_of(r) == Some(n.outcome),
                            &mut failures,
                            "outcome differs from the remaining couple",
                        );
                    }
                    None => {
                        let o = if x == 0 { Outcome::Loss } else { Outcome::Win };
                        expect(
                            n.outcome == o,
                            &mut failures,
                            "outcome differs from the nimber sum",
                        );
                    }
                }
            }
            Evidence::All(listed) => {
                expect(
                    lands.len() == 1,
                    &mut failures,
                    "expanded node is not a single land",
                );
                expect(
                    n.outcome == Outcome::Loss,
                    &mut failures,
                    "full expansion on a winning node",
                );
                let mut want = child_couples(&p, &id.key, id.nim);
                want.sort();
                want.dedup();
                let mut got = listed.clone();
                got.sort();
                got.dedup();
                for c in want.iter().filter(|c| got.binary_search(c).is_err()) {
                    failures.push(format!("{id}: child {c} missing"));
                }
                for c in got.iter().filter(|c| want.binary_search(c).is_err()) {
                    failures.push(format!("{id}: {c} is not a child"));
                }
                for c in &got {
                    if outcome_of(c) != Some(Outcome::Win) {
                        failures.push(format!("{id}: child {c} is not proven winning"));
                    }
                }
            }
            Evidence::Via(c) => {
                expect(
                    lands.len() == 1,
                    &mut failures,
                    "single-child node is not a single land",
                );
                expect(
                    n.outcome == Outcome::Win,
                    &mut failures,
                    "single child on a losing node",
                );
                expect(
                    child_couples(&p, &id.key, id.nim).contains(c),
                    &mut failures,
                    &format!("{c} is not a child"),
                );
                expect(
                    outcome_of(c) == Some(Outcome::Loss),
                    &mut failures,
                    &format!("child {c} is not proven losing"),
                );
            }
        }
    }
    // every referenced couple must be present
    let mut missing = BTreeSet::new();
    for n in tree.nodes.values() {
        let refs: Vec<CoupleId> = match &n.evidence {
            Evidence::End => vec![],
            Evidence::All(cs) => cs.clone(),
            Evidence::Via(c) => vec![c.clone()],
            Evidence::Split { lands, rest } => lands
                .iter()
                .map(|(k, v)| CoupleId::new(k.clone(), *v))
                .chain(rest.clone())
                .collect(),
        };
        for r in refs {
            if !tree.nodes.contains_key(&r) {
                missing.insert(r);
            }
        }
    }
    for m in missing {
        failures.push(format!("{m} has no node"));
    }
    VerifyReport { failures }
}
