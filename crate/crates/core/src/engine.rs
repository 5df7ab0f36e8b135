//! Couple search. A couple `(P+n)` is a position plus a nim heap of size `n`;
//! it is losing exactly when the nimber of `P` is `n`.
//!
//! Lands of `P` with a known nimber are folded into `n`. All other lands but
//! one get their nimber computed (smallest lives first) and folded as well.
//! The remaining single-land couple `(L+n)` is searched depth-first over
//! its children `(child(L)+n)` and `(L+m)` for `m < n`. Every losing
//! single-land couple is written to the store.
//!
//! The search is an explicit stack machine ([`Search`]) so that a driver can
//! inspect it and reorder pending work between two steps.

use std::collections::HashMap;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::canon::{canonical_form, CanonicalKey};
use crate::movegen::children;
use crate::position::{Position, Stage};
use crate::simplify::simplify;
use crate::store::{Store, StoreError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Outcome {
    Win,
    Loss,
}

impl fmt::Display for Outcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Outcome::Win => "Win",
            Outcome::Loss => "Loss",
        })
    }
}

#[derive(Debug, Error)]
pub enum EngineError {
    #[error("node budget of {0} exhausted")]
    Budget(u64),
    #[error("no nimber up to {cap} found for {land}")]
    NimberCap { land: CanonicalKey, cap: u32 },
    #[error(transparent)]
    Store(#[from] StoreError),
}

/// A position in canonical form with a nim heap.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Couple {
    pub position: Position,
    pub key: CanonicalKey,
    pub nim: u32,
}

impl Couple {
    /// Simplifies and canonizes `p`.
    pub fn new(p: &Position, nim: u32) -> Couple {
        let p = if p.stage() == Stage::Simplified {
            p.clone()
        } else {
            simplify(p)
        };
        let c = canonical_form(&p);
        Couple {
            position: c.position,
            key: c.key,
            nim,
        }
    }
}

impl fmt::Display for Couple {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}+{})", self.key, self.nim)
    }
}

/// Estimated number of children of a simplified position: per region, each
/// boundary of `k` occurrences contributes `k² · 2^(B-1)` and each pair of
/// boundaries the product of their occurrence counts.
pub fn estimate_children(p: &Position) -> u64 {
    let mut total = 0u64;
    for land in p.lands() {
        for region in &land.regions {
            let occ: Vec<u64> = region
                .boundaries
                .iter()
                .map(|b| b.symbols.len() as u64)
                .collect();
            let others = 1u64 << (occ.len().saturating_sub(1)).min(40);
            for (i, &a) in occ.iter().enumerate() {
                total += a * a * others;
                for &b in &occ[i + 1..] {
                    total += a * b;
                }
            }
        }
    }
    total
}

/// A child couple with the data used to order it.
#[derive(Debug, Clone)]
pub struct Child {
    pub position: Position,
    pub key: CanonicalKey,
    pub nim: u32,
    pub lives: u32,
    pub lands: usize,
    pub estimate: u64,
    /// Keys of the lands.
    pub parts: Arc<[CanonicalKey]>,
}

impl Child {
    fn of(position: Position, key: CanonicalKey, nim: u32) -> Child {
        Child {
            lives: position.total_lives(),
            lands: position.land_count(),
            estimate: estimate_children(&position),
            parts: land_schedule(&position)
                .into_iter()
                .map(|l| l.key)
                .collect(),
            position,
            key,
            nim,
        }
    }

    pub fn couple(&self) -> Couple {
        Couple {
            position: self.position.clone(),
            key: self.key.clone(),
            nim: self.nim,
        }
    }
}

/// Sorts by lives plus nim part, then more lands first, then fewer estimated
/// children, then key.
pub fn order_children(cs: &mut [Child]) {
    cs.sort_by(|a, b| {
        (a.lives + a.nim)
            .cmp(&(b.lives + b.nim))
            .then(b.lands.cmp(&a.lands))
            .then(a.estimate.cmp(&b.estimate))
            .then_with(|| a.key.cmp(&b.key))
            .then(a.nim.cmp(&b.nim))
    });
}

/// Position children of a canonical single land, cached by key.
#[derive(Default)]
pub struct ChildCache {
    map: HashMap<CanonicalKey, Arc<Vec<Child>>>,
    limit: usize,
}

impl ChildCache {
    pub fn new(limit: usize) -> ChildCache {
        ChildCache {
            map: HashMap::new(),
            limit,
        }
    }

    fn get(&mut self, land: &Land1) -> Arc<Vec<Child>> {
        if let Some(c) = self.map.get(&land.key) {
            return c.clone();
        }
        let kids: Vec<Child> = children(&land.position)
            .into_iter()
            .map(|p| {
                let key = CanonicalKey::of_canonical(&p);
                Child::of(p, key, 0)
            })
            .collect();
        let kids = Arc::new(kids);
        if self.map.len() >= self.limit {
            self.map.clear();
        }
        self.map.insert(land.key.clone(), kids.clone());
        kids
    }
}

/// Ordered children of the single-land couple `(land+n)`.
pub fn couple_children(land: &Position, n: u32) -> Vec<Child> {
    let mut cache = ChildCache::new(1);
    let l = Land1::of(land);
    couple_children_cached(&l, n, &mut cache)
}

fn couple_children_cached(land: &Land1, n: u32, cache: &mut ChildCache) -> Vec<Child> {
    let mut out: Vec<Child> = cache
        .get(land)
        .iter()
        .map(|c| Child {
            nim: n,
            ..c.clone()
        })
        .collect();
    for m in 0..n {
        out.push(Child {
            position: land.position.clone(),
            key: land.key.clone(),
            nim: m,
            lives: land.lives,
            lands: 1,
            estimate: estimate_children(&land.position),
            parts: Arc::from([land.key.clone()]),
        });
    }
    order_children(&mut out);
    out
}

/// Moves the first untried child that the table alone shows losing to
/// `next`.
fn promote_known_loss(store: &Store, children: &mut [Child], next: usize) {
    let decided = |c: &Child| {
        let mut acc = c.nim;
        for k in c.parts.iter() {
            match store.get(k) {
                Some(v) => acc ^= v,
                None => return false,
            }
        }
        acc == 0
    };
    if let Some(i) = children[next..].iter().position(decided) {
        children[next..=next + i].rotate_right(1);
    }
}

/// A canonical single land.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Land1 {
    pub position: Position,
    pub key: CanonicalKey,
    pub lives: u32,
}

impl Land1 {
    /// `p` must be a canonical single-land position.
    fn of(p: &Position) -> Land1 {
        Land1 {
            key: CanonicalKey::of_canonical(p),
            lives: p.total_lives(),
            position: p.clone(),
        }
    }
}

/// Lands of a canonical position sorted by lives then key. Each land of a
/// canonical position is itself canonical.
pub fn land_schedule(p: &Position) -> Vec<Land1> {
    let mut lands: Vec<Land1> = p
        .lands()
        .iter()
        .map(|l| Land1::of(&Position::new(vec![l.clone()], Stage::Simplified)))
        .collect();
    lands.sort_by(|a, b| a.lives.cmp(&b.lives).then_with(|| a.key.cmp(&b.key)));
    lands
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Value {
    Outcome(Outcome),
    Nimber(u32),
}

#[derive(Debug)]
enum CoupleStage {
    /// Lands still to resolve. Unless `whole`, the last one is kept in the
    /// couple and searched; the others get their nimber computed, first
    /// entry first.
    Lands {
        pending: Vec<Land1>,
        done: usize,
        whole: bool,
    },
    Children {
        land: Land1,
        n: u32,
        children: Vec<Child>,
        next: usize,
    },
}

#[derive(Debug)]
struct CoupleFrame {
    couple: Couple,
    /// Nim part after folding in resolved lands.
    acc: u32,
    /// Pushed while looking for a land's nimber.
    trial: bool,
    stage: CoupleStage,
}

#[derive(Debug)]
struct NimberFrame {
    land: Land1,
    k: u32,
}

#[derive(Debug)]
enum Frame {
    Couple(CoupleFrame),
    Nimber(NimberFrame),
}

/// What the search is asked to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Goal {
    Outcome(u32),
    Nimber,
}

/// Result of a finished search.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Answer {
    pub outcome: Outcome,
    pub nimber: Option<u32>,
}

enum Action {
    Nothing,
    Open(Frame),
    Done(Value),
}

fn couple_frame(store: &Store, couple: Couple, trial: bool, whole: bool) -> CoupleFrame {
    let mut acc = couple.nim;
    let mut pending = Vec::new();
    for land in land_schedule(&couple.position) {
        match store.get(&land.key) {
            Some(v) => acc ^= v,
            None => pending.push(land),
        }
    }
    CoupleFrame {
        couple,
        acc,
        trial,
        stage: CoupleStage::Lands {
            pending,
            done: 0,
            whole,
        },
    }
}

const WIN_LIMIT: usize = 2_000_000;

fn known_win(wins: &HashMap<CanonicalKey, u64>, key: &CanonicalKey, n: u32) -> bool {
    n < 64 && wins.get(key).is_some_and(|m| m & (1 << n) != 0)
}

/// Resumable search over an explicit stack.
pub struct Search {
    store: Arc<Store>,
    stack: Vec<Frame>,
    cache: ChildCache,
    /// Single lands known to differ from certain nimbers, as bit sets.
    wins: HashMap<CanonicalKey, u64>,
    nodes: u64,
    budget: Option<u64>,
    answer: Option<Answer>,
    goal: Goal,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StepResult {
    Running,
    Done(Answer),
}

impl Search {
    pub fn new(store: Arc<Store>, root: &Position, goal: Goal) -> Search {
        let nim = match goal {
            Goal::Outcome(n) => n,
            Goal::Nimber => 0,
        };
        let couple = Couple::new(root, nim);
        let mut s = Search {
            store,
            stack: Vec::new(),
            cache: ChildCache::new(200_000),
            wins: HashMap::new(),
            nodes: 0,
            budget: None,
            answer: None,
            goal,
        };
        let frame = couple_frame(&s.store, couple, false, goal == Goal::Nimber);
        s.stack.push(Frame::Couple(frame));
        s.nodes = 1;
        s
    }

    pub fn with_budget(mut self, budget: Option<u64>) -> Search {
        self.budget = budget;
        self
    }

    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    pub fn answer(&self) -> Option<Answer> {
        self.answer
    }

    pub fn goal(&self) -> Goal {
        self.goal
    }

    pub fn store(&self) -> &Arc<Store> {
        &self.store
    }

    /// Runs until the answer is known.
    pub fn run(&mut self) -> Result<Answer, EngineError> {
        loop {
            if let StepResult::Done(a) = self.step()? {
                return Ok(a);
            }
        }
    }

    /// Advances until one new couple has been opened or the search ends.
    pub fn step(&mut self) -> Result<StepResult, EngineError> {
        if let Some(a) = self.answer {
            return Ok(StepResult::Done(a));
        }
        let start = self.nodes;
        while self.nodes == start {
            if let Some(a) = self.advance()? {
                return Ok(StepResult::Done(a));
            }
        }
        Ok(StepResult::Running)
    }

    fn open(&mut self, frame: Frame) -> Result<(), EngineError> {
        if let Some(b) = self.budget {
            if self.nodes >= b {
                return Err(EngineError::Budget(b));
            }
        }
        if matches!(frame, Frame::Couple(_)) {
            self.nodes += 1;
        }
        self.stack.push(frame);
        Ok(())
    }

    /// Performs one transition of the top frame.
    fn advance(&mut self) -> Result<Option<Answer>, EngineError> {
        let store = &self.store;
        let cache = &mut self.cache;
        let wins = &self.wins;
        let top = self.stack.len() - 1;
        let action = match &mut self.stack[top] {
            Frame::Nimber(f) => {
                if let Some(v) = store.get(&f.land.key) {
                    Action::Done(Value::Nimber(v))
                } else if f.k > f.land.lives {
                    return Err(EngineError::NimberCap {
                        land: f.land.key.clone(),
                        cap: f.land.lives,
                    });
                } else {
                    let couple = Couple {
                        position: f.land.position.clone(),
                        key: f.land.key.clone(),
                        nim: f.k,
                    };
                    Action::Open(Frame::Couple(couple_frame(store, couple, true, false)))
                }
            }
            Frame::Couple(f) => match &mut f.stage {
                CoupleStage::Lands {
                    pending,
                    done,
                    whole,
                } => {
                    // a land may have been stored since scheduling
                    while let Some(v) = pending.first().and_then(|l| store.get(&l.key)) {
                        f.acc ^= v;
                        pending.remove(0);
                        *done += 1;
                    }
                    if pending.is_empty() {
                        Action::Done(if *whole {
                            Value::Nimber(f.acc)
                        } else if f.acc == 0 {
                            Value::Outcome(Outcome::Loss)
                        } else {
                            Value::Outcome(Outcome::Win)
                        })
                    } else if pending.len() == 1 && !*whole {
                        let land = pending.pop().unwrap();
                        let n = f.acc;
                        let mut children = couple_children_cached(&land, n, cache);
                        promote_known_loss(store, &mut children, 0);
                        f.stage = CoupleStage::Children {
                            land,
                            n,
                            children,
                            next: 0,
                        };
                        Action::Nothing
                    } else {
                        Action::Open(Frame::Nimber(NimberFrame {
                            land: pending[0].clone(),
                            k: 0,
                        }))
                    }
                }
                CoupleStage::Children {
                    land,
                    n,
                    children,
                    next,
                } => {
                    if let Some(v) = store.get(&land.key) {
                        Action::Done(Value::Outcome(if v == *n {
                            Outcome::Loss
                        } else {
                            Outcome::Win
                        }))
                    } else if known_win(wins, &land.key, *n) {
                        Action::Done(Value::Outcome(Outcome::Win))
                    } else if *next < children.len() {
                        let couple = children[*next].couple();
                        Action::Open(Frame::Couple(couple_frame(store, couple, false, false)))
                    } else {
                        store.put(land.key.clone(), *n)?;
                        Action::Done(Value::Outcome(Outcome::Loss))
                    }
                }
            },
        };
        match action {
            Action::Nothing => Ok(None),
            Action::Open(frame) => {
                self.open(frame)?;
                Ok(None)
            }
            Action::Done(v) => {
                self.stack.pop();
                Ok(self.deliver(v))
            }
        }
    }

    fn deliver(&mut self, v: Value) -> Option<Answer> {
        let Some(parent) = self.stack.last_mut() else {
            let answer = match v {
                Value::Nimber(k) => Answer {
                    outcome: if k == 0 { Outcome::Loss } else { Outcome::Win },
                    nimber: Some(k),
                },
                Value::Outcome(o) => Answer {
                    outcome: o,
                    nimber: None,
                },
            };
            self.answer = Some(answer);
            return Some(answer);
        };
        match (parent, v) {
            (Frame::Nimber(f), Value::Outcome(o)) => match o {
                Outcome::Loss => {
                    let k = f.k;
                    self.stack.pop();
                    return self.deliver(Value::Nimber(k));
                }
                Outcome::Win => f.k += 1,
            },
            (Frame::Couple(f), Value::Nimber(k)) => {
                f.acc ^= k;
                if let CoupleStage::Lands { pending, done, .. } = &mut f.stage {
                    pending.remove(0);
                    *done += 1;
                }
            }
            (Frame::Couple(f), Value::Outcome(o)) => {
                if let CoupleStage::Children {
                    next,
                    land,
                    n,
                    children,
                } = &mut f.stage
                {
                    match o {
                        Outcome::Loss => {
                            if *n < 64 {
                                if self.wins.len() >= WIN_LIMIT {
                                    self.wins.clear();
                                }
                                *self.wins.entry(land.key.clone()).or_default() |= 1 << *n;
                            }
                            self.stack.pop();
                            return self.deliver(Value::Outcome(Outcome::Win));
                        }
                        Outcome::Win => {
                            *next += 1;
                            promote_known_loss(&self.store, children, *next);
                        }
                    }
                }
            }
            (Frame::Nimber(_), Value::Nimber(_)) => unreachable!("nimber frames only open couples"),
        }
        None
    }

    /// Frames that show as levels: the couples, outermost first, with
    /// their stack index.
    fn couple_frames(&self) -> Vec<usize> {
        self.stack
            .iter()
            .enumerate()
            .filter(|(_, f)| matches!(f, Frame::Couple(_)))
            .map(|(i, _)| i)
            .collect()
    }

    /// The couples under study, outermost first (level 1 is the root).
    pub fn levels(&self) -> Vec<Level> {
        self.couple_frames()
            .into_iter()
            .enumerate()
            .map(|(i, idx)| {
                let Frame::Couple(f) = &self.stack[idx] else {
                    unreachable!()
                };
                let (position, nimber_part, phase, tried, total) = match &f.stage {
                    CoupleStage::Lands { pending, done, .. } => (
                        f.couple.key.to_string(),
                        f.couple.nim,
                        Phase::Lands,
                        *done,
                        done + pending.len(),
                    ),
                    CoupleStage::Children {
                        land,
                        n,
                        children,
                        next,
                    } => (
                        land.key.to_string(),
                        *n,
                        if f.trial {
                            Phase::TryingNimber
                        } else {
                            Phase::Expanding
                        },
                        *next,
                        children.len(),
                    ),
                };
                Level {
                    level: i + 1,
                    position,
                    nimber_part,
                    phase,
                    tried,
                    total,
                }
            })
            .collect()
    }

    /// Untried children of a level, the one in progress first.
    pub fn untried_children(&self, level: usize) -> Result<Vec<String>, SteerError> {
        let idx = self.level_index(level)?;
        match &self.stack[idx] {
            Frame::Couple(CoupleFrame {
                stage: CoupleStage::Children { children, next, .. },
                ..
            }) => Ok(children[*next..]
                .iter()
                .map(|c| format!("{}+{}", c.key, c.nim))
                .collect()),
            _ => Err(SteerError::NotExpanding(level)),
        }
    }

    /// Lands of a level whose nimber is not known yet, the one in
    /// progress first. Unless the level is a nimber query, the last one is
    /// the land kept for the search.
    pub fn pending_lands(&self, level: usize) -> Result<Vec<String>, SteerError> {
        let idx = self.level_index(level)?;
        match &self.stack[idx] {
            Frame::Couple(CoupleFrame {
                stage: CoupleStage::Lands { pending, .. },
                ..
            }) => Ok(pending.iter().map(|l| l.key.to_string()).collect()),
            _ => Err(SteerError::NotInLands(level)),
        }
    }

    fn level_index(&self, level: usize) -> Result<usize, SteerError> {
        let frames = self.couple_frames();
        if level == 0 || level > frames.len() {
            return Err(SteerError::Stale(level));
        }
        Ok(frames[level - 1])
    }

    /// Continues the search at `level` with its untried child `ordinal`
    /// (0 is the child in progress, which makes this a no-op).
    pub fn redirect_child(&mut self, level: usize, ordinal: usize) -> Result<(), SteerError> {
        let idx = self.level_index(level)?;
        let Frame::Couple(CoupleFrame {
            stage: CoupleStage::Children { children, next, .. },
            ..
        }) = &mut self.stack[idx]
        else {
            return Err(SteerError::NotExpanding(level));
        };
        let untried = children.len() - *next;
        if ordinal >= untried {
            return Err(SteerError::OutOfRange {
                ordinal,
                len: untried,
            });
        }
        if ordinal == 0 {
            return Ok(());
        }
        let chosen = children.remove(*next + ordinal);
        children.insert(*next, chosen);
        self.stack.truncate(idx + 1);
        Ok(())
    }

    /// Computes the nimber of pending land `ordinal` of `level` first.
    pub fn redirect_land(&mut self, level: usize, ordinal: usize) -> Result<(), SteerError> {
        let idx = self.level_index(level)?;
        let Frame::Couple(CoupleFrame {
            stage: CoupleStage::Lands { pending, .. },
            ..
        }) = &mut self.stack[idx]
        else {
            return Err(SteerError::NotInLands(level));
        };
        if pending.len() < 2 {
            return Err(SteerError::NoLandChoice(level));
        }
        if ordinal >= pending.len() {
            return Err(SteerError::OutOfRange {
                ordinal,
                len: pending.len(),
            });
        }
        if ordinal == 0 {
            return Ok(());
        }
        let chosen = pending.remove(ordinal);
        pending.insert(0, chosen);
        self.stack.truncate(idx + 1);
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Phase {
    /// Computing the nimbers of all lands but one.
    Lands,
    Expanding,
    /// Expanding a couple `(L+k)` while looking for the nimber of `L`.
    TryingNimber,
}

/// One row of the search stack.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct Level {
    pub level: usize,
    pub position: String,
    pub nimber_part: u32,
    pub phase: Phase,
    pub tried: usize,
    pub total: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SteerError {
    #[error("level {0} is no longer on the stack")]
    Stale(usize),
    #[error("level {0} is not expanding children")]
    NotExpanding(usize),
    #[error("level {0} is not scheduling lands")]
    NotInLands(usize),
    #[error("level {0} has a single land left")]
    NoLandChoice(usize),
    #[error("ordinal {ordinal} out of range ({len} choices)")]
    OutOfRange { ordinal: usize, len: usize },
}

/// Blocking front end over [`Search`].
pub struct Engine {
    store: Arc<Store>,
    budget: Option<u64>,
    nodes: u64,
}

impl Engine {
    pub fn new(store: Arc<Store>) -> Engine {
        Engine {
            store,
            budget: None,
            nodes: 0,
        }
    }

    pub fn with_budget(mut self, budget: Option<u64>) -> Engine {
        self.budget = budget;
        self
    }

    pub fn store(&self) -> &Arc<Store> {
        &self.store
    }

    /// Couples opened by all queries so far.
    pub fn nodes(&self) -> u64 {
        self.nodes
    }

    fn run(&mut self, p: &Position, goal: Goal) -> Result<Answer, EngineError> {
        let mut s = Search::new(self.store.clone(), p, goal).with_budget(self.budget);
        let r = s.run();
        self.nodes += s.nodes();
        r
    }

    /// Outcome of `(p+n)`.
    pub fn outcome(&mut self, p: &Position, n: u32) -> Result<Outcome, EngineError> {
        self.run(p, Goal::Outcome(n)).map(|a| a.outcome)
    }

    /// Nimber of `p`: the XOR of its lands' nimbers.
    pub fn nimber(&mut self, p: &Position) -> Result<u32, EngineError> {
        Ok(self
            .run(p, Goal::Nimber)?
            .nimber
            .expect("nimber goal yields a nimber"))
    }
}
