//! Brute-force reference: nimbers by plain mex recursion over whole
//! positions, with no land decomposition and no child ordering.

use std::collections::HashMap;

use thiserror::Error;

use crate::canon::{canonical_form, CanonicalKey};
use crate::engine::Outcome;
use crate::movegen::children;
use crate::position::{Position, Stage};
use crate::simplify::simplify;

pub const DEFAULT_LIVES_BOUND: u32 = 15;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum OracleError {
    #[error("position has {lives} lives, bound is {bound}")]
    TooManyLives { lives: u32, bound: u32 },
}

/// Memoized mex solver.
pub struct Oracle {
    bound: u32,
    memo: HashMap<CanonicalKey, u32>,
}

impl Default for Oracle {
    fn default() -> Oracle {
        Oracle::new(DEFAULT_LIVES_BOUND)
    }
}

impl Oracle {
    pub fn new(bound: u32) -> Oracle {
        Oracle {
            bound,
            memo: HashMap::new(),
        }
    }

    pub fn nimber(&mut self, p: &Position) -> Result<u32, OracleError> {
        let p = if p.stage() == Stage::Simplified {
            p.clone()
        } else {
            simplify(p)
        };
        let lives = p.total_lives();
        if lives > self.bound {
            return Err(OracleError::TooManyLives {
                lives,
                bound: self.bound,
            });
        }
        let c = canonical_form(&p);
        Ok(self.nimber_canonical(&c.position, c.key))
    }

    fn nimber_canonical(&mut self, p: &Position, key: CanonicalKey) -> u32 {
        if let Some(&n) = self.memo.get(&key) {
            return n;
        }
        let mut seen: Vec<u32> = children(p)
            .into_iter()
            .map(|c| {
                let k = CanonicalKey::of_canonical(&c);
                self.nimber_canonical(&c, k)
            })
            .collect();
        seen.sort_unstable();
        seen.dedup();
        let mex = seen
            .iter()
            .enumerate()
            .find(|&(i, &v)| i as u32 != v)
            .map_or(seen.len() as u32, |(i, _)| i as u32);
        self.memo.insert(key, mex);
        mex
    }

    pub fn outcome(&mut self, p: &Position, n: u32) -> Result<Outcome, OracleError> {
        Ok(if self.nimber(p)? == n {
            Outcome::Loss
        } else {
            Outcome::Win
        })
    }

    /// Longest play from `p` to the end of the game.
    pub fn game_length(&mut self, p: &Position) -> Result<u32, OracleError> {
        let p = simplify(p);
        let lives = p.total_lives();
        if lives > self.bound {
            return Err(OracleError::TooManyLives {
                lives,
                bound: self.bound,
            });
        }
        let mut memo = HashMap::new();
        Ok(depth(&canonical_form(&p).position, &mut memo))
    }
}

fn depth(p: &Position, memo: &mut HashMap<CanonicalKey, u32>) -> u32 {
    let key = CanonicalKey::of_canonical(p);
    if let Some(&d) = memo.get(&key) {
        return d;
    }
    let d = children(p)
        .iter()
        .map(|c| 1 + depth(c, memo))
        .max()
        .unwrap_or(0);
    memo.insert(key, d);
    d
}

pub fn brute_nimber(p: &Position) -> Result<u32, OracleError> {
    Oracle::default().nimber(p)
}

pub fn brute_outcome(p: &Position, n: u32) -> Result<Outcome, OracleError> {
    Oracle::default().outcome(p, n)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pos(s: &str) -> Position {
        Position::parse(s).unwrap()
    }

    #[test]
    fn small_values() {
        assert_eq!(brute_nimber(&pos("A.}!")).unwrap(), 0);
        assert_eq!(brute_nimber(&pos("!")).unwrap(), 0);
        assert_eq!(brute_nimber(&pos("ABCD.}ABCD.}]!")).unwrap(), 0);
        assert_eq!(brute_outcome(&pos("22.}]!"), 1).unwrap(), Outcome::Loss);
        assert_eq!(brute_outcome(&pos("22.}]!"), 0).unwrap(), Outcome::Win);
        assert_eq!(brute_outcome(&pos("!"), 0).unwrap(), Outcome::Loss);
    }

    #[test]
    fn lives_bound() {
        assert_eq!(
            Oracle::new(8).nimber(&Position::start(3)),
            Err(OracleError::TooManyLives { lives: 9, bound: 8 })
        );
    }

    #[test]
    fn game_length_bound() {
        for p in 1..=3 {
            let len = Oracle::default().game_length(&Position::start(p)).unwrap();
            assert!(len <= 3 * p as u32 - 1);
        }
    }
}
