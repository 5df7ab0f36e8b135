//! Sprouts solver: position strings, move generation, simplification,
//! canonization and a nimber-aware search engine.

pub mod canon;
pub mod checker;
mod draft;
pub mod engine;
pub mod explore;
pub mod movegen;
pub mod oracle;
pub mod position;
pub mod simplify;
pub mod store;

pub use canon::{
    canonical_form, canonize, canonize_land, compare_strings, Canonical, CanonicalKey,
};
pub use checker::{check_compute, verify_solution, SolutionTree};
pub use engine::{Answer, Couple, Engine, EngineError, Goal, Outcome, Search};
pub use explore::{Command, Session, SessionState};
pub use movegen::{child_keys, children};
pub use oracle::{brute_nimber, brute_outcome, Oracle};
pub use position::{Boundary, Land, ParseError, Position, Region, RenderError, Stage, VertexSym};
pub use simplify::simplify;
pub use store::{Store, StoreError};
