//! Alternating quantifier depth of the recursive tree properties `KEIN_s`,
//! checked mechanically with Ehrenfeucht games.
//!
//! * [`tree`] builds the `T1^(s,k,m)` / `T2^(s,k,m)` constructions.
//! * [`canon`] gives canonical codes and root-preserving isomorphisms.
//! * [`logic`] evaluates first-order formulas and the `P_i` properties.
//! * [`game`] holds the three game variants, the exact solver and the
//!   strategy adaptors.
//! * [`strategy`] is the explicit recursive Duplicator strategy.
//! * [`harness`] runs sweeps, formula pools and the end-to-end pipeline.

pub mod canon;
pub mod error;
pub mod game;
pub mod harness;
pub mod logic;
pub mod strategy;
pub mod tree;

pub use error::{GameError, HarnessError, LogicError, StrategyError, TreeError};
pub use tree::{build_construction, NodeId, Role, Tree};
