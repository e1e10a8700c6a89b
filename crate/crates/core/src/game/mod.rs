//! The three Ehrenfeucht game variants, their exact solver, and strategy
//! adaptors between variants.

pub mod adapt;
pub mod rules;
pub mod solver;
pub mod transcript;

pub use adapt::{
    adapt_batches_to_switch_budget, adapt_fixed_to_sizes, BatchSizesAdapter, ConditionReport, ConditionResult,
    Strategy, SwitchBudgetAdapter, VirtualBatches,
};
pub use rules::{
    check_winning, pair_conflict, Board, Condition, GameInstance, GameVariant, Move, PlayState, Violation, WinCheck,
};
pub use solver::{orbit_representatives, solve_minimax, Outcome, Solver, SolverConfig, SolverStrategy, Winner};
pub use transcript::Transcript;
