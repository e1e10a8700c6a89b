use thiserror::Error;

use crate::game::Board;
use crate::tree::NodeId;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("parameter violation: {0}")]
    Parameter(String),
    #[error("invalid node id {0}")]
    InvalidNode(NodeId),
    #[error("subtrees rooted at {0} and {1} are not isomorphic")]
    NotIsomorphic(NodeId, NodeId),
    #[error("parse error: {0}")]
    Parse(String),
    #[error("structural error: {0}")]
    Structure(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum LogicError {
    #[error("unbound variable `{0}`")]
    UnboundVariable(String),
    #[error("invalid vertex {0} in assignment")]
    InvalidVertex(NodeId),
    #[error("formula syntax error at offset {offset}: {message}")]
    Syntax { offset: usize, message: String },
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GameError {
    #[error("invalid game variant: {0}")]
    Variant(String),
    #[error("the game is already over")]
    GameOver,
    #[error("illegal move: {0}")]
    IllegalMove(String),
    #[error("vertex {vertex} does not exist on the {board} board")]
    InvalidVertex { board: Board, vertex: NodeId },
    #[error("solver budget exceeded: {0}")]
    BudgetExceeded(String),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum StrategyError {
    #[error("strategy desynchronised: {0}")]
    Desync(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("no free top-level child left: {0}")]
    NoFreeChild(String),
    #[error("strategy violated: {0}")]
    Violated(String),
    #[error("no winning reply to {0}")]
    NoWinningReply(String),
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Tree(#[from] TreeError),
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum HarnessError {
    #[error("sweep of {estimate} lines exceeds the limit of {limit}")]
    LimitExceeded { estimate: u128, limit: u128 },
    #[error("step `{step}` failed: {message}")]
    Step { step: String, message: String },
    #[error(transparent)]
    Game(#[from] GameError),
    #[error(transparent)]
    Strategy(#[from] StrategyError),
    #[error(transparent)]
    Tree(#[from] TreeError),
    #[error(transparent)]
    Logic(#[from] LogicError),
}
