use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::GameError;
use crate::tree::{NodeId, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Board {
    Left,
    Right,
}

impl Board {
    pub fn other(self) -> Board {
        match self {
            Board::Left => Board::Right,
            Board::Right => Board::Left,
        }
    }

    pub fn letter(self) -> char {
        match self {
            Board::Left => 'L',
            Board::Right => 'R',
        }
    }

    pub fn index(self) -> usize {
        match self {
            Board::Left => 0,
            Board::Right => 1,
        }
    }
}

impl fmt::Display for Board {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Board::Left => write!(f, "left"),
            Board::Right => write!(f, "right"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Move {
    pub board: Board,
    pub vertex: NodeId,
}

impl Move {
    pub fn new(board: Board, vertex: NodeId) -> Self {
        Move { board, vertex }
    }

    pub fn left(vertex: NodeId) -> Self {
        Move { board: Board::Left, vertex }
    }

    pub fn right(vertex: NodeId) -> Self {
        Move { board: Board::Right, vertex }
    }
}

impl fmt::Display for Move {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.board.letter(), self.vertex)
    }
}

/// The three game variants.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum GameVariant {
    /// `rounds` rounds; Spoiler may change boards at most `switches` times.
    SwitchBudget { switches: usize, rounds: usize },
    /// `batches` batches of `batch_len` rounds, boards alternating per batch.
    FixedBatches { batches: usize, batch_len: usize },
    /// Batches of the given lengths, boards alternating per batch.
    BatchSizes(Vec<usize>),
}

impl GameVariant {
    pub fn validate(&self) -> Result<(), GameError> {
        match self {
            GameVariant::SwitchBudget { switches, rounds } if rounds < switches => Err(GameError::Variant(format!(
                "switch budget needs rounds >= switches (got {switches} switches, {rounds} rounds)"
            ))),
            GameVariant::FixedBatches { batches, batch_len } if *batches == 0 || *batch_len == 0 => {
                Err(GameError::Variant("fixed batches need at least one batch of positive length".into()))
            }
            GameVariant::BatchSizes(sizes) if sizes.is_empty() || sizes.contains(&0) => {
                Err(GameError::Variant("batch sizes must be a nonempty list of positive lengths".into()))
            }
            _ => Ok(()),
        }
    }

    pub fn total_rounds(&self) -> usize {
        match self {
            GameVariant::SwitchBudget { rounds, .. } => *rounds,
            GameVariant::FixedBatches { batches, batch_len } => batches * batch_len,
            GameVariant::BatchSizes(sizes) => sizes.iter().sum(),
        }
    }

    /// 0-based batch containing the 0-based `round`, for batch variants.
    pub fn batch_of(&self, round: usize) -> Option<usize> {
        match self {
            GameVariant::SwitchBudget { .. } => None,
            GameVariant::FixedBatches { batch_len, .. } => Some(round / batch_len),
            GameVariant::BatchSizes(sizes) => {
                let mut end = 0;
                for (b, len) in sizes.iter().enumerate() {
                    end += len;
                    if round < end {
                        return Some(b);
                    }
                }
                Some(sizes.len())
            }
        }
    }

    /// Parses `switch:s,r`, `batch:s,k` or `sizes:i1,i2,...`.
    pub fn parse(text: &str) -> Result<Self, GameError> {
        let (kind, rest) =
            text.split_once(':').ok_or_else(|| GameError::Variant(format!("expected kind:params, got `{text}`")))?;
        let nums: Vec<usize> = rest
            .split(',')
            .map(|p| p.trim().parse::<usize>())
            .collect::<Result<_, _>>()
            .map_err(|e| GameError::Variant(format!("bad number in `{text}`: {e}")))?;
        let v = match (kind, nums.as_slice()) {
            ("switch", [s, r]) => GameVariant::SwitchBudget { switches: *s, rounds: *r },
            ("batch", [s, k]) => GameVariant::FixedBatches { batches: *s, batch_len: *k },
            ("sizes", sizes) => GameVariant::BatchSizes(sizes.to_vec()),
            _ => return Err(GameError::Variant(format!("unrecognised variant `{text}`"))),
        };
        v.validate()?;
        Ok(v)
    }
}

impl fmt::Display for GameVariant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            GameVariant::SwitchBudget { switches, rounds } => {
                write!(f, "switch:{switches},{rounds}")
            }
            GameVariant::FixedBatches { batches, batch_len } => {
                write!(f, "batch:{batches},{batch_len}")
            }
            GameVariant::BatchSizes(sizes) => {
                let parts: Vec<String> = sizes.iter().map(|s| s.to_string()).collect();
                write!(f, "sizes:{}", parts.join(","))
            }
        }
    }
}

/// Two trees, a variant, and pairs fixed before round one.
#[derive(Debug, Clone)]
pub struct GameInstance {
    pub left: Arc<Tree>,
    pub right: Arc<Tree>,
    pub variant: GameVariant,
    pub designated: Vec<(NodeId, NodeId)>,
}

/// Position of a game in progress.
///
/// `history[0]` is the root pair, followed by the designated pairs and then
/// one `(left, right)` pair per round played.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PlayState {
    pub history: Vec<(NodeId, NodeId)>,
    pub prefix: usize,
    pub round_index: usize,
    pub start_board: Option<Board>,
    pub current_board: Option<Board>,
    pub switches_used: usize,
}

impl PlayState {
    /// Pairs chosen in rounds, without roots and designated pairs.
    pub fn rounds(&self) -> &[(NodeId, NodeId)] {
        &self.history[self.prefix..]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Condition {
    /// `pi(x_j) = x_i <=> pi(y_j) = y_i`
    Main1,
    /// `x_i = x_j <=> y_i = y_j`
    Main2,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Violation {
    pub i: usize,
    pub j: usize,
    pub condition: Condition,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WinCheck {
    Satisfied,
    Violated(Violation),
}

impl WinCheck {
    pub fn is_satisfied(&self) -> bool {
        matches!(self, WinCheck::Satisfied)
    }
}

fn relate(left: &Tree, right: &Tree, a: (NodeId, NodeId), b: (NodeId, NodeId)) -> Option<Condition> {
    if (a.0 == b.0) != (a.1 == b.1) {
        return Some(Condition::Main2);
    }
    if (left.parent(b.0) == Some(a.0)) != (right.parent(b.1) == Some(a.1))
        || (left.parent(a.0) == Some(b.0)) != (right.parent(a.1) == Some(b.1))
    {
        return Some(Condition::Main1);
    }
    None
}

/// First violation of Main 1 / Main 2 between `pair` and the pairs already in
/// `history`; `pair` is taken to sit at index `history.len()`.
pub fn pair_conflict(
    left: &Tree,
    right: &Tree,
    history: &[(NodeId, NodeId)],
    pair: (NodeId, NodeId),
) -> Option<Violation> {
    let j = history.len();
    history
        .iter()
        .enumerate()
        .find_map(|(i, &prev)| relate(left, right, prev, pair).map(|condition| Violation { i, j, condition }))
}

/// Checks Main 1 and Main 2 over every index pair of the full history.
pub fn check_winning(left: &Tree, right: &Tree, history: &[(NodeId, NodeId)]) -> WinCheck {
    for j in 0..history.len() {
        if let Some(v) = pair_conflict(left, right, &history[..j], history[j]) {
            return WinCheck::Violated(v);
        }
    }
    WinCheck::Satisfied
}

impl GameInstance {
    pub fn new(
        left: Arc<Tree>,
        right: Arc<Tree>,
        variant: GameVariant,
        designated: Vec<(NodeId, NodeId)>,
    ) -> Result<Self, GameError> {
        variant.validate()?;
        for &(x, y) in &designated {
            if !left.contains(x) {
                return Err(GameError::InvalidVertex { board: Board::Left, vertex: x });
            }
            if !right.contains(y) {
                return Err(GameError::InvalidVertex { board: Board::Right, vertex: y });
            }
        }
        Ok(GameInstance { left, right, variant, designated })
    }

    pub fn tree(&self, board: Board) -> &Tree {
        match board {
            Board::Left => &self.left,
            Board::Right => &self.right,
        }
    }

    pub fn total_rounds(&self) -> usize {
        self.variant.total_rounds()
    }

    pub fn initial_state(&self) -> PlayState {
        let mut history = vec![(self.left.root(), self.right.root())];
        history.extend(self.designated.iter().copied());
        PlayState {
            prefix: history.len(),
            history,
            round_index: 0,
            start_board: None,
            current_board: None,
            switches_used: 0,
        }
    }

    pub fn is_over(&self, state: &PlayState) -> bool {
        state.round_index >= self.total_rounds()
    }

    /// Board a batch variant mandates for the next round (`None` before the
    /// first round or for the switch-budget variant).
    pub fn mandated_board(&self, state: &PlayState) -> Option<Board> {
        let start = state.start_board?;
        let batch = self.variant.batch_of(state.round_index)?;
        Some(if batch % 2 == 0 { start } else { start.other() })
    }

    /// Boards Spoiler may play on next.
    pub fn allowed_boards(&self, state: &PlayState) -> Result<Vec<Board>, GameError> {
        if self.is_over(state) {
            return Err(GameError::GameOver);
        }
        let Some(current) = state.current_board else {
            return Ok(vec![Board::Left, Board::Right]);
        };
        Ok(match &self.variant {
            GameVariant::SwitchBudget { switches, .. } => {
                if state.switches_used < *switches {
                    vec![current, current.other()]
                } else {
                    vec![current]
                }
            }
            _ => vec![self.mandated_board(state).expect("batch variants mandate a board")],
        })
    }

    pub fn legal_spoiler_moves(&self, state: &PlayState) -> Result<Vec<Move>, GameError> {
        let mut out = Vec::new();
        for board in self.allowed_boards(state)? {
            out.extend((0..self.tree(board).len()).map(|v| Move::new(board, v)));
        }
        Ok(out)
    }

    /// Applies one round and returns the new state. The pair is stored as
    /// `(left, right)` whoever picked which.
    pub fn play_round(&self, state: &PlayState, spoiler: Move, duplicator: NodeId) -> Result<PlayState, GameError> {
        if self.is_over(state) {
            return Err(GameError::GameOver);
        }
        if !self.tree(spoiler.board).contains(spoiler.vertex) {
            return Err(GameError::InvalidVertex { board: spoiler.board, vertex: spoiler.vertex });
        }
        let reply_board = spoiler.board.other();
        if !self.tree(reply_board).contains(duplicator) {
            return Err(GameError::IllegalMove(format!(
                "Duplicator must answer on the {reply_board} board, and {duplicator} is not a vertex there"
            )));
        }
        let allowed = self.allowed_boards(state)?;
        if !allowed.contains(&spoiler.board) {
            let reason = match &self.variant {
                GameVariant::SwitchBudget { switches, .. } => {
                    format!("switch budget of {switches} exhausted; Spoiler must stay on the {}", allowed[0])
                }
                _ => format!("this batch must be played on the {} board", allowed[0]),
            };
            return Err(GameError::IllegalMove(reason));
        }
        let mut next = state.clone();
        if let Some(cur) = state.current_board {
            if cur != spoiler.board {
                next.switches_used += 1;
            }
        } else {
            next.start_board = Some(spoiler.board);
        }
        next.current_board = Some(spoiler.board);
        next.round_index += 1;
        next.history.push(match spoiler.board {
            Board::Left => (spoiler.vertex, duplicator),
            Board::Right => (duplicator, spoiler.vertex),
        });
        Ok(next)
    }

    /// Like [`GameInstance::play_round`] but takes the reply as a move, so a
    /// reply on the wrong board is reported.
    pub fn play_moves(&self, state: &PlayState, spoiler: Move, reply: Move) -> Result<PlayState, GameError> {
        if reply.board == spoiler.board {
            return Err(GameError::IllegalMove(format!(
                "Duplicator must answer on the other board, not the {} board Spoiler used",
                spoiler.board
            )));
        }
        self.play_round(state, spoiler, reply.vertex)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{build_construction, Role};

    fn base_pair(variant: GameVariant) -> GameInstance {
        let l = Arc::new(build_construction(Role::T1, 1, 1, 1).unwrap());
        let r = Arc::new(build_construction(Role::T2, 1, 1, 1).unwrap());
        GameInstance::new(l, r, variant, vec![]).unwrap()
    }

    #[test]
    fn first_round_any_board() {
        for v in [
            GameVariant::SwitchBudget { switches: 0, rounds: 1 },
            GameVariant::FixedBatches { batches: 1, batch_len: 1 },
            GameVariant::BatchSizes(vec![1]),
        ] {
            let g = base_pair(v);
            assert_eq!(g.legal_spoiler_moves(&g.initial_state()).unwrap().len(), 9);
        }
    }

    #[test]
    fn zero_switches_stay_put() {
        let g = base_pair(GameVariant::SwitchBudget { switches: 0, rounds: 2 });
        let s = g.play_round(&g.initial_state(), Move::left(1), 1).unwrap();
        let moves = g.legal_spoiler_moves(&s).unwrap();
        assert!(moves.iter().all(|m| m.board == Board::Left));
        let err = g.play_round(&s, Move::right(1), 1).unwrap_err();
        assert!(matches!(err, GameError::IllegalMove(_)));
    }

    #[test]
    fn fixed_batches_force_switch() {
        let g = base_pair(GameVariant::FixedBatches { batches: 2, batch_len: 1 });
        let s = g.play_round(&g.initial_state(), Move::right(1), 1).unwrap();
        let moves = g.legal_spoiler_moves(&s).unwrap();
        assert_eq!(moves.len(), 5);
        assert!(moves.iter().all(|m| m.board == Board::Left));
    }

    #[test]
    fn pairs_stored_left_right() {
        let g = base_pair(GameVariant::SwitchBudget { switches: 1, rounds: 2 });
        // T2 ids: root 0, v1 = 1 (child 2), v2 = 3
        let s = g.play_round(&g.initial_state(), Move::right(3), 1).unwrap();
        assert_eq!(s.history, vec![(0, 0), (1, 3)]);
        assert_eq!(check_winning(&g.left, &g.right, &s.history), WinCheck::Satisfied);
        // Spoiler switches and takes the child of u1; Duplicator has nothing under v2
        let s2 = g.play_round(&s, Move::left(2), 1).unwrap();
        match check_winning(&g.left, &g.right, &s2.history) {
            WinCheck::Violated(v) => {
                assert_eq!((v.i, v.j, v.condition), (0, 2, Condition::Main1));
            }
            WinCheck::Satisfied => panic!("expected a violation"),
        }
    }

    #[test]
    fn reply_on_same_board_rejected() {
        let g = base_pair(GameVariant::SwitchBudget { switches: 1, rounds: 2 });
        let err = g.play_moves(&g.initial_state(), Move::left(1), Move::left(3)).unwrap_err();
        assert!(matches!(err, GameError::IllegalMove(_)));
    }

    #[test]
    fn switch_budget_exhausted() {
        let g = base_pair(GameVariant::SwitchBudget { switches: 1, rounds: 3 });
        let s = g.play_round(&g.initial_state(), Move::left(1), 1).unwrap();
        let s = g.play_round(&s, Move::right(1), 1).unwrap();
        assert_eq!(s.switches_used, 1);
        assert!(matches!(g.play_round(&s, Move::left(1), 1), Err(GameError::IllegalMove(_))));
    }

    #[test]
    fn roots_only_satisfied() {
        let g = base_pair(GameVariant::SwitchBudget { switches: 0, rounds: 1 });
        assert!(check_winning(&g.left, &g.right, &g.initial_state().history).is_satisfied());
    }

    #[test]
    fn game_over() {
        let g = base_pair(GameVariant::BatchSizes(vec![1]));
        let s = g.play_round(&g.initial_state(), Move::left(0), 0).unwrap();
        assert_eq!(g.legal_spoiler_moves(&s), Err(GameError::GameOver));
    }

    #[test]
    fn variant_parsing() {
        assert_eq!(GameVariant::parse("switch:1,2").unwrap(), GameVariant::SwitchBudget { switches: 1, rounds: 2 });
        assert_eq!(GameVariant::parse("sizes:1,2,1").unwrap(), GameVariant::BatchSizes(vec![1, 2, 1]));
        assert!(GameVariant::parse("switch:3,2").is_err());
        assert!(GameVariant::parse("batch:0,2").is_err());
        assert!(GameVariant::parse("sizes:1,0").is_err());
        assert!(GameVariant::parse("nope:1").is_err());
        let v = GameVariant::FixedBatches { batches: 2, batch_len: 3 };
        assert_eq!(GameVariant::parse(&v.to_string()).unwrap(), v);
    }

    #[test]
    fn batch_sizes_boards() {
        let g = base_pair(GameVariant::BatchSizes(vec![2, 1]));
        let s = g.play_round(&g.initial_state(), Move::left(1), 1).unwrap();
        assert_eq!(g.allowed_boards(&s).unwrap(), vec![Board::Left]);
        let s = g.play_round(&s, Move::left(3), 3).unwrap();
        assert_eq!(g.allowed_boards(&s).unwrap(), vec![Board::Right]);
    }
}
