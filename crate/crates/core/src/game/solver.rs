//! Exact minimax solver with a shared transposition table.

use std::collections::HashMap;
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Arc;

use dashmap::DashMap;
use rayon::prelude::*;
use serde::Serialize;

use crate::canon::IsoClasses;
use crate::error::{GameError, StrategyError};
use crate::game::adapt::Strategy;
use crate::game::rules::{check_winning, pair_conflict, Board, GameInstance, Move, PlayState};
use crate::tree::{NodeId, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Winner {
    Spoiler,
    Duplicator,
}

#[derive(Debug, Clone)]
pub struct SolverConfig {
    pub max_rounds: usize,
    pub max_nodes: usize,
    pub memo_cap: usize,
    /// Skip moves that an automorphism fixing every picked vertex maps onto
    /// an earlier move.
    pub prune_symmetry: bool,
    pub parallel: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig { max_rounds: 6, max_nodes: 200, memo_cap: 10_000_000, prune_symmetry: true, parallel: true }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Key {
    round: u8,
    start: u8,
    current: u8,
    switches: u8,
    pairs: Vec<(u32, u32)>,
}

fn board_code(b: Option<Board>) -> u8 {
    match b {
        None => 0,
        Some(Board::Left) => 1,
        Some(Board::Right) => 2,
    }
}

pub struct Solver {
    instance: GameInstance,
    config: SolverConfig,
    memo: DashMap<Key, bool>,
    explored: AtomicUsize,
    classes: IsoClasses,
}

const CANDIDATE_BIT: u64 = 1 << 63;

/// Lowest-id representative of each orbit of `candidates` under the
/// automorphisms of `tree` that fix every vertex in `marks`.
pub fn orbit_representatives(tree: &Tree, marks: &[NodeId], candidates: &[NodeId]) -> Vec<NodeId> {
    if marks.len() >= 63 {
        return candidates.to_vec();
    }
    let mut mask = vec![0u64; tree.len()];
    for (i, &v) in marks.iter().enumerate() {
        mask[v] |= 1 << i;
    }
    let mut interner: HashMap<(u64, Vec<u32>), u32> = HashMap::new();
    let mut intern = |key: (u64, Vec<u32>)| {
        let next = interner.len() as u32;
        *interner.entry(key).or_insert(next)
    };
    let mut class = vec![0u32; tree.len()];
    for &x in tree.subtree(tree.root()).iter().rev() {
        let mut kids: Vec<u32> = tree.children(x).iter().map(|&c| class[c]).collect();
        kids.sort_unstable();
        class[x] = intern((mask[x], kids));
    }
    let mut seen = std::collections::HashSet::new();
    let mut reps = Vec::new();
    for &v in candidates {
        let mut kids: Vec<u32> = tree.children(v).iter().map(|&c| class[c]).collect();
        kids.sort_unstable();
        let mut cur = intern((mask[v] | CANDIDATE_BIT, kids));
        let mut below = v;
        while let Some(p) = tree.parent(below) {
            let mut kids: Vec<u32> =
                tree.children(p).iter().map(|&c| if c == below { cur } else { class[c] }).collect();
            kids.sort_unstable();
            cur = intern((mask[p], kids));
            below = p;
        }
        if seen.insert(cur) {
            reps.push(v);
        }
    }
    reps
}

impl Solver {
    pub fn new(instance: GameInstance, config: SolverConfig) -> Result<Arc<Self>, GameError> {
        let rounds = instance.total_rounds();
        if rounds > config.max_rounds {
            return Err(GameError::BudgetExceeded(format!(
                "{rounds} rounds exceed the solver bound of {}",
                config.max_rounds
            )));
        }
        for board in [Board::Left, Board::Right] {
            let n = instance.tree(board).len();
            if n > config.max_nodes {
                return Err(GameError::BudgetExceeded(format!(
                    "{board} tree has {n} nodes, bound is {}",
                    config.max_nodes
                )));
            }
        }
        let classes = IsoClasses::new(&[&instance.left, &instance.right]);
        Ok(Arc::new(Solver { instance, config, memo: DashMap::new(), explored: AtomicUsize::new(0), classes }))
    }

    pub fn instance(&self) -> &GameInstance {
        &self.instance
    }

    pub fn states_explored(&self) -> usize {
        self.explored.load(Ordering::Relaxed)
    }

    pub fn memo_len(&self) -> usize {
        self.memo.len()
    }

    fn key(&self, state: &PlayState) -> Key {
        let mut pairs: Vec<(u32, u32)> = state.rounds().iter().map(|&(x, y)| (x as u32, y as u32)).collect();
        pairs.sort_unstable();
        pairs.dedup();
        Key {
            round: state.round_index as u8,
            start: board_code(state.start_board),
            current: board_code(state.current_board),
            switches: state.switches_used as u8,
            pairs,
        }
    }

    fn marks(&self, state: &PlayState, board: Board) -> Vec<NodeId> {
        state.history.iter().map(|&(x, y)| if board == Board::Left { x } else { y }).collect()
    }

    /// Vertices of `board` worth trying, one per symmetry class when pruning.
    fn representatives(&self, state: &PlayState, board: Board) -> Vec<NodeId> {
        let tree = self.instance.tree(board);
        let all: Vec<NodeId> = (0..tree.len()).collect();
        if self.config.prune_symmetry {
            orbit_representatives(tree, &self.marks(state, board), &all)
        } else {
            all
        }
    }

    fn pair_for(mv: Move, reply: NodeId) -> (NodeId, NodeId) {
        match mv.board {
            Board::Left => (mv.vertex, reply),
            Board::Right => (reply, mv.vertex),
        }
    }

    /// Replies to `mv` that do not lose on the spot, most promising first.
    fn candidate_replies(&self, state: &PlayState, mv: Move, reps: &[NodeId]) -> Vec<NodeId> {
        let (l, r) = (&*self.instance.left, &*self.instance.right);
        let reply_board = mv.board.other();
        let src = self.instance.tree(mv.board);
        let dst = self.instance.tree(reply_board);
        let src_class = self.classes.class(mv.board.index(), mv.vertex);
        let mut out: Vec<NodeId> = reps
            .iter()
            .copied()
            .filter(|&w| pair_conflict(l, r, &state.history, Self::pair_for(mv, w)).is_none())
            .collect();
        out.sort_by_key(|&w| {
            let same_class = self.classes.class(reply_board.index(), w) == src_class;
            let same_depth = dst.depth(w) == src.depth(mv.vertex);
            (!same_class, !same_depth, w)
        });
        out
    }

    fn apply(&self, state: &PlayState, mv: Move, reply: NodeId) -> PlayState {
        self.instance.play_round(state, mv, reply).expect("solver only plays legal moves")
    }

    fn reply_wins(&self, state: &PlayState, mv: Move, reps: &[NodeId]) -> bool {
        self.candidate_replies(state, mv, reps).into_iter().any(|w| self.wins(&self.apply(state, mv, w)))
    }

    /// Whether Duplicator wins from `state`, assuming the history so far is
    /// not already violated.
    fn wins(&self, state: &PlayState) -> bool {
        if self.instance.is_over(state) {
            return true;
        }
        let key = self.key(state);
        if let Some(v) = self.memo.get(&key) {
            return *v;
        }
        self.explored.fetch_add(1, Ordering::Relaxed);
        let reps = [self.representatives(state, Board::Left), self.representatives(state, Board::Right)];
        let moves: Vec<Move> = self
            .instance
            .allowed_boards(state)
            .expect("game not over")
            .into_iter()
            .flat_map(|b| reps[b.index()].iter().map(move |&v| Move::new(b, v)))
            .collect();
        let check = |mv: &Move| self.reply_wins(state, *mv, &reps[mv.board.other().index()]);
        let result = if self.config.parallel && state.round_index < 2 {
            moves.par_iter().all(check)
        } else {
            moves.iter().all(check)
        };
        if self.memo.len() < self.config.memo_cap {
            self.memo.insert(key, result);
        }
        result
    }

    /// Exact value of `state` for Duplicator, including an already violated
    /// history.
    pub fn duplicator_wins_from(&self, state: &PlayState) -> bool {
        check_winning(&self.instance.left, &self.instance.right, &state.history).is_satisfied() && self.wins(state)
    }

    /// Lowest-id reply to `mv` from which Duplicator still wins.
    pub fn winning_reply(&self, state: &PlayState, mv: Move) -> Option<NodeId> {
        let (l, r) = (&*self.instance.left, &*self.instance.right);
        (0..self.instance.tree(mv.board.other()).len()).find(|&w| {
            pair_conflict(l, r, &state.history, Self::pair_for(mv, w)).is_none() && self.wins(&self.apply(state, mv, w))
        })
    }

    /// A Spoiler move that wins from `state`, if any.
    pub fn winning_spoiler_move(&self, state: &PlayState) -> Option<Move> {
        if self.instance.is_over(state) {
            return None;
        }
        self.instance.legal_spoiler_moves(state).ok()?.into_iter().find(|&mv| self.winning_reply(state, mv).is_none())
    }

    /// Principal losing line for Duplicator from `state`: Spoiler plays a
    /// winning move, Duplicator the lowest-id reply that does not lose at once,
    /// until the history breaks.
    fn spoiler_line(&self, state: &PlayState) -> Vec<(Move, NodeId)> {
        let (l, r) = (&*self.instance.left, &*self.instance.right);
        let mut state = state.clone();
        let mut line = Vec::new();
        if !check_winning(l, r, &state.history).is_satisfied() {
            return line;
        }
        while let Some(mv) = self.winning_spoiler_move(&state) {
            let n = self.instance.tree(mv.board.other()).len();
            let reply =
                (0..n).find(|&w| pair_conflict(l, r, &state.history, Self::pair_for(mv, w)).is_none()).unwrap_or(0);
            state = self.apply(&state, mv, reply);
            line.push((mv, reply));
            if !check_winning(l, r, &state.history).is_satisfied() {
                break;
            }
        }
        line
    }

    pub fn solve(self: &Arc<Self>) -> Outcome {
        let start = self.instance.initial_state();
        let winner = if self.duplicator_wins_from(&start) { Winner::Duplicator } else { Winner::Spoiler };
        let spoiler_line = (winner == Winner::Spoiler).then(|| self.spoiler_line(&start));
        Outcome { winner, spoiler_line, states_explored: self.states_explored(), solver: Arc::clone(self) }
    }

    pub fn strategy(self: &Arc<Self>) -> SolverStrategy {
        SolverStrategy { solver: Arc::clone(self), state: self.instance.initial_state() }
    }
}

/// Result of an exact solve.
#[derive(Clone)]
pub struct Outcome {
    pub winner: Winner,
    /// For a Spoiler win: Spoiler's moves with the replies they met, ending
    /// at the first violated condition.
    pub spoiler_line: Option<Vec<(Move, NodeId)>>,
    pub states_explored: usize,
    solver: Arc<Solver>,
}

impl std::fmt::Debug for Outcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Outcome")
            .field("winner", &self.winner)
            .field("spoiler_line", &self.spoiler_line)
            .field("states_explored", &self.states_explored)
            .finish()
    }
}

impl Outcome {
    /// Strategy read off the solved table; only for Duplicator wins.
    pub fn duplicator_strategy(&self) -> Option<SolverStrategy> {
        (self.winner == Winner::Duplicator).then(|| self.solver.strategy())
    }

    pub fn solver(&self) -> &Arc<Solver> {
        &self.solver
    }
}

/// Checks budgets, then solves.
pub fn solve_minimax(instance: &GameInstance, config: &SolverConfig) -> Result<Outcome, GameError> {
    Ok(Solver::new(instance.clone(), config.clone())?.solve())
}

/// Plays the lowest-id reply that keeps a won position won.
#[derive(Clone)]
pub struct SolverStrategy {
    solver: Arc<Solver>,
    state: PlayState,
}

impl SolverStrategy {
    pub fn state(&self) -> &PlayState {
        &self.state
    }
}

impl Strategy for SolverStrategy {
    fn respond(&mut self, spoiler: Move) -> Result<NodeId, StrategyError> {
        let allowed = self.solver.instance.allowed_boards(&self.state)?;
        if !allowed.contains(&spoiler.board) || !self.solver.instance.tree(spoiler.board).contains(spoiler.vertex) {
            return Err(GameError::IllegalMove(format!("{spoiler} is not a legal Spoiler move here")).into());
        }
        let reply = self
            .solver
            .winning_reply(&self.state, spoiler)
            .ok_or_else(|| StrategyError::NoWinningReply(spoiler.to_string()))?;
        self.state = self.solver.instance.play_round(&self.state, spoiler, reply)?;
        Ok(reply)
    }

    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }

    fn name(&self) -> String {
        "minimax".into()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::rules::GameVariant;
    use crate::tree::{build_construction, Role};

    fn pair(s: usize, k: usize, m: usize, variant: GameVariant) -> GameInstance {
        let l = Arc::new(build_construction(Role::T1, s, k, m).unwrap());
        let r = Arc::new(build_construction(Role::T2, s, k, m).unwrap());
        GameInstance::new(l, r, variant, vec![]).unwrap()
    }

    #[test]
    fn isomorphic_trees_duplicator() {
        let t = Arc::new(build_construction(Role::T2, 1, 1, 2).unwrap());
        let g = GameInstance::new(t.clone(), t, GameVariant::SwitchBudget { switches: 2, rounds: 3 }, vec![]).unwrap();
        assert_eq!(solve_minimax(&g, &SolverConfig::default()).unwrap().winner, Winner::Duplicator);
    }

    #[test]
    fn base_fixed_batch_duplicator() {
        let g = pair(1, 1, 1, GameVariant::FixedBatches { batches: 1, batch_len: 1 });
        assert_eq!(solve_minimax(&g, &SolverConfig::default()).unwrap().winner, Winner::Duplicator);
    }

    #[test]
    fn one_switch_two_rounds_spoiler() {
        let g = pair(1, 1, 1, GameVariant::SwitchBudget { switches: 1, rounds: 2 });
        let out = solve_minimax(&g, &SolverConfig::default()).unwrap();
        assert_eq!(out.winner, Winner::Spoiler);
        let line = out.spoiler_line.clone().unwrap();
        // replay the line and confirm it ends violated
        let mut st = g.initial_state();
        for &(mv, w) in line.iter() {
            st = g.play_round(&st, mv, w).unwrap();
        }
        assert!(!check_winning(&g.left, &g.right, &st.history).is_satisfied());
        assert!(out.duplicator_strategy().is_none());
    }

    #[test]
    fn pruning_agrees_with_plain_search() {
        for variant in [
            GameVariant::SwitchBudget { switches: 1, rounds: 2 },
            GameVariant::SwitchBudget { switches: 0, rounds: 3 },
            GameVariant::FixedBatches { batches: 2, batch_len: 1 },
        ] {
            let g = pair(1, 2, 2, variant);
            let on = solve_minimax(&g, &SolverConfig::default()).unwrap().winner;
            let off =
                solve_minimax(&g, &SolverConfig { prune_symmetry: false, ..SolverConfig::default() }).unwrap().winner;
            assert_eq!(on, off);
        }
    }

    #[test]
    fn orbits_of_a_star() {
        let star = Tree::from_parents(&[None, Some(0), Some(0), Some(0)]).unwrap();
        assert_eq!(orbit_representatives(&star, &[0], &[0, 1, 2, 3]), vec![0, 1]);
        assert_eq!(orbit_representatives(&star, &[0, 2], &[0, 1, 2, 3]), vec![0, 1, 2]);
    }

    #[test]
    fn budget_errors() {
        let g = pair(1, 1, 1, GameVariant::SwitchBudget { switches: 0, rounds: 7 });
        assert!(matches!(solve_minimax(&g, &SolverConfig::default()), Err(GameError::BudgetExceeded(_))));
        let cfg = SolverConfig { max_nodes: 4, ..SolverConfig::default() };
        let g = pair(1, 1, 1, GameVariant::SwitchBudget { switches: 0, rounds: 1 });
        assert!(matches!(solve_minimax(&g, &cfg), Err(GameError::BudgetExceeded(_))));
    }

    #[test]
    fn extracted_strategy_answers() {
        let g = pair(1, 2, 2, GameVariant::FixedBatches { batches: 1, batch_len: 2 });
        let out = solve_minimax(&g, &SolverConfig::default()).unwrap();
        let mut s = out.duplicator_strategy().unwrap();
        let w = s.respond(Move::right(0)).unwrap();
        assert_eq!(w, 0);
        assert!(s.respond(Move::left(1)).is_err());
    }
}
