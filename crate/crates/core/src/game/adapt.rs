//! Duplicator strategies as objects, and the replay adaptors that turn a
//! fixed-batch strategy into a switch-budget or batch-sizes strategy.

use serde::Serialize;

use crate::error::StrategyError;
use crate::game::rules::{Board, GameVariant, Move};
use crate::tree::NodeId;

/// Outcome of one labelled condition in a self-check.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConditionResult {
    pub label: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize)]
pub struct ConditionReport {
    pub results: Vec<ConditionResult>,
}

impl ConditionReport {
    pub fn push(&mut self, label: impl Into<String>, failure: Option<String>) {
        self.results.push(ConditionResult { label: label.into(), passed: failure.is_none(), detail: failure });
    }

    pub fn all_pass(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &ConditionResult> {
        self.results.iter().filter(|r| !r.passed)
    }

    /// Appends another report with its labels prefixed.
    pub fn absorb(&mut self, prefix: &str, other: ConditionReport) {
        for mut r in other.results {
            r.label = format!("{prefix}{}", r.label);
            self.results.push(r);
        }
    }
}

/// A deterministic Duplicator: given Spoiler's move, name the reply on the
/// other board. Implementations keep whatever state they need between calls.
pub trait Strategy: Send {
    fn respond(&mut self, spoiler: Move) -> Result<NodeId, StrategyError>;

    fn box_clone(&self) -> Box<dyn Strategy>;

    /// Short identifier used in reports.
    fn name(&self) -> String;

    fn selfcheck(&self) -> Option<ConditionReport> {
        None
    }
}

impl Clone for Box<dyn Strategy> {
    fn clone(&self) -> Self {
        self.box_clone()
    }
}

impl Strategy for Box<dyn Strategy> {
    fn respond(&mut self, spoiler: Move) -> Result<NodeId, StrategyError> {
        (**self).respond(spoiler)
    }

    fn box_clone(&self) -> Box<dyn Strategy> {
        (**self).box_clone()
    }

    fn name(&self) -> String {
        (**self).name()
    }

    fn selfcheck(&self) -> Option<ConditionReport> {
        (**self).selfcheck()
    }
}

/// Feeds real moves into a fixed-batch strategy while keeping a virtual
/// fixed-batch game in step: when real play moves on to a later batch, the
/// unused rounds of earlier virtual batches are filled by Spoiler re-picking
/// the root of that batch's board.
#[derive(Clone)]
pub struct VirtualBatches<S> {
    inner: S,
    batch_len: usize,
    batches: usize,
    roots: [NodeId; 2],
    start: Option<Board>,
    played: usize,
    padded: usize,
}

impl<S: Strategy> VirtualBatches<S> {
    /// `roots` are the roots of the left and right boards of the virtual game.
    pub fn new(inner: S, batches: usize, batch_len: usize, roots: (NodeId, NodeId)) -> Self {
        VirtualBatches { inner, batch_len, batches, roots: [roots.0, roots.1], start: None, played: 0, padded: 0 }
    }

    pub fn with_start(mut self, board: Board) -> Self {
        self.start = Some(board);
        self
    }

    pub fn inner(&self) -> &S {
        &self.inner
    }

    /// Virtual rounds played so far, padding included.
    pub fn virtual_rounds(&self) -> usize {
        self.played
    }

    pub fn padded_rounds(&self) -> usize {
        self.padded
    }

    fn board_of(&self, batch: usize) -> Board {
        let start = self.start.expect("start board known");
        if batch.is_multiple_of(2) {
            start
        } else {
            start.other()
        }
    }

    /// Plays `spoiler` as a move of virtual batch `batch` (0-based).
    pub fn feed(&mut self, spoiler: Move, batch: usize) -> Result<NodeId, StrategyError> {
        if self.start.is_none() {
            if batch != 0 {
                return Err(StrategyError::Desync("first move must fall in the first batch".into()));
            }
            self.start = Some(spoiler.board);
        }
        if batch >= self.batches {
            return Err(StrategyError::Desync(format!(
                "batch {} requested but the virtual game has only {} batches",
                batch + 1,
                self.batches
            )));
        }
        if self.played > (batch + 1) * self.batch_len || self.played / self.batch_len > batch {
            return Err(StrategyError::Desync(format!(
                "virtual game already past batch {} ({} rounds played)",
                batch + 1,
                self.played
            )));
        }
        while self.played < batch * self.batch_len {
            let board = self.board_of(self.played / self.batch_len);
            let root = self.roots[board.index()];
            let reply = self.inner.respond(Move::new(board, root))?;
            if reply != self.roots[board.other().index()] {
                return Err(StrategyError::Desync(format!("inner strategy answered a root pick with {reply}")));
            }
            self.played += 1;
            self.padded += 1;
        }
        if self.played >= (batch + 1) * self.batch_len {
            return Err(StrategyError::Desync(format!("batch {} of the virtual game is full", batch + 1)));
        }
        let expected = self.board_of(batch);
        if spoiler.board != expected {
            return Err(StrategyError::Desync(format!(
                "virtual batch {} is played on the {expected} board, got a move on the {}",
                batch + 1,
                spoiler.board
            )));
        }
        let reply = self.inner.respond(spoiler)?;
        self.played += 1;
        Ok(reply)
    }
}

/// Switch-budget strategy built from a strategy for the fixed-batch game
/// with one more batch: every maximal same-board segment of real play goes
/// into its own virtual batch.
#[derive(Clone)]
pub struct SwitchBudgetAdapter<S> {
    driver: VirtualBatches<S>,
    switches: usize,
    rounds: usize,
    current: Option<Board>,
    segment: usize,
    segment_lengths: Vec<usize>,
}

/// Wraps a strategy for `FixedBatches { batches: switches + 1, batch_len: rounds }`
/// into one for `SwitchBudget { switches, rounds }`.
pub fn adapt_batches_to_switch_budget<S: Strategy>(
    inner: S,
    switches: usize,
    rounds: usize,
    roots: (NodeId, NodeId),
) -> Result<SwitchBudgetAdapter<S>, StrategyError> {
    if rounds < switches || rounds == 0 {
        return Err(StrategyError::Precondition(format!(
            "switch budget {switches} with {rounds} rounds is not a valid game"
        )));
    }
    Ok(SwitchBudgetAdapter {
        driver: VirtualBatches::new(inner, switches + 1, rounds, roots),
        switches,
        rounds,
        current: None,
        segment: 0,
        segment_lengths: Vec::new(),
    })
}

impl<S> SwitchBudgetAdapter<S> {
    /// Lengths of Spoiler's same-board segments so far.
    pub fn segment_lengths(&self) -> &[usize] {
        &self.segment_lengths
    }

    pub fn driver(&self) -> &VirtualBatches<S> {
        &self.driver
    }
}

impl<S: Strategy + Clone + 'static> Strategy for SwitchBudgetAdapter<S> {
    fn respond(&mut self, spoiler: Move) -> Result<NodeId, StrategyError> {
        match self.current {
            None => self.segment_lengths.push(0),
            Some(b) if b != spoiler.board => {
                self.segment += 1;
                self.segment_lengths.push(0);
            }
            _ => {}
        }
        if self.segment > self.switches {
            return Err(StrategyError::Desync(format!("more than {} switches", self.switches)));
        }
        let total: usize = self.segment_lengths.iter().sum();
        if total >= self.rounds {
            return Err(StrategyError::Desync(format!("more than {} rounds", self.rounds)));
        }
        self.current = Some(spoiler.board);
        let reply = self.driver.feed(spoiler, self.segment)?;
        *self.segment_lengths.last_mut().expect("segment open") += 1;
        Ok(reply)
    }

    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }

    fn name(&self) -> String {
        format!("switch-budget({},{})<{}>", self.switches, self.rounds, self.driver.inner.name())
    }

    fn selfcheck(&self) -> Option<ConditionReport> {
        self.driver.inner.selfcheck()
    }
}

/// Batch-sizes strategy built from a fixed-batch strategy whose batches are
/// at least as long as every requested size.
#[derive(Clone)]
pub struct BatchSizesAdapter<S> {
    driver: VirtualBatches<S>,
    sizes: Vec<usize>,
    played: usize,
}

/// Wraps a strategy for `FixedBatches { batches, batch_len }` into one for
/// `BatchSizes(sizes)`; needs `sizes.len() <= batches` and every size
/// `<= batch_len`.
pub fn adapt_fixed_to_sizes<S: Strategy>(
    inner: S,
    batches: usize,
    batch_len: usize,
    sizes: &[usize],
    roots: (NodeId, NodeId),
) -> Result<BatchSizesAdapter<S>, StrategyError> {
    GameVariant::BatchSizes(sizes.to_vec()).validate().map_err(|e| StrategyError::Precondition(e.to_string()))?;
    if sizes.len() > batches {
        return Err(StrategyError::Precondition(format!(
            "{} batches requested but the fixed game has {batches}",
            sizes.len()
        )));
    }
    if let Some((i, &big)) = sizes.iter().enumerate().find(|(_, &n)| n > batch_len) {
        return Err(StrategyError::Precondition(format!(
            "batch {} has size {big}, larger than the fixed batch length {batch_len}",
            i + 1
        )));
    }
    Ok(BatchSizesAdapter {
        driver: VirtualBatches::new(inner, batches, batch_len, roots),
        sizes: sizes.to_vec(),
        played: 0,
    })
}

impl<S> BatchSizesAdapter<S> {
    pub fn driver(&self) -> &VirtualBatches<S> {
        &self.driver
    }
}

impl<S: Strategy + Clone + 'static> Strategy for BatchSizesAdapter<S> {
    fn respond(&mut self, spoiler: Move) -> Result<NodeId, StrategyError> {
        let batch = GameVariant::BatchSizes(self.sizes.clone()).batch_of(self.played).expect("batch variant");
        if batch >= self.sizes.len() {
            return Err(StrategyError::Desync("game already over".into()));
        }
        let reply = self.driver.feed(spoiler, batch)?;
        self.played += 1;
        Ok(reply)
    }

    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }

    fn name(&self) -> String {
        let sizes: Vec<String> = self.sizes.iter().map(|s| s.to_string()).collect();
        format!("batch-sizes({})<{}>", sizes.join(","), self.driver.inner.name())
    }

    fn selfcheck(&self) -> Option<ConditionReport> {
        self.driver.inner.selfcheck()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    /// Answers every move with a fixed vertex and logs what it saw.
    #[derive(Clone)]
    struct Echo {
        seen: Vec<Move>,
    }

    impl Strategy for Echo {
        fn respond(&mut self, spoiler: Move) -> Result<NodeId, StrategyError> {
            self.seen.push(spoiler);
            Ok(if spoiler.vertex == 0 { 0 } else { 7 })
        }
        fn box_clone(&self) -> Box<dyn Strategy> {
            Box::new(self.clone())
        }
        fn name(&self) -> String {
            "echo".into()
        }
    }

    #[test]
    fn no_switch_uses_first_batch_only() {
        let mut a = adapt_batches_to_switch_budget(Echo { seen: vec![] }, 1, 3, (0, 0)).unwrap();
        for v in [1, 2, 3] {
            assert_eq!(a.respond(Move::left(v)).unwrap(), 7);
        }
        assert_eq!(a.segment_lengths(), &[3]);
        assert_eq!(a.driver().inner().seen.len(), 3);
        assert_eq!(a.driver().padded_rounds(), 0);
    }

    #[test]
    fn switch_pads_the_rest_of_the_batch() {
        let mut a = adapt_batches_to_switch_budget(Echo { seen: vec![] }, 1, 3, (0, 0)).unwrap();
        a.respond(Move::left(4)).unwrap();
        a.respond(Move::right(5)).unwrap();
        let seen = &a.driver().inner().seen;
        assert_eq!(seen, &vec![Move::left(4), Move::left(0), Move::left(0), Move::right(5)]);
        assert_eq!(a.segment_lengths(), &[1, 1]);
        assert!(matches!(a.respond(Move::left(1)), Err(StrategyError::Desync(_))));
    }

    #[test]
    fn equal_sizes_are_identity() {
        let mut a = adapt_fixed_to_sizes(Echo { seen: vec![] }, 2, 2, &[2, 2], (0, 0)).unwrap();
        let moves = [Move::right(3), Move::right(1), Move::left(2), Move::left(0)];
        for m in moves {
            a.respond(m).unwrap();
        }
        assert_eq!(a.driver().inner().seen, moves.to_vec());
        assert_eq!(a.driver().padded_rounds(), 0);
    }

    #[test]
    fn oversize_batch_rejected() {
        let err = adapt_fixed_to_sizes(Echo { seen: vec![] }, 2, 2, &[3, 1], (0, 0)).err().unwrap();
        assert!(matches!(err, StrategyError::Precondition(_)));
    }

    #[test]
    fn wrong_board_is_desync() {
        let mut a = adapt_fixed_to_sizes(Echo { seen: vec![] }, 2, 2, &[1, 1], (0, 0)).unwrap();
        a.respond(Move::left(1)).unwrap();
        assert!(matches!(a.respond(Move::left(2)), Err(StrategyError::Desync(_))));
    }
}
