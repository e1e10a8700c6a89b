//! Verification pipelines: construction checks, exhaustive and random
//! Spoiler sweeps against a Duplicator strategy, formula pools checked
//! against game outcomes, and the end-to-end lower-bound run.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::HarnessError;
use crate::game::{
    adapt_batches_to_switch_budget, adapt_fixed_to_sizes, check_winning, solve_minimax, Board, GameInstance,
    GameVariant, Move, PlayState, SolverConfig, Strategy, Winner,
};
use crate::logic::{eval_p_direct, formula_for_kein, Formula, Quantifier, Term};
use crate::strategy::RecursiveStrategy;
use crate::tree::{build_construction, NodeId, Role, Tree};

/// `T1(s,k,m)` for construction trees, `tree(n)` otherwise.
pub fn describe_tree(tree: &Tree) -> String {
    match tree.blueprint() {
        Some(bp) => format!("{}({},{},{})", bp.role, bp.s, bp.k, bp.m),
        None => format!("tree({})", tree.len()),
    }
}

pub fn describe_instance(instance: &GameInstance) -> String {
    let mut text =
        format!("{} vs {} {}", describe_tree(&instance.left), describe_tree(&instance.right), instance.variant);
    if !instance.designated.is_empty() {
        let pairs: Vec<String> = instance.designated.iter().map(|(x, y)| format!("{x}:{y}")).collect();
        text.push_str(&format!(" designated={}", pairs.join(",")));
    }
    text
}

/// Both construction trees of one parameter triple.
pub fn construction_pair(s: usize, k: usize, m: usize) -> Result<(Arc<Tree>, Arc<Tree>), HarnessError> {
    Ok((Arc::new(build_construction(Role::T1, s, k, m)?), Arc::new(build_construction(Role::T2, s, k, m)?)))
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct ConstructionReport {
    pub s: usize,
    pub k: usize,
    pub m: usize,
    pub t1_nodes: usize,
    pub t2_nodes: usize,
    /// `KEIN_s` on T1 and T2 by the bottom-up property table.
    pub direct: (bool, bool),
    /// `KEIN_s` on T1 and T2 by the formula evaluator.
    pub formula: (bool, bool),
    pub passed: bool,
}

/// Builds both trees and checks that T1 satisfies `KEIN_s` and T2 does not,
/// once directly and once through the formula evaluator.
pub fn verify_construction(s: usize, k: usize, m: usize) -> Result<ConstructionReport, HarnessError> {
    let (t1, t2) = construction_pair(s, k, m)?;
    let direct = (eval_p_direct(&t1, s, t1.root()), eval_p_direct(&t2, s, t2.root()));
    let kein = formula_for_kein(s);
    let formula = (kein.holds(&t1)?, kein.holds(&t2)?);
    Ok(ConstructionReport {
        s,
        k,
        m,
        t1_nodes: t1.len(),
        t2_nodes: t2.len(),
        direct,
        formula,
        passed: direct == (true, false) && formula == (true, false),
    })
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize)]
pub struct Tally {
    pub passed: u64,
    pub failed: u64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LossRecord {
    pub moves: Vec<String>,
    pub reason: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepReport {
    pub instance: String,
    pub strategy: String,
    pub mode: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    pub lines: u64,
    /// Lines Duplicator lost, including lines cut short by a strategy error.
    pub losses: u64,
    pub strategy_errors: u64,
    pub wall_ms: u128,
    /// Per-label self-check outcomes, sampled after every round.
    pub selfcheck: BTreeMap<String, Tally>,
    pub selfcheck_failures: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub first_loss: Option<LossRecord>,
}

impl SweepReport {
    fn empty(instance: &GameInstance, strategy: &dyn Strategy, mode: &str, seed: Option<u64>) -> Self {
        SweepReport {
            instance: describe_instance(instance),
            strategy: strategy.name(),
            mode: mode.to_string(),
            seed,
            lines: 0,
            losses: 0,
            strategy_errors: 0,
            wall_ms: 0,
            selfcheck: BTreeMap::new(),
            selfcheck_failures: 0,
            first_loss: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.losses == 0 && self.selfcheck_failures == 0
    }

    /// Adds `other`'s counts; the first loss of `self` wins ties.
    fn merge(&mut self, other: Counts) {
        self.lines += other.lines;
        self.losses += other.losses;
        self.strategy_errors += other.strategy_errors;
        self.selfcheck_failures += other.selfcheck_failures;
        for (label, t) in other.selfcheck {
            let e = self.selfcheck.entry(label).or_default();
            e.passed += t.passed;
            e.failed += t.failed;
        }
        if self.first_loss.is_none() {
            self.first_loss = other.first_loss;
        }
    }
}

/// Counts accumulated by one worker.
#[derive(Default)]
struct Counts {
    lines: u64,
    losses: u64,
    strategy_errors: u64,
    selfcheck: BTreeMap<String, Tally>,
    selfcheck_failures: u64,
    first_loss: Option<LossRecord>,
}

impl Counts {
    fn lose(&mut self, line: &[Move], reason: String) {
        self.losses += 1;
        if self.first_loss.is_none() {
            self.first_loss = Some(LossRecord { moves: line.iter().map(Move::to_string).collect(), reason });
        }
    }

    fn record_selfcheck(&mut self, strategy: &dyn Strategy, line: &[Move]) {
        let Some(report) = strategy.selfcheck() else {
            return;
        };
        let mut failed = false;
        for r in &report.results {
            let e = self.selfcheck.entry(r.label.clone()).or_default();
            if r.passed {
                e.passed += 1;
            } else {
                e.failed += 1;
                failed = true;
            }
        }
        if failed {
            self.selfcheck_failures += 1;
            if self.first_loss.is_none() {
                let labels: Vec<String> = report.failures().map(|r| r.label.clone()).collect();
                self.first_loss = Some(LossRecord {
                    moves: line.iter().map(Move::to_string).collect(),
                    reason: format!("self-check failed: {}", labels.join(", ")),
                });
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct SweepLimits {
    pub max_lines: u128,
    /// Restrict Spoiler's first move to one board.
    pub start_board: Option<Board>,
    /// Sample the strategy's self-check after every round.
    pub selfcheck: bool,
}

impl Default for SweepLimits {
    fn default() -> Self {
        SweepLimits { max_lines: 20_000_000, start_board: None, selfcheck: true }
    }
}

/// Exact number of complete Spoiler lines (ignoring early losses).
pub fn count_lines(instance: &GameInstance, start_board: Option<Board>) -> u128 {
    fn go(instance: &GameInstance, state: &PlayState, start_board: Option<Board>) -> u128 {
        if instance.is_over(state) {
            return 1;
        }
        let boards = instance.allowed_boards(state).expect("game not over");
        let mut total = 0u128;
        for b in boards {
            if state.start_board.is_none() && start_board.is_some_and(|s| s != b) {
                continue;
            }
            // the continuation depends only on the board sequence
            let next = instance
                .play_round(state, Move::new(b, instance.tree(b).root()), instance.tree(b.other()).root())
                .expect("legal board");
            total += instance.tree(b).len() as u128 * go(instance, &next, start_board);
        }
        total
    }
    go(instance, &instance.initial_state(), start_board)
}

struct LineCtx<'a> {
    instance: &'a GameInstance,
    selfcheck: bool,
}

impl LineCtx<'_> {
    /// Plays `spoiler` against `strategy` from `state`; returns the next
    /// state when the line continues.
    fn step(
        &self,
        state: &PlayState,
        strategy: &mut dyn Strategy,
        spoiler: Move,
        line: &[Move],
        acc: &mut Counts,
    ) -> Option<PlayState> {
        let reply = match strategy.respond(spoiler) {
            Ok(r) => r,
            Err(e) => {
                acc.lines += 1;
                acc.strategy_errors += 1;
                acc.lose(line, format!("strategy error: {e}"));
                return None;
            }
        };
        let next = match self.instance.play_round(state, spoiler, reply) {
            Ok(n) => n,
            Err(e) => {
                acc.lines += 1;
                acc.strategy_errors += 1;
                acc.lose(line, format!("illegal reply {reply}: {e}"));
                return None;
            }
        };
        if self.selfcheck {
            acc.record_selfcheck(strategy, line);
        }
        let check = check_winning(&self.instance.left, &self.instance.right, &next.history);
        if !check.is_satisfied() {
            acc.lines += 1;
            acc.lose(line, format!("winning conditions broken: {check:?}"));
            return None;
        }
        if self.instance.is_over(&next) {
            acc.lines += 1;
            return None;
        }
        Some(next)
    }

    fn dfs(&self, state: &PlayState, strategy: &dyn Strategy, line: &mut Vec<Move>, acc: &mut Counts) {
        let moves = self.instance.legal_spoiler_moves(state).expect("game not over");
        for mv in moves {
            let mut s = strategy.box_clone();
            line.push(mv);
            if let Some(next) = self.step(state, s.as_mut(), mv, line, acc) {
                self.dfs(&next, s.as_ref(), line, acc);
            }
            line.pop();
        }
    }
}

/// Drives `strategy` through every legal Spoiler line of `instance`. A line
/// ends when the game is over, when the winning conditions break (a loss) or
/// when the strategy errors (also a loss).
pub fn exhaustive_spoiler_sweep(
    instance: &GameInstance,
    strategy: &dyn Strategy,
    limits: &SweepLimits,
) -> Result<SweepReport, HarnessError> {
    let estimate = count_lines(instance, limits.start_board);
    if estimate > limits.max_lines {
        return Err(HarnessError::LimitExceeded { estimate, limit: limits.max_lines });
    }
    let started = Instant::now();
    let mut report = SweepReport::empty(instance, strategy, "exhaustive", None);
    let ctx = LineCtx { instance, selfcheck: limits.selfcheck };
    let initial = instance.initial_state();
    let check = check_winning(&instance.left, &instance.right, &initial.history);
    if !check.is_satisfied() {
        let mut acc = Counts { lines: 1, ..Counts::default() };
        acc.lose(&[], format!("designated pairs already break the winning conditions: {check:?}"));
        report.merge(acc);
        report.wall_ms = started.elapsed().as_millis();
        return Ok(report);
    }
    let first: Vec<(Move, Box<dyn Strategy>)> = instance
        .legal_spoiler_moves(&initial)?
        .into_iter()
        .filter(|mv| limits.start_board.is_none_or(|b| b == mv.board))
        .map(|mv| (mv, strategy.box_clone()))
        .collect();
    let parts: Vec<Counts> = first
        .into_par_iter()
        .map(|(mv, mut s)| {
            let mut acc = Counts::default();
            let mut line = vec![mv];
            if let Some(next) = ctx.step(&initial, s.as_mut(), mv, &line, &mut acc) {
                ctx.dfs(&next, s.as_ref(), &mut line, &mut acc);
            }
            acc
        })
        .collect();
    for p in parts {
        report.merge(p);
    }
    report.wall_ms = started.elapsed().as_millis();
    Ok(report)
}

/// A Spoiler move chosen at random, half the time near an earlier pick on
/// the chosen board (its parent, a child or a sibling).
fn random_move(instance: &GameInstance, state: &PlayState, rng: &mut ChaCha8Rng) -> Move {
    let boards = instance.allowed_boards(state).expect("game not over");
    let board = boards[rng.gen_range(0..boards.len())];
    let tree = instance.tree(board);
    let picked: Vec<NodeId> = state.history.iter().map(|&(l, r)| if board == Board::Left { l } else { r }).collect();
    if rng.gen_bool(0.5) {
        let anchor = picked[rng.gen_range(0..picked.len())];
        let mut near: Vec<NodeId> = tree.children(anchor).to_vec();
        if let Some(p) = tree.parent(anchor) {
            near.push(p);
            near.extend(tree.children(p).iter().copied().filter(|&c| c != anchor));
        }
        if !near.is_empty() {
            return Move::new(board, near[rng.gen_range(0..near.len())]);
        }
    }
    Move::new(board, rng.gen_range(0..tree.len()))
}

/// Plays `lines` random Spoiler lines against `strategy`. Line `i` uses
/// stream `i` of a ChaCha8 generator seeded with `seed`, so any line can be
/// replayed alone.
pub fn random_spoiler_sweep(
    instance: &GameInstance,
    strategy: &dyn Strategy,
    lines: u64,
    seed: u64,
    limits: &SweepLimits,
) -> Result<SweepReport, HarnessError> {
    let started = Instant::now();
    let mut report = SweepReport::empty(instance, strategy, "random", Some(seed));
    let ctx = LineCtx { instance, selfcheck: limits.selfcheck };
    let initial = instance.initial_state();
    let chunk = 1024u64;
    let chunks: Vec<(u64, Box<dyn Strategy>)> = (0..lines.div_ceil(chunk)).map(|c| (c, strategy.box_clone())).collect();
    let parts: Vec<Counts> = chunks
        .into_par_iter()
        .map(|(c, base)| {
            let mut acc = Counts::default();
            for i in c * chunk..((c + 1) * chunk).min(lines) {
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                rng.set_stream(i);
                let mut s = base.box_clone();
                let mut state = initial.clone();
                let mut line = Vec::new();
                loop {
                    let mut mv = random_move(instance, &state, &mut rng);
                    if state.start_board.is_none() {
                        if let Some(b) = limits.start_board {
                            if mv.board != b {
                                mv = Move::new(b, rng.gen_range(0..instance.tree(b).len()));
                            }
                        }
                    }
                    line.push(mv);
                    match ctx.step(&state, s.as_mut(), mv, &line, &mut acc) {
                        Some(next) => state = next,
                        None => break,
                    }
                }
            }
            acc
        })
        .collect();
    for p in parts {
        report.merge(p);
    }
    report.wall_ms = started.elapsed().as_millis();
    Ok(report)
}

/// The recursive strategy for `instance`, boxed. Switch-budget and
/// batch-sizes games are played through the replay adaptors on top of the
/// fixed-batch strategy they reduce to.
pub fn recursive_strategy(instance: &GameInstance) -> Result<Box<dyn Strategy>, HarnessError> {
    let roots = (instance.left.root(), instance.right.root());
    let fixed = |batches: usize, batch_len: usize| {
        RecursiveStrategy::new(&GameInstance {
            variant: GameVariant::FixedBatches { batches, batch_len },
            ..instance.clone()
        })
    };
    Ok(match &instance.variant {
        GameVariant::FixedBatches { .. } => Box::new(RecursiveStrategy::new(instance)?),
        &GameVariant::SwitchBudget { switches, rounds } => {
            Box::new(adapt_batches_to_switch_budget(fixed(switches + 1, rounds)?, switches, rounds, roots)?)
        }
        GameVariant::BatchSizes(sizes) => {
            let batch_len = sizes.iter().copied().max().unwrap_or(1);
            Box::new(adapt_fixed_to_sizes(fixed(sizes.len(), batch_len)?, sizes.len(), batch_len, sizes, roots)?)
        }
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct FormulaPool {
    pub seed: u64,
    pub qd_max: usize,
    pub aqd_max: usize,
    #[serde(serialize_with = "display_all")]
    pub sentences: Vec<Formula>,
}

fn display_all<S: serde::Serializer>(fs: &[Formula], ser: S) -> Result<S::Ok, S::Error> {
    ser.collect_seq(fs.iter().map(|f| f.to_string()))
}

fn random_formula(rng: &mut ChaCha8Rng, depth: usize, bound: &mut Vec<String>) -> Formula {
    let atom = |rng: &mut ChaCha8Rng, bound: &Vec<String>| {
        let term = |rng: &mut ChaCha8Rng| {
            let i = rng.gen_range(0..=bound.len());
            if i == bound.len() {
                Term::Root
            } else {
                Term::Var(bound[i].clone())
            }
        };
        let (a, b) = (term(rng), term(rng));
        if rng.gen_bool(0.5) {
            Formula::Eq(a, b)
        } else {
            Formula::ParentOf { child: a, parent: b }
        }
    };
    let roll = rng.gen_range(0..10);
    if depth == 0 || (roll < 2 && !bound.is_empty()) {
        return atom(rng, bound);
    }
    match roll {
        0..=4 => {
            let q = if rng.gen_bool(0.5) { Quantifier::Exists } else { Quantifier::Forall };
            let name = format!("x{}", bound.len() + 1);
            bound.push(name.clone());
            let body = random_formula(rng, depth - 1, bound);
            bound.pop();
            Formula::quant(q, name, body)
        }
        5 => Formula::not(random_formula(rng, depth, bound)),
        6 | 7 => Formula::and(random_formula(rng, depth, bound), random_formula(rng, depth, bound)),
        8 => Formula::or(random_formula(rng, depth, bound), random_formula(rng, depth, bound)),
        _ => Formula::implies(random_formula(rng, depth, bound), random_formula(rng, depth, bound)),
    }
}

/// `n` distinct random sentences with quantifier depth at most `qd_max` and
/// syntactic alternation depth at most `aqd_max`, always including every
/// `KEIN_i` within both bounds.
pub fn generate_formula_pool(seed: u64, qd_max: usize, aqd_max: usize, n: usize) -> FormulaPool {
    let mut sentences = Vec::new();
    let mut seen = BTreeSet::new();
    for i in 0..=aqd_max {
        if i < qd_max {
            let f = formula_for_kein(i);
            seen.insert(f.to_string());
            sentences.push(f);
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut attempts = 0usize;
    while sentences.len() < n && attempts < n.saturating_mul(500) {
        attempts += 1;
        let depth = rng.gen_range(1..=qd_max.max(1));
        let f = random_formula(&mut rng, depth, &mut Vec::new());
        if !f.is_sentence() || f.qd() > qd_max || f.aqd_syntactic() > aqd_max {
            continue;
        }
        if seen.insert(f.to_string()) {
            sentences.push(f);
        }
    }
    FormulaPool { seed, qd_max, aqd_max, sentences }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct Theorem1Report {
    pub switches: usize,
    pub rounds: usize,
    pub winner: Winner,
    /// Pool sentences within both bounds.
    pub checked: usize,
    pub disagreeing: Vec<String>,
    /// A disagreeing sentence found when Spoiler wins.
    pub witness: Option<String>,
    /// Set when Duplicator wins yet a sentence disagrees.
    pub counterexample: bool,
}

/// Solves the switch-budget game and compares it with the pool: after a
/// Duplicator win every eligible sentence must agree on both trees; after a
/// Spoiler win the pool is searched for a separating sentence.
pub fn theorem1_spotcheck(
    left: Arc<Tree>,
    right: Arc<Tree>,
    switches: usize,
    rounds: usize,
    pool: &FormulaPool,
    config: &SolverConfig,
) -> Result<Theorem1Report, HarnessError> {
    let instance = GameInstance::new(
        Arc::clone(&left),
        Arc::clone(&right),
        GameVariant::SwitchBudget { switches, rounds },
        vec![],
    )?;
    let winner = solve_minimax(&instance, config)?.winner;
    let mut checked = 0;
    let mut disagreeing = Vec::new();
    for f in &pool.sentences {
        if f.qd() > rounds || f.aqd_syntactic() > switches {
            continue;
        }
        checked += 1;
        if f.holds(&left)? != f.holds(&right)? {
            disagreeing.push(f.to_string());
        }
    }
    let counterexample = winner == Winner::Duplicator && !disagreeing.is_empty();
    let witness = if winner == Winner::Spoiler { disagreeing.first().cloned() } else { None };
    Ok(Theorem1Report { switches, rounds, winner, checked, disagreeing, witness, counterexample })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct MonotonicityViolation {
    pub wins: (usize, usize),
    pub loses: (usize, usize),
}

/// Solves every `SwitchBudget { s, r }` with `s <= r <= max_rounds` and
/// reports pairs where Duplicator wins a game but loses a smaller one.
pub fn monotonicity_suite(
    left: Arc<Tree>,
    right: Arc<Tree>,
    max_rounds: usize,
    config: &SolverConfig,
) -> Result<Vec<MonotonicityViolation>, HarnessError> {
    let mut wins = BTreeMap::new();
    for r in 1..=max_rounds {
        for s in 0..=r {
            let g = GameInstance::new(
                Arc::clone(&left),
                Arc::clone(&right),
                GameVariant::SwitchBudget { switches: s, rounds: r },
                vec![],
            )?;
            wins.insert((s, r), solve_minimax(&g, config)?.winner == Winner::Duplicator);
        }
    }
    let mut out = Vec::new();
    for (&(s, r), &won) in &wins {
        if !won {
            continue;
        }
        for (&(s2, r2), &won2) in &wins {
            if s2 <= s && r2 <= r && !won2 {
                out.push(MonotonicityViolation { wins: (s, r), loses: (s2, r2) });
            }
        }
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct StepReport {
    pub step: String,
    pub passed: bool,
    pub method: String,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub struct LowerBoundReport {
    pub s: usize,
    pub k: usize,
    pub m: usize,
    pub steps: Vec<StepReport>,
    pub verdict: Option<String>,
}

impl LowerBoundReport {
    pub fn passed(&self) -> bool {
        self.verdict.is_some()
    }
}

#[derive(Debug, Clone)]
pub struct PipelineConfig {
    pub sweep: SweepLimits,
    pub solver: SolverConfig,
    /// Random lines used when an exhaustive sweep is out of reach.
    pub random_lines: u64,
    pub seed: u64,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            sweep: SweepLimits { max_lines: 2_000_000, ..SweepLimits::default() },
            solver: SolverConfig::default(),
            random_lines: 10_000,
            seed: 1,
        }
    }
}

fn sweep_step(
    step: &str,
    instance: &GameInstance,
    strategy: &dyn Strategy,
    config: &PipelineConfig,
) -> Result<StepReport, HarnessError> {
    let (report, method) = match exhaustive_spoiler_sweep(instance, strategy, &config.sweep) {
        Ok(r) => (r, "exhaustive sweep"),
        Err(HarnessError::LimitExceeded { .. }) => {
            (random_spoiler_sweep(instance, strategy, config.random_lines, config.seed, &config.sweep)?, "random sweep")
        }
        Err(e) => return Err(e),
    };
    Ok(StepReport {
        step: step.to_string(),
        passed: report.passed(),
        method: format!("{method} of {}", report.strategy),
        detail: format!(
            "{} lines, {} losses, {} self-check failures{}",
            report.lines,
            report.losses,
            report.selfcheck_failures,
            report.first_loss.as_ref().map(|l| format!("; first loss: {}", l.reason)).unwrap_or_default()
        ),
    })
}

/// Runs the lower-bound argument for `KEIN_s` with `m = s * k`: checks the
/// construction, shows Duplicator wins the `s`-batch game, transfers the win
/// to the switch-budget game with `s - 1` switches and emits the verdict.
pub fn lower_bound_pipeline(s: usize, k: usize, config: &PipelineConfig) -> Result<LowerBoundReport, HarnessError> {
    if s == 0 || k == 0 {
        return Err(HarnessError::Step { step: "parameters".into(), message: "s and k must be positive".into() });
    }
    let m = s * k;
    let mut report = LowerBoundReport { s, k, m, steps: Vec::new(), verdict: None };

    let c = verify_construction(s, k, m)?;
    report.steps.push(StepReport {
        step: "construction".into(),
        passed: c.passed,
        method: "property table and formula evaluator".into(),
        detail: format!("T1 has {} nodes, T2 has {} nodes", c.t1_nodes, c.t2_nodes),
    });
    if !c.passed {
        return Ok(report);
    }

    let (t1, t2) = construction_pair(s, k, m)?;
    let fixed = GameInstance::new(
        Arc::clone(&t1),
        Arc::clone(&t2),
        GameVariant::FixedBatches { batches: s, batch_len: k },
        vec![],
    )?;
    let strategy = RecursiveStrategy::new(&fixed)?;
    let step = sweep_step("fixed-batch win", &fixed, &strategy, config)?;
    let ok = step.passed;
    report.steps.push(step);
    if !ok {
        return Ok(report);
    }

    let switches = (s - 1).min(k);
    let switch_game =
        GameInstance::new(Arc::clone(&t1), Arc::clone(&t2), GameVariant::SwitchBudget { switches, rounds: k }, vec![])?;
    let adapted = adapt_batches_to_switch_budget(
        RecursiveStrategy::new(&GameInstance {
            variant: GameVariant::FixedBatches { batches: switches + 1, batch_len: k },
            ..fixed.clone()
        })?,
        switches,
        k,
        (t1.root(), t2.root()),
    )?;
    let mut step = sweep_step("switch-budget transfer", &switch_game, &adapted, config)?;
    match solve_minimax(&switch_game, &config.solver) {
        Ok(out) => {
            let agree = out.winner == Winner::Duplicator;
            step.passed &= agree;
            step.detail.push_str(&format!("; minimax reports a {:?} win", out.winner));
        }
        Err(e) => step.detail.push_str(&format!("; minimax skipped: {e}")),
    }
    let ok = step.passed;
    report.steps.push(step);
    if !ok {
        return Ok(report);
    }

    let kein = formula_for_kein(s);
    report.verdict = Some(format!(
        "no sentence with quantifier depth <= {k} and alternation depth <= {switches} separates T1({s},{k},{m}) from T2({s},{k},{m}), while KEIN_{s} (quantifier depth {}, alternation depth {}) does",
        kein.qd(),
        kein.aqd_syntactic()
    ));
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fixed(s: usize, k: usize, m: usize) -> GameInstance {
        let (l, r) = construction_pair(s, k, m).unwrap();
        GameInstance::new(l, r, GameVariant::FixedBatches { batches: s, batch_len: k }, vec![]).unwrap()
    }

    #[test]
    fn construction_checks() {
        assert!(verify_construction(1, 1, 1).unwrap().passed);
        assert!(verify_construction(2, 1, 2).unwrap().passed);
        assert!(matches!(verify_construction(2, 1, 1), Err(HarnessError::Tree(_))));
    }

    #[test]
    fn line_counts() {
        let g = fixed(1, 1, 1);
        assert_eq!(count_lines(&g, None), 9);
        assert_eq!(count_lines(&fixed(1, 2, 2), None), 10 * 10 + 8 * 8);
        let g = fixed(2, 1, 2);
        assert_eq!(count_lines(&g, None), 2 * 25 * 27);
    }

    #[test]
    fn base_sweep_has_nine_lines() {
        let g = fixed(1, 1, 1);
        let s = recursive_strategy(&g).unwrap();
        let r = exhaustive_spoiler_sweep(&g, s.as_ref(), &SweepLimits::default()).unwrap();
        assert_eq!(r.lines, 9);
        assert_eq!(r.losses, 0, "{:?}", r.first_loss);
    }

    #[test]
    fn sweep_limit() {
        let g = fixed(2, 1, 2);
        let s = recursive_strategy(&g).unwrap();
        let limits = SweepLimits { max_lines: 10, ..SweepLimits::default() };
        assert!(matches!(
            exhaustive_spoiler_sweep(&g, s.as_ref(), &limits),
            Err(HarnessError::LimitExceeded { estimate: 1350, limit: 10 })
        ));
    }

    #[test]
    fn pool_rules() {
        let a = generate_formula_pool(7, 2, 1, 50);
        let b = generate_formula_pool(7, 2, 1, 50);
        assert_eq!(a, b);
        assert!(a.sentences.contains(&formula_for_kein(1)));
        assert!(a.sentences.iter().all(|f| f.is_sentence() && f.qd() <= 2 && f.aqd_syntactic() <= 1));
        assert_eq!(a.sentences.len(), 50);
    }

    #[test]
    fn spotcheck_base_pair() {
        let (l, r) = construction_pair(1, 1, 1).unwrap();
        let pool = generate_formula_pool(3, 2, 1, 40);
        let rep = theorem1_spotcheck(l, r, 1, 2, &pool, &SolverConfig::default()).unwrap();
        assert_eq!(rep.winner, Winner::Spoiler);
        assert!(rep.witness.is_some());
        assert!(rep.disagreeing.contains(&formula_for_kein(1).to_string()));
    }

    #[test]
    fn spotcheck_singletons() {
        let t = Arc::new(Tree::singleton());
        let pool = generate_formula_pool(3, 1, 0, 20);
        let rep = theorem1_spotcheck(Arc::clone(&t), t, 0, 1, &pool, &SolverConfig::default()).unwrap();
        assert_eq!(rep.winner, Winner::Duplicator);
        assert!(rep.disagreeing.is_empty());
    }

    #[test]
    fn pipeline_base() {
        let r = lower_bound_pipeline(1, 1, &PipelineConfig::default()).unwrap();
        assert!(r.passed(), "{r:?}");
    }
}
