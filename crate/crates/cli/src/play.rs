//! Interactive play: a human Spoiler against an engine Duplicator.

use std::io::{BufRead, Write};
use std::path::Path;
use std::sync::Arc;

use anyhow::{bail, Result};
use aqd_core::game::transcript::describe_result;
use aqd_core::game::{
    check_winning, pair_conflict, solve_minimax, Board, Condition, GameInstance, Move, PlayState, Solver, SolverConfig,
    Strategy, Transcript, WinCheck, Winner,
};
use aqd_core::harness::{describe_instance, recursive_strategy};
use aqd_core::{NodeId, StrategyError};
use serde_json::json;

use crate::Engine;

/// Keeps a won position won when the solver knows how, otherwise picks the
/// lowest-id reply that breaks nothing yet.
#[derive(Clone)]
struct BestEffort {
    instance: GameInstance,
    solver: Option<Arc<Solver>>,
    state: PlayState,
}

impl Strategy for BestEffort {
    fn respond(&mut self, spoiler: Move) -> Result<NodeId, StrategyError> {
        let winning = self.solver.as_ref().and_then(|s| s.winning_reply(&self.state, spoiler));
        let reply = winning.unwrap_or_else(|| {
            let (l, r) = (&*self.instance.left, &*self.instance.right);
            let pair = |w: NodeId| match spoiler.board {
                Board::Left => (spoiler.vertex, w),
                Board::Right => (w, spoiler.vertex),
            };
            (0..self.instance.tree(spoiler.board.other()).len())
                .find(|&w| pair_conflict(l, r, &self.state.history, pair(w)).is_none())
                .unwrap_or(0)
        });
        self.state = self.instance.play_round(&self.state, spoiler, reply)?;
        Ok(reply)
    }

    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }

    fn name(&self) -> String {
        "best-effort".into()
    }
}

fn pick_engine(instance: &GameInstance, engine: Engine, config: &SolverConfig) -> Result<Box<dyn Strategy>> {
    if engine != Engine::Minimax {
        match recursive_strategy(instance) {
            Ok(s) => return Ok(s),
            Err(e) if engine == Engine::Recursive => return Err(e.into()),
            Err(_) => {}
        }
    }
    let solver = match solve_minimax(instance, config) {
        Ok(outcome) if outcome.winner == Winner::Duplicator => {
            return Ok(Box::new(outcome.duplicator_strategy().expect("duplicator won")))
        }
        Ok(outcome) => Some(Arc::clone(outcome.solver())),
        Err(e) if engine == Engine::Minimax => return Err(e.into()),
        Err(_) => None,
    };
    Ok(Box::new(BestEffort { instance: instance.clone(), solver, state: instance.initial_state() }))
}

pub struct PlayReport {
    pub instance: String,
    pub engine: String,
    pub transcript: Transcript,
    pub check: WinCheck,
    pub finished: bool,
}

impl PlayReport {
    pub fn to_json(&self, path: &Path) -> serde_json::Value {
        let rounds: Vec<serde_json::Value> = self
            .transcript
            .rounds
            .iter()
            .map(|(s, d)| json!({ "spoiler": s.to_string(), "duplicator": d.to_string() }))
            .collect();
        json!({
            "instance": self.instance,
            "engine": self.engine,
            "rounds": rounds,
            "finished": self.finished,
            "result": describe_result(&self.check),
            "transcript": path,
        })
    }
}

fn parse_move(text: &str) -> Option<Move> {
    let text = text.trim();
    let mut chars = text.chars();
    let board = match chars.next()?.to_ascii_uppercase() {
        'L' => Board::Left,
        'R' => Board::Right,
        _ => return None,
    };
    let rest = chars.as_str().trim_start_matches([':', ' ', '\t']);
    Some(Move::new(board, rest.trim().parse().ok()?))
}

fn status(instance: &GameInstance, state: &PlayState) -> (WinCheck, String) {
    let check = check_winning(&instance.left, &instance.right, &state.history);
    let text = match check {
        WinCheck::Satisfied => "Main 1 and Main 2 hold".to_string(),
        WinCheck::Violated(v) => {
            let name = match v.condition {
                Condition::Main1 => "Main 1",
                Condition::Main2 => "Main 2",
            };
            format!("{name} broken between pairs {} and {}", v.i, v.j)
        }
    };
    (check, text)
}

/// Reads Spoiler moves (`L:3`, `r 7`, ...) from `input` until the game ends,
/// the input runs out or `quit` is entered.
pub fn play(
    instance: &GameInstance,
    engine: Engine,
    config: &SolverConfig,
    mut input: impl BufRead,
    out: &mut dyn Write,
) -> Result<PlayReport> {
    let mut strategy = pick_engine(instance, engine, config)?;
    let mut state = instance.initial_state();
    let mut transcript = Transcript::new(instance)
        .header("left", aqd_core::harness::describe_tree(&instance.left))
        .header("right", aqd_core::harness::describe_tree(&instance.right))
        .header("engine", strategy.name());
    writeln!(out, "{} against the {} engine", describe_instance(instance), strategy.name())?;
    writeln!(
        out,
        "left has {} vertices, right has {}; enter moves as L:<id> or R:<id>, `quit` to stop",
        instance.left.len(),
        instance.right.len()
    )?;
    let mut line = String::new();
    while !instance.is_over(&state) {
        let allowed = instance.allowed_boards(&state)?;
        let names: Vec<String> = allowed.iter().map(|b| b.to_string()).collect();
        write!(out, "round {} of {} ({}) > ", state.round_index + 1, instance.total_rounds(), names.join(" or "))?;
        out.flush()?;
        line.clear();
        if input.read_line(&mut line)? == 0 {
            writeln!(out)?;
            break;
        }
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        if text == "quit" || text == "q" {
            break;
        }
        let Some(mv) = parse_move(text) else {
            writeln!(out, "cannot read `{text}`; expected L:<id> or R:<id>")?;
            continue;
        };
        if !allowed.contains(&mv.board) {
            writeln!(out, "Spoiler must play on the {} board this round", names.join(" or "))?;
            continue;
        }
        if !instance.tree(mv.board).contains(mv.vertex) {
            writeln!(out, "the {} board has no vertex {}", mv.board, mv.vertex)?;
            continue;
        }
        let reply = match strategy.respond(mv) {
            Ok(r) => r,
            Err(e) => bail!("engine failed on {mv}: {e}"),
        };
        state = instance.play_round(&state, mv, reply)?;
        transcript.push(mv, reply);
        let (_, text) = status(instance, &state);
        writeln!(out, "  duplicator answers {}:{reply}; {text}", mv.board.other().letter())?;
        if let Some(report) = strategy.selfcheck() {
            let failed: Vec<&str> = report.failures().map(|r| r.label.as_str()).collect();
            if failed.is_empty() {
                writeln!(out, "  strategy self-check: {} conditions pass", report.results.len())?;
            } else {
                writeln!(out, "  strategy self-check failed: {}", failed.join(", "))?;
            }
        }
    }
    let finished = instance.is_over(&state);
    let (check, text) = status(instance, &state);
    let winner = match (finished, check.is_satisfied()) {
        (_, false) => "Spoiler wins",
        (true, true) => "Duplicator wins",
        (false, true) => "game stopped early",
    };
    writeln!(out, "{winner}: {text}")?;
    transcript.result = Some(describe_result(&check));
    Ok(PlayReport { instance: describe_instance(instance), engine: strategy.name(), transcript, check, finished })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reads_moves_in_several_spellings() {
        assert_eq!(parse_move("L:3"), Some(Move::left(3)));
        assert_eq!(parse_move("r 12"), Some(Move::right(12)));
        assert_eq!(parse_move("R7"), Some(Move::right(7)));
        assert_eq!(parse_move("x:1"), None);
        assert_eq!(parse_move("L:"), None);
    }
}
