//! Line-oriented game logs.
//!
//! ```text
//! variant=batch:2,1
//! left=T1(2,1,2)
//! right=T2(2,1,2)
//! designated=1:1
//! round=1 spoiler=R:3 duplicator=L:3
//! round=2 spoiler=L:9 duplicator=R:9
//! result=satisfied
//! ```
//!
//! `designated` lists `left:right` pairs separated by commas and may be empty.
//! Unknown `key=value` header lines are kept; blank lines and lines starting
//! with `#` are ignored.

use std::collections::BTreeMap;
use std::fmt;

use crate::error::GameError;
use crate::game::rules::{check_winning, Board, GameInstance, GameVariant, Move, PlayState, WinCheck};
use crate::tree::NodeId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Transcript {
    pub variant: GameVariant,
    pub designated: Vec<(NodeId, NodeId)>,
    pub headers: BTreeMap<String, String>,
    /// Spoiler's move and Duplicator's reply for every round.
    pub rounds: Vec<(Move, Move)>,
    pub result: Option<String>,
}

pub fn describe_result(check: &WinCheck) -> String {
    match check {
        WinCheck::Satisfied => "satisfied".to_string(),
        WinCheck::Violated(v) => {
            format!("violated i={} j={} condition={:?}", v.i, v.j, v.condition)
        }
    }
}

fn parse_move(text: &str) -> Result<Move, GameError> {
    let bad = || GameError::IllegalMove(format!("cannot read move `{text}`, expected L:<id> or R:<id>"));
    let (b, v) = text.split_once(':').ok_or_else(bad)?;
    let board = match b {
        "L" => Board::Left,
        "R" => Board::Right,
        _ => return Err(bad()),
    };
    Ok(Move::new(board, v.parse().map_err(|_| bad())?))
}

impl Transcript {
    pub fn new(instance: &GameInstance) -> Self {
        Transcript {
            variant: instance.variant.clone(),
            designated: instance.designated.clone(),
            headers: BTreeMap::new(),
            rounds: Vec::new(),
            result: None,
        }
    }

    pub fn header(mut self, key: &str, value: impl Into<String>) -> Self {
        self.headers.insert(key.to_string(), value.into());
        self
    }

    pub fn push(&mut self, spoiler: Move, reply: NodeId) {
        self.rounds.push((spoiler, Move::new(spoiler.board.other(), reply)));
    }

    pub fn parse(text: &str) -> Result<Self, GameError> {
        let mut variant = None;
        let mut designated = Vec::new();
        let mut headers = BTreeMap::new();
        let mut rounds = Vec::new();
        let mut result = None;
        for line in text.lines().map(str::trim) {
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            if let Some(rest) = line.strip_prefix("round=") {
                let mut parts = rest.split_whitespace();
                let n: usize = parts
                    .next()
                    .and_then(|p| p.parse().ok())
                    .ok_or_else(|| GameError::IllegalMove(format!("bad round line `{line}`")))?;
                if n != rounds.len() + 1 {
                    return Err(GameError::IllegalMove(format!("round {n} out of sequence")));
                }
                let mut spoiler = None;
                let mut reply = None;
                for p in parts {
                    if let Some(m) = p.strip_prefix("spoiler=") {
                        spoiler = Some(parse_move(m)?);
                    } else if let Some(m) = p.strip_prefix("duplicator=") {
                        reply = Some(parse_move(m)?);
                    }
                }
                match (spoiler, reply) {
                    (Some(s), Some(d)) => rounds.push((s, d)),
                    _ => return Err(GameError::IllegalMove(format!("incomplete round line `{line}`"))),
                }
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| GameError::IllegalMove(format!("unreadable transcript line `{line}`")))?;
            match key {
                "variant" => variant = Some(GameVariant::parse(value)?),
                "designated" => {
                    for pair in value.split(',').filter(|p| !p.trim().is_empty()) {
                        let (x, y) = pair
                            .trim()
                            .split_once(':')
                            .ok_or_else(|| GameError::IllegalMove(format!("bad designated pair `{pair}`")))?;
                        let parse = |s: &str| {
                            s.parse::<NodeId>()
                                .map_err(|_| GameError::IllegalMove(format!("bad designated pair `{pair}`")))
                        };
                        designated.push((parse(x)?, parse(y)?));
                    }
                }
                "result" => result = Some(value.to_string()),
                _ => {
                    headers.insert(key.to_string(), value.to_string());
                }
            }
        }
        let variant = variant.ok_or_else(|| GameError::Variant("transcript has no variant line".into()))?;
        Ok(Transcript { variant, designated, headers, rounds, result })
    }

    /// Replays every round on `instance` through the rules engine.
    pub fn replay(&self, instance: &GameInstance) -> Result<(PlayState, WinCheck), GameError> {
        if instance.variant != self.variant || instance.designated != self.designated {
            return Err(GameError::Variant("transcript was recorded for a different game".into()));
        }
        let mut state = instance.initial_state();
        for &(spoiler, reply) in &self.rounds {
            state = instance.play_moves(&state, spoiler, reply)?;
        }
        let check = check_winning(&instance.left, &instance.right, &state.history);
        Ok((state, check))
    }
}

impl fmt::Display for Transcript {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "variant={}", self.variant)?;
        for (k, v) in &self.headers {
            writeln!(f, "{k}={v}")?;
        }
        let pairs: Vec<String> = self.designated.iter().map(|(x, y)| format!("{x}:{y}")).collect();
        writeln!(f, "designated={}", pairs.join(","))?;
        for (i, (s, d)) in self.rounds.iter().enumerate() {
            writeln!(f, "round={} spoiler={} duplicator={}", i + 1, s, d)?;
        }
        if let Some(r) = &self.result {
            writeln!(f, "result={r}")?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::{build_construction, Role};
    use std::sync::Arc;

    #[test]
    fn round_trip_and_replay() {
        let l = Arc::new(build_construction(Role::T1, 1, 1, 1).unwrap());
        let r = Arc::new(build_construction(Role::T2, 1, 1, 1).unwrap());
        let g = GameInstance::new(l, r, GameVariant::SwitchBudget { switches: 1, rounds: 2 }, vec![]).unwrap();
        let mut t = Transcript::new(&g).header("left", "T1(1,1,1)");
        t.push(Move::right(3), 1);
        t.push(Move::left(2), 1);
        let (_, check) = t.replay(&g).unwrap();
        t.result = Some(describe_result(&check));
        let text = t.to_string();
        assert!(text.contains("round=1 spoiler=R:3 duplicator=L:1"));
        let back = Transcript::parse(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.replay(&g).unwrap().1, check);
        assert!(!check.is_satisfied());
    }

    #[test]
    fn rejects_out_of_order_rounds() {
        let text = "variant=switch:0,2\ndesignated=\nround=2 spoiler=L:1 duplicator=R:1\n";
        assert!(Transcript::parse(text).is_err());
    }
}
