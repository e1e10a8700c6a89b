//! The explicit recursive Duplicator strategy for fixed-batch games on a
//! `T1^(s,k,m)` / `T2^(s,k,m)` pair.
//!
//! A [`StrategySession`] plays on two sides: side `A`, a copy of
//! `T1^(s,k,m)`, and side `B`, a copy of `T2^(s,k,m)`. Each side is a subtree
//! of one physical board, so the same type serves the top-level game and the
//! nested games played inside the role subtrees.
//!
//! Side `B` has one top-level child (the *special* child) that is not
//! isomorphic to the others. On side `A` one top-level child is given the
//! *role* of its partner: from then on the role subtree and the special
//! subtree are handled by a nested session one level down, with the two
//! sides exchanged, and every other top-level subtree is answered through a
//! fixed isomorphism onto an ordinary child of `B`.
//!
//! The first batch of the game places every pick into a fresh or already
//! linked ordinary subtree (or, starting on `B`, into the role pair one
//! level deeper). Later batches delegate role-pair moves to the nested
//! session through [`VirtualBatches`], which pads the nested game's batches
//! whenever real play leaves a batch early.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use serde::Serialize;
use serde_json::json;

use crate::canon::{isomorphism_with_classes, IsoClasses, IsoMap};
use crate::error::StrategyError;
use crate::game::{check_winning, Board, ConditionReport, GameInstance, GameVariant, Move, Strategy, VirtualBatches};
use crate::tree::{NodeId, Role, Tree};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub enum Side {
    /// The `T1` copy.
    A,
    /// The `T2` copy.
    B,
}

impl Side {
    pub fn other(self) -> Side {
        match self {
            Side::A => Side::B,
            Side::B => Side::A,
        }
    }
}

/// A subtree of one physical board.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SubBoard {
    pub board: Board,
    pub root: NodeId,
}

/// Trees, isomorphism classes and the cache of fixed isomorphisms, shared by
/// a session and all of its nested sessions and clones.
pub struct Shared {
    left: Arc<Tree>,
    right: Arc<Tree>,
    classes: IsoClasses,
    phi: Mutex<HashMap<(Board, NodeId, NodeId), Arc<IsoMap>>>,
}

impl Shared {
    pub fn new(left: Arc<Tree>, right: Arc<Tree>) -> Arc<Self> {
        let classes = IsoClasses::new(&[&left, &right]);
        Arc::new(Shared { left, right, classes, phi: Mutex::new(HashMap::new()) })
    }

    fn tree(&self, board: Board) -> &Tree {
        match board {
            Board::Left => &self.left,
            Board::Right => &self.right,
        }
    }

    fn class(&self, board: Board, v: NodeId) -> u32 {
        self.classes.class(board.index(), v)
    }

    /// The fixed isomorphism from `T(src)` on `board` onto `T(dst)` on the
    /// other board, built on first use.
    fn phi(&self, board: Board, src: NodeId, dst: NodeId) -> Result<Arc<IsoMap>, StrategyError> {
        let key = (board, src, dst);
        if let Some(map) = self.phi.lock().expect("phi cache").get(&key) {
            return Ok(Arc::clone(map));
        }
        let other = board.other();
        let map = Arc::new(isomorphism_with_classes(
            self.tree(board),
            src,
            self.tree(other),
            dst,
            self.classes.of_tree(board.index()),
            self.classes.of_tree(other.index()),
        )?);
        self.phi.lock().expect("phi cache").insert(key, Arc::clone(&map));
        Ok(map)
    }
}

/// Result of checking designated pairs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum DesignatedCheck {
    Valid,
    Invalid { condition: String, reason: String },
}

impl DesignatedCheck {
    pub fn is_valid(&self) -> bool {
        matches!(self, DesignatedCheck::Valid)
    }

    fn invalid(condition: &str, reason: String) -> Self {
        DesignatedCheck::Invalid { condition: condition.to_string(), reason }
    }
}

#[derive(Clone)]
pub struct StrategySession {
    shared: Arc<Shared>,
    level: usize,
    k: usize,
    a: SubBoard,
    b: SubBoard,
    special: NodeId,
    designated: usize,
    /// `(side A vertex, side B vertex)`: the roots, the designated pairs,
    /// then one pair per round this session has seen.
    history: Vec<(NodeId, NodeId)>,
    start: Option<Side>,
    role: Option<NodeId>,
    child: Option<Box<VirtualBatches<StrategySession>>>,
}

impl StrategySession {
    /// A session for the `level`-batch game with batches of length `k` on
    /// `a` (a `T1` copy) against `b` (a `T2` copy). Designated pairs are given
    /// as `(side A vertex, side B vertex)` and must satisfy C1-C3.
    pub fn new(
        shared: Arc<Shared>,
        level: usize,
        k: usize,
        a: SubBoard,
        b: SubBoard,
        designated: Vec<(NodeId, NodeId)>,
    ) -> Result<Self, StrategyError> {
        if a.board == b.board {
            return Err(StrategyError::Precondition("the two sides must lie on different boards".into()));
        }
        if level == 0 || k == 0 {
            return Err(StrategyError::Precondition("level and batch length must be positive".into()));
        }
        for side in [a, b] {
            shared.tree(side.board).check_node(side.root)?;
        }
        let a_kids = shared.tree(a.board).children(a.root);
        let b_kids = shared.tree(b.board).children(b.root);
        let Some(&first) = a_kids.first() else {
            return Err(StrategyError::Precondition("side A has no children".into()));
        };
        let ordinary = shared.class(a.board, first);
        if a_kids.iter().any(|&c| shared.class(a.board, c) != ordinary) {
            return Err(StrategyError::Precondition("side A's top-level subtrees are not all isomorphic".into()));
        }
        let odd: Vec<NodeId> = b_kids.iter().copied().filter(|&c| shared.class(b.board, c) != ordinary).collect();
        if odd.len() != 1 || b_kids.len() != a_kids.len() {
            return Err(StrategyError::Precondition(
                "side B must have as many top-level children as side A, all but one isomorphic to them".into(),
            ));
        }
        let m = a_kids.len() - 1;
        if m < level * k {
            return Err(StrategyError::Precondition(format!("m = {m} is below level * k = {}", level * k)));
        }
        let mut session = StrategySession {
            shared,
            level,
            k,
            a,
            b,
            special: odd[0],
            designated: 0,
            history: vec![(a.root, b.root)],
            start: None,
            role: None,
            child: None,
        };
        if let DesignatedCheck::Invalid { condition, reason } = session.validate_designated(&designated) {
            return Err(StrategyError::Precondition(format!("designated pairs break {condition}: {reason}")));
        }
        session.designated = designated.len();
        session.history.extend(designated);
        Ok(session)
    }

    pub fn level(&self) -> usize {
        self.level
    }

    pub fn history(&self) -> &[(NodeId, NodeId)] {
        &self.history
    }

    pub fn designated(&self) -> &[(NodeId, NodeId)] {
        &self.history[1..=self.designated]
    }

    pub fn start(&self) -> Option<Side> {
        self.start
    }

    /// Top-level child of side A currently playing the special child's part.
    pub fn role(&self) -> Option<NodeId> {
        self.role
    }

    pub fn special(&self) -> NodeId {
        self.special
    }

    pub fn child(&self) -> Option<&StrategySession> {
        self.child.as_deref().map(|d| d.inner())
    }

    pub fn sides(&self) -> (SubBoard, SubBoard) {
        (self.a, self.b)
    }

    fn sub(&self, side: Side) -> SubBoard {
        match side {
            Side::A => self.a,
            Side::B => self.b,
        }
    }

    fn tree(&self, side: Side) -> &Tree {
        self.shared.tree(self.sub(side).board)
    }

    fn pick(pair: (NodeId, NodeId), side: Side) -> NodeId {
        match side {
            Side::A => pair.0,
            Side::B => pair.1,
        }
    }

    fn top(&self, side: Side, v: NodeId) -> Option<NodeId> {
        self.tree(side).child_towards(self.sub(side).root, v)
    }

    fn top_children(&self, side: Side) -> &[NodeId] {
        self.tree(side).children(self.sub(side).root)
    }

    fn position(&self, side: Side, v: NodeId) -> Option<usize> {
        let tree = self.tree(side);
        tree.parent(v).and_then(|p| tree.children(p).iter().position(|&c| c == v))
    }

    fn is_free(&self, side: Side, c: NodeId) -> bool {
        let tree = self.tree(side);
        !self.history[1..].iter().any(|&p| tree.in_subtree(c, Self::pick(p, side)))
    }

    /// Free member of `candidates` at sibling position `prefer` if there is
    /// one, else the free member with the lowest id.
    fn choose_free(&self, side: Side, candidates: &[NodeId], prefer: Option<usize>) -> Result<NodeId, StrategyError> {
        let free: Vec<NodeId> = candidates.iter().copied().filter(|&c| self.is_free(side, c)).collect();
        if let Some(p) = prefer {
            if let Some(&c) = free.iter().find(|&&c| self.position(side, c) == Some(p)) {
                return Ok(c);
            }
        }
        free.into_iter()
            .min()
            .ok_or_else(|| StrategyError::NoFreeChild(format!("level {} session, side {side:?}", self.level)))
    }

    fn phi(&self, a_top: NodeId, b_top: NodeId) -> Result<Arc<IsoMap>, StrategyError> {
        self.shared.phi(self.a.board, a_top, b_top)
    }

    fn forward(&self, a_top: NodeId, b_top: NodeId, x: NodeId) -> Result<NodeId, StrategyError> {
        self.phi(a_top, b_top)?
            .apply(x)
            .ok_or_else(|| StrategyError::Violated(format!("{x} is outside the subtree of {a_top}")))
    }

    fn backward(&self, a_top: NodeId, b_top: NodeId, y: NodeId) -> Result<NodeId, StrategyError> {
        self.phi(a_top, b_top)?
            .apply_inverse(y)
            .ok_or_else(|| StrategyError::Violated(format!("{y} is outside the subtree of {b_top}")))
    }

    fn ordinary_b_children(&self) -> Vec<NodeId> {
        self.top_children(Side::B).iter().copied().filter(|&c| c != self.special).collect()
    }

    fn non_role_a_children(&self) -> Vec<NodeId> {
        self.top_children(Side::A).iter().copied().filter(|&c| Some(c) != self.role).collect()
    }

    /// Children of the role vertex isomorphic to the special child's children.
    fn ordinary_role_children(&self, role: NodeId) -> Vec<NodeId> {
        let tb = self.tree(Side::B);
        let Some(&first) = tb.children(self.special).first() else {
            return Vec::new();
        };
        let want = self.shared.class(self.b.board, first);
        self.tree(Side::A)
            .children(role)
            .iter()
            .copied()
            .filter(|&c| self.shared.class(self.a.board, c) == want)
            .collect()
    }

    /// Checks designated pairs (C1-C3) against this session's sides.
    pub fn validate_designated(&self, pairs: &[(NodeId, NodeId)]) -> DesignatedCheck {
        if pairs.len() > self.k {
            return DesignatedCheck::invalid("C1", format!("{} pairs exceed k = {}", pairs.len(), self.k));
        }
        let mut tops = Vec::with_capacity(pairs.len());
        for &(x, y) in pairs {
            if !self.tree(Side::A).contains(x) || !self.tree(Side::B).contains(y) {
                return DesignatedCheck::invalid("C1", format!("({x}, {y}) names a vertex that does not exist"));
            }
            let (Some(tx), Some(ty)) = (self.top(Side::A, x), self.top(Side::B, y)) else {
                return DesignatedCheck::invalid("C1", format!("({x}, {y}) is not inside top-level subtrees"));
            };
            if ty == self.special {
                return DesignatedCheck::invalid("C1", format!("{y} lies in the special subtree"));
            }
            tops.push((tx, ty));
        }
        for i in 0..tops.len() {
            for j in i + 1..tops.len() {
                if (tops[i].0 == tops[j].0) != (tops[i].1 == tops[j].1) {
                    return DesignatedCheck::invalid(
                        "C2",
                        format!("pairs {} and {} are co-located on one side only", i + 1, j + 1),
                    );
                }
            }
        }
        for (&(x, y), &(tx, ty)) in pairs.iter().zip(&tops) {
            match self.forward(tx, ty, x) {
                Ok(img) if img == y => {}
                _ => return DesignatedCheck::invalid("C3", format!("{y} is not the image of {x}")),
            }
        }
        DesignatedCheck::Valid
    }

    /// Every single designated pair C1-C3 allow: `(x, phi(x))` for every
    /// top-level child of side A and ordinary child of side B.
    pub fn single_designations(&self) -> Result<Vec<(NodeId, NodeId)>, StrategyError> {
        let mut out = Vec::new();
        for &ta in self.top_children(Side::A) {
            for tb in self.ordinary_b_children() {
                let map = self.phi(ta, tb)?;
                for x in self.tree(Side::A).subtree(ta) {
                    out.push((x, map.apply(x).expect("isomorphism is total")));
                }
            }
        }
        Ok(out)
    }

    fn side_of(&self, mv: Move) -> Result<Side, StrategyError> {
        for side in [Side::A, Side::B] {
            let sub = self.sub(side);
            if mv.board == sub.board && self.tree(side).in_subtree(sub.root, mv.vertex) {
                return Ok(side);
            }
        }
        Err(StrategyError::Desync(format!("{mv} is outside both sides of the level {} session", self.level)))
    }

    fn begin(&mut self, side: Side) -> Result<(), StrategyError> {
        self.start = Some(side);
        match side {
            Side::A if self.designated > 0 => Err(StrategyError::Precondition(
                "designated pairs are only supported when Spoiler starts on the T2 side".into(),
            )),
            Side::A => Ok(()),
            Side::B => {
                let kids = self.top_children(Side::A).to_vec();
                let last = kids.len() - 1;
                self.role = Some(self.choose_free(Side::A, &kids, Some(last))?);
                Ok(())
            }
        }
    }

    fn previous_mate(&self, side: Side, v: NodeId) -> Option<NodeId> {
        self.history.iter().find(|&&p| Self::pick(p, side) == v).map(|&p| Self::pick(p, side.other()))
    }

    fn rounds_played(&self) -> usize {
        self.history.len() - 1 - self.designated
    }

    /// Answer for `v` inside a top-level subtree `top` outside the role pair.
    fn answer_ordinary(&self, side: Side, v: NodeId, top: NodeId) -> Result<NodeId, StrategyError> {
        let other = side.other();
        let linked = self.history[1..]
            .iter()
            .find(|&&p| self.tree(side).in_subtree(top, Self::pick(p, side)))
            .map(|&p| self.top(other, Self::pick(p, other)));
        let partner = match linked {
            Some(Some(t)) => t,
            Some(None) => {
                return Err(StrategyError::Violated(format!("pick linked to {top} was answered by a root")));
            }
            None => {
                let candidates = match side {
                    Side::A => self.ordinary_b_children(),
                    Side::B => self.non_role_a_children(),
                };
                self.choose_free(other, &candidates, self.position(side, top))?
            }
        };
        match side {
            Side::A => self.forward(top, partner, v),
            Side::B => self.backward(partner, top, v),
        }
    }

    fn first_batch(&self, side: Side, v: NodeId) -> Result<NodeId, StrategyError> {
        if let Some(mate) = self.previous_mate(side, v) {
            return Ok(mate);
        }
        let top = self.top(side, v).expect("roots are answered as repeats");
        if side == Side::A || top != self.special {
            return self.answer_ordinary(side, v, top);
        }
        let role = self.role.expect("role fixed when Spoiler starts on side B");
        if v == self.special {
            return Ok(role);
        }
        let tb = self.tree(Side::B);
        let c_b = tb.child_towards(self.special, v).expect("below the special child");
        let linked = self.history[1..]
            .iter()
            .find(|&&(_, y)| tb.in_subtree(c_b, y))
            .map(|&(x, _)| self.tree(Side::A).child_towards(role, x));
        let c_a = match linked {
            Some(Some(c)) => c,
            Some(None) => {
                return Err(StrategyError::Violated(format!("pick linked to {c_b} was not answered below the role")));
            }
            None => self.choose_free(Side::A, &self.ordinary_role_children(role), self.position(Side::B, c_b))?,
        };
        self.backward(c_a, c_b, v)
    }

    fn ensure_child(&mut self) -> Result<(), StrategyError> {
        if self.child.is_some() {
            return Ok(());
        }
        let role = self.role.expect("role fixed before the second part");
        let ta = self.tree(Side::A);
        let mut designated: Vec<(NodeId, NodeId)> = Vec::new();
        for &(x, y) in &self.history[1..] {
            if x != role && ta.in_subtree(role, x) && !designated.contains(&(y, x)) {
                designated.push((y, x));
            }
        }
        let child_a = SubBoard { board: self.b.board, root: self.special };
        let child_b = SubBoard { board: self.a.board, root: role };
        let start = self.start.expect("started");
        let mut child =
            StrategySession::new(Arc::clone(&self.shared), self.level - 1, self.k, child_a, child_b, designated)?;
        child.begin(start)?;
        let roots = match child_a.board {
            Board::Left => (child_a.root, child_b.root),
            Board::Right => (child_b.root, child_a.root),
        };
        let start_board = child.sub(start).board;
        let driver = VirtualBatches::new(child, self.level - 1, self.k, roots).with_start(start_board);
        self.child = Some(Box::new(driver));
        Ok(())
    }

    fn later_batch(&mut self, side: Side, mv: Move, batch: usize) -> Result<NodeId, StrategyError> {
        if self.role.is_none() {
            let kids = self.top_children(Side::A).to_vec();
            let last = kids.len() - 1;
            self.role = Some(self.choose_free(Side::A, &kids, Some(last))?);
        }
        let role = self.role.expect("just set");
        let v = mv.vertex;
        let in_role_pair = match side {
            Side::A => self.tree(Side::A).in_subtree(role, v),
            Side::B => self.tree(Side::B).in_subtree(self.special, v),
        };
        if in_role_pair {
            self.ensure_child()?;
            let driver = self.child.as_mut().expect("child created");
            return driver.feed(mv, batch - 1);
        }
        if let Some(mate) = self.previous_mate(side, v) {
            return Ok(mate);
        }
        let top = self.top(side, v).expect("roots are answered as repeats");
        self.answer_ordinary(side, v, top)
    }

    fn oriented(&self, pair: (NodeId, NodeId)) -> (NodeId, NodeId) {
        match self.a.board {
            Board::Left => pair,
            Board::Right => (pair.1, pair.0),
        }
    }

    /// Re-derives the conditions of the current phase from `history`
    /// (same layout as [`StrategySession::history`]).
    pub fn check_conditions(&self, history: &[(NodeId, NodeId)]) -> ConditionReport {
        let mut report = ConditionReport::default();
        let ell = self.designated.min(history.len().saturating_sub(1));
        let designated = &history[1..1 + ell];
        match self.validate_designated(designated) {
            DesignatedCheck::Valid => {
                for c in ["C1", "C2", "C3"] {
                    report.push(c, None);
                }
            }
            DesignatedCheck::Invalid { condition, reason } => {
                for c in ["C1", "C2", "C3"] {
                    report.push(c, (c == condition).then(|| reason.clone()));
                }
            }
        }
        let oriented: Vec<(NodeId, NodeId)> = history.iter().map(|&p| self.oriented(p)).collect();
        let main = check_winning(&self.shared.left, &self.shared.right, &oriented);
        report.push("Main", (!main.is_satisfied()).then(|| format!("{main:?}")));
        let Some(start) = self.start else {
            return report;
        };
        let rounds = &history[1 + ell..];
        let first = &rounds[..rounds.len().min(self.k)];
        match start {
            Side::B => self.check_first_from_b(&mut report, designated, first),
            Side::A => self.check_first_from_a(&mut report, first),
        }
        if rounds.len() > self.k {
            self.check_second(&mut report, start, &history[1..]);
        }
        report
    }

    fn check_first_from_b(
        &self,
        report: &mut ConditionReport,
        designated: &[(NodeId, NodeId)],
        first: &[(NodeId, NodeId)],
    ) {
        let Some(role) = self.role else {
            report.push("A1", Some("no role assigned".into()));
            return;
        };
        let (ta, tb) = (self.tree(Side::A), self.tree(Side::B));
        let mut a1 = None;
        for &(x, y) in first {
            if (x == self.a.root) != (y == self.b.root) {
                a1 = Some(format!("({x}, {y}) pairs a root with a non-root"));
                break;
            }
            if x == self.a.root {
                continue;
            }
            let (tx, ty) = (self.top(Side::A, x).unwrap(), self.top(Side::B, y).unwrap());
            let in_s = tx != role;
            if in_s != (ty != self.special) {
                a1 = Some(format!("({x}, {y}) crosses between the role pair and the rest"));
                break;
            }
            if in_s {
                if self.forward(tx, ty, x).ok() != Some(y) {
                    a1 = Some(format!("{y} is not the fixed image of {x}"));
                    break;
                }
                continue;
            }
            if (x == role) != (y == self.special) {
                a1 = Some(format!("({x}, {y}) pairs the role vertex with something else"));
                break;
            }
            if x == role {
                continue;
            }
            let (cx, cy) = (ta.child_towards(role, x).unwrap(), tb.child_towards(self.special, y).unwrap());
            if !self.ordinary_role_children(role).contains(&cx) {
                a1 = Some(format!("{x} lies below the role vertex's odd child"));
                break;
            }
            if self.forward(cx, cy, x).ok() != Some(y) {
                a1 = Some(format!("{y} is not the fixed image of {x} one level down"));
                break;
            }
        }
        report.push("A1", a1);

        let s_tops = |p: (NodeId, NodeId)| -> Option<(NodeId, NodeId)> {
            let tx = self.top(Side::A, p.0)?;
            let ty = self.top(Side::B, p.1)?;
            (tx != role && ty != self.special).then_some((tx, ty))
        };
        let mut a2 = None;
        let context: Vec<(NodeId, NodeId)> = designated.iter().chain(first).copied().collect();
        'outer: for (i, &p) in first.iter().enumerate() {
            for (j, &q) in context.iter().enumerate() {
                if j == designated.len() + i {
                    continue;
                }
                let same_a = matches!((self.top(Side::A, p.0), self.top(Side::A, q.0)), (Some(a), Some(b)) if a == b && a != role);
                let same_b = matches!((self.top(Side::B, p.1), self.top(Side::B, q.1)), (Some(a), Some(b)) if a == b && a != self.special);
                if same_a != same_b {
                    a2 = Some(format!("round pair {} and pair {} co-located on one side only", i + 1, j + 1));
                    break 'outer;
                }
            }
        }
        let _ = s_tops;
        report.push("A2", a2);

        let below = |p: (NodeId, NodeId)| -> (Option<NodeId>, Option<NodeId>) {
            let cx = if p.0 != role && ta.in_subtree(role, p.0) { ta.child_towards(role, p.0) } else { None };
            let cy = if p.1 != self.special && tb.in_subtree(self.special, p.1) {
                tb.child_towards(self.special, p.1)
            } else {
                None
            };
            (cx, cy)
        };
        let mut a3 = None;
        'outer3: for i in 0..first.len() {
            for j in 0..first.len() {
                if i == j {
                    continue;
                }
                let (xi, yi) = below(first[i]);
                let (xj, yj) = below(first[j]);
                let same_a = xi.is_some() && xi == xj;
                let same_b = yi.is_some() && yi == yj;
                if same_a != same_b {
                    a3 =
                        Some(format!("rounds {} and {} co-located below the role pair on one side only", i + 1, j + 1));
                    break 'outer3;
                }
            }
        }
        report.push("A3", a3);
    }

    fn check_first_from_a(&self, report: &mut ConditionReport, first: &[(NodeId, NodeId)]) {
        let mut c1 = None;
        let mut c2 = None;
        for &(x, y) in first {
            if (x == self.a.root) != (y == self.b.root) {
                c1 = Some(format!("({x}, {y}) pairs a root with a non-root"));
                continue;
            }
            if x == self.a.root {
                continue;
            }
            let (tx, ty) = (self.top(Side::A, x).unwrap(), self.top(Side::B, y).unwrap());
            if ty == self.special {
                c2 = Some(format!("{y} lies in the special subtree"));
            } else if self.forward(tx, ty, x).ok() != Some(y) {
                c2 = Some(format!("{y} is not the fixed image of {x}"));
            }
        }
        report.push("A'1", c1);
        report.push("A'2", c2);
        report.push("A'3", self.colocation_failure(first, None));
    }

    /// First pair of indices co-located in a top-level subtree on exactly one
    /// side, ignoring the role pair when `role` is given.
    fn colocation_failure(&self, pairs: &[(NodeId, NodeId)], role: Option<NodeId>) -> Option<String> {
        for i in 0..pairs.len() {
            for j in i + 1..pairs.len() {
                let ta = (self.top(Side::A, pairs[i].0), self.top(Side::A, pairs[j].0));
                let tb = (self.top(Side::B, pairs[i].1), self.top(Side::B, pairs[j].1));
                let same_a = matches!(ta, (Some(p), Some(q)) if p == q && Some(p) != role);
                let same_b = matches!(tb, (Some(p), Some(q)) if p == q && (role.is_none() || p != self.special));
                if same_a != same_b {
                    return Some(format!("pairs {} and {} co-located on one side only", i + 1, j + 1));
                }
            }
        }
        None
    }

    fn check_second(&self, report: &mut ConditionReport, start: Side, pairs: &[(NodeId, NodeId)]) {
        let label = |n: usize| match start {
            Side::B => format!("B{n}"),
            Side::A => format!("B'{n}"),
        };
        let Some(role) = self.role else {
            report.push(label(1), Some("no role assigned".into()));
            return;
        };
        let (ta, tb) = (self.tree(Side::A), self.tree(Side::B));
        let mut b1 = None;
        let mut b2 = None;
        let mut b4 = None;
        for &(x, y) in pairs {
            if (x == self.a.root) != (y == self.b.root) {
                b1 = Some(format!("({x}, {y}) pairs a root with a non-root"));
                continue;
            }
            if x == self.a.root {
                continue;
            }
            let in_role = ta.in_subtree(role, x);
            let in_special = tb.in_subtree(self.special, y);
            if in_role != in_special {
                b4 = Some(format!("({x}, {y}) crosses between the role pair and the rest"));
                continue;
            }
            if !in_role {
                let (tx, ty) = (self.top(Side::A, x).unwrap(), self.top(Side::B, y).unwrap());
                if self.forward(tx, ty, x).ok() != Some(y) {
                    b2 = Some(format!("{y} is not the fixed image of {x}"));
                }
            }
        }
        report.push(label(1), b1);
        report.push(label(2), b2);
        report.push(label(3), self.colocation_failure(pairs, Some(role)));
        if b4.is_none() {
            if let Some(driver) = &self.child {
                let child = driver.inner();
                let sub = child.check_conditions(&child.history);
                if !sub.all_pass() {
                    let failed: Vec<String> = sub.failures().map(|r| r.label.clone()).collect();
                    b4 = Some(format!("nested game fails {}", failed.join(", ")));
                }
                report.push(label(4), b4);
                report.absorb(&format!("{}/", label(4)), sub);
                return;
            }
        }
        report.push(label(4), b4);
    }

    /// Tracker state for debugging.
    pub fn tracker_json(&self) -> serde_json::Value {
        let free = |side: Side| -> Vec<NodeId> {
            self.top_children(side).iter().copied().filter(|&c| self.is_free(side, c)).collect()
        };
        json!({
            "level": self.level,
            "k": self.k,
            "a": self.a,
            "b": self.b,
            "special": self.special,
            "role": self.role,
            "start": self.start,
            "designated": self.designated(),
            "history": &self.history[1 + self.designated..],
            "free_a": free(Side::A),
            "free_b": free(Side::B),
            "child": self.child.as_ref().map(|d| json!({
                "virtual_rounds": d.virtual_rounds(),
                "padded_rounds": d.padded_rounds(),
                "session": d.inner().tracker_json(),
            })),
        })
    }
}

impl Strategy for StrategySession {
    fn respond(&mut self, spoiler: Move) -> Result<NodeId, StrategyError> {
        let side = self.side_of(spoiler)?;
        if self.start.is_none() {
            self.begin(side)?;
        }
        let start = self.start.expect("started");
        let batch = self.rounds_played() / self.k;
        if batch >= self.level {
            return Err(StrategyError::Desync(format!(
                "all {} rounds of the level {} game are played",
                self.level * self.k,
                self.level
            )));
        }
        let expected = if batch.is_multiple_of(2) { start } else { start.other() };
        if side != expected {
            return Err(StrategyError::Desync(format!("batch {} belongs to side {expected:?}", batch + 1)));
        }
        let reply =
            if batch == 0 { self.first_batch(side, spoiler.vertex)? } else { self.later_batch(side, spoiler, batch)? };
        let pair = match side {
            Side::A => (spoiler.vertex, reply),
            Side::B => (reply, spoiler.vertex),
        };
        self.history.push(pair);
        Ok(reply)
    }

    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }

    fn name(&self) -> String {
        "recursive".into()
    }

    fn selfcheck(&self) -> Option<ConditionReport> {
        Some(self.check_conditions(&self.history))
    }
}

/// The recursive strategy driving a whole fixed-batch game on a
/// construction pair (either tree may be the left board).
#[derive(Clone)]
pub struct RecursiveStrategy {
    session: StrategySession,
}

fn construction_params(tree: &Tree) -> Result<(Role, usize, usize), StrategyError> {
    let bp =
        tree.blueprint().ok_or_else(|| StrategyError::Precondition("tree carries no construction blueprint".into()))?;
    Ok((bp.role, bp.s, bp.m))
}

impl RecursiveStrategy {
    pub fn new(instance: &GameInstance) -> Result<Self, StrategyError> {
        let (lrole, ls, lm) = construction_params(&instance.left)?;
        let (rrole, rs, rm) = construction_params(&instance.right)?;
        if lrole == rrole || ls != rs || lm != rm {
            return Err(StrategyError::Precondition(
                "boards must be the T1 and T2 constructions with equal s and m".into(),
            ));
        }
        let (batches, k) = match instance.variant {
            GameVariant::FixedBatches { batches, batch_len } => (batches, batch_len),
            _ => return Err(StrategyError::Precondition("the recursive strategy plays fixed-batch games".into())),
        };
        if batches > ls {
            return Err(StrategyError::Precondition(format!("{batches} batches exceed s = {ls}")));
        }
        let a_board = if lrole == Role::T1 { Board::Left } else { Board::Right };
        let a = SubBoard { board: a_board, root: 0 };
        let b = SubBoard { board: a_board.other(), root: 0 };
        let designated =
            instance.designated.iter().map(|&(l, r)| if a_board == Board::Left { (l, r) } else { (r, l) }).collect();
        let shared = Shared::new(Arc::clone(&instance.left), Arc::clone(&instance.right));
        Ok(RecursiveStrategy { session: StrategySession::new(shared, ls, k, a, b, designated)? })
    }

    pub fn session(&self) -> &StrategySession {
        &self.session
    }
}

impl Strategy for RecursiveStrategy {
    fn respond(&mut self, spoiler: Move) -> Result<NodeId, StrategyError> {
        self.session.respond(spoiler)
    }

    fn box_clone(&self) -> Box<dyn Strategy> {
        Box::new(self.clone())
    }

    fn name(&self) -> String {
        self.session.name()
    }

    fn selfcheck(&self) -> Option<ConditionReport> {
        self.session.selfcheck()
    }
}

/// Checks designated pairs, given as `(left, right)`, against a construction
/// pair.
pub fn validate_designated(
    instance: &GameInstance,
    pairs: &[(NodeId, NodeId)],
) -> Result<DesignatedCheck, StrategyError> {
    let bare = GameInstance { designated: Vec::new(), ..instance.clone() };
    let strategy = RecursiveStrategy::new(&bare)?;
    let oriented: Vec<(NodeId, NodeId)> = pairs.iter().map(|&p| strategy.session.oriented(p)).collect();
    Ok(strategy.session.validate_designated(&oriented))
}

/// All valid single designated pairs of a construction pair, as `(left, right)`.
pub fn single_designations(instance: &GameInstance) -> Result<Vec<(NodeId, NodeId)>, StrategyError> {
    let bare = GameInstance { designated: Vec::new(), ..instance.clone() };
    let strategy = RecursiveStrategy::new(&bare)?;
    let s = &strategy.session;
    Ok(s.single_designations()?.into_iter().map(|p| s.oriented(p)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::build_construction;

    fn game(s: usize, k: usize, m: usize, designated: Vec<(NodeId, NodeId)>) -> GameInstance {
        let l = Arc::new(build_construction(Role::T1, s, k, m).unwrap());
        let r = Arc::new(build_construction(Role::T2, s, k, m).unwrap());
        GameInstance::new(l, r, GameVariant::FixedBatches { batches: s, batch_len: k }, designated).unwrap()
    }

    #[test]
    fn fresh_session_passes_vacuously() {
        let s = RecursiveStrategy::new(&game(1, 1, 1, vec![])).unwrap();
        assert!(s.selfcheck().unwrap().all_pass());
        assert_eq!(s.session().role(), None);
        assert_eq!(s.session().start(), None);
    }

    #[test]
    fn base_right_start_matches_index() {
        // T2(1,2,2): v1 = 1 (children 2, 3), v2 = 4 (5, 6), v3 = 7
        // T1(1,2,2): u1 = 1, u2 = 4, u3 = 7
        let mut s = RecursiveStrategy::new(&game(1, 2, 2, vec![])).unwrap();
        assert_eq!(s.respond(Move::right(4)).unwrap(), 4);
        assert_eq!(s.respond(Move::right(4)).unwrap(), 4);
        assert!(s.selfcheck().unwrap().all_pass());
    }

    #[test]
    fn base_right_start_special_goes_to_role() {
        let mut s = RecursiveStrategy::new(&game(1, 2, 2, vec![])).unwrap();
        assert_eq!(s.respond(Move::right(7)).unwrap(), 7);
        assert_eq!(s.session().role(), Some(7));
    }

    #[test]
    fn base_left_start_fresh_child() {
        let mut s = RecursiveStrategy::new(&game(1, 2, 2, vec![])).unwrap();
        // u3's leaf maps under a free ordinary v (v1 is the lowest id)
        let w = s.respond(Move::left(8)).unwrap();
        let t2 = build_construction(Role::T2, 1, 2, 2).unwrap();
        assert_eq!(t2.parent(w), Some(1));
        assert!(s.selfcheck().unwrap().all_pass());
    }

    #[test]
    fn designated_validation_examples() {
        let g = game(2, 1, 2, vec![]);
        assert!(validate_designated(&g, &[]).unwrap().is_valid());
        let singles = single_designations(&g).unwrap();
        // three T1 children of 8 nodes each, two ordinary T2 children
        assert_eq!(singles.len(), 3 * 2 * 8);
        for &p in &singles {
            assert!(validate_designated(&g, &[p]).unwrap().is_valid());
        }
        let g = game(1, 2, 2, vec![]);
        let (t1, t2) = (&g.left, &g.right);
        let u1 = t1.children(0)[0];
        let v1 = t2.children(0)[0];
        let v2 = t2.children(0)[1];
        let bad = [(u1, v1), (t1.children(u1)[0], t2.children(v2)[0])];
        match validate_designated(&g, &bad) {
            Ok(DesignatedCheck::Invalid { condition, .. }) => assert_eq!(condition, "C2"),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn role_untouched_by_designated() {
        let g0 = game(2, 1, 2, vec![]);
        let u1 = g0.left.children(0)[0];
        let v1 = g0.right.children(0)[0];
        let g = game(2, 1, 2, vec![(u1, v1)]);
        let mut s = RecursiveStrategy::new(&g).unwrap();
        s.respond(Move::right(0)).unwrap();
        let role = s.session().role().unwrap();
        assert_ne!(role, u1);
        assert!(g.left.children(0).contains(&role));
    }

    #[test]
    fn designated_on_left_start_rejected() {
        let g0 = game(2, 1, 2, vec![]);
        let u1 = g0.left.children(0)[0];
        let v1 = g0.right.children(0)[0];
        let mut s = RecursiveStrategy::new(&game(2, 1, 2, vec![(u1, v1)])).unwrap();
        assert!(matches!(s.respond(Move::left(0)), Err(StrategyError::Precondition(_))));
    }

    #[test]
    fn corrupted_history_fails_a_condition() {
        let mut s = RecursiveStrategy::new(&game(1, 2, 2, vec![])).unwrap();
        s.respond(Move::right(2)).unwrap();
        s.respond(Move::right(6)).unwrap();
        let session = s.session();
        let mut hist = session.history().to_vec();
        assert!(session.check_conditions(&hist).all_pass());
        // swap the two T2 picks
        let (y1, y2) = (hist[1].1, hist[2].1);
        hist[1].1 = y2;
        hist[2].1 = y1;
        assert!(!session.check_conditions(&hist).all_pass());
    }

    #[test]
    fn too_many_rounds_is_desync() {
        let mut s = RecursiveStrategy::new(&game(1, 1, 1, vec![])).unwrap();
        s.respond(Move::left(1)).unwrap();
        assert!(matches!(s.respond(Move::left(1)), Err(StrategyError::Desync(_))));
    }

    #[test]
    fn swapped_boards_supported() {
        let g = game(1, 1, 1, vec![]);
        let swapped = GameInstance::new(g.right.clone(), g.left.clone(), g.variant.clone(), vec![]).unwrap();
        let mut s = RecursiveStrategy::new(&swapped).unwrap();
        // left is now T2; its childless v2 = 3 must be answered by a T1 child
        let w = s.respond(Move::left(3)).unwrap();
        assert_eq!(g.left.parent(w), Some(0));
    }
}
