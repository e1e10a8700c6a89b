use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::LogicError;
use crate::tree::{NodeId, Tree};

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Term {
    Var(String),
    /// The root constant `R`.
    Root,
}

impl Term {
    pub fn var(name: impl Into<String>) -> Term {
        let name = name.into();
        assert!(!name.is_empty(), "variable names must be nonempty");
        Term::Var(name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    pub fn dual(self) -> Quantifier {
        match self {
            Quantifier::Exists => Quantifier::Forall,
            Quantifier::Forall => Quantifier::Exists,
        }
    }
}

/// First-order formulas over `{R, =, pi}`.
///
/// Build quantified formulas through [`Formula::exists`] / [`Formula::forall`]
/// (or [`Formula::quant`]); they rename inner binders so that no quantifier
/// shadows an enclosing one.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Formula {
    Eq(Term, Term),
    /// `pi(child) = parent`.
    ParentOf {
        child: Term,
        parent: Term,
    },
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Or(Box<Formula>, Box<Formula>),
    Implies(Box<Formula>, Box<Formula>),
    Iff(Box<Formula>, Box<Formula>),
    Quant(Quantifier, String, Box<Formula>),
}

/// A partial map from variable names to vertices.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Assignment(BTreeMap<String, NodeId>);

impl Assignment {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn with(mut self, var: impl Into<String>, v: NodeId) -> Self {
        self.0.insert(var.into(), v);
        self
    }

    pub fn insert(&mut self, var: impl Into<String>, v: NodeId) {
        self.0.insert(var.into(), v);
    }

    pub fn get(&self, var: &str) -> Option<NodeId> {
        self.0.get(var).copied()
    }
}

impl Formula {
    pub fn eq(a: Term, b: Term) -> Formula {
        Formula::Eq(a, b)
    }

    pub fn parent_of(child: Term, parent: Term) -> Formula {
        Formula::ParentOf { child, parent }
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(f: Formula) -> Formula {
        Formula::Not(Box::new(f))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::Or(Box::new(a), Box::new(b))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::Iff(Box::new(a), Box::new(b))
    }

    pub fn exists(var: impl Into<String>, body: Formula) -> Formula {
        Formula::quant(Quantifier::Exists, var, body)
    }

    pub fn forall(var: impl Into<String>, body: Formula) -> Formula {
        Formula::quant(Quantifier::Forall, var, body)
    }

    pub fn quant(q: Quantifier, var: impl Into<String>, body: Formula) -> Formula {
        let var = var.into();
        assert!(!var.is_empty(), "variable names must be nonempty");
        let mut used = BTreeSet::new();
        body.collect_names(&mut used);
        used.insert(var.clone());
        let body = body.rename_binders_of(&var, &mut used);
        Formula::Quant(q, var, Box::new(body))
    }

    fn collect_names(&self, out: &mut BTreeSet<String>) {
        match self {
            Formula::Eq(a, b) | Formula::ParentOf { child: a, parent: b } => {
                for t in [a, b] {
                    if let Term::Var(v) = t {
                        out.insert(v.clone());
                    }
                }
            }
            Formula::Not(f) => f.collect_names(out),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                a.collect_names(out);
                b.collect_names(out);
            }
            Formula::Quant(_, v, body) => {
                out.insert(v.clone());
                body.collect_names(out);
            }
        }
    }

    // Renames every binder of `var` inside self (and its bound occurrences)
    // to a name not in `used`.
    fn rename_binders_of(self, var: &str, used: &mut BTreeSet<String>) -> Formula {
        match self {
            Formula::Quant(q, v, body) if v == var => {
                let fresh = fresh_name(var, used);
                used.insert(fresh.clone());
                let body = body.substitute(var, &Term::Var(fresh.clone()));
                let body = body.rename_binders_of(var, used);
                Formula::Quant(q, fresh, Box::new(body))
            }
            Formula::Quant(q, v, body) => Formula::Quant(q, v, Box::new(body.rename_binders_of(var, used))),
            Formula::Not(f) => Formula::not(f.rename_binders_of(var, used)),
            Formula::And(a, b) => Formula::and(a.rename_binders_of(var, used), b.rename_binders_of(var, used)),
            Formula::Or(a, b) => Formula::or(a.rename_binders_of(var, used), b.rename_binders_of(var, used)),
            Formula::Implies(a, b) => Formula::implies(a.rename_binders_of(var, used), b.rename_binders_of(var, used)),
            Formula::Iff(a, b) => Formula::iff(a.rename_binders_of(var, used), b.rename_binders_of(var, used)),
            atom => atom,
        }
    }

    /// Replaces free occurrences of `var` by `term`. Callers guarantee that
    /// `term` is not captured.
    pub fn substitute(self, var: &str, term: &Term) -> Formula {
        let sub = |t: Term| match t {
            Term::Var(ref v) if v == var => term.clone(),
            other => other,
        };
        match self {
            Formula::Eq(a, b) => Formula::Eq(sub(a), sub(b)),
            Formula::ParentOf { child, parent } => Formula::ParentOf { child: sub(child), parent: sub(parent) },
            Formula::Not(f) => Formula::not(f.substitute(var, term)),
            Formula::And(a, b) => Formula::and(a.substitute(var, term), b.substitute(var, term)),
            Formula::Or(a, b) => Formula::or(a.substitute(var, term), b.substitute(var, term)),
            Formula::Implies(a, b) => Formula::implies(a.substitute(var, term), b.substitute(var, term)),
            Formula::Iff(a, b) => Formula::iff(a.substitute(var, term), b.substitute(var, term)),
            Formula::Quant(q, v, body) if v == var => Formula::Quant(q, v, body),
            Formula::Quant(q, v, body) => Formula::Quant(q, v, Box::new(body.substitute(var, term))),
        }
    }

    pub fn free_vars(&self) -> BTreeSet<String> {
        fn go(f: &Formula, bound: &mut Vec<String>, out: &mut BTreeSet<String>) {
            match f {
                Formula::Eq(a, b) | Formula::ParentOf { child: a, parent: b } => {
                    for t in [a, b] {
                        if let Term::Var(v) = t {
                            if !bound.contains(v) {
                                out.insert(v.clone());
                            }
                        }
                    }
                }
                Formula::Not(g) => go(g, bound, out),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                    go(a, bound, out);
                    go(b, bound, out);
                }
                Formula::Quant(_, v, body) => {
                    bound.push(v.clone());
                    go(body, bound, out);
                    bound.pop();
                }
            }
        }
        let mut out = BTreeSet::new();
        go(self, &mut Vec::new(), &mut out);
        out
    }

    pub fn is_sentence(&self) -> bool {
        self.free_vars().is_empty()
    }

    /// Quantifier depth of this syntax tree.
    pub fn qd(&self) -> usize {
        match self {
            Formula::Eq(..) | Formula::ParentOf { .. } => 0,
            Formula::Not(f) => f.qd(),
            Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => a.qd().max(b.qd()),
            Formula::Quant(_, _, body) => 1 + body.qd(),
        }
    }

    /// Negation normal form: negations only on atoms, no `->` or `<->`.
    pub fn nnf(&self) -> Formula {
        self.nnf_signed(true)
    }

    fn nnf_signed(&self, positive: bool) -> Formula {
        match (self, positive) {
            (Formula::Eq(..) | Formula::ParentOf { .. }, true) => self.clone(),
            (Formula::Eq(..) | Formula::ParentOf { .. }, false) => Formula::not(self.clone()),
            (Formula::Not(f), p) => f.nnf_signed(!p),
            (Formula::And(a, b), true) => Formula::and(a.nnf_signed(true), b.nnf_signed(true)),
            (Formula::And(a, b), false) => Formula::or(a.nnf_signed(false), b.nnf_signed(false)),
            (Formula::Or(a, b), true) => Formula::or(a.nnf_signed(true), b.nnf_signed(true)),
            (Formula::Or(a, b), false) => Formula::and(a.nnf_signed(false), b.nnf_signed(false)),
            // a -> b  ==  !a | b
            (Formula::Implies(a, b), true) => Formula::or(a.nnf_signed(false), b.nnf_signed(true)),
            (Formula::Implies(a, b), false) => Formula::and(a.nnf_signed(true), b.nnf_signed(false)),
            // a <-> b  ==  (a -> b) & (b -> a)
            (Formula::Iff(a, b), p) => {
                let expanded = Formula::and(
                    Formula::implies((**a).clone(), (**b).clone()),
                    Formula::implies((**b).clone(), (**a).clone()),
                );
                expanded.nnf_signed(p)
            }
            (Formula::Quant(q, v, body), true) => Formula::Quant(*q, v.clone(), Box::new(body.nnf_signed(true))),
            (Formula::Quant(q, v, body), false) => {
                Formula::Quant(q.dual(), v.clone(), Box::new(body.nnf_signed(false)))
            }
        }
    }

    pub fn is_nnf(&self) -> bool {
        match self {
            Formula::Eq(..) | Formula::ParentOf { .. } => true,
            Formula::Not(f) => matches!(**f, Formula::Eq(..) | Formula::ParentOf { .. }),
            Formula::And(a, b) | Formula::Or(a, b) => a.is_nnf() && b.is_nnf(),
            Formula::Implies(..) | Formula::Iff(..) => false,
            Formula::Quant(_, _, body) => body.is_nnf(),
        }
    }

    /// Largest number of exists/forall switches along a nested chain of
    /// quantifiers, measured on the negation normal form.
    pub fn aqd_syntactic(&self) -> usize {
        fn alt(f: &Formula, last: Option<Quantifier>) -> usize {
            match f {
                Formula::Eq(..) | Formula::ParentOf { .. } => 0,
                Formula::Not(g) => alt(g, last),
                Formula::And(a, b) | Formula::Or(a, b) | Formula::Implies(a, b) | Formula::Iff(a, b) => {
                    alt(a, last).max(alt(b, last))
                }
                Formula::Quant(q, _, body) => {
                    let switch = usize::from(last.is_some_and(|l| l != *q));
                    switch + alt(body, Some(*q))
                }
            }
        }
        alt(&self.nnf(), None)
    }

    /// Tarskian satisfaction. Quantifiers range over every vertex including
    /// the root; `pi(c) = p` is false whenever `c` is the root.
    pub fn eval(&self, tree: &Tree, env: &Assignment) -> Result<bool, LogicError> {
        let mut stack: Vec<(&str, NodeId)> = Vec::new();
        for (name, &v) in &env.0 {
            if !tree.contains(v) {
                return Err(LogicError::InvalidVertex(v));
            }
            stack.push((name.as_str(), v));
        }
        self.eval_in(tree, &mut stack)
    }

    /// Evaluates a sentence.
    pub fn holds(&self, tree: &Tree) -> Result<bool, LogicError> {
        self.eval(tree, &Assignment::new())
    }

    fn eval_in<'a>(&'a self, tree: &Tree, stack: &mut Vec<(&'a str, NodeId)>) -> Result<bool, LogicError> {
        let lookup = |t: &Term, stack: &Vec<(&str, NodeId)>| -> Result<NodeId, LogicError> {
            match t {
                Term::Root => Ok(tree.root()),
                Term::Var(v) => stack
                    .iter()
                    .rev()
                    .find(|(n, _)| n == v)
                    .map(|&(_, id)| id)
                    .ok_or_else(|| LogicError::UnboundVariable(v.clone())),
            }
        };
        Ok(match self {
            Formula::Eq(a, b) => lookup(a, stack)? == lookup(b, stack)?,
            Formula::ParentOf { child, parent } => {
                let c = lookup(child, stack)?;
                let p = lookup(parent, stack)?;
                tree.parent(c) == Some(p)
            }
            Formula::Not(f) => !f.eval_in(tree, stack)?,
            Formula::And(a, b) => a.eval_in(tree, stack)? && b.eval_in(tree, stack)?,
            Formula::Or(a, b) => a.eval_in(tree, stack)? || b.eval_in(tree, stack)?,
            Formula::Implies(a, b) => !a.eval_in(tree, stack)? || b.eval_in(tree, stack)?,
            Formula::Iff(a, b) => a.eval_in(tree, stack)? == b.eval_in(tree, stack)?,
            Formula::Quant(q, v, body) => {
                let want = *q == Quantifier::Exists;
                let mut result = !want;
                for x in 0..tree.len() {
                    stack.push((v.as_str(), x));
                    let r = body.eval_in(tree, stack);
                    stack.pop();
                    if r? == want {
                        result = want;
                        break;
                    }
                }
                result
            }
        })
    }
}

fn fresh_name(base: &str, used: &BTreeSet<String>) -> String {
    (1..).map(|i| format!("{base}{i}")).find(|c| !used.contains(c)).expect("unbounded search finds a name")
}

impl fmt::Display for Term {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Term::Var(v) => write!(f, "{v}"),
            Term::Root => write!(f, "R"),
        }
    }
}
