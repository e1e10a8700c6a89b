//! The recursive vertex properties `P_i` and the sentences `KEIN_i = P_i(R)`.
//!
//! `P_0(x)`: `x` has no child. `P_i(x)`: no child of `x` satisfies `P_{i-1}`.

use crate::logic::formula::{Formula, Term};
use crate::tree::{NodeId, Tree};

fn bound_name(level: usize) -> String {
    format!("y{level}")
}

/// `P_i(subject)` written out literally; level `j` binds `y{j}`.
pub fn p_formula(i: usize, subject: Term) -> Formula {
    let y = bound_name(i);
    let edge = Formula::parent_of(Term::var(y.clone()), subject);
    if i == 0 {
        Formula::forall(y, Formula::not(edge))
    } else {
        let inner = p_formula(i - 1, Term::var(y.clone()));
        Formula::forall(y, Formula::implies(edge, Formula::not(inner)))
    }
}

/// `P_i(var)` with `var` free.
pub fn formula_for_p(i: usize, var: &str) -> Formula {
    p_formula(i, Term::var(var))
}

/// The sentence `KEIN_i`.
pub fn formula_for_kein(i: usize) -> Formula {
    p_formula(i, Term::Root)
}

/// Truth table of `P_0 .. P_max` over every vertex, computed bottom-up
/// without the formula evaluator.
#[derive(Debug, Clone)]
pub struct PropertyTable {
    levels: Vec<Vec<bool>>,
}

impl PropertyTable {
    pub fn new(tree: &Tree, max_level: usize) -> Self {
        let leafless: Vec<bool> = (0..tree.len()).map(|v| tree.children(v).is_empty()).collect();
        let mut levels = vec![leafless];
        for i in 1..=max_level {
            let prev = &levels[i - 1];
            let row = (0..tree.len()).map(|v| tree.children(v).iter().all(|&c| !prev[c])).collect();
            levels.push(row);
        }
        PropertyTable { levels }
    }

    pub fn get(&self, i: usize, v: NodeId) -> bool {
        self.levels[i][v]
    }

    pub fn max_level(&self) -> usize {
        self.levels.len() - 1
    }
}

/// Direct evaluation of `P_i(v)`.
pub fn eval_p_direct(tree: &Tree, i: usize, v: NodeId) -> bool {
    PropertyTable::new(tree, i).get(i, v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::logic::formula::Assignment;
    use crate::tree::{build_construction, Role};

    #[test]
    fn p0_literal() {
        let expected = Formula::forall("y0", Formula::not(Formula::parent_of(Term::var("y0"), Term::var("x"))));
        assert_eq!(formula_for_p(0, "x"), expected);
        assert_eq!(formula_for_kein(0).to_string(), "A y0 . !(pi(y0) = R)");
    }

    #[test]
    fn kein_metrics() {
        for i in 0..=5 {
            let f = formula_for_kein(i);
            assert!(f.is_sentence());
            assert_eq!(f.qd(), i + 1);
            assert_eq!(f.aqd_syntactic(), i);
        }
    }

    #[test]
    fn subject_named_like_a_binder_is_not_captured() {
        let f = formula_for_p(1, "y0");
        assert_eq!(f.free_vars().into_iter().collect::<Vec<_>>(), vec!["y0".to_string()]);
    }

    #[test]
    fn base_pair_split() {
        let t1 = build_construction(Role::T1, 1, 1, 1).unwrap();
        let t2 = build_construction(Role::T2, 1, 1, 1).unwrap();
        assert!(eval_p_direct(&t1, 1, 0));
        assert!(!eval_p_direct(&t2, 1, 0));
        assert!(eval_p_direct(&t1, 0, 2));
    }

    #[test]
    fn direct_matches_formula_small() {
        let t = build_construction(Role::T2, 2, 1, 2).unwrap();
        for i in 0..=3 {
            let table = PropertyTable::new(&t, i);
            let f = formula_for_p(i, "x");
            for v in 0..t.len() {
                let via_formula = f.eval(&t, &Assignment::new().with("x", v)).unwrap();
                assert_eq!(via_formula, table.get(i, v), "i={i} v={v}");
            }
        }
    }
}
