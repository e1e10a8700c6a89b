//! First-order logic over rooted trees with the root constant `R`,
//! equality and the parent atom `pi(y) = x`.

mod formula;
pub mod kein;
mod syntax;

pub use formula::{Assignment, Formula, Quantifier, Term};
pub use kein::{eval_p_direct, formula_for_kein, formula_for_p, p_formula, PropertyTable};
pub use syntax::parse_formula;
