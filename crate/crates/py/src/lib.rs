//! Python bindings. Reports cross the boundary as JSON strings; trees are
//! passed in the same JSON format the CLI writes.

use std::sync::Arc;

use aqd_core::game::{solve_minimax, GameInstance, GameVariant, SolverConfig, Winner};
use aqd_core::harness::{
    construction_pair, describe_instance, exhaustive_spoiler_sweep, lower_bound_pipeline, random_spoiler_sweep,
    recursive_strategy, verify_construction as verify, PipelineConfig, SweepLimits,
};
use aqd_core::logic::{eval_p_direct, parse_formula};
use aqd_core::{build_construction, NodeId, Role, Tree};
use pyo3::exceptions::{PyRuntimeError, PyValueError};
use pyo3::prelude::*;

fn value_err(e: impl std::fmt::Display) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn to_json(v: &impl serde::Serialize) -> PyResult<String> {
    serde_json::to_string(v).map_err(|e| PyRuntimeError::new_err(e.to_string()))
}

fn tree(text: &str) -> PyResult<Arc<Tree>> {
    Tree::from_json(text).map(Arc::new).map_err(value_err)
}

/// JSON for T1 or T2 with parameters (s, k, m).
#[pyfunction]
fn build_tree(role: &str, s: usize, k: usize, m: usize) -> PyResult<String> {
    let role: Role = role.parse().map_err(value_err)?;
    Ok(build_construction(role, s, k, m).map_err(value_err)?.to_json())
}

/// P_i at `vertex` (the root by default).
#[pyfunction]
#[pyo3(signature = (tree_json, i, vertex=None))]
fn eval_p(tree_json: &str, i: usize, vertex: Option<NodeId>) -> PyResult<bool> {
    let t = tree(tree_json)?;
    let v = vertex.unwrap_or(t.root());
    t.check_node(v).map_err(value_err)?;
    Ok(eval_p_direct(&t, i, v))
}

/// `(qd, aqd)` of a formula in the text syntax.
#[pyfunction]
fn formula_metrics(formula: &str) -> PyResult<(usize, usize)> {
    let f = parse_formula(formula).map_err(value_err)?;
    Ok((f.qd(), f.aqd_syntactic()))
}

/// Truth of a sentence on a tree.
#[pyfunction]
fn eval_formula(formula: &str, tree_json: &str) -> PyResult<bool> {
    let f = parse_formula(formula).map_err(value_err)?;
    f.holds(&*tree(tree_json)?).map_err(value_err)
}

/// Exact winner of a game; `variant` is `switch:s,r`, `batch:s,k` or
/// `sizes:i1,...`.
#[pyfunction]
#[pyo3(signature = (left_json, right_json, variant, designated=None))]
fn solve(
    py: Python<'_>,
    left_json: &str,
    right_json: &str,
    variant: &str,
    designated: Option<Vec<(NodeId, NodeId)>>,
) -> PyResult<String> {
    let variant = GameVariant::parse(variant).map_err(value_err)?;
    let instance = GameInstance::new(tree(left_json)?, tree(right_json)?, variant, designated.unwrap_or_default())
        .map_err(value_err)?;
    let outcome = py.detach(|| solve_minimax(&instance, &SolverConfig::default())).map_err(value_err)?;
    let line: Option<Vec<(String, NodeId)>> =
        outcome.spoiler_line.map(|l| l.into_iter().map(|(mv, reply)| (mv.to_string(), reply)).collect());
    to_json(&serde_json::json!({
        "instance": describe_instance(&instance),
        "winner": match outcome.winner { Winner::Spoiler => "spoiler", Winner::Duplicator => "duplicator" },
        "states_explored": outcome.states_explored,
        "spoiler_line": line,
    }))
}

/// Sweeps the recursive strategy on the construction pair (s, k, m), all
/// lines by default or `random` seeded ones.
#[pyfunction]
#[pyo3(signature = (s, k, m=None, variant=None, random=None, seed=1, max_lines=20_000_000))]
#[allow(clippy::too_many_arguments)]
fn sweep(
    py: Python<'_>,
    s: usize,
    k: usize,
    m: Option<usize>,
    variant: Option<&str>,
    random: Option<u64>,
    seed: u64,
    max_lines: u128,
) -> PyResult<String> {
    let variant = match variant {
        Some(v) => GameVariant::parse(v).map_err(value_err)?,
        None => GameVariant::FixedBatches { batches: s, batch_len: k },
    };
    let (l, r) = construction_pair(s, k, m.unwrap_or(s * k)).map_err(value_err)?;
    let instance = GameInstance::new(l, r, variant, vec![]).map_err(value_err)?;
    let strategy = recursive_strategy(&instance).map_err(value_err)?;
    let limits = SweepLimits { max_lines, ..SweepLimits::default() };
    let (instance, limits) = (&instance, &limits);
    let report = py
        .detach(move || match random {
            Some(n) => random_spoiler_sweep(instance, &strategy, n, seed, limits),
            None => exhaustive_spoiler_sweep(instance, &strategy, limits),
        })
        .map_err(value_err)?;
    to_json(&report)
}

/// Checks that T1 satisfies KEIN_s and T2 does not.
#[pyfunction]
fn verify_construction(s: usize, k: usize, m: usize) -> PyResult<String> {
    to_json(&verify(s, k, m).map_err(value_err)?)
}

/// The lower-bound pipeline for KEIN_s with m = s * k.
#[pyfunction]
fn lower_bound(py: Python<'_>, s: usize, k: usize) -> PyResult<String> {
    let report = py.detach(|| lower_bound_pipeline(s, k, &PipelineConfig::default())).map_err(value_err)?;
    to_json(&report)
}

#[pymodule]
fn aqd(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_function(wrap_pyfunction!(build_tree, m)?)?;
    m.add_function(wrap_pyfunction!(eval_p, m)?)?;
    m.add_function(wrap_pyfunction!(formula_metrics, m)?)?;
    m.add_function(wrap_pyfunction!(eval_formula, m)?)?;
    m.add_function(wrap_pyfunction!(solve, m)?)?;
    m.add_function(wrap_pyfunction!(sweep, m)?)?;
    m.add_function(wrap_pyfunction!(verify_construction, m)?)?;
    m.add_function(wrap_pyfunction!(lower_bound, m)?)?;
    Ok(())
}
