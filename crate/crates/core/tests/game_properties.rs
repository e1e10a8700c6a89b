use std::sync::Arc;

use aqd_core::game::{check_winning, solve_minimax, GameInstance, GameVariant, SolverConfig, Winner};
use aqd_core::harness::{exhaustive_spoiler_sweep, random_spoiler_sweep, SweepLimits};
use aqd_core::strategy::RecursiveStrategy;
use aqd_core::{build_construction, NodeId, Role, Tree};
use proptest::prelude::*;

fn arb_tree(max: usize) -> impl Strategy<Value = Tree> {
    prop::collection::vec(any::<prop::sample::Index>(), 0..max).prop_map(|picks| {
        let mut parents = vec![None];
        for (i, pick) in picks.iter().enumerate() {
            parents.push(Some(pick.index(i + 1)));
        }
        Tree::from_parents(&parents).unwrap()
    })
}

/// `tree` with its non-root ids permuted by `order`.
fn relabel(tree: &Tree, order: &[prop::sample::Index]) -> Tree {
    let n = tree.len();
    let mut rest: Vec<NodeId> = (1..n).collect();
    let mut perm = vec![0; n];
    for (v, idx) in (1..n).zip(order.iter().cycle()) {
        perm[v] = rest.remove(idx.index(rest.len()));
    }
    let mut parents = vec![None; n];
    for v in 1..n {
        parents[perm[v]] = Some(perm[tree.parent(v).unwrap()]);
    }
    Tree::from_parents(&parents).unwrap()
}

fn arb_variant() -> impl Strategy<Value = GameVariant> {
    prop_oneof![
        (0usize..3, 1usize..4).prop_map(|(s, r)| GameVariant::SwitchBudget { switches: s.min(r), rounds: r }),
        (1usize..3, 1usize..3).prop_map(|(b, k)| GameVariant::FixedBatches { batches: b, batch_len: k }),
        prop::collection::vec(1usize..3, 1..3).prop_map(GameVariant::BatchSizes),
    ]
}

fn game(left: Tree, right: Tree, variant: GameVariant) -> GameInstance {
    GameInstance::new(Arc::new(left), Arc::new(right), variant, vec![]).unwrap()
}

fn winner(g: &GameInstance) -> Winner {
    solve_minimax(g, &SolverConfig::default()).unwrap().winner
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn isomorphic_copies_keep_the_winner(
        a in arb_tree(7), b in arb_tree(7), v in arb_variant(), order in prop::collection::vec(any::<prop::sample::Index>(), 1..8)
    ) {
        let base = winner(&game(a.clone(), b.clone(), v.clone()));
        prop_assert_eq!(winner(&game(relabel(&a, &order), b.clone(), v.clone())), base);
        prop_assert_eq!(winner(&game(a, relabel(&b, &order), v)), base);
    }

    #[test]
    fn swapping_boards_keeps_the_winner(a in arb_tree(7), b in arb_tree(7), v in arb_variant()) {
        prop_assert_eq!(winner(&game(a.clone(), b.clone(), v.clone())), winner(&game(b, a, v)));
    }

    #[test]
    fn isomorphic_trees_are_duplicator_wins(a in arb_tree(8), v in arb_variant(), order in prop::collection::vec(any::<prop::sample::Index>(), 1..8)) {
        let b = relabel(&a, &order);
        prop_assert_eq!(winner(&game(a, b, v)), Winner::Duplicator);
    }

    #[test]
    fn pruning_does_not_change_the_winner(a in arb_tree(7), b in arb_tree(7), v in arb_variant()) {
        let g = game(a, b, v);
        let plain = SolverConfig { prune_symmetry: false, parallel: false, ..SolverConfig::default() };
        prop_assert_eq!(solve_minimax(&g, &plain).unwrap().winner, winner(&g));
    }

    #[test]
    fn switch_budget_is_monotone(a in arb_tree(6), b in arb_tree(6), s in 0usize..3, r in 1usize..4) {
        let s = s.min(r);
        let won = winner(&game(a.clone(), b.clone(), GameVariant::SwitchBudget { switches: s, rounds: r })) == Winner::Duplicator;
        if won {
            for r2 in 1..=r {
                for s2 in 0..=s.min(r2) {
                    let w = winner(&game(a.clone(), b.clone(), GameVariant::SwitchBudget { switches: s2, rounds: r2 }));
                    prop_assert_eq!(w, Winner::Duplicator, "({}, {}) won but ({}, {}) lost", s, r, s2, r2);
                }
            }
        }
    }

    #[test]
    fn broken_designated_pairs_lose_at_once(a in arb_tree(7), b in arb_tree(7), v in arb_variant(), x in any::<prop::sample::Index>(), y in any::<prop::sample::Index>()) {
        let pair = (x.index(a.len()), y.index(b.len()));
        let history = [(a.root(), b.root()), pair];
        prop_assume!(!check_winning(&a, &b, &history).is_satisfied());
        let g = GameInstance::new(Arc::new(a), Arc::new(b), v, vec![pair]).unwrap();
        let out = solve_minimax(&g, &SolverConfig::default()).unwrap();
        prop_assert_eq!(out.winner, Winner::Spoiler);
        prop_assert_eq!(out.spoiler_line.map(|l| l.len()), Some(0));
    }

    #[test]
    fn violations_persist_in_longer_histories(
        a in arb_tree(8), b in arb_tree(8),
        picks in prop::collection::vec((any::<prop::sample::Index>(), any::<prop::sample::Index>()), 0..6)
    ) {
        let mut history = vec![(a.root(), b.root())];
        history.extend(picks.iter().map(|(x, y)| (x.index(a.len()), y.index(b.len()))));
        let full = check_winning(&a, &b, &history).is_satisfied();
        let some_prefix_broken = (1..=history.len()).any(|n| !check_winning(&a, &b, &history[..n]).is_satisfied());
        prop_assert_eq!(full, !some_prefix_broken);
    }

    #[test]
    fn extracted_strategies_never_lose(a in arb_tree(6), b in arb_tree(6), v in arb_variant()) {
        let g = game(a, b, v);
        let out = solve_minimax(&g, &SolverConfig::default()).unwrap();
        if let Some(strategy) = out.duplicator_strategy() {
            let r = exhaustive_spoiler_sweep(&g, &strategy, &SweepLimits::default()).unwrap();
            prop_assert_eq!(r.losses, 0, "{:?}", r.first_loss);
        }
    }
}

#[test]
fn sweeps_are_reproducible() {
    let l = Arc::new(build_construction(Role::T1, 2, 1, 2).unwrap());
    let r = Arc::new(build_construction(Role::T2, 2, 1, 2).unwrap());
    let g = GameInstance::new(l, r, GameVariant::FixedBatches { batches: 2, batch_len: 1 }, vec![]).unwrap();
    let s = RecursiveStrategy::new(&g).unwrap();
    let limits = SweepLimits::default();
    let mut a = exhaustive_spoiler_sweep(&g, &s, &limits).unwrap();
    let mut b = exhaustive_spoiler_sweep(&g, &s, &limits).unwrap();
    a.wall_ms = 0;
    b.wall_ms = 0;
    assert_eq!(a, b);
    let mut a = random_spoiler_sweep(&g, &s, 3000, 9, &limits).unwrap();
    let mut b = random_spoiler_sweep(&g, &s, 3000, 9, &limits).unwrap();
    a.wall_ms = 0;
    b.wall_ms = 0;
    assert_eq!(a, b);
    assert_eq!(a.lines, 3000);
}
