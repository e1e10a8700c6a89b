use aqd_core::logic::{formula_for_kein, parse_formula, Assignment, Formula, Quantifier, Term};
use aqd_core::{NodeId, Tree};
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

fn arb_term() -> impl Strategy<Value = Term> {
    prop_oneof![Just(Term::Root), Just(Term::var("x")), Just(Term::var("y")), Just(Term::var("z"))]
}

fn arb_formula() -> impl Strategy<Value = Formula> {
    let atom = prop_oneof![
        (arb_term(), arb_term()).prop_map(|(a, b)| Formula::eq(a, b)),
        (arb_term(), arb_term()).prop_map(|(c, p)| Formula::parent_of(c, p)),
    ];
    atom.prop_recursive(5, 40, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::iff(a, b)),
            (any::<bool>(), prop::sample::select(vec!["x", "y", "z"]), inner).prop_map(|(e, v, body)| {
                let q = if e { Quantifier::Exists } else { Quantifier::Forall };
                Formula::quant(q, v, body)
            }),
        ]
    })
}

fn env(tree: &Tree, picks: &[prop::sample::Index; 3]) -> Assignment {
    let at = |i: usize| -> NodeId { picks[i].index(tree.len()) };
    Assignment::new().with("x", at(0)).with("y", at(1)).with("z", at(2))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(600))]

    #[test]
    fn nnf_preserves_truth(f in arb_formula(), tree in arb_tree(9), picks in any::<[prop::sample::Index; 3]>()) {
        let e = env(&tree, &picks);
        let g = f.nnf();
        prop_assert!(g.is_nnf());
        prop_assert_eq!(f.eval(&tree, &e).unwrap(), g.eval(&tree, &e).unwrap());
    }

    #[test]
    fn double_negation_has_same_nnf(f in arb_formula()) {
        prop_assert_eq!(Formula::not(Formula::not(f.clone())).nnf(), f.nnf());
    }

    #[test]
    fn depth_measures_survive_nnf(f in arb_formula()) {
        let g = f.nnf();
        prop_assert_eq!(g.qd(), f.qd());
        prop_assert_eq!(g.aqd_syntactic(), f.aqd_syntactic());
        prop_assert!(f.qd() == 0 || f.aqd_syntactic() < f.qd());
    }

    #[test]
    fn negation_keeps_alternation_depth(f in arb_formula()) {
        prop_assert_eq!(Formula::not(f.clone()).aqd_syntactic(), f.aqd_syntactic());
        prop_assert_eq!(Formula::not(f.clone()).qd(), f.qd());
    }

    #[test]
    fn print_parse_round_trip(f in arb_formula()) {
        let text = f.to_string();
        let back = parse_formula(&text).unwrap();
        prop_assert_eq!(back.to_string(), text);
        prop_assert_eq!(back, f);
    }

    #[test]
    fn kein_sentence_matches_definition(tree in arb_tree(14), i in 0usize..4) {
        fn p(tree: &Tree, i: usize, v: NodeId) -> bool {
            let kids = tree.children(v);
            if i == 0 { kids.is_empty() } else { kids.iter().all(|&c| !p(tree, i - 1, c)) }
        }
        prop_assert_eq!(formula_for_kein(i).holds(&tree).unwrap(), p(&tree, i, tree.root()));
    }

    #[test]
    fn json_round_trip(tree in arb_tree(20)) {
        let back = Tree::from_json(&tree.to_json()).unwrap();
        prop_assert_eq!(back.parents(), tree.parents());
    }
}
