use std::collections::BTreeSet;

use atlk_core::gen::{agent_names, prop_names, random_subset_formula, rng};
use atlk_core::translate::{translate, Mode};
use atlk_core::{parse, parse_lenient, Agent, Coalition, Formula, Fragment};
use proptest::prelude::*;

fn coalition() -> impl Strategy<Value = Coalition> {
    proptest::sample::subsequence(vec!["1", "2", "3", "10"], 0..=3)
        .prop_map(|names| Coalition::new(names.into_iter().map(|n| Agent::new(n).unwrap())).unwrap())
}

fn formula() -> impl Strategy<Value = Formula> {
    let leaf = prop_oneof![
        Just(Formula::False),
        Just(Formula::tt()),
        prop::sample::select(vec!["p", "q", "r", "x1", "long_name"]).prop_map(Formula::atom),
    ];
    leaf.prop_recursive(5, 48, 2, |inner| {
        prop_oneof![
            inner.clone().prop_map(Formula::not),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::and(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::or(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::implies(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::iff(a, b)),
            (coalition(), inner.clone()).prop_map(|(g, a)| Formula::knows(g, a)),
            (coalition(), inner.clone()).prop_map(|(g, a)| Formula::possible(g, a)),
            (coalition(), inner.clone()).prop_map(|(g, a)| Formula::coop_next(g, a)),
            (coalition(), inner.clone()).prop_map(|(g, a)| Formula::dual_next(g, a)),
            (coalition(), inner.clone(), inner.clone()).prop_map(|(g, a, b)| Formula::coop_until(g, a, b)),
            (coalition(), inner.clone(), inner.clone()).prop_map(|(g, a, b)| Formula::dual_until(g, a, b)),
            (coalition(), inner.clone()).prop_map(|(g, a)| Formula::coop_always(g, a)),
            (coalition(), inner.clone(), inner.clone()).prop_map(|(g, a, b)| Formula::coop_weak_until(g, a, b)),
            inner.clone().prop_map(Formula::exists_next),
            inner.clone().prop_map(Formula::forall_next),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::exists_until(a, b)),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::forall_until(a, b)),
            inner.clone().prop_map(Formula::forall_always),
            (inner.clone(), inner.clone()).prop_map(|(a, b)| Formula::exists_weak_until(a, b)),
        ]
    })
}

proptest! {
    #[test]
    fn render_then_parse_is_identity(f in formula()) {
        let text = f.to_string();
        let back = parse(&text).map_err(|e| TestCaseError::fail(format!("{text}: {e}")))?;
        prop_assert_eq!(&back, &f, "{}", text);
        prop_assert_eq!(back.to_string(), text);
    }

    #[test]
    fn classification_survives_round_trip(f in formula()) {
        prop_assert_eq!(parse(&f.to_string()).unwrap().classify(), f.classify());
    }

    #[test]
    fn subset_formulas_translate_to_pure_ctl(seed in any::<u64>(), n_agents in 1usize..=3, depth in 0usize..=3) {
        let mut r = rng(seed);
        let f = random_subset_formula(&mut r, &agent_names(n_agents), &prop_names(3), depth);
        prop_assert!(f.modal_depth() <= depth);
        let out = translate(&f, Mode::Incomplete).unwrap();
        prop_assert_eq!(out.formula.classify(), Fragment::CtlD);
        let input = f.props();
        let fresh: BTreeSet<_> = out.fresh_atoms().into_iter().cloned().collect();
        prop_assert_eq!(fresh.len(), out.dictionary.len());
        prop_assert!(fresh.iter().all(|p| !input.contains(p) && p.is_reserved()));
        prop_assert!(out.formula.props().iter().all(|p| input.contains(p) || fresh.contains(p)));
        let rendered = out.formula.to_string();
        prop_assert_eq!(parse_lenient(&rendered).unwrap(), out.formula.clone());
        prop_assert!(parse(&rendered).is_err() || fresh.is_empty());
    }
}

#[test]
fn corpus_formulas_round_trip() {
    for line in include_str!("../../../corpus/formulas.txt").lines() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let f = parse(line).unwrap_or_else(|e| panic!("{line}: {e}"));
        let text = f.to_string();
        assert_eq!(parse(&text).unwrap(), f, "{line}");
        assert_eq!(text, line, "corpus lines are stored in canonical form");
    }
}
