use atlk_core::gen::{generate_ctl_structure, generate_random, GenParams};
use atlk_core::oracle::{
    count_strategies, enumerate_strategies, outcomes, EvalConfig, Evaluator, NodeId, Partition, RunTree, UntilMode,
    Verdict,
};
use atlk_core::suites::check_extraction;
use atlk_core::system::{build_is_act, extract_is_from_ctl_model, InterpretedSystem, Member, Run};
use atlk_core::{parse, Agent, Coalition, Formula, Prop};
use proptest::prelude::*;

fn system(seed: u64, agents: usize) -> InterpretedSystem {
    generate_random(&GenParams::new(agents, 2, 2, 2, seed)).unwrap()
}

fn coalitions(is: &InterpretedSystem) -> Vec<Coalition> {
    Coalition::new(is.agents().iter().map(|m| m.name.clone())).unwrap().subsets()
}

/// Bounded until along one path from position `from`: some witness within
/// the path, `Unknown` if the path runs out while `φ` still may hold.
fn path_until(is: &InterpretedSystem, o: &Run, from: usize, phi: &Formula, psi: &Formula) -> Verdict {
    let at = |f: &Formula, j: usize| holds_state(is, f, o.states[j]);
    let mut acc = Verdict::Unknown;
    for j in (from..o.states.len()).rev() {
        acc = at(psi, j).or(at(phi, j).and(acc));
    }
    acc
}

fn holds_state(is: &InterpretedSystem, f: &Formula, s: u32) -> Verdict {
    match f {
        Formula::False => Verdict::False,
        Formula::Atom(p) => Verdict::from_bool(is.holds_atom(p, s)),
        Formula::Implies(a, b) => holds_state(is, a, s).implies(holds_state(is, b, s)),
        _ => panic!("state formulas only"),
    }
}

/// Cooperative (or, with `exists = false`, dual) until straight from the
/// definition: strategies, indiscernible runs and outcomes.
fn until_by_definition(
    is: &InterpretedSystem,
    r: &Run,
    g: &Coalition,
    phi: &Formula,
    psi: &Formula,
    h: usize,
    exists: bool,
) -> Option<Verdict> {
    let members = is.resolve(g).unwrap();
    let class = is.equivalence_class(r, &members).unwrap();
    let mut result = if exists { Verdict::False } else { Verdict::True };
    for s in enumerate_strategies(is, g, h, 1 << 14).ok()? {
        let mut per = if exists { Verdict::True } else { Verdict::False };
        for o in outcomes(is, &class, &s, h).unwrap() {
            let v = path_until(is, &o, r.len(), phi, psi);
            per = if exists { per.and(v) } else { per.or(v) };
        }
        result = if exists { result.or(per) } else { result.and(per) };
    }
    Some(result)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn indiscernibility_is_an_equivalence_that_coarsens(seed in 0u64..1000) {
        let is = system(seed, 2);
        let tree = RunTree::build(&is, 2).unwrap();
        let parts: Vec<(Coalition, Partition)> = coalitions(&is)
            .into_iter()
            .map(|g| {
                let m = is.resolve(&g).unwrap();
                (g, Partition::build(&is, &tree, &m))
            })
            .collect();
        for (g, pg) in &parts {
            for (d, pd) in &parts {
                if !g.is_subset(d) {
                    continue;
                }
                // Larger coalitions tell more runs apart.
                for x in 0..tree.len() as NodeId {
                    for &y in pd.class(pd.class_of(x)) {
                        prop_assert_eq!(pg.class_of(x), pg.class_of(y));
                    }
                }
            }
            for x in 0..tree.len() as NodeId {
                prop_assert!(pg.class(pg.class_of(x)).contains(&x));
                prop_assert!(pg.class(pg.class_of(x)).iter().all(|&y| tree.depth(y) == tree.depth(x)));
            }
        }
    }

    #[test]
    fn larger_horizons_only_resolve_unknowns(seed in 0u64..1000, pick in 0usize..6) {
        let is = system(seed, 2);
        let f = parse([
            "<<1>> (K{1} p0 U K{1} p1)",
            "[[1,2]] (p0 U !p1)",
            "E G p0",
            "A (p0 U p1) | <<2>> X K{2} p1",
            "<<1,2>> G p0",
            "K{} A F p1",
        ][pick]).unwrap();
        let mut small = Evaluator::new(&is, 2).unwrap();
        let mut large = Evaluator::new(&is, 3).unwrap();
        let a = small.eval(&f).unwrap();
        let b = large.eval(&f).unwrap();
        for n in 0..small.tree().len() as NodeId {
            let r = small.tree().run(n);
            let m = large.node(&r).unwrap();
            if a[n as usize].is_decided() {
                prop_assert_eq!(a[n as usize], b[m as usize], "{}", is.fmt_run(&r));
            }
        }
    }

    #[test]
    fn strategy_search_matches_the_definition(seed in 0u64..1000, lit in 0usize..4, dual in any::<bool>()) {
        let is = generate_random(&GenParams::new(1, 2, 2, 2, seed)).unwrap();
        let lits = [parse("p0").unwrap(), parse("!p0").unwrap(), parse("p1").unwrap(), parse("!p1").unwrap()];
        let (phi, psi) = (&lits[lit], &lits[(lit + 2) % 4]);
        let h = 2;
        let mut ev = Evaluator::with_config(&is, h, EvalConfig { until: UntilMode::Strategies, strategy_budget: 1 << 20 }).unwrap();
        for g in coalitions(&is) {
            let f = if dual {
                Formula::dual_until(g.clone(), phi.clone(), psi.clone())
            } else {
                Formula::coop_until(g.clone(), phi.clone(), psi.clone())
            };
            let v = ev.eval(&f).unwrap();
            for n in 0..ev.tree().len() as NodeId {
                let r = ev.tree().run(n);
                if let Some(expected) = until_by_definition(&is, &r, &g, phi, psi, h, !dual) {
                    prop_assert_eq!(v[n as usize], expected, "{} at {}", f, is.fmt_run(&r));
                }
            }
        }
    }

    #[test]
    fn single_agent_fixpoint_matches_search(seed in 0u64..1000, lit in 0usize..4) {
        let is = system(seed, 2);
        let lits = [parse("p0").unwrap(), parse("!p0").unwrap(), parse("p1").unwrap(), parse("!p1").unwrap()];
        let mut lfp = Evaluator::new(&is, 3).unwrap();
        let mut search = Evaluator::with_config(&is, 3, EvalConfig { until: UntilMode::Strategies, strategy_budget: 1 << 20 }).unwrap();
        for g in ["<<>>", "<<1>>", "<<2>>"] {
            let c = g.trim_matches(|c| c == '<' || c == '>');
            let text = format!("{g} (K{{{c}}} {} U K{{{c}}} {})", lits[lit], lits[(lit + 1) % 4]);
            let f = parse(&text).unwrap();
            prop_assert_eq!(&*lfp.eval(&f).unwrap(), &*search.eval(&f).unwrap(), "{}", text);
        }
    }

    #[test]
    fn action_recording_preserves_the_valuation(seed in 0u64..1000) {
        let is = system(seed, 2);
        let act = build_is_act(&is).unwrap();
        prop_assert!(act.system.validate().is_empty());
        for r in is.runs_up_to(2).unwrap() {
            let lifted = act.lift_run(&is, &r).unwrap();
            prop_assert!(act.system.is_run(&lifted));
            for p in is.props() {
                prop_assert_eq!(is.holds_atom(p, r.last()), act.system.holds_atom(p, lifted.last()));
            }
            for k in 0..is.members().len() {
                for (b, atom) in act.atoms_of(k).iter().enumerate() {
                    let played = r.actions.last().map(|&a| is.action_component(a, k) == b).unwrap_or(false);
                    prop_assert_eq!(act.system.holds_atom(atom, lifted.last()), played);
                }
            }
        }
    }

    #[test]
    fn extraction_from_generated_structures_is_sound(seed in 0u64..1000, agents in 1usize..=2) {
        let names: Vec<Agent> = (1..=agents).map(|k| Agent::new(k.to_string()).unwrap()).chain([Agent::environment()]).collect();
        let act_sets: Vec<Vec<Prop>> = names
            .iter()
            .enumerate()
            .map(|(k, a)| (0..=(k % 2)).map(|j| Prop::new(format!("_act_{a}_{j}"))).collect())
            .collect();
        let m = generate_ctl_structure(&GenParams::new(agents, 2, 2, 2, seed), &act_sets).unwrap();
        let x = extract_is_from_ctl_model(&m, &act_sets).unwrap();
        prop_assert_eq!(check_extraction(&m, &act_sets, &x), Ok(()));
    }
}

#[test]
fn strategy_counts_follow_local_runs() {
    let is = system(3, 2);
    let g = Coalition::of(&["1"]).unwrap();
    for h in 0..3 {
        let n = count_strategies(&is, &g, h).unwrap();
        assert_eq!(enumerate_strategies(&is, &g, h, 1 << 20).map(|it| it.count() as u128).unwrap_or(n), n);
    }
    assert_eq!(count_strategies(&is, &Coalition::empty(), 3).unwrap(), 1);
}

/// Agent 2 sees a bit chosen by the environment, agent 1 must match it and
/// cannot see it. Joint classes know the bit, per-agent strategies do not.
fn hidden_bit() -> InterpretedSystem {
    let m = |name: &str, states: &[&str], actions: &[&str]| {
        Member::new(
            Agent::new(name).unwrap(),
            states.iter().map(|s| s.to_string()).collect(),
            actions.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    };
    let is = InterpretedSystem::new(vec![
        m("1", &["x", "win", "lose"], &["a0", "a1"]),
        m("2", &["y", "y0", "y1"], &["c"]),
        m("e", &["e", "e0", "e1"], &["d0", "d1"]),
    ])
    .unwrap();
    let mut is = is.with_local_transitions(|k, own, env, act| {
        Some(match (k, own, env) {
            (0, 0, 1 | 2) => {
                if act[0] + 1 == env {
                    1
                } else {
                    2
                }
            }
            (1 | 2, 0, 0) => act[2] + 1,
            _ => own,
        })
    });
    is.add_initial(is.parse_state(&["x", "y", "e"]).unwrap());
    for s in 0..is.state_count() as u32 {
        match is.local(s, 0) {
            1 => is.label(Prop::new("win"), s),
            2 => is.label(Prop::new("lose"), s),
            _ => {}
        }
    }
    is.declare_prop(Prop::new("win"));
    is.declare_prop(Prop::new("lose"));
    is
}

#[test]
fn joint_fixpoint_is_more_generous_than_uniform_strategies() {
    let is = hidden_bit();
    assert!(is.validate().is_empty());
    let f = parse("<<1,2>> (K{1,2} !lose U K{1,2} win)").unwrap();
    let mut lfp = Evaluator::new(&is, 3).unwrap();
    let mut search =
        Evaluator::with_config(&is, 3, EvalConfig { until: UntilMode::Strategies, strategy_budget: 1 << 20 }).unwrap();
    assert_eq!(lfp.sat_at_initial(&f).unwrap(), Verdict::True);
    assert_eq!(search.sat_at_initial(&f).unwrap(), Verdict::False);
    let r0 = Run::initial(is.initial()[0]);
    let g = Coalition::of(&["1", "2"]).unwrap();
    let (phi, psi) = (parse("!lose").unwrap(), parse("win").unwrap());
    assert_eq!(until_by_definition(&is, &r0, &g, &phi, &psi, 3, true), Some(Verdict::False));
}
