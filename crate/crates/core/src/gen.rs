//! Seeded random systems, structures and formulas for property checks.

use alloc::format;
use alloc::string::String;
use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::formula::{Agent, Coalition, Formula, Prop};
use crate::system::{CtlStructure, InterpretedSystem, Member, StateId, SystemError};

pub type GenRng = ChaCha8Rng;

pub fn rng(seed: u64) -> GenRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sizes for generated systems. `states` and `actions` apply to every
/// member, the environment included.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GenParams {
    pub agents: usize,
    pub states: usize,
    pub actions: usize,
    pub props: usize,
    pub seed: u64,
}

impl GenParams {
    pub fn new(agents: usize, states: usize, actions: usize, props: usize, seed: u64) -> GenParams {
        GenParams { agents, states, actions, props, seed }
    }

    fn check(&self) -> Result<(), SystemError> {
        if self.agents == 0 || self.states == 0 || self.actions == 0 || self.props == 0 {
            return Err(SystemError::TooLarge(String::from("generator bounds must be at least 1")));
        }
        Ok(())
    }
}

pub fn agent_names(n: usize) -> Vec<Agent> {
    (1..=n).map(|k| Agent::new(format!("{k}")).expect("numeric names are valid")).collect()
}

pub fn prop_names(n: usize) -> Vec<Prop> {
    (0..n).map(|k| Prop::new(format!("p{k}"))).collect()
}

fn members(p: &GenParams, env_states: usize, env_actions: usize) -> Vec<Member> {
    let mut out: Vec<Member> = agent_names(p.agents)
        .into_iter()
        .map(|a| Member {
            local_states: (0..p.states).map(|k| format!("s{k}")).collect(),
            actions: (0..p.actions).map(|k| format!("a{a}_{k}")).collect(),
            name: a,
        })
        .collect();
    out.push(Member {
        name: Agent::environment(),
        local_states: (0..env_states).map(|k| format!("s{k}")).collect(),
        actions: (0..env_actions).map(|k| format!("ae_{k}")).collect(),
    });
    out
}

fn pick_initial(rng: &mut GenRng, candidates: &[StateId]) -> Vec<StateId> {
    let n = if candidates.len() > 1 && rng.gen_bool(0.5) { 2 } else { 1 };
    let mut chosen: Vec<StateId> = candidates.choose_multiple(rng, n).copied().collect();
    chosen.sort_unstable();
    chosen
}

fn random_valuation(rng: &mut GenRng, is: &mut InterpretedSystem, props: usize) {
    for p in prop_names(props) {
        is.declare_prop(p.clone());
        for s in 0..is.state_count() as StateId {
            if rng.gen_bool(0.5) {
                is.label(p.clone(), s);
            }
        }
    }
}

/// A random system whose transition table is assembled from per-member
/// local functions, so it always passes validation.
pub fn generate_random(p: &GenParams) -> Result<InterpretedSystem, SystemError> {
    p.check()?;
    let mut rng = rng(p.seed);
    let is = InterpretedSystem::new(members(p, p.states, p.actions))?;
    let n = is.members().len();
    let n_act = is.action_count();
    // next[k][own][env][joint action]
    let mut next = alloc::vec![alloc::vec![alloc::vec![alloc::vec![0usize; n_act]; p.states]; p.states]; n];
    for table in next.iter_mut() {
        for row in table.iter_mut() {
            for cell in row.iter_mut() {
                for v in cell.iter_mut() {
                    *v = rng.gen_range(0..p.states);
                }
            }
        }
    }
    let radix = is.action_radix().clone();
    let mut is = is.with_local_transitions(|k, own, env, act| Some(next[k][own][env][radix.encode(act)]));
    let all: Vec<StateId> = (0..is.state_count() as StateId).collect();
    for s in pick_initial(&mut rng, &all) {
        is.add_initial(s);
    }
    random_valuation(&mut rng, &mut is, p.props);
    Ok(is)
}

/// Every agent sees the whole state: all agents share one set of local
/// states, the environment has a single state and action, initial states
/// are diagonal and every agent follows the same update, so reachable
/// states stay diagonal.
pub fn generate_complete_information(p: &GenParams) -> Result<InterpretedSystem, SystemError> {
    p.check()?;
    let mut rng = rng(p.seed);
    let is = InterpretedSystem::new(members(p, 1, 1))?;
    let n_act = is.action_count();
    let update: Vec<Vec<usize>> =
        (0..p.states).map(|_| (0..n_act).map(|_| rng.gen_range(0..p.states)).collect()).collect();
    let radix = is.action_radix().clone();
    let env = is.environment_index();
    let mut is = is.with_local_transitions(
        |k, own, _, act| {
            if k == env {
                Some(0)
            } else {
                Some(update[own][radix.encode(act)])
            }
        },
    );
    let diagonal: Vec<StateId> = (0..p.states)
        .map(|l| {
            let mut locals = alloc::vec![l; p.agents];
            locals.push(0);
            is.state_id(&locals).expect("in range")
        })
        .collect();
    for s in pick_initial(&mut rng, &diagonal) {
        is.add_initial(s);
    }
    random_valuation(&mut rng, &mut is, p.props);
    Ok(is)
}

/// A random serial structure over `p.agents` agents plus the environment
/// that satisfies the action-totality constraint for `act_sets`: every state
/// has, for every vector of action atoms, a successor where all of them hold.
pub fn generate_ctl_structure(p: &GenParams, act_sets: &[Vec<Prop>]) -> Result<CtlStructure, SystemError> {
    p.check()?;
    let mut rng = rng(p.seed);
    let mut names = agent_names(p.agents);
    names.push(Agent::environment());
    let mut m =
        CtlStructure::new(names.into_iter().map(|a| (a, (0..p.states).map(|k| format!("s{k}")).collect())).collect())?;
    let n = m.state_count() as StateId;
    let vectors: usize = act_sets.iter().map(Vec::len).product();
    for s in 0..n {
        for v in 0..vectors {
            let t = rng.gen_range(0..n);
            m.add_edge(s, t);
            let mut rest = v;
            for set in act_sets.iter().rev() {
                m.label(set[rest % set.len()].clone(), t);
                rest /= set.len();
            }
        }
        if rng.gen_bool(0.3) {
            let t = rng.gen_range(0..n);
            m.add_edge(s, t);
        }
    }
    for set in act_sets {
        for a in set {
            for s in 0..n {
                if rng.gen_bool(0.25) {
                    m.label(a.clone(), s);
                }
            }
        }
    }
    for q in prop_names(p.props) {
        for s in 0..n {
            if rng.gen_bool(0.5) {
                m.label(q.clone(), s);
            }
        }
    }
    let all: Vec<StateId> = (0..n).collect();
    for s in pick_initial(&mut rng, &all) {
        m.add_initial(s);
    }
    Ok(m)
}

pub fn random_coalition(rng: &mut GenRng, agents: &[Agent]) -> Coalition {
    let picked: Vec<Agent> = agents.iter().filter(|_| rng.gen_bool(0.5)).cloned().collect();
    Coalition::new(picked).expect("agents are distinct and never the environment")
}

fn literal(rng: &mut GenRng, props: &[Prop]) -> Formula {
    let p = Formula::prop(props.choose(rng).expect("at least one prop"));
    if rng.gen_bool(0.3) {
        Formula::not(p)
    } else {
        p
    }
}

/// A random formula of the translatable fragment with modal depth at most
/// `depth`. Coalitions are drawn from `agents` (possibly empty).
pub fn random_subset_formula(rng: &mut GenRng, agents: &[Agent], props: &[Prop], depth: usize) -> Formula {
    let mut budget = 6usize;
    subset_rec(rng, agents, props, depth, &mut budget)
}

fn subset_rec(rng: &mut GenRng, agents: &[Agent], props: &[Prop], depth: usize, budget: &mut usize) -> Formula {
    if *budget == 0 || (depth == 0 && rng.gen_bool(0.6)) {
        return literal(rng, props);
    }
    *budget -= 1;
    let choice = if depth == 0 { rng.gen_range(0..3) } else { rng.gen_range(0..8) };
    match choice {
        0 => Formula::not(subset_rec(rng, agents, props, depth, budget)),
        1 => {
            let a = subset_rec(rng, agents, props, depth, budget);
            let b = subset_rec(rng, agents, props, depth, budget);
            Formula::and(a, b)
        }
        2 => {
            let a = subset_rec(rng, agents, props, depth, budget);
            let b = subset_rec(rng, agents, props, depth, budget);
            Formula::implies(a, b)
        }
        3 => {
            let g = random_coalition(rng, agents);
            Formula::knows(g, subset_rec(rng, agents, props, depth - 1, budget))
        }
        4 | 5 => {
            let g = random_coalition(rng, agents);
            let body = subset_rec(rng, agents, props, depth - 1, budget);
            if rng.gen_bool(0.3) {
                Formula::dual_next(g, body)
            } else {
                Formula::coop_next(g, body)
            }
        }
        _ if depth >= 2 => {
            let g = random_coalition(rng, agents);
            let phi = if rng.gen_bool(0.3) { Formula::tt() } else { subset_rec(rng, agents, props, depth - 2, budget) };
            let psi = subset_rec(rng, agents, props, depth - 2, budget);
            Formula::coop_until(g.clone(), Formula::knows(g.clone(), phi), Formula::knows(g, psi))
        }
        _ => {
            let g = random_coalition(rng, agents);
            Formula::knows(g, literal(rng, props))
        }
    }
}

/// Like [`random_subset_formula`] but guaranteed to contain at least one
/// `<<Γ>> (K_Γ φ U K_Γ ψ)`.
pub fn random_until_formula(rng: &mut GenRng, agents: &[Agent], props: &[Prop], depth: usize) -> Formula {
    let depth = depth.max(2);
    for _ in 0..64 {
        let f = random_subset_formula(rng, agents, props, depth);
        let mut found = false;
        f.visit(&mut |x| found |= x.as_guarded_until().is_some());
        if found {
            return f;
        }
    }
    let g = random_coalition(rng, agents);
    let phi = literal(rng, props);
    let psi = literal(rng, props);
    Formula::coop_until(g.clone(), Formula::knows(g.clone(), phi), Formula::knows(g, psi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn generated_systems_validate() {
        for seed in 0..20 {
            let is = generate_random(&GenParams::new(2, 2, 2, 2, seed)).unwrap();
            assert!(is.validate().is_empty(), "seed {seed}");
            let ci = generate_complete_information(&GenParams::new(2, 3, 2, 2, seed)).unwrap();
            assert!(ci.validate().is_empty(), "seed {seed}");
        }
    }

    #[test]
    fn generation_is_deterministic() {
        let p = GenParams::new(2, 2, 2, 2, 7);
        assert_eq!(generate_random(&p).unwrap(), generate_random(&p).unwrap());
        let mut r1 = rng(3);
        let mut r2 = rng(3);
        let ag = agent_names(3);
        let ps = prop_names(2);
        assert_eq!(random_subset_formula(&mut r1, &ag, &ps, 3), random_subset_formula(&mut r2, &ag, &ps, 3));
    }

    #[test]
    fn complete_information_reachable_states_are_diagonal() {
        let is = generate_complete_information(&GenParams::new(2, 3, 2, 1, 11)).unwrap();
        for r in is.runs_up_to(3).unwrap() {
            let s = r.last();
            assert_eq!(is.local(s, 0), is.local(s, 1));
        }
    }

    #[test]
    fn random_formulas_stay_in_the_subset() {
        let mut r = rng(5);
        let ag = agent_names(3);
        let ps = prop_names(3);
        for _ in 0..200 {
            let f = random_subset_formula(&mut r, &ag, &ps, 3);
            assert!(f.subset_violation().is_none(), "{f}");
            assert!(f.modal_depth() <= 3, "{f}");
            let u = random_until_formula(&mut r, &ag, &ps, 3);
            assert!(u.subset_violation().is_none(), "{u}");
        }
    }

    #[test]
    fn bounds_must_be_positive() {
        assert!(generate_random(&GenParams::new(0, 2, 2, 2, 1)).is_err());
    }
}
