//! Reading an interpreted system off a serial structure whose states carry
//! action atoms.

use alloc::collections::{BTreeMap, BTreeSet, VecDeque};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{InterpretedSystem, Member, Radix, StateId, SystemError, SIZE_LIMIT};
use crate::formula::{Agent, Prop};

/// A Kripke structure over global states `L_1 × … × L_N × L_e` with a
/// successor relation instead of labelled transitions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CtlStructure {
    members: Vec<(Agent, Vec<String>)>,
    radix: Radix,
    initial: Vec<StateId>,
    successors: Vec<BTreeSet<StateId>>,
    valuation: BTreeMap<Prop, BTreeSet<StateId>>,
}

impl CtlStructure {
    pub fn new(members: Vec<(Agent, Vec<String>)>) -> Result<CtlStructure, SystemError> {
        match members.last() {
            Some((a, _)) if a.is_environment() => {}
            _ => return Err(SystemError::EnvironmentPlacement),
        }
        for (a, states) in &members {
            if states.is_empty() {
                return Err(SystemError::EmptySet { member: a.to_string(), what: "local states" });
            }
        }
        let radix = Radix::new(members.iter().map(|(_, s)| s.len()).collect(), SIZE_LIMIT)
            .ok_or_else(|| SystemError::TooLarge("global states".into()))?;
        let n = radix.total();
        Ok(CtlStructure {
            members,
            radix,
            initial: Vec::new(),
            successors: alloc::vec![BTreeSet::new(); n],
            valuation: BTreeMap::new(),
        })
    }

    pub fn members(&self) -> &[(Agent, Vec<String>)] {
        &self.members
    }

    pub fn state_count(&self) -> usize {
        self.radix.total()
    }

    pub fn local(&self, s: StateId, k: usize) -> usize {
        self.radix.digit(s as usize, k)
    }

    pub fn state_id(&self, locals: &[usize]) -> StateId {
        self.radix.encode(locals) as StateId
    }

    pub fn fmt_state(&self, s: StateId) -> String {
        let parts: Vec<&str> = (0..self.members.len()).map(|k| self.members[k].1[self.local(s, k)].as_str()).collect();
        format!("({})", parts.join(","))
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn add_initial(&mut self, s: StateId) {
        if let Err(k) = self.initial.binary_search(&s) {
            self.initial.insert(k, s);
        }
    }

    pub fn add_edge(&mut self, from: StateId, to: StateId) {
        self.successors[from as usize].insert(to);
    }

    pub fn successors(&self, s: StateId) -> &BTreeSet<StateId> {
        &self.successors[s as usize]
    }

    pub fn label(&mut self, p: Prop, s: StateId) {
        self.valuation.entry(p).or_default().insert(s);
    }

    pub fn holds_atom(&self, p: &Prop, s: StateId) -> bool {
        self.valuation.get(p).is_some_and(|set| set.contains(&s))
    }

    pub fn valuation(&self) -> &BTreeMap<Prop, BTreeSet<StateId>> {
        &self.valuation
    }

    pub fn reachable(&self) -> BTreeSet<StateId> {
        let mut seen: BTreeSet<StateId> = self.initial.iter().copied().collect();
        let mut queue: VecDeque<StateId> = self.initial.iter().copied().collect();
        while let Some(s) = queue.pop_front() {
            for &t in &self.successors[s as usize] {
                if seen.insert(t) {
                    queue.push_back(t);
                }
            }
        }
        seen
    }
}

/// Result of [`extract_is_from_ctl_model`].
#[derive(Debug, Clone)]
pub struct Extraction {
    pub system: InterpretedSystem,
    /// Structure state behind each state of `system`.
    pub underlying: Vec<StateId>,
    /// Whether the structure state had to be stored in the environment's
    /// local state to satisfy locality.
    pub embedded: bool,
    /// Structure states reachable from its initial states.
    pub reachable: BTreeSet<StateId>,
    chosen: Vec<StateId>,
    action_count: usize,
}

impl Extraction {
    /// The successor picked for structure state `s` under joint action `a`.
    pub fn chosen(&self, s: StateId, a: u32) -> StateId {
        self.chosen[s as usize * self.action_count + a as usize]
    }
}

/// Turns a serial structure that satisfies the action-totality constraint
/// into an interpreted system whose actions are the given atoms.
///
/// `act_sets` lists, per member (environment last), the atoms that act as
/// that member's actions. From a reachable state `l`, joint action `a` leads
/// to the least successor of `l` where every component of `a` holds.
/// Unreachable states take the least such successor if there is one, else
/// their least successor, else themselves.
///
/// If the resulting table is not local over the structure's own local
/// states, the structure state is kept in the environment's local state
/// instead; agents' local states and the reachable behaviour are unchanged.
pub fn extract_is_from_ctl_model(m: &CtlStructure, act_sets: &[Vec<Prop>]) -> Result<Extraction, SystemError> {
    if act_sets.len() != m.members.len() {
        return Err(SystemError::Arity { expected: m.members.len(), found: act_sets.len() });
    }
    let actions: Vec<Vec<String>> =
        act_sets.iter().map(|v| v.iter().map(|p| p.as_str().to_string()).collect()).collect();
    let action_radix = Radix::new(actions.iter().map(Vec::len).collect(), SIZE_LIMIT)
        .ok_or_else(|| SystemError::TooLarge("joint actions".into()))?;
    let n_act = action_radix.total();
    let reachable = m.reachable();

    let mut chosen = Vec::with_capacity(m.state_count() * n_act);
    for s in 0..m.state_count() as StateId {
        let succ = m.successors(s);
        if succ.is_empty() && reachable.contains(&s) {
            return Err(SystemError::NotSerial { state: m.fmt_state(s) });
        }
        for a in 0..n_act {
            let digits = action_radix.decode(a);
            let ok = |t: &StateId| digits.iter().enumerate().all(|(k, &d)| m.holds_atom(&act_sets[k][d], *t));
            let pick = match succ.iter().find(|t| ok(t)) {
                Some(&t) => t,
                None if reachable.contains(&s) => {
                    let names: Vec<&str> = digits.iter().enumerate().map(|(k, &d)| act_sets[k][d].as_str()).collect();
                    return Err(SystemError::AConstraint {
                        state: m.fmt_state(s),
                        action: format!("({})", names.join(",")),
                    });
                }
                None => succ.iter().next().copied().unwrap_or(s),
            };
            chosen.push(pick);
        }
    }

    let members: Vec<Member> = m
        .members
        .iter()
        .zip(&actions)
        .map(|((name, states), acts)| Member::new(name.clone(), states.clone(), acts.clone()))
        .collect::<Result<_, _>>()?;
    let mut direct = InterpretedSystem::new(members.clone())?;
    for s in 0..m.state_count() as StateId {
        for a in 0..n_act {
            direct.set_transition(s, a as u32, chosen[s as usize * n_act + a]);
        }
    }
    for &s in m.initial() {
        direct.add_initial(s);
    }
    for (p, set) in m.valuation() {
        direct.declare_prop(p.clone());
        for &s in set {
            direct.label(p.clone(), s);
        }
    }
    if direct.validate().is_empty() {
        let underlying = (0..m.state_count() as StateId).collect();
        return Ok(Extraction { system: direct, underlying, embedded: false, reachable, chosen, action_count: n_act });
    }

    // Environment local state := whole structure state.
    let env = m.members.len() - 1;
    let mut members = members;
    let dotted: Vec<String> = (0..m.state_count() as StateId)
        .map(|s| {
            let parts: Vec<&str> = (0..m.members.len()).map(|k| m.members[k].1[m.local(s, k)].as_str()).collect();
            parts.join(".")
        })
        .collect();
    let distinct: BTreeSet<&String> = dotted.iter().collect();
    members[env].local_states =
        if distinct.len() == dotted.len() { dotted } else { (0..m.state_count()).map(|s| format!("m{s}")).collect() };
    let mut is = InterpretedSystem::new(members)?;
    let underlying: Vec<StateId> = (0..is.state_count() as StateId).map(|g| is.local(g, env) as StateId).collect();
    let lift = |is: &InterpretedSystem, s: StateId| -> Result<StateId, SystemError> {
        let mut locals: Vec<usize> = (0..env).map(|k| m.local(s, k)).collect();
        locals.push(s as usize);
        is.state_id(&locals)
    };
    for g in 0..is.state_count() as StateId {
        let s = underlying[g as usize];
        for a in 0..n_act {
            let t = lift(&is, chosen[s as usize * n_act + a])?;
            is.set_transition(g, a as u32, t);
        }
    }
    for &s in m.initial() {
        let g = lift(&is, s)?;
        is.add_initial(g);
    }
    for p in m.valuation().keys() {
        is.declare_prop(p.clone());
    }
    for g in 0..is.state_count() as StateId {
        for (p, set) in m.valuation() {
            if set.contains(&underlying[g as usize]) {
                is.label(p.clone(), g);
            }
        }
    }
    Ok(Extraction { system: is, underlying, embedded: true, reachable, chosen, action_count: n_act })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::ENVIRONMENT;

    fn two_state() -> (CtlStructure, Vec<Vec<Prop>>) {
        let mut m = CtlStructure::new(alloc::vec![
            (Agent::new("1").unwrap(), alloc::vec!["u".into(), "v".into()]),
            (Agent::environment(), alloc::vec!["e0".into()]),
        ])
        .unwrap();
        m.add_initial(0);
        let acts = alloc::vec![alloc::vec![Prop::new("_nop_1"), Prop::new("go")], alloc::vec![Prop::new("_nop_e")],];
        for s in 0..2 {
            for t in 0..2 {
                m.add_edge(s, t);
            }
            for row in &acts {
                for p in row {
                    m.label(p.clone(), s);
                }
            }
        }
        (m, acts)
    }

    #[test]
    fn all_candidates_admissible_picks_least() {
        let (m, acts) = two_state();
        let x = extract_is_from_ctl_model(&m, &acts).unwrap();
        assert!(x.system.validate().is_empty());
        assert!(!x.embedded);
        for s in 0..2 {
            for a in 0..2 {
                assert_eq!(x.chosen(s, a), 0);
            }
        }
        assert_eq!(x.system.members()[1].name.as_str(), ENVIRONMENT);
    }

    #[test]
    fn violation_names_state_and_vector() {
        let (mut m, acts) = two_state();
        m.valuation.get_mut(&Prop::new("go")).unwrap().clear();
        let err = extract_is_from_ctl_model(&m, &acts).unwrap_err();
        assert_eq!(err, SystemError::AConstraint { state: "(u,e0)".into(), action: "(go,_nop_e)".into() });
    }

    #[test]
    fn non_local_choice_is_embedded() {
        let mut m = CtlStructure::new(alloc::vec![
            (Agent::new("1").unwrap(), alloc::vec!["u".into(), "v".into()]),
            (Agent::new("2").unwrap(), alloc::vec!["w".into(), "z".into()]),
            (Agent::environment(), alloc::vec!["e0".into()]),
        ])
        .unwrap();
        let acts =
            alloc::vec![alloc::vec![Prop::new("n1")], alloc::vec![Prop::new("n2")], alloc::vec![Prop::new("ne")],];
        // agent 1 flips exactly when agent 2 is at z: not expressible locally
        for s in 0..4 {
            let (a1, a2) = (m.local(s, 0), m.local(s, 1));
            let t = m.state_id(&[if a2 == 1 { 1 - a1 } else { a1 }, a2, 0]);
            m.add_edge(s, t);
            for row in &acts {
                m.label(row[0].clone(), t);
            }
        }
        m.add_initial(m.state_id(&[0, 1, 0]));
        let x = extract_is_from_ctl_model(&m, &acts).unwrap();
        assert!(x.embedded);
        assert!(x.system.validate().is_empty());
        let s0 = x.system.initial()[0];
        let t = x.system.successor(s0, 0).unwrap();
        assert_eq!(x.underlying[t as usize], m.state_id(&[1, 1, 0]));
    }
}
