//! Finite interpreted systems, their runs and coalition projections.
//!
//! A system has members `1..N` followed by the environment `e`. Global
//! states and joint actions are tuples with one component per member and
//! are numbered in mixed radix, so a [`StateId`] or [`ActionId`] is just an
//! index. Transitions are stored as a dense table.

mod act;
mod extract;
mod radix;

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::formula::{Agent, Coalition, Prop};

pub use act::{build_is_act, ActSystem};
pub use extract::{extract_is_from_ctl_model, CtlStructure, Extraction};
pub use radix::Radix;

/// Upper bound on global states, joint actions and transition table cells.
pub const SIZE_LIMIT: usize = 1 << 24;

pub type StateId = u32;
pub type ActionId = u32;

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SystemError {
    #[error("the environment `e` must be the last member")]
    EnvironmentPlacement,
    #[error("member `{0}` occurs twice")]
    DuplicateMember(String),
    #[error("member `{member}` has no {what}")]
    EmptySet { member: String, what: &'static str },
    #[error("member `{member}` lists {what} `{token}` twice")]
    DuplicateToken { member: String, what: &'static str, token: String },
    #[error("invalid token `{0}`")]
    InvalidToken(String),
    #[error("unknown agent `{0}`")]
    UnknownAgent(String),
    #[error("unknown local state `{token}` of `{member}`")]
    UnknownLocalState { member: String, token: String },
    #[error("unknown action `{token}` of `{member}`")]
    UnknownAction { member: String, token: String },
    #[error("expected {expected} components, found {found}")]
    Arity { expected: usize, found: usize },
    #[error("system too large: {0}")]
    TooLarge(String),
    #[error("no transition from {state} under {action}")]
    MissingTransition { state: String, action: String },
    #[error("invalid run: {0}")]
    InvalidRun(String),
    #[error("cannot name action atoms without collisions: {0}")]
    ActionAtomCollision(String),
    #[error("state {state} has no successor")]
    NotSerial { state: String },
    #[error("no successor of {state} satisfies the action atoms {action}")]
    AConstraint { state: String, action: String },
}

/// One member of `Σ_e`: its local states and its actions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Member {
    pub name: Agent,
    pub local_states: Vec<String>,
    pub actions: Vec<String>,
}

fn check_token(t: &str) -> Result<(), SystemError> {
    if t.is_empty() || t.chars().any(|c| c.is_whitespace() || matches!(c, ',' | '(' | ')' | '"')) {
        return Err(SystemError::InvalidToken(t.to_string()));
    }
    Ok(())
}

fn check_tokens(member: &Agent, what: &'static str, tokens: &[String]) -> Result<(), SystemError> {
    if tokens.is_empty() {
        return Err(SystemError::EmptySet { member: member.to_string(), what });
    }
    let mut seen = BTreeSet::new();
    for t in tokens {
        check_token(t)?;
        if !seen.insert(t.as_str()) {
            return Err(SystemError::DuplicateToken { member: member.to_string(), what, token: t.clone() });
        }
    }
    Ok(())
}

impl Member {
    pub fn new(name: Agent, local_states: Vec<String>, actions: Vec<String>) -> Result<Member, SystemError> {
        check_tokens(&name, "local states", &local_states)?;
        check_tokens(&name, "actions", &actions)?;
        Ok(Member { name, local_states, actions })
    }

    pub fn state_index(&self, token: &str) -> Result<usize, SystemError> {
        self.local_states
            .iter()
            .position(|s| s == token)
            .ok_or_else(|| SystemError::UnknownLocalState { member: self.name.to_string(), token: token.to_string() })
    }

    pub fn action_index(&self, token: &str) -> Result<usize, SystemError> {
        self.actions
            .iter()
            .position(|s| s == token)
            .ok_or_else(|| SystemError::UnknownAction { member: self.name.to_string(), token: token.to_string() })
    }
}

/// Something wrong with a system; see [`InterpretedSystem::validate`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    NoInitialState,
    Totality { state: String, action: String },
    Locality { member: String, first: String, second: String, action: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoInitialState => f.write_str("no initial state"),
            Violation::Totality { state, action } => {
                write!(f, "totality: no transition from {state} under {action}")
            }
            Violation::Locality { member, first, second, action } => write!(
                f,
                "locality: {first} and {second} agree on `{member}` and `e` but their `{member}` successors under {action} differ"
            ),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterpretedSystem {
    members: Vec<Member>,
    states: Radix,
    actions: Radix,
    initial: Vec<StateId>,
    transitions: Vec<Option<StateId>>,
    valuation: BTreeMap<Prop, BTreeSet<StateId>>,
}

impl InterpretedSystem {
    /// A system with the given members (environment last), no initial states,
    /// no transitions and an empty valuation.
    pub fn new(members: Vec<Member>) -> Result<InterpretedSystem, SystemError> {
        match members.last() {
            Some(m) if m.name.is_environment() => {}
            _ => return Err(SystemError::EnvironmentPlacement),
        }
        let mut names = BTreeSet::new();
        for (k, m) in members.iter().enumerate() {
            if m.name.is_environment() && k + 1 != members.len() {
                return Err(SystemError::EnvironmentPlacement);
            }
            if !names.insert(m.name.clone()) {
                return Err(SystemError::DuplicateMember(m.name.to_string()));
            }
            check_tokens(&m.name, "local states", &m.local_states)?;
            check_tokens(&m.name, "actions", &m.actions)?;
        }
        let too_large = |what: &str| SystemError::TooLarge(format!("{what} exceed {SIZE_LIMIT}"));
        let states = Radix::new(members.iter().map(|m| m.local_states.len()).collect(), SIZE_LIMIT)
            .ok_or_else(|| too_large("global states"))?;
        let actions = Radix::new(members.iter().map(|m| m.actions.len()).collect(), SIZE_LIMIT)
            .ok_or_else(|| too_large("joint actions"))?;
        let cells = states
            .total()
            .checked_mul(actions.total())
            .filter(|c| *c <= SIZE_LIMIT)
            .ok_or_else(|| too_large("transition table cells"))?;
        Ok(InterpretedSystem {
            members,
            states,
            actions,
            initial: Vec::new(),
            transitions: alloc::vec![None; cells],
            valuation: BTreeMap::new(),
        })
    }

    /// Builds the transition table from per-member local functions
    /// `(member, own local state, environment local state, joint action) ->
    /// next own local state`. Such tables satisfy locality by construction.
    pub fn with_local_transitions(
        mut self,
        mut next: impl FnMut(usize, usize, usize, &[usize]) -> Option<usize>,
    ) -> InterpretedSystem {
        let env = self.members.len() - 1;
        for s in 0..self.state_count() {
            let digits = self.states.decode(s);
            for a in 0..self.action_count() {
                let act = self.actions.decode(a);
                let mut out = Vec::with_capacity(digits.len());
                for (k, own) in digits.iter().enumerate() {
                    match next(k, *own, digits[env], &act) {
                        Some(n) if n < self.members[k].local_states.len() => out.push(n),
                        _ => break,
                    }
                }
                if out.len() == digits.len() {
                    let t = self.states.encode(&out) as StateId;
                    let n_act = self.action_count();
                    self.transitions[s * n_act + a] = Some(t);
                }
            }
        }
        self
    }

    pub fn members(&self) -> &[Member] {
        &self.members
    }

    /// Members other than the environment.
    pub fn agents(&self) -> &[Member] {
        &self.members[..self.members.len() - 1]
    }

    pub fn environment_index(&self) -> usize {
        self.members.len() - 1
    }

    pub fn member_index(&self, name: &Agent) -> Option<usize> {
        self.members.iter().position(|m| &m.name == name)
    }

    /// Member positions of a coalition, in coalition order.
    pub fn resolve(&self, g: &Coalition) -> Result<Vec<usize>, SystemError> {
        g.members()
            .iter()
            .map(|a| {
                self.agents().iter().position(|m| &m.name == a).ok_or_else(|| SystemError::UnknownAgent(a.to_string()))
            })
            .collect()
    }

    pub fn state_radix(&self) -> &Radix {
        &self.states
    }

    pub fn action_radix(&self) -> &Radix {
        &self.actions
    }

    pub fn state_count(&self) -> usize {
        self.states.total()
    }

    pub fn action_count(&self) -> usize {
        self.actions.total()
    }

    pub fn local(&self, s: StateId, member: usize) -> usize {
        self.states.digit(s as usize, member)
    }

    pub fn action_component(&self, a: ActionId, member: usize) -> usize {
        self.actions.digit(a as usize, member)
    }

    pub fn state_id(&self, locals: &[usize]) -> Result<StateId, SystemError> {
        self.check_arity(locals.len())?;
        for (k, l) in locals.iter().enumerate() {
            if *l >= self.members[k].local_states.len() {
                return Err(SystemError::UnknownLocalState {
                    member: self.members[k].name.to_string(),
                    token: l.to_string(),
                });
            }
        }
        Ok(self.states.encode(locals) as StateId)
    }

    pub fn action_id(&self, acts: &[usize]) -> Result<ActionId, SystemError> {
        self.check_arity(acts.len())?;
        for (k, a) in acts.iter().enumerate() {
            if *a >= self.members[k].actions.len() {
                return Err(SystemError::UnknownAction {
                    member: self.members[k].name.to_string(),
                    token: a.to_string(),
                });
            }
        }
        Ok(self.actions.encode(acts) as ActionId)
    }

    fn check_arity(&self, found: usize) -> Result<(), SystemError> {
        if found != self.members.len() {
            return Err(SystemError::Arity { expected: self.members.len(), found });
        }
        Ok(())
    }

    /// Looks a global state up by its local-state tokens.
    pub fn parse_state(&self, tokens: &[&str]) -> Result<StateId, SystemError> {
        self.check_arity(tokens.len())?;
        let locals = tokens.iter().zip(&self.members).map(|(t, m)| m.state_index(t)).collect::<Result<Vec<_>, _>>()?;
        Ok(self.states.encode(&locals) as StateId)
    }

    pub fn parse_action(&self, tokens: &[&str]) -> Result<ActionId, SystemError> {
        self.check_arity(tokens.len())?;
        let acts = tokens.iter().zip(&self.members).map(|(t, m)| m.action_index(t)).collect::<Result<Vec<_>, _>>()?;
        Ok(self.actions.encode(&acts) as ActionId)
    }

    pub fn state_tokens(&self, s: StateId) -> Vec<&str> {
        (0..self.members.len()).map(|k| self.members[k].local_states[self.local(s, k)].as_str()).collect()
    }

    pub fn action_tokens(&self, a: ActionId) -> Vec<&str> {
        (0..self.members.len()).map(|k| self.members[k].actions[self.action_component(a, k)].as_str()).collect()
    }

    /// `(x0,y0,e0)`
    pub fn fmt_state(&self, s: StateId) -> String {
        format!("({})", self.state_tokens(s).join(","))
    }

    pub fn fmt_action(&self, a: ActionId) -> String {
        format!("({})", self.action_tokens(a).join(","))
    }

    pub fn initial(&self) -> &[StateId] {
        &self.initial
    }

    pub fn add_initial(&mut self, s: StateId) {
        if let Err(k) = self.initial.binary_search(&s) {
            self.initial.insert(k, s);
        }
    }

    pub fn transition(&self, s: StateId, a: ActionId) -> Option<StateId> {
        self.transitions[s as usize * self.action_count() + a as usize]
    }

    pub fn set_transition(&mut self, s: StateId, a: ActionId, t: StateId) {
        let n = self.action_count();
        self.transitions[s as usize * n + a as usize] = Some(t);
    }

    /// `t(l, a)`, with a descriptive error when the table has a hole.
    pub fn successor(&self, s: StateId, a: ActionId) -> Result<StateId, SystemError> {
        self.transition(s, a)
            .ok_or_else(|| SystemError::MissingTransition { state: self.fmt_state(s), action: self.fmt_action(a) })
    }

    pub fn valuation(&self) -> &BTreeMap<Prop, BTreeSet<StateId>> {
        &self.valuation
    }

    /// Declares `p` without making it true anywhere.
    pub fn declare_prop(&mut self, p: Prop) {
        self.valuation.entry(p).or_default();
    }

    pub fn label(&mut self, p: Prop, s: StateId) {
        self.valuation.entry(p).or_default().insert(s);
    }

    pub fn holds_atom(&self, p: &Prop, s: StateId) -> bool {
        self.valuation.get(p).is_some_and(|set| set.contains(&s))
    }

    pub fn props(&self) -> impl Iterator<Item = &Prop> {
        self.valuation.keys()
    }

    /// Empty iff the table is total, locality holds and there is an initial
    /// state.
    pub fn validate(&self) -> Vec<Violation> {
        let mut out = Vec::new();
        if self.initial.is_empty() {
            out.push(Violation::NoInitialState);
        }
        let n_act = self.action_count();
        for s in 0..self.state_count() {
            for a in 0..n_act {
                if self.transitions[s * n_act + a].is_none() {
                    out.push(Violation::Totality {
                        state: self.fmt_state(s as StateId),
                        action: self.fmt_action(a as ActionId),
                    });
                }
            }
        }
        let env = self.environment_index();
        for k in 0..self.members.len() {
            // (own, env, action) -> (witness state, successor component)
            let mut seen: BTreeMap<(usize, usize, usize), (StateId, usize)> = BTreeMap::new();
            for s in 0..self.state_count() as StateId {
                let key_state = (self.local(s, k), self.local(s, env));
                for a in 0..n_act {
                    let Some(t) = self.transitions[s as usize * n_act + a] else { continue };
                    let next = self.local(t, k);
                    match seen.get(&(key_state.0, key_state.1, a)) {
                        None => {
                            seen.insert((key_state.0, key_state.1, a), (s, next));
                        }
                        Some(&(w, n)) if n != next => out.push(Violation::Locality {
                            member: self.members[k].name.to_string(),
                            first: self.fmt_state(w),
                            second: self.fmt_state(s),
                            action: self.fmt_action(a as ActionId),
                        }),
                        Some(_) => {}
                    }
                }
            }
        }
        out
    }

    pub fn is_run(&self, r: &Run) -> bool {
        r.states.len() == r.actions.len() + 1
            && self.initial.binary_search(&r.states[0]).is_ok()
            && r.actions.iter().enumerate().all(|(j, &a)| {
                (a as usize) < self.action_count() && self.transition(r.states[j], a) == Some(r.states[j + 1])
            })
    }

    /// `R^n(IS)` in lexicographic order of (initial state, actions).
    pub fn runs_of_length(&self, n: usize) -> Result<Vec<Run>, SystemError> {
        let mut level: Vec<Run> = self.initial.iter().map(|&s| Run::initial(s)).collect();
        for _ in 0..n {
            let mut next = Vec::with_capacity(level.len() * self.action_count());
            for r in &level {
                for a in 0..self.action_count() as ActionId {
                    let t = self.successor(r.last(), a)?;
                    next.push(r.extended(a, t));
                }
                if next.len() > SIZE_LIMIT {
                    return Err(SystemError::TooLarge(format!("more than {SIZE_LIMIT} runs")));
                }
            }
            level = next;
        }
        Ok(level)
    }

    /// `R^0 ∪ … ∪ R^n`, shortest first.
    pub fn runs_up_to(&self, n: usize) -> Result<Vec<Run>, SystemError> {
        let mut out = Vec::new();
        for k in 0..=n {
            out.extend(self.runs_of_length(k)?);
        }
        Ok(out)
    }

    /// Γ-projection of a run; `members` are member positions.
    pub fn project(&self, r: &Run, members: &[usize]) -> LocalRun {
        LocalRun {
            states: r.states.iter().map(|&s| members.iter().map(|&k| self.local(s, k)).collect()).collect(),
            actions: r
                .actions
                .iter()
                .map(|&a| members.iter().map(|&k| self.action_component(a, k)).collect())
                .collect(),
        }
    }

    pub fn indistinguishable(&self, r1: &Run, r2: &Run, members: &[usize]) -> bool {
        r1.len() == r2.len() && self.project(r1, members) == self.project(r2, members)
    }

    /// `[r]_Γ`: all runs of the same length with the same Γ-projection.
    pub fn equivalence_class(&self, r: &Run, members: &[usize]) -> Result<Vec<Run>, SystemError> {
        let target = self.project(r, members);
        Ok(self.runs_of_length(r.len())?.into_iter().filter(|x| self.project(x, members) == target).collect())
    }

    /// Human-readable run: `(x0,y0,e0) -(a,c,d)-> (x1,y0,e0)`.
    pub fn fmt_run(&self, r: &Run) -> String {
        let mut out = self.fmt_state(r.states[0]);
        for (j, &a) in r.actions.iter().enumerate() {
            out.push_str(&format!(" -{}-> {}", self.fmt_action(a), self.fmt_state(r.states[j + 1])));
        }
        out
    }
}

/// `l⁰ a⁰ l¹ … lⁿ`
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Run {
    pub states: Vec<StateId>,
    pub actions: Vec<ActionId>,
}

impl Run {
    pub fn initial(s: StateId) -> Run {
        Run { states: alloc::vec![s], actions: Vec::new() }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }

    pub fn last(&self) -> StateId {
        *self.states.last().expect("a run has at least one state")
    }

    pub fn extended(&self, a: ActionId, s: StateId) -> Run {
        let mut r = self.clone();
        r.actions.push(a);
        r.states.push(s);
        r
    }

    /// `r[0..n]`
    pub fn prefix(&self, n: usize) -> Run {
        Run { states: self.states[..=n].to_vec(), actions: self.actions[..n].to_vec() }
    }
}

/// Coalition view of a run: local-state and action components of the
/// selected members only.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct LocalRun {
    pub states: Vec<Vec<usize>>,
    pub actions: Vec<Vec<usize>>,
}

impl LocalRun {
    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.actions.is_empty()
    }
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use crate::formula::ENVIRONMENT;

    fn member(name: &str, states: &[&str], actions: &[&str]) -> Member {
        Member::new(
            Agent::new(name).unwrap(),
            states.iter().map(|s| s.to_string()).collect(),
            actions.iter().map(|s| s.to_string()).collect(),
        )
        .unwrap()
    }

    /// Two agents; agent 1 moves from x0 to the absorbing x1 by playing `a`.
    /// With `env_actions = 2` the environment has a second, inert action.
    pub(crate) fn toy(env_actions: usize) -> InterpretedSystem {
        let env_acts: &[&str] = if env_actions == 2 { &["d", "d2"] } else { &["d"] };
        let is = InterpretedSystem::new(alloc::vec![
            member("1", &["x0", "x1"], &["a", "b"]),
            member("2", &["y0"], &["c"]),
            member(ENVIRONMENT, &["e0"], env_acts),
        ])
        .unwrap();
        let mut is = is.with_local_transitions(|k, own, _env, act| match k {
            0 if own == 0 && act[0] == 0 => Some(1),
            _ => Some(own),
        });
        let init = is.parse_state(&["x0", "y0", "e0"]).unwrap();
        is.add_initial(init);
        let p = Prop::new("p");
        for s in 0..is.state_count() as StateId {
            if is.local(s, 0) == 1 {
                is.label(p.clone(), s);
            }
        }
        is
    }

    #[test]
    fn toy_is_valid() {
        assert!(toy(1).validate().is_empty());
        assert!(toy(2).validate().is_empty());
    }

    #[test]
    fn successor_reads_the_table() {
        let is = toy(1);
        let s = is.parse_state(&["x0", "y0", "e0"]).unwrap();
        let a = is.parse_action(&["a", "c", "d"]).unwrap();
        let t = is.successor(s, a).unwrap();
        assert_eq!(is.state_tokens(t), ["x1", "y0", "e0"]);
    }

    #[test]
    fn run_counts() {
        let is = toy(1);
        assert_eq!(is.runs_of_length(0).unwrap().len(), 1);
        // |I| · |Act_Σe| = 1 · (2·1·1)
        assert_eq!(is.runs_of_length(1).unwrap().len(), 2);
        assert_eq!(is.runs_up_to(1).unwrap().len(), 3);
        assert_eq!(toy(2).runs_of_length(1).unwrap().len(), 4);
    }

    #[test]
    fn missing_transition_is_a_totality_violation() {
        let mut is = InterpretedSystem::new(alloc::vec![
            member("1", &["x0"], &["a"]),
            member(ENVIRONMENT, &["e0"], &["d", "f"]),
        ])
        .unwrap();
        is.add_initial(0);
        is.set_transition(0, 0, 0);
        let v = is.validate();
        assert_eq!(v.len(), 1);
        assert!(matches!(&v[0], Violation::Totality { action, .. } if action == "(a,f)"));
    }

    #[test]
    fn locality_violation_is_reported() {
        let mut is = InterpretedSystem::new(alloc::vec![
            member("1", &["x0", "x1"], &["a"]),
            member("2", &["y0", "y1"], &["c"]),
            member(ENVIRONMENT, &["e0"], &["d"]),
        ])
        .unwrap();
        is.add_initial(0);
        // agent 1's successor depends on agent 2's local state
        for s in 0..is.state_count() as StateId {
            let next1 = is.local(s, 1);
            let t = is.state_id(&[next1, 0, 0]).unwrap();
            is.set_transition(s, 0, t);
        }
        let v = is.validate();
        assert!(v.iter().any(|x| matches!(x, Violation::Locality { member, .. } if member == "1")));
    }

    #[test]
    fn empty_projection_has_run_length() {
        let is = toy(1);
        let r = &is.runs_of_length(1).unwrap()[0];
        let lr = is.project(r, &[]);
        assert_eq!(lr.states, [Vec::<usize>::new(), Vec::new()]);
        assert_eq!(lr.len(), 1);
        let full = is.project(r, &[0, 1]);
        assert_eq!(full.states[0], [0, 0]);
    }

    #[test]
    fn environment_action_is_invisible_to_agents() {
        let is = toy(2);
        let runs = is.runs_of_length(1).unwrap();
        let a = is.parse_action(&["a", "c", "d"]).unwrap();
        let a2 = is.parse_action(&["a", "c", "d2"]).unwrap();
        let b = is.parse_action(&["b", "c", "d"]).unwrap();
        let find = |x| runs.iter().find(|r| r.actions[0] == x).unwrap();
        assert!(is.indistinguishable(find(a), find(a2), &[0]));
        assert!(!is.indistinguishable(find(a), find(b), &[0]));
        // agent 2 sees only y0 and c
        assert!(is.indistinguishable(find(a), find(b), &[1]));
        assert_eq!(is.equivalence_class(find(a), &[]).unwrap().len(), 4);
    }

    #[test]
    fn constructor_rejects_bad_members() {
        assert_eq!(
            InterpretedSystem::new(alloc::vec![member("1", &["x"], &["a"])]),
            Err(SystemError::EnvironmentPlacement)
        );
        assert!(Member::new(Agent::new("1").unwrap(), alloc::vec![], alloc::vec!["a".into()]).is_err());
        assert!(matches!(
            Member::new(Agent::new("1").unwrap(), alloc::vec!["x".into(), "x".into()], alloc::vec!["a".into()]),
            Err(SystemError::DuplicateToken { .. })
        ));
    }
}
