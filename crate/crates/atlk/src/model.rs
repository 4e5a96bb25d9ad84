//! JSON model documents.
//!
//! ```json
//! {
//!   "agents": ["1", "2"],
//!   "local_states": {"1": ["x0", "x1"], "2": ["y0"], "e": ["e0"]},
//!   "actions": {"1": ["a", "b"], "2": ["c"], "e": ["d"]},
//!   "initial": [{"1": "x0", "2": "y0", "e": "e0"}],
//!   "transitions": [...],
//!   "valuation": {"p": [{"1": "x1", "2": "y0", "e": "e0"}]}
//! }
//! ```
//!
//! The environment `e` is implicit in `agents` but has its own entries in
//! the member maps. `transitions` is either a full list of
//! `{from, action, to}` entries or a list of local entries
//! `{agent, own_state, env_state, action_vector, next_own_state}`; the two
//! forms cannot be mixed. Valid systems serialize to the local form.

use std::collections::BTreeMap;

use atlk_core::formula::ENVIRONMENT;
use atlk_core::system::{InterpretedSystem, Member, StateId, SystemError};
use atlk_core::{parse_lenient, Agent, Formula, Prop};
use indexmap::IndexMap;
use serde::{Deserialize, Serialize};

/// One component per member, keyed by member name.
pub type Tuple = IndexMap<String, String>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ModelDoc {
    pub agents: Vec<String>,
    pub local_states: IndexMap<String, Vec<String>>,
    pub actions: IndexMap<String, Vec<String>>,
    pub initial: Vec<Tuple>,
    pub transitions: Vec<TransitionEntry>,
    #[serde(default)]
    pub valuation: IndexMap<String, Vec<Tuple>>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum TransitionEntry {
    Explicit(ExplicitTransition),
    Local(LocalTransition),
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExplicitTransition {
    pub from: Tuple,
    pub action: Tuple,
    pub to: Tuple,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LocalTransition {
    pub agent: String,
    pub own_state: String,
    pub env_state: String,
    pub action_vector: Tuple,
    pub next_own_state: String,
}

#[derive(Debug, thiserror::Error)]
pub enum ModelError {
    #[error("malformed model document: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    System(#[from] SystemError),
    #[error("{what}: no entry for member `{member}`")]
    Missing { what: &'static str, member: String },
    #[error("{what}: unknown member `{member}`")]
    UnknownMember { what: &'static str, member: String },
    #[error("`agents` must not list the environment `e`")]
    ExplicitEnvironment,
    #[error("`transitions` mixes explicit and local entries")]
    MixedTransitions,
    #[error("conflicting transitions: {0}")]
    Conflict(String),
    #[error("environment entry has own_state `{own}` but env_state `{env}`")]
    EnvironmentMismatch { own: String, env: String },
    #[error("`{0}` is not a valid proposition name")]
    BadProp(String),
}

fn member_names(doc: &ModelDoc) -> Result<Vec<String>, ModelError> {
    if doc.agents.iter().any(|a| a == ENVIRONMENT) {
        return Err(ModelError::ExplicitEnvironment);
    }
    Ok(doc.agents.iter().cloned().chain([ENVIRONMENT.to_string()]).collect())
}

/// Checks that `map` has exactly one entry per member.
fn check_keys<V>(what: &'static str, names: &[String], map: &IndexMap<String, V>) -> Result<(), ModelError> {
    if let Some(k) = map.keys().find(|k| !names.contains(k)) {
        return Err(ModelError::UnknownMember { what, member: k.clone() });
    }
    if let Some(n) = names.iter().find(|n| !map.contains_key(*n)) {
        return Err(ModelError::Missing { what, member: n.clone() });
    }
    Ok(())
}

struct Reader<'a> {
    is: &'a InterpretedSystem,
    names: Vec<String>,
}

impl Reader<'_> {
    fn tokens<'t>(&self, what: &'static str, t: &'t Tuple) -> Result<Vec<&'t str>, ModelError> {
        check_keys(what, &self.names, t)?;
        Ok(self.names.iter().map(|n| t[n].as_str()).collect())
    }

    fn state(&self, what: &'static str, t: &Tuple) -> Result<StateId, ModelError> {
        Ok(self.is.parse_state(&self.tokens(what, t)?)?)
    }

    fn action(&self, what: &'static str, t: &Tuple) -> Result<u32, ModelError> {
        Ok(self.is.parse_action(&self.tokens(what, t)?)?)
    }
}

pub fn from_document(doc: &ModelDoc) -> Result<InterpretedSystem, ModelError> {
    let names = member_names(doc)?;
    check_keys("local_states", &names, &doc.local_states)?;
    check_keys("actions", &names, &doc.actions)?;
    let members = names
        .iter()
        .map(|n| {
            let agent = Agent::new(n.clone()).map_err(|_| SystemError::InvalidToken(n.clone()))?;
            Member::new(agent, doc.local_states[n].clone(), doc.actions[n].clone())
        })
        .collect::<Result<Vec<_>, _>>()?;
    let mut is = InterpretedSystem::new(members)?;

    let explicit = doc.transitions.iter().all(|t| matches!(t, TransitionEntry::Explicit(_)));
    let local = doc.transitions.iter().all(|t| matches!(t, TransitionEntry::Local(_)));
    if !explicit && !local {
        return Err(ModelError::MixedTransitions);
    }
    if explicit {
        let r = Reader { is: &is, names: names.clone() };
        let mut cells = Vec::with_capacity(doc.transitions.len());
        for t in &doc.transitions {
            let TransitionEntry::Explicit(t) = t else { unreachable!() };
            let s = r.state("transition `from`", &t.from)?;
            let a = r.action("transition `action`", &t.action)?;
            let u = r.state("transition `to`", &t.to)?;
            cells.push((s, a, u));
        }
        for (s, a, u) in cells {
            match is.transition(s, a) {
                Some(prev) if prev != u => {
                    return Err(ModelError::Conflict(format!(
                        "{} under {} leads to both {} and {}",
                        is.fmt_state(s),
                        is.fmt_action(a),
                        is.fmt_state(prev),
                        is.fmt_state(u)
                    )))
                }
                _ => is.set_transition(s, a, u),
            }
        }
    } else {
        let env = names.len() - 1;
        let mut table: BTreeMap<(usize, usize, usize, u32), usize> = BTreeMap::new();
        {
            let r = Reader { is: &is, names: names.clone() };
            for t in &doc.transitions {
                let TransitionEntry::Local(t) = t else { unreachable!() };
                let k = names
                    .iter()
                    .position(|n| *n == t.agent)
                    .ok_or_else(|| ModelError::UnknownMember { what: "transition `agent`", member: t.agent.clone() })?;
                let m = &is.members()[k];
                let own = m.state_index(&t.own_state)?;
                let e = is.members()[env].state_index(&t.env_state)?;
                if k == env && own != e {
                    return Err(ModelError::EnvironmentMismatch { own: t.own_state.clone(), env: t.env_state.clone() });
                }
                let a = r.action("transition `action_vector`", &t.action_vector)?;
                let next = m.state_index(&t.next_own_state)?;
                if let Some(prev) = table.insert((k, own, e, a), next) {
                    if prev != next {
                        return Err(ModelError::Conflict(format!(
                            "`{}` at {} with environment at {} under {}",
                            t.agent,
                            t.own_state,
                            t.env_state,
                            is.fmt_action(a)
                        )));
                    }
                }
            }
        }
        let radix = is.action_radix().clone();
        is = is.with_local_transitions(|k, own, e, act| table.get(&(k, own, e, radix.encode(act) as u32)).copied());
    }

    let r = Reader { is: &is, names: names.clone() };
    let initial = doc.initial.iter().map(|t| r.state("initial", t)).collect::<Result<Vec<_>, _>>()?;
    let mut labels = Vec::new();
    for (p, states) in &doc.valuation {
        match parse_lenient(p) {
            Ok(Formula::Atom(q)) if q.as_str() == p => {}
            _ => return Err(ModelError::BadProp(p.clone())),
        }
        let ids = states.iter().map(|t| r.state("valuation", t)).collect::<Result<Vec<_>, _>>()?;
        labels.push((Prop::new(p.clone()), ids));
    }
    for s in initial {
        is.add_initial(s);
    }
    for (p, ids) in labels {
        is.declare_prop(p.clone());
        for s in ids {
            is.label(p.clone(), s);
        }
    }
    Ok(is)
}

fn tuple(names: &[String], tokens: Vec<&str>) -> Tuple {
    names.iter().cloned().zip(tokens.into_iter().map(str::to_string)).collect()
}

/// The canonical document for `is`: local transition entries when the
/// system validates, explicit entries for the defined cells otherwise.
pub fn to_document(is: &InterpretedSystem) -> ModelDoc {
    let names: Vec<String> = is.members().iter().map(|m| m.name.to_string()).collect();
    let env = names.len() - 1;
    let state = |s: StateId| tuple(&names, is.state_tokens(s));
    let action = |a: u32| tuple(&names, is.action_tokens(a));
    let mut transitions = Vec::new();
    if is.validate().is_empty() {
        for (k, m) in is.members().iter().enumerate() {
            for own in 0..m.local_states.len() {
                for e in 0..is.members()[env].local_states.len() {
                    if k == env && own != e {
                        continue;
                    }
                    // any global state with these two components will do
                    let mut locals = vec![0; names.len()];
                    locals[k] = own;
                    locals[env] = e;
                    let s = is.state_id(&locals).expect("components are in range");
                    for a in 0..is.action_count() as u32 {
                        let t = is.successor(s, a).expect("valid systems are total");
                        transitions.push(TransitionEntry::Local(LocalTransition {
                            agent: names[k].clone(),
                            own_state: m.local_states[own].clone(),
                            env_state: is.members()[env].local_states[e].clone(),
                            action_vector: action(a),
                            next_own_state: m.local_states[is.local(t, k)].clone(),
                        }));
                    }
                }
            }
        }
    } else {
        for s in 0..is.state_count() as StateId {
            for a in 0..is.action_count() as u32 {
                if let Some(t) = is.transition(s, a) {
                    transitions.push(TransitionEntry::Explicit(ExplicitTransition {
                        from: state(s),
                        action: action(a),
                        to: state(t),
                    }));
                }
            }
        }
    }
    ModelDoc {
        agents: names[..env].to_vec(),
        local_states: is.members().iter().map(|m| (m.name.to_string(), m.local_states.clone())).collect(),
        actions: is.members().iter().map(|m| (m.name.to_string(), m.actions.clone())).collect(),
        initial: is.initial().iter().map(|&s| state(s)).collect(),
        transitions,
        valuation: is
            .valuation()
            .iter()
            .map(|(p, states)| (p.to_string(), states.iter().map(|&s| state(s)).collect()))
            .collect(),
    }
}

pub fn parse_model(text: &str) -> Result<InterpretedSystem, ModelError> {
    from_document(&serde_json::from_str(text)?)
}

pub fn serialize_model(is: &InterpretedSystem) -> String {
    let mut out = serde_json::to_string_pretty(&to_document(is)).expect("documents serialize");
    out.push('\n');
    out
}
