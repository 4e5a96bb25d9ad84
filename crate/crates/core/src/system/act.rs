//! Systems whose local states also record the member's last action.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use super::{InterpretedSystem, Member, Run, StateId, SystemError};
use crate::formula::Prop;

/// `IS^Act` together with the atoms naming each member's actions.
#[derive(Debug, Clone)]
pub struct ActSystem {
    pub system: InterpretedSystem,
    /// `action_atoms[k][b]` holds exactly where member `k` last played `b`.
    pub action_atoms: Vec<Vec<Prop>>,
    /// Marker recorded in initial states.
    pub dummy: String,
}

fn atom_safe(s: &str) -> bool {
    let mut bytes = s.bytes();
    matches!(bytes.next(), Some(b) if b.is_ascii_lowercase()) && bytes.all(|b| b.is_ascii_alphanumeric() || b == b'_')
}

const RENAME_BUDGET: usize = 4;

fn action_atoms(is: &InterpretedSystem) -> Result<Vec<Vec<Prop>>, SystemError> {
    let ap: BTreeSet<&str> = is.props().map(Prop::as_str).collect();
    let direct: Vec<&str> = is.members().iter().flat_map(|m| m.actions.iter().map(String::as_str)).collect();
    let distinct: BTreeSet<&str> = direct.iter().copied().collect();
    if distinct.len() == direct.len() && direct.iter().all(|t| atom_safe(t) && !ap.contains(t)) {
        return Ok(is.members().iter().map(|m| m.actions.iter().map(|t| Prop::new(t.as_str())).collect()).collect());
    }
    // `act_<member>_<token>`, with the prefix repeated until it clears AP.
    for depth in 1..=RENAME_BUDGET {
        let prefix = "act_".repeat(depth);
        let names: Vec<Vec<String>> = is
            .members()
            .iter()
            .map(|m| {
                m.actions
                    .iter()
                    .enumerate()
                    .map(|(k, t)| {
                        let t = if t.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
                            t.clone()
                        } else {
                            k.to_string()
                        };
                        format!("{prefix}{}_{t}", m.name)
                    })
                    .collect()
            })
            .collect();
        let flat: Vec<&str> = names.iter().flatten().map(String::as_str).collect();
        let distinct: BTreeSet<&str> = flat.iter().copied().collect();
        if distinct.len() == flat.len() && flat.iter().all(|t| !ap.contains(t)) {
            return Ok(names.into_iter().map(|v| v.into_iter().map(Prop::new).collect()).collect());
        }
    }
    Err(SystemError::ActionAtomCollision(format!("tried {RENAME_BUDGET} `act_` prefixes")))
}

/// Builds `IS^Act`: member `k`'s local states become pairs `l/x` with `x` an
/// action of `k` or the dummy marker, initial states carry the marker, and
/// `t^Act((l, x), a) = (t(l, a), a)`. The valuation of the original atoms
/// ignores the recorded actions; each action gets an atom of its own.
pub fn build_is_act(is: &InterpretedSystem) -> Result<ActSystem, SystemError> {
    let atoms = action_atoms(is)?;
    let all_actions: BTreeSet<&str> = is.members().iter().flat_map(|m| m.actions.iter().map(String::as_str)).collect();
    let mut dummy = String::from("*");
    while all_actions.contains(dummy.as_str()) {
        dummy.push('*');
    }
    let members = is
        .members()
        .iter()
        .map(|m| {
            let mut states = Vec::with_capacity(m.local_states.len() * (m.actions.len() + 1));
            for l in &m.local_states {
                states.push(format!("{l}/{dummy}"));
                for a in &m.actions {
                    states.push(format!("{l}/{a}"));
                }
            }
            Member { name: m.name.clone(), local_states: states, actions: m.actions.clone() }
        })
        .collect::<Vec<_>>();
    let widths: Vec<usize> = is.members().iter().map(|m| m.actions.len() + 1).collect();
    let mut out = InterpretedSystem::new(members)?;
    let n = is.members().len();
    let split = |out: &InterpretedSystem, s: StateId| -> (Vec<usize>, Vec<usize>) {
        (0..n)
            .map(|k| {
                let v = out.local(s, k);
                (v / widths[k], v % widths[k])
            })
            .unzip()
    };
    for s in 0..out.state_count() as StateId {
        let (locals, _) = split(&out, s);
        let base = is.state_id(&locals)?;
        for a in 0..out.action_count() as u32 {
            let t = is.successor(base, a)?;
            let next: Vec<usize> = (0..n).map(|k| is.local(t, k) * widths[k] + is.action_component(a, k) + 1).collect();
            let t_act = out.state_id(&next)?;
            out.set_transition(s, a, t_act);
        }
    }
    for &l in is.initial() {
        let digits: Vec<usize> = (0..n).map(|k| is.local(l, k) * widths[k]).collect();
        let s = out.state_id(&digits)?;
        out.add_initial(s);
    }
    for p in is.props() {
        out.declare_prop(p.clone());
    }
    for row in &atoms {
        for p in row {
            out.declare_prop(p.clone());
        }
    }
    for s in 0..out.state_count() as StateId {
        let (locals, recorded) = split(&out, s);
        let base = is.state_id(&locals)?;
        for (p, set) in is.valuation() {
            if set.contains(&base) {
                out.label(p.clone(), s);
            }
        }
        for (k, x) in recorded.iter().enumerate() {
            if *x > 0 {
                out.label(atoms[k][x - 1].clone(), s);
            }
        }
    }
    Ok(ActSystem { system: out, action_atoms: atoms, dummy })
}

impl ActSystem {
    /// The run of `IS^Act` corresponding to a run of the original system.
    pub fn lift_run(&self, original: &InterpretedSystem, r: &Run) -> Result<Run, SystemError> {
        let n = original.members().len();
        let mut states = Vec::with_capacity(r.states.len());
        for (j, &s) in r.states.iter().enumerate() {
            let digits: Vec<usize> = (0..n)
                .map(|k| {
                    let width = original.members()[k].actions.len() + 1;
                    let recorded = if j == 0 { 0 } else { original.action_component(r.actions[j - 1], k) + 1 };
                    original.local(s, k) * width + recorded
                })
                .collect();
            states.push(self.system.state_id(&digits)?);
        }
        Ok(Run { states, actions: r.actions.clone() })
    }

    /// Atoms of member `k`, in action order.
    pub fn atoms_of(&self, k: usize) -> &[Prop] {
        &self.action_atoms[k]
    }
}
