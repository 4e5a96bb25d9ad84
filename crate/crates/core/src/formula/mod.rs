//! Formulas of epistemic ATL with perfect recall and of CTL with distributed
//! knowledge.
//!
//! Both languages share one abstract syntax with ten core constructors.
//! Everything else (negation, conjunction, `P`, `F`, `G`, `W`, `A X`, ...)
//! is sugar: the smart constructors below expand it, the parser calls them,
//! and the printer recognises the expanded shapes again.

mod parse;
mod render;

use alloc::boxed::Box;
use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;
use core::cmp::Ordering;
use core::fmt;

pub use parse::{parse, parse_lenient, ParseError};

/// Reserved id of the environment.
pub const ENVIRONMENT: &str = "e";

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum FormulaError {
    #[error("invalid agent name `{0}`")]
    InvalidAgent(String),
    #[error("the environment `e` cannot be a coalition member")]
    EnvironmentInCoalition,
    #[error("agent `{0}` occurs twice in a coalition")]
    DuplicateAgent(String),
}

/// An agent name. Purely numeric names order numerically, so `2 < 10`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Agent(String);

impl Agent {
    pub fn new(name: impl Into<String>) -> Result<Self, FormulaError> {
        let name = name.into();
        if name.is_empty() || !name.bytes().all(|b| b.is_ascii_alphanumeric() || b == b'_') {
            return Err(FormulaError::InvalidAgent(name));
        }
        Ok(Agent(name))
    }

    pub fn environment() -> Self {
        Agent(String::from(ENVIRONMENT))
    }

    pub fn is_environment(&self) -> bool {
        self.0 == ENVIRONMENT
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl Ord for Agent {
    fn cmp(&self, other: &Self) -> Ordering {
        fn numeric(s: &str) -> bool {
            s.bytes().all(|b| b.is_ascii_digit())
        }
        match (numeric(&self.0), numeric(&other.0)) {
            (true, true) => {
                let a = self.0.trim_start_matches('0');
                let b = other.0.trim_start_matches('0');
                a.len().cmp(&b.len()).then_with(|| a.cmp(b)).then_with(|| self.0.cmp(&other.0))
            }
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            (false, false) => self.0.cmp(&other.0),
        }
    }
}

impl PartialOrd for Agent {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Agent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

/// A finite set of agents, kept sorted and duplicate free. Never contains the
/// environment.
#[derive(Debug, Clone, Default, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Coalition(Vec<Agent>);

impl Coalition {
    pub fn empty() -> Self {
        Coalition(Vec::new())
    }

    /// Builds a coalition, rejecting the environment and repeated agents.
    pub fn new<I: IntoIterator<Item = Agent>>(agents: I) -> Result<Self, FormulaError> {
        let mut members: Vec<Agent> = Vec::new();
        for agent in agents {
            if agent.is_environment() {
                return Err(FormulaError::EnvironmentInCoalition);
            }
            if members.contains(&agent) {
                return Err(FormulaError::DuplicateAgent(agent.0));
            }
            members.push(agent);
        }
        members.sort();
        Ok(Coalition(members))
    }

    pub fn of(names: &[&str]) -> Result<Self, FormulaError> {
        let agents = names.iter().map(|n| Agent::new(*n)).collect::<Result<Vec<_>, _>>()?;
        Coalition::new(agents)
    }

    pub fn members(&self) -> &[Agent] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn contains(&self, agent: &Agent) -> bool {
        self.0.binary_search(agent).is_ok()
    }

    pub fn is_subset(&self, other: &Coalition) -> bool {
        self.0.iter().all(|a| other.contains(a))
    }

    /// Every subset of this coalition, smallest first.
    pub fn subsets(&self) -> Vec<Coalition> {
        let n = self.0.len();
        let mut out: Vec<Coalition> = (0u32..(1 << n))
            .map(|mask| Coalition((0..n).filter(|i| mask & (1 << i) != 0).map(|i| self.0[i].clone()).collect()))
            .collect();
        out.sort_by(|a, b| a.len().cmp(&b.len()).then_with(|| a.cmp(b)));
        out
    }
}

impl fmt::Display for Coalition {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, a) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(",")?;
            }
            f.write_str(a.as_str())?;
        }
        Ok(())
    }
}

/// A propositional variable. Action atoms introduced by the translator live
/// in the same namespace; names with a leading underscore are reserved for
/// generated atoms.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Prop(String);

impl Prop {
    pub fn new(name: impl Into<String>) -> Self {
        Prop(name.into())
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn is_reserved(&self) -> bool {
        self.0.starts_with('_')
    }
}

impl From<&str> for Prop {
    fn from(s: &str) -> Self {
        Prop::new(s)
    }
}

impl fmt::Display for Prop {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Formula {
    False,
    Atom(Prop),
    Implies(Box<Formula>, Box<Formula>),
    /// Distributed knowledge `K_Γ`.
    DKnows(Coalition, Box<Formula>),
    /// `<<Γ>> X φ`
    CoopNext(Coalition, Box<Formula>),
    /// `<<Γ>> (φ U ψ)`
    CoopUntil(Coalition, Box<Formula>, Box<Formula>),
    /// `[[Γ]] (φ U ψ)`
    DualCoopUntil(Coalition, Box<Formula>, Box<Formula>),
    ExistsNext(Box<Formula>),
    ExistsUntil(Box<Formula>, Box<Formula>),
    ForallUntil(Box<Formula>, Box<Formula>),
}

/// The language a formula belongs to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Fragment {
    /// No cooperation modalities.
    CtlD,
    /// Cooperation modalities only as `<<Γ>> X` and `<<Γ>> (K_Γ φ U K_Γ ψ)`.
    AtlkpSubset,
    /// Cooperation modalities, no path quantifiers, outside the subset.
    AtlkpFull,
    /// Cooperation modalities together with path quantifiers.
    Mixed,
}

impl fmt::Display for Fragment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Fragment::CtlD => "CtlD",
            Fragment::AtlkpSubset => "AtlkpSubset",
            Fragment::AtlkpFull => "AtlkpFull",
            Fragment::Mixed => "Mixed",
        })
    }
}

fn bx(f: Formula) -> Box<Formula> {
    Box::new(f)
}

impl Formula {
    pub fn atom(name: &str) -> Formula {
        Formula::Atom(Prop::new(name))
    }

    pub fn prop(p: &Prop) -> Formula {
        Formula::Atom(p.clone())
    }

    pub fn tt() -> Formula {
        Formula::implies(Formula::False, Formula::False)
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::Implies(bx(a), bx(b))
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(a: Formula) -> Formula {
        Formula::implies(a, Formula::False)
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::implies(a, Formula::not(b)))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::implies(Formula::not(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    /// Left-nested conjunction; the empty conjunction is `true`.
    pub fn conj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::tt(),
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Left-nested disjunction; the empty disjunction is `false`.
    pub fn disj<I: IntoIterator<Item = Formula>>(items: I) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::False,
            Some(first) => it.fold(first, Formula::or),
        }
    }

    pub fn knows(g: Coalition, a: Formula) -> Formula {
        Formula::DKnows(g, bx(a))
    }

    /// `P_Γ φ = ¬K_Γ¬φ`
    pub fn possible(g: Coalition, a: Formula) -> Formula {
        Formula::not(Formula::knows(g, Formula::not(a)))
    }

    pub fn coop_next(g: Coalition, a: Formula) -> Formula {
        Formula::CoopNext(g, bx(a))
    }

    pub fn coop_until(g: Coalition, a: Formula, b: Formula) -> Formula {
        Formula::CoopUntil(g, bx(a), bx(b))
    }

    pub fn coop_eventually(g: Coalition, a: Formula) -> Formula {
        Formula::coop_until(g, Formula::tt(), a)
    }

    /// `<<Γ>> G φ = ¬[[Γ]] F ¬φ`
    pub fn coop_always(g: Coalition, a: Formula) -> Formula {
        Formula::not(Formula::dual_eventually(g, Formula::not(a)))
    }

    /// `<<Γ>> (φ W ψ) = ¬[[Γ]] (¬ψ U ¬ψ ∧ ¬φ)`
    pub fn coop_weak_until(g: Coalition, a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::dual_until(g, Formula::not(b.clone()), Formula::and(Formula::not(b), Formula::not(a))))
    }

    /// `[[Γ]] X φ = ¬<<Γ>> X ¬φ`
    pub fn dual_next(g: Coalition, a: Formula) -> Formula {
        Formula::not(Formula::coop_next(g, Formula::not(a)))
    }

    pub fn dual_until(g: Coalition, a: Formula, b: Formula) -> Formula {
        Formula::DualCoopUntil(g, bx(a), bx(b))
    }

    pub fn dual_eventually(g: Coalition, a: Formula) -> Formula {
        Formula::dual_until(g, Formula::tt(), a)
    }

    /// `[[Γ]] G φ = ¬<<Γ>> F ¬φ`
    pub fn dual_always(g: Coalition, a: Formula) -> Formula {
        Formula::not(Formula::coop_eventually(g, Formula::not(a)))
    }

    /// `[[Γ]] (φ W ψ) = ¬<<Γ>> (¬ψ U ¬ψ ∧ ¬φ)`
    pub fn dual_weak_until(g: Coalition, a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::coop_until(g, Formula::not(b.clone()), Formula::and(Formula::not(b), Formula::not(a))))
    }

    pub fn exists_next(a: Formula) -> Formula {
        Formula::ExistsNext(bx(a))
    }

    /// `A X φ = ¬E X ¬φ`
    pub fn forall_next(a: Formula) -> Formula {
        Formula::not(Formula::exists_next(Formula::not(a)))
    }

    pub fn exists_until(a: Formula, b: Formula) -> Formula {
        Formula::ExistsUntil(bx(a), bx(b))
    }

    pub fn forall_until(a: Formula, b: Formula) -> Formula {
        Formula::ForallUntil(bx(a), bx(b))
    }

    pub fn exists_eventually(a: Formula) -> Formula {
        Formula::exists_until(Formula::tt(), a)
    }

    pub fn forall_eventually(a: Formula) -> Formula {
        Formula::forall_until(Formula::tt(), a)
    }

    /// `E G φ = ¬A F ¬φ`
    pub fn exists_always(a: Formula) -> Formula {
        Formula::not(Formula::forall_eventually(Formula::not(a)))
    }

    /// `A G φ = ¬E F ¬φ`
    pub fn forall_always(a: Formula) -> Formula {
        Formula::not(Formula::exists_eventually(Formula::not(a)))
    }

    /// `E (φ W ψ) = ¬A (¬ψ U ¬ψ ∧ ¬φ)`
    pub fn exists_weak_until(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::forall_until(Formula::not(b.clone()), Formula::and(Formula::not(b), Formula::not(a))))
    }

    /// `A (φ W ψ) = ¬E (¬ψ U ¬ψ ∧ ¬φ)`
    pub fn forall_weak_until(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::exists_until(Formula::not(b.clone()), Formula::and(Formula::not(b), Formula::not(a))))
    }

    pub fn is_true(&self) -> bool {
        matches!(self, Formula::Implies(a, b) if **a == Formula::False && **b == Formula::False)
    }

    pub fn as_not(&self) -> Option<&Formula> {
        match self {
            Formula::Implies(a, b) if **b == Formula::False => Some(a),
            _ => None,
        }
    }

    pub fn as_and(&self) -> Option<(&Formula, &Formula)> {
        match self.as_not()? {
            Formula::Implies(a, b) => Some((a, b.as_not()?)),
            _ => None,
        }
    }

    pub fn as_or(&self) -> Option<(&Formula, &Formula)> {
        match self {
            Formula::Implies(a, b) => Some((a.as_not()?, b)),
            _ => None,
        }
    }

    pub fn as_iff(&self) -> Option<(&Formula, &Formula)> {
        let (l, r) = self.as_and()?;
        match (l, r) {
            (Formula::Implies(a, b), Formula::Implies(c, d)) if a == d && b == c => Some((a, b)),
            _ => None,
        }
    }

    /// Immediate subformulas, left to right.
    pub fn children(&self) -> Vec<&Formula> {
        match self {
            Formula::False | Formula::Atom(_) => Vec::new(),
            Formula::DKnows(_, a) | Formula::CoopNext(_, a) | Formula::ExistsNext(a) => {
                alloc::vec![&**a]
            }
            Formula::Implies(a, b)
            | Formula::CoopUntil(_, a, b)
            | Formula::DualCoopUntil(_, a, b)
            | Formula::ExistsUntil(a, b)
            | Formula::ForallUntil(a, b) => alloc::vec![&**a, &**b],
        }
    }

    /// Rebuilds this node with every immediate subformula mapped by `f`.
    pub fn map_children(&self, mut f: impl FnMut(&Formula) -> Formula) -> Formula {
        match self {
            Formula::False | Formula::Atom(_) => self.clone(),
            Formula::Implies(a, b) => Formula::Implies(bx(f(a)), bx(f(b))),
            Formula::DKnows(g, a) => Formula::DKnows(g.clone(), bx(f(a))),
            Formula::CoopNext(g, a) => Formula::CoopNext(g.clone(), bx(f(a))),
            Formula::CoopUntil(g, a, b) => Formula::CoopUntil(g.clone(), bx(f(a)), bx(f(b))),
            Formula::DualCoopUntil(g, a, b) => Formula::DualCoopUntil(g.clone(), bx(f(a)), bx(f(b))),
            Formula::ExistsNext(a) => Formula::ExistsNext(bx(f(a))),
            Formula::ExistsUntil(a, b) => Formula::ExistsUntil(bx(f(a)), bx(f(b))),
            Formula::ForallUntil(a, b) => Formula::ForallUntil(bx(f(a)), bx(f(b))),
        }
    }

    /// `[alpha/p]self`: every occurrence of the atom `p` replaced by `alpha`.
    pub fn substitute(&self, p: &Prop, alpha: &Formula) -> Formula {
        match self {
            Formula::Atom(q) if q == p => alpha.clone(),
            _ => self.map_children(|c| c.substitute(p, alpha)),
        }
    }

    /// Replaces every occurrence of the subformula `target` by `with`.
    /// Occurrences are matched outermost first.
    pub fn replace(&self, target: &Formula, with: &Formula) -> Formula {
        if self == target {
            with.clone()
        } else {
            self.map_children(|c| c.replace(target, with))
        }
    }

    pub fn contains(&self, target: &Formula) -> bool {
        self == target || self.children().into_iter().any(|c| c.contains(target))
    }

    pub fn props(&self) -> BTreeSet<Prop> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| {
            if let Formula::Atom(p) = f {
                out.insert(p.clone());
            }
        });
        out
    }

    pub fn coalitions(&self) -> BTreeSet<Coalition> {
        let mut out = BTreeSet::new();
        self.visit(&mut |f| match f {
            Formula::DKnows(g, _)
            | Formula::CoopNext(g, _)
            | Formula::CoopUntil(g, _, _)
            | Formula::DualCoopUntil(g, _, _) => {
                out.insert(g.clone());
            }
            _ => {}
        });
        out
    }

    /// All agents mentioned in some coalition.
    pub fn agents(&self) -> BTreeSet<Agent> {
        self.coalitions().into_iter().flat_map(|g| g.0.into_iter()).collect()
    }

    /// Pre-order traversal.
    pub fn visit(&self, f: &mut impl FnMut(&Formula)) {
        f(self);
        for c in self.children() {
            c.visit(f);
        }
    }

    pub fn size(&self) -> usize {
        1 + self.children().into_iter().map(Formula::size).sum::<usize>()
    }

    /// Nesting depth of modal operators (`K`, cooperation and path modalities).
    pub fn modal_depth(&self) -> usize {
        let inner = self.children().into_iter().map(Formula::modal_depth).max().unwrap_or(0);
        match self {
            Formula::False | Formula::Atom(_) | Formula::Implies(..) => inner,
            _ => inner + 1,
        }
    }

    pub fn has_cooperation(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if matches!(f, Formula::CoopNext(..) | Formula::CoopUntil(..) | Formula::DualCoopUntil(..)) {
                found = true;
            }
        });
        found
    }

    pub fn has_path_quantifier(&self) -> bool {
        let mut found = false;
        self.visit(&mut |f| {
            if matches!(f, Formula::ExistsNext(..) | Formula::ExistsUntil(..) | Formula::ForallUntil(..)) {
                found = true;
            }
        });
        found
    }

    /// For `<<Γ>> (K_Γ φ U K_Γ ψ)` returns `(Γ, φ, ψ)`.
    pub fn as_guarded_until(&self) -> Option<(&Coalition, &Formula, &Formula)> {
        match self {
            Formula::CoopUntil(g, a, b) => match (&**a, &**b) {
                (Formula::DKnows(ga, x), Formula::DKnows(gb, y)) if ga == g && gb == g => Some((g, x, y)),
                _ => None,
            },
            _ => None,
        }
    }

    /// First subformula (pre-order) that keeps this formula out of the
    /// translatable subset, if any.
    pub fn subset_violation(&self) -> Option<&Formula> {
        let mut found = None;
        self.first_match(
            &mut |f| match f {
                Formula::DualCoopUntil(..)
                | Formula::ExistsNext(..)
                | Formula::ExistsUntil(..)
                | Formula::ForallUntil(..) => true,
                Formula::CoopUntil(..) => f.as_guarded_until().is_none(),
                _ => false,
            },
            &mut found,
        );
        found
    }

    fn first_match<'a>(&'a self, pred: &mut impl FnMut(&Formula) -> bool, out: &mut Option<&'a Formula>) {
        if out.is_some() {
            return;
        }
        if pred(self) {
            *out = Some(self);
            return;
        }
        for c in self.children() {
            c.first_match(pred, out);
        }
    }

    pub fn classify(&self) -> Fragment {
        if !self.has_cooperation() {
            Fragment::CtlD
        } else if self.subset_violation().is_none() {
            Fragment::AtlkpSubset
        } else if !self.has_path_quantifier() {
            Fragment::AtlkpFull
        } else {
            Fragment::Mixed
        }
    }
}
