//! Brute-force evaluation of formulas at finite runs, up to a horizon.
//!
//! Runs longer than the horizon are never built. Whatever depends on them is
//! reported as [`Verdict::Unknown`]; `True` and `False` answers are final.

mod eval;
mod strategy;
mod tree;

use alloc::collections::BTreeMap;
use alloc::string::String;
use core::fmt;

use crate::formula::{Coalition, Formula};
use crate::system::{InterpretedSystem, Run, SystemError};

pub use eval::{EvalConfig, Evaluator, UntilMode};
pub use strategy::{count_strategies, enumerate_strategies, outcomes, Quantifier, Strategy, StrategyIter};
pub use tree::{NodeId, Partition, RunTree, TREE_LIMIT};

/// Default cap on the number of strategies a single search may visit.
pub const DEFAULT_STRATEGY_BUDGET: u64 = 100_000;

/// Three-valued truth, ordered `False < Unknown < True` so that conjunction
/// is `min` and disjunction is `max`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Verdict {
    False,
    Unknown,
    True,
}

impl Verdict {
    pub fn from_bool(b: bool) -> Verdict {
        if b {
            Verdict::True
        } else {
            Verdict::False
        }
    }

    pub fn and(self, other: Verdict) -> Verdict {
        self.min(other)
    }

    pub fn or(self, other: Verdict) -> Verdict {
        self.max(other)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(self) -> Verdict {
        match self {
            Verdict::False => Verdict::True,
            Verdict::Unknown => Verdict::Unknown,
            Verdict::True => Verdict::False,
        }
    }

    pub fn implies(self, other: Verdict) -> Verdict {
        self.not().or(other)
    }

    pub fn is_decided(self) -> bool {
        self != Verdict::Unknown
    }

    /// Whether `self` and `other` are both decided and differ.
    pub fn conflicts_with(self, other: Verdict) -> bool {
        self.is_decided() && other.is_decided() && self != other
    }
}

impl fmt::Display for Verdict {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Verdict::False => "False",
            Verdict::Unknown => "Unknown",
            Verdict::True => "True",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum OracleError {
    #[error(transparent)]
    System(SystemError),
    #[error("run of length {length} exceeds horizon {horizon}")]
    HorizonTooSmall { length: usize, horizon: usize },
    #[error("not a run of the system")]
    InvalidRun,
    #[error("{runs} runs up to the horizon exceed the limit of {limit}")]
    TreeTooLarge { runs: usize, limit: usize },
    #[error("{count} strategies exceed the budget of {budget}")]
    BudgetExceeded { count: u128, budget: u64 },
    #[error("`{formula}` is undecided at some run within the horizon")]
    InnerUnknown { formula: String },
    #[error("the system is not in complete-information shape")]
    NotCompleteInformation,
    #[error("strategy has no action for a local run of agent `{agent}`")]
    MissingStrategyValue { agent: String },
}

impl From<SystemError> for OracleError {
    fn from(e: SystemError) -> Self {
        OracleError::System(e)
    }
}

/// `IS, r ⊨ f` with runs up to length `horizon`.
pub fn holds(is: &InterpretedSystem, r: &Run, f: &Formula, horizon: usize) -> Result<Verdict, OracleError> {
    if r.len() > horizon {
        return Err(OracleError::HorizonTooSmall { length: r.len(), horizon });
    }
    let mut ev = Evaluator::new(is, horizon)?;
    ev.at(f, r)
}

/// Joins the verdicts at the 0-length runs: `True` if some initial run
/// satisfies `f`, `False` if none may, `Unknown` otherwise.
pub fn sat_at_initial(is: &InterpretedSystem, f: &Formula, horizon: usize) -> Result<Verdict, OracleError> {
    let mut ev = Evaluator::new(is, horizon)?;
    ev.sat_at_initial(f)
}

/// Least fixpoint of `X ⇔ K_Γψ ∨ (K_Γφ ∧ <<Γ>> X X)`, computed backwards from
/// the horizon, at every run of length at most `horizon`. `φ` and `ψ` must be
/// decided everywhere within the horizon.
pub fn lfp_until(
    is: &InterpretedSystem,
    g: &Coalition,
    phi: &Formula,
    psi: &Formula,
    horizon: usize,
) -> Result<BTreeMap<Run, Verdict>, OracleError> {
    let mut ev = Evaluator::new(is, horizon)?;
    let values = ev.lfp_until(g, phi, psi, true)?;
    let tree = ev.tree();
    Ok((0..tree.len() as NodeId).map(|n| (tree.run(n), values[n as usize])).collect())
}

/// Whether the system is in the complete-information shape: agents share a
/// common set of local states, the environment has one state and one
/// action, and every reachable state (within `horizon` steps) is diagonal.
pub fn is_complete_information(is: &InterpretedSystem, horizon: usize) -> Result<bool, OracleError> {
    let agents = is.agents();
    let env = &is.members()[is.environment_index()];
    if env.local_states.len() != 1 || env.actions.len() != 1 {
        return Ok(false);
    }
    if agents.windows(2).any(|w| w[0].local_states != w[1].local_states) {
        return Ok(false);
    }
    let tree = RunTree::build(is, horizon)?;
    Ok((0..tree.len() as NodeId).all(|n| {
        let s = tree.state(n);
        (1..agents.len()).all(|k| is.local(s, k) == is.local(s, 0))
    }))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kleene_tables() {
        use Verdict::*;
        assert_eq!(True.and(Unknown), Unknown);
        assert_eq!(False.and(Unknown), False);
        assert_eq!(True.or(Unknown), True);
        assert_eq!(Unknown.not(), Unknown);
        assert_eq!(False.implies(Unknown), True);
        assert!(True.conflicts_with(False));
        assert!(!True.conflicts_with(Unknown));
    }

    #[test]
    fn verdicts_at_all_runs_for_constants() {
        let is = crate::system::tests::toy(1);
        for r in is.runs_up_to(2).unwrap() {
            assert_eq!(holds(&is, &r, &Formula::tt(), 2).unwrap(), Verdict::True);
            assert_eq!(holds(&is, &r, &Formula::False, 2).unwrap(), Verdict::False);
        }
        assert_eq!(sat_at_initial(&is, &Formula::tt(), 0).unwrap(), Verdict::True);
        assert_eq!(sat_at_initial(&is, &Formula::False, 0).unwrap(), Verdict::False);
    }

    #[test]
    fn long_runs_are_refused() {
        let is = crate::system::tests::toy(1);
        let r = &is.runs_of_length(2).unwrap()[0];
        assert_eq!(holds(&is, r, &Formula::tt(), 1), Err(OracleError::HorizonTooSmall { length: 2, horizon: 1 }));
    }
}
