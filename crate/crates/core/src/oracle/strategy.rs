//! Uniform strategies: explicit enumeration, outcome sets, and the lazy
//! search used by the evaluator.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::rc::Rc;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::tree::{NodeId, Partition, RunTree};
use super::{OracleError, Verdict};
use crate::formula::Coalition;
use crate::system::{ActionId, InterpretedSystem, LocalRun, Run};

/// Which side quantifies over strategies: `<<Γ>>` picks one strategy that
/// works on every run of the class and every outcome, `[[Γ]]` asks that
/// every strategy admits some run and outcome.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantifier {
    Exists,
    Forall,
}

impl Quantifier {
    fn inner(self, a: Verdict, b: Verdict) -> Verdict {
        match self {
            Quantifier::Exists => a.and(b),
            Quantifier::Forall => a.or(b),
        }
    }

    fn inner_unit(self) -> Verdict {
        match self {
            Quantifier::Exists => Verdict::True,
            Quantifier::Forall => Verdict::False,
        }
    }

    fn outer(self, a: Verdict, b: Verdict) -> Verdict {
        match self {
            Quantifier::Exists => a.or(b),
            Quantifier::Forall => a.and(b),
        }
    }

    fn outer_unit(self) -> Verdict {
        self.inner_unit().not()
    }
}

/// A coalition strategy: for each member, a map from that member's local
/// runs to one of its action indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Strategy {
    /// Member positions in the system.
    pub agents: Vec<usize>,
    pub maps: Vec<BTreeMap<LocalRun, usize>>,
}

impl Strategy {
    pub fn empty() -> Strategy {
        Strategy { agents: Vec::new(), maps: Vec::new() }
    }

    /// Action of member `k` at its local run `lr`.
    pub fn action(&self, k: usize, lr: &LocalRun) -> Option<usize> {
        let j = self.agents.iter().position(|&x| x == k)?;
        self.maps[j].get(lr).copied()
    }
}

/// Local runs of each member of `g` of length below `horizon`, in tree order.
fn local_runs(is: &InterpretedSystem, members: &[usize], horizon: usize) -> Result<Vec<Vec<LocalRun>>, OracleError> {
    if horizon == 0 {
        return Ok(alloc::vec![Vec::new(); members.len()]);
    }
    let tree = RunTree::build(is, horizon - 1)?;
    Ok(members
        .iter()
        .map(|&k| {
            let part = Partition::build(is, &tree, &[k]);
            (0..part.class_count() as u32).map(|c| is.project(&tree.run(part.class(c)[0]), &[k])).collect()
        })
        .collect())
}

fn product(widths: &[usize], keys: &[Vec<LocalRun>]) -> u128 {
    widths.iter().zip(keys).fold(1u128, |acc, (&w, ks)| (0..ks.len()).fold(acc, |x, _| x.saturating_mul(w as u128)))
}

/// Number of uniform strategies of `g` on local runs shorter than `horizon`.
pub fn count_strategies(is: &InterpretedSystem, g: &Coalition, horizon: usize) -> Result<u128, OracleError> {
    let members = is.resolve(g)?;
    let keys = local_runs(is, &members, horizon)?;
    let widths: Vec<usize> = members.iter().map(|&k| is.members()[k].actions.len()).collect();
    Ok(product(&widths, &keys))
}

/// Every uniform strategy of `g` restricted to local runs shorter than
/// `horizon`, refusing when there are more than `budget`.
pub fn enumerate_strategies(
    is: &InterpretedSystem,
    g: &Coalition,
    horizon: usize,
    budget: u64,
) -> Result<StrategyIter, OracleError> {
    let members = is.resolve(g)?;
    let keys = local_runs(is, &members, horizon)?;
    let widths: Vec<usize> = members.iter().map(|&k| is.members()[k].actions.len()).collect();
    let count = product(&widths, &keys);
    if count > budget as u128 {
        return Err(OracleError::BudgetExceeded { count, budget });
    }
    let digits = keys.iter().map(|ks| alloc::vec![0; ks.len()]).collect();
    Ok(StrategyIter { agents: members, keys, widths, digits: Some(digits) })
}

pub struct StrategyIter {
    agents: Vec<usize>,
    keys: Vec<Vec<LocalRun>>,
    widths: Vec<usize>,
    digits: Option<Vec<Vec<usize>>>,
}

impl Iterator for StrategyIter {
    type Item = Strategy;

    fn next(&mut self) -> Option<Strategy> {
        let digits = self.digits.as_mut()?;
        let maps = self
            .keys
            .iter()
            .zip(digits.iter())
            .map(|(ks, ds)| ks.iter().cloned().zip(ds.iter().copied()).collect())
            .collect();
        let out = Strategy { agents: self.agents.clone(), maps };
        let mut carry = true;
        for (j, ds) in digits.iter_mut().enumerate() {
            for d in ds.iter_mut() {
                *d += 1;
                if *d < self.widths[j] {
                    carry = false;
                    break;
                }
                *d = 0;
            }
            if !carry {
                break;
            }
        }
        if carry {
            self.digits = None;
        }
        Some(out)
    }
}

/// Extensions to length `horizon` of the runs in `runs` in which the
/// strategy's agents follow it from the end of the starting run on.
pub fn outcomes(
    is: &InterpretedSystem,
    runs: &[Run],
    s: &Strategy,
    horizon: usize,
) -> Result<BTreeSet<Run>, OracleError> {
    let mut out = BTreeSet::new();
    let mut stack: Vec<Run> = runs.to_vec();
    while let Some(r) = stack.pop() {
        if r.len() >= horizon {
            out.insert(r);
            continue;
        }
        let mut wanted = Vec::with_capacity(s.agents.len());
        for &k in &s.agents {
            let lr = is.project(&r, &[k]);
            let a = s
                .action(k, &lr)
                .ok_or_else(|| OracleError::MissingStrategyValue { agent: is.members()[k].name.to_string() })?;
            wanted.push(a);
        }
        for a in 0..is.action_count() as ActionId {
            if s.agents.iter().zip(&wanted).all(|(&k, &w)| is.action_component(a, k) == w) {
                stack.push(r.extended(a, is.successor(r.last(), a)?));
            }
        }
    }
    Ok(out)
}

/// Lazy strategy search over a run tree for one until objective. Only the
/// local runs met on outcomes from the starting class are assigned, so
/// strategies differing elsewhere are never told apart. The budget counts
/// the partial strategies that reach a leaf.
pub(crate) struct Search<'t> {
    tree: &'t RunTree,
    part: &'t Partition,
    agents: &'t [Rc<Partition>],
    widths: &'t [usize],
    phi: &'t [Verdict],
    psi: &'t [Verdict],
    q: Quantifier,
    budget: u64,
    leaves: u64,
    start: Vec<NodeId>,
    levels: Vec<(Vec<NodeId>, Vec<u32>)>,
    vals: Vec<Verdict>,
}

impl<'t> Search<'t> {
    #[allow(clippy::too_many_arguments)]
    pub(crate) fn new(
        tree: &'t RunTree,
        part: &'t Partition,
        agents: &'t [Rc<Partition>],
        widths: &'t [usize],
        phi: &'t [Verdict],
        psi: &'t [Verdict],
        q: Quantifier,
        budget: u64,
    ) -> Search<'t> {
        Search {
            tree,
            part,
            agents,
            widths,
            phi,
            psi,
            q,
            budget,
            leaves: 0,
            start: Vec::new(),
            levels: Vec::new(),
            vals: alloc::vec![Verdict::Unknown; tree.len()],
        }
    }

    /// The value at `n` if it does not depend on the strategy.
    fn determined(&self, n: NodeId) -> Option<Verdict> {
        let i = n as usize;
        let (phi, psi) = (self.phi[i], self.psi[i]);
        if psi == Verdict::True || phi == Verdict::False {
            Some(psi)
        } else if self.tree.depth(n) == self.tree.horizon() {
            Some(psi.or(phi.and(Verdict::Unknown)))
        } else {
            None
        }
    }

    /// Verdict for the class made of `start`.
    pub(crate) fn run(&mut self, start: &[NodeId]) -> Result<Verdict, OracleError> {
        self.leaves = 0;
        self.levels.clear();
        self.start = start.to_vec();
        let frontier = start.iter().copied().filter(|&n| self.determined(n).is_none()).collect();
        self.explore(frontier)
    }

    fn explore(&mut self, frontier: Vec<NodeId>) -> Result<Verdict, OracleError> {
        if frontier.is_empty() {
            return self.leaf();
        }
        let mut vars: BTreeMap<(usize, u32), usize> = BTreeMap::new();
        let mut var_width = Vec::new();
        let node_vars: Vec<Vec<usize>> = frontier
            .iter()
            .map(|&n| {
                (0..self.agents.len())
                    .map(|j| {
                        let key = (j, self.agents[j].class_of(n));
                        *vars.entry(key).or_insert_with(|| {
                            var_width.push(self.widths[j]);
                            var_width.len() - 1
                        })
                    })
                    .collect()
            })
            .collect();
        let mut choice = alloc::vec![0usize; var_width.len()];
        let mut best = self.q.outer_unit();
        let mut frontier = frontier;
        loop {
            let gammas: Vec<u32> = node_vars
                .iter()
                .map(|vs| vs.iter().enumerate().fold(0usize, |acc, (j, &v)| acc * self.widths[j] + choice[v]) as u32)
                .collect();
            let mut next = Vec::new();
            for (i, &n) in frontier.iter().enumerate() {
                for &a in &self.part.actions_by_gamma[gammas[i] as usize] {
                    let c = self.tree.child(n, a);
                    if self.determined(c).is_none() {
                        next.push(c);
                    }
                }
            }
            self.levels.push((frontier, gammas));
            let v = self.explore(next);
            frontier = self.levels.pop().expect("pushed above").0;
            best = self.q.outer(best, v?);
            if best == self.q.outer_unit().not() {
                break;
            }
            if !increment(&mut choice, &var_width) {
                break;
            }
        }
        Ok(best)
    }

    fn leaf(&mut self) -> Result<Verdict, OracleError> {
        self.leaves += 1;
        if self.leaves > self.budget {
            return Err(OracleError::BudgetExceeded { count: self.leaves as u128, budget: self.budget });
        }
        for l in (0..self.levels.len()).rev() {
            for i in 0..self.levels[l].0.len() {
                let n = self.levels[l].0[i];
                let g = self.levels[l].1[i] as usize;
                let mut acc = self.q.inner_unit();
                for &a in &self.part.actions_by_gamma[g] {
                    let c = self.tree.child(n, a);
                    let v = self.determined(c).unwrap_or(self.vals[c as usize]);
                    acc = self.q.inner(acc, v);
                }
                let k = n as usize;
                self.vals[k] = self.psi[k].or(self.phi[k].and(acc));
            }
        }
        Ok(self
            .start
            .iter()
            .map(|&n| self.determined(n).unwrap_or(self.vals[n as usize]))
            .fold(self.q.inner_unit(), |a, b| self.q.inner(a, b)))
    }
}

fn increment(digits: &mut [usize], widths: &[usize]) -> bool {
    for (d, &w) in digits.iter_mut().zip(widths) {
        *d += 1;
        if *d < w {
            return true;
        }
        *d = 0;
    }
    false
}
