use alloc::collections::BTreeMap;
use alloc::rc::Rc;
use alloc::string::ToString;
use alloc::vec::Vec;

use super::strategy::{Quantifier, Search};
use super::tree::{NodeId, Partition, RunTree};
use super::{OracleError, Verdict, DEFAULT_STRATEGY_BUDGET};
use crate::formula::{Coalition, Formula, Prop};
use crate::system::{InterpretedSystem, Run, SystemError};

/// How `<<Γ>> (φ U ψ)` is decided.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UntilMode {
    /// Backward fixpoint when both arguments are `K_Γ`-guarded, strategy
    /// search otherwise.
    Auto,
    /// Always search uniform strategies.
    Strategies,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct EvalConfig {
    pub until: UntilMode,
    pub strategy_budget: u64,
}

impl Default for EvalConfig {
    fn default() -> Self {
        EvalConfig { until: UntilMode::Auto, strategy_budget: DEFAULT_STRATEGY_BUDGET }
    }
}

type Values = Rc<[Verdict]>;

/// Evaluates formulas at every run of a system up to a fixed horizon.
/// Results are cached per subformula.
///
/// Atoms may be overridden per run with [`Evaluator::set_overlay`], which is
/// how fresh atoms are given run-dependent values without unravelling the
/// system.
pub struct Evaluator<'a> {
    is: &'a InterpretedSystem,
    tree: RunTree,
    config: EvalConfig,
    partitions: BTreeMap<Vec<usize>, Rc<Partition>>,
    overlay: BTreeMap<Prop, Values>,
    cache: BTreeMap<Formula, Values>,
}

impl<'a> Evaluator<'a> {
    pub fn new(is: &'a InterpretedSystem, horizon: usize) -> Result<Evaluator<'a>, OracleError> {
        Evaluator::with_config(is, horizon, EvalConfig::default())
    }

    pub fn with_config(
        is: &'a InterpretedSystem,
        horizon: usize,
        config: EvalConfig,
    ) -> Result<Evaluator<'a>, OracleError> {
        Ok(Evaluator {
            is,
            tree: RunTree::build(is, horizon)?,
            config,
            partitions: BTreeMap::new(),
            overlay: BTreeMap::new(),
            cache: BTreeMap::new(),
        })
    }

    pub fn system(&self) -> &'a InterpretedSystem {
        self.is
    }

    pub fn tree(&self) -> &RunTree {
        &self.tree
    }

    pub fn horizon(&self) -> usize {
        self.tree.horizon()
    }

    pub fn config(&self) -> EvalConfig {
        self.config
    }

    pub fn set_config(&mut self, config: EvalConfig) {
        if config != self.config {
            self.cache.clear();
        }
        self.config = config;
    }

    /// Gives `p` the value `values[n]` at run node `n`, shadowing the
    /// system's valuation.
    pub fn set_overlay(&mut self, p: Prop, values: Vec<Verdict>) {
        assert_eq!(values.len(), self.tree.len(), "one value per run");
        self.overlay.insert(p, values.into());
        self.cache.clear();
    }

    pub fn clear_overlay(&mut self) {
        self.overlay.clear();
        self.cache.clear();
    }

    pub fn node(&self, r: &Run) -> Result<NodeId, OracleError> {
        if r.len() > self.horizon() {
            return Err(OracleError::HorizonTooSmall { length: r.len(), horizon: self.horizon() });
        }
        self.tree.find(r).ok_or(OracleError::InvalidRun)
    }

    pub fn at(&mut self, f: &Formula, r: &Run) -> Result<Verdict, OracleError> {
        let n = self.node(r)?;
        Ok(self.eval(f)?[n as usize])
    }

    pub fn sat_at_initial(&mut self, f: &Formula) -> Result<Verdict, OracleError> {
        let v = self.eval(f)?;
        Ok(self.tree.roots().map(|n| v[n as usize]).fold(Verdict::False, Verdict::or))
    }

    pub fn members(&self, g: &Coalition) -> Result<Vec<usize>, OracleError> {
        self.is.resolve(g).map_err(|e| match e {
            SystemError::UnknownAgent(a) => OracleError::System(SystemError::UnknownAgent(a)),
            other => OracleError::System(other),
        })
    }

    pub fn partition(&mut self, members: &[usize]) -> Rc<Partition> {
        if let Some(p) = self.partitions.get(members) {
            return p.clone();
        }
        let p = Rc::new(Partition::build(self.is, &self.tree, members));
        self.partitions.insert(members.to_vec(), p.clone());
        p
    }

    /// Verdicts of `f` at every run node.
    pub fn eval(&mut self, f: &Formula) -> Result<Values, OracleError> {
        if let Some(v) = self.cache.get(f) {
            return Ok(v.clone());
        }
        let out: Values = match f {
            Formula::False => alloc::vec![Verdict::False; self.tree.len()].into(),
            Formula::Atom(p) => match self.overlay.get(p) {
                Some(v) => v.clone(),
                None => (0..self.tree.len() as NodeId)
                    .map(|n| Verdict::from_bool(self.is.holds_atom(p, self.tree.state(n))))
                    .collect(),
            },
            Formula::Implies(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                x.iter().zip(y.iter()).map(|(p, q)| p.implies(*q)).collect()
            }
            Formula::DKnows(g, a) => {
                let body = self.eval(a)?;
                let part = self.partition(&self.members(g)?);
                knows(&part, &body).into()
            }
            Formula::CoopNext(g, a) => {
                let body = self.eval(a)?;
                let part = self.partition(&self.members(g)?);
                self.coop_next(&part, &body).into()
            }
            Formula::ExistsNext(a) => {
                let body = self.eval(a)?;
                self.exists_next(&body).into()
            }
            Formula::ExistsUntil(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                self.path_until(&x, &y, false).into()
            }
            Formula::ForallUntil(a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                self.path_until(&x, &y, true).into()
            }
            Formula::CoopUntil(g, a, b) => match (self.config.until, f.as_guarded_until()) {
                (UntilMode::Auto, Some((g, phi, psi))) => {
                    let (g, phi, psi) = (g.clone(), phi.clone(), psi.clone());
                    self.lfp_until(&g, &phi, &psi, false)?
                }
                _ => {
                    let (x, y) = (self.eval(a)?, self.eval(b)?);
                    self.until_by_strategies(g, &x, &y, Quantifier::Exists)?.into()
                }
            },
            Formula::DualCoopUntil(g, a, b) => {
                let (x, y) = (self.eval(a)?, self.eval(b)?);
                self.until_by_strategies(g, &x, &y, Quantifier::Forall)?.into()
            }
        };
        self.cache.insert(f.clone(), out.clone());
        Ok(out)
    }

    fn exists_next(&self, body: &[Verdict]) -> Vec<Verdict> {
        let h = self.horizon();
        (0..self.tree.len() as NodeId)
            .map(|n| {
                if self.tree.depth(n) == h {
                    Verdict::Unknown
                } else {
                    (0..self.tree.n_actions() as u32)
                        .map(|a| body[self.tree.child(n, a) as usize])
                        .fold(Verdict::False, Verdict::or)
                }
            })
            .collect()
    }

    /// `E (φ U ψ)` or, with `all`, `A (φ U ψ)`.
    fn path_until(&self, phi: &[Verdict], psi: &[Verdict], all: bool) -> Vec<Verdict> {
        let h = self.horizon();
        let mut out = alloc::vec![Verdict::Unknown; self.tree.len()];
        for d in (0..=h).rev() {
            for n in self.tree.level(d) {
                let i = n as usize;
                let next = if d == h {
                    Verdict::Unknown
                } else {
                    let children = (0..self.tree.n_actions() as u32).map(|a| out[self.tree.child(n, a) as usize]);
                    if all {
                        children.fold(Verdict::True, Verdict::and)
                    } else {
                        children.fold(Verdict::False, Verdict::or)
                    }
                };
                out[i] = psi[i].or(phi[i].and(next));
            }
        }
        out
    }

    /// For each Γ-action vector, the conjunction of `body` over every
    /// one-step extension of every run in the class under that vector;
    /// `<<Γ>> X` holds if some vector works.
    fn coop_next(&self, part: &Partition, body: &[Verdict]) -> Vec<Verdict> {
        let h = self.horizon();
        let mut out = alloc::vec![Verdict::Unknown; self.tree.len()];
        let mut acc = alloc::vec![Verdict::True; part.gamma_count()];
        for d in 0..h {
            for c in part.classes_at(d) {
                acc.iter_mut().for_each(|v| *v = Verdict::True);
                for &n in part.class(c) {
                    for a in 0..self.tree.n_actions() as u32 {
                        let g = part.gamma_of_action[a as usize] as usize;
                        acc[g] = acc[g].and(body[self.tree.child(n, a) as usize]);
                    }
                }
                let v = acc.iter().copied().fold(Verdict::False, Verdict::or);
                for &n in part.class(c) {
                    out[n as usize] = v;
                }
            }
        }
        out
    }

    /// Fixpoint for `<<Γ>> (K_Γ φ U K_Γ ψ)`. With `strict`, an undecided
    /// `φ` or `ψ` anywhere is an error.
    pub fn lfp_until(
        &mut self,
        g: &Coalition,
        phi: &Formula,
        psi: &Formula,
        strict: bool,
    ) -> Result<Values, OracleError> {
        if strict {
            for f in [phi, psi] {
                if self.eval(f)?.iter().any(|v| !v.is_decided()) {
                    return Err(OracleError::InnerUnknown { formula: f.to_string() });
                }
            }
        }
        let kphi = self.eval(&Formula::knows(g.clone(), phi.clone()))?;
        let kpsi = self.eval(&Formula::knows(g.clone(), psi.clone()))?;
        let part = self.partition(&self.members(g)?);
        Ok(self.lfp_from(&part, &kphi, &kpsi).into())
    }

    pub(crate) fn lfp_from(&self, part: &Partition, kphi: &[Verdict], kpsi: &[Verdict]) -> Vec<Verdict> {
        let h = self.horizon();
        let mut x = alloc::vec![Verdict::Unknown; self.tree.len()];
        for n in self.tree.level(h) {
            let i = n as usize;
            x[i] = kpsi[i].or(kphi[i].and(Verdict::Unknown));
        }
        let mut acc = alloc::vec![Verdict::True; part.gamma_count()];
        for d in (0..h).rev() {
            for c in part.classes_at(d) {
                acc.iter_mut().for_each(|v| *v = Verdict::True);
                for &n in part.class(c) {
                    for a in 0..self.tree.n_actions() as u32 {
                        let g = part.gamma_of_action[a as usize] as usize;
                        acc[g] = acc[g].and(x[self.tree.child(n, a) as usize]);
                    }
                }
                let step = acc.iter().copied().fold(Verdict::False, Verdict::or);
                for &n in part.class(c) {
                    let i = n as usize;
                    x[i] = kpsi[i].or(kphi[i].and(step));
                }
            }
        }
        x
    }

    /// `<<Γ>> (φ U ψ)` (with [`Quantifier::Exists`]) or `[[Γ]] (φ U ψ)` by
    /// searching uniform strategies from every Γ-class, given the verdicts
    /// of `φ` and `ψ`.
    pub fn until_by_strategies(
        &mut self,
        g: &Coalition,
        phi: &[Verdict],
        psi: &[Verdict],
        q: Quantifier,
    ) -> Result<Vec<Verdict>, OracleError> {
        let members = self.members(g)?;
        let part = self.partition(&members);
        let agents: Vec<Rc<Partition>> = members.iter().map(|&k| self.partition(&[k])).collect();
        let widths: Vec<usize> = members.iter().map(|&k| self.is.members()[k].actions.len()).collect();
        let mut search = Search::new(&self.tree, &part, &agents, &widths, phi, psi, q, self.config.strategy_budget);
        let mut out = alloc::vec![Verdict::Unknown; self.tree.len()];
        for c in 0..part.class_count() as u32 {
            let v = search.run(part.class(c))?;
            for &n in part.class(c) {
                out[n as usize] = v;
            }
        }
        Ok(out)
    }
}

fn knows(part: &Partition, body: &[Verdict]) -> Vec<Verdict> {
    let mut out = alloc::vec![Verdict::Unknown; body.len()];
    for c in 0..part.class_count() as u32 {
        let v = part.class(c).iter().map(|&n| body[n as usize]).fold(Verdict::True, Verdict::and);
        for &n in part.class(c) {
            out[n as usize] = v;
        }
    }
    out
}
