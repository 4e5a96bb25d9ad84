//! Rewriting subset formulas into CTL with distributed knowledge.
//!
//! Cooperation modalities are removed in two phases. Guarded until
//! objectives `<<Γ>> (K_Γ φ U K_Γ ψ)` are replaced by fresh atoms `p` with
//! fixpoint constraints. This introduces `<<Γ>> X` occurrences, which the
//! second phase replaces by knowledge of a one-step outcome under dedicated
//! action atoms. The result ends with a single conjunct asserting that every
//! vector of action atoms labels some successor.
//!
//! Under complete information `[[Γ]] (φ U ψ)` is also eliminated, before the
//! second phase.

use alloc::collections::BTreeSet;
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use crate::formula::{Agent, Coalition, Formula, Fragment, Prop};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Mode {
    Incomplete,
    Complete,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Incomplete => "incomplete",
            Mode::Complete => "complete",
        })
    }
}

impl core::str::FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Mode, String> {
        match s {
            "incomplete" => Ok(Mode::Incomplete),
            "complete" => Ok(Mode::Complete),
            _ => Err(format!("unknown mode `{s}`")),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum TranslateError {
    #[error("{fragment} formula is outside the translatable subset for {mode} information; offending subformula `{offending}`")]
    Unsupported { fragment: Fragment, mode: Mode, offending: Formula },
    #[error("`{0}` is not an eliminable subformula here")]
    NotATarget(Formula),
    #[error("`{0}` can only be eliminated under complete information")]
    ModeMismatch(Formula),
    #[error("agent `{0}` has an empty action set")]
    EmptyActionSet(Agent),
}

/// What a generated atom stands for.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Role {
    /// Replaces an eliminated until objective.
    P,
    /// Marks runs on the way to the objective's witness.
    Q,
    /// Dedicated action of a coalition member.
    Action(Agent),
    /// Dedicated foiling action of the environment.
    EnvAction,
    /// Initial placeholder action.
    Nop(Agent),
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Role::P => f.write_str("p"),
            Role::Q => f.write_str("q"),
            Role::Action(a) => write!(f, "action {a}"),
            Role::EnvAction => f.write_str("action e"),
            Role::Nop(a) => write!(f, "nop {a}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DictEntry {
    pub atom: Prop,
    pub role: Role,
    /// The subformula whose elimination introduced the atom.
    pub origin: Option<Formula>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Rule {
    Until,
    DualUntil,
    Next,
}

impl fmt::Display for Rule {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Rule::Until => "until",
            Rule::DualUntil => "dual-until",
            Rule::Next => "next",
        })
    }
}

/// One rewrite: the eliminated subformula, its replacement, the atoms it
/// allocated and the conjuncts it emitted.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TraceStep {
    pub rule: Rule,
    pub target: Formula,
    pub replacement: Formula,
    pub fresh: Vec<Prop>,
    pub conjuncts: Vec<Formula>,
}

/// Name allocation and action bookkeeping shared by all rewrite steps of one
/// translation.
#[derive(Debug, Clone)]
pub struct TranslationContext {
    mode: Mode,
    counter: u32,
    used: BTreeSet<Prop>,
    agents: Vec<Agent>,
    act_sets: Vec<Vec<Prop>>,
    env_acts: Vec<Prop>,
    log: Vec<DictEntry>,
    trace: Vec<TraceStep>,
}

impl TranslationContext {
    /// `reserved` are atoms the generated names must avoid, normally the
    /// props of the input.
    pub fn new(mode: Mode, agents: impl IntoIterator<Item = Agent>, reserved: &BTreeSet<Prop>) -> TranslationContext {
        let mut ctx = TranslationContext {
            mode,
            counter: 0,
            used: reserved.clone(),
            agents: Vec::new(),
            act_sets: Vec::new(),
            env_acts: Vec::new(),
            log: Vec::new(),
            trace: Vec::new(),
        };
        let env = ctx.nop(&Agent::environment());
        ctx.env_acts.push(env);
        for a in agents {
            ctx.ensure_agent(&a);
        }
        ctx
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn agents(&self) -> &[Agent] {
        &self.agents
    }

    /// Action atoms per agent, then the environment's, in allocation order.
    pub fn act_sets(&self) -> Vec<(Agent, Vec<Prop>)> {
        let mut out: Vec<(Agent, Vec<Prop>)> = self.agents.iter().cloned().zip(self.act_sets.iter().cloned()).collect();
        out.push((Agent::environment(), self.env_acts.clone()));
        out
    }

    pub fn dictionary(&self) -> &[DictEntry] {
        &self.log
    }

    pub fn trace(&self) -> &[TraceStep] {
        &self.trace
    }

    fn nop(&mut self, a: &Agent) -> Prop {
        let mut name = Prop::new(format!("_nop_{a}"));
        let mut k = 0;
        while self.used.contains(&name) {
            name = Prop::new(format!("_nop_{a}_{k}"));
            k += 1;
        }
        self.used.insert(name.clone());
        self.log.push(DictEntry { atom: name.clone(), role: Role::Nop(a.clone()), origin: None });
        name
    }

    fn ensure_agent(&mut self, a: &Agent) {
        if let Err(pos) = self.agents.binary_search(a) {
            let nop = self.nop(a);
            self.agents.insert(pos, a.clone());
            self.act_sets.insert(pos, alloc::vec![nop]);
        }
    }

    /// Allocates one name per template (`{}` stands for the counter), all
    /// with the same counter value.
    fn fresh(&mut self, templates: &[String]) -> Vec<Prop> {
        loop {
            let k = self.counter;
            self.counter += 1;
            let names: Vec<Prop> = templates.iter().map(|t| Prop::new(t.replace("{}", &k.to_string()))).collect();
            if names.iter().all(|n| !self.used.contains(n)) {
                self.used.extend(names.iter().cloned());
                return names;
            }
        }
    }

    fn fresh_pq(&mut self, origin: &Formula) -> (Prop, Prop) {
        let names = self.fresh(&[String::from("_p{}"), String::from("_q{}")]);
        let (p, q) = (names[0].clone(), names[1].clone());
        self.log.push(DictEntry { atom: p.clone(), role: Role::P, origin: Some(origin.clone()) });
        self.log.push(DictEntry { atom: q.clone(), role: Role::Q, origin: Some(origin.clone()) });
        (p, q)
    }

    /// `K{} A G A(Act_1, …, Act_N, Act_e)` over the current action sets.
    pub fn a_constraint(&self) -> Result<Formula, TranslateError> {
        Ok(always_everywhere(build_a(&self.act_sets())?))
    }

    /// Replacement atom and the three constraints for a guarded until.
    pub fn until_step(&mut self, target: &Formula) -> Result<(Formula, Vec<Formula>), TranslateError> {
        let (g, _, _) = target.as_guarded_until().ok_or_else(|| TranslateError::NotATarget(target.clone()))?;
        let (kphi, kpsi) = match target {
            Formula::CoopUntil(_, a, b) => ((**a).clone(), (**b).clone()),
            _ => unreachable!("guarded until is a cooperative until"),
        };
        let g = g.clone();
        for a in g.members() {
            self.ensure_agent(a);
        }
        let (p, q) = self.fresh_pq(target);
        let conjuncts = fixpoint_constraints(
            &Formula::prop(&p),
            &Formula::prop(&q),
            &kphi,
            &kpsi,
            |x| Formula::coop_next(g.clone(), x),
            always_everywhere,
        );
        self.record(Rule::Until, target, Formula::prop(&p), alloc::vec![p.clone(), q], &conjuncts);
        Ok((Formula::prop(&p), conjuncts))
    }

    /// Replacement atom and the three constraints for `[[Γ]] (φ U ψ)` under
    /// complete information.
    pub fn dual_until_step(&mut self, target: &Formula) -> Result<(Formula, Vec<Formula>), TranslateError> {
        let Formula::DualCoopUntil(g, phi, psi) = target else {
            return Err(TranslateError::NotATarget(target.clone()));
        };
        if self.mode != Mode::Complete {
            return Err(TranslateError::ModeMismatch(target.clone()));
        }
        for a in g.members() {
            self.ensure_agent(a);
        }
        let (p, q) = self.fresh_pq(target);
        let conjuncts = fixpoint_constraints(
            &Formula::prop(&p),
            &Formula::prop(&q),
            phi,
            psi,
            |x| Formula::dual_next(g.clone(), x),
            Formula::forall_always,
        );
        self.record(Rule::DualUntil, target, Formula::prop(&p), alloc::vec![p.clone(), q], &conjuncts);
        Ok((Formula::prop(&p), conjuncts))
    }

    /// Replacement `K_Γ A X (⋀ a_i → φ)` and the foiling constraint for
    /// `<<Γ>> X φ`. Extends the action sets of Γ and of the environment.
    pub fn next_step(&mut self, target: &Formula) -> Result<(Formula, Formula), TranslateError> {
        let Formula::CoopNext(g, phi) = target else {
            return Err(TranslateError::NotATarget(target.clone()));
        };
        if phi.has_cooperation() {
            return Err(TranslateError::NotATarget(target.clone()));
        }
        for a in g.members() {
            self.ensure_agent(a);
        }
        let hash = fnv1a32(g.to_string().as_bytes());
        let mut templates: Vec<String> = g.members().iter().map(|a| format!("_act_{hash:08x}_{a}_{{}}")).collect();
        templates.push(format!("_act_{hash:08x}_e_{{}}"));
        let names = self.fresh(&templates);
        for (a, name) in g.members().iter().zip(&names) {
            let pos = self.agents.binary_search(a).expect("agent registered above");
            self.act_sets[pos].push(name.clone());
            self.log.push(DictEntry {
                atom: name.clone(),
                role: Role::Action(a.clone()),
                origin: Some(target.clone()),
            });
        }
        let env = names.last().expect("environment atom").clone();
        self.env_acts.push(env.clone());
        self.log.push(DictEntry { atom: env.clone(), role: Role::EnvAction, origin: Some(target.clone()) });

        let own = Formula::conj(names[..g.len()].iter().map(Formula::prop));
        let replacement = Formula::knows(g.clone(), Formula::forall_next(Formula::implies(own, (**phi).clone())));
        let foil = always_everywhere(Formula::or(
            replacement.clone(),
            Formula::possible(
                g.clone(),
                Formula::forall_next(Formula::implies(Formula::prop(&env), Formula::not((**phi).clone()))),
            ),
        ));
        self.record(Rule::Next, target, replacement.clone(), names, core::slice::from_ref(&foil));
        Ok((replacement, foil))
    }

    fn record(&mut self, rule: Rule, target: &Formula, replacement: Formula, fresh: Vec<Prop>, conjuncts: &[Formula]) {
        self.trace.push(TraceStep { rule, target: target.clone(), replacement, fresh, conjuncts: conjuncts.to_vec() });
    }
}

/// `K{} A G φ`
fn always_everywhere(f: Formula) -> Formula {
    Formula::knows(Coalition::empty(), Formula::forall_always(f))
}

/// The three conjuncts shared by both until eliminations, with `next` the
/// one-step modality and `wrap` the outer box.
fn fixpoint_constraints(
    p: &Formula,
    q: &Formula,
    phi: &Formula,
    psi: &Formula,
    next: impl Fn(Formula) -> Formula,
    wrap: impl Fn(Formula) -> Formula,
) -> Vec<Formula> {
    let step = |x: Formula| Formula::or(psi.clone(), Formula::and(phi.clone(), x));
    alloc::vec![
        wrap(Formula::implies(Formula::or(p.clone(), q.clone()), step(next(q.clone())))),
        wrap(Formula::iff(p.clone(), step(next(p.clone())))),
        wrap(Formula::implies(
            p.clone(),
            step(Formula::forall_next(Formula::forall_until(
                Formula::implies(q.clone(), phi.clone()),
                Formula::implies(q.clone(), psi.clone()),
            ))),
        )),
    ]
}

pub fn fnv1a32(bytes: &[u8]) -> u32 {
    bytes.iter().fold(0x811c_9dc5u32, |h, &b| (h ^ b as u32).wrapping_mul(0x0100_0193))
}

/// `⋀ E X (a_1 ∧ … ∧ a_N ∧ a_e)` over every vector of action atoms, the first
/// agent varying slowest.
pub fn build_a(act_sets: &[(Agent, Vec<Prop>)]) -> Result<Formula, TranslateError> {
    if let Some((a, _)) = act_sets.iter().find(|(_, s)| s.is_empty()) {
        return Err(TranslateError::EmptyActionSet(a.clone()));
    }
    let mut vectors: Vec<Vec<&Prop>> = alloc::vec![Vec::new()];
    for (_, set) in act_sets {
        vectors = vectors
            .into_iter()
            .flat_map(|v| {
                set.iter().map(move |a| {
                    let mut w = v.clone();
                    w.push(a);
                    w
                })
            })
            .collect();
    }
    Ok(Formula::conj(
        vectors.into_iter().map(|v| Formula::exists_next(Formula::conj(v.into_iter().map(Formula::prop)))),
    ))
}

/// `[p/target]χ ∧ constraints` for a guarded until.
pub fn eliminate_until(
    chi: &Formula,
    target: &Formula,
    ctx: &mut TranslationContext,
) -> Result<Formula, TranslateError> {
    let (p, cs) = ctx.until_step(target)?;
    Ok(Formula::conj(core::iter::once(chi.replace(target, &p)).chain(cs)))
}

/// `[p/target]χ ∧ constraints` for `[[Γ]] (φ U ψ)` under complete information.
pub fn eliminate_until_complete(
    chi: &Formula,
    target: &Formula,
    ctx: &mut TranslationContext,
) -> Result<Formula, TranslateError> {
    let (p, cs) = ctx.dual_until_step(target)?;
    Ok(Formula::conj(core::iter::once(chi.replace(target, &p)).chain(cs)))
}

/// `[replacement/target]χ ∧ foil ∧ K{} A G A(...)` with the extended action sets.
pub fn eliminate_next(
    chi: &Formula,
    target: &Formula,
    ctx: &mut TranslationContext,
) -> Result<Formula, TranslateError> {
    let (r, foil) = ctx.next_step(target)?;
    Ok(Formula::conj([chi.replace(target, &r), foil, ctx.a_constraint()?]))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TranslationResult {
    /// The rewritten input conjoined with every constraint.
    pub formula: Formula,
    /// The input after substitution.
    pub chi: Formula,
    /// Side conjuncts in emission order; the last one is the action constraint.
    pub constraints: Vec<Formula>,
    pub act_sets: Vec<(Agent, Vec<Prop>)>,
    pub dictionary: Vec<DictEntry>,
    pub trace: Vec<TraceStep>,
    pub mode: Mode,
}

impl TranslationResult {
    /// What the translation preserves.
    pub fn guarantee(&self) -> &'static str {
        match self.mode {
            Mode::Incomplete => "satisfiability-preserving forward; model-extraction certified backward",
            Mode::Complete => {
                "satisfiability-preserving forward; until steps equisatisfiable under complete information"
            }
        }
    }

    /// Atoms introduced by the translation.
    pub fn fresh_atoms(&self) -> Vec<&Prop> {
        self.dictionary.iter().map(|d| &d.atom).collect()
    }
}

/// First subformula keeping `f` out of what `mode` can translate.
pub fn translation_violation(f: &Formula, mode: Mode) -> Option<&Formula> {
    if !f.has_cooperation() {
        return None;
    }
    match mode {
        Mode::Incomplete => f.subset_violation(),
        Mode::Complete => complete_violation(f),
    }
}

fn complete_violation(f: &Formula) -> Option<&Formula> {
    match f {
        Formula::ExistsNext(..) | Formula::ExistsUntil(..) | Formula::ForallUntil(..) => return Some(f),
        Formula::CoopUntil(..) if f.as_guarded_until().is_none() => return Some(f),
        _ => {}
    }
    f.children().into_iter().find_map(complete_violation)
}

/// Innermost (post-order first) subformula satisfying `pred`.
fn innermost<'a>(f: &'a Formula, pred: &impl Fn(&Formula) -> bool) -> Option<&'a Formula> {
    f.children().into_iter().find_map(|c| innermost(c, pred)).or_else(|| pred(f).then_some(f))
}

fn is_until_target(f: &Formula, mode: Mode) -> bool {
    f.as_guarded_until().is_some() || (mode == Mode::Complete && matches!(f, Formula::DualCoopUntil(..)))
}

fn is_next_target(f: &Formula) -> bool {
    matches!(f, Formula::CoopNext(_, a) if !a.has_cooperation())
}

/// Translates with the agents mentioned in `f` plus `extra_agents`.
pub fn translate_with(
    f: &Formula,
    mode: Mode,
    extra_agents: impl IntoIterator<Item = Agent>,
) -> Result<TranslationResult, TranslateError> {
    if let Some(bad) = translation_violation(f, mode) {
        return Err(TranslateError::Unsupported { fragment: f.classify(), mode, offending: bad.clone() });
    }
    let agents: BTreeSet<Agent> = f.agents().into_iter().chain(extra_agents).collect();
    let mut ctx = TranslationContext::new(mode, agents, &f.props());
    let mut chi = f.clone();
    let mut constraints: Vec<Formula> = Vec::new();

    while let Some(t) = innermost(&chi, &|x| is_until_target(x, mode)).cloned() {
        let (p, cs) = match t {
            Formula::DualCoopUntil(..) => ctx.dual_until_step(&t)?,
            _ => ctx.until_step(&t)?,
        };
        chi = chi.replace(&t, &p);
        constraints.extend(cs);
    }

    loop {
        let target =
            core::iter::once(&chi).chain(constraints.iter()).find_map(|c| innermost(c, &is_next_target)).cloned();
        let Some(t) = target else { break };
        let (r, foil) = ctx.next_step(&t)?;
        chi = chi.replace(&t, &r);
        for c in constraints.iter_mut() {
            *c = c.replace(&t, &r);
        }
        constraints.push(foil);
    }

    constraints.push(ctx.a_constraint()?);
    let formula = Formula::conj(core::iter::once(chi.clone()).chain(constraints.iter().cloned()));
    Ok(TranslationResult {
        formula,
        chi,
        constraints,
        act_sets: ctx.act_sets(),
        dictionary: ctx.log,
        trace: ctx.trace,
        mode,
    })
}

pub fn translate(f: &Formula, mode: Mode) -> Result<TranslationResult, TranslateError> {
    translate_with(f, mode, core::iter::empty())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::parse;

    fn g(names: &[&str]) -> Coalition {
        Coalition::of(names).unwrap()
    }

    fn ctx(mode: Mode, agents: &[&str]) -> TranslationContext {
        TranslationContext::new(mode, agents.iter().map(|a| Agent::new(*a).unwrap()), &BTreeSet::new())
    }

    #[test]
    fn until_elimination_has_the_three_constraints_in_order() {
        let target = parse("<<1>> (K{1} u U K{1} v)").unwrap();
        let mut c = ctx(Mode::Incomplete, &["1"]);
        let out = eliminate_until(&target, &target, &mut c).unwrap();
        let expected = parse_lenient(
            "_p0 \
             & K{} A G (_p0 | _q0 -> K{1} v | K{1} u & <<1>> X _q0) \
             & K{} A G (_p0 <-> K{1} v | K{1} u & <<1>> X _p0) \
             & K{} A G (_p0 -> K{1} v | K{1} u & A X A ((_q0 -> K{1} u) U (_q0 -> K{1} v)))",
        );
        assert_eq!(out, expected);
    }

    #[test]
    fn repeated_target_shares_one_atom() {
        let f = parse("<<1>> (K{1} u U K{1} v) & K{2} <<1>> (K{1} u U K{1} v)").unwrap();
        let r = translate(&f, Mode::Incomplete).unwrap();
        assert_eq!(r.trace.iter().filter(|s| s.rule == Rule::Until).count(), 1);
        assert_eq!(r.chi.props().iter().filter(|p| p.as_str().starts_with("_p")).count(), 1);
    }

    #[test]
    fn next_elimination_adds_agent_and_environment_actions() {
        let target = parse("<<1>> X p").unwrap();
        let mut c = ctx(Mode::Incomplete, &["1", "2"]);
        let (r, _) = c.next_step(&target).unwrap();
        let sets = c.act_sets();
        assert_eq!(sets.len(), 3);
        assert_eq!(sets[0].1.len(), 2);
        assert_eq!(sets[1].1, [Prop::new("_nop_2")]);
        assert_eq!(sets[2].1.len(), 2);
        let a1 = &sets[0].1[1];
        let h = fnv1a32(b"1");
        assert_eq!(a1.as_str(), format!("_act_{h:08x}_1_0"));
        assert_eq!(sets[2].1[1].as_str(), format!("_act_{h:08x}_e_0"));
        assert_eq!(
            r,
            Formula::knows(g(&["1"]), Formula::forall_next(Formula::implies(Formula::prop(a1), Formula::atom("p"))))
        );
        let a = build_a(&sets).unwrap();
        assert_eq!(a.size(), build_a(&sets).unwrap().size());
    }

    #[test]
    fn empty_coalition_next_uses_true_guard() {
        let target = parse("<<>> X p").unwrap();
        let mut c = ctx(Mode::Incomplete, &[]);
        let (r, _) = c.next_step(&target).unwrap();
        assert_eq!(r, parse("K{} A X (true -> p)").unwrap());
        assert_eq!(c.act_sets()[0].1.len(), 2);
    }

    #[test]
    fn action_constraint_counts_vectors() {
        let s = |names: &[&str]| names.iter().map(|n| Prop::new(*n)).collect::<Vec<_>>();
        let sets = alloc::vec![
            (Agent::new("1").unwrap(), s(&["a", "b"])),
            (Agent::new("2").unwrap(), s(&["c"])),
            (Agent::environment(), s(&["d", "f"])),
        ];
        let a = build_a(&sets).unwrap();
        assert_eq!(a, parse("E X (a & c & d) & E X (a & c & f) & E X (b & c & d) & E X (b & c & f)").unwrap());
        assert!(!a.has_cooperation());
        let single = alloc::vec![(Agent::environment(), s(&["d"]))];
        assert_eq!(build_a(&single).unwrap(), parse("E X d").unwrap());
        let empty = alloc::vec![(Agent::environment(), Vec::new())];
        assert!(build_a(&empty).is_err());
    }

    #[test]
    fn ctl_input_only_gains_the_action_constraint() {
        let f = parse("K{1} E F p").unwrap();
        let r = translate(&f, Mode::Incomplete).unwrap();
        assert_eq!(r.constraints.len(), 1);
        assert_eq!(r.formula, Formula::and(f, parse_lenient("K{} A G E X (_nop_1 & _nop_e)")));
        assert!(r.trace.is_empty());
    }

    fn parse_lenient(s: &str) -> Formula {
        crate::parse_lenient(s).unwrap()
    }

    #[test]
    fn guarded_until_goes_through_both_phases() {
        let f = parse("<<1>> (K{1} u U K{1} v)").unwrap();
        let r = translate(&f, Mode::Incomplete).unwrap();
        assert_eq!(r.formula.classify(), Fragment::CtlD);
        let rules: Vec<Rule> = r.trace.iter().map(|s| s.rule).collect();
        assert_eq!(rules, [Rule::Until, Rule::Next, Rule::Next]);
        let roles: Vec<&Role> = r.dictionary.iter().map(|d| &d.role).collect();
        assert!(roles.contains(&&Role::P) && roles.contains(&&Role::Q));
        assert_eq!(roles.iter().filter(|r| matches!(r, Role::Action(_))).count(), 2);
        assert_eq!(roles.iter().filter(|r| **r == &Role::EnvAction).count(), 2);
        let props = f.props();
        let fresh: BTreeSet<&Prop> = r.fresh_atoms().into_iter().collect();
        assert_eq!(fresh.len(), r.dictionary.len());
        assert!(fresh.iter().all(|p| !props.contains(*p)));
    }

    #[test]
    fn unsupported_inputs_name_the_offender() {
        let f = parse("[[1]] (u U v)").unwrap();
        match translate(&f, Mode::Incomplete) {
            Err(TranslateError::Unsupported { offending, .. }) => assert_eq!(offending, f),
            other => panic!("{other:?}"),
        }
        let mixed = parse("<<1>> X E F p").unwrap();
        assert!(translate(&mixed, Mode::Incomplete).is_err());
    }

    #[test]
    fn complete_mode_eliminates_dual_until() {
        let target = parse("[[1,2]] (u U v)").unwrap();
        let mut c = ctx(Mode::Complete, &["1", "2"]);
        let out = eliminate_until_complete(&target, &target, &mut c).unwrap();
        let expected = parse_lenient(
            "_p0 \
             & A G (_p0 | _q0 -> v | u & [[1,2]] X _q0) \
             & A G (_p0 <-> v | u & [[1,2]] X _p0) \
             & A G (_p0 -> v | u & A X A ((_q0 -> u) U (_q0 -> v)))",
        );
        assert_eq!(out, expected);
        let mut inc = ctx(Mode::Incomplete, &["1"]);
        assert!(matches!(inc.dual_until_step(&target), Err(TranslateError::ModeMismatch(_))));
        let r = translate(&target, Mode::Complete).unwrap();
        assert_eq!(r.formula.classify(), Fragment::CtlD);
    }

    #[test]
    fn generated_names_avoid_reserved_input_atoms() {
        let f = Formula::and(Formula::atom("_p0"), Formula::coop_next(g(&["1"]), Formula::atom("_q1")));
        let r = translate(&f, Mode::Incomplete).unwrap();
        for d in &r.dictionary {
            assert!(!f.props().contains(&d.atom));
        }
    }

    #[test]
    fn translation_is_deterministic() {
        let f = parse("<<1,2>> (K{1,2} u U K{1,2} <<2>> X v) & <<1>> X !u").unwrap();
        assert_eq!(translate(&f, Mode::Incomplete), translate(&f, Mode::Incomplete));
        assert_eq!(translate(&f, Mode::Incomplete).unwrap().formula.classify(), Fragment::CtlD);
    }
}
