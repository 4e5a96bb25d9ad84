//! Running property suites over supplied or generated systems.

use atlk_core::gen::{generate_complete_information, generate_random, GenParams};
use atlk_core::oracle::OracleError;
use atlk_core::suites::{run_suite, Property, SuiteConfig, SuiteReport};
use atlk_core::system::{InterpretedSystem, SystemError};
use rayon::prelude::*;
use serde::Serialize;

/// Where the systems come from.
#[derive(Debug, Clone)]
pub enum Source {
    /// One system read from `name`.
    Model { name: String, system: InterpretedSystem },
    /// `count` generated systems with seeds `seed, seed + 1, ...`. Sizes
    /// come from `params`, whose seed is ignored.
    Generated { seed: u64, count: u64, params: GenParams },
}

#[derive(Debug, Clone, Serialize)]
pub struct CounterexampleReport {
    pub run: String,
    pub formula: String,
    pub other: Option<String>,
    pub left: String,
    pub right: String,
    pub note: String,
}

#[derive(Debug, Clone, Serialize)]
pub struct SystemReport {
    pub source: String,
    pub checks: u64,
    pub undecided: u64,
    pub skipped: u64,
    /// Strategies in the largest skipped instance.
    pub largest_skipped: u128,
    pub instances: u64,
    pub counterexamples: Vec<CounterexampleReport>,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Totals {
    pub systems: u64,
    pub checks: u64,
    pub undecided: u64,
    pub skipped: u64,
    pub largest_skipped: u128,
    pub instances: u64,
    pub counterexamples: u64,
}

#[derive(Debug, Clone, Serialize)]
pub struct VerifyOutcome {
    pub property: String,
    pub horizon: usize,
    pub max_run: usize,
    pub passed: bool,
    pub totals: Totals,
    pub systems: Vec<SystemReport>,
}

#[derive(Debug, thiserror::Error)]
pub enum VerifyError {
    #[error("{source_name}: {error}")]
    Oracle { source_name: String, error: OracleError },
    #[error("seed {seed}: {error}")]
    Generate { seed: u64, error: SystemError },
    #[error("every instance exceeds the strategy budget of {budget}; the largest enumeration has {count} strategies")]
    OverBudget { count: u128, budget: u64 },
    #[error("cannot start worker threads: {0}")]
    Threads(String),
}

fn generate(property: Property, params: &GenParams, seed: u64) -> Result<InterpretedSystem, VerifyError> {
    let p = GenParams { seed, ..*params };
    let made = match property {
        Property::Prop3 => generate_complete_information(&p),
        _ => generate_random(&p),
    };
    made.map_err(|error| VerifyError::Generate { seed, error })
}

fn report(source: String, is: &InterpretedSystem, r: SuiteReport) -> SystemReport {
    SystemReport {
        source,
        checks: r.checks,
        undecided: r.undecided,
        skipped: r.skipped,
        largest_skipped: r.largest_skipped,
        instances: r.instances,
        counterexamples: r
            .counterexamples
            .into_iter()
            .map(|c| CounterexampleReport {
                run: is.fmt_run(&c.run),
                formula: c.formula.to_string(),
                other: c.other.map(|f| f.to_string()),
                left: c.left.to_string(),
                right: c.right.to_string(),
                note: c.note,
            })
            .collect(),
    }
}

fn one(
    property: Property,
    source: String,
    is: &InterpretedSystem,
    cfg: &SuiteConfig,
    seed: u64,
) -> Result<SystemReport, VerifyError> {
    let r = run_suite(property, is, cfg, seed)
        .map_err(|error| VerifyError::Oracle { source_name: source.clone(), error })?;
    Ok(report(source, is, r))
}

/// Runs `property` on every system of `source`, `jobs` systems at a time.
/// Reports come back in source order whatever `jobs` is.
pub fn run_verify(
    property: Property,
    source: &Source,
    cfg: &SuiteConfig,
    jobs: usize,
) -> Result<VerifyOutcome, VerifyError> {
    let systems = match source {
        Source::Model { name, system } => vec![one(property, name.clone(), system, cfg, 0)?],
        Source::Generated { seed, count, params } => {
            let seeds: Vec<u64> = (0..*count).map(|k| seed.wrapping_add(k)).collect();
            let work = |s: &u64| {
                let is = generate(property, params, *s)?;
                one(property, format!("seed {s}"), &is, cfg, *s)
            };
            if jobs <= 1 {
                seeds.iter().map(work).collect::<Result<Vec<_>, _>>()?
            } else {
                rayon::ThreadPoolBuilder::new()
                    .num_threads(jobs)
                    .build()
                    .map_err(|e| VerifyError::Threads(e.to_string()))?
                    .install(|| seeds.par_iter().map(work).collect::<Result<Vec<_>, _>>())?
            }
        }
    };
    let mut totals = Totals::default();
    for s in &systems {
        totals.systems += 1;
        totals.checks += s.checks;
        totals.undecided += s.undecided;
        totals.skipped += s.skipped;
        totals.largest_skipped = totals.largest_skipped.max(s.largest_skipped);
        totals.instances += s.instances;
        totals.counterexamples += s.counterexamples.len() as u64;
    }
    if totals.instances > 0 && totals.skipped == totals.instances {
        return Err(VerifyError::OverBudget { count: totals.largest_skipped, budget: cfg.strategy_budget });
    }
    Ok(VerifyOutcome {
        property: property.to_string(),
        horizon: cfg.horizon,
        max_run: cfg.max_run,
        passed: totals.counterexamples == 0,
        totals,
        systems,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parallel_runs_match_sequential_ones() {
        let source = Source::Generated { seed: 7, count: 4, params: GenParams::new(2, 2, 2, 2, 0) };
        let mut cfg = SuiteConfig::new(2);
        cfg.max_run = 1;
        let a = run_verify(Property::KeyObs, &source, &cfg, 1).unwrap();
        let b = run_verify(Property::KeyObs, &source, &cfg, 3).unwrap();
        assert!(a.passed);
        assert_eq!(serde_json::to_string(&a).unwrap(), serde_json::to_string(&b).unwrap());
    }
}
