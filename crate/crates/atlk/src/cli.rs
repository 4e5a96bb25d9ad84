//! The `atlk` command line.
//!
//! Exit codes: 0 success or `True`, 1 `False` or a failed check, 2
//! `Unknown`, 3 usage error, 4 input error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use atlk_core::gen::{generate_complete_information, generate_random, GenParams};
use atlk_core::oracle::{Evaluator, Verdict, DEFAULT_STRATEGY_BUDGET};
use atlk_core::suites::{Property, SuiteConfig};
use atlk_core::system::{InterpretedSystem, Run};
use atlk_core::translate::{translate_with, Mode};
use atlk_core::{parse, parse_lenient, Agent, Formula};
use clap::{ArgGroup, Args, Parser, Subcommand};
use serde_json::json;

use crate::dict::Dictionary;
use crate::model::{parse_model, serialize_model};
use crate::verify::{run_verify, Source, VerifyError, VerifyOutcome};

pub const EXIT_OK: u8 = 0;
pub const EXIT_FALSE: u8 = 1;
pub const EXIT_UNKNOWN: u8 = 2;
pub const EXIT_USAGE: u8 = 3;
pub const EXIT_INPUT: u8 = 4;

#[derive(Debug, Parser)]
#[command(
    name = "atlk",
    version,
    about = "Epistemic ATL: translation to CTL with distributed knowledge and bounded model checking"
)]
pub struct Cli {
    /// Print a single JSON document on stdout instead of text.
    #[arg(long, global = true)]
    pub json: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Rewrite a formula into CTL with distributed knowledge.
    Translate(TranslateArgs),
    /// Evaluate a formula on a model at its initial runs.
    Check(CheckArgs),
    /// Print the fragment a formula belongs to.
    Classify(InArgs),
    /// Run a property suite on a model or on generated models.
    Verify(VerifyArgs),
    /// Write a random model.
    Gen(GenArgs),
    /// Check that every formula in a file renders back to itself.
    Roundtrip(InArgs),
}

#[derive(Debug, Args)]
pub struct InArgs {
    /// Formula file; `-` reads stdin.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
}

#[derive(Debug, Args)]
pub struct TranslateArgs {
    /// Formula file; `-` reads stdin.
    #[arg(long = "in", value_name = "FILE")]
    pub input: PathBuf,
    /// Output file for the formula; stdout if absent.
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
    #[arg(long, default_value = "incomplete", value_parser = ["incomplete", "complete"])]
    pub mode: String,
    /// Write the atom dictionary here.
    #[arg(long, value_name = "FILE")]
    pub dict: Option<PathBuf>,
    /// Report every rewrite step on stderr.
    #[arg(long)]
    pub trace: bool,
    /// Agents to include in the action constraint besides those in the formula.
    #[arg(long, value_delimiter = ',', value_name = "NAMES")]
    pub agents: Vec<String>,
}

#[derive(Debug, Args)]
pub struct CheckArgs {
    #[arg(long, value_name = "FILE")]
    pub model: PathBuf,
    /// Formula file; `-` reads stdin.
    #[arg(long, value_name = "FILE")]
    pub formula: PathBuf,
    #[arg(long, default_value_t = 3)]
    pub horizon: usize,
    /// Only evaluate at the initial state with this index.
    #[arg(long, value_name = "INDEX")]
    pub run: Option<usize>,
}

#[derive(Debug, Args)]
#[command(group(ArgGroup::new("source").required(true).args(["model", "gen_seed"])))]
pub struct VerifyArgs {
    #[arg(long, value_name = "FILE")]
    pub model: Option<PathBuf>,
    /// First seed of the generated models.
    #[arg(long, value_name = "S")]
    pub gen_seed: Option<u64>,
    #[arg(long, value_parser = ["fixpoint", "keyobs", "emptycoalition", "prop1", "prop3"])]
    pub property: String,
    /// Number of generated models.
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..))]
    pub count: u64,
    #[arg(long, default_value_t = 3)]
    pub horizon: usize,
    /// Longest run compared; defaults to one less than the horizon.
    #[arg(long)]
    pub max_run: Option<usize>,
    /// Largest number of strategies searched per instance.
    #[arg(long, default_value_t = DEFAULT_STRATEGY_BUDGET)]
    pub budget: u64,
    /// Formulas sampled per model by the suites that sample formulas.
    #[arg(long, default_value_t = 10)]
    pub formulas: usize,
    #[arg(long, default_value_t = 1, value_parser = clap::value_parser!(u64).range(1..=256))]
    pub jobs: u64,
    #[command(flatten)]
    pub sizes: Sizes,
    #[arg(long, hide = true)]
    pub inject_fault: bool,
}

#[derive(Debug, Clone, Copy, Args)]
pub struct Sizes {
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=8))]
    pub agents: u64,
    /// Local states per member.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=16))]
    pub states: u64,
    /// Actions per member.
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=16))]
    pub actions: u64,
    #[arg(long, default_value_t = 2, value_parser = clap::value_parser!(u64).range(1..=26))]
    pub props: u64,
}

impl Sizes {
    fn params(&self, seed: u64) -> GenParams {
        GenParams::new(self.agents as usize, self.states as usize, self.actions as usize, self.props as usize, seed)
    }
}

#[derive(Debug, Args)]
pub struct GenArgs {
    #[command(flatten)]
    pub sizes: Sizes,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Generate a complete-information model: shared observations, a
    /// trivial environment.
    #[arg(long)]
    pub complete_information: bool,
    #[arg(long, value_name = "FILE")]
    pub out: Option<PathBuf>,
}

/// A command that stopped early.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub message: String,
}

fn input(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_INPUT, message: message.into() }
}

fn usage(message: impl Into<String>) -> Failure {
    Failure { code: EXIT_USAGE, message: message.into() }
}

/// What a command produced: text for stdout, a JSON document and an exit
/// code.
struct Output {
    text: String,
    json: serde_json::Value,
    code: u8,
}

fn read(path: &Path) -> Result<String, Failure> {
    if path.as_os_str() == "-" {
        return std::io::read_to_string(std::io::stdin()).map_err(|e| input(format!("stdin: {e}")));
    }
    fs::read_to_string(path).map_err(|e| input(format!("{}: {e}", path.display())))
}

fn write(path: &Path, contents: &str) -> Result<(), Failure> {
    fs::write(path, contents).map_err(|e| input(format!("{}: {e}", path.display())))
}

/// Drops `#` comment lines; what remains is one formula.
fn formula_text(text: &str) -> String {
    text.lines().filter(|l| !l.trim_start().starts_with('#')).collect::<Vec<_>>().join("\n")
}

fn read_formula(path: &Path, lenient: bool) -> Result<Formula, Failure> {
    let text = formula_text(&read(path)?);
    let parsed = if lenient { parse_lenient(&text) } else { parse(&text) };
    parsed.map_err(|e| input(format!("{}: {e}", path.display())))
}

fn read_model(path: &Path) -> Result<InterpretedSystem, Failure> {
    let is = parse_model(&read(path)?).map_err(|e| input(format!("{}: {e}", path.display())))?;
    let violations = is.validate();
    if !violations.is_empty() {
        let list: Vec<String> = violations.iter().map(|v| format!("  {v}")).collect();
        return Err(input(format!("{}: invalid model\n{}", path.display(), list.join("\n"))));
    }
    Ok(is)
}

fn verdict_code(v: Verdict) -> u8 {
    match v {
        Verdict::True => EXIT_OK,
        Verdict::False => EXIT_FALSE,
        Verdict::Unknown => EXIT_UNKNOWN,
    }
}

fn cmd_translate(a: &TranslateArgs, trace_out: &mut dyn Write) -> Result<Output, Failure> {
    let mode: Mode = a.mode.parse().map_err(usage)?;
    let extra = a
        .agents
        .iter()
        .map(|n| Agent::new(n.clone()).map_err(|e| usage(format!("--agents: {e}"))))
        .collect::<Result<Vec<_>, _>>()?;
    let f = read_formula(&a.input, false)?;
    let r = translate_with(&f, mode, extra).map_err(|e| input(e.to_string()))?;
    let rendered = r.formula.to_string();
    let dict = Dictionary::of(&r);
    if let Some(path) = &a.out {
        write(path, &format!("{rendered}\n"))?;
    }
    if let Some(path) = &a.dict {
        write(path, &dict.to_json())?;
    }
    let steps: Vec<serde_json::Value> = r
        .trace
        .iter()
        .map(|s| {
            json!({
                "rule": s.rule.to_string(),
                "target": s.target.to_string(),
                "replacement": s.replacement.to_string(),
                "fresh": s.fresh.iter().map(|p| p.to_string()).collect::<Vec<_>>(),
                "conjuncts": s.conjuncts.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
            })
        })
        .collect();
    if a.trace {
        for (k, s) in r.trace.iter().enumerate() {
            let fresh: Vec<String> = s.fresh.iter().map(|p| p.to_string()).collect();
            let _ = writeln!(trace_out, "step {} {}: {} => {}", k + 1, s.rule, s.target, s.replacement);
            let _ = writeln!(trace_out, "  fresh: {}", fresh.join(" "));
            for c in &s.conjuncts {
                let _ = writeln!(trace_out, "  conjunct: {c}");
            }
        }
    }
    let mut doc = json!({
        "formula": rendered,
        "fragment": r.formula.classify().to_string(),
        "mode": mode.to_string(),
        "constraints": r.constraints.iter().map(|c| c.to_string()).collect::<Vec<_>>(),
        "dictionary": dict,
    });
    if a.trace {
        doc["trace"] = steps.into();
    }
    let text = if a.out.is_some() { String::new() } else { format!("{rendered}\n") };
    Ok(Output { text, json: doc, code: EXIT_OK })
}

fn cmd_check(a: &CheckArgs) -> Result<Output, Failure> {
    let is = read_model(&a.model)?;
    let f = read_formula(&a.formula, true)?;
    let initial = is.initial().to_vec();
    let indices: Vec<usize> = match a.run {
        Some(k) if k >= initial.len() => {
            return Err(usage(format!("--run {k}: the model has {} initial states", initial.len())))
        }
        Some(k) => vec![k],
        None => (0..initial.len()).collect(),
    };
    let mut ev = Evaluator::new(&is, a.horizon).map_err(|e| input(e.to_string()))?;
    let mut text = String::new();
    let mut runs = Vec::new();
    let mut aggregate = Verdict::False;
    for k in indices {
        let v = ev.at(&f, &Run::initial(initial[k])).map_err(|e| input(e.to_string()))?;
        aggregate = aggregate.or(v);
        let state = is.fmt_state(initial[k]);
        text.push_str(&format!("run {k} {state}: {v}\n"));
        runs.push(json!({ "index": k, "state": state, "verdict": v.to_string() }));
    }
    text.push_str(&format!("{aggregate}\n"));
    let doc = json!({
        "formula": f.to_string(),
        "horizon": a.horizon,
        "runs": runs,
        "verdict": aggregate.to_string(),
    });
    Ok(Output { text, json: doc, code: verdict_code(aggregate) })
}

fn cmd_classify(a: &InArgs) -> Result<Output, Failure> {
    let f = read_formula(&a.input, true)?;
    let fragment = f.classify().to_string();
    Ok(Output {
        text: format!("{fragment}\n"),
        json: json!({ "formula": f.to_string(), "fragment": fragment }),
        code: EXIT_OK,
    })
}

fn verify_text(o: &VerifyOutcome) -> String {
    let mut t = format!("property {}, horizon {}, runs up to length {}\n", o.property, o.horizon, o.max_run);
    for s in &o.systems {
        t.push_str(&format!(
            "{}: {} checks, {} undecided, {} of {} instances skipped, {}\n",
            s.source,
            s.checks,
            s.undecided,
            s.skipped,
            s.instances,
            if s.counterexamples.is_empty() { "pass" } else { "FAIL" }
        ));
        for c in &s.counterexamples {
            let other = c.other.as_deref().map(|g| format!(" but `{g}` is {}", c.right)).unwrap_or_default();
            t.push_str(&format!(
                "  counterexample: model {}, run {}: `{}` is {}{} ({})\n",
                s.source, c.run, c.formula, c.left, other, c.note
            ));
        }
    }
    let n = &o.totals;
    t.push_str(&format!(
        "total: {} systems, {} checks, {} undecided, {} of {} instances skipped{}, {} counterexamples\n{}\n",
        n.systems,
        n.checks,
        n.undecided,
        n.skipped,
        n.instances,
        if n.skipped > 0 { format!(" (up to {} strategies)", n.largest_skipped) } else { String::new() },
        n.counterexamples,
        if o.passed { "PASS" } else { "FAIL" }
    ));
    t
}

fn cmd_verify(a: &VerifyArgs) -> Result<Output, Failure> {
    let property: Property = a.property.parse().map_err(usage)?;
    let cfg = SuiteConfig {
        horizon: a.horizon,
        max_run: a.max_run.unwrap_or(a.horizon.saturating_sub(1)),
        strategy_budget: a.budget,
        formulas: a.formulas,
        inject_fault: a.inject_fault,
    };
    let source = match (&a.model, a.gen_seed) {
        (Some(path), _) => Source::Model { name: path.display().to_string(), system: read_model(path)? },
        (None, Some(seed)) => Source::Generated { seed, count: a.count, params: a.sizes.params(seed) },
        (None, None) => return Err(usage("one of --model or --gen-seed is required")),
    };
    let outcome = run_verify(property, &source, &cfg, a.jobs as usize).map_err(|e| match e {
        VerifyError::Threads(_) => Failure { code: EXIT_USAGE, message: e.to_string() },
        _ => input(e.to_string()),
    })?;
    let code = if outcome.passed { EXIT_OK } else { EXIT_FALSE };
    Ok(Output { text: verify_text(&outcome), json: serde_json::to_value(&outcome).expect("reports serialize"), code })
}

fn cmd_gen(a: &GenArgs) -> Result<Output, Failure> {
    let p = a.sizes.params(a.seed);
    let is = if a.complete_information { generate_complete_information(&p) } else { generate_random(&p) }
        .map_err(|e| input(e.to_string()))?;
    debug_assert!(is.validate().is_empty());
    let text = serialize_model(&is);
    match &a.out {
        Some(path) => {
            write(path, &text)?;
            Ok(Output {
                text: String::new(),
                json: json!({ "out": path.display().to_string(), "states": is.state_count() }),
                code: EXIT_OK,
            })
        }
        None => {
            let doc: serde_json::Value = serde_json::from_str(&text).expect("model documents are JSON");
            Ok(Output { text, json: doc, code: EXIT_OK })
        }
    }
}

fn cmd_roundtrip(a: &InArgs) -> Result<Output, Failure> {
    let text = read(&a.input)?;
    let mut count = 0;
    let mut mismatches = Vec::new();
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        count += 1;
        let f = parse_lenient(line).map_err(|e| input(format!("{}:{}: {e}", a.input.display(), k + 1)))?;
        let rendered = f.to_string();
        match parse_lenient(&rendered) {
            Ok(g) if g == f && g.to_string() == rendered => {}
            _ => mismatches.push(json!({ "line": k + 1, "input": line, "rendered": rendered })),
        }
    }
    let mut out = String::new();
    for m in &mismatches {
        out.push_str(&format!(
            "line {}: `{}` renders as `{}`\n",
            m["line"],
            m["input"].as_str().unwrap_or(""),
            m["rendered"].as_str().unwrap_or("")
        ));
    }
    out.push_str(&format!("{} formulas, {} mismatches\n", count, mismatches.len()));
    let code = if mismatches.is_empty() { EXIT_OK } else { EXIT_FALSE };
    Ok(Output { text: out, json: json!({ "formulas": count, "mismatches": mismatches }), code })
}

/// Runs a parsed command line and returns the exit code.
pub fn run(cli: &Cli, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8 {
    let result = match &cli.command {
        Command::Translate(a) => cmd_translate(a, stderr),
        Command::Check(a) => cmd_check(a),
        Command::Classify(a) => cmd_classify(a),
        Command::Verify(a) => cmd_verify(a),
        Command::Gen(a) => cmd_gen(a),
        Command::Roundtrip(a) => cmd_roundtrip(a),
    };
    match result {
        Ok(o) => {
            let _ = if cli.json {
                writeln!(stdout, "{}", serde_json::to_string_pretty(&o.json).expect("values serialize"))
            } else {
                stdout.write_all(o.text.as_bytes())
            };
            o.code
        }
        Err(f) => {
            if cli.json {
                let doc = json!({ "error": f.message, "exit": f.code });
                let _ = writeln!(stdout, "{}", serde_json::to_string_pretty(&doc).expect("values serialize"));
            }
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

/// Parses `args` and runs the command. Usage errors exit with 3; `--help`
/// and `--version` with 0.
pub fn main_with<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    match Cli::try_parse_from(args) {
        Ok(cli) => run(&cli, stdout, stderr),
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                stderr.write_all(rendered.as_bytes())
            } else {
                stdout.write_all(rendered.as_bytes())
            };
            code
        }
    }
}
