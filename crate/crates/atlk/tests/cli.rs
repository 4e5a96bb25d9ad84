use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tempfile::TempDir;

fn corpus(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../corpus").join(name)
}

fn atlk(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_atlk")).args(args).output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exited normally")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

struct Scratch(TempDir);

impl Scratch {
    fn new() -> Scratch {
        Scratch(tempfile::tempdir().unwrap())
    }

    fn file(&self, name: &str, contents: &str) -> String {
        let p = self.0.path().join(name);
        std::fs::write(&p, contents).unwrap();
        p.display().to_string()
    }

    fn path(&self, name: &str) -> String {
        self.0.path().join(name).display().to_string()
    }
}

#[test]
fn check_on_the_toy_model() {
    let s = Scratch::new();
    let toy = corpus("toy1.json");
    let toy = toy.to_str().unwrap();
    let f = s.file("f", "<<1>> X K{1} p\n");
    let o = atlk(&["check", "--model", toy, "--formula", &f, "--horizon", "2"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stdout(&o).ends_with("True\n"));

    let f = s.file("false", "false");
    assert_eq!(code(&atlk(&["check", "--model", toy, "--formula", &f])), 1);

    let f = s.file("deep", "# objective beyond the horizon\n<<1>> (K{1} !p U K{1} p)\n");
    let o = atlk(&["check", "--model", toy, "--formula", &f, "--horizon", "0", "--json"]);
    assert_eq!(code(&o), 2);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["verdict"], "Unknown");
    assert_eq!(doc["runs"][0]["state"], "(x0,y0,e0)");

    let o = atlk(&["check", "--model", toy, "--formula", &f, "--run", "3"]);
    assert_eq!(code(&o), 3);
}

#[test]
fn check_rejects_invalid_models() {
    let s = Scratch::new();
    let mut doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(corpus("toy1.json")).unwrap()).unwrap();
    doc["transitions"].as_array_mut().unwrap().pop();
    let m = s.file("m.json", &doc.to_string());
    let f = s.file("f", "true");
    let o = atlk(&["check", "--model", &m, "--formula", &f]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("totality"), "{}", stderr(&o));

    let m = s.file("junk.json", "{\"agents\": []}");
    assert_eq!(code(&atlk(&["check", "--model", &m, "--formula", &f])), 4);
}

#[test]
fn translate_writes_formula_and_dictionary() {
    let s = Scratch::new();
    let f = s.file("f", "<<1>> (K{1} u U K{1} v)");
    let (out, dict) = (s.path("out"), s.path("dict.json"));
    let o = atlk(&["translate", "--in", &f, "--out", &out, "--dict", &dict, "--trace"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    assert!(stderr(&o).contains("step 1 until"));
    let text = std::fs::read_to_string(&out).unwrap();
    let c = s.file("translated", &text);
    assert_eq!(stdout(&atlk(&["classify", "--in", &c])), "CtlD\n");
    let d: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&dict).unwrap()).unwrap();
    let roles: Vec<&str> = d["entries"].as_array().unwrap().iter().map(|e| e["role"].as_str().unwrap()).collect();
    assert!(roles.contains(&"p") && roles.contains(&"q") && roles.contains(&"action 1"));
    assert_eq!(d["mode"], "incomplete");
    assert!(d["guarantee"].as_str().unwrap().contains("model-extraction"));
}

#[test]
fn translate_rejects_unsupported_constructs() {
    let s = Scratch::new();
    let f = s.file("f", "[[1]] (u U v)");
    let o = atlk(&["translate", "--in", &f, "--mode", "incomplete"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("[[1]] (u U v)"), "{}", stderr(&o));
    let o = atlk(&["translate", "--in", &f, "--mode", "complete", "--json"]);
    assert_eq!(code(&o), 0, "{}", stderr(&o));
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["fragment"], "CtlD");

    let f = s.file("reserved", "_p0");
    assert_eq!(code(&atlk(&["translate", "--in", &f])), 4);
}

#[test]
fn translate_output_is_stable() {
    let s = Scratch::new();
    let f = s.file("f", "<<1,2>> X (K{1,2} a & <<2>> X b) | <<1>> (K{1} a U K{1} b)");
    let a = atlk(&["translate", "--in", &f, "--agents", "3"]);
    let b = atlk(&["translate", "--in", &f, "--agents", "3"]);
    assert_eq!(code(&a), 0);
    assert_eq!(a.stdout, b.stdout);
    assert!(stdout(&a).contains("_nop_3"));
}

#[test]
fn verify_suites() {
    let o = atlk(&["verify", "--property", "keyobs", "--gen-seed", "7", "--count", "10", "--horizon", "2"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    assert!(stdout(&o).ends_with("PASS\n"));

    let toy = corpus("toy1.json");
    let o = atlk(&["verify", "--property", "emptycoalition", "--model", toy.to_str().unwrap(), "--json"]);
    assert_eq!(code(&o), 0);
    let doc: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(doc["passed"], true);

    let o = atlk(&["verify", "--property", "keyobs", "--gen-seed", "7", "--horizon", "2", "--inject-fault"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("counterexample: model seed 7, run"));

    let o = atlk(&["verify", "--property", "prop3", "--model", toy.to_str().unwrap()]);
    assert_eq!(code(&o), 4);

    let o = atlk(&["verify", "--property", "fixpoint", "--gen-seed", "1", "--budget", "1"]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("instances skipped (up to "), "{}", stdout(&o));

    let o = atlk(&["verify", "--property", "fixpoint", "--gen-seed", "1", "--budget", "0"]);
    assert_eq!(code(&o), 4);
    assert!(stderr(&o).contains("the largest enumeration has"), "{}", stderr(&o));
}

#[test]
fn verify_jobs_do_not_change_results() {
    let args = ["verify", "--property", "fixpoint", "--gen-seed", "3", "--count", "4", "--json"];
    let one = atlk(&args);
    let many = atlk(&[&args[..], &["--jobs", "3"]].concat());
    assert_eq!(code(&one), 0);
    assert_eq!(one.stdout, many.stdout);
}

#[test]
fn gen_then_check() {
    let s = Scratch::new();
    let m = s.path("m.json");
    assert_eq!(code(&atlk(&["gen", "--agents", "2", "--seed", "5", "--out", &m])), 0);
    let f = s.file("f", "true");
    assert_eq!(code(&atlk(&["check", "--model", &m, "--formula", &f])), 0);
    let again = atlk(&["gen", "--agents", "2", "--seed", "5"]);
    assert_eq!(stdout(&again), std::fs::read_to_string(&m).unwrap());

    let ci = s.path("ci.json");
    assert_eq!(code(&atlk(&["gen", "--complete-information", "--seed", "2", "--out", &ci])), 0);
    assert_eq!(code(&atlk(&["verify", "--property", "prop3", "--model", &ci])), 0);
}

#[test]
fn classify_and_roundtrip() {
    let s = Scratch::new();
    let f = s.file("f", "K{1,2} E X p");
    assert_eq!(stdout(&atlk(&["classify", "--in", &f])), "CtlD\n");
    let corpus = corpus("formulas.txt");
    let o = atlk(&["roundtrip", "--in", corpus.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));
    let bad = s.file("bad", "p &\n");
    assert_eq!(code(&atlk(&["roundtrip", "--in", &bad])), 4);
    let unusual = s.file("unusual", "((p))\n");
    assert_eq!(code(&atlk(&["roundtrip", "--in", &unusual])), 0);
}

#[test]
fn usage_errors_exit_with_three() {
    assert_eq!(code(&atlk(&["bogus"])), 3);
    assert_eq!(code(&atlk(&["verify", "--property", "keyobs"])), 3);
    assert_eq!(code(&atlk(&["verify", "--property", "nope", "--gen-seed", "1"])), 3);
    assert_eq!(code(&atlk(&["gen", "--states", "0"])), 3);
    assert_eq!(code(&atlk(&["translate", "--in", "x", "--mode", "partial"])), 3);
    assert_eq!(code(&atlk(&["--help"])), 0);
}
