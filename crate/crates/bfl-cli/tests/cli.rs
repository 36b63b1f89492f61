use std::io::Write;
use std::process::{Command, Output};

use tempfile::NamedTempFile;

fn bfl(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfl")).args(args).output().expect("binary runs")
}

fn fixture(name: &str) -> String {
    format!("{}/../../fixtures/{name}", env!("CARGO_MANIFEST_DIR"))
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn tree_file(source: &str) -> NamedTempFile {
    let mut file = NamedTempFile::new().unwrap();
    file.write_all(source.as_bytes()).unwrap();
    file
}

#[test]
fn check_verdicts_and_exit_codes() {
    let ft = fixture("pathogen.ft");
    let out = bfl(&["check", "--ft", &ft, "-f", "MCS(CP_R)", "-v", "IW=1,H3=1,IT=0,H2=0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "holds\n");

    let out = bfl(&["check", "--ft", &ft, "-f", "MCS(CP_R)", "-v", "IW=1,H3=1,IT=1,H2=0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(stdout(&out), "does not hold\n");

    // Tree-level formulas need no vector.
    let out = bfl(&["check", "--ft", &ft, "-f", "exists (CP & CR)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "holds\n");

    // Vector-level formulas do.
    let out = bfl(&["check", "--ft", &ft, "-f", "MCS(CP_R)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("status vector"));
}

#[test]
fn vector_parsing_rules() {
    let ft = fixture("pathogen.ft");
    let check = ["check", "--ft", &ft, "-f", "CP_R"];

    let out = bfl(&[&check[..], &["-v", "IW=1"]].concat());
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("defaulting to operational: H3, IT, H2"));

    let out = bfl(&[&check[..], &["-v", "IW=1", "--strict-vector"]].concat());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unassigned basic events"));

    let out = bfl(&[&check[..], &["-v", "IW=1,IW=0"]].concat());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("assigned twice"));

    let out = bfl(&[&check[..], &["-v", "ghost=1"]].concat());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("unknown element"));

    let out = bfl(&[&check[..], &["-v", "CP=1"]].concat());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("not a basic event"));

    let out = bfl(&[&check[..], &["-v", "IW=2"]].concat());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("expected 0 or 1"));
}

#[test]
fn allsat_renders_cut_and_path_sets() {
    let ft = fixture("pathogen.ft");
    let out = bfl(&["allsat", "--ft", &ft, "-f", "MCS(CP_R)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "2 failure sets over {IW, H3, IT, H2}\n  {IT, H2}\n  {IW, H3}\n");

    let out = bfl(&["allsat", "--ft", &ft, "-f", "MPS(CP_R)"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "4 path sets over {IW, H3, IT, H2}\n  {IW, IT}\n  {IW, H2}\n  {H3, IT}\n  {H3, H2}\n"
    );
}

#[test]
fn allsat_expansion_and_dont_cares() {
    let ft = fixture("tiny.ft");
    let out = bfl(&["allsat", "--ft", &ft, "-f", "e_top"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(
        stdout(&out),
        "2 failure sets over {e1, e2}\n  {e2}\n  {e1} (either way: e2)\n"
    );

    let out = bfl(&["allsat", "--ft", &ft, "-f", "e_top", "--expand"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "3 failure sets over {e1, e2}\n  {e2}\n  {e1}\n  {e1, e2}\n");

    let out = bfl(&["allsat", "--ft", &ft, "-f", "e_top", "--expand", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("exceed 2"));
}

#[test]
fn allsat_empty_and_verdict_formulas() {
    let ft = fixture("tiny.ft");
    let out = bfl(&["allsat", "--ft", &ft, "-f", "e1 & !e1"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "0 failure sets\n");

    let out = bfl(&["allsat", "--ft", &ft, "-f", "exists e_top"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("tree-level verdict"));
}

#[test]
fn cex_outcomes_and_exit_codes() {
    let ft = fixture("nested.ft");
    let out = bfl(&["cex", "--ft", &ft, "-f", "MCS(e1)", "-v", "e2=0,e4=1,e5=0"]);
    assert_eq!(out.status.code(), Some(1));
    assert_eq!(
        stdout(&out),
        "does not hold; counterexample:\n  flipped: e2\n  revised: e2=1,e4=1,e5=0\n"
    );

    let out = bfl(&["cex", "--ft", &ft, "-f", "MCS(e1)", "-v", "e2=1,e4=1,e5=0"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "already satisfies\n");

    let out = bfl(&["cex", "--ft", &ft, "-f", "e2 & !e2", "-v", "e2=0,e4=0,e5=0"]);
    assert_eq!(out.status.code(), Some(3));
    assert!(stdout(&out).contains("no counterexample"));

    let out = bfl(&["cex", "--ft", &ft, "-f", "MCS(e1)"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("required"));
}

#[test]
fn json_reports_parse_back() {
    let ft = fixture("pathogen.ft");
    let out = bfl(&["allsat", "--ft", &ft, "-f", "MCS(CP_R)", "--json"]);
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["count"], 2);
    assert_eq!(v["scope"], "support");
    assert_eq!(v["path_semantics"], false);
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
    let failed: Vec<Vec<String>> = v["sets"]
        .as_array()
        .unwrap()
        .iter()
        .map(|s| {
            s["failed"].as_array().unwrap().iter().map(|x| x.as_str().unwrap().into()).collect()
        })
        .collect();
    assert!(failed.contains(&vec!["IW".to_string(), "H3".to_string()]));
    assert!(failed.contains(&vec!["IT".to_string(), "H2".to_string()]));

    let out = bfl(&["check", "--ft", &ft, "-f", "forall (CP => CP_R)", "--json"]);
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["verdict"], true);
    assert_eq!(v["layer"], "tree");
    assert_eq!(v["formula"], "forall (CP => CP_R)");

    let out =
        bfl(&["cex", "--ft", &fixture("nested.ft"), "-f", "MPS(e1)", "-v", "e2=1,e4=0,e5=1", "--json"]);
    assert_eq!(out.status.code(), Some(1));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["status"], "found");
    assert_eq!(v["counterexample"]["revised"]["e5"], 0);
    assert_eq!(v["counterexample"]["flipped"], serde_json::json!(["e5"]));
}

#[test]
fn dot_is_deterministic_and_marks_propagation() {
    let ft = fixture("pathogen.ft");
    let plain = bfl(&["dot", "--ft", &ft]);
    assert_eq!(plain.status.code(), Some(0));
    assert!(!stdout(&plain).contains("filled"));
    assert_eq!(stdout(&plain), stdout(&bfl(&["dot", "--ft", &ft])));

    let marked = bfl(&["dot", "--ft", &ft, "-v", "IW=1,H3=1,IT=0,H2=0"]);
    let text = stdout(&marked);
    for name in ["IW", "H3", "CP", "CP_R"] {
        let line = text.lines().find(|l| l.contains(&format!("\"{name}\" ["))).unwrap();
        assert!(line.contains("fillcolor"), "{name} should be marked: {line}");
    }
    let cr = text.lines().find(|l| l.contains("\"CR\" [")).unwrap();
    assert!(!cr.contains("fillcolor"), "CR stays operational: {cr}");
}

#[test]
fn validate_reports_violations() {
    let out = bfl(&["validate", "--ft", &fixture("covid.ft")]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(stdout(&out), "ok\n");

    let bad = tree_file("toplevel T;\nT = or(a, b);\nG = and(a, b);\n");
    let out = bfl(&["validate", "--ft", bad.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("G"));

    let garbage = tree_file("toplevel ;;;");
    let out = bfl(&["validate", "--ft", garbage.path().to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn parse_and_usage_errors_exit_2() {
    let out = bfl(&["check", "--ft", &fixture("pathogen.ft"), "-f", "CP_R &"]);
    assert_eq!(out.status.code(), Some(2));

    let out = bfl(&["check", "--ft", "/no/such/file.ft", "-f", "x"]);
    assert_eq!(out.status.code(), Some(2));

    let out = bfl(&["check", "-f", "x"]);
    assert_eq!(out.status.code(), Some(2), "missing --ft is a usage error");
}
