use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn lpw(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lpw")).args(args).env_remove("LPW_PRECISION").output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn code(o: &Output) -> i32 {
    o.status.code().unwrap()
}

fn construct(dir: &Path, name: &str, args: &[&str]) -> String {
    let path = dir.join(name).to_string_lossy().into_owned();
    let mut all = vec!["construct"];
    all.extend_from_slice(args);
    all.extend_from_slice(&["-o", &path]);
    let o = lpw(&all);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    path
}

#[test]
fn construct_records_provenance() {
    let dir = tempfile::tempdir().unwrap();
    let p = construct(dir.path(), "p2.json", &["--group", "pruefer:2"]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&p).unwrap()).unwrap();
    assert_eq!(v["schema"], "lpw.weight/v1");
    assert_eq!(v["scale"], "1/2");
    assert_eq!(v["params"]["mass"], "1/1");

    let q = construct(dir.path(), "q.json", &["--group", "rationals", "--chain", "factorial"]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&q).unwrap()).unwrap();
    assert!(v["params"]["c"].is_string());

    let s = construct(dir.path(), "s.json", &["--group", "sum", "--summands", "pruefer:2,pruefer:3"]);
    let v: serde_json::Value = serde_json::from_str(&fs::read_to_string(&s).unwrap()).unwrap();
    assert_eq!(v["params"]["epsilon1"], "1/60");
    assert_eq!(v["params"]["alphas"].as_array().unwrap().len(), 2);

    assert_eq!(code(&lpw(&["construct", "--group", "pruefer:4"])), 2);
}

#[test]
fn verify_exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    let good = construct(dir.path(), "good.json", &["--group", "pruefer:2"]);
    let o = lpw(&["verify", "--weight", &good, "--suite", "all", "--window", "G_4", "--trunc", "N=8"]);
    assert_eq!(code(&o), 0, "{}", stdout(&o));

    let bad = construct(
        dir.path(),
        "bad.json",
        &["--group", "pruefer:2", "--phi", "explicit:1/64,1/8,1/2;1/8", "--allow-nonmonotone"],
    );
    let o = lpw(&["verify", "--weight", &bad, "--suite", "b", "--window", "G_2"]);
    assert_eq!(code(&o), 1);
    assert!(stdout(&o).contains("witness"));

    // the tail of a one-layer truncation straddles a tight bound
    let raw = construct(dir.path(), "raw.json", &["--group", "pruefer:2", "--raw"]);
    let o = lpw(&["verify", "--weight", &raw, "--suite", "b", "--window", "list:0", "--trunc", "N=1", "--bound", "13/25"]);
    assert_eq!(code(&o), 3);
    assert!(stdout(&o).contains("inconclusive at"));
    let o = lpw(&["verify", "--weight", &raw, "--suite", "b", "--window", "list:0", "--trunc", "N=12", "--bound", "13/25"]);
    assert_eq!(code(&o), 1);
}

#[test]
fn verify_bundles_are_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let w = construct(dir.path(), "s.json", &["--group", "sum", "--summands", "pruefer:2,pruefer:3,pruefer:2"]);
    let run = |name: &str| {
        let out = dir.path().join(name).to_string_lossy().into_owned();
        let o = lpw(&["verify", "--weight", &w, "--window", "sample:40:4", "--seed", "11", "-o", &out]);
        assert_eq!(code(&o), 0, "{}", stdout(&o));
        assert!(stdout(&o).contains("seed: 11"));
        fs::read(out).unwrap()
    };
    assert_eq!(run("a.json"), run("b.json"));

    let bundle = dir.path().join("a.json").to_string_lossy().into_owned();
    let o = lpw(&["report", &bundle]);
    assert_eq!(code(&o), 0);
    assert!(stdout(&o).contains("exit code 0"));
}

#[test]
fn domar_and_beurling() {
    let o = lpw(&["domar", "--weight", "builtin:exp-abs", "--x", "1", "--N", "3"]);
    let s = stdout(&o);
    assert!(s.lines().nth(3).unwrap().ends_with("11/6"), "{s}");
    assert!(s.contains("classification: Divergent"));
    let o = lpw(&["domar", "--weight", "builtin:poly2", "--x", "1"]);
    assert!(stdout(&o).contains("classification: Convergent"));
    assert_eq!(code(&lpw(&["domar", "--weight", "builtin:nope"])), 2);

    let o = lpw(&["beurling", "--weight", "builtin:poly2-exp-log"]);
    assert!(stdout(&o).contains("classification: infinite"));
    let o = lpw(&["beurling", "--weight", "builtin:poly2"]);
    assert!(stdout(&o).contains("classification: finite"));
}

#[test]
fn countex_report() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("c.json").to_string_lossy().into_owned();
    let o = lpw(&["countex", "--depth", "2", "-o", &out]);
    assert_eq!(code(&o), 0);
    let s = stdout(&o);
    assert!(s.contains("q = [2, 220]"));
    assert!(s.contains("sum of verified terms >= 1/2"));
    assert!(s.contains("M = 3.14159"));
    assert_eq!(code(&lpw(&["countex", "--depth", "4"])), 2);
}

#[test]
fn equivalence_of_line_weights() {
    let o = lpw(&["equivalence", "--w1", "builtin:poly2-char", "--w2", "builtin:poly2", "--window", "grid:-5:5:100"]);
    let s = stdout(&o);
    assert!(s.contains("c1 = 1/1*exp(-5/1)") && s.contains("c2 = 1/1*exp(5/1)"), "{s}");
}

#[test]
fn precision_comes_from_the_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_lpw"))
        .args(["countex"])
        .env("LPW_PRECISION", "not-a-number")
        .output()
        .unwrap();
    assert_eq!(code(&o), 2);
    let o = Command::new(env!("CARGO_BIN_EXE_lpw"))
        .args(["countex"])
        .env("LPW_PRECISION", "1e-3")
        .output()
        .unwrap();
    assert_eq!(code(&o), 0);
}
