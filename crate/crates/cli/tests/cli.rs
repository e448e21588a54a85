use std::io::Write;
use std::process::{Command, Output, Stdio};

use serde_json::Value;

fn sl2gen(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_sl2gen")).args(args).output().expect("runs")
}

fn with_stdin(args: &[&str], input: &[u8]) -> Output {
    let mut child = Command::new(env!("CARGO_BIN_EXE_sl2gen"))
        .args(args)
        .stdin(Stdio::piped())
        .stdout(Stdio::piped())
        .stderr(Stdio::piped())
        .spawn()
        .expect("spawns");
    child.stdin.take().unwrap().write_all(input).unwrap();
    child.wait_with_output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn field<'a>(text: &'a str, key: &str) -> &'a str {
    text.lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix(": ")))
        .unwrap_or_else(|| panic!("no {key} in {text}"))
}

#[test]
fn factor_over_z_11() {
    let o = sl2gen(&["factor", "--ring", "Q[1/11]", "[[7,5],[4,3]]"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(&out, "verified"), "true");
    assert_eq!(field(&out, "starts_lower"), "true");
    let raw: usize = field(&out, "raw_length").parse().unwrap();
    assert!(raw <= 5);
    assert!(field(&out, "word").starts_with("[L("));
}

#[test]
fn identity_gives_empty_canonical_word() {
    let o = sl2gen(&["factor", "--ring", "Q", "[[1,0],[0,1]]"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let out = stdout(&o);
    assert_eq!(field(&out, "canonical"), "[]");
    assert_eq!(field(&out, "canonical_length"), "0");

    let o = sl2gen(&["factor", "--ring", "Q", "--format", "json", "[[1,0],[0,1]]"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["canonical"], Value::Array(vec![]));
    assert_eq!(v["chain_k"], 0);
}

#[test]
fn invalid_input_exits_1() {
    let o = sl2gen(&["factor", "--ring", "Q", "[[1,1],[1,1]]"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("determinant"));

    let o = sl2gen(&["factor", "--ring", "Q[1/11]", "[[7,5],[4 3]]"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("position 10"), "{}", stderr(&o));

    let o = sl2gen(&["factor", "--ring", "Z[1/2]", "[[1,0],[0,1]]"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("--ring"));

    // 1/3 is not in Z[1/11]
    let o = sl2gen(&["factor", "--ring", "Q[1/11]", "[[1,1/3],[0,1]]"]);
    assert_eq!(o.status.code(), Some(1));

    // Z has finitely many units
    let o = sl2gen(&["factor", "--ring", "Q", "[[7,5],[4,3]]"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("admissible"));
}

#[test]
fn budget_exhaustion_exits_2() {
    let o = sl2gen(&["factor", "--ring", "Q(sqrt 2)", "--nodes", "1", "--max-k", "2", "[[97,56],[-26,-15]]"]);
    assert_eq!(o.status.code(), Some(2), "{}", stderr(&o));
    assert!(stderr(&o).contains("budget"));
}

#[test]
fn factor_output_verifies() {
    for (ring, m) in [
        ("Q[1/11]", "[[7,5],[4,3]]"),
        ("Q(sqrt 2)", "[[97,56],[-26,-15]]"),
        ("Q(sqrt 5; half)[1/2]", "[[1+1*w,0+1*w],[1,1]]"),
        ("Q[1/5]", "[[0,1],[-1,0]]"),
    ] {
        let f = sl2gen(&["factor", "--ring", ring, "--format", "json", m]);
        assert_eq!(f.status.code(), Some(0), "{ring} {m}: {}", stderr(&f));
        let v: Value = serde_json::from_slice(&f.stdout).unwrap();
        assert_eq!(v["verified"], true);
        assert!(v["raw_length"].as_u64().unwrap() <= v["chain_k"].as_u64().unwrap().max(1) + 2);
        let o = with_stdin(&["verify", "--ring", ring, m, "-"], &f.stdout);
        assert_eq!(o.status.code(), Some(0), "{ring} {m}: {}", stderr(&o));
        // the canonical word too
        let canon = v["canonical"].to_string();
        let o = sl2gen(&["verify", "--ring", ring, m, &canon]);
        assert_eq!(o.status.code(), Some(0));
    }
}

#[test]
fn verify_examples() {
    let word = r#"[{"side":"L","param":"0"},{"side":"U","param":"1"},{"side":"L","param":"1"},{"side":"U","param":"1"}]"#;
    let o = sl2gen(&["verify", "--ring", "Q", "[[2,3],[1,2]]", word]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o), "verified: true\n");
    let o = with_stdin(&["verify", "--ring", "Q", "-", word], b"[[2,3],[1,2]]\n");
    assert_eq!(o.status.code(), Some(0));
    let o = sl2gen(&["verify", "--ring", "Q", "[[2,3],[1,2]]", r#"{"letters":[{"side":"U","param":"1"}]}"#]);
    assert_eq!(o.status.code(), Some(1));
    assert_eq!(stdout(&o), "verified: false\n");
    let o = sl2gen(&["verify", "--ring", "Q", "[[1,0],[0,1]]", "[]"]);
    assert_eq!(o.status.code(), Some(0));
    let o = sl2gen(&["verify", "--ring", "Q", "-", "-"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn chains() {
    let o = sl2gen(&["chain", "--ring", "Q", "7", "5"]);
    assert_eq!(stdout(&o), "k: 3\nq: [1, 2, 2]\nr: [2, 1, 0]\n");
    let o = sl2gen(&["chain", "--ring", "Q[1/11]", "--format", "json", "4", "7"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["r"].as_array().unwrap().last().unwrap(), "0");
    assert_eq!(v["q"].as_array().unwrap().len(), 2);
    let o = sl2gen(&["chain", "--ring", "Q", "6", "-4"]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn oracle() {
    let o = sl2gen(&["oracle", "--ring", "Q", "--max-len", "4", "[[0,1],[-1,0]]"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(field(&stdout(&o), "length"), "3");
    let o = sl2gen(&["oracle", "--ring", "Q[1/5]", "--max-len", "3", "--params", "5,1/5", "--format", "json", "[[1,0],[-5,1]]"]);
    let v: Value = serde_json::from_slice(&o.stdout).unwrap();
    assert_eq!(v["length"], Value::Null);
    let o = sl2gen(&["oracle", "--ring", "Q[1/5]", "--max-len", "3", "--params", "5,-5,1/5", "[[1,0],[-5,1]]"]);
    assert_eq!(field(&stdout(&o), "length"), "1");
}

#[test]
fn stats_csv() {
    let o = sl2gen(&["stats", "--ring", "Q[1/11]", "--count", "0"]);
    assert_eq!(stdout(&o), "metric,value,count\n");

    let args = ["stats", "--ring", "Q[1/11]", "--count", "100", "--seed", "7"];
    let a = sl2gen(&args);
    assert_eq!(a.status.code(), Some(0));
    let csv = stdout(&a);
    assert!(csv.contains("status,verified,100\n"), "{csv}");
    assert_eq!(csv, stdout(&sl2gen(&args)));
}

#[test]
fn stats_support_within_max_k() {
    let max_k = 8;
    let o = sl2gen(&["stats", "--ring", "Q(sqrt 2)", "--count", "100", "--seed", "7", "--max-k", "8", "--escalate", "0"]);
    let csv = stdout(&o);
    let mut total = 0;
    for line in csv.lines().filter(|l| l.starts_with("raw_length,")) {
        let f: Vec<&str> = line.split(',').collect();
        assert!(f[1].parse::<usize>().unwrap() <= max_k + 2);
        total += f[2].parse::<u64>().unwrap();
    }
    assert_eq!(total, 100);
    assert!(csv.contains("status,verified,100\n"));
}
