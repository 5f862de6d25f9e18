use std::process::{Command, Output};

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_cycleguess"))
        .args(args)
        .env_remove("CYCLEGUESS_BUDGET")
        .env_remove("CYCLEGUESS_FORMAT")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(args: &[&str]) -> (i32, serde_json::Value) {
    let mut full = vec!["--format", "structured"];
    full.extend_from_slice(args);
    let o = run(&full);
    let v = serde_json::from_slice(&o.stdout).expect("structured output is json");
    (o.status.code().unwrap(), v)
}

#[test]
fn fcp_counts() {
    let o = run(&["fcp", "--n", "7", "--s", "6"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("fix=432"), "{out}");
    assert!(out.contains("formula check PASS"));

    let o = run(&["fcp", "--n", "5", "--s", "9"]);
    let out = stdout(&o);
    assert!(out.contains("fix=243") && out.contains("perfect square: optimal"), "{out}");
}

#[test]
fn fcp_even_cycle_is_usage_error() {
    let o = run(&["fcp", "--n", "4", "--s", "2"]);
    assert_eq!(o.status.code(), Some(2));
    let (code, v) = json(&["fcp", "--n", "4", "--s", "2"]);
    assert_eq!(code, 2);
    assert_eq!(v["status"], "usage");
}

#[test]
fn budget_refusal_exit_code() {
    let (code, v) = json(&["--budget", "1000", "fcp", "--n", "9", "--s", "6"]);
    assert_eq!(code, 3);
    assert_eq!(v["status"], "budget");
    assert!(v["result"]["error"].as_str().unwrap().contains("10077696"));
}

#[test]
fn budget_from_environment() {
    let o = Command::new(env!("CARGO_BIN_EXE_cycleguess"))
        .args(["fcp", "--n", "9", "--s", "6"])
        .env("CYCLEGUESS_BUDGET", "1000")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(3));
    // flags beat the environment
    let o = Command::new(env!("CARGO_BIN_EXE_cycleguess"))
        .args(["--budget", "100000000", "fcp", "--n", "5", "--s", "6"])
        .env("CYCLEGUESS_BUDGET", "10")
        .output()
        .unwrap();
    assert!(o.status.success());
}

#[test]
fn bad_tolerance_rejected() {
    assert_eq!(run(&["--tolerance", "0.5", "fcp", "--n", "5", "--s", "2"]).status.code(), Some(2));
}

#[test]
fn round_down() {
    let (code, v) = json(&["fcp", "--n", "7", "--s", "9", "--restrict", "8"]);
    assert_eq!(code, 0);
    assert!(v["result"]["fix"].as_u64().unwrap() >= 182);
    assert_eq!(v["result"]["round_down_check"], true);
    assert_eq!(v["result"]["round_down_bound"].as_f64().unwrap(), 181.019335984);
}

#[test]
fn confusion_alpha() {
    let o = run(&["confusion", "--cycle", "5", "--s", "2", "--alpha"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("alpha=5"));
    let (_, v) = json(&["confusion", "--cycle", "5", "--s", "2"]);
    assert_eq!(v["result"]["alpha"]["witness"].as_array().unwrap().len(), 5);
    assert_eq!(v["result"]["chi"]["upper"], 8);
    assert_eq!(v["result"]["identity_check"], true);
}

#[test]
fn confusion_graph_file() {
    let dir = std::env::temp_dir().join(format!("cycleguess-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("k2.txt");
    std::fs::write(&path, "# K_2\n2\n1 2\n").unwrap();
    let (code, v) = json(&["confusion", "--graph", path.to_str().unwrap(), "--s", "2"]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["alpha"]["alpha"], 2);
    assert_eq!(v["result"]["chi"]["upper"], 2);
    assert_eq!(v["result"]["product_check"], true);
}

#[test]
fn index_roundtrip() {
    let o = run(&["index", "roundtrip", "--n", "5", "--s", "6"]);
    assert!(o.status.success());
    assert!(stdout(&o).contains("6^5 = 7776 colourings, 0 failures, 108 distinct messages"));
}

#[test]
fn index_encode_decode() {
    let o = run(&["index", "encode", "--n", "5", "--s", "6", "--colouring", "5,0,0,0,0"]);
    assert_eq!(stdout(&o).trim(), "phi=1,0 psi=0,0 seam=2");
    let packed = stdout(&run(&["index", "encode", "--n", "5", "--s", "6", "--colouring", "5,0,0,0,0", "--packed"]));
    let o = run(&["index", "decode", "--n", "5", "--s", "6", "--vertex", "1", "--left", "0", "--right", "0", "--packed", packed.trim()]);
    assert_eq!(stdout(&o).trim(), "5");
    let o = run(&[
        "index", "decode", "--n", "5", "--s", "6", "--vertex", "1", "--left", "0", "--right", "0", "--broadcast",
        "phi=1,0 psi=0,0 seam=2",
    ]);
    assert_eq!(stdout(&o).trim(), "5");
}

#[test]
fn constants() {
    let o = run(&["constants", "--s", "2"]);
    assert!(o.status.success());
    let out = stdout(&o);
    assert!(out.contains("delta1 = 0.5"), "{out}");
    assert!(out.contains("N = "));
    let (code, v) = json(&["constants", "--s", "4"]);
    assert_eq!(code, 4);
    assert_eq!(v["status"], "infeasible");
}

#[test]
fn classify_builtins() {
    let (_, v) = json(&["classify", "--s", "2", "--builtin", "xor"]);
    assert_eq!(v["result"]["is_flat"], true);
    assert_eq!(v["result"]["is_semi_perfect"], false);
    assert_eq!(v["result"]["cond_mi"], 1.0);
    let (_, v) = json(&["classify", "--s", "6", "--builtin", "pi"]);
    assert_eq!(v["result"]["is_perfect"], true);
}

#[test]
fn entropy_on_written_protocol() {
    let dir = std::env::temp_dir().join(format!("cycleguess-cli-e-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("p.txt");
    assert!(run(&["fcp", "--n", "7", "--s", "4", "--out", path.to_str().unwrap()]).status.success());
    let (code, v) = json(&["entropy", path.to_str().unwrap()]);
    assert_eq!(code, 0);
    assert_eq!(v["result"]["fix"], 128);
    for h in v["result"]["per_index"].as_array().unwrap() {
        assert_eq!(h.as_f64().unwrap(), 1.0);
    }
}

#[test]
fn structured_output_is_deterministic() {
    let args = ["--threads", "1", "confusion", "--cycle", "5", "--s", "2"];
    let mut a = vec!["--format", "structured"];
    a.extend_from_slice(&args);
    let first = run(&a).stdout;
    let mut b = vec!["--format", "structured", "--threads", "4"];
    b.extend_from_slice(&args[2..]);
    assert_eq!(first, run(&a).stdout);
    assert_eq!(first, run(&b).stdout);
    let text = String::from_utf8(first).unwrap();
    assert!(text.trim_start().starts_with("{\n  \"schema\": \"cycleguess/v1\""));
}
