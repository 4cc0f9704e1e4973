//! Drives the `factor-bench` binary the way a script would.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_factor-bench"))
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/golden")
        .join(name)
}

fn scratch(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("factor-bench-{tag}-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn run(cmd: &mut Command) -> Output {
    let out = cmd.output().expect("spawn factor-bench");
    if !out.status.success() {
        eprintln!("stderr: {}", String::from_utf8_lossy(&out.stderr));
    }
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn ex1_attacks_from_golden_files() {
    let out = run(bin()
        .args(["attack", "--method", "lindecomp", "--json", "--public"])
        .arg(golden("ex1_public_key.json"))
        .arg("--ciphertext")
        .arg(golden("ex1_ciphertext.json"))
        .arg("--expect")
        .arg(golden("ex1_message.json")));
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.contains(r#""recovered":[[2,0],[0,4]]"#), "{text}");
    assert!(text.contains(r#""success":true"#));
    assert!(text.contains(r#""span_dimension":4"#));

    let out = run(bin()
        .args(["attack", "--method", "span", "--public"])
        .arg(golden("ex1_public_key.json"))
        .arg("--ciphertext")
        .arg(golden("ex1_ciphertext.json"))
        .arg("--expect")
        .arg(golden("ex1_message.json")));
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("matches expected:  yes"));

    let out = run(bin()
        .args(["attack", "--method", "kex", "--json", "--instance"])
        .arg(golden("ex1_instance.json"))
        .arg("--token-a")
        .arg(golden("ex1_token_a.json"))
        .arg("--token-b")
        .arg(golden("ex1_token_b.json"))
        .arg("--expect")
        .arg(golden("ex1_shared_key.json")));
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains(r#""recovered":[[0,3],[2,1]]"#));
}

#[test]
fn wrong_expectation_exits_2() {
    let out = run(bin()
        .args(["attack", "--method", "lindecomp", "--public"])
        .arg(golden("ex1_public_key.json"))
        .arg("--ciphertext")
        .arg(golden("ex1_ciphertext.json"))
        .arg("--expect")
        .arg(golden("ex1_shared_key.json")));
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn bad_input_exits_3() {
    let dir = scratch("bad");
    let bad = dir.join("pk.json");
    std::fs::write(
        &bad,
        r#"{"p":7,"n":2,"g":[[1,9],[0,1]],"h":[[1,0],[1,1]],"c":[[0,2],[3,1]]}"#,
    )
    .unwrap();
    let out = run(bin()
        .args(["attack", "--method", "lindecomp", "--public"])
        .arg(&bad)
        .arg("--ciphertext")
        .arg(golden("ex1_ciphertext.json")));
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&out.stderr).contains("g[0][1]"));

    let out = run(bin().args([
        "trials", "--p", "5", "--n", "6", "--method", "span", "--count", "3",
    ]));
    assert_eq!(out.status.code(), Some(3));

    let out = run(bin().args(["trials", "--no-such-flag"]));
    assert_eq!(out.status.code(), Some(3));

    let out = run(bin().args(["gen", "--p", "9"]));
    assert_eq!(out.status.code(), Some(3));
}

#[test]
fn full_pipeline_round_trip() {
    let dir = scratch("pipeline");
    let p = |name: &str| dir.join(name);
    let seed = ["--seed", "17", "--p", "1009", "--n", "4"];
    assert!(
        run(bin().args(seed).args(["gen", "--out"]).arg(p("inst.json")))
            .status
            .success()
    );
    assert!(run(bin()
        .args(seed)
        .args(["keygen", "--instance"])
        .arg(p("inst.json"))
        .arg("--public-out")
        .arg(p("pk.json"))
        .arg("--private-out")
        .arg(p("sk.json")))
    .status
    .success());
    assert!(run(bin()
        .args(seed)
        .args(["encrypt", "--public"])
        .arg(p("pk.json"))
        .arg("--out")
        .arg(p("ct.json"))
        .arg("--message-out")
        .arg(p("m.json")))
    .status
    .success());
    let out = run(bin()
        .args(["decrypt", "--private"])
        .arg(p("sk.json"))
        .arg("--ciphertext")
        .arg(p("ct.json")));
    assert_eq!(
        stdout(&out).trim(),
        std::fs::read_to_string(p("m.json")).unwrap().trim()
    );

    for method in ["span", "lindecomp"] {
        let out = run(bin()
            .args(["attack", "--method", method, "--public"])
            .arg(p("pk.json"))
            .arg("--ciphertext")
            .arg(p("ct.json"))
            .arg("--expect")
            .arg(p("m.json")));
        assert_eq!(out.status.code(), Some(0), "{method}");
    }

    assert!(run(bin()
        .args(seed)
        .args(["kex", "--instance"])
        .arg(p("inst.json"))
        .arg("--token-a-out")
        .arg(p("a.json"))
        .arg("--token-b-out")
        .arg(p("b.json"))
        .arg("--key-out")
        .arg(p("k.json")))
    .status
    .success());
    let out = run(bin()
        .args(["attack", "--method", "kex", "--instance"])
        .arg(p("inst.json"))
        .arg("--token-a")
        .arg(p("a.json"))
        .arg("--token-b")
        .arg(p("b.json"))
        .arg("--expect")
        .arg(p("k.json")));
    assert_eq!(out.status.code(), Some(0));

    // Same seed, same files.
    let again = run(bin().args(seed).arg("gen"));
    assert_eq!(
        stdout(&again).trim(),
        std::fs::read_to_string(p("inst.json")).unwrap().trim()
    );
}

#[test]
fn trials_json_summary() {
    let out = run(bin().args([
        "--seed", "3", "--json", "trials", "--count", "10", "--p", "101", "--n", "3",
    ]));
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["trials"], 10);
    for m in ["span", "lindecomp", "lindecomp-kex"] {
        assert_eq!(v["methods"][m]["successes"], 10, "{m}");
    }
}
