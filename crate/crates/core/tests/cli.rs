use menu_commit::cli::run;
use serde_json::Value;

const G1: &str = concat!(env!("CARGO_MANIFEST_DIR"), "/data/g1.json");

fn call(args: &[&str]) -> (i32, String) {
    let mut argv = vec!["menu-commit"];
    argv.extend_from_slice(args);
    run(argv)
}

fn result(args: &[&str]) -> Value {
    let (code, out) = call(args);
    assert_eq!(code, 0, "{out}");
    let doc: Value = serde_json::from_str(&out).unwrap();
    assert_eq!(doc["inputs_digest"].as_str().unwrap().len(), 64);
    doc["result"].clone()
}

fn tmp(name: &str, text: &str) -> String {
    let dir = std::env::temp_dir().join(format!("menu-commit-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_string_lossy().into_owned()
}

#[test]
fn stackelberg_on_g1() {
    let r = result(&["stackelberg", "--game", G1, "--type", "0"]);
    assert!((r["value"].as_f64().unwrap() - 1.0).abs() < 1e-9);
    assert!((r["csp"][1].as_f64().unwrap() - 1.0).abs() < 1e-9);
}

#[test]
fn commit_nr_on_g1() {
    let r = result(&["commit-nr", "--game", G1]);
    assert!((r["value"].as_f64().unwrap() - 193.8 / 28.0).abs() < 1e-6);
    assert!((r["nsr_baseline"].as_f64().unwrap() - 3.0).abs() < 1e-9);
    let mm = result(&["commit-nr", "--game", G1, "--objective", "maximin"]);
    assert!((mm["value"].as_f64().unwrap() - 193.8 / 28.0).abs() < 1e-6);
}

#[test]
fn oracles_on_g1() {
    let nr = result(&["oracle", "nr", "--game", G1, "--resolution", "0.25"]);
    let v = nr["value"].as_f64().unwrap();
    assert!((4.5..=193.8 / 28.0).contains(&v));
    let mm = result(&["oracle", "maximin", "--game", G1]);
    assert!((mm["value"].as_f64().unwrap() - 7.05).abs() < 1e-9);
    let a = tmp("argmax.json", r#"{"profiles": [[0,0,0,0,1,0]]}"#);
    let valid = result(&["oracle", "menu-validity", "--game", G1, "--assignment", &a]);
    assert_eq!(valid["valid"], Value::Bool(true));
}

#[test]
fn check_menu_reports_a_certificate_below_the_cap() {
    let a = tmp("low.json", r#"{"profiles": [[0,0,1,0,0,0]]}"#);
    let r = result(&["check-menu", "--game", G1, "--assignment", &a]);
    assert_eq!(r["approachability"]["outcome"], Value::String("NotApproachable".into()));
    assert!(r["approachability"]["certificate"]["y"].is_array());
}

#[test]
fn commit_general_and_maximin_run() {
    let r = result(&["commit-general", "--game", G1, "--eps", "0.05"]);
    assert!(r["value_lower_bound"].as_f64().unwrap() >= 4.95);
    assert_eq!(r["status"], Value::String("Converged".into()));
    let m = result(&["maximin", "--game", G1, "--T", "500", "--adversary", "aborter"]);
    assert!((m["final_v"].as_f64().unwrap() - 7.05).abs() < 1e-9);
}

#[test]
fn output_is_byte_identical_across_runs() {
    for args in [
        vec![
            "simulate",
            "--game",
            G1,
            "--T",
            "300",
            "--adversary",
            "random",
            "--seed",
            "7",
            "--learner",
            "nsr",
        ],
        vec![
            "maximin",
            "--game",
            G1,
            "--T",
            "300",
            "--adversary",
            "random",
            "--seed",
            "3",
        ],
        vec!["commit-general", "--game", G1, "--cuts"],
    ] {
        assert_eq!(call(&args), call(&args));
    }
    let a = call(&[
        "simulate",
        "--game",
        G1,
        "--T",
        "50",
        "--adversary",
        "random",
        "--seed",
        "1",
    ]);
    let b = call(&[
        "simulate",
        "--game",
        G1,
        "--T",
        "50",
        "--adversary",
        "random",
        "--seed",
        "2",
    ]);
    assert_ne!(a.1, b.1);
}

#[test]
fn streaming_emits_one_line_per_round() {
    let (code, out) = call(&[
        "simulate",
        "--game",
        G1,
        "--T",
        "25",
        "--stream",
        "--learner",
        "maximin",
        "--adversary",
        "aborter",
    ]);
    assert_eq!(code, 0);
    let lines: Vec<&str> = out
        .lines()
        .take_while(|l| l.starts_with('{') && l.ends_with('}'))
        .collect();
    assert_eq!(lines.len(), 25);
    let first: Value = serde_json::from_str(lines[0]).unwrap();
    assert_eq!(first["t"], 0);
}

#[test]
fn menu_learner_reads_a_menu_file() {
    let menu = tmp(
        "menu.json",
        r#"{"constraints": [{"normal": [0,1,0,1,3,0], "rhs": 1.5}]}"#,
    );
    let r = result(&[
        "simulate",
        "--game",
        G1,
        "--learner",
        "menu",
        "--menu",
        &menu,
        "--T",
        "2000",
        "--adversary",
        "random",
    ]);
    assert!(r["menu_violation"].as_f64().unwrap() < 0.2);
    let (code, _) = call(&["simulate", "--game", G1, "--learner", "menu"]);
    assert_eq!(code, 2);
}

#[test]
fn errors_are_machine_readable() {
    let bad = tmp("bad.json", "{\"m\": 2");
    for args in [
        vec!["commit-nr", "--game", bad.as_str()],
        vec!["commit-nr", "--game", "/nonexistent/game.json"],
        vec!["stackelberg", "--game", G1, "--type", "4"],
        vec!["frobnicate"],
        vec!["oracle", "nr", "--game", G1, "--resolution", "0.001"],
    ] {
        let (code, out) = call(&args);
        assert_eq!(code, 2, "{args:?}");
        let doc: Value = serde_json::from_str(&out).unwrap();
        assert!(doc["error"]["kind"].is_string());
        assert!(doc["error"]["message"].is_string());
    }
    let unnormalized = tmp(
        "prior.json",
        r#"{"m":1,"n":1,"u_L":[[0]],"types":[{"u_O":[[0]],"alpha":0.5}]}"#,
    );
    let (code, out) = call(&["commit-nr", "--game", &unnormalized]);
    assert_eq!(code, 2);
    assert!(out.contains("InvalidInput"));
    let (code, out) = call(&["--help"]);
    assert_eq!(code, 0);
    assert!(out.contains("commit-nr"));
}
