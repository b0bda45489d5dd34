use std::process::{Command, Output};

use serde_json::Value;

fn qcrypt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_qcrypt")).args(args).env_remove("QCRYPT_SEED").output().expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = qcrypt(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("json output")
}

fn num(v: &Value, key: &str) -> f64 {
    v[key].as_f64().unwrap_or_else(|| panic!("missing {key} in {v}"))
}

#[test]
fn tsirelson_output() {
    let v = json(&["tsirelson"]);
    assert_eq!(num(&v, "value"), 2.8284271);
    assert_eq!(v["certificate"], "optimal");
}

#[test]
fn clifford_uncertainty_output() {
    let v = json(&["uncertainty", "--clifford", "--n", "1", "--k", "3"]);
    assert_eq!(num(&v, "bound"), 0.6666667);
    assert!(num(&v, "achieved") <= num(&v, "bound") + 1e-3);
}

#[test]
fn ot_tradeoff_output() {
    let v = json(&["ot-tradeoff", "--r", "0.9", "--p-error", "0.01", "--n", "500", "--ell", "1"]);
    assert!(num(&v, "bound") > 0.0);
    assert!(v["secure"].is_boolean());
    assert_eq!(num(&v, "delta_max"), 0.95);

    let csv = qcrypt(&["ot-tradeoff", "--r", "0.5", "--sweep", "--format", "csv"]);
    let text = String::from_utf8(csv.stdout).unwrap();
    let header = text.lines().next().unwrap();
    for col in ["r", "p_error", "bound", "secure"] {
        assert!(header.split(',').any(|c| c == col), "{header}");
    }
    assert_eq!(text.lines().count(), 22);
}

#[test]
fn suites_listing() {
    let v = json(&["suites"]);
    let rows = v["rows"].as_array().unwrap();
    assert!(rows.len() >= 12);
    let names: Vec<&str> = rows.iter().map(|r| r["name"].as_str().unwrap()).collect();
    assert!(names.contains(&"chained-chsh"));
    assert!(names.contains(&"pistar-and"));
}

#[test]
fn exit_code_two_on_validation_errors() {
    for args in [
        &["chained-chsh", "--bogus"][..],
        &["game", "--builtin", "nope"],
        &["pistar", "--function", "and", "--n", "9"],
        &["mub", "--family", "pauli", "--d", "6"],
        &["qbsc", "--n", "-1", "--a", "1", "--b", "1"],
        &["rac-bound", "--settings", "2", "--outcomes", "2", "--p", "1.5"],
        &["ot-tradeoff", "--r", "2"],
        &["game", "--file", "/nonexistent/game.json"],
        &[],
    ] {
        let out = qcrypt(args);
        assert_eq!(out.status.code(), Some(2), "{args:?}");
        assert!(out.stdout.is_empty(), "{args:?}");
        assert!(!out.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn bad_seed_env_rejected() {
    let out = Command::new(env!("CARGO_BIN_EXE_qcrypt")).arg("tsirelson").env("QCRYPT_SEED", "abc").output().unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn deterministic_output() {
    for args in [
        &["uncertainty", "--family", "latin", "--s", "3", "--m", "3", "--restarts", "8"][..],
        &["ot-sim", "--trials", "50", "--attack", "breidbart"],
        &["ot-sim", "--trials", "50", "--n", "64", "--p-erase", "0.5", "--p-error", "0.02"],
        &["locking", "--family", "pauli", "--d", "3", "--m", "3"],
    ] {
        let a = qcrypt(args);
        let b = qcrypt(args);
        assert!(a.status.success(), "{args:?}");
        assert_eq!(a.stdout, b.stdout, "{args:?}");
    }
}

#[test]
fn seed_env_matches_flag() {
    let args = ["ot-sim", "--trials", "40", "--attack", "breidbart"];
    let env = Command::new(env!("CARGO_BIN_EXE_qcrypt")).args(args).env("QCRYPT_SEED", "77").output().unwrap();
    let mut with_flag = args.to_vec();
    with_flag.extend(["--seed", "77"]);
    let flag = qcrypt(&with_flag);
    assert_eq!(env.stdout, flag.stdout);
    let overridden =
        Command::new(env!("CARGO_BIN_EXE_qcrypt")).args(&with_flag).env("QCRYPT_SEED", "1").output().unwrap();
    assert_eq!(overridden.stdout, flag.stdout);
}

#[test]
fn output_file_and_formats() {
    let dir = std::env::temp_dir().join(format!("qcrypt-cli-test-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("out.csv");
    let out = qcrypt(&["chained-chsh", "--format", "csv", "--output", path.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().next(), Some("certificate,closed_form,n,value"));
    assert_eq!(text.lines().count(), 8);
    std::fs::remove_dir_all(&dir).unwrap();

    let pretty = qcrypt(&["tsirelson", "--format", "pretty"]);
    assert!(String::from_utf8(pretty.stdout).unwrap().contains("certificate  optimal"));
}

#[test]
fn file_inputs() {
    let dir = std::env::temp_dir().join(format!("qcrypt-cli-files-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let game = dir.join("chsh.json");
    std::fs::write(
        &game,
        r#"{"nS": 2, "nT": 2, "pi": [[0.25, 0.25], [0.25, 0.25]],
            "V": {"c0": [[1, 1], [1, 0]], "c1": [[0, 0], [0, 1]]}}"#,
    )
    .unwrap();
    let v = json(&["game", "--file", game.to_str().unwrap()]);
    assert_eq!(num(&v, "classical"), 0.75);
    assert_eq!(num(&v, "quantum"), 0.8535534);

    let f = dir.join("f.json");
    std::fs::write(&f, r#"{"n": 2, "table": [0, 0, 0, 1]}"#).unwrap();
    let v = json(&["pistar", "--function-file", f.to_str().unwrap(), "--n", "2"]);
    assert_eq!(num(&v, "star"), json(&["pistar", "--function", "and", "--n", "2"])["star"].as_f64().unwrap());

    let sq = dir.join("sq.txt");
    std::fs::write(&sq, "1 2 3\n2 3 1\n3 1 2\n").unwrap();
    let v = json(&["mub", "--family", "latin", "--latin-file", sq.to_str().unwrap(), "--m", "3"]);
    assert_eq!(v["unbiased"], true);
    assert_eq!(v["d"], 9);
    std::fs::remove_dir_all(&dir).unwrap();
}

/// Each library module's headline result is produced by exactly one subcommand.
#[test]
fn coverage_audit() {
    let headline: &[(&str, &[&str], &str)] = &[
        ("matcore", &["mub", "--family", "standard", "--n", "2", "--m", "3"], "worst_deviation"),
        ("entropy", &["rac-bound", "--settings", "3", "--outcomes", "2", "--p", "0.85"], "bound_bits"),
        ("sdpsolve", &["tsirelson"], "certificate"),
        ("games", &["game", "--builtin", "chained:3"], "quantum"),
        ("mubclifford", &["mub", "--family", "pauli", "--d", "5", "--m", "6"], "unbiased"),
        ("uncertainty", &["uncertainty", "--clifford", "--n", "2", "--k", "5", "--collision"], "achieved"),
        ("pistar", &["pistar", "--function", "xor", "--n", "2"], "pistar"),
        ("locking", &["locking", "--family", "standard", "--n", "2", "--m", "3"], "tight"),
        ("noisyot", &["ot-tradeoff", "--r", "0.5"], "bound"),
    ];
    let help = String::from_utf8(qcrypt(&["--help"]).stdout).unwrap();
    let listed: Vec<&str> = help
        .lines()
        .skip_while(|l| !l.starts_with("Commands:"))
        .skip(1)
        .take_while(|l| l.starts_with("  "))
        .filter_map(|l| l.split_whitespace().next())
        .filter(|c| *c != "help")
        .collect();
    let expected = [
        "tsirelson",
        "chained-chsh",
        "game",
        "mub",
        "uncertainty",
        "pistar",
        "locking",
        "qbsc",
        "ot-tradeoff",
        "ot-sim",
        "rac-bound",
        "suites",
    ];
    assert_eq!(listed, expected);

    let mut seen = Vec::new();
    for (module, args, key) in headline {
        let v = json(args);
        assert!(!v[*key].is_null(), "{module}: {key} missing");
        seen.push(*module);
    }
    for (_, _, module) in qcrypt::SUITES {
        assert!(seen.contains(module), "{module} has no subcommand");
    }
    for cmd in expected {
        let out = qcrypt(&[cmd, "--help"]);
        assert!(out.status.success(), "{cmd}");
        assert!(String::from_utf8_lossy(&out.stdout).contains("CSV columns"), "{cmd}");
    }
}
