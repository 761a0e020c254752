use std::path::{Path, PathBuf};
use std::process::Command;

use serde_json::Value;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

impl Run {
    fn json(&self) -> Value {
        serde_json::from_str(&self.stdout).unwrap_or_else(|e| panic!("{e}: {}", self.stdout))
    }
}

fn data(name: &str) -> String {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn scratch(name: &str) -> PathBuf {
    let dir = Path::new(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

fn run_env(args: &[&str], tol_env: Option<&str>) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_markovkit"));
    cmd.args(args).env_remove("MARKOVKIT_TOL");
    if let Some(t) = tol_env {
        cmd.env("MARKOVKIT_TOL", t);
    }
    let out = cmd.output().unwrap();
    Run {
        code: out.status.code().unwrap(),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn run(args: &[&str]) -> Run {
    run_env(args, None)
}

fn num(v: &Value, key: &str) -> f64 {
    v[key]
        .as_f64()
        .unwrap_or_else(|| panic!("missing `{key}` in {v}"))
}

#[test]
fn reference_reports() {
    let r = run(&["qcmi", &data("ghz.json"), "--split", "A|B|C"]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let v = r.json();
    assert_eq!(v["schema"], "markovkit/1");
    assert!((num(&v, "qcmi_bits") - 1.0).abs() < 1e-9);

    let v = run(&["cost", &data("bell_ac.json")]).json();
    assert!((num(&v, "m_dec_bits") - 2.0).abs() < 1e-9);
    assert!((num(&v, "qcmi_lower") - 2.0).abs() < 1e-9);

    let v = run(&["markov-check", &data("product.json"), "--cond", "B"]).json();
    assert_eq!(v["markov"], true);
    assert!(num(&v, "qcmi_bits").abs() < 1e-9);
}

#[test]
fn error_objects_and_exit_codes() {
    let r = run(&["markov-decompose", &data("ghz.json")]);
    assert_eq!(r.code, 2);
    assert_eq!(r.json()["error"]["kind"], "verification");

    let bad = scratch("bad.json");
    std::fs::write(
        &bad,
        r#"{"systems":[{"name":"A","dim":2}],"vector":[[1,0]]}"#,
    )
    .unwrap();
    let r = run(&["qcmi", bad.to_str().unwrap(), "--split", "A||"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.json()["error"]["kind"], "validation");

    let r = run(&["frobnicate"]);
    assert_eq!(r.code, 1);
    assert_eq!(r.json()["error"]["exit_code"], 1);

    let r = run(&["qcmi", "/nonexistent/state.json"]);
    assert_eq!(r.code, 1);

    let r = run(&["qcmi", &data("ghz.json"), "--split", "A|B|D"]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("D"));

    let r = run(&["markovianize", &data("product.json")]);
    assert_eq!(r.code, 1, "mixed input to markovianize");
}

#[test]
fn tolerance_precedence() {
    let slightly = scratch("slightly.json");
    let text = run(&["random-state", "--rank", "8", "--seed", "5"]).stdout;
    let mut v: Value = serde_json::from_str(&text).unwrap();
    // Blend with the maximally mixed state until the QCMI is small but nonzero.
    let m = v["matrix"].as_array_mut().unwrap();
    for (i, row) in m.iter_mut().enumerate() {
        for (j, z) in row.as_array_mut().unwrap().iter_mut().enumerate() {
            let re = z[0].as_f64().unwrap() * 1e-3 + if i == j { (1.0 - 1e-3) / 8.0 } else { 0.0 };
            let im = z[1].as_f64().unwrap() * 1e-3;
            *z = serde_json::json!([re, im]);
        }
    }
    std::fs::write(&slightly, v.to_string()).unwrap();
    let path = slightly.to_str().unwrap();
    let q = num(&run(&["qcmi", path]).json(), "qcmi_bits");
    assert!(q > 1e-9 && q < 1e-4, "{q}");

    let default = run(&["markov-check", path]).json();
    assert_eq!(default["markov"], false);
    let env = run_env(&["markov-check", path], Some("1e-3")).json();
    assert_eq!(env["markov"], true);
    let flag = run_env(&["markov-check", path, "--tol", "1e-9"], Some("1e-3")).json();
    assert_eq!(flag["markov"], false);
    let r = run_env(&["qcmi", path], Some("abc"));
    assert_eq!(r.code, 1);
}

#[test]
fn output_path_and_generated_states() {
    let state = scratch("pure.json");
    let r = run(&[
        "random-state",
        "--pure",
        "--dims",
        "2,3,2",
        "--seed",
        "9",
        "-o",
        state.to_str().unwrap(),
    ]);
    assert_eq!(r.code, 0);
    assert!(r.stdout.is_empty());
    let info = run(&["info", state.to_str().unwrap()]).json();
    assert_eq!(info["input"], "vector");
    assert_eq!(info["total_dim"], 12);
    assert!((num(&info, "purity") - 1.0).abs() < 1e-12);

    let m = run(&[
        "markovianize",
        state.to_str().unwrap(),
        "--n",
        "1",
        "--emit-ensemble",
    ])
    .json();
    assert!(num(&m, "qcmi_out") <= 1e-8);
    let ens = &m["ensemble"];
    let k = ens["unitaries"].as_array().unwrap().len() as f64;
    assert!((num(ens, "cost_bits") - k.log2()).abs() < 1e-12);
    assert!(num(&m, "cost_bits_per_copy") >= num(&m, "m_dec_bits") - 1e-9);
}

#[test]
fn ki_and_decomposition_reports() {
    let v = run(&["ki", &data("ghz.json")]).json();
    assert_eq!(v["dims"]["zero"], 2);
    let p: Vec<f64> = v["blocks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|b| num(b, "p"))
        .collect();
    assert!(p.iter().all(|x| (x - 0.5).abs() < 1e-12));

    let v = run(&["markov-decompose", &data("product.json")]).json();
    assert!(num(&v, "recovery_error_from_bc") < 1e-8);
    assert!(num(&v, "recovery_error_from_ab") < 1e-8);
    let w: f64 = v["weights"]
        .as_array()
        .unwrap()
        .iter()
        .map(|x| x.as_f64().unwrap())
        .sum();
    assert!((w - 1.0).abs() < 1e-12);

    let v = run(&[
        "recover",
        &data("ghz.json"),
        "--mode",
        "plain",
        "--emit-channel",
    ])
    .json();
    assert!((num(&v, "error") - 1.0).abs() < 1e-9);
    assert!(num(&v["channel"], "completeness_defect") <= 1e-8);
    let v = run(&[
        "recover",
        &data("ghz.json"),
        "--mode",
        "rotated",
        "--t",
        "-0.5",
        "--from",
        "ab",
    ])
    .json();
    assert_eq!(v["mode"], "rotated");
    assert_eq!(num(&v, "t"), -0.5);
}

#[test]
fn harness_commands_are_independent_of_jobs() {
    for args in [
        vec!["verify", "lemma1", "--trials", "12"],
        vec!["verify", "appendix-a", "--trials", "12"],
        vec!["verify", "lemma6", "--trials", "6", "--n", "2"],
        vec!["probe-conjecture", "--trials", "8", "--format", "csv"],
    ] {
        let one = run(&args);
        let mut more = args.clone();
        more.extend(["--jobs", "4"]);
        let four = run(&more);
        assert_eq!(one.code, 0, "{args:?}: {}", one.stdout);
        assert_eq!(one.stdout, four.stdout, "{args:?}");
    }
    let csv = run(&["probe-conjecture", "--trials", "3", "--format", "csv"]).stdout;
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "trial,eps_ab,eps_bc");
    assert_eq!(lines.len(), 4);
    assert!(lines[1].starts_with("0,"));
}

#[test]
fn measurement_simulation_report() {
    let v = run(&["measure-sim", &data("ghz.json"), "--n", "2"]).json();
    assert_eq!(v["outcomes"], 4);
    assert!(num(&v, "completeness_defect") <= 1e-10);
    assert!(num(&v, "min_corrected_fidelity") >= 1.0 - 1e-10);
    assert!(num(&v, "mutual_info_av") <= num(&v, "mutual_info_bound") + 1e-9);
}
