use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn samplekit(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_samplekit"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json_of(out: &Output) -> Value {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    serde_json::from_slice(&out.stdout).expect("stdout is one JSON document")
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn write_demo(dir: &Path) -> String {
    let path = dir.join("pop.csv");
    fs::write(&path, "value\n1\n2\n3\n1\n2\n3\n1\n2\n3\n").unwrap();
    path.to_string_lossy().into_owned()
}

#[test]
fn srs_example_matches_design_moments() {
    let dir = tempfile::tempdir().unwrap();
    let data = write_demo(dir.path());
    let v = json_of(&samplekit(&[
        "--json", "survey", "srs", "--data", &data, "--n", "3", "--reps", "100000", "--seed", "7",
    ]));
    let r = &v["result"];
    assert!((r["empirical_mean"].as_f64().unwrap() - 2.0).abs() < 0.01);
    assert!((r["empirical_variance"].as_f64().unwrap() - 1.0 / 6.0).abs() < 0.01);
    assert_eq!(r["analytic_variance"].as_f64().unwrap(), 1.0 / 6.0);
    assert_eq!(v["seed"], 7);
    assert_eq!(v["command"], "survey srs");
    assert_eq!(v["version"], env!("CARGO_PKG_VERSION"));
}

#[test]
fn pi_example() {
    let v = json_of(&samplekit(&["--json", "mc", "pi", "--n", "1000000", "--seed", "1"]));
    assert!((v["result"]["estimate"].as_f64().unwrap() - std::f64::consts::PI).abs() < 0.005);
}

#[test]
fn metropolis_example_moments() {
    let v = json_of(&samplekit(&[
        "--json",
        "mcmc",
        "metropolis",
        "--target",
        "normal",
        "--sigma",
        "2.38",
        "--n",
        "100000",
    ]));
    let r = &v["result"];
    assert!(r["mean"][0].as_f64().unwrap().abs() < 0.03);
    assert!((r["variance"][0].as_f64().unwrap() - 1.0).abs() < 0.03);
    assert_eq!(r["fit"]["passed"], true);
    assert_eq!(v["seed"], 0);
}

#[test]
fn human_summary_without_json() {
    let out = samplekit(&["mc", "pi", "--n", "1000"]);
    assert!(out.status.success());
    let text = String::from_utf8_lossy(&out.stdout);
    assert!(text.starts_with("mc pi\n") && text.contains("estimate:"));
}

#[test]
fn out_dir_artifacts_and_config_rerun() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a");
    let b = dir.path().join("b");
    let first = samplekit(&[
        "--out-dir",
        a.to_str().unwrap(),
        "--seed",
        "5",
        "mcmc",
        "slice",
        "--target",
        "mixture",
        "--n",
        "2000",
    ]);
    assert!(first.status.success(), "{}", stderr(&first));
    assert!(first.stdout.starts_with(b"mcmc slice"));
    assert!(stderr(&first).contains("wrote 3 artifacts"));
    for f in ["summary.json", "config.txt", "trace.csv"] {
        assert!(a.join(f).exists(), "{f}");
    }
    let config = fs::read_to_string(a.join("config.txt")).unwrap();
    assert!(config.contains("seed = 5\n") && config.contains("target = mixture\n"));

    let again = samplekit(&[
        "--config",
        a.join("config.txt").to_str().unwrap(),
        "--out-dir",
        b.to_str().unwrap(),
        "mcmc",
        "slice",
    ]);
    assert!(again.status.success(), "{}", stderr(&again));
    for f in ["summary.json", "config.txt", "trace.csv"] {
        assert_eq!(fs::read(a.join(f)).unwrap(), fs::read(b.join(f)).unwrap(), "{f}");
    }
}

#[test]
fn explicit_flags_override_config_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.txt");
    fs::write(&cfg, "n = 50\nseed = 9\n").unwrap();
    let v = json_of(&samplekit(&[
        "--json",
        "--config",
        cfg.to_str().unwrap(),
        "mc",
        "pi",
        "--n",
        "70",
    ]));
    assert_eq!(v["config"]["n"], "70");
    assert_eq!(v["seed"], 9);
}

#[test]
fn unknown_density_lists_valid_names() {
    let out = samplekit(&["mcmc", "metropolis", "--target", "gaussian"]);
    assert_eq!(out.status.code(), Some(1));
    let err = stderr(&out);
    for name in samplekit::density::DENSITY_NAMES {
        assert!(err.contains(name), "{name} missing from: {err}");
    }
}

#[test]
fn malformed_csv_names_the_line() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("bad.csv");
    fs::write(&path, "value\n1\n2\nthree\n").unwrap();
    let out = samplekit(&["survey", "srs", "--data", path.to_str().unwrap(), "--n", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("line 4"), "{}", stderr(&out));

    fs::write(&path, "value,stratum\n1,1\n2,\n").unwrap();
    let out = samplekit(&["survey", "stratified", "--data", path.to_str().unwrap(), "--n", "2"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(stderr(&out).contains("partial labeling"), "{}", stderr(&out));
}

#[test]
fn exit_codes() {
    assert_eq!(samplekit(&["--help"]).status.code(), Some(0));
    assert_eq!(samplekit(&["--version"]).status.code(), Some(0));
    assert_eq!(samplekit(&["mc", "pi"]).status.code(), Some(1), "missing --n");
    assert_eq!(samplekit(&["report", "x"]).status.code(), Some(1));
    assert_eq!(
        samplekit(&["survey", "srs", "--data", "/no/such/file.csv", "--n", "2"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        samplekit(&["survey", "srs", "--n", "10"]).status.code(),
        Some(1),
        "n > N"
    );
    // an envelope that is too small is only discovered while sampling
    let out = samplekit(&[
        "mc",
        "rejection",
        "--target",
        "triangular",
        "--proposal",
        "uniform:0,1",
        "--c",
        "1.5",
        "--n",
        "100",
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

#[test]
fn every_subcommand_runs() {
    let runs: &[&[&str]] = &[
        &["survey", "bootstrap", "--n", "3", "--reps", "100"],
        &[
            "survey",
            "snowball",
            "--nodes",
            "4",
            "--edges",
            "0-1,1-2,2-3",
            "--seeds",
            "0",
        ],
        &["mc", "inverse-cdf", "--quantile", "cauchy", "--n", "500"],
        &[
            "mc",
            "importance",
            "--target",
            "normal",
            "--proposal",
            "normal:0,2",
            "--n",
            "1000",
            "--h",
            "x",
        ],
        &[
            "mc",
            "calibrate-c",
            "--target",
            "triangular",
            "--proposal",
            "uniform:0,1",
        ],
        &["mcmc", "mh", "--n", "500"],
        &["mcmc", "gibbs", "--target", "bivariate-normal:0.5", "--n", "500"],
        &["mcmc", "hmc", "--n", "500"],
        &["mcmc", "adler", "--target", "bivariate-normal:0.5", "--n", "500"],
        &["mcmc", "ordered", "--target", "bivariate-normal:0.5", "--n", "500"],
        &["diag", "tradeoff", "--deltas", "1,10", "--n", "2000"],
        &["diag", "mixing", "--n", "2000"],
    ];
    for args in runs {
        let mut full = vec!["--json"];
        full.extend_from_slice(args);
        let v = json_of(&samplekit(&full));
        assert_eq!(v["command"], format!("{} {}", args[0], args[1]));
    }
}

#[test]
fn gibbs_rejects_non_gaussian_target() {
    let out = samplekit(&["mcmc", "gibbs", "--target", "triangular", "--n", "10"]);
    assert_eq!(out.status.code(), Some(1), "{}", stderr(&out));
}

#[test]
fn random_walk_scaling_csv() {
    let dir = tempfile::tempdir().unwrap();
    let v = json_of(&samplekit(&[
        "--json",
        "--out-dir",
        dir.path().to_str().unwrap(),
        "diag",
        "random-walk",
        "--L",
        "10,20,40,80",
        "--chains",
        "20",
    ]));
    let slope = v["result"]["fit"]["slope"].as_f64().unwrap();
    assert!((slope - 2.0).abs() < 0.4, "{slope}");
    let csv = fs::read_to_string(dir.path().join("scaling.csv")).unwrap();
    assert!(csv.starts_with("L,mean_T,sd_T,censored\n10,"));
    assert_eq!(csv.lines().count(), 5);
}
