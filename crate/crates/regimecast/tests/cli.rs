use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_regimecast"))
        .current_dir(dir)
        .env_remove("REGIMECAST_OUT")
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(dir: &Path, args: &[&str]) -> Value {
    let out = run(dir, args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    assert!(out.stderr.is_empty());
    serde_json::from_slice(&out.stdout).expect("summary JSON on stdout")
}

fn json(path: impl AsRef<Path>) -> Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

fn error_kind(out: &Output) -> String {
    assert!(!out.status.success());
    let e: Value = serde_json::from_slice(&out.stderr).expect("error JSON on stderr");
    e["error"]["kind"].as_str().unwrap().to_string()
}

#[test]
fn help_and_version_exit_zero() {
    let dir = tempfile::tempdir().unwrap();
    assert!(run(dir.path(), &["--help"]).status.success());
    assert!(run(dir.path(), &["--version"]).status.success());
    assert_eq!(error_kind(&run(dir.path(), &["nope"])), "usage");
    assert_eq!(error_kind(&run(dir.path(), &["changepoint"])), "usage");
}

#[test]
fn huge_manual_penalty_gives_no_changepoints() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "changepoint",
            "--synth",
            "ems",
            "--penalty",
            "manual",
            "--penalty-value",
            "1e18",
            "--out",
            "o",
        ],
    );
    let seg = json(dir.path().join("o/segmentation.json"));
    assert_eq!(seg["changepoint_indices"], serde_json::json!([]));
    assert_eq!(seg["penalty"]["kind"], "manual");
}

#[test]
fn hospitalization_stage_finds_three_regimes() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["synth", "--preset", "hosp", "--seed", "11", "--out", "s"],
    );
    ok(
        dir.path(),
        &[
            "changepoint",
            "--series",
            "s/series.csv",
            "--method",
            "pelt",
            "--model",
            "variance",
            "--penalty",
            "mbic",
            "--out",
            "c",
        ],
    );
    let seg = json(dir.path().join("c/segmentation.json"));
    ok(
        dir.path(),
        &[
            "changepoint",
            "--synth",
            "hosp",
            "--seed",
            "11",
            "--out",
            "d",
        ],
    );
    assert_eq!(
        std::fs::read(dir.path().join("c/segmentation.json")).unwrap(),
        std::fs::read(dir.path().join("d/segmentation.json")).unwrap()
    );
    assert_eq!(seg["method"], "pelt");
    assert_eq!(seg["model"], "variance");
    assert_eq!(seg["changepoint_indices"].as_array().unwrap().len(), 3);
    let labels = std::fs::read_to_string(dir.path().join("c/labels.csv")).unwrap();
    assert_eq!(labels.lines().count(), 268);
    assert!(labels.trim_end().ends_with(",3"));
}

#[test]
fn paper_regime_spec_writes_731_rows_and_echoes_seed() {
    let dir = tempfile::tempdir().unwrap();
    ok(dir.path(), &["synth", "--preset", "ems", "--out", "a"]);
    let csv = std::fs::read_to_string(dir.path().join("a/series.csv")).unwrap();
    assert_eq!(csv.lines().count(), 732);
    let spec = json(dir.path().join("a/spec.json"));
    assert!(spec["seed"].is_u64());
    // the echoed spec regenerates the same file
    ok(dir.path(), &["synth", "a/spec.json", "--out", "b"]);
    assert_eq!(
        csv,
        std::fs::read_to_string(dir.path().join("b/series.csv")).unwrap()
    );
}

#[test]
fn malformed_spec_lists_fields() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("bad.json"),
        r#"{"kind":"inar1","alpha":2,"lambda":-1,"n":0}"#,
    )
    .unwrap();
    let out = run(dir.path(), &["synth", "bad.json"]);
    assert_eq!(error_kind(&out), "validation");
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["problems"].as_array().unwrap().len(), 3);
    assert!(!dir.path().join("regimecast-out").exists());
}

#[test]
fn forecast_equals_stage_composition() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &["synth", "--preset", "paper", "--seed", "3", "--out", "d"],
    );
    let inputs = ["--hosp", "d/hospitalization.csv", "--calls", "d/calls.csv"];
    ok(
        dir.path(),
        &[&["forecast"][..], &inputs, &["--out", "full"]].concat(),
    );
    ok(
        dir.path(),
        &[
            "changepoint",
            "--hosp",
            "d/hospitalization.csv",
            "--out",
            "stage",
        ],
    );
    ok(
        dir.path(),
        &[
            &["forecast"][..],
            &inputs,
            &[
                "--changepoints",
                "stage/segmentation.json",
                "--out",
                "composed",
            ],
        ]
        .concat(),
    );
    let full = std::fs::read(dir.path().join("full/model.json")).unwrap();
    assert_eq!(
        full,
        std::fs::read(dir.path().join("composed/model.json")).unwrap()
    );
    assert_eq!(
        std::fs::read(dir.path().join("full/segmentation.json")).unwrap(),
        std::fs::read(dir.path().join("stage/segmentation.json")).unwrap()
    );
    let preds = std::fs::read_to_string(dir.path().join("full/predictions.csv")).unwrap();
    assert_eq!(preds.lines().next(), Some("date,raw,smoothed,fitted"));
    assert_eq!(preds.lines().count(), 268);
}

#[test]
fn baseline_mode_has_higher_test_mse() {
    let dir = tempfile::tempdir().unwrap();
    ok(
        dir.path(),
        &[
            "forecast", "--synth", "paper", "--seed", "8", "--out", "full",
        ],
    );
    ok(
        dir.path(),
        &[
            "forecast",
            "--synth",
            "paper",
            "--seed",
            "8",
            "--no-changepoints",
            "--out",
            "base",
        ],
    );
    let full = json(dir.path().join("full/model.json"));
    let base = json(dir.path().join("base/model.json"));
    assert_eq!(base["coefficients"].as_object().unwrap().len(), 2);
    let mse = |m: &Value| m["metrics"]["mse_test"].as_f64().unwrap();
    assert!(mse(&base) > mse(&full), "{} vs {}", mse(&base), mse(&full));
}

#[test]
fn zero_noise_fit_is_exact() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("z.json"),
        r#"{"kind":"regression","noise_sd":0,"seed":4}"#,
    )
    .unwrap();
    ok(dir.path(), &["synth", "z.json", "--out", "z"]);
    std::fs::write(
        dir.path().join("truth.json"),
        r#"{"regime_starts":["2020-04-29","2020-07-06","2020-10-06"]}"#,
    )
    .unwrap();
    ok(
        dir.path(),
        &[
            "forecast",
            "--hosp",
            "z/hospitalization.csv",
            "--calls",
            "z/calls.csv",
            "--target-window",
            "1",
            "--changepoints",
            "truth.json",
            "--out",
            "f",
        ],
    );
    let m = json(dir.path().join("f/model.json"));
    assert!((m["metrics"]["r2_train"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((m["metrics"]["r2_test"].as_f64().unwrap() - 1.0).abs() < 1e-12);
}

#[test]
fn config_file_flags_and_env() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("cfg.json"),
        r#"{"synth":"ems","seed":2,"ems_stage":{"method":"pelt","model":"meanvar","penalty":"bic"},"output_dir":"from_cfg"}"#,
    )
    .unwrap();
    ok(dir.path(), &["--config", "cfg.json", "changepoint"]);
    assert_eq!(
        json(dir.path().join("from_cfg/segmentation.json"))["method"],
        "pelt"
    );
    ok(
        dir.path(),
        &[
            "--config",
            "cfg.json",
            "changepoint",
            "--method",
            "binseg",
            "--out",
            "flag",
        ],
    );
    assert_eq!(
        json(dir.path().join("flag/segmentation.json"))["method"],
        "binseg"
    );

    let out = Command::new(env!("CARGO_BIN_EXE_regimecast"))
        .current_dir(dir.path())
        .env("REGIMECAST_OUT", "from_env")
        .args(["changepoint", "--synth", "hosp"])
        .output()
        .unwrap();
    assert!(out.status.success());
    assert!(dir.path().join("from_env/segmentation.json").exists());

    std::fs::write(
        dir.path().join("both.json"),
        r#"{"synth":"ems","inputs":{"series":"x.csv"}}"#,
    )
    .unwrap();
    assert_eq!(
        error_kind(&run(dir.path(), &["--config", "both.json", "changepoint"])),
        "config"
    );
}

#[test]
fn compare_reports_and_partial_failure() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("inc.json"),
        r#"{"kind":"incidents","scale":0.3,"seed":1}"#,
    )
    .unwrap();
    ok(dir.path(), &["synth", "inc.json", "--out", "s"]);
    ok(
        dir.path(),
        &[
            "compare",
            "--incidents",
            "s/incidents.csv",
            "--alpha",
            "0.01",
            "--out",
            "c",
        ],
    );
    let r = json(dir.path().join("c/compare.json"));
    let t = &r["t_tests"];
    let m = t["m"].as_u64().unwrap() as f64;
    assert_eq!(m, 21.0);
    assert_eq!(t["alpha_used"].as_f64().unwrap(), 0.01 / m);
    let rows = t["results"].as_array().unwrap();
    let ps: Vec<f64> = rows.iter().map(|x| x["p"].as_f64().unwrap()).collect();
    assert!(ps.windows(2).all(|w| w[0] <= w[1]));
    assert!(r["anova"]["p"].as_f64().unwrap() < 0.01);
    assert_eq!(r["anova"]["groups"].as_array().unwrap().len(), 6);

    // one boundary outside the data: the t-table fails, ANOVA still runs
    let out = run(
        dir.path(),
        &[
            "compare",
            "--incidents",
            "s/incidents.csv",
            "--periods",
            "2021-06-01",
            "--out",
            "p",
        ],
    );
    assert_eq!(error_kind(&out), "range");
    let r = json(dir.path().join("p/compare.json"));
    assert!(r["t_tests"]["error"].is_object());
    assert!(r["anova"]["F"].as_f64().unwrap() > 0.0);

    ok(
        dir.path(),
        &[
            "ingest-check",
            "--incidents",
            "s/incidents.csv",
            "--out",
            "i",
        ],
    );
    let i = json(dir.path().join("i/ingest_report.json"));
    assert_eq!(i["incidents"]["report"]["rows_rejected"], 0);
}

#[test]
fn ingest_errors_are_reported() {
    let dir = tempfile::tempdir().unwrap();
    std::fs::write(
        dir.path().join("h.csv"),
        "date,count\n2020-04-09,5\n2020-04-11,7\n",
    )
    .unwrap();
    let out = run(dir.path(), &["ingest-check", "--hosp", "h.csv"]);
    assert_eq!(error_kind(&out), "gap");
    let e: Value = serde_json::from_slice(&out.stderr).unwrap();
    assert_eq!(e["error"]["missing"], "2020-04-10");
    assert_eq!(
        error_kind(&run(dir.path(), &["ingest-check", "--hosp", "absent.csv"])),
        "io"
    );
}
