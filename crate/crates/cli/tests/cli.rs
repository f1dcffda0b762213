use std::path::Path;
use std::process::{Command, Output};

use kacrice_cli::config::{CurvePair, CurveSpec, ModelSpec, NumericParams, OutputSpec, TargetSpec};
use kacrice_cli::{execute, ExperimentConfig, ExperimentKind, Format, Overrides};
use proptest::prelude::*;

fn kacrice(args: &[&str], dir: &Path, env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_kacrice"));
    cmd.args(args).current_dir(dir).env_remove("KACRICE_SEED").env_remove("KACRICE_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    cmd.output().unwrap()
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    std::fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_string()
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

#[test]
fn selfcheck_passes() {
    let dir = tempfile::tempdir().unwrap();
    let out = kacrice(&["selfcheck"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), kacrice_cli::record::CSV_COLUMNS.join(","));
    assert!(text.starts_with("experiment,x,formula,oracle_mean,oracle_se,discrepancy_se,n,seed,"));
    let rows = csv_rows(&text);
    assert_eq!(rows.iter().filter(|r| r[8] == "gamma_identity").count(), 8);
    assert!(rows.iter().all(|r| r.last().unwrap().is_empty()));
}

#[test]
fn unknown_experiment_is_a_validation_error_with_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiment": "nope"}"#);
    let out = kacrice(&["run", "--config", &cfg], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("`experiment`"), "{err}");
}

#[test]
fn nested_errors_report_key_path() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "point_count", "model": {"kind": "kostlan", "m": 1, "degree": [3]}}"#,
    );
    let out = kacrice(&["run", "--config", &cfg], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8(out.stderr).unwrap();
    assert!(err.contains("model"), "{err}");
}

#[test]
fn sweep_rejects_non_sweep_experiments() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"experiment": "kinematic"}"#);
    let out = kacrice(&["sweep", "--config", &cfg], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn degree_sweep_formula_column() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "degree_sweep", "params": {"n_samples": 0, "inner_samples": 64, "fiber_nodes": 2, "circle_nodes": 4}}"#,
    );
    let out = kacrice(&["sweep", "--config", &cfg], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    let formula: Vec<f64> = rows.iter().map(|r| r[2].parse().unwrap()).collect();
    let expected = [2.0, 4.0, 6.0, 8.0, 10.0];
    assert_eq!(formula.len(), expected.len());
    for (f, e) in formula.iter().zip(expected) {
        assert!((f - e).abs() < 1e-12, "{formula:?}");
    }
}

#[test]
fn single_point_grid_gives_single_record() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "continuity_sweep", "params": {"epsilon_grid": [0.5], "n_samples": 0, "inner_samples": 64, "fiber_nodes": 2}}"#,
    );
    let out = kacrice(&["sweep", "--config", &cfg], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(csv_rows(&String::from_utf8(out.stdout).unwrap()).len(), 1);
}

#[test]
fn seed_precedence_flag_then_env_then_config() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "kinematic", "seed": 5, "params": {"n_rotations": 10, "curve_nodes": 8, "angle_nodes": 8}}"#,
    );
    let seed_of = |args: &[&str], env: &[(&str, &str)]| {
        let out = kacrice(args, dir.path(), env);
        assert_eq!(out.status.code(), Some(0));
        csv_rows(&String::from_utf8(out.stdout).unwrap())[0][7].clone()
    };
    assert_eq!(seed_of(&["run", "--config", &cfg], &[]), "5");
    assert_eq!(seed_of(&["run", "--config", &cfg], &[("KACRICE_SEED", "9")]), "9");
    assert_eq!(seed_of(&["run", "--config", &cfg, "--seed", "11"], &[("KACRICE_SEED", "9")]), "11");
    let bad = kacrice(&["run", "--config", &cfg], dir.path(), &[("KACRICE_SEED", "x")]);
    assert_eq!(bad.status.code(), Some(2));
    let bad = kacrice(&["run", "--config", &cfg], dir.path(), &[("KACRICE_THREADS", "0")]);
    assert_eq!(bad.status.code(), Some(2));
}

#[test]
fn json_lines_output_to_file() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "kinematic", "params": {"n_rotations": 20, "curve_nodes": 8, "angle_nodes": 8},
            "output": {"path": "ignored.csv"}}"#,
    );
    let out = kacrice(&["run", "--config", &cfg, "--out", "r.jsonl", "--format", "json"], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(0));
    assert!(!dir.path().join("ignored.csv").exists());
    let text = std::fs::read_to_string(dir.path().join("r.jsonl")).unwrap();
    assert_eq!(text.lines().count(), 1);
    let v: serde_json::Value = serde_json::from_str(text.trim_end()).unwrap();
    for key in ["method", "seed", "n", "value", "std_error"] {
        assert!(!v[key].is_null(), "{key}");
    }
}

#[test]
fn diverged_estimate_exits_with_three() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(
        dir.path(),
        r#"{"experiment": "sphere_count", "model": {"kind": "kostlan", "m": 1, "degrees": [3, 3]},
            "target": {"type": "exponential_spiral"},
            "params": {"n_samples": 0, "inner_samples": 16, "fiber_nodes": 4, "circle_nodes": 4}}"#,
    );
    let out = kacrice(&["run", "--config", &cfg], dir.path(), &[]);
    assert_eq!(out.status.code(), Some(3));
    let rows = csv_rows(&String::from_utf8(out.stdout).unwrap());
    assert_eq!(rows[0].last().unwrap(), "diverged");
}

#[test]
fn fields_unused_by_an_experiment_are_rejected() {
    let json = r#"{"experiment": "kinematic", "model": {"kind": "kostlan", "m": 1, "degrees": [2]}}"#;
    let err = ExperimentConfig::from_json(json).unwrap_err().to_string();
    assert!(err.contains("`model`"), "{err}");
}

#[test]
fn library_and_binary_agree() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::Kinematic);
    cfg.params.n_rotations = 30;
    cfg.params.curve_nodes = 8;
    cfg.params.angle_nodes = 8;
    cfg.seed = 4;
    let records = execute(&cfg, &Overrides::default()).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = write_config(dir.path(), &cfg.to_json());
    let out = kacrice(&["run", "--config", &path, "--format", "json"], dir.path(), &[]);
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(v["value"].as_f64().unwrap().to_bits(), records[0].value.to_bits());
    assert_eq!(v["oracle_mean"].as_f64(), records[0].oracle_mean);
}

fn finite() -> impl Strategy<Value = f64> {
    prop_oneof![any::<f64>().prop_filter("finite", |v| v.is_finite()), -1e3..1e3f64]
}

fn config_strategy() -> impl Strategy<Value = ExperimentConfig> {
    let model = prop_oneof![
        (1usize..=2, prop::collection::vec(0u32..30, 1..3))
            .prop_map(|(m, degrees)| ModelSpec::Kostlan { m, degrees }),
        prop::collection::vec(prop::collection::vec(prop::collection::vec(finite(), 2), 2), 1..3)
            .prop_map(|matrices| ModelSpec::MixedKostlan { m: 1, matrices }),
    ];
    let target = prop_oneof![
        prop::collection::vec(finite(), 1..3).prop_map(|y| TargetSpec::Point { y }),
        finite().prop_map(|radius| TargetSpec::Circle { radius }),
        Just(TargetSpec::ExponentialSpiral),
    ];
    let params = (
        0usize..5000,
        finite(),
        prop::collection::vec(finite(), 0..6),
        prop::collection::vec(0u32..40, 0..6),
        (0u32..20, 0u32..20),
    )
        .prop_map(|(n, tol, eps, degs, (a, b))| NumericParams {
            n_samples: n,
            bisection_tol: tol,
            epsilon_grid: eps,
            degree_grid: degs,
            family_degrees: [a, b],
            ..NumericParams::default()
        });
    (
        prop::option::of(model),
        prop::option::of(target),
        prop::option::of(finite()),
        params,
        any::<u64>(),
        prop::option::of("[a-z]{1,8}\\.csv"),
        any::<bool>(),
    )
        .prop_map(|(model, target, rho, params, seed, path, json)| ExperimentConfig {
            schema_version: 1,
            experiment: ExperimentKind::PointCount,
            model,
            target,
            curves: rho.map(|r| CurvePair {
                moving: CurveSpec::Latitude { polar_radius: r },
                fixed: CurveSpec::GreatCircle { normal: [r, 1.0, -r] },
            }),
            params,
            seed,
            output: OutputSpec {
                path,
                format: if json { Format::Json } else { Format::Csv },
            },
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn configs_round_trip_bit_identically(cfg in config_strategy()) {
        let text = cfg.to_json();
        let de: ExperimentConfig = serde_json::from_str(&text).unwrap();
        prop_assert_eq!(&de, &cfg);
        prop_assert_eq!(de.to_json(), text);
        prop_assert_eq!(de.params.bisection_tol.to_bits(), cfg.params.bisection_tol.to_bits());
    }
}

#[test]
fn defaults_are_filled_in() {
    let cfg = ExperimentConfig::from_json(r#"{"experiment": "selfcheck"}"#).unwrap();
    assert_eq!(cfg, ExperimentConfig::new(ExperimentKind::Selfcheck));
    assert_eq!(cfg.params.grid_n, 1024);
    assert_eq!(cfg.params.r_grid.len(), 20);
}
