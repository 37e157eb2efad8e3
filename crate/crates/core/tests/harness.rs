//! End-to-end checks of configs, reports and convergence tables.

use fraclab_core::harness::{
    convergence_table, run_experiment, ExperimentConfig, ExperimentKind,
};
use fraclab_core::FracError;

#[test]
fn invalid_config_lists_every_offending_field() {
    let text = r#"
experiment = "wqc"
h = 0.4
horizon = 1.0
n = 0
paths = 1
seed = 1
method = "circulant"
[params]
bogus = 1
"#;
    match ExperimentConfig::from_toml_str(text) {
        Err(FracError::Config(problems)) => {
            let all = problems.join("\n");
            for field in ["h", "n", "bogus"] {
                assert!(all.contains(field), "{field} missing from {all}");
            }
        }
        other => panic!("expected a config error, got {other:?}"),
    }
}

#[test]
fn identical_configs_give_identical_csv() {
    let cfg = ExperimentConfig::new(ExperimentKind::Wick, 0.7, 1024, 3, 11).with_param("f", "linear");
    let a = run_experiment(&cfg).unwrap();
    let b = run_experiment(&cfg).unwrap();
    assert_eq!(a.csv_bytes().unwrap(), b.csv_bytes().unwrap());
}

#[test]
fn reports_round_trip_through_disk() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = ExperimentConfig::new(ExperimentKind::Nondeterminacy, 0.75, 64, 1, 0);
    let r = run_experiment(&cfg).unwrap();
    let (csv, json) = r.write(dir.path()).unwrap();
    assert_eq!(std::fs::read(csv).unwrap(), r.csv_bytes().unwrap());
    let back = fraclab_core::harness::Report::load(&json).unwrap();
    assert_eq!(back.config, r.config);
    assert_eq!(back.pass(), r.pass());
}

#[test]
fn tolerance_override_marks_report_non_standard() {
    let cfg = ExperimentConfig::new(ExperimentKind::Nondeterminacy, 0.75, 64, 1, 0)
        .with_param("tolerance", 1e30);
    let r = run_experiment(&cfg).unwrap();
    assert!(r.non_standard);
    assert_eq!(r.aggregate.tolerance_used, 1e30);
}

#[test]
fn pvariation_at_threshold_gates_nothing() {
    let cfg = ExperimentConfig::new(ExperimentKind::Pvariation, 0.75, 1024, 2, 3)
        .with_param("p_list", vec![1.2]);
    let r = run_experiment(&cfg).unwrap();
    assert!(r.flags.iter().any(|f| f.starts_with("at-threshold")));
    assert!(r.gates.iter().all(|g| !g.gated));
    assert!(r.pass());
}

#[test]
fn step_young_ibp_table_is_exact() {
    let reports: Vec<_> = [1024, 2048, 4096]
        .iter()
        .map(|&n| run_experiment(&ExperimentConfig::new(ExperimentKind::YoungIbp, 0.7, n, 2, 5)).unwrap())
        .collect();
    let t = convergence_table(&reports).unwrap();
    assert!(t.rows.iter().all(|r| r.error < 1e-10), "{t:?}");
}

#[test]
fn wqc_linear_schedule_errors_shrink() {
    // Subsampling one master path keeps the trend free of path-to-path noise.
    let cfg = ExperimentConfig::new(ExperimentKind::Wqc, 0.7, 1 << 16, 1, 2).with_param("f", "linear");
    let r = run_experiment(&cfg).unwrap();
    let schedule = r.group("wqc/linear/schedule").unwrap();
    let errs: Vec<f64> = schedule.rows.iter().map(|row| row.residual.abs()).collect();
    assert!(errs.len() >= 4);
    let tail = &errs[errs.len() - 4..];
    assert!(tail.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn convergence_table_rejects_empty_and_mismatched_inputs() {
    assert!(matches!(convergence_table(&[]), Err(FracError::Domain(_))));
    let a = run_experiment(&ExperimentConfig::new(ExperimentKind::Nondeterminacy, 0.75, 64, 1, 0)).unwrap();
    let b = run_experiment(&ExperimentConfig::new(ExperimentKind::Nondeterminacy, 0.6, 128, 1, 0)).unwrap();
    assert!(matches!(convergence_table(&[a, b]), Err(FracError::Domain(_))));
}
