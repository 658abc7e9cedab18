use std::fs;
use std::path::Path;

use minimax_bench::certify::{certify, summary_path};
use minimax_bench::check::check_problem;
use minimax_bench::experiment::{ExperimentIndex, RunSummary, INDEX_FILE};
use minimax_bench::trajectory::{read_trajectory, HEADER};
use minimax_bench::{run_experiment, ExperimentConfig, RunOverrides};
use minimax_core::RunStatus;

const QUADRATIC: &str = r#"{
  "problem": { "kind": "quadratic", "seed": 11, "n": 5, "m": 3, "min_a_eigenvalue": -0.5, "quartic": 0.5 },
  "algorithms": [
    { "kind": "minimax_tr", "settings": { "eps": 1e-5 } },
    { "kind": "minimax_trace", "settings": { "eps": 1e-8 } },
    { "kind": "gda", "settings": { "grad_tol": 1e-6 } },
    { "kind": "mcn", "name": "mcn tuned", "settings": { "eps": 1e-5, "M": 20.0 } }
  ],
  "run": { "seed": 2, "x0": { "fill": 0.5 }, "max_wall_time_s": 20, "parallel": 2 }
}"#;

fn config(text: &str) -> ExperimentConfig {
    ExperimentConfig::from_json(text).unwrap()
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> T {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

#[test]
fn quadratic_run_writes_consistent_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(QUADRATIC);
    let report = run_experiment(&cfg, dir.path(), RunOverrides::default()).unwrap();

    let index: ExperimentIndex = read_json(&dir.path().join(INDEX_FILE));
    assert_eq!(index.runs.len(), 4);
    assert_eq!((index.dim_x, index.dim_y, index.seed), (5, 3, 2));
    let names: Vec<_> = index.runs.iter().map(|r| r.algorithm.as_str()).collect();
    assert_eq!(names, ["MINIMAX-TR", "MINIMAX-TRACE", "GDA", "mcn tuned"]);

    for entry in &index.runs {
        let csv_path = dir.path().join(&entry.trajectory);
        let text = fs::read_to_string(&csv_path).unwrap();
        assert_eq!(text.lines().next().unwrap(), HEADER.join(","));
        let rows = read_trajectory(text.as_bytes()).unwrap();

        let summary: RunSummary = read_json(&dir.path().join(&entry.summary));
        assert_eq!(summary_path(&csv_path), dir.path().join(&entry.summary));
        assert_eq!(summary.trajectory_rows, rows.len());
        assert_eq!(summary.status, Some(RunStatus::Converged), "{}", entry.algorithm);
        assert_eq!(&summary, report.summary(&entry.algorithm).unwrap());

        // The quadratic family has closed-form P, so the certificate section
        // reports an exact primal gradient rather than an inner-loop estimate.
        let cert = summary.certificate.as_ref().unwrap();
        let primal = cert.primal.as_ref().unwrap();
        assert!(primal.analytic);
        assert!(rows.iter().all(|r| r.true_p_gap.is_some() == summary.optimal_value.is_some()));
        assert!(rows.windows(2).all(|w| w[0].iter < w[1].iter));
        assert_eq!(cert.output_meets_target, Some(true), "{}: {cert:?}", entry.algorithm);
    }
}

#[test]
fn recorded_runs_certify() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(QUADRATIC);
    let report = run_experiment(&cfg, dir.path(), RunOverrides::default()).unwrap();
    for s in &report.summaries {
        let path = dir.path().join(&s.trajectory_file);
        if s.certificate.as_ref().is_some_and(|c| c.issued) {
            let c = certify(&path, &cfg).unwrap();
            assert!(c.valid, "{}: {c:?}", s.algorithm);
            assert_eq!(c.trajectory_rows, s.trajectory_rows);
        } else {
            // GDA issues no certificate.
            let c = certify(&path, &cfg).unwrap();
            assert!(!c.valid);
        }
    }
}

#[test]
fn certify_rejects_tampered_trajectories() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config(QUADRATIC);
    let report = run_experiment(&cfg, dir.path(), RunOverrides::default()).unwrap();
    let path = dir.path().join(&report.summary("MINIMAX-TRACE").unwrap().trajectory_file);
    let text = fs::read_to_string(&path).unwrap();
    let truncated: Vec<_> = text.lines().take(2).collect();
    fs::write(&path, truncated.join("\n") + "\n").unwrap();
    assert!(certify(&path, &cfg).is_err());

    fs::write(&path, HEADER.join(",") + "\n").unwrap();
    assert!(certify(&path, &cfg).is_err());
}

#[test]
fn seeds_make_runs_reproducible() {
    let cfg = config(QUADRATIC);
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    let ra = run_experiment(&cfg, a.path(), RunOverrides { seed: Some(9), parallel: Some(1) }).unwrap();
    let rb = run_experiment(&cfg, b.path(), RunOverrides { seed: Some(9), parallel: Some(4) }).unwrap();
    for (sa, sb) in ra.summaries.iter().zip(&rb.summaries) {
        assert_eq!(sa.seed, 9);
        assert_eq!(sa.final_x, sb.final_x);
        assert_eq!(sa.outer_iterations, sb.outer_iterations);
        let ta = &ra.result(&sa.algorithm).unwrap().trajectory;
        let tb = &rb.result(&sb.algorithm).unwrap().trajectory;
        assert!(ta.iter().zip(tb).all(|(x, y)| x.surrogate_p == y.surrogate_p && x.grad_norm == y.grad_norm));
    }
}

#[test]
fn failing_run_is_recorded_without_aborting_the_batch() {
    // With an unbounded-below P and no iteration cap, TR has no finite budget.
    let text = r#"{
      "problem": { "kind": "quadratic", "seed": 1, "n": 3, "m": 2, "min_a_eigenvalue": -5.0 },
      "algorithms": [
        { "kind": "minimax_tr", "settings": { "eps": 1e-3 } },
        { "kind": "gda", "settings": { "grad_tol": 1e-6, "max_iter": 50 } }
      ]
    }"#;
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&config(text), dir.path(), RunOverrides::default()).unwrap();
    let tr = report.summary("MINIMAX-TR").unwrap();
    assert!(tr.status.is_none());
    assert!(tr.error.as_deref().unwrap().contains("max_outer"), "{:?}", tr.error);
    let gda = report.summary("GDA").unwrap();
    assert!(gda.error.is_none());
    let index: ExperimentIndex = read_json(&dir.path().join(INDEX_FILE));
    assert_eq!(index.runs.len(), 2);
    assert!(index.runs[0].error.is_some());
}

#[test]
fn config_validation_errors_are_descriptive() {
    let cases = [
        (r#"{"problem": {"kind": "du", "n": 3, "L": 2, "gamma": 1}, "algorithms": []}"#, "at least one algorithm"),
        (
            r#"{"problem": {"kind": "du", "n": 3, "L": 2, "gamma": 1},
                "algorithms": [{"kind": "gda"}, {"kind": "gda"}]}"#,
            "GDA",
        ),
        (
            r#"{"problem": {"kind": "du", "n": 3, "L": 2, "gamma": 1},
                "algorithms": [{"kind": "minimax_trace", "settings": {"eps": 0.1, "bogus": 1}}]}"#,
            "MINIMAX-TRACE",
        ),
    ];
    for (text, needle) in cases {
        let err = ExperimentConfig::from_json(text).and_then(|c| c.validate()).unwrap_err().to_string();
        assert!(err.contains(needle), "{err}");
    }
    assert!(ExperimentConfig::from_json(r#"{"problem": {"kind": "cubic"}, "algorithms": [{"kind": "gda"}]}"#).is_err());
}

#[test]
fn du_check_problem_passes() {
    let cfg = config(
        r#"{"problem": {"kind": "du", "n": 4, "L": 2, "gamma": 1},
            "algorithms": [{"kind": "gda"}], "run": {"seed": 5}}"#,
    );
    let report = check_problem(&cfg, 300).unwrap();
    assert!(report.passed, "{report:?}");
    assert_eq!(report.finite_differences.points, 300);
    assert!(report.du.unwrap().passed);
}

#[test]
fn du_run_records_gap_against_known_optimum() {
    let text = r#"{
      "problem": { "kind": "du", "n": 3, "L": 2, "gamma": 1, "dim_y": 2 },
      "algorithms": [ { "kind": "minimax_trace", "settings": { "eps": 1e-2 } } ],
      "run": { "x0": "zeros", "max_wall_time_s": 30 }
    }"#;
    let dir = tempfile::tempdir().unwrap();
    let report = run_experiment(&config(text), dir.path(), RunOverrides::default()).unwrap();
    let s = report.summary("MINIMAX-TRACE").unwrap();
    let p_star = s.optimal_value.unwrap();
    assert!(p_star < 0.0);
    assert!((s.initial_gap.unwrap() + p_star).abs() <= 1e-9 * p_star.abs(), "P(0) should be 0");
    assert!(s.final_gap.unwrap() <= 1e-2, "{s:?}");
    assert!(s.iters_to_gap_1e_2.is_some());
    assert!(s.step_class_counts.is_some());
}
