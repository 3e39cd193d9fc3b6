use std::fs;

use carleman_lb::harness::{
    mean_rmse, run_experiment, run_sweep, simulate, verify_qemu, write_sweep_csv, ExperimentConfig, Method,
};
use carleman_lb::Error;

fn small(dir: &std::path::Path) -> ExperimentConfig {
    let mut cfg = ExperimentConfig::default();
    cfg.flow.nx = 4;
    cfg.flow.ny = 4;
    cfg.flow.steps = 8;
    cfg.compare_at = 8;
    cfg.output_dir = dir.to_path_buf();
    cfg
}

#[test]
fn experiment_writes_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.method = Method::CarlemanCl2;
    let summary = run_experiment(&cfg, true).unwrap();
    for name in ["diagnostics.csv", "snapshot.csv", "rmse.csv", "rmse_timeseries.csv", "summary.txt"] {
        assert!(dir.path().join(name).is_file(), "{name} missing");
    }
    let series = fs::read_to_string(dir.path().join("rmse_timeseries.csv")).unwrap();
    assert_eq!(series.lines().count(), 1 + 9);
    let text = fs::read_to_string(dir.path().join("summary.txt")).unwrap();
    assert!(text.contains("method=carleman_cl2"));
    assert!(text.contains("reference=lbm_bgk"));

    // the written RMSE is the one the library computes directly
    let reference = simulate(&cfg, Method::LbmBgk).unwrap();
    let run = simulate(&cfg, Method::CarlemanCl2).unwrap();
    let r = mean_rmse(&reference.history[8], &run.history[8], cfg.flow.omega, 8).unwrap();
    assert_eq!(summary.rmse.unwrap().mean, r.mean);
}

#[test]
fn experiment_output_is_reproducible() {
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for d in [&a, &b] {
        let mut cfg = small(d.path());
        cfg.method = Method::QemuSingleStep;
        cfg.flow.nx = 2;
        cfg.flow.ny = 2;
        cfg.flow.steps = 3;
        cfg.compare_at = 3;
        cfg.seed = Some(11);
        run_experiment(&cfg, true).unwrap();
    }
    for name in ["diagnostics.csv", "snapshot.csv", "circuit_report.csv", "rmse.csv", "summary.txt"] {
        let x = fs::read(a.path().join(name)).unwrap();
        let y = fs::read(b.path().join(name)).unwrap();
        assert_eq!(x, y, "{name} differs between identical runs");
    }
}

#[test]
fn qemu_single_step_tracks_truncation() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.flow.nx = 2;
    cfg.flow.ny = 2;
    cfg.flow.steps = 4;
    cfg.compare_at = 4;
    let run = simulate(&cfg, Method::QemuSingleStep).unwrap();
    assert!(run.equivalence_residual.unwrap() <= 1e-10);
    assert_eq!(run.circuit.len(), 4);
    assert!(run.circuit.iter().all(|r| (0.0..=1.0).contains(&r.p_success)));
}

#[test]
fn sweep_table_has_one_row_per_pair() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.omegas = vec![0.8, 1.2];
    cfg.sweep_methods = vec![Method::CarlemanTr2, Method::CarlemanCl2];
    let rows = run_sweep(&cfg).unwrap();
    assert_eq!(rows.len(), 4);
    let mut buf = Vec::new();
    write_sweep_csv(&rows, cfg.reference, &mut buf).unwrap();
    assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 5);
}

#[test]
fn order_three_on_large_grid_hits_capacity() {
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = small(dir.path());
    cfg.flow.nx = 16;
    cfg.flow.ny = 16;
    cfg.method = Method::CarlemanTr3;
    assert!(matches!(simulate(&cfg, cfg.method), Err(Error::Capacity { .. })));
}

#[test]
fn verification_passes_on_smallest_grids() {
    let dir = tempfile::tempdir().unwrap();
    for n in [1, 2] {
        let mut cfg = small(dir.path());
        cfg.flow.nx = n;
        cfg.flow.ny = n;
        let report = verify_qemu(&cfg, 20).unwrap();
        assert!(report.passed(), "{report:?}");
    }
}
