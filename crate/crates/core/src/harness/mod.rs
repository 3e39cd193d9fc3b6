//! Experiments, metrics and reports.

mod config;
mod experiment;
mod metrics;
mod verify;

pub use config::{ExperimentConfig, Method};
pub use experiment::{
    rmse_series, run_experiment, run_sweep, sig6, simulate, sweep_omega, write_sweep_csv, CircuitRow,
    ExperimentSummary, MethodRun, SweepRow,
};
pub use metrics::{mean_rmse, rmse, RmseReport, DIVISION_EPS};
pub use verify::{verify_qemu, QemuVerifyReport};
