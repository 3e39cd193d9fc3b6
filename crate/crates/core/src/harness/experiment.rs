use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::config::{ExperimentConfig, Method};
use super::metrics::{mean_rmse, rmse_header, RmseReport};
use crate::carleman::{self, Cutoff, Locality, Order};
use crate::d2q9::{build_tensors, build_velocity_set, viscosity, CollisionTensors, VelocitySet};
use crate::lbm::{self, CollisionKind, FlowConfig, LatticeField, Trajectory};
use crate::qemu::{CircuitMode, CollisionCircuit, RegisterLayout};
use crate::{Error, Result};

/// One row of the circuit report.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CircuitRow {
    pub step: usize,
    pub p_success: f64,
    pub gamma: f64,
    pub c_max: f64,
    pub leakage_max: f64,
}

/// Everything a single method run produces.
#[derive(Debug, Clone)]
pub struct MethodRun {
    pub method: Method,
    pub trajectory: Trajectory,
    /// `f` at every time level `0..=steps`.
    pub history: Vec<LatticeField>,
    pub circuit: Vec<CircuitRow>,
    /// Max-abs difference between the emulated and classical single-step `f`.
    pub equivalence_residual: Option<f64>,
    /// Ancilla draws including repeats after failed outcomes (sample mode).
    pub circuit_attempts: usize,
}

impl MethodRun {
    pub fn final_field(&self) -> &LatticeField {
        self.history.last().expect("history holds the initial field")
    }
}

fn flow_for(cfg: &FlowConfig, method: Method) -> FlowConfig {
    FlowConfig {
        collision: match method {
            Method::LbmBgk => CollisionKind::Bgk,
            _ => CollisionKind::ModeCoupling,
        },
        ..cfg.clone()
    }
}

/// Runs one method from the Kolmogorov initial state.
pub fn simulate(cfg: &ExperimentConfig, method: Method) -> Result<MethodRun> {
    cfg.validate()?;
    let vs = build_velocity_set();
    let flow = flow_for(&cfg.flow, method);
    let t = build_tensors(flow.omega, &vs)?;
    let f0 = lbm::init_kolmogorov(&flow, &vs)?;
    match method {
        Method::LbmBgk | Method::LbmModeCoupling => {
            let (_, traj) = lbm::run(&f0, &flow, &t, &vs, Some(1))?;
            let mut history = vec![f0];
            history.extend(traj.snapshots.iter().map(|(_, f)| f.clone()));
            let trajectory = Trajectory {
                snapshots: Vec::new(),
                ..traj
            };
            Ok(MethodRun {
                method,
                trajectory,
                history,
                circuit: Vec::new(),
                equivalence_residual: None,
                circuit_attempts: 0,
            })
        }
        Method::CarlemanTr2 | Method::CarlemanCl2 | Method::CarlemanTr3 | Method::CarlemanCl3 => {
            let (order, cutoff) = match method {
                Method::CarlemanTr2 => (Order::Two, Cutoff::Truncation),
                Method::CarlemanCl2 => (Order::Two, Cutoff::Closure),
                Method::CarlemanTr3 => (Order::Three, Cutoff::Truncation),
                _ => (Order::Three, Cutoff::Closure),
            };
            run_carleman(&f0, &flow, &t, &vs, order, cutoff, cfg.memory_cap_bytes, method)
        }
        Method::QemuSingleStep => run_qemu(&f0, &flow, &t, &vs, cfg),
    }
}

#[allow(clippy::too_many_arguments)]
fn run_carleman(
    f0: &LatticeField,
    flow: &FlowConfig,
    t: &CollisionTensors,
    vs: &VelocitySet,
    order: Order,
    cutoff: Cutoff,
    memory_cap: u64,
    method: Method,
) -> Result<MethodRun> {
    let mut state = carleman::lift(f0, order, cutoff, Locality::FullPairs, memory_cap)?;
    let mut trajectory = Trajectory::default();
    trajectory.record(state.f(), flow, vs);
    let mut history = vec![f0.clone()];
    for step in 1..=flow.steps {
        state = carleman::stream_lifted(&carleman::collide(&state, t, vs)?, vs)?;
        if !state.f().is_finite() {
            return Err(Error::NumericalAbort { step });
        }
        trajectory.record(state.f(), flow, vs);
        history.push(state.f().clone());
    }
    Ok(MethodRun {
        method,
        trajectory,
        history,
        circuit: Vec::new(),
        equivalence_residual: None,
        circuit_attempts: 0,
    })
}

/// Bytes held by the emulator for a register of `dim` basis states: the
/// augmented state plus a handful of working copies.
fn emulator_bytes(dim: usize) -> u128 {
    16 * 2 * dim as u128 * 8
}

/// Each step re-encodes the current `f` as a local single-step Carleman
/// vector, applies the emulated collision circuit and the multi-streaming
/// permutation, and reads `f` back.
fn run_qemu(
    f0: &LatticeField,
    flow: &FlowConfig,
    t: &CollisionTensors,
    vs: &VelocitySet,
    cfg: &ExperimentConfig,
) -> Result<MethodRun> {
    let layout = RegisterLayout::new(flow.nx, flow.ny, true)?;
    let need = emulator_bytes(layout.dim());
    if need > cfg.memory_cap_bytes as u128 {
        return Err(Error::Capacity {
            what: format!("statevector of 2^{} amplitudes", layout.total_qubits() + 1),
            required: need,
            cap: cfg.memory_cap_bytes as u128,
        });
    }
    let circuit = CollisionCircuit::new(t, &layout)?;
    let mut f = f0.clone();
    let mut trajectory = Trajectory::default();
    trajectory.record(&f, flow, vs);
    let mut history = vec![f.clone()];
    let mut rows = Vec::with_capacity(flow.steps);
    let mut residual = 0.0f64;
    let mut attempts = 0usize;
    for step in 1..=flow.steps {
        let local = carleman::lift(&f, Order::Two, Cutoff::Truncation, Locality::LocalSingleStep, cfg.memory_cap_bytes)?;
        let classical = carleman::stream_lifted(&carleman::collide_truncate2(&local, t)?, vs)?;
        let mut tries = 0usize;
        let out = loop {
            let mode = match cfg.seed {
                None => CircuitMode::Postselect,
                Some(seed) => CircuitMode::Sample(mix_seed(seed, step, attempts)),
            };
            attempts += 1;
            tries += 1;
            let out = circuit.step(&local, vs, mode)?;
            if out.outcome_bit == 0 {
                break out;
            }
            // chance of exceeding this with a correct sampler is about e^-30
            if out.p_success <= 0.0 || tries as f64 > (30.0 / out.p_success).min(1e9) {
                return Err(Error::ZeroSuccessProbability);
            }
        };
        let next = out.state.f().clone();
        if !next.is_finite() {
            return Err(Error::NumericalAbort { step });
        }
        for (a, b) in next.data().iter().zip(classical.f().data()) {
            residual = residual.max((a - b).abs());
        }
        rows.push(CircuitRow {
            step,
            p_success: out.p_success,
            gamma: circuit.lcu.gamma,
            c_max: circuit.lcu.c_max,
            leakage_max: out.leakage_max,
        });
        f = next;
        trajectory.record(&f, flow, vs);
        history.push(f.clone());
    }
    Ok(MethodRun {
        method: Method::QemuSingleStep,
        trajectory,
        history,
        circuit: rows,
        equivalence_residual: Some(residual),
        circuit_attempts: attempts,
    })
}

fn mix_seed(seed: u64, step: usize, attempt: usize) -> u64 {
    seed ^ ((step as u64) << 32) ^ (attempt as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

/// Mean RMSE of `run` against `reference` at every time level.
pub fn rmse_series(reference: &MethodRun, run: &MethodRun, omega: f64) -> Result<Vec<RmseReport>> {
    reference
        .history
        .iter()
        .zip(&run.history)
        .enumerate()
        .map(|(t, (a, b))| mean_rmse(a, b, omega, t))
        .collect()
}

/// Key metrics of an experiment, also written to `summary.txt`.
#[derive(Debug, Clone)]
pub struct ExperimentSummary {
    pub method: Method,
    pub final_amplitude_ux: f64,
    pub decay_rate: Option<f64>,
    pub rmse: Option<RmseReport>,
    pub p_success_min: Option<f64>,
    pub equivalence_residual: Option<f64>,
    pub leakage_max: Option<f64>,
}

/// Six significant digits.
pub fn sig6(x: f64) -> String {
    format!("{x:.5e}")
}

fn create(dir: &Path, name: &str) -> Result<BufWriter<File>> {
    Ok(BufWriter::new(File::create(dir.join(name))?))
}

/// Runs `cfg.method` and writes `diagnostics.csv`, `snapshot.csv`,
/// `summary.txt`, plus `circuit_report.csv` for the emulated method. With
/// `compare`, the reference method is run as well and `rmse.csv` and
/// `rmse_timeseries.csv` are written.
pub fn run_experiment(cfg: &ExperimentConfig, compare: bool) -> Result<ExperimentSummary> {
    cfg.validate()?;
    let dir = &cfg.output_dir;
    std::fs::create_dir_all(dir)?;
    let vs = build_velocity_set();
    let run = simulate(cfg, cfg.method)?;

    run.trajectory.write_csv(create(dir, "diagnostics.csv")?)?;
    lbm::write_snapshot_csv(run.final_field(), &vs, create(dir, "snapshot.csv")?)?;
    if cfg.method == Method::QemuSingleStep {
        let mut w = create(dir, "circuit_report.csv")?;
        writeln!(w, "step,p_success,gamma,c_max,leakage_max")?;
        for r in &run.circuit {
            writeln!(w, "{},{},{},{},{}", r.step, r.p_success, r.gamma, r.c_max, r.leakage_max)?;
        }
        w.flush()?;
    }

    let rmse = if compare && cfg.method != cfg.reference {
        let reference = simulate(cfg, cfg.reference)?;
        let series = rmse_series(&reference, &run, cfg.flow.omega)?;
        let report = series[cfg.compare_at].clone();
        report.write_csv(create(dir, "rmse.csv")?)?;
        let mut w = create(dir, "rmse_timeseries.csv")?;
        writeln!(w, "t,omega,{},mean_rmse", rmse_header())?;
        for r in &series {
            writeln!(w, "{}", r.csv_fields())?;
        }
        w.flush()?;
        Some(report)
    } else {
        None
    };

    let amps = &run.trajectory.amplitude_ux;
    let decay_rate = if cfg.flow.ax > 0.0 && amps.len() > 1 {
        lbm::fit_decay(amps).ok()
    } else {
        None
    };
    let summary = ExperimentSummary {
        method: cfg.method,
        final_amplitude_ux: *amps.last().unwrap(),
        decay_rate,
        rmse,
        p_success_min: run.circuit.iter().map(|r| r.p_success).reduce(f64::min),
        equivalence_residual: run.equivalence_residual,
        leakage_max: run.circuit.iter().map(|r| r.leakage_max).reduce(f64::max),
    };

    let mut w = create(dir, "summary.txt")?;
    let flow = &cfg.flow;
    writeln!(w, "method={}", cfg.method)?;
    writeln!(w, "nx={}\nny={}\nsteps={}", flow.nx, flow.ny, flow.steps)?;
    writeln!(w, "omega={}\nax={}\nay={}\nkx={}\nky={}", sig6(flow.omega), sig6(flow.ax), sig6(flow.ay), flow.kx, flow.ky)?;
    writeln!(w, "viscosity={}", sig6(viscosity(flow.omega)?))?;
    writeln!(w, "final_amplitude_ux={}", sig6(summary.final_amplitude_ux))?;
    if let Some(r) = summary.decay_rate {
        writeln!(w, "decay_rate={}", sig6(r))?;
    }
    if let Some(r) = &summary.rmse {
        writeln!(w, "reference={}\ncompare_at={}\nmean_rmse={}", cfg.reference, r.t, sig6(r.mean))?;
    }
    if let Some(p) = summary.p_success_min {
        writeln!(w, "p_success_min={}", sig6(p))?;
        writeln!(w, "circuit_attempts={}", run.circuit_attempts)?;
    }
    if let Some(r) = summary.equivalence_residual {
        writeln!(w, "equivalence_residual={}", sig6(r))?;
    }
    if let Some(l) = summary.leakage_max {
        writeln!(w, "leakage_max={}", sig6(l))?;
    }
    w.flush()?;
    Ok(summary)
}

#[derive(Debug, Clone)]
pub struct SweepRow {
    pub method: Method,
    pub report: RmseReport,
}

/// One RMSE report per omega and method against `cfg.reference`.
pub fn sweep_omega(cfg: &ExperimentConfig, omegas: &[f64], methods: &[Method]) -> Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(omegas.len() * methods.len());
    for &omega in omegas {
        let mut c = cfg.clone();
        c.flow.omega = omega;
        let reference = simulate(&c, c.reference)?;
        for &method in methods {
            let run = simulate(&c, method)?;
            let report = mean_rmse(&reference.history[c.compare_at], &run.history[c.compare_at], omega, c.compare_at)?;
            rows.push(SweepRow { method, report });
        }
    }
    Ok(rows)
}

/// Runs [`sweep_omega`] over `cfg.omegas` and `cfg.sweep_methods` and writes
/// `sweep.csv` and `summary.txt`.
pub fn run_sweep(cfg: &ExperimentConfig) -> Result<Vec<SweepRow>> {
    cfg.validate()?;
    std::fs::create_dir_all(&cfg.output_dir)?;
    let rows = sweep_omega(cfg, &cfg.omegas, &cfg.sweep_methods)?;
    write_sweep_csv(&rows, cfg.reference, create(&cfg.output_dir, "sweep.csv")?)?;
    let mut w = create(&cfg.output_dir, "summary.txt")?;
    writeln!(w, "reference={}\ncompare_at={}", cfg.reference, cfg.compare_at)?;
    for r in &rows {
        writeln!(w, "mean_rmse.{}.omega_{}={}", r.method, r.report.omega, sig6(r.report.mean))?;
    }
    w.flush()?;
    Ok(rows)
}

pub fn write_sweep_csv<W: Write>(rows: &[SweepRow], reference: Method, mut w: W) -> std::io::Result<()> {
    writeln!(w, "method,reference,t,omega,{},mean_rmse", rmse_header())?;
    for r in rows {
        writeln!(w, "{},{},{}", r.method, reference, r.report.csv_fields())?;
    }
    w.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(method: Method) -> ExperimentConfig {
        let mut cfg = ExperimentConfig::default();
        cfg.flow.nx = 4;
        cfg.flow.ny = 4;
        cfg.flow.steps = 5;
        cfg.compare_at = 5;
        cfg.method = method;
        cfg
    }

    #[test]
    fn truncate2_first_step_drops_only_the_cubic() {
        let cfg = small(Method::CarlemanTr2);
        let run = simulate(&cfg, Method::CarlemanTr2).unwrap();
        let vs = build_velocity_set();
        let t = build_tensors(cfg.flow.omega, &vs).unwrap();
        let f0 = &run.history[0];
        let mut post = f0.clone();
        for s in 0..f0.n_sites() {
            let f = f0.site_populations(s);
            let lin = t.linear(&f);
            let quad = t.quadratic(&f, &f);
            for i in 0..9 {
                post.set(i, s, lin[i] + quad[i]);
            }
        }
        let want = lbm::stream(&post, &vs);
        for (a, b) in run.history[1].data().iter().zip(want.data()) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn qemu_method_tracks_classical_single_step() {
        let cfg = small(Method::QemuSingleStep);
        let run = simulate(&cfg, Method::QemuSingleStep).unwrap();
        assert!(run.equivalence_residual.unwrap() < 1e-10);
        assert_eq!(run.circuit.len(), 5);
        assert!(run.circuit.iter().all(|r| r.p_success > 0.0 && r.leakage_max < 1e-9));
    }

    #[test]
    fn order3_full_pairs_hit_the_cap() {
        let mut cfg = small(Method::CarlemanTr3);
        cfg.flow.nx = 16;
        cfg.flow.ny = 16;
        assert!(matches!(simulate(&cfg, Method::CarlemanTr3), Err(Error::Capacity { .. })));
    }

    #[test]
    fn sig6_digits() {
        assert_eq!(sig6(0.000123456789), "1.23457e-4");
        assert_eq!(sig6(57.6), "5.76000e1");
    }
}
