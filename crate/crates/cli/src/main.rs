use std::path::PathBuf;
use std::process::ExitCode;

use carleman_lb::carleman::{carleman_counts, CountMode, Order};
use carleman_lb::d2q9::Q;
use carleman_lb::harness::{self, ExperimentConfig};
use carleman_lb::qemu::{gate_count_estimate, global_gate_scaling};
use carleman_lb::Error;
use clap::{Args, Parser, Subcommand};

/// Carleman-linearized lattice Boltzmann experiments.
#[derive(Parser)]
#[command(name = "clb", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one method and write diagnostics, snapshot and summary.
    Run(Common),
    /// Run one method and its reference, and write the RMSE reports too.
    Compare(Common),
    /// RMSE against the reference for every omega in --omegas.
    Sweep(Common),
    /// Variable and qubit counts of the lifted system.
    Counts {
        #[command(flatten)]
        common: Common,
        /// Also report the count for an s-step window.
        #[arg(long)]
        window: Option<u64>,
    },
    /// Check the emulated circuit against the classical update.
    QemuVerify {
        #[command(flatten)]
        common: Common,
        /// Random states used for the probability checks.
        #[arg(long, default_value_t = 100)]
        states: usize,
    },
    /// Two-qubit gate estimates.
    Gates {
        #[command(flatten)]
        common: Common,
        /// System qubits acted on by each controlled unitary.
        #[arg(long, default_value_t = 6)]
        qubits: u32,
    },
}

#[derive(Args, Clone, Default)]
struct Common {
    /// key=value file applied before the flags.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    nx: Option<usize>,
    #[arg(long)]
    ny: Option<usize>,
    #[arg(long)]
    omega: Option<f64>,
    #[arg(long)]
    ax: Option<f64>,
    #[arg(long)]
    ay: Option<f64>,
    #[arg(long)]
    kx: Option<i64>,
    #[arg(long)]
    ky: Option<i64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    method: Option<String>,
    /// Method the RMSE is measured against.
    #[arg(long)]
    reference: Option<String>,
    /// Comma-separated methods for `sweep`.
    #[arg(long)]
    methods: Option<String>,
    /// Comma-separated relaxation frequencies for `sweep`.
    #[arg(long)]
    omegas: Option<String>,
    #[arg(long)]
    compare_at: Option<usize>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Sample ancilla outcomes with this seed instead of post-selecting.
    #[arg(long)]
    seed: Option<u64>,
    /// Byte cap on lifted and emulated state storage.
    #[arg(long)]
    memory_cap: Option<u64>,
    /// Use the 32x32 grid.
    #[arg(long)]
    full_scale: bool,
}

fn build_config(c: &Common, base_grid: usize) -> Result<ExperimentConfig, Error> {
    let mut cfg = ExperimentConfig::default();
    cfg.flow.nx = base_grid;
    cfg.flow.ny = base_grid;
    if let Some(path) = &c.config {
        cfg.apply_file(path)?;
    }
    if c.full_scale {
        cfg.flow.nx = 32;
        cfg.flow.ny = 32;
    }
    let mut pairs: Vec<(&str, String)> = Vec::new();
    macro_rules! push {
        ($($f:ident),*) => {$(
            if let Some(v) = &c.$f { pairs.push((stringify!($f), v.to_string())); }
        )*};
    }
    push!(nx, ny, omega, ax, ay, kx, ky, steps, method, reference, methods, omegas, compare_at, seed, memory_cap);
    if let Some(out) = &c.out {
        pairs.push(("out", out.display().to_string()));
    }
    for (k, v) in pairs {
        cfg.set(k, &v)
            .map_err(|e| Error::InvalidParameter(format!("--{}: {e}", k.replace('_', "-"))))?;
    }
    // a shorter run compares at its last step unless told otherwise
    if c.compare_at.is_none() && cfg.compare_at > cfg.flow.steps {
        cfg.compare_at = cfg.flow.steps;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn exit_code(e: &Error) -> u8 {
    match e {
        Error::InvalidParameter(_) | Error::ConfigParse { .. } | Error::Shape(_) => 2,
        Error::Capacity { .. } => 3,
        Error::NumericalAbort { .. }
        | Error::ZeroScale
        | Error::Infeasible { .. }
        | Error::ZeroSuccessProbability
        | Error::DivisionGuard { .. } => 4,
        Error::StateExhausted | Error::Dump(_) | Error::Io(_) => 1,
    }
}

fn print_summary_file(cfg: &ExperimentConfig) -> Result<(), Error> {
    print!("{}", std::fs::read_to_string(cfg.output_dir.join("summary.txt"))?);
    Ok(())
}

fn run(cli: Cli) -> Result<u8, Error> {
    match cli.command {
        Command::Run(c) => {
            let cfg = build_config(&c, 16)?;
            harness::run_experiment(&cfg, false)?;
            print_summary_file(&cfg)?;
        }
        Command::Compare(c) => {
            let cfg = build_config(&c, 16)?;
            if cfg.method == cfg.reference {
                return Err(Error::InvalidParameter(format!(
                    "method and reference are both {}",
                    cfg.method
                )));
            }
            harness::run_experiment(&cfg, true)?;
            print_summary_file(&cfg)?;
        }
        Command::Sweep(c) => {
            let cfg = build_config(&c, 16)?;
            harness::run_sweep(&cfg)?;
            print_summary_file(&cfg)?;
        }
        Command::Counts { common, window } => {
            let cfg = build_config(&common, 32)?;
            let n = (cfg.flow.nx * cfg.flow.ny) as u64;
            let mut rows = vec![
                ("order2_global", Order::Two, CountMode::Global),
                ("order3_global", Order::Three, CountMode::Global),
                ("order2_symmetric_single_step", Order::Two, CountMode::SymmetricSingleStep),
                ("single_site_symmetric_single_step", Order::Two, CountMode::SymmetricSingleStep),
            ];
            if let Some(s) = window {
                rows.push(("order2_window", Order::Two, CountMode::Steps(s)));
                rows.push(("order3_window", Order::Three, CountMode::Steps(s)));
            }
            println!("n_sites={n}");
            println!("n_natural={}", n * Q as u64);
            for (name, order, mode) in rows {
                let sites = if name.starts_with("single_site") { 1 } else { n };
                let c = carleman_counts(sites, Q as u64, order, mode)?;
                println!("{name}.n_cl={}", c.n_cl);
                println!("{name}.q={}", c.q);
            }
        }
        Command::QemuVerify { common, states } => {
            let cfg = build_config(&common, 2)?;
            let report = harness::verify_qemu(&cfg, states)?;
            std::fs::create_dir_all(&cfg.output_dir)?;
            let mut csv = String::from("step,p_success,gamma,c_max,leakage_max\n");
            for (k, (p, leak)) in report.trials.iter().enumerate() {
                csv.push_str(&format!("{},{},{},{},{}\n", k + 1, p, report.gamma, report.c_max, leak));
            }
            std::fs::write(cfg.output_dir.join("circuit_report.csv"), csv)?;
            let mut summary = Vec::new();
            report.write_summary(&mut summary)?;
            std::fs::write(cfg.output_dir.join("summary.txt"), &summary)?;
            print!("{}", String::from_utf8_lossy(&summary));
            if !report.passed() {
                return Ok(4);
            }
        }
        Command::Gates { common, qubits } => {
            let cfg = build_config(&common, 32)?;
            if qubits == 0 {
                return Err(Error::InvalidParameter("--qubits must be at least 1".into()));
            }
            let g = gate_count_estimate(qubits);
            println!("system_qubits={qubits}");
            println!("per_controlled_unitary={}", g.per_controlled_unitary);
            println!("total={}", g.total);
            let n = (cfg.flow.nx * cfg.flow.ny) as u64;
            let global = global_gate_scaling(n);
            println!("global_order2_nq4={global}");
            println!("global_order2_nq4_log10={:.2}", (global as f64).log10());
        }
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_override_file() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.cfg");
        std::fs::write(&path, "nx = 8\nomega = 1.2\n").unwrap();
        let c = Common {
            config: Some(path),
            omega: Some(0.9),
            steps: Some(10),
            ..Default::default()
        };
        let cfg = build_config(&c, 16).unwrap();
        assert_eq!(cfg.flow.nx, 8);
        assert_eq!(cfg.flow.ny, 16);
        assert_eq!(cfg.flow.omega, 0.9);
        assert_eq!(cfg.compare_at, 10);
    }

    #[test]
    fn full_scale_yields_to_explicit_grid() {
        let c = Common {
            full_scale: true,
            nx: Some(8),
            ..Default::default()
        };
        let cfg = build_config(&c, 16).unwrap();
        assert_eq!((cfg.flow.nx, cfg.flow.ny), (8, 32));
    }

    #[test]
    fn bad_method_is_a_config_error() {
        let c = Common {
            method: Some("nope".into()),
            ..Default::default()
        };
        assert_eq!(exit_code(&build_config(&c, 16).unwrap_err()), 2);
    }
}
