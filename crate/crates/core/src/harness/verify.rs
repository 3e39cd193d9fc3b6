use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::config::ExperimentConfig;
use super::experiment::sig6;
use crate::carleman::{self, CarlemanState, Cutoff, Locality, Order};
use crate::d2q9::{build_tensors, build_velocity_set, Q};
use crate::lbm::{self, LatticeField};
use crate::qemu::{apply_collision_circuit, embed, CircuitMode, CollisionCircuit, GammaRule, RegisterLayout};
use crate::Result;

/// Outcome of checking the emulated circuit against the classical update.
#[derive(Debug, Clone)]
pub struct QemuVerifyReport {
    pub total_qubits: u32,
    pub gamma: f64,
    pub gamma_rule: GammaRule,
    pub c_max: f64,
    pub reconstruction_error: f64,
    pub unitarity_error: f64,
    /// Max-abs residual of embed, circuit, multi-streaming, readback against
    /// truncation-2 collide and stream, over the Kolmogorov state and all
    /// random states.
    pub equivalence_residual: f64,
    /// Largest `|p_success - |H~ psi|^2 / (gamma + 1)^2|`.
    pub p_success_error: f64,
    pub bound_violations: usize,
    pub leakage_max: f64,
    /// `(p_success, leakage)` per random state.
    pub trials: Vec<(f64, f64)>,
}

impl QemuVerifyReport {
    pub fn passed(&self) -> bool {
        self.equivalence_residual <= 1e-10
            && self.p_success_error <= 1e-12
            && self.bound_violations == 0
            && self.reconstruction_error <= 1e-10
            && self.unitarity_error <= 1e-10
    }

    pub fn write_summary<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "total_qubits={}", self.total_qubits)?;
        writeln!(w, "gamma={}", sig6(self.gamma))?;
        writeln!(w, "gamma_rule={:?}", self.gamma_rule)?;
        writeln!(w, "c_max={}", sig6(self.c_max))?;
        writeln!(w, "reconstruction_error={}", sig6(self.reconstruction_error))?;
        writeln!(w, "unitarity_error={}", sig6(self.unitarity_error))?;
        writeln!(w, "equivalence_residual={}", sig6(self.equivalence_residual))?;
        writeln!(w, "p_success_error={}", sig6(self.p_success_error))?;
        writeln!(w, "bound_violations={}", self.bound_violations)?;
        writeln!(w, "leakage_max={}", sig6(self.leakage_max))?;
        writeln!(w, "random_states={}", self.trials.len())?;
        writeln!(w, "passed={}", self.passed())
    }
}

fn random_state(nx: usize, ny: usize, rng: &mut ChaCha8Rng) -> Result<CarlemanState> {
    let data = (0..Q * nx * ny).map(|_| rng.random_range(0.01..0.5)).collect();
    let f = LatticeField::from_data(nx, ny, data)?;
    let exact = carleman::lift(&f, Order::Two, Cutoff::Truncation, Locality::FullPairs, u64::MAX)?;
    // independent pair values, so the check covers states off the product manifold
    let g = exact.g().iter().map(|v| v * rng.random_range(0.5..1.5)).collect();
    CarlemanState::from_parts(Order::Two, Cutoff::Truncation, Locality::FullPairs, f, g, None)
}

/// Builds the full-pair circuit for `cfg`'s grid and checks it against the
/// classical update on the Kolmogorov state and `n_random` random states.
pub fn verify_qemu(cfg: &ExperimentConfig, n_random: usize) -> Result<QemuVerifyReport> {
    cfg.flow.validate()?;
    let vs = build_velocity_set();
    let t = build_tensors(cfg.flow.omega, &vs)?;
    let layout = RegisterLayout::new(cfg.flow.nx, cfg.flow.ny, false)?;
    let circuit = CollisionCircuit::new(&t, &layout)?;
    let lcu = &circuit.lcu;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed.unwrap_or(0));

    let mut residual = 0.0f64;
    let mut leakage = 0.0f64;
    let mut check = |s: &CarlemanState| -> Result<f64> {
        let out = circuit.step(s, &vs, CircuitMode::Postselect)?;
        let want = carleman::stream_lifted(&carleman::collide_truncate2(s, &t)?, &vs)?;
        for (a, b) in out.state.to_vector().iter().zip(want.to_vector()) {
            residual = residual.max((a - b).abs());
        }
        leakage = leakage.max(out.leakage_max);
        Ok(out.p_success)
    };

    let f0 = lbm::init_kolmogorov(&cfg.flow, &vs)?;
    check(&carleman::lift(&f0, Order::Two, Cutoff::Truncation, Locality::FullPairs, cfg.memory_cap_bytes)?)?;

    let mut p_err = 0.0f64;
    let mut violations = 0;
    let mut trials = Vec::with_capacity(n_random);
    let bound = 4.0 * lcu.gamma / (lcu.gamma + 1.0).powi(2);
    for _ in 0..n_random {
        let s = random_state(cfg.flow.nx, cfg.flow.ny, &mut rng)?;
        check(&s)?;
        let psi = embed(&s, &layout)?.augment();
        let out = apply_collision_circuit(&psi, lcu, CircuitMode::Postselect)?;
        // independent route: sparse H applied directly, normalized by c_max
        let h_psi = circuit.augmented.matvec_complex(&psi.amplitudes);
        let norm2: f64 = h_psi.iter().map(|a| a.norm_sqr()).sum::<f64>() / (lcu.c_max * lcu.c_max);
        let expected = norm2 / (lcu.gamma + 1.0).powi(2);
        p_err = p_err.max((out.p_success - expected).abs());
        if out.p_success > bound + 1e-12 {
            violations += 1;
        }
        let (_, leak) = out.post_state.deaugment()?;
        trials.push((out.p_success, leak));
    }

    Ok(QemuVerifyReport {
        total_qubits: layout.total_qubits(),
        gamma: lcu.gamma,
        gamma_rule: lcu.gamma_rule,
        c_max: lcu.c_max,
        reconstruction_error: lcu.reconstruction_error(&circuit.augmented),
        unitarity_error: lcu.ua.unitarity_error().max(lcu.ub.unitarity_error()),
        equivalence_residual: residual,
        p_success_error: p_err,
        bound_violations: violations,
        leakage_max: leakage,
        trials,
    })
}
