//! Classical D2Q9 lattice Boltzmann solver on a fully periodic grid.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::d2q9::{self, CollisionTensors, VelocitySet, Q};
use crate::{Error, Result};

/// Distribution functions `f_i(x, y)` on a periodic `nx * ny` grid.
///
/// Storage is velocity-major: `data[i * n + s]` with site index
/// `s = y * nx + x`.
#[derive(Debug, Clone, PartialEq)]
pub struct LatticeField {
    nx: usize,
    ny: usize,
    data: Vec<f64>,
}

impl LatticeField {
    pub fn zeros(nx: usize, ny: usize) -> Self {
        Self {
            nx,
            ny,
            data: vec![0.0; Q * nx * ny],
        }
    }

    pub fn from_data(nx: usize, ny: usize, data: Vec<f64>) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter("grid extents must be positive".into()));
        }
        if data.len() != Q * nx * ny {
            return Err(Error::Shape(format!(
                "expected {} values for a {nx}x{ny} grid, got {}",
                Q * nx * ny,
                data.len()
            )));
        }
        Ok(Self { nx, ny, data })
    }

    /// Every site holds the same population vector.
    pub fn uniform(nx: usize, ny: usize, f: &[f64; Q]) -> Self {
        let n = nx * ny;
        let mut data = vec![0.0; Q * n];
        for (i, &fi) in f.iter().enumerate() {
            data[i * n..(i + 1) * n].fill(fi);
        }
        Self { nx, ny, data }
    }

    #[inline]
    pub fn nx(&self) -> usize {
        self.nx
    }

    #[inline]
    pub fn ny(&self) -> usize {
        self.ny
    }

    #[inline]
    pub fn n_sites(&self) -> usize {
        self.nx * self.ny
    }

    #[inline]
    pub fn site(&self, x: usize, y: usize) -> usize {
        y * self.nx + x
    }

    #[inline]
    pub fn get(&self, i: usize, s: usize) -> f64 {
        self.data[i * self.n_sites() + s]
    }

    #[inline]
    pub fn set(&mut self, i: usize, s: usize, v: f64) {
        let n = self.n_sites();
        self.data[i * n + s] = v;
    }

    pub fn data(&self) -> &[f64] {
        &self.data
    }

    pub fn data_mut(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn into_data(self) -> Vec<f64> {
        self.data
    }

    /// Populations of velocity `i` over all sites.
    pub fn population(&self, i: usize) -> &[f64] {
        let n = self.n_sites();
        &self.data[i * n..(i + 1) * n]
    }

    pub fn site_populations(&self, s: usize) -> [f64; Q] {
        let n = self.n_sites();
        std::array::from_fn(|i| self.data[i * n + s])
    }

    /// Site index reached from `s` by moving along `c_i` with periodic wrap.
    #[inline]
    pub fn neighbor(&self, s: usize, c: [i32; 2]) -> usize {
        let x = (s % self.nx) as i64;
        let y = (s / self.nx) as i64;
        let xn = (x + c[0] as i64).rem_euclid(self.nx as i64) as usize;
        let yn = (y + c[1] as i64).rem_euclid(self.ny as i64) as usize;
        yn * self.nx + xn
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// Sum of all populations, accumulated in storage order.
    pub fn total_mass(&self) -> f64 {
        self.data.iter().sum()
    }

    /// Per-site `(rho, u_x, u_y)`.
    pub fn macroscopic(&self, vs: &VelocitySet) -> Vec<(f64, f64, f64)> {
        (0..self.n_sites())
            .map(|s| {
                let (rho, j) = d2q9::moments(&self.site_populations(s), vs);
                (rho, j[0] / rho, j[1] / rho)
            })
            .collect()
    }

    fn map_sites<F>(&self, update: F) -> LatticeField
    where
        F: Fn(&[f64; Q]) -> [f64; Q] + Sync,
    {
        let n = self.n_sites();
        let per_site: Vec<[f64; Q]> = (0..n)
            .into_par_iter()
            .map(|s| update(&self.site_populations(s)))
            .collect();
        let mut out = LatticeField::zeros(self.nx, self.ny);
        for (s, fs) in per_site.iter().enumerate() {
            for (i, &v) in fs.iter().enumerate() {
                out.data[i * n + s] = v;
            }
        }
        out
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CollisionKind {
    #[default]
    Bgk,
    ModeCoupling,
}

/// Kolmogorov-flow setup and run length.
#[derive(Debug, Clone, PartialEq)]
pub struct FlowConfig {
    pub nx: usize,
    pub ny: usize,
    pub omega: f64,
    pub ax: f64,
    pub ay: f64,
    pub kx: i64,
    pub ky: i64,
    pub steps: usize,
    pub collision: CollisionKind,
}

impl Default for FlowConfig {
    fn default() -> Self {
        Self {
            nx: 16,
            ny: 16,
            omega: 1.5,
            ax: 0.3,
            ay: 0.0,
            kx: 1,
            ky: 1,
            steps: 100,
            collision: CollisionKind::Bgk,
        }
    }
}

impl FlowConfig {
    pub fn validate(&self) -> Result<()> {
        if self.nx == 0 || self.ny == 0 {
            return Err(Error::InvalidParameter("grid extents must be positive".into()));
        }
        d2q9::check_omega(self.omega)?;
        for (name, a) in [("ax", self.ax), ("ay", self.ay)] {
            if !(0.0..=1.0).contains(&a) {
                return Err(Error::InvalidParameter(format!(
                    "{name} must lie in [0, 1], got {a}"
                )));
            }
        }
        Ok(())
    }
}

/// Sinusoidal shear initialization: `u_x` varies along `y` with wave number
/// `kx` and `u_y` along `x` with wave number `ky`.
pub fn init_kolmogorov(cfg: &FlowConfig, vs: &VelocitySet) -> Result<LatticeField> {
    cfg.validate()?;
    let (nx, ny) = (cfg.nx, cfg.ny);
    let mut field = LatticeField::zeros(nx, ny);
    for y in 0..ny {
        let shear_x = cfg.ax * (2.0 * PI * cfg.kx as f64 * y as f64 / ny as f64).cos();
        for x in 0..nx {
            let shear_y = cfg.ay * (2.0 * PI * cfg.ky as f64 * x as f64 / nx as f64).cos();
            let s = field.site(x, y);
            for i in 0..Q {
                let v = vs.weights[i] * (1.0 + shear_x * vs.dot(i, 1) + shear_y * vs.dot(i, 2));
                field.set(i, s, v);
            }
        }
    }
    Ok(field)
}

pub fn collide_bgk(field: &LatticeField, omega: f64, vs: &VelocitySet) -> LatticeField {
    field.map_sites(|f| {
        let (rho, j) = d2q9::moments(f, vs);
        let feq = d2q9::equilibrium_unchecked(rho, [j[0] / rho, j[1] / rho], vs);
        std::array::from_fn(|i| (1.0 - omega) * f[i] + omega * feq[i])
    })
}

/// Cubic mode-coupling form of the weakly compressible collision.
pub fn collide_mode_coupling(field: &LatticeField, t: &CollisionTensors) -> LatticeField {
    field.map_sites(|f| collide_site_mode_coupling(f, t))
}

/// `A f + B f f + C f f f` at one site. Since `C_ijkl` is independent of `l`,
/// the cubic term is `(-w/2) Q_ijk f_j f_k * sum_l f_l`.
pub fn collide_site_mode_coupling(f: &[f64; Q], t: &CollisionTensors) -> [f64; Q] {
    let lin = t.linear(f);
    let quad = t.quadratic(f, f);
    let rho: f64 = f.iter().sum();
    // B = w Q, so (-w/2) Q f f = -(1/2) B f f
    std::array::from_fn(|i| lin[i] + quad[i] - 0.5 * rho * quad[i])
}

/// Periodic streaming `f_i(x + c_i) = f*_i(x)`.
pub fn stream(field: &LatticeField, vs: &VelocitySet) -> LatticeField {
    let n = field.n_sites();
    let mut out = LatticeField::zeros(field.nx, field.ny);
    out.data
        .par_chunks_mut(n)
        .enumerate()
        .for_each(|(i, dst)| {
            let src = field.population(i);
            let c = vs.velocities[i];
            for (s, &v) in src.iter().enumerate() {
                dst[field.neighbor(s, c)] = v;
            }
        });
    out
}

/// One collide-then-stream update.
pub fn step(
    field: &LatticeField,
    cfg: &FlowConfig,
    tensors: &CollisionTensors,
    vs: &VelocitySet,
) -> LatticeField {
    let post = match cfg.collision {
        CollisionKind::Bgk => collide_bgk(field, cfg.omega, vs),
        CollisionKind::ModeCoupling => collide_mode_coupling(field, tensors),
    };
    stream(&post, vs)
}

/// Per-step diagnostics of a run.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trajectory {
    /// Fourier amplitude of `u_x(y)` at `kx`, one entry per time level `0..=steps`.
    pub amplitude_ux: Vec<f64>,
    /// Fourier amplitude of `u_y(x)` at `ky`.
    pub amplitude_uy: Vec<f64>,
    pub snapshots: Vec<(usize, LatticeField)>,
}

impl Trajectory {
    pub fn record(&mut self, field: &LatticeField, cfg: &FlowConfig, vs: &VelocitySet) {
        let (ax, ay) = shear_amplitudes(field, cfg.kx, cfg.ky, vs);
        self.amplitude_ux.push(ax);
        self.amplitude_uy.push(ay);
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,amplitude_ux,amplitude_uy")?;
        for (t, (ux, uy)) in self.amplitude_ux.iter().zip(&self.amplitude_uy).enumerate() {
            writeln!(w, "{t},{ux},{uy}")?;
        }
        Ok(())
    }
}

/// Runs `cfg.steps` updates. `snapshot_every = Some(k)` keeps the field every
/// `k` steps (and the final one).
pub fn run(
    field: &LatticeField,
    cfg: &FlowConfig,
    tensors: &CollisionTensors,
    vs: &VelocitySet,
    snapshot_every: Option<usize>,
) -> Result<(LatticeField, Trajectory)> {
    let mut traj = Trajectory::default();
    let mut current = field.clone();
    traj.record(&current, cfg, vs);
    for t in 1..=cfg.steps {
        current = step(&current, cfg, tensors, vs);
        if !current.is_finite() {
            return Err(Error::NumericalAbort { step: t });
        }
        traj.record(&current, cfg, vs);
        if let Some(k) = snapshot_every {
            if k > 0 && (t % k == 0 || t == cfg.steps) {
                traj.snapshots.push((t, current.clone()));
            }
        }
    }
    Ok((current, traj))
}

/// Magnitude of the discrete Fourier coefficient of `u_x(y)` at wave number
/// `kx` and of `u_y(x)` at `ky`, averaged over the transverse direction and
/// normalized so that `U cos(2 pi k y / N)` yields `U`.
pub fn shear_amplitudes(field: &LatticeField, kx: i64, ky: i64, vs: &VelocitySet) -> (f64, f64) {
    let (nx, ny) = (field.nx(), field.ny());
    let mut sx = [0.0f64; 2];
    let mut sy = [0.0f64; 2];
    for y in 0..ny {
        let phase_y = 2.0 * PI * kx as f64 * y as f64 / ny as f64;
        for x in 0..nx {
            let phase_x = 2.0 * PI * ky as f64 * x as f64 / nx as f64;
            let (rho, j) = d2q9::moments(&field.site_populations(field.site(x, y)), vs);
            let (ux, uy) = (j[0] / rho, j[1] / rho);
            sx[0] += ux * phase_y.cos();
            sx[1] -= ux * phase_y.sin();
            sy[0] += uy * phase_x.cos();
            sy[1] -= uy * phase_x.sin();
        }
    }
    let n = (nx * ny) as f64;
    let norm = |k: i64, len: usize| {
        if (2 * k).rem_euclid(len as i64) == 0 {
            1.0
        } else {
            2.0
        }
    };
    (
        norm(kx, ny) * sx[0].hypot(sx[1]) / n,
        norm(ky, nx) * sy[0].hypot(sy[1]) / n,
    )
}

/// Exponential decay rate per step, from a least-squares fit of
/// `log(amplitude)` against the step index.
pub fn fit_decay(amplitudes: &[f64]) -> Result<f64> {
    if amplitudes.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least two amplitudes to fit a decay rate".into(),
        ));
    }
    if let Some((t, a)) = amplitudes.iter().enumerate().find(|(_, a)| !(**a > 0.0)) {
        return Err(Error::InvalidParameter(format!(
            "amplitude at t={t} is not positive ({a})"
        )));
    }
    let n = amplitudes.len() as f64;
    let t_mean = (n - 1.0) / 2.0;
    let y_mean = amplitudes.iter().map(|a| a.ln()).sum::<f64>() / n;
    let (mut sxy, mut sxx) = (0.0, 0.0);
    for (t, a) in amplitudes.iter().enumerate() {
        let dt = t as f64 - t_mean;
        sxy += dt * (a.ln() - y_mean);
        sxx += dt * dt;
    }
    Ok(-sxy / sxx)
}

/// CSV with columns `x,y,rho,ux,uy`.
pub fn write_snapshot_csv<W: Write>(
    field: &LatticeField,
    vs: &VelocitySet,
    mut w: W,
) -> std::io::Result<()> {
    writeln!(w, "x,y,rho,ux,uy")?;
    for (s, (rho, ux, uy)) in field.macroscopic(vs).into_iter().enumerate() {
        writeln!(w, "{},{},{rho},{ux},{uy}", s % field.nx(), s / field.nx())?;
    }
    Ok(())
}
