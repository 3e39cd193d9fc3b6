//! D2Q9 lattice model and the mode-coupling collision tensors.
//!
//! Velocity numbering (index order shared by every module):
//! ```text
//!   6   2   5
//!    \  |  /
//!   3 - 0 - 1
//!    /  |  \
//!   7   4   8
//! ```
//!
//! Under the weak-compressibility substitution `1/rho ~ 2 - rho` the BGK
//! collision becomes a cubic polynomial in the populations,
//!
//! ```text
//! f*_i = A_ij f_j + B_ijk f_j f_k + C_ijkl f_j f_k f_l
//! ```
//!
//! with `A = (1 - w) I + w L`, `B = w Q` and `C_ijkl = -(w/2) Q_ijk` for all `l`.

use crate::{Error, Result};

/// Number of discrete velocities.
pub const Q: usize = 9;

/// Lattice speed of sound squared.
pub const CS2: f64 = 1.0 / 3.0;

const WEIGHTS: [f64; Q] = [
    4.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 9.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
    1.0 / 36.0,
];

const VELOCITIES: [[i32; 2]; Q] = [
    [0, 0],
    [1, 0],
    [0, 1],
    [-1, 0],
    [0, -1],
    [1, 1],
    [-1, 1],
    [-1, -1],
    [1, -1],
];

/// The D2Q9 weights and discrete velocities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VelocitySet {
    pub weights: [f64; Q],
    pub velocities: [[i32; 2]; Q],
    pub cs2: f64,
}

impl VelocitySet {
    pub const fn d2q9() -> Self {
        Self {
            weights: WEIGHTS,
            velocities: VELOCITIES,
            cs2: CS2,
        }
    }

    pub const fn q(&self) -> usize {
        Q
    }

    #[inline]
    pub fn c(&self, i: usize) -> [f64; 2] {
        let c = self.velocities[i];
        [c[0] as f64, c[1] as f64]
    }

    #[inline]
    pub fn dot(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.velocities[i], self.velocities[j]);
        (a[0] * b[0] + a[1] * b[1]) as f64
    }
}

impl Default for VelocitySet {
    fn default() -> Self {
        Self::d2q9()
    }
}

pub fn build_velocity_set() -> VelocitySet {
    VelocitySet::d2q9()
}

/// Second-order BGK equilibrium populations for density `rho` and velocity `u`.
pub fn equilibrium(rho: f64, u: [f64; 2], vs: &VelocitySet) -> Result<[f64; Q]> {
    if !(rho > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "equilibrium density must be positive, got {rho}"
        )));
    }
    Ok(equilibrium_unchecked(rho, u, vs))
}

#[inline]
pub(crate) fn equilibrium_unchecked(rho: f64, u: [f64; 2], vs: &VelocitySet) -> [f64; Q] {
    let uu = u[0] * u[0] + u[1] * u[1];
    let mut feq = [0.0; Q];
    for (i, out) in feq.iter_mut().enumerate() {
        let c = vs.c(i);
        let cu = c[0] * u[0] + c[1] * u[1];
        *out = vs.weights[i]
            * rho
            * (1.0 + cu / vs.cs2 + cu * cu / (2.0 * vs.cs2 * vs.cs2) - uu / (2.0 * vs.cs2));
    }
    feq
}

/// Density and momentum `(rho, rho u)` of a single-site population vector.
#[inline]
pub fn moments(f: &[f64; Q], vs: &VelocitySet) -> (f64, [f64; 2]) {
    let mut rho = 0.0;
    let mut j = [0.0; 2];
    for (i, &fi) in f.iter().enumerate() {
        let c = vs.c(i);
        rho += fi;
        j[0] += c[0] * fi;
        j[1] += c[1] * fi;
    }
    (rho, j)
}

/// Linear, quadratic and (implicit) cubic coefficients of the weakly
/// compressible BGK collision at a fixed relaxation frequency.
#[derive(Debug, Clone, PartialEq)]
pub struct CollisionTensors {
    pub omega: f64,
    pub l: [[f64; Q]; Q],
    pub qt: [[[f64; Q]; Q]; Q],
    pub a: [[f64; Q]; Q],
    pub b: [[[f64; Q]; Q]; Q],
}

impl CollisionTensors {
    /// `C_ijkl`. The cubic tensor does not depend on `l` and is never stored.
    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize, _l: usize) -> f64 {
        self.cubic_scale() * self.qt[i][j][k]
    }

    /// The scalar `-w/2` relating `C_ijkl` to `Q_ijk`.
    #[inline]
    pub fn cubic_scale(&self) -> f64 {
        -0.5 * self.omega
    }

    /// `sum_jk B_ijk x_j y_k`.
    pub fn quadratic(&self, x: &[f64; Q], y: &[f64; Q]) -> [f64; Q] {
        let mut out = [0.0; Q];
        for (i, o) in out.iter_mut().enumerate() {
            let mut acc = 0.0;
            for j in 0..Q {
                let mut row = 0.0;
                for k in 0..Q {
                    row += self.b[i][j][k] * y[k];
                }
                acc += x[j] * row;
            }
            *o = acc;
        }
        out
    }

    /// `sum_j A_ij x_j`.
    pub fn linear(&self, x: &[f64; Q]) -> [f64; Q] {
        let mut out = [0.0; Q];
        for (i, o) in out.iter_mut().enumerate() {
            *o = (0..Q).map(|j| self.a[i][j] * x[j]).sum();
        }
        out
    }
}

pub fn build_tensors(omega: f64, vs: &VelocitySet) -> Result<CollisionTensors> {
    check_omega(omega)?;
    let cs2 = vs.cs2;
    let mut l = [[0.0; Q]; Q];
    let mut a = [[0.0; Q]; Q];
    for i in 0..Q {
        for j in 0..Q {
            l[i][j] = vs.weights[i] * (1.0 + vs.dot(i, j) / cs2);
            let delta = if i == j { 1.0 } else { 0.0 };
            a[i][j] = (1.0 - omega) * delta + omega * l[i][j];
        }
    }
    let mut qt = [[[0.0; Q]; Q]; Q];
    let mut b = [[[0.0; Q]; Q]; Q];
    for i in 0..Q {
        for j in 0..Q {
            for k in 0..Q {
                qt[i][j][k] = vs.weights[i] / (cs2 * cs2)
                    * (vs.dot(i, j) * vs.dot(i, k) - cs2 * vs.dot(j, k));
                b[i][j][k] = omega * qt[i][j][k];
            }
        }
    }
    Ok(CollisionTensors { omega, l, qt, a, b })
}

pub(crate) fn check_omega(omega: f64) -> Result<()> {
    if omega > 0.0 && omega < 2.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!(
            "relaxation frequency must lie in (0, 2), got {omega}"
        )))
    }
}

/// Kinematic viscosity in lattice units, `(2/w - 1)/6`.
pub fn viscosity(omega: f64) -> Result<f64> {
    if !(omega > 0.0 && omega <= 2.0) {
        return Err(Error::InvalidParameter(format!(
            "viscosity needs 0 < omega <= 2, got {omega}"
        )));
    }
    Ok((2.0 / omega - 1.0) / 6.0)
}

pub fn reynolds(u_mag: f64, length: f64, nu: f64) -> Result<f64> {
    if !(nu > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "viscosity must be positive, got {nu}"
        )));
    }
    Ok(u_mag * length / nu)
}
