use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::sparse::SparseMatrix;
use super::state::{l2, QuantumState};
use crate::{Error, Result};

const FEASIBILITY_TOL: f64 = 1e-12;

/// Unitary that is block diagonal over disjoint index sets, with a constant
/// phase on every index outside the blocks.
#[derive(Debug, Clone, PartialEq)]
pub struct BlockUnitary {
    pub dim: usize,
    pub blocks: Vec<(Vec<usize>, DMatrix<Complex64>)>,
    pub default_phase: Complex64,
}

impl BlockUnitary {
    pub fn apply(&self, x: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(x.len(), self.dim);
        let mut out: Vec<Complex64> = x.iter().map(|v| v * self.default_phase).collect();
        let parts: Vec<Vec<Complex64>> = self
            .blocks
            .par_iter()
            .map(|(idx, u)| {
                (0..idx.len())
                    .map(|r| (0..idx.len()).map(|c| u[(r, c)] * x[idx[c]]).sum())
                    .collect()
            })
            .collect();
        for ((idx, _), part) in self.blocks.iter().zip(parts) {
            for (&i, v) in idx.iter().zip(part) {
                out[i] = v;
            }
        }
        out
    }

    pub fn adjoint(&self) -> Self {
        Self {
            dim: self.dim,
            blocks: self.blocks.iter().map(|(i, u)| (i.clone(), u.adjoint())).collect(),
            default_phase: self.default_phase.conj(),
        }
    }

    /// `max |U^dagger U - I|` over all entries.
    pub fn unitarity_error(&self) -> f64 {
        let mut err = (self.default_phase.norm() - 1.0).abs();
        for (_, u) in &self.blocks {
            let p = u.adjoint() * u;
            for r in 0..p.nrows() {
                for c in 0..p.ncols() {
                    let id = if r == c { 1.0 } else { 0.0 };
                    err = err.max((p[(r, c)] - id).norm());
                }
            }
        }
        err
    }

    /// Dense copy; only sensible for small dimensions.
    pub fn to_dense(&self) -> DMatrix<Complex64> {
        let mut m = DMatrix::from_diagonal_element(self.dim, self.dim, self.default_phase);
        for (idx, u) in &self.blocks {
            for &i in idx {
                m[(i, i)] = Complex64::new(0.0, 0.0);
            }
            for (r, &ir) in idx.iter().enumerate() {
                for (c, &ic) in idx.iter().enumerate() {
                    m[(ir, ic)] = u[(r, c)];
                }
            }
        }
        m
    }
}

/// How the weight `gamma` was chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GammaRule {
    /// `gamma = 1 - c_m / c_M`, used when the spectrum allows it.
    Width,
    /// `gamma = 1`, used when the width rule is not applicable.
    Unit,
    /// Supplied by the caller.
    Explicit,
}

/// `H / c_max = Ua + gamma Ub`.
#[derive(Debug, Clone)]
pub struct LcuDecomposition {
    pub ua: BlockUnitary,
    pub ub: BlockUnitary,
    pub gamma: f64,
    /// Ancilla rotation angle `arccos(sqrt(gamma / (gamma + 1)))`.
    pub gamma_angle: f64,
    pub c_max: f64,
    pub gamma_rule: GammaRule,
    /// Normalized eigenvalues, ascending.
    pub eigenvalues: Vec<f64>,
}

struct Eigen {
    blocks: Vec<(Vec<usize>, DMatrix<f64>, Vec<f64>)>,
    isolated_zero: bool,
}

fn find(parent: &mut [usize], mut a: usize) -> usize {
    while parent[a] != a {
        parent[a] = parent[parent[a]];
        a = parent[a];
    }
    a
}

/// Splits `h` into connected components and diagonalizes each.
fn eigen_blocks(h: &SparseMatrix) -> Result<Eigen> {
    if !h.is_symmetric(0.0) {
        return Err(Error::InvalidParameter("LCU input must be symmetric".into()));
    }
    let d = h.dim();
    let mut parent: Vec<usize> = (0..d).collect();
    let mut touched = vec![false; d];
    for (r, c, _) in h.triplets() {
        touched[r] = true;
        touched[c] = true;
        let (a, b) = (find(&mut parent, r), find(&mut parent, c));
        if a != b {
            parent[a.max(b)] = a.min(b);
        }
    }
    let mut groups: std::collections::BTreeMap<usize, Vec<usize>> = Default::default();
    for i in 0..d {
        if touched[i] {
            let root = find(&mut parent, i);
            groups.entry(root).or_default().push(i);
        }
    }
    let isolated_zero = touched.iter().any(|t| !t);
    let groups: Vec<Vec<usize>> = groups.into_values().collect();
    let blocks = groups
        .into_par_iter()
        .map(|idx| {
            let pos: std::collections::HashMap<usize, usize> =
                idx.iter().enumerate().map(|(k, &i)| (i, k)).collect();
            let mut m = DMatrix::zeros(idx.len(), idx.len());
            for (k, &i) in idx.iter().enumerate() {
                for (c, v) in h.row(i) {
                    m[(k, pos[&c])] = v;
                }
            }
            let eig = SymmetricEigen::new(m);
            (idx, eig.eigenvectors, eig.eigenvalues.iter().copied().collect())
        })
        .collect();
    Ok(Eigen {
        blocks,
        isolated_zero,
    })
}

/// Eigenvalues of a symmetric sparse matrix, ascending.
pub fn spectrum(h: &SparseMatrix) -> Result<Vec<f64>> {
    let e = eigen_blocks(h)?;
    let mut ev: Vec<f64> = e.blocks.iter().flat_map(|(_, _, l)| l.iter().copied()).collect();
    let zeros = h.dim() - ev.len();
    ev.extend(std::iter::repeat(0.0).take(zeros));
    ev.sort_by(f64::total_cmp);
    Ok(ev)
}

/// Phases `(alpha, beta)` with `e^{i alpha} + gamma e^{i beta} = lambda`.
pub fn phase_pair(lambda: f64, gamma: f64) -> Result<(f64, f64)> {
    let infeasible = || Error::Infeasible {
        eigenvalue: lambda,
        gamma,
    };
    if !(gamma > 0.0) {
        return Err(infeasible());
    }
    if gamma == 1.0 {
        if lambda.abs() > 2.0 + FEASIBILITY_TOL {
            return Err(infeasible());
        }
        let alpha = (lambda / 2.0).clamp(-1.0, 1.0).acos();
        return Ok((alpha, -alpha));
    }
    let mag = lambda.abs();
    if mag < (1.0 - gamma).abs() - FEASIBILITY_TOL || mag > 1.0 + gamma + FEASIBILITY_TOL {
        return Err(infeasible());
    }
    let cos_beta = ((lambda * lambda + gamma * gamma - 1.0) / (2.0 * lambda * gamma)).clamp(-1.0, 1.0);
    let beta = cos_beta.acos();
    let rest = Complex64::new(lambda, 0.0) - Complex64::from_polar(gamma, beta);
    Ok((rest.arg(), beta))
}

/// Decomposes `H / c_max` with the width rule for `gamma` when it is
/// feasible, and `gamma = 1` otherwise.
pub fn lcu_decompose(h: &SparseMatrix) -> Result<LcuDecomposition> {
    let e = eigen_blocks(h)?;
    let (c_max, normalized) = normalized_spectrum(&e, h.dim())?;
    let c_m = normalized[0];
    let c_big = *normalized.last().unwrap();
    let width_gamma = 1.0 - c_m / c_big;
    let width_ok = c_big > 0.0
        && c_big - c_m < 2.0
        && width_gamma > 0.0
        && normalized.iter().all(|&l| phase_pair(l, width_gamma).is_ok());
    let (gamma, rule) = if width_ok {
        (width_gamma, GammaRule::Width)
    } else {
        (1.0, GammaRule::Unit)
    };
    build(e, h.dim(), c_max, normalized, gamma, rule)
}

pub fn lcu_decompose_with_gamma(h: &SparseMatrix, gamma: f64) -> Result<LcuDecomposition> {
    let e = eigen_blocks(h)?;
    let (c_max, normalized) = normalized_spectrum(&e, h.dim())?;
    build(e, h.dim(), c_max, normalized, gamma, GammaRule::Explicit)
}

fn normalized_spectrum(e: &Eigen, dim: usize) -> Result<(f64, Vec<f64>)> {
    let mut ev: Vec<f64> = e.blocks.iter().flat_map(|(_, _, l)| l.iter().copied()).collect();
    if e.isolated_zero {
        ev.push(0.0);
    }
    let c_max = ev.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    if c_max == 0.0 || dim == 0 {
        return Err(Error::InvalidParameter("cannot decompose the zero operator".into()));
    }
    let mut normalized: Vec<f64> = ev.iter().map(|l| l / c_max).collect();
    normalized.sort_by(f64::total_cmp);
    Ok((c_max, normalized))
}

fn build(
    e: Eigen,
    dim: usize,
    c_max: f64,
    eigenvalues: Vec<f64>,
    gamma: f64,
    gamma_rule: GammaRule,
) -> Result<LcuDecomposition> {
    let default = if e.isolated_zero { phase_pair(0.0, gamma)? } else { (0.0, 0.0) };
    let mut ua_blocks = Vec::with_capacity(e.blocks.len());
    let mut ub_blocks = Vec::with_capacity(e.blocks.len());
    for (idx, vecs, vals) in e.blocks {
        let phases = vals
            .iter()
            .map(|&l| phase_pair(l / c_max, gamma))
            .collect::<Result<Vec<_>>>()?;
        let v = vecs.map(|x| Complex64::new(x, 0.0));
        let vt = v.transpose();
        let diag = |pick: fn(&(f64, f64)) -> f64| {
            let d: Vec<Complex64> = phases.iter().map(|p| Complex64::from_polar(1.0, pick(p))).collect();
            &v * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d)) * &vt
        };
        ua_blocks.push((idx.clone(), diag(|p| p.0)));
        ub_blocks.push((idx, diag(|p| p.1)));
    }
    Ok(LcuDecomposition {
        ua: BlockUnitary {
            dim,
            blocks: ua_blocks,
            default_phase: Complex64::from_polar(1.0, default.0),
        },
        ub: BlockUnitary {
            dim,
            blocks: ub_blocks,
            default_phase: Complex64::from_polar(1.0, default.1),
        },
        gamma,
        gamma_angle: (gamma / (gamma + 1.0)).sqrt().acos(),
        c_max,
        gamma_rule,
        eigenvalues,
    })
}

impl LcuDecomposition {
    /// `max |Ua + gamma Ub - H / c_max|` over all entries of `h`'s index space.
    pub fn reconstruction_error(&self, h: &SparseMatrix) -> f64 {
        let mut err = 0.0f64;
        let mut covered = vec![false; self.ua.dim];
        for ((idx, a), (_, b)) in self.ua.blocks.iter().zip(&self.ub.blocks) {
            for (r, &ir) in idx.iter().enumerate() {
                covered[ir] = true;
                for (c, &ic) in idx.iter().enumerate() {
                    let want = h.get(ir, ic) / self.c_max;
                    err = err.max((a[(r, c)] + b[(r, c)] * self.gamma - want).norm());
                }
            }
        }
        if covered.iter().any(|c| !c) {
            err = err.max((self.ua.default_phase + self.ub.default_phase * self.gamma).norm());
        }
        err
    }

    /// `(Ua + gamma Ub) x`.
    pub fn apply_combination(&self, x: &[Complex64]) -> Vec<Complex64> {
        let a = self.ua.apply(x);
        let b = self.ub.apply(x);
        a.iter().zip(&b).map(|(a, b)| a + b * self.gamma).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CircuitMode {
    /// Force ancilla outcome 0.
    Postselect,
    /// Draw the outcome from a generator seeded with the given value.
    Sample(u64),
}

#[derive(Debug, Clone)]
pub struct CircuitOutcome {
    pub outcome_bit: u8,
    pub post_state: QuantumState,
    /// Probability of ancilla outcome 0.
    pub p_success: f64,
}

/// Ancilla circuit: `R_y(Gamma)`, `Ub` controlled on ancilla 0, `Ua`
/// controlled on ancilla 1, `R_y(-Gamma)`, measurement.
///
/// `R_y(Gamma)` here maps `|0>` to `cos Gamma |0> + sin Gamma |1>`. Outcome 0
/// leaves `(Ua + gamma Ub) psi / (gamma + 1)`; outcome 1 leaves
/// `sqrt(gamma) (Ua - Ub) psi / (gamma + 1)`.
pub fn apply_collision_circuit(
    qs: &QuantumState,
    d: &LcuDecomposition,
    mode: CircuitMode,
) -> Result<CircuitOutcome> {
    if qs.dim() != d.ua.dim {
        return Err(Error::Shape(format!(
            "state has {} amplitudes, unitaries act on {}",
            qs.dim(),
            d.ua.dim
        )));
    }
    let (cg, sg) = (d.gamma_angle.cos(), d.gamma_angle.sin());
    // ancilla halves after the first rotation and the controlled unitaries
    let psi0: Vec<Complex64> = qs.amplitudes.iter().map(|a| a * cg).collect();
    let psi1: Vec<Complex64> = qs.amplitudes.iter().map(|a| a * sg).collect();
    let h0 = d.ub.apply(&psi0);
    let h1 = d.ua.apply(&psi1);
    let out0: Vec<Complex64> = h0.iter().zip(&h1).map(|(a, b)| a * cg + b * sg).collect();
    let out1: Vec<Complex64> = h0.iter().zip(&h1).map(|(a, b)| -a * sg + b * cg).collect();
    let n0 = l2(&out0);
    let n1 = l2(&out1);
    let p_success = (n0 * n0).min(1.0);

    let outcome_bit = match mode {
        CircuitMode::Postselect => 0,
        CircuitMode::Sample(seed) => {
            let u: f64 = ChaCha8Rng::seed_from_u64(seed).random();
            u8::from(u >= p_success)
        }
    };
    let (branch, norm, factor) = if outcome_bit == 0 {
        if n0 == 0.0 {
            return Err(Error::ZeroSuccessProbability);
        }
        // scale * amplitudes = H (scale * psi)
        (out0, n0, d.c_max * (d.gamma + 1.0))
    } else {
        // scale * amplitudes = (Ua - Ub) (scale * psi)
        (out1, n1, (d.gamma + 1.0) / d.gamma.sqrt())
    };
    Ok(CircuitOutcome {
        outcome_bit,
        post_state: QuantumState {
            amplitudes: branch.iter().map(|a| a / norm).collect(),
            scale: qs.scale * factor * norm,
        },
        p_success,
    })
}
