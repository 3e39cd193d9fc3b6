use num_complex::Complex64;

use super::layout::RegisterLayout;
use crate::carleman::{CarlemanState, Cutoff, Locality, Order};
use crate::d2q9::Q;
use crate::lbm::LatticeField;
use crate::{Error, Result};

/// Amplitudes above this magnitude in slots outside the layout raise the
/// leakage flag on readback.
pub const LEAKAGE_THRESHOLD: f64 = 1e-9;

/// Unit-norm amplitudes with the classical magnitude kept aside:
/// `scale * amplitudes` equals the embedded values.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantumState {
    pub amplitudes: Vec<Complex64>,
    pub scale: f64,
}

impl QuantumState {
    /// Normalizes `values`; fails on a zero vector.
    pub fn from_values(values: Vec<Complex64>) -> Result<Self> {
        let norm = l2(&values);
        if norm == 0.0 {
            return Err(Error::ZeroScale);
        }
        Ok(Self {
            amplitudes: values.into_iter().map(|a| a / norm).collect(),
            scale: norm,
        })
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        l2(&self.amplitudes)
    }

    /// `scale * amplitudes`.
    pub fn values(&self) -> Vec<Complex64> {
        self.amplitudes.iter().map(|a| a * self.scale).collect()
    }

    /// Adds a most significant qubit and places the state in its `|1>` half,
    /// the input block of a Hermitian-augmented operator.
    pub fn augment(&self) -> Self {
        let mut amplitudes = vec![Complex64::new(0.0, 0.0); 2 * self.dim()];
        amplitudes[self.dim()..].copy_from_slice(&self.amplitudes);
        Self {
            amplitudes,
            scale: self.scale,
        }
    }

    /// Drops the augmentation qubit keeping the `|0>` half (the output block).
    /// Returns the state and the norm left in the `|1>` half.
    pub fn deaugment(&self) -> Result<(Self, f64)> {
        if self.dim() % 2 != 0 || self.dim() < 2 {
            return Err(Error::Shape("augmented state must have even dimension".into()));
        }
        let half = self.dim() / 2;
        let leak = l2(&self.amplitudes[half..]);
        let upper = &self.amplitudes[..half];
        let norm = l2(upper);
        if norm == 0.0 {
            return Err(Error::ZeroScale);
        }
        Ok((
            Self {
                amplitudes: upper.iter().map(|a| a / norm).collect(),
                scale: self.scale * norm,
            },
            leak,
        ))
    }
}

pub(crate) fn l2(v: &[Complex64]) -> f64 {
    v.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
}

fn check_layout(s: &CarlemanState, layout: &RegisterLayout) -> Result<()> {
    if s.order() != Order::Two {
        return Err(Error::InvalidParameter(
            "only order-2 states have a register layout".into(),
        ));
    }
    if s.f().nx() != layout.nx || s.f().ny() != layout.ny {
        return Err(Error::Shape(format!(
            "state grid {}x{} does not match layout {}x{}",
            s.f().nx(),
            s.f().ny(),
            layout.nx,
            layout.ny
        )));
    }
    let local = s.locality() == Locality::LocalSingleStep;
    if s.n_sites() > 1 && local != layout.single_step {
        return Err(Error::InvalidParameter(format!(
            "{:?} state cannot use the {} layout",
            s.locality(),
            if layout.single_step { "single-step" } else { "full-pair" }
        )));
    }
    Ok(())
}

/// Amplitude encoding of an order-2 state. `f_i(x)` sits at
/// `(0, i, x, 0, 0)`, `g_ij(x1, x2)` at `(1, i, x1, j, x2)`.
pub fn embed(s: &CarlemanState, layout: &RegisterLayout) -> Result<QuantumState> {
    s.ensure_live()?;
    check_layout(s, layout)?;
    let n = s.n_sites();
    let mut v = vec![Complex64::new(0.0, 0.0); layout.dim()];
    for i in 0..Q {
        for x in 0..n {
            v[layout.index(0, i, x, 0, 0)] = s.f().get(i, x).into();
        }
    }
    for i in 0..Q {
        for j in 0..Q {
            if layout.single_step {
                for x in 0..n {
                    v[layout.index(1, i, x, j, 0)] = s.g()[s.g_index(i, x, j, x).unwrap()].into();
                }
            } else {
                for x1 in 0..n {
                    for x2 in 0..n {
                        v[layout.index(1, i, x1, j, x2)] =
                            s.g()[s.g_index(i, x1, j, x2).unwrap()].into();
                    }
                }
            }
        }
    }
    QuantumState::from_values(v)
}

/// Result of reading a state back into Carleman variables.
#[derive(Debug, Clone)]
pub struct Readback {
    pub state: CarlemanState,
    /// Largest unit-norm amplitude magnitude found outside the layout, or in
    /// an imaginary part.
    pub leakage_max: f64,
    pub leak: bool,
}

/// Inverse of [`embed`]. The cut-off is not encoded in the register and has
/// to be supplied.
pub fn readback(qs: &QuantumState, layout: &RegisterLayout, cutoff: Cutoff) -> Result<Readback> {
    if qs.dim() != layout.dim() {
        return Err(Error::Shape(format!(
            "state has {} amplitudes, layout needs {}",
            qs.dim(),
            layout.dim()
        )));
    }
    let n = layout.n_sites();
    let mut used = vec![false; qs.dim()];
    let mut take = |idx: usize| {
        used[idx] = true;
        qs.amplitudes[idx].re * qs.scale
    };
    let mut f = LatticeField::zeros(layout.nx, layout.ny);
    for i in 0..Q {
        for x in 0..n {
            f.set(i, x, take(layout.index(0, i, x, 0, 0)));
        }
    }
    let (locality, g) = if layout.single_step {
        let mut g = vec![0.0; n * Q * Q];
        for i in 0..Q {
            for x in 0..n {
                for j in 0..Q {
                    g[(i * n + x) * Q + j] = take(layout.index(1, i, x, j, 0));
                }
            }
        }
        (Locality::LocalSingleStep, g)
    } else {
        let m = n * Q;
        let mut g = vec![0.0; m * m];
        for i in 0..Q {
            for x1 in 0..n {
                for j in 0..Q {
                    for x2 in 0..n {
                        g[(i * n + x1) * m + j * n + x2] = take(layout.index(1, i, x1, j, x2));
                    }
                }
            }
        }
        (Locality::FullPairs, g)
    };
    let leakage_max = qs
        .amplitudes
        .iter()
        .zip(&used)
        .map(|(a, &u)| if u { a.im.abs() } else { a.norm() })
        .fold(0.0, f64::max);
    Ok(Readback {
        state: CarlemanState::from_parts(Order::Two, cutoff, locality, f, g, None)?,
        leakage_max,
        leak: leakage_max > LEAKAGE_THRESHOLD,
    })
}
