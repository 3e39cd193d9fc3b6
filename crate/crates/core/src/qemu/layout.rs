use crate::carleman::qubits_for;
use crate::{Error, Result};

/// Qubits spanned by one velocity register (`ceil(log2 9)`).
pub const Q_V: u32 = 4;
/// Basis states of one velocity register; indices `9..16` are padding.
pub const V_DIM: usize = 1 << Q_V;

/// Register layout of an order-2 Carleman vector.
///
/// Basis indices pack the registers big-endian with `tau` most significant:
///
/// * full pairs: `(tau, v1, p1, v2, p2)`,
///   index `(((tau * 16 + v1) * P + p1) * 16 + v2) * P + p2`;
/// * single step: `(tau, v1, p1, v2)`, index `((tau * 16 + v1) * P + p1) * 16 + v2`,
///
/// where `P = 2^q_p`. Positions `N..P` and velocities `9..16` are padding.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RegisterLayout {
    pub nx: usize,
    pub ny: usize,
    pub single_step: bool,
    pub q_tau: u32,
    pub q_v: u32,
    pub q_p: u32,
}

impl RegisterLayout {
    pub fn new(nx: usize, ny: usize, single_step: bool) -> Result<Self> {
        if nx == 0 || ny == 0 {
            return Err(Error::InvalidParameter("grid extents must be positive".into()));
        }
        let layout = Self {
            nx,
            ny,
            single_step,
            q_tau: 1,
            q_v: Q_V,
            q_p: qubits_for((nx * ny) as u128),
        };
        if layout.total_qubits() > 40 {
            return Err(Error::Capacity {
                what: format!("register of {} qubits", layout.total_qubits()),
                required: 16u128 << layout.total_qubits(),
                cap: 16u128 << 40,
            });
        }
        Ok(layout)
    }

    pub fn n_sites(&self) -> usize {
        self.nx * self.ny
    }

    /// Basis states of one position register.
    pub fn p_dim(&self) -> usize {
        1 << self.q_p
    }

    pub fn total_qubits(&self) -> u32 {
        let pair = if self.single_step { self.q_v } else { self.q_v + self.q_p };
        self.q_tau + self.q_v + self.q_p + pair
    }

    pub fn dim(&self) -> usize {
        1 << self.total_qubits()
    }

    /// Basis index of `(tau, v1, p1, v2, p2)`; `p2` is ignored in the
    /// single-step layout.
    #[inline]
    pub fn index(&self, tau: usize, v1: usize, p1: usize, v2: usize, p2: usize) -> usize {
        let p = self.p_dim();
        let head = ((tau * V_DIM + v1) * p + p1) * V_DIM + v2;
        if self.single_step {
            head
        } else {
            head * p + p2
        }
    }

    /// Inverse of [`RegisterLayout::index`].
    #[inline]
    pub fn decode(&self, mut idx: usize) -> (usize, usize, usize, usize, usize) {
        let p = self.p_dim();
        let p2 = if self.single_step {
            0
        } else {
            let p2 = idx % p;
            idx /= p;
            p2
        };
        let v2 = idx % V_DIM;
        idx /= V_DIM;
        let p1 = idx % p;
        idx /= p;
        let v1 = idx % V_DIM;
        (idx / V_DIM, v1, p1, v2, p2)
    }
}
