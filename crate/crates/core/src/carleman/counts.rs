use super::state::Order;
use crate::{Error, Result};

/// Which set of lifted variables is counted.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CountMode {
    /// Every tuple of (velocity, site) pairs: `NQ + (NQ)^2 [+ (NQ)^3]`.
    Global,
    /// Pairs within the `s`-step light cone, a square window of side
    /// `w = 2s - 1` around each site: `N(Q + Q^2 w^2 [+ Q^3 w^4])`.
    Steps(u64),
    /// Single collision, coincident sites only, symmetric monomials stored once.
    SymmetricSingleStep,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct CarlemanCounts {
    pub n_natural: u128,
    pub n_cl: u128,
    pub q: u32,
}

/// `ceil(log2 n)`, with `0` for `n <= 1`.
pub fn qubits_for(n: u128) -> u32 {
    if n <= 1 {
        0
    } else {
        128 - (n - 1).leading_zeros()
    }
}

pub fn carleman_counts(n: u64, q: u64, order: Order, mode: CountMode) -> Result<CarlemanCounts> {
    if n == 0 || q == 0 {
        return Err(Error::InvalidParameter("N and Q must be at least 1".into()));
    }
    let (n, q) = (n as u128, q as u128);
    let cubic = order == Order::Three;
    let n_cl = match mode {
        CountMode::Global => {
            let nq = n * q;
            nq + nq * nq + if cubic { nq * nq * nq } else { 0 }
        }
        CountMode::Steps(s) => {
            if s == 0 {
                return Err(Error::InvalidParameter("step count s must be at least 1".into()));
            }
            let w = 2 * s as u128 - 1;
            let w2 = w * w;
            n * (q + q * q * w2 + if cubic { q * q * q * w2 * w2 } else { 0 })
        }
        CountMode::SymmetricSingleStep => {
            let pairs = q * (q + 1) / 2;
            let triples = q * (q + 1) * (q + 2) / 6;
            n * (q + pairs + if cubic { triples } else { 0 })
        }
    };
    Ok(CarlemanCounts {
        n_natural: n * q,
        n_cl,
        q: qubits_for(n_cl),
    })
}
