use crate::d2q9::Q;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateEstimate {
    /// Two-qubit gates for one controlled `n`-qubit unitary, `4^(n + 1)`.
    pub per_controlled_unitary: u128,
    /// Both controlled unitaries of the collision circuit.
    pub total: u128,
}

/// Generic decomposition cost of the two controlled unitaries acting on an
/// `n`-qubit system register plus one control.
pub fn gate_count_estimate(n_qubits: u32) -> GateEstimate {
    let per = 4u128.pow(n_qubits + 1);
    GateEstimate {
        per_controlled_unitary: per,
        total: 2 * per,
    }
}

/// `(NQ)^4`, the scaling of a dense unitary on the global order-2 space.
pub fn global_gate_scaling(n_sites: u64) -> u128 {
    (n_sites as u128 * Q as u128).pow(4)
}
