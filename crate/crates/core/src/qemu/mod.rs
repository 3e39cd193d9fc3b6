//! Statevector emulation of the collision and streaming circuits.
//!
//! Order-2 Carleman vectors are amplitude encoded on a register
//! `(tau, v1, p1, v2, p2)` with the magnitude tracked classically. The
//! collision matrix is made Hermitian by augmentation, split as
//! `Ua + gamma Ub`, and applied through a one-ancilla circuit with
//! post-selection. Streaming is a basis permutation controlled on the
//! velocity registers.

mod collision;
mod gates;
mod layout;
mod lcu;
mod pipeline;
mod sparse;
mod state;
mod streaming;

pub use collision::{build_collision_matrix, collision_factor, factor_index, hermitian_augment, FACTOR_DIM};
pub use gates::{gate_count_estimate, global_gate_scaling, GateEstimate};
pub use layout::{RegisterLayout, Q_V, V_DIM};
pub use lcu::{
    apply_collision_circuit, lcu_decompose, lcu_decompose_with_gamma, phase_pair, spectrum,
    BlockUnitary, CircuitMode, CircuitOutcome, GammaRule, LcuDecomposition,
};
pub use pipeline::{read_state_dump, write_state_dump, CollisionCircuit, StepOutput};
pub use sparse::SparseMatrix;
pub use state::{embed, readback, QuantumState, Readback, LEAKAGE_THRESHOLD};
pub use streaming::{apply_multistreaming, build_streaming_operator, multistream_permutation};
