use std::io::{Read, Write};

use super::collision::{build_collision_matrix, hermitian_augment};
use super::layout::RegisterLayout;
use super::lcu::{apply_collision_circuit, lcu_decompose, CircuitMode, LcuDecomposition};
use super::sparse::SparseMatrix;
use super::state::{embed, readback, QuantumState};
use super::streaming::apply_multistreaming;
use crate::carleman::{read_v_dump, write_v_dump, CarlemanState, Cutoff};
use crate::d2q9::{CollisionTensors, VelocitySet};
use crate::{Error, Result};

/// Collision circuit for one lattice and relaxation frequency: the
/// augmented collision matrix and its LCU decomposition.
#[derive(Debug, Clone)]
pub struct CollisionCircuit {
    pub layout: RegisterLayout,
    pub collision: SparseMatrix,
    pub augmented: SparseMatrix,
    pub lcu: LcuDecomposition,
}

/// One emulated collide-and-stream step.
#[derive(Debug, Clone)]
pub struct StepOutput {
    pub state: CarlemanState,
    pub outcome_bit: u8,
    pub p_success: f64,
    /// Largest stray amplitude: left in the augmentation input block, or
    /// outside the layout on readback.
    pub leakage_max: f64,
}

impl CollisionCircuit {
    pub fn new(t: &CollisionTensors, layout: &RegisterLayout) -> Result<Self> {
        let collision = build_collision_matrix(t, layout, layout.single_step)?;
        let augmented = hermitian_augment(&collision);
        let lcu = lcu_decompose(&augmented)?;
        Ok(Self {
            layout: *layout,
            collision,
            augmented,
            lcu,
        })
    }

    /// Collision only: embed, augment, run the ancilla circuit, drop the
    /// augmentation qubit.
    pub fn collide(&self, qs: &QuantumState, mode: CircuitMode) -> Result<(QuantumState, u8, f64, f64)> {
        let out = apply_collision_circuit(&qs.augment(), &self.lcu, mode)?;
        let (state, leak) = out.post_state.deaugment()?;
        Ok((state, out.outcome_bit, out.p_success, leak))
    }

    /// `embed -> circuit -> multi-streaming -> readback`.
    pub fn step(&self, s: &CarlemanState, vs: &VelocitySet, mode: CircuitMode) -> Result<StepOutput> {
        let qs = embed(s, &self.layout)?;
        let (collided, outcome_bit, p_success, leak) = self.collide(&qs, mode)?;
        let streamed = apply_multistreaming(&collided, &self.layout, vs)?;
        let back = readback(&streamed, &self.layout, s.cutoff())?;
        Ok(StepOutput {
            state: back.state,
            outcome_bit,
            p_success,
            leakage_max: leak.max(back.leakage_max),
        })
    }
}

/// Writes a register state in the Carleman dump format.
pub fn write_state_dump<W: Write>(
    qs: &QuantumState,
    layout: &RegisterLayout,
    cutoff: Cutoff,
    w: W,
) -> Result<()> {
    let back = readback(qs, layout, cutoff)?;
    if back.leak {
        return Err(Error::Dump(format!(
            "state has amplitude {:e} outside the layout",
            back.leakage_max
        )));
    }
    write_v_dump(&back.state, w)
}

/// Reads a Carleman dump straight into a register state.
pub fn read_state_dump<R: Read>(r: R, layout: &RegisterLayout, cutoff: Cutoff) -> Result<QuantumState> {
    let s = read_v_dump(r, layout.nx, layout.ny, cutoff)?;
    embed(&s, layout)
}
