//! Carleman-linearized lattice Boltzmann method.
//!
//! The crate is organized bottom-up:
//!
//! * [`d2q9`] — the D2Q9 velocity set, equilibrium, moments and the
//!   mode-coupling collision tensors.
//! * [`lbm`] — the classical reference solver on a periodic grid.
//! * [`carleman`] — lifted (Carleman) dynamics at orders 2 and 3 with
//!   truncation or closure, multi-streaming of the lifted variables and the
//!   variable/qubit counting formulas.
//! * [`qemu`] — statevector emulation of the quantum algorithm: amplitude
//!   embedding, the LCU collision circuit with an ancilla and the controlled
//!   multi-streaming permutations.
//! * [`harness`] — RMSE metrics, experiment orchestration and CSV reports.

pub mod carleman;
pub mod d2q9;
mod error;
pub mod harness;
pub mod lbm;
pub mod qemu;

pub use error::{Error, Result};
