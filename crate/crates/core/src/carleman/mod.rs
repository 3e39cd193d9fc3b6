//! Carleman-lifted lattice Boltzmann dynamics.

mod collide;
mod counts;
mod dump;
mod state;
mod stream;

pub use collide::{collide, collide_closure2, collide_closure3, collide_truncate2, collide_truncate3};
pub use counts::{carleman_counts, qubits_for, CarlemanCounts, CountMode};
pub use dump::{read_v_dump, write_v_dump, DUMP_MAGIC};
pub use state::{lift, lifted_lengths, CarlemanState, Cutoff, Locality, Order, DEFAULT_MEMORY_CAP};
pub use stream::stream_lifted;
