use num_complex::Complex64;

use super::layout::RegisterLayout;
use super::state::QuantumState;
use crate::d2q9::{VelocitySet, Q};
use crate::{Error, Result};

/// Shift `S_i` on one position register as a permutation: basis state `p`
/// goes to `perm[p]`. Padding positions (`p >= N`) and padding velocities
/// (`i >= 9`) are left fixed.
pub fn build_streaming_operator(i: usize, layout: &RegisterLayout, vs: &VelocitySet) -> Vec<usize> {
    let (nx, ny) = (layout.nx as i64, layout.ny as i64);
    (0..layout.p_dim())
        .map(|p| {
            if i >= Q || p >= layout.n_sites() {
                return p;
            }
            let c = vs.velocities[i];
            let x = (p as i64 % nx + c[0] as i64).rem_euclid(nx);
            let y = (p as i64 / nx + c[1] as i64).rem_euclid(ny);
            (y * nx + x) as usize
        })
        .collect()
}

/// Basis permutation of the multi-streaming step: on `tau = 0`, `S_{v1}` on
/// `p1`; on `tau = 1`, `S_{v1} (x) S_{v2}` on `(p1, p2)`. In the single-step
/// layout there is no `p2` and the `tau = 1` block is left in place.
pub fn multistream_permutation(layout: &RegisterLayout, vs: &VelocitySet) -> Vec<usize> {
    let shifts: Vec<Vec<usize>> = (0..super::layout::V_DIM)
        .map(|i| build_streaming_operator(i, layout, vs))
        .collect();
    (0..layout.dim())
        .map(|idx| {
            let (tau, v1, p1, v2, p2) = layout.decode(idx);
            match (tau, layout.single_step) {
                (0, _) => layout.index(0, v1, shifts[v1][p1], v2, p2),
                (_, true) => idx,
                _ => layout.index(tau, v1, shifts[v1][p1], v2, shifts[v2][p2]),
            }
        })
        .collect()
}

pub fn apply_multistreaming(
    qs: &QuantumState,
    layout: &RegisterLayout,
    vs: &VelocitySet,
) -> Result<QuantumState> {
    if qs.dim() != layout.dim() {
        return Err(Error::Shape(format!(
            "state has {} amplitudes, layout needs {}",
            qs.dim(),
            layout.dim()
        )));
    }
    let perm = multistream_permutation(layout, vs);
    let mut out = vec![Complex64::new(0.0, 0.0); qs.dim()];
    for (src, &dst) in perm.iter().enumerate() {
        out[dst] = qs.amplitudes[src];
    }
    Ok(QuantumState {
        amplitudes: out,
        scale: qs.scale,
    })
}
