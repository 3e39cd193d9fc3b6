use rayon::prelude::*;

use super::state::{CarlemanState, Locality};
use crate::d2q9::{VelocitySet, Q};
use crate::lbm::{self, LatticeField};
use crate::Result;

/// Streams every lifted variable along its own velocities:
/// `g_ij(x1 + c_i, x2 + c_j) = g*_ij(x1, x2)` and likewise for `h`.
///
/// A local single-step state streams `f` only. Its pair field has no entries
/// for separated sites, so the result is marked exhausted and any further
/// collide or stream call fails with [`crate::Error::StateExhausted`].
pub fn stream_lifted(s: &CarlemanState, vs: &VelocitySet) -> Result<CarlemanState> {
    s.ensure_live()?;
    let f = lbm::stream(&s.f, vs);
    if s.locality == Locality::LocalSingleStep {
        return Ok(CarlemanState {
            f,
            g: vec![0.0; s.g.len()],
            h: s.h.as_ref().map(|h| vec![0.0; h.len()]),
            exhausted: true,
            ..s.clone()
        });
    }
    let shift = shift_table(&s.f, vs);
    let n = s.n_sites();
    let m = n * Q;
    let target = |p: usize| shift[p];

    let mut g = vec![0.0; s.g.len()];
    // scatter row by row; each source row p1 lands on a distinct target row
    let rows: Vec<(usize, Vec<f64>)> = s
        .g
        .par_chunks(m)
        .enumerate()
        .map(|(p1, row)| {
            let mut out = vec![0.0; m];
            for (p2, &v) in row.iter().enumerate() {
                out[target(p2)] = v;
            }
            (target(p1), out)
        })
        .collect();
    for (t, row) in rows {
        g[t * m..(t + 1) * m].copy_from_slice(&row);
    }

    let h = s.h.as_ref().map(|h| {
        let mut out = vec![0.0; h.len()];
        let rows: Vec<(usize, Vec<f64>)> = h
            .par_chunks(m)
            .enumerate()
            .map(|(p12, row)| {
                let mut o = vec![0.0; m];
                for (p3, &v) in row.iter().enumerate() {
                    o[target(p3)] = v;
                }
                (target(p12 / m) * m + target(p12 % m), o)
            })
            .collect();
        for (t, row) in rows {
            out[t * m..(t + 1) * m].copy_from_slice(&row);
        }
        out
    });

    Ok(CarlemanState { f, g, h, ..s.clone() })
}

/// `shift[i * N + x] = i * N + (x + c_i)`.
fn shift_table(field: &LatticeField, vs: &VelocitySet) -> Vec<usize> {
    let n = field.n_sites();
    (0..Q * n)
        .map(|p| {
            let (i, x) = (p / n, p % n);
            i * n + field.neighbor(x, vs.velocities[i])
        })
        .collect()
}
