use super::layout::{RegisterLayout, V_DIM};
use super::sparse::SparseMatrix;
use crate::d2q9::{CollisionTensors, Q};
use crate::Result;

/// Dimension of the `(tau, v1, v2)` space the single-step operator acts on.
pub const FACTOR_DIM: usize = 2 * V_DIM * V_DIM;

/// Order-2 truncated collision as a matrix on the register space.
///
/// Full layout: `f`-block `A` on `v1`, pair block `A (x) A` on `(v1, v2)` for
/// every `(p1, p2)`, and a `B` block that maps `(1, j, x, k, x)` onto
/// `(0, i, x, 0, 0)`. The `B` block only reads coincident positions
/// (`p2 = p1`), which is what the local quadratic term requires.
///
/// Single-step layout: [`collision_factor`] on `(tau, v1, v2)` tensored with
/// the identity on `p1`.
pub fn build_collision_matrix(
    t: &CollisionTensors,
    layout: &RegisterLayout,
    single_step: bool,
) -> Result<SparseMatrix> {
    let n = layout.n_sites();
    let mut layout = *layout;
    layout.single_step = single_step;
    let mut trip = Vec::new();
    if single_step {
        let factor = collision_factor(t);
        for (r, c, v) in factor.triplets() {
            let (tr, v1r, v2r) = factor_decode(r);
            let (tc, v1c, v2c) = factor_decode(c);
            for x in 0..n {
                trip.push((
                    layout.index(tr, v1r, x, v2r, 0),
                    layout.index(tc, v1c, x, v2c, 0),
                    v,
                ));
            }
        }
    } else {
        for x in 0..n {
            for i in 0..Q {
                let row = layout.index(0, i, x, 0, 0);
                for j in 0..Q {
                    trip.push((row, layout.index(0, j, x, 0, 0), t.a[i][j]));
                    for k in 0..Q {
                        trip.push((row, layout.index(1, j, x, k, x), t.b[i][j][k]));
                    }
                }
            }
        }
        for x1 in 0..n {
            for x2 in 0..n {
                push_pair_block(t, &mut trip, |v1, v2| layout.index(1, v1, x1, v2, x2));
            }
        }
    }
    SparseMatrix::from_triplets(layout.dim(), trip)
}

fn push_pair_block(
    t: &CollisionTensors,
    trip: &mut Vec<(usize, usize, f64)>,
    idx: impl Fn(usize, usize) -> usize,
) {
    for i in 0..Q {
        for j in 0..Q {
            let row = idx(i, j);
            for k in 0..Q {
                for l in 0..Q {
                    trip.push((row, idx(k, l), t.a[i][k] * t.a[j][l]));
                }
            }
        }
    }
}

/// Basis index on the `(tau, v1, v2)` factor.
#[inline]
pub fn factor_index(tau: usize, v1: usize, v2: usize) -> usize {
    (tau * V_DIM + v1) * V_DIM + v2
}

#[inline]
fn factor_decode(idx: usize) -> (usize, usize, usize) {
    (idx / (V_DIM * V_DIM), (idx / V_DIM) % V_DIM, idx % V_DIM)
}

/// The single-step collision operator on `(tau, v1, v2)`; it does not depend
/// on the lattice size.
pub fn collision_factor(t: &CollisionTensors) -> SparseMatrix {
    let mut trip = Vec::new();
    for i in 0..Q {
        for j in 0..Q {
            trip.push((factor_index(0, i, 0), factor_index(0, j, 0), t.a[i][j]));
            for k in 0..Q {
                trip.push((factor_index(0, i, 0), factor_index(1, j, k), t.b[i][j][k]));
            }
        }
    }
    push_pair_block(t, &mut trip, |v1, v2| factor_index(1, v1, v2));
    SparseMatrix::from_triplets(FACTOR_DIM, trip).expect("factor indices are in range")
}

/// `[[0, C], [C^T, 0]]`, Hermitian for real `C`, on one extra qubit.
pub fn hermitian_augment(c: &SparseMatrix) -> SparseMatrix {
    let d = c.dim();
    let mut trip = Vec::with_capacity(2 * c.nnz());
    for (r, col, v) in c.triplets() {
        trip.push((r, d + col, v));
        trip.push((d + col, r, v));
    }
    SparseMatrix::from_triplets(2 * d, trip).expect("augmented indices are in range")
}
