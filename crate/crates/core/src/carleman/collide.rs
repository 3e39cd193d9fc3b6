//! Carleman collision updates.
//!
//! All kernels operate on the full-pair layout with `n` sites; a local
//! single-step state is handled one site at a time as an `n = 1` full state,
//! which is exact because every term restricted to coincident positions only
//! reads coincident positions.

use rayon::prelude::*;

use super::state::{CarlemanState, Cutoff, Locality, Order};
use crate::d2q9::{CollisionTensors, VelocitySet, Q};
use crate::lbm::LatticeField;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Scheme {
    Truncation2,
    Closure2,
    Truncation3,
    Closure3,
}

pub fn collide_truncate2(s: &CarlemanState, t: &CollisionTensors) -> Result<CarlemanState> {
    expect(s, Order::Two, Cutoff::Truncation)?;
    apply(s, t, &VelocitySet::d2q9(), Scheme::Truncation2)
}

pub fn collide_truncate3(s: &CarlemanState, t: &CollisionTensors) -> Result<CarlemanState> {
    expect(s, Order::Three, Cutoff::Truncation)?;
    apply(s, t, &VelocitySet::d2q9(), Scheme::Truncation3)
}

/// Second-order closure: the cubic monomial is closed on the equilibrium
/// weights, which rescales the local quadratic term by `5/6` and couples the
/// pair field to the coincident-site pair values at both ends.
pub fn collide_closure2(
    s: &CarlemanState,
    t: &CollisionTensors,
    vs: &VelocitySet,
) -> Result<CarlemanState> {
    expect(s, Order::Two, Cutoff::Closure)?;
    apply(s, t, vs, Scheme::Closure2)
}

pub fn collide_closure3(
    s: &CarlemanState,
    t: &CollisionTensors,
    vs: &VelocitySet,
) -> Result<CarlemanState> {
    expect(s, Order::Three, Cutoff::Closure)?;
    apply(s, t, vs, Scheme::Closure3)
}

/// Dispatches on the state's order and cutoff.
pub fn collide(s: &CarlemanState, t: &CollisionTensors, vs: &VelocitySet) -> Result<CarlemanState> {
    match (s.order, s.cutoff) {
        (Order::Two, Cutoff::Truncation) => collide_truncate2(s, t),
        (Order::Two, Cutoff::Closure) => collide_closure2(s, t, vs),
        (Order::Three, Cutoff::Truncation) => collide_truncate3(s, t),
        (Order::Three, Cutoff::Closure) => collide_closure3(s, t, vs),
    }
}

fn expect(s: &CarlemanState, order: Order, cutoff: Cutoff) -> Result<()> {
    s.ensure_live()?;
    if s.order != order || s.cutoff != cutoff {
        return Err(Error::InvalidParameter(format!(
            "state is order {} {:?}, operation needs order {} {:?}",
            s.order.degree(),
            s.cutoff,
            order.degree(),
            cutoff
        )));
    }
    Ok(())
}

fn apply(
    s: &CarlemanState,
    t: &CollisionTensors,
    vs: &VelocitySet,
    scheme: Scheme,
) -> Result<CarlemanState> {
    let n = s.n_sites();
    let (f, g, h) = match s.locality {
        Locality::FullPairs => collide_full(scheme, t, vs, n, s.f.data(), &s.g, s.h.as_deref()),
        Locality::LocalSingleStep => collide_local(scheme, t, vs, n, s),
    };
    Ok(CarlemanState {
        f: LatticeField::from_data(s.f.nx(), s.f.ny(), f)?,
        g,
        h,
        ..s.clone()
    })
}

fn collide_local(
    scheme: Scheme,
    t: &CollisionTensors,
    vs: &VelocitySet,
    n: usize,
    s: &CarlemanState,
) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
    let h_in = s.h.as_deref();
    let per_site: Vec<_> = (0..n)
        .into_par_iter()
        .map(|x| {
            let f: Vec<f64> = (0..Q).map(|i| s.f.get(i, x)).collect();
            let mut g = Vec::with_capacity(Q * Q);
            for i in 0..Q {
                g.extend_from_slice(&s.g[(i * n + x) * Q..(i * n + x + 1) * Q]);
            }
            let h = h_in.map(|h| {
                let mut out = Vec::with_capacity(Q * Q * Q);
                for i in 0..Q {
                    let start = (i * n + x) * Q * Q;
                    out.extend_from_slice(&h[start..start + Q * Q]);
                }
                out
            });
            collide_full(scheme, t, vs, 1, &f, &g, h.as_deref())
        })
        .collect();

    let mut f = vec![0.0; Q * n];
    let mut g = vec![0.0; n * Q * Q];
    let mut h = h_in.map(|_| vec![0.0; n * Q * Q * Q]);
    for (x, (fx, gx, hx)) in per_site.into_iter().enumerate() {
        for i in 0..Q {
            f[i * n + x] = fx[i];
            g[(i * n + x) * Q..(i * n + x + 1) * Q].copy_from_slice(&gx[i * Q..(i + 1) * Q]);
            if let (Some(h), Some(hx)) = (h.as_mut(), hx.as_ref()) {
                let start = (i * n + x) * Q * Q;
                h[start..start + Q * Q].copy_from_slice(&hx[i * Q * Q..(i + 1) * Q * Q]);
            }
        }
    }
    (f, g, h)
}

/// Contracts `A` into one velocity slot of a tensor viewed as
/// `[outer][Q][inner]`: `out[o][i][..] = sum_k A_ik src[o][k][..]`.
pub(crate) fn mode_product(a: &[[f64; Q]; Q], src: &[f64], outer: usize, inner: usize) -> Vec<f64> {
    debug_assert_eq!(src.len(), outer * Q * inner);
    let mut out = vec![0.0; src.len()];
    out.par_chunks_mut(inner).enumerate().for_each(|(c, dst)| {
        let (o, i) = (c / Q, c % Q);
        let base = o * Q * inner;
        for k in 0..Q {
            let coef = a[i][k];
            let row = &src[base + k * inner..base + (k + 1) * inner];
            for (d, &v) in dst.iter_mut().zip(row) {
                *d += coef * v;
            }
        }
    });
    out
}

fn collide_full(
    scheme: Scheme,
    t: &CollisionTensors,
    vs: &VelocitySet,
    n: usize,
    f: &[f64],
    g: &[f64],
    h: Option<&[f64]>,
) -> (Vec<f64>, Vec<f64>, Option<Vec<f64>>) {
    let m = n * Q;
    let w = &vs.weights;

    // local quadratic term b_i(x) = B_ijk g_jk(x, x)
    let mut b_loc = vec![0.0; m];
    for x in 0..n {
        let diag: [[f64; Q]; Q] =
            std::array::from_fn(|j| std::array::from_fn(|k| g[(j * n + x) * m + k * n + x]));
        for i in 0..Q {
            b_loc[i * n + x] = contract_b(&t.b[i], &diag);
        }
    }

    let mut f_new = mode_product(&t.a, f, 1, n);
    let quad_coef = if scheme == Scheme::Closure2 { 5.0 / 6.0 } else { 1.0 };
    for (fo, b) in f_new.iter_mut().zip(&b_loc) {
        *fo += quad_coef * b;
    }

    // (A (x) A) g on the pair indices
    let mut g_new = mode_product(&t.a, &mode_product(&t.a, g, 1, n * m), m, n);

    let h_new = match scheme {
        Scheme::Truncation2 => None,
        Scheme::Closure2 => {
            let c = 5.0 / 18.0;
            g_new.par_chunks_mut(m).enumerate().for_each(|(p1, row)| {
                let (i, x1) = (p1 / n, p1 % n);
                for (p2, v) in row.iter_mut().enumerate() {
                    let (j, x2) = (p2 / n, p2 % n);
                    *v += c * (w[i] * b_loc[j * n + x2] + w[j] * b_loc[i * n + x1]);
                }
            });
            None
        }
        Scheme::Truncation3 | Scheme::Closure3 => {
            let h = h.expect("order-3 state carries a triple field");
            let cubic = cubic_local(t, n, h);
            for (fo, c) in f_new.iter_mut().zip(&cubic) {
                *fo += c;
            }
            let mixed = mixed_terms(t, n, h);
            let mut h_new = mode_product(
                &t.a,
                &mode_product(&t.a, &mode_product(&t.a, h, 1, n * m * m), m, n * m),
                m * m,
                n,
            );
            if scheme == Scheme::Truncation3 {
                for (v, s) in g_new.iter_mut().zip(&mixed) {
                    *v += s;
                }
            } else {
                let beta = beta_local(t, n, h);
                g_new.par_chunks_mut(m).enumerate().for_each(|(p1, row)| {
                    let i = p1 / n;
                    for (p2, v) in row.iter_mut().enumerate() {
                        let j = p2 / n;
                        *v += 7.0 / 8.0 * mixed[p1 * m + p2]
                            + 0.25 * (w[i] * beta[p2] + w[j] * beta[p1]);
                    }
                });
                h_new.par_chunks_mut(m).enumerate().for_each(|(p12, row)| {
                    let (p1, p2) = (p12 / m, p12 % m);
                    let (i, j) = (p1 / n, p2 / n);
                    for (p3, v) in row.iter_mut().enumerate() {
                        let k = p3 / n;
                        *v += 0.25
                            * (w[i] * mixed[p2 * m + p3]
                                + w[j] * mixed[p1 * m + p3]
                                + w[k] * mixed[p1 * m + p2])
                            + (w[i] * w[j] * beta[p3]
                                + w[i] * w[k] * beta[p2]
                                + w[j] * w[k] * beta[p1])
                                / 32.0;
                    }
                });
            }
            Some(h_new)
        }
    };
    (f_new, g_new, h_new)
}

#[inline]
fn contract_b(b_i: &[[f64; Q]; Q], v: &[[f64; Q]; Q]) -> f64 {
    let mut acc = 0.0;
    for j in 0..Q {
        for k in 0..Q {
            acc += b_i[j][k] * v[j][k];
        }
    }
    acc
}

/// `sigma_jk(x) = sum_l h_jkl(x, x, x)`.
fn coincident_sums(n: usize, h: &[f64], x: usize) -> [[f64; Q]; Q] {
    let m = n * Q;
    std::array::from_fn(|j| {
        std::array::from_fn(|k| {
            let base = ((j * n + x) * m + k * n + x) * m;
            (0..Q).map(|l| h[base + l * n + x]).sum()
        })
    })
}

/// `C_ijkl h_jkl(x, x, x)`.
fn cubic_local(t: &CollisionTensors, n: usize, h: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * Q];
    for x in 0..n {
        let sigma = coincident_sums(n, h, x);
        for i in 0..Q {
            out[i * n + x] = t.cubic_scale() * contract_b(&t.qt[i], &sigma);
        }
    }
    out
}

/// `beta_i(x) = sum_kl B_ikl sum_n h_kln(x, x, x)`.
fn beta_local(t: &CollisionTensors, n: usize, h: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * Q];
    for x in 0..n {
        let sigma = coincident_sums(n, h, x);
        for i in 0..Q {
            out[i * n + x] = contract_b(&t.b[i], &sigma);
        }
    }
    out
}

/// Degree-3 contributions to the pair update,
/// `A_ik B_jlm h_klm(x1, x2, x2) + B_ikl A_jm h_klm(x1, x1, x2)`, as an `M x M` array.
fn mixed_terms(t: &CollisionTensors, n: usize, h: &[f64]) -> Vec<f64> {
    let m = n * Q;
    // P[(k,x1),(j,x2)] = B_jlm h(k x1, l x2, m x2)
    let mut p = vec![0.0; m * m];
    p.par_chunks_mut(m).enumerate().for_each(|(p1, row)| {
        for x2 in 0..n {
            let hv: [[f64; Q]; Q] = std::array::from_fn(|l| {
                std::array::from_fn(|mm| h[(p1 * m + l * n + x2) * m + mm * n + x2])
            });
            for j in 0..Q {
                row[j * n + x2] = contract_b(&t.b[j], &hv);
            }
        }
    });
    // R[(i,x1),(m,x2)] = B_ikl h(k x1, l x1, m x2)
    let mut r = vec![0.0; m * m];
    r.par_chunks_mut(m).enumerate().for_each(|(p1, row)| {
        let (i, x1) = (p1 / n, p1 % n);
        for (p3, out) in row.iter_mut().enumerate() {
            let hv: [[f64; Q]; Q] = std::array::from_fn(|k| {
                std::array::from_fn(|l| h[((k * n + x1) * m + l * n + x1) * m + p3])
            });
            *out = contract_b(&t.b[i], &hv);
        }
    });
    let mut out = mode_product(&t.a, &p, 1, n * m);
    let second = mode_product(&t.a, &r, m, n);
    for (o, s) in out.iter_mut().zip(&second) {
        *o += s;
    }
    out
}
