use crate::d2q9::Q;
use crate::lbm::LatticeField;
use crate::{Error, Result};

/// Default ceiling on the bytes a lifted state may occupy (2 GiB).
pub const DEFAULT_MEMORY_CAP: u64 = 2 << 30;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    Two,
    Three,
}

impl Order {
    pub fn degree(self) -> usize {
        match self {
            Order::Two => 2,
            Order::Three => 3,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cutoff {
    Truncation,
    Closure,
}

/// Which position tuples the lifted variables cover.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Locality {
    /// All pairs (triples) of sites; required for multi-step evolution.
    FullPairs,
    /// Only coincident sites `g_ij(x, x)`; valid for a single collision.
    LocalSingleStep,
}

/// Lifted state `V = (f, g[, h])`.
///
/// Layouts, with `p = i * N + x` the flat (velocity, site) index of `f`:
///
/// * full pairs: `g[p1 * NQ + p2]`, `h[(p1 * NQ + p2) * NQ + p3]`, i.e.
///   row-major over `(i, x1, j, x2[, k, x3])`;
/// * local: `g[(i * N + x) * Q + j]`, `h[((i * N + x) * Q + j) * Q + k]`.
#[derive(Debug, Clone, PartialEq)]
pub struct CarlemanState {
    pub(crate) order: Order,
    pub(crate) cutoff: Cutoff,
    pub(crate) locality: Locality,
    pub(crate) f: LatticeField,
    pub(crate) g: Vec<f64>,
    pub(crate) h: Option<Vec<f64>>,
    pub(crate) exhausted: bool,
}

/// Number of stored pair and triple entries for `n` sites.
pub fn lifted_lengths(n: usize, order: Order, locality: Locality) -> (u128, u128) {
    let (n, q) = (n as u128, Q as u128);
    let (g, h) = match locality {
        Locality::FullPairs => ((n * q).pow(2), (n * q).pow(3)),
        Locality::LocalSingleStep => (n * q * q, n * q * q * q),
    };
    match order {
        Order::Two => (g, 0),
        Order::Three => (g, h),
    }
}

pub(crate) fn check_capacity(
    n: usize,
    order: Order,
    locality: Locality,
    cap_bytes: u64,
) -> Result<()> {
    let (g, h) = lifted_lengths(n, order, locality);
    let entries = (n * Q) as u128 + g + h;
    let required = entries * std::mem::size_of::<f64>() as u128;
    if required > cap_bytes as u128 {
        let formula = match (order, locality) {
            (Order::Two, Locality::FullPairs) => "NQ + (NQ)^2",
            (Order::Three, Locality::FullPairs) => "NQ + (NQ)^2 + (NQ)^3",
            (Order::Two, Locality::LocalSingleStep) => "NQ + NQ^2",
            (Order::Three, Locality::LocalSingleStep) => "NQ + NQ^2 + NQ^3",
        };
        return Err(Error::Capacity {
            what: format!("{formula} = {entries} entries for N = {n}"),
            required,
            cap: cap_bytes as u128,
        });
    }
    Ok(())
}

/// Products `g = f (x) f` (and `h = f (x) f (x) f`) over the requested tuples.
pub fn lift(
    f: &LatticeField,
    order: Order,
    cutoff: Cutoff,
    locality: Locality,
    memory_cap: u64,
) -> Result<CarlemanState> {
    let n = f.n_sites();
    check_capacity(n, order, locality, memory_cap)?;
    let v = f.data();
    let m = n * Q;
    let (g, h) = match locality {
        Locality::FullPairs => {
            let mut g = vec![0.0; m * m];
            for (p1, row) in g.chunks_exact_mut(m).enumerate() {
                for (p2, out) in row.iter_mut().enumerate() {
                    *out = v[p1] * v[p2];
                }
            }
            let h = (order == Order::Three).then(|| {
                let mut h = vec![0.0; m * m * m];
                for (p12, row) in h.chunks_exact_mut(m).enumerate() {
                    let prefix = g[p12];
                    for (p3, out) in row.iter_mut().enumerate() {
                        *out = prefix * v[p3];
                    }
                }
                h
            });
            (g, h)
        }
        Locality::LocalSingleStep => {
            let mut g = vec![0.0; n * Q * Q];
            let mut h = (order == Order::Three).then(|| vec![0.0; n * Q * Q * Q]);
            for i in 0..Q {
                for x in 0..n {
                    let fi = f.get(i, x);
                    for j in 0..Q {
                        let gij = fi * f.get(j, x);
                        g[(i * n + x) * Q + j] = gij;
                        if let Some(h) = h.as_mut() {
                            for k in 0..Q {
                                h[((i * n + x) * Q + j) * Q + k] = gij * f.get(k, x);
                            }
                        }
                    }
                }
            }
            (g, h)
        }
    };
    Ok(CarlemanState {
        order,
        cutoff,
        locality,
        f: f.clone(),
        g,
        h,
        exhausted: false,
    })
}

impl CarlemanState {
    /// Assembles a state from raw components, validating their lengths.
    pub fn from_parts(
        order: Order,
        cutoff: Cutoff,
        locality: Locality,
        f: LatticeField,
        g: Vec<f64>,
        h: Option<Vec<f64>>,
    ) -> Result<Self> {
        let (g_len, h_len) = lifted_lengths(f.n_sites(), order, locality);
        if g.len() as u128 != g_len {
            return Err(Error::Shape(format!("pair field needs {g_len} entries, got {}", g.len())));
        }
        match (&h, order) {
            (None, Order::Two) => {}
            (Some(h), Order::Three) if h.len() as u128 == h_len => {}
            _ => {
                return Err(Error::Shape(format!(
                    "triple field must hold {h_len} entries for order {}",
                    order.degree()
                )))
            }
        }
        Ok(Self {
            order,
            cutoff,
            locality,
            f,
            g,
            h,
            exhausted: false,
        })
    }

    /// Rebuilds a state of the same shape from a flat Carleman vector.
    pub fn with_vector(&self, v: &[f64]) -> Result<Self> {
        let nf = self.f.data().len();
        let ng = self.g.len();
        let nh = self.h.as_ref().map_or(0, Vec::len);
        if v.len() != nf + ng + nh {
            return Err(Error::Shape(format!(
                "Carleman vector needs {} entries, got {}",
                nf + ng + nh,
                v.len()
            )));
        }
        let f = LatticeField::from_data(self.f.nx(), self.f.ny(), v[..nf].to_vec())?;
        let h = self.h.as_ref().map(|_| v[nf + ng..].to_vec());
        Ok(Self {
            f,
            g: v[nf..nf + ng].to_vec(),
            h,
            ..self.clone()
        })
    }

    pub fn order(&self) -> Order {
        self.order
    }

    pub fn cutoff(&self) -> Cutoff {
        self.cutoff
    }

    pub fn locality(&self) -> Locality {
        self.locality
    }

    pub fn is_exhausted(&self) -> bool {
        self.exhausted
    }

    pub fn f(&self) -> &LatticeField {
        &self.f
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn h(&self) -> Option<&[f64]> {
        self.h.as_deref()
    }

    pub fn n_sites(&self) -> usize {
        self.f.n_sites()
    }

    /// Flat index of `g_ij(x1, x2)`. Local states only accept `x1 == x2`.
    pub fn g_index(&self, i: usize, x1: usize, j: usize, x2: usize) -> Option<usize> {
        let n = self.n_sites();
        match self.locality {
            Locality::FullPairs => Some((i * n + x1) * n * Q + j * n + x2),
            Locality::LocalSingleStep => (x1 == x2).then(|| (i * n + x1) * Q + j),
        }
    }

    /// Flat index of `h_ijk(x1, x2, x3)`.
    pub fn h_index(
        &self,
        (i, x1): (usize, usize),
        (j, x2): (usize, usize),
        (k, x3): (usize, usize),
    ) -> Option<usize> {
        let n = self.n_sites();
        let m = n * Q;
        match self.locality {
            Locality::FullPairs => Some(((i * n + x1) * m + j * n + x2) * m + k * n + x3),
            Locality::LocalSingleStep => {
                (x1 == x2 && x2 == x3).then(|| ((i * n + x1) * Q + j) * Q + k)
            }
        }
    }

    /// `V = (f, g[, h])` in canonical degree-major order.
    pub fn to_vector(&self) -> Vec<f64> {
        let mut v = Vec::with_capacity(
            self.f.data().len() + self.g.len() + self.h.as_ref().map_or(0, Vec::len),
        );
        v.extend_from_slice(self.f.data());
        v.extend_from_slice(&self.g);
        if let Some(h) = &self.h {
            v.extend_from_slice(h);
        }
        v
    }

    pub fn with_cutoff(mut self, cutoff: Cutoff) -> Self {
        self.cutoff = cutoff;
        self
    }

    pub(crate) fn ensure_live(&self) -> Result<()> {
        if self.exhausted {
            Err(Error::StateExhausted)
        } else {
            Ok(())
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::d2q9::build_velocity_set;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_field(nx: usize, ny: usize, seed: u64) -> LatticeField {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let data = (0..Q * nx * ny).map(|_| rng.random_range(0.01..0.5)).collect();
        LatticeField::from_data(nx, ny, data).unwrap()
    }

    #[test]
    fn single_site_weights() {
        let vs = build_velocity_set();
        let f = LatticeField::uniform(1, 1, &vs.weights);
        let s = lift(&f, Order::Two, Cutoff::Truncation, Locality::FullPairs, DEFAULT_MEMORY_CAP)
            .unwrap();
        for i in 0..Q {
            for j in 0..Q {
                assert_eq!(s.g[s.g_index(i, 0, j, 0).unwrap()], vs.weights[i] * vs.weights[j]);
            }
        }
    }

    #[test]
    fn products_spot_check() {
        let f = random_field(3, 4, 5);
        let n = f.n_sites();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for locality in [Locality::FullPairs, Locality::LocalSingleStep] {
            let s = lift(&f, Order::Three, Cutoff::Truncation, locality, DEFAULT_MEMORY_CAP)
                .unwrap();
            for _ in 0..100 {
                let (i, j, k) = (rng.random_range(0..Q), rng.random_range(0..Q), rng.random_range(0..Q));
                let x = rng.random_range(0..n);
                let g = s.g[s.g_index(i, x, j, x).unwrap()];
                assert_eq!(g, f.get(i, x) * f.get(j, x));
                let h = s.h().unwrap()[s.h_index((i, x), (j, x), (k, x)).unwrap()];
                assert!((h - f.get(i, x) * f.get(j, x) * f.get(k, x)).abs() <= 1e-14);
            }
        }
    }

    #[test]
    fn full_pair_count() {
        let f = random_field(2, 2, 1);
        let s = lift(&f, Order::Two, Cutoff::Truncation, Locality::FullPairs, DEFAULT_MEMORY_CAP)
            .unwrap();
        assert_eq!(s.g().len(), 1296);
        assert_eq!(s.to_vector().len(), 36 + 1296);
    }

    #[test]
    fn local_layout_is_symmetric_at_coincident_sites() {
        let f = random_field(2, 3, 2);
        let s = lift(&f, Order::Two, Cutoff::Truncation, Locality::LocalSingleStep, DEFAULT_MEMORY_CAP)
            .unwrap();
        for x in 0..6 {
            for i in 0..Q {
                for j in 0..Q {
                    assert_eq!(
                        s.g[s.g_index(i, x, j, x).unwrap()],
                        s.g[s.g_index(j, x, i, x).unwrap()]
                    );
                }
            }
        }
        assert_eq!(s.g_index(0, 0, 0, 1), None);
    }

    #[test]
    fn capacity_error_names_formula() {
        let f = random_field(16, 16, 3);
        let err = lift(&f, Order::Three, Cutoff::Truncation, Locality::FullPairs, DEFAULT_MEMORY_CAP)
            .unwrap_err();
        match err {
            Error::Capacity { what, required, cap } => {
                assert!(what.contains("(NQ)^3"));
                assert!(required > cap);
            }
            other => panic!("unexpected {other:?}"),
        }
        assert!(lift(&f, Order::Two, Cutoff::Truncation, Locality::FullPairs, 1 << 20).is_err());
    }

    #[test]
    fn vector_round_trip() {
        let f = random_field(2, 1, 4);
        let s = lift(&f, Order::Three, Cutoff::Closure, Locality::FullPairs, DEFAULT_MEMORY_CAP)
            .unwrap();
        let v = s.to_vector();
        assert_eq!(s.with_vector(&v).unwrap(), s);
        assert!(s.with_vector(&v[1..]).is_err());
    }
}
