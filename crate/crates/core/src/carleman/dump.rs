//! Binary dump of a Carleman vector.
//!
//! Layout: a 16-byte header `b"CLBV"`, order, N, Q (each `u32` little
//! endian), then the vector `V = (f, g[, h])` as little-endian `f64`.

use std::io::{Read, Write};

use super::state::{lifted_lengths, CarlemanState, Cutoff, Locality, Order};
use crate::d2q9::Q;
use crate::lbm::LatticeField;
use crate::{Error, Result};

pub const DUMP_MAGIC: [u8; 4] = *b"CLBV";

pub fn write_v_dump<W: Write>(s: &CarlemanState, mut w: W) -> Result<()> {
    w.write_all(&DUMP_MAGIC)?;
    w.write_all(&(s.order().degree() as u32).to_le_bytes())?;
    w.write_all(&(s.n_sites() as u32).to_le_bytes())?;
    w.write_all(&(Q as u32).to_le_bytes())?;
    for v in s.to_vector() {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

/// Reads a dump written by [`write_v_dump`]. The grid shape and cut-off are
/// not stored; locality is inferred from the payload length (for one site the
/// two layouts coincide and the state is reported as full pairs).
pub fn read_v_dump<R: Read>(mut r: R, nx: usize, ny: usize, cutoff: Cutoff) -> Result<CarlemanState> {
    let mut header = [0u8; 16];
    r.read_exact(&mut header)
        .map_err(|e| Error::Dump(format!("short header: {e}")))?;
    if header[..4] != DUMP_MAGIC {
        return Err(Error::Dump("bad magic".into()));
    }
    let word = |k: usize| u32::from_le_bytes(header[4 * k..4 * k + 4].try_into().unwrap()) as usize;
    let order = match word(1) {
        2 => Order::Two,
        3 => Order::Three,
        o => return Err(Error::Dump(format!("unsupported order {o}"))),
    };
    let (n, q) = (word(2), word(3));
    if q != Q {
        return Err(Error::Dump(format!("expected Q = {Q}, found {q}")));
    }
    if n != nx * ny {
        return Err(Error::Dump(format!("dump holds {n} sites, grid {nx}x{ny} has {}", nx * ny)));
    }
    let mut payload = Vec::new();
    r.read_to_end(&mut payload)?;
    if payload.len() % 8 != 0 {
        return Err(Error::Dump("payload is not a whole number of f64 values".into()));
    }
    let values: Vec<f64> = payload
        .chunks_exact(8)
        .map(|b| f64::from_le_bytes(b.try_into().unwrap()))
        .collect();

    let nf = n * Q;
    let total = |loc| {
        let (g, h) = lifted_lengths(n, order, loc);
        nf as u128 + g + h
    };
    let locality = if values.len() as u128 == total(Locality::FullPairs) {
        Locality::FullPairs
    } else if values.len() as u128 == total(Locality::LocalSingleStep) {
        Locality::LocalSingleStep
    } else {
        return Err(Error::Dump(format!(
            "payload of {} values matches no layout for order {} and N = {n}",
            values.len(),
            order.degree()
        )));
    };
    let (ng, _) = lifted_lengths(n, order, locality);
    let ng = ng as usize;
    let f = LatticeField::from_data(nx, ny, values[..nf].to_vec())?;
    let g = values[nf..nf + ng].to_vec();
    let h = (order == Order::Three).then(|| values[nf + ng..].to_vec());
    CarlemanState::from_parts(order, cutoff, locality, f, g, h)
}

#[cfg(test)]
mod tests {
    use super::super::state::{lift, DEFAULT_MEMORY_CAP};
    use super::*;
    use crate::d2q9::build_velocity_set;

    #[test]
    fn round_trip_each_layout() {
        let vs = build_velocity_set();
        let mut f = LatticeField::uniform(2, 1, &vs.weights);
        f.set(3, 1, 0.7);
        for order in [Order::Two, Order::Three] {
            for loc in [Locality::FullPairs, Locality::LocalSingleStep] {
                let s = lift(&f, order, Cutoff::Closure, loc, DEFAULT_MEMORY_CAP).unwrap();
                let mut buf = Vec::new();
                write_v_dump(&s, &mut buf).unwrap();
                assert_eq!(&buf[..4], b"CLBV");
                let back = read_v_dump(buf.as_slice(), 2, 1, Cutoff::Closure).unwrap();
                assert_eq!(back, s);
            }
        }
    }

    #[test]
    fn rejects_corrupt_input() {
        let vs = build_velocity_set();
        let f = LatticeField::uniform(1, 1, &vs.weights);
        let s = lift(&f, Order::Two, Cutoff::Truncation, Locality::FullPairs, DEFAULT_MEMORY_CAP).unwrap();
        let mut buf = Vec::new();
        write_v_dump(&s, &mut buf).unwrap();
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(matches!(read_v_dump(bad.as_slice(), 1, 1, Cutoff::Truncation), Err(Error::Dump(_))));
        assert!(read_v_dump(&buf[..buf.len() - 8], 1, 1, Cutoff::Truncation).is_err());
        assert!(read_v_dump(buf.as_slice(), 2, 1, Cutoff::Truncation).is_err());
        assert!(read_v_dump(&buf[..10], 1, 1, Cutoff::Truncation).is_err());
    }
}
