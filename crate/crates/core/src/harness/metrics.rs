use std::io::Write;

use crate::d2q9::Q;
use crate::lbm::LatticeField;
use crate::{Error, Result};

/// Reference values at or below this magnitude make the relative error undefined.
pub const DIVISION_EPS: f64 = 1e-12;

/// Relative root mean squared error `sqrt(sum_s ((a_s - b_s) / a_s)^2 / N)`
/// of `b` against the reference `a`.
pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::Shape(format!("rmse of {} vs {} values", a.len(), b.len())));
    }
    if a.is_empty() {
        return Err(Error::Shape("rmse of empty fields".into()));
    }
    let n = a.len() as f64;
    let mut acc = 0.0;
    for (site, (&x, &y)) in a.iter().zip(b).enumerate() {
        if !(x.abs() > DIVISION_EPS) {
            return Err(Error::DivisionGuard {
                site,
                eps: DIVISION_EPS,
            });
        }
        let r = (x - y) / x;
        acc += r * r / n;
    }
    Ok(acc.sqrt())
}

#[derive(Debug, Clone, PartialEq)]
pub struct RmseReport {
    pub per_velocity: [f64; Q],
    pub mean: f64,
    pub omega: f64,
    pub t: usize,
}

/// RMSE of every population `f_i` over the grid, and their mean.
pub fn mean_rmse(reference: &LatticeField, other: &LatticeField, omega: f64, t: usize) -> Result<RmseReport> {
    if reference.nx() != other.nx() || reference.ny() != other.ny() {
        return Err(Error::Shape("fields have different grids".into()));
    }
    let mut per_velocity = [0.0; Q];
    for (i, out) in per_velocity.iter_mut().enumerate() {
        *out = rmse(reference.population(i), other.population(i))?;
    }
    Ok(RmseReport {
        mean: per_velocity.iter().sum::<f64>() / Q as f64,
        per_velocity,
        omega,
        t,
    })
}

pub(crate) fn rmse_header() -> String {
    let cols: Vec<String> = (0..Q).map(|i| format!("rmse_{i}")).collect();
    cols.join(",")
}

impl RmseReport {
    pub(crate) fn csv_fields(&self) -> String {
        let cols: Vec<String> = self.per_velocity.iter().map(|v| v.to_string()).collect();
        format!("{},{},{},{}", self.t, self.omega, cols.join(","), self.mean)
    }

    /// CSV with one row: `t,omega,rmse_0..rmse_8,mean_rmse`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "t,omega,{},mean_rmse", rmse_header())?;
        writeln!(w, "{}", self.csv_fields())
    }
}
