//! Sampled truncated Hilbert transform with a half-step shift between the
//! object and data grids.

use std::f64::consts::PI;
use std::io::Write;

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::geometry::Geometry;

/// Uniform grid `start + k * step`, `k = 0..count`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SampledGrid {
    pub start: f64,
    pub step: f64,
    pub count: usize,
}

impl SampledGrid {
    pub fn new(start: f64, step: f64, count: usize) -> Result<Self> {
        if !(step > 0.0) || !start.is_finite() || count == 0 {
            return Err(Error::InvalidArgument(format!(
                "grid needs step > 0 and count >= 1, got step {step}, count {count}"
            )));
        }
        Ok(Self { start, step, count })
    }

    pub fn point(&self, k: usize) -> f64 {
        self.start + k as f64 * self.step
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.count).map(|k| self.point(k)).collect()
    }

    /// Indices of samples strictly inside `(lo, hi)`.
    pub fn indices_within(&self, lo: f64, hi: f64) -> std::ops::Range<usize> {
        let first = (0..self.count).find(|&k| self.point(k) > lo).unwrap_or(self.count);
        let end = (first..self.count).find(|&k| self.point(k) >= hi).unwrap_or(self.count);
        first..end
    }
}

#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    /// Rows follow the data grid, columns the object grid.
    pub matrix: DMatrix<f64>,
    pub data_grid: SampledGrid,
    pub object_grid: SampledGrid,
    pub step: f64,
    pub geometry: Geometry,
}

/// Number of whole steps in `len`, tolerant of round-off in the quotient.
fn whole_steps(len: f64, step: f64) -> usize {
    let q = len / step;
    (q + 1e-9 * q.max(1.0)).floor() as usize
}

pub fn build_operator(geom: &Geometry, step: f64, shift: f64) -> Result<DiscreteOperator> {
    if !(step > 0.0 && step.is_finite()) {
        return Err(Error::InvalidArgument(format!("step must be positive, got {step}")));
    }
    if !(shift > 0.0 && shift < 1.0) {
        return Err(Error::InvalidArgument(format!("shift must lie in (0, 1), got {shift}")));
    }
    let rows = whole_steps(geom.a3 - geom.a1, step) + 1;
    let data_grid = SampledGrid::new(geom.a1, step, rows)?;

    let lo = geom.a2 - step;
    let hi = geom.a4 + step;
    let raw_start = geom.a2 - shift * step;
    let raw: Vec<f64> = (0..=whole_steps(geom.a4 - geom.a2, step))
        .map(|j| raw_start + j as f64 * step)
        .collect();
    let kept: Vec<usize> = (0..raw.len()).filter(|&j| raw[j] > lo && raw[j] < hi).collect();
    let first = *kept.first().ok_or_else(|| Error::InvalidArgument("empty object grid".into()))?;
    let object_grid = SampledGrid::new(raw[first], step, kept.len())?;

    let xs = data_grid.points();
    let ys = object_grid.points();
    for (i, &x) in xs.iter().enumerate() {
        for (j, &y) in ys.iter().enumerate() {
            if (y - x).abs() < 1e-12 * step {
                return Err(Error::GridCollision { row: i, col: j });
            }
        }
    }
    let w = step / PI;
    let matrix = DMatrix::from_fn(rows, ys.len(), |i, j| w / (ys[j] - xs[i]));
    Ok(DiscreteOperator { matrix, data_grid, object_grid, step, geometry: *geom })
}

impl DiscreteOperator {
    pub fn rows(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn cols(&self) -> usize {
        self.matrix.ncols()
    }

    /// Writes the matrix row by row in scientific notation.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        for i in 0..self.rows() {
            let row: Vec<String> =
                (0..self.cols()).map(|j| format!("{:.17e}", self.matrix[(i, j)])).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }
}

fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected != got {
        return Err(Error::DimensionMismatch { expected, got });
    }
    Ok(())
}

pub fn apply_forward(op: &DiscreteOperator, f: &[f64]) -> Result<Vec<f64>> {
    check_len(op.cols(), f.len())?;
    let out = &op.matrix * DVector::from_column_slice(f);
    Ok(out.as_slice().to_vec())
}

pub fn apply_adjoint(op: &DiscreteOperator, g: &[f64]) -> Result<Vec<f64>> {
    check_len(op.rows(), g.len())?;
    let out = op.matrix.tr_mul(&DVector::from_column_slice(g));
    Ok(out.as_slice().to_vec())
}

/// Step-weighted inner product, the discrete analogue of the L2 pairing.
pub fn weighted_dot(a: &[f64], b: &[f64], step: f64) -> f64 {
    step * a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>()
}

pub fn weighted_norm(a: &[f64], step: f64) -> f64 {
    weighted_dot(a, a, step).sqrt()
}
