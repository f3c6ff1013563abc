//! Row-major dense `f64` matrix shared by the scoring and forest code.

use alloc::vec::Vec;

use crate::catalog::FeatureVector;
use crate::math;
use crate::{Error, Result};

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl Matrix {
    pub fn new(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        if data.len() != rows * cols {
            return Err(Error::DimensionMismatch { expected: rows * cols, got: data.len() });
        }
        Ok(Self { rows, cols, data })
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let cols = rows.first().map_or(0, Vec::len);
        let mut data = Vec::with_capacity(rows.len() * cols);
        for r in rows {
            if r.len() != cols {
                return Err(Error::DimensionMismatch { expected: cols, got: r.len() });
            }
            data.extend_from_slice(r);
        }
        Ok(Self { rows: rows.len(), cols, data })
    }

    /// Selects `columns` of every vector.
    pub fn from_subspace(vectors: &[FeatureVector], columns: &[usize]) -> Self {
        let mut data = Vec::with_capacity(vectors.len() * columns.len());
        for v in vectors {
            data.extend(columns.iter().map(|&c| v.values[c]));
        }
        Self { rows: vectors.len(), cols: columns.len(), data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn map_inplace(&mut self, f: impl Fn(f64) -> f64) {
        self.data.iter_mut().for_each(|v| *v = f(*v));
    }

    /// Rescales every column to `[0, 1]`; constant columns become 0.
    pub fn min_max_columns(&mut self) {
        for c in 0..self.cols {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for r in 0..self.rows {
                let v = self.data[r * self.cols + c];
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let span = hi - lo;
            for r in 0..self.rows {
                let v = &mut self.data[r * self.cols + c];
                *v = if span > 0.0 { (*v - lo) / span } else { 0.0 };
            }
        }
    }

    pub(crate) fn distance(&self, i: usize, j: usize) -> f64 {
        let (a, b) = (self.row(i), self.row(j));
        let mut s = 0.0;
        for k in 0..a.len() {
            let d = a[k] - b[k];
            s += d * d;
        }
        math::sqrt(s)
    }
}

impl Matrix {
    /// Copies the listed rows, in order.
    pub fn select_rows(&self, indices: &[usize]) -> Matrix {
        let mut data = Vec::with_capacity(indices.len() * self.cols);
        for &i in indices {
            data.extend_from_slice(self.row(i));
        }
        Matrix { rows: indices.len(), cols: self.cols, data }
    }

    pub fn get(&self, row: usize, col: usize) -> f64 {
        self.data[row * self.cols + col]
    }
}
