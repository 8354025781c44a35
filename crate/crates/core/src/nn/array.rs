//! Dense real-valued arrays (1-D or 2-D, row-major f64) used for model
//! parameters, gradients, and optimizer state.

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Array {
    rows: usize,
    cols: usize,
    rank: u8,
    data: Vec<f64>,
}

impl Array {
    pub fn vector(len: usize) -> Array {
        Array {
            rows: len,
            cols: 1,
            rank: 1,
            data: vec![0.0; len],
        }
    }

    pub fn matrix(rows: usize, cols: usize) -> Array {
        Array {
            rows,
            cols,
            rank: 2,
            data: vec![0.0; rows * cols],
        }
    }

    pub fn from_vec(data: Vec<f64>) -> Array {
        Array {
            rows: data.len(),
            cols: 1,
            rank: 1,
            data,
        }
    }

    pub fn from_rows(rows: usize, cols: usize, data: Vec<f64>) -> Array {
        assert_eq!(data.len(), rows * cols);
        Array {
            rows,
            cols,
            rank: 2,
            data,
        }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn rank(&self) -> u8 {
        self.rank
    }

    pub fn len(&self) -> usize {
        self.data.len()
    }

    pub fn is_empty(&self) -> bool {
        self.data.is_empty()
    }

    pub fn dims(&self) -> Vec<usize> {
        if self.rank == 1 {
            vec![self.rows]
        } else {
            vec![self.rows, self.cols]
        }
    }

    pub fn at(&self, r: usize, c: usize) -> f64 {
        self.data[r * self.cols + c]
    }

    pub fn at_mut(&mut self, r: usize, c: usize) -> &mut f64 {
        &mut self.data[r * self.cols + c]
    }

    pub fn row(&self, r: usize) -> &[f64] {
        &self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn row_mut(&mut self, r: usize) -> &mut [f64] {
        &mut self.data[r * self.cols..(r + 1) * self.cols]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data
    }

    pub fn fill(&mut self, v: f64) {
        self.data.iter_mut().for_each(|x| *x = v);
    }

    /// Same shape, zero-filled.
    pub fn zeros_like(&self) -> Array {
        Array {
            rows: self.rows,
            cols: self.cols,
            rank: self.rank,
            data: vec![0.0; self.data.len()],
        }
    }

    pub fn same_shape(&self, other: &Array) -> bool {
        self.rows == other.rows && self.cols == other.cols && self.rank == other.rank
    }

    /// Errors on the first NaN or infinity.
    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite(what));
        }
        Ok(())
    }
}
