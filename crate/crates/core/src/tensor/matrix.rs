//! Small dense square matrices (mixing matrices, adjacency slices).

use crate::error::{Error, Result};

/// Row-major `n x n` real matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SquareMatrix {
    n: usize,
    values: Vec<f64>,
}

impl SquareMatrix {
    pub fn new(n: usize, values: Vec<f64>) -> Result<Self> {
        if values.len() != n * n {
            return Err(Error::shape("SquareMatrix::new", (n, n), values.len()));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(
                format!("entry ({}, {})", pos / n, pos % n),
                format!("non-finite value {}", values[pos]),
            ));
        }
        Ok(Self { n, values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            values: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.values[i * n + i] = 1.0;
        }
        m
    }

    pub fn from_rows(rows: &[&[f64]]) -> Result<Self> {
        let n = rows.len();
        let mut values = Vec::with_capacity(n * n);
        for row in rows {
            if row.len() != n {
                return Err(Error::shape("SquareMatrix::from_rows", n, row.len()));
            }
            values.extend_from_slice(row);
        }
        Self::new(n, values)
    }

    pub fn size(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, r: usize, c: usize) -> f64 {
        self.values[r * self.n + c]
    }

    #[inline]
    pub fn set(&mut self, r: usize, c: usize, v: f64) {
        self.values[r * self.n + c] = v;
    }

    #[inline]
    pub fn row(&self, r: usize) -> &[f64] {
        &self.values[r * self.n..(r + 1) * self.n]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn transpose(&self) -> Self {
        let n = self.n;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for c in 0..n {
                out.values[c * n + r] = self.values[r * n + c];
            }
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Result<Self> {
        if self.n != other.n {
            return Err(Error::shape("SquareMatrix::matmul", self.n, other.n));
        }
        let n = self.n;
        let mut out = Self::zeros(n);
        for r in 0..n {
            for k in 0..n {
                let a = self.values[r * n + k];
                if a == 0.0 {
                    continue;
                }
                for c in 0..n {
                    out.values[r * n + c] += a * other.values[k * n + c];
                }
            }
        }
        Ok(out)
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.n, other.n, "max_abs_diff size");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }
}
