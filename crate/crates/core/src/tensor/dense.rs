//! Dense third-order tensor storage.
//!
//! Layout is row-major with the third index fastest: entry `(i, j, k)` lives
//! at `(i * d2 + j) * d3 + k`. Mode-3 fibers (fixed `i, j`, varying `k`) are
//! therefore contiguous, which is what the time-mixing kernels iterate over.

use rand::Rng;

use crate::error::{Error, Result};

/// Real-valued third-order array. Carries features, adjacency slices and
/// weight stacks alike; the meaning of each axis is up to the caller.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseTensor3 {
    dims: (usize, usize, usize),
    values: Vec<f64>,
}

impl DenseTensor3 {
    /// Builds a tensor from externally supplied values, validating length
    /// and finiteness.
    pub fn new(d1: usize, d2: usize, d3: usize, values: Vec<f64>) -> Result<Self> {
        let expect = d1 * d2 * d3;
        if values.len() != expect {
            return Err(Error::shape(
                "DenseTensor3::new",
                (d1, d2, d3, expect),
                values.len(),
            ));
        }
        if let Some(pos) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::data(
                format!("value #{pos}"),
                format!("non-finite entry {}", values[pos]),
            ));
        }
        Ok(Self {
            dims: (d1, d2, d3),
            values,
        })
    }

    /// Internal constructor for computed results; skips the finiteness scan.
    pub(crate) fn from_parts(dims: (usize, usize, usize), values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), dims.0 * dims.1 * dims.2);
        Self { dims, values }
    }

    pub fn zeros(d1: usize, d2: usize, d3: usize) -> Self {
        Self {
            dims: (d1, d2, d3),
            values: vec![0.0; d1 * d2 * d3],
        }
    }

    pub fn from_fn(
        d1: usize,
        d2: usize,
        d3: usize,
        mut f: impl FnMut(usize, usize, usize) -> f64,
    ) -> Self {
        let mut values = Vec::with_capacity(d1 * d2 * d3);
        for i in 0..d1 {
            for j in 0..d2 {
                for k in 0..d3 {
                    values.push(f(i, j, k));
                }
            }
        }
        Self {
            dims: (d1, d2, d3),
            values,
        }
    }

    /// Entries drawn i.i.d. from `uniform(lo, hi)`.
    pub fn random_uniform<R: Rng>(d1: usize, d2: usize, d3: usize, lo: f64, hi: f64, rng: &mut R) -> Self {
        let values = (0..d1 * d2 * d3).map(|_| rng.gen_range(lo..hi)).collect();
        Self {
            dims: (d1, d2, d3),
            values,
        }
    }

    pub fn dims(&self) -> (usize, usize, usize) {
        self.dims
    }

    /// Total number of entries.
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    #[inline]
    pub(crate) fn index(&self, i: usize, j: usize, k: usize) -> usize {
        debug_assert!(i < self.dims.0 && j < self.dims.1 && k < self.dims.2);
        (i * self.dims.1 + j) * self.dims.2 + k
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize, k: usize) -> f64 {
        self.values[self.index(i, j, k)]
    }

    #[inline]
    pub fn set(&mut self, i: usize, j: usize, k: usize, v: f64) {
        let idx = self.index(i, j, k);
        self.values[idx] = v;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Elementwise sum; dims must match.
    pub fn add(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::shape("add", self.dims, other.dims));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a + b)
            .collect();
        Ok(Self::from_parts(self.dims, values))
    }

    /// Elementwise product; dims must match.
    pub fn hadamard(&self, other: &Self) -> Result<Self> {
        if self.dims != other.dims {
            return Err(Error::shape("hadamard", self.dims, other.dims));
        }
        let values = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a * b)
            .collect();
        Ok(Self::from_parts(self.dims, values))
    }

    pub fn scale(&self, factor: f64) -> Self {
        let values = self.values.iter().map(|v| v * factor).collect();
        Self::from_parts(self.dims, values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        let values = self.values.iter().map(|&v| f(v)).collect();
        Self::from_parts(self.dims, values)
    }

    /// In-place `self += factor * other`. Dims must already match.
    pub(crate) fn accumulate_scaled(&mut self, other: &Self, factor: f64) {
        debug_assert_eq!(self.dims, other.dims);
        for (a, b) in self.values.iter_mut().zip(&other.values) {
            *a += factor * b;
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!(self.dims, other.dims, "max_abs_diff dims");
        self.values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs()))
    }

    /// Swaps the first two axes of every frontal slice: result `(j, i, k)` =
    /// `self (i, j, k)`.
    pub fn transpose_slices(&self) -> Self {
        let (d1, d2, d3) = self.dims;
        let mut out = Self::zeros(d2, d1, d3);
        for i in 0..d1 {
            for j in 0..d2 {
                let src = &self.values[(i * d2 + j) * d3..(i * d2 + j) * d3 + d3];
                let dst_off = (j * d1 + i) * d3;
                out.values[dst_off..dst_off + d3].copy_from_slice(src);
            }
        }
        out
    }

    pub fn has_nan(&self) -> bool {
        self.values.iter().any(|v| v.is_nan())
    }
}
