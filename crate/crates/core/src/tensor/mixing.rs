//! The banded lower-triangular time-mixing matrix and its inverse.
//!
//! Index convention: the defining formula is 1-based (row `t`, bandwidth `b`
//! gives value `1/min(b, t)` on columns `max(1, t-b+1)..=t`). Storage is
//! 0-based throughout; row `t0` here corresponds to `t = t0 + 1`. This is the
//! single place where the mapping is spelled out.

use crate::error::{Error, Result};
use crate::tensor::SquareMatrix;

/// Lower-triangular banded mixing matrix together with its precomputed
/// inverse. The inverse is computed once by forward substitution because it
/// is applied on every layer call.
#[derive(Debug, Clone)]
pub struct MixingMatrix {
    t: usize,
    bandwidth: usize,
    entries: SquareMatrix,
    inverse: SquareMatrix,
}

/// Builds the banded averaging matrix: row `t` holds `1/min(b, t)` on the
/// `min(b, t)` columns ending at the diagonal, zero elsewhere. Every row sums
/// to one, so mixing preserves constant fibers.
pub fn banded_m(t: usize, b: usize) -> Result<MixingMatrix> {
    if t == 0 {
        return Err(Error::parameter("T", "must be >= 1".to_string()));
    }
    if b < 1 || b > t {
        return Err(Error::parameter(
            "bandwidth",
            format!("{b} outside the valid interval [1, {t}]"),
        ));
    }
    let mut entries = SquareMatrix::zeros(t);
    for row in 0..t {
        let width = b.min(row + 1);
        let value = 1.0 / width as f64;
        let lo = (row + 1).saturating_sub(b);
        for col in lo..=row {
            entries.set(row, col, value);
        }
    }
    MixingMatrix::from_lower_triangular(entries, b)
}

impl MixingMatrix {
    /// The identity mixing (bandwidth 1): transforms are no-ops.
    pub fn identity(t: usize) -> Result<Self> {
        banded_m(t, 1)
    }

    fn from_lower_triangular(entries: SquareMatrix, bandwidth: usize) -> Result<Self> {
        let t = entries.size();
        let inverse = invert_lower_triangular(&entries)?;
        let product = entries.matmul(&inverse)?;
        let residual = product.max_abs_diff(&SquareMatrix::identity(t));
        if residual > 1e-10 {
            return Err(Error::Numerical(format!(
                "mixing matrix inverse check failed: |M*Minv - I| = {residual:.3e}"
            )));
        }
        Ok(Self {
            t,
            bandwidth,
            entries,
            inverse,
        })
    }

    pub fn t_len(&self) -> usize {
        self.t
    }

    pub fn bandwidth(&self) -> usize {
        self.bandwidth
    }

    pub fn entries(&self) -> &SquareMatrix {
        &self.entries
    }

    pub fn inverse(&self) -> &SquareMatrix {
        &self.inverse
    }
}

/// Inverts a lower-triangular matrix column by column with forward
/// substitution. Errors on a (near-)zero diagonal.
fn invert_lower_triangular(m: &SquareMatrix) -> Result<SquareMatrix> {
    let n = m.size();
    let mut inv = SquareMatrix::zeros(n);
    for col in 0..n {
        for row in col..n {
            let diag = m.get(row, row);
            if diag.abs() < 1e-14 {
                return Err(Error::Numerical(format!(
                    "singular mixing matrix: zero diagonal at row {row}"
                )));
            }
            let mut acc = if row == col { 1.0 } else { 0.0 };
            for k in col..row {
                acc -= m.get(row, k) * inv.get(k, col);
            }
            inv.set(row, col, acc / diag);
        }
    }
    Ok(inv)
}
