//! Dense third-order tensors and the M-product algebra they support.
//!
//! All operations here are pure functions of their inputs: results are
//! deterministic and safe to compute from multiple threads over shared
//! references. Evaluation is sequential per call, so there is no
//! reduction-order variation between runs.

mod dense;
mod matrix;
mod mixing;
mod mproduct;

pub use dense::DenseTensor3;
pub use matrix::SquareMatrix;
pub use mixing::{banded_m, MixingMatrix};
pub use mproduct::{facewise_product, m_product, m_transform, m_transform_inverse};
