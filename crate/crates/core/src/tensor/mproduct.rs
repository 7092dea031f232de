//! Mode-3 transform, face-wise product and the full tensor M-product.

use crate::error::{Error, Result};
use crate::tensor::{DenseTensor3, MixingMatrix, SquareMatrix};

/// Per-row nonzero column spans, so banded matrices cost `O(b)` per output
/// entry instead of `O(T)`. A row of exact zeros yields an empty span.
fn row_spans(m: &SquareMatrix) -> Vec<Option<(usize, usize)>> {
    let n = m.size();
    (0..n)
        .map(|r| {
            let row = m.row(r);
            let first = row.iter().position(|&v| v != 0.0)?;
            let last = row.iter().rposition(|&v| v != 0.0)?;
            Some((first, last))
        })
        .collect()
}

/// Mode-3 multiplication: `result[i][j][t] = sum_k m[t][k] * a[i][j][k]`.
/// Mixes information across frontal slices; slice contents stay put.
pub fn m_transform(a: &DenseTensor3, m: &SquareMatrix) -> Result<DenseTensor3> {
    let (d1, d2, d3) = a.dims();
    if d3 != m.size() {
        return Err(Error::shape("m_transform", (d1, d2, d3), (m.size(), m.size())));
    }
    let spans = row_spans(m);
    let mut out = vec![0.0; a.len()];
    let fibers = d1 * d2;
    for f in 0..fibers {
        let src = &a.values()[f * d3..(f + 1) * d3];
        let dst = &mut out[f * d3..(f + 1) * d3];
        for (t, span) in spans.iter().enumerate() {
            if let Some((lo, hi)) = span {
                let row = m.row(t);
                let mut acc = 0.0;
                for k in *lo..=*hi {
                    acc += row[k] * src[k];
                }
                dst[t] = acc;
            }
        }
    }
    Ok(DenseTensor3::from_parts((d1, d2, d3), out))
}

/// Applies the precomputed inverse mixing, undoing [`m_transform`] with the
/// matching matrix.
pub fn m_transform_inverse(a: &DenseTensor3, m: &MixingMatrix) -> Result<DenseTensor3> {
    m_transform(a, m.inverse())
}

/// Slice-by-slice matrix product: `result slice t = (a slice t) * (b slice t)`.
pub fn facewise_product(a: &DenseTensor3, b: &DenseTensor3) -> Result<DenseTensor3> {
    let (a1, a2, a3) = a.dims();
    let (b1, b2, b3) = b.dims();
    if a2 != b1 || a3 != b3 {
        return Err(Error::shape("facewise_product", (a1, a2, a3), (b1, b2, b3)));
    }
    let t = a3;
    let mut out = vec![0.0; a1 * b2 * t];
    // Fiber-fused loops: C[i][j][:] += A[i][k][:] * B[k][j][:], all contiguous.
    for i in 0..a1 {
        for k in 0..a2 {
            let a_fib = &a.values()[(i * a2 + k) * t..(i * a2 + k + 1) * t];
            for j in 0..b2 {
                let b_fib = &b.values()[(k * b2 + j) * t..(k * b2 + j + 1) * t];
                let c_fib = &mut out[(i * b2 + j) * t..(i * b2 + j + 1) * t];
                for s in 0..t {
                    c_fib[s] += a_fib[s] * b_fib[s];
                }
            }
        }
    }
    Ok(DenseTensor3::from_parts((a1, b2, t), out))
}

/// The tensor M-product: transform both operands, multiply face-wise, map
/// back with the inverse transform.
pub fn m_product(a: &DenseTensor3, b: &DenseTensor3, m: &MixingMatrix) -> Result<DenseTensor3> {
    let ta = m_transform(a, m.entries())?;
    let tb = m_transform(b, m.entries())?;
    let prod = facewise_product(&ta, &tb)?;
    m_transform_inverse(&prod, m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::banded_m;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fiber_tensor(values: &[f64]) -> DenseTensor3 {
        DenseTensor3::new(1, 1, values.len(), values.to_vec()).unwrap()
    }

    #[test]
    fn m_transform_identity_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let a = DenseTensor3::random_uniform(2, 3, 4, -1.0, 1.0, &mut rng);
        let out = m_transform(&a, &SquareMatrix::identity(4)).unwrap();
        assert_eq!(out, a);
    }

    #[test]
    fn m_transform_full_averaging_fiber() {
        // slices [1,2,3] under the full averaging band: [1, 1.5, 2]
        let a = fiber_tensor(&[1.0, 2.0, 3.0]);
        let m = banded_m(3, 3).unwrap();
        let out = m_transform(&a, m.entries()).unwrap();
        let expect = fiber_tensor(&[1.0, 1.5, 2.0]);
        assert!(out.max_abs_diff(&expect) < 1e-15);
    }

    #[test]
    fn m_transform_matches_unfold_multiply_fold() {
        // 2x2x2 with M = [[1,0],[0.5,0.5]]: slice 1 = A[:,:,0], slice 2 = mean.
        let a = DenseTensor3::from_fn(2, 2, 2, |i, j, k| (i * 4 + j * 2 + k + 1) as f64);
        let m = SquareMatrix::from_rows(&[&[1.0, 0.0], &[0.5, 0.5]]).unwrap();
        let out = m_transform(&a, &m).unwrap();
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(out.get(i, j, 0), a.get(i, j, 0));
                let mean = 0.5 * a.get(i, j, 0) + 0.5 * a.get(i, j, 1);
                assert!((out.get(i, j, 1) - mean).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn m_transform_shape_error_carries_both_shapes() {
        let a = DenseTensor3::zeros(2, 2, 3);
        let err = m_transform(&a, &SquareMatrix::identity(4)).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("(2, 2, 3)") && msg.contains("(4, 4)"), "{msg}");
    }

    #[test]
    fn inverse_recovers_fiber() {
        // forward-substitution oracle on a 1x1 fiber
        let b = fiber_tensor(&[1.0, 2.0, 3.0]);
        let m = banded_m(3, 2).unwrap();
        let a = m_transform(&b, m.entries()).unwrap();
        let back = m_transform_inverse(&a, &m).unwrap();
        assert!(back.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn inverse_identity_is_noop() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let a = DenseTensor3::random_uniform(3, 2, 5, -2.0, 2.0, &mut rng);
        let m = MixingMatrix::identity(5).unwrap();
        assert_eq!(m_transform_inverse(&a, &m).unwrap(), a);
    }

    #[test]
    fn roundtrip_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let a = DenseTensor3::random_uniform(3, 3, 5, -1.0, 1.0, &mut rng);
        let m = banded_m(5, 3).unwrap();
        let fwd = m_transform(&a, m.entries()).unwrap();
        let back = m_transform_inverse(&fwd, &m).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-10);
    }

    #[test]
    fn facewise_identity_slices_pass_through() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let b = DenseTensor3::random_uniform(3, 2, 4, -1.0, 1.0, &mut rng);
        let eye = DenseTensor3::from_fn(3, 3, 4, |i, j, _| if i == j { 1.0 } else { 0.0 });
        let out = facewise_product(&eye, &b).unwrap();
        assert!(out.max_abs_diff(&b) < 1e-15);
    }

    #[test]
    fn facewise_zero_annihilates() {
        let z = DenseTensor3::zeros(2, 2, 3);
        let b = DenseTensor3::from_fn(2, 2, 3, |i, j, k| (i + j + k) as f64 + 1.0);
        let out = facewise_product(&z, &b).unwrap();
        assert_eq!(out.max_abs(), 0.0);
    }

    #[test]
    fn facewise_matches_per_slice_matmul() {
        // A (2x2x2), B (2x1x2) with small integers, hand matmul per slice
        let a = DenseTensor3::new(2, 2, 2, vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0, 7.0, 8.0]).unwrap();
        let b = DenseTensor3::new(2, 1, 2, vec![1.0, -1.0, 2.0, 3.0]).unwrap();
        let out = facewise_product(&a, &b).unwrap();
        assert_eq!(out.dims(), (2, 1, 2));
        // slice 0: [[1,3],[5,7]] * [1,2]^T = [7, 19]
        assert_eq!(out.get(0, 0, 0), 1.0 * 1.0 + 3.0 * 2.0);
        assert_eq!(out.get(1, 0, 0), 5.0 * 1.0 + 7.0 * 2.0);
        // slice 1: [[2,4],[6,8]] * [-1,3]^T = [10, 18]
        assert_eq!(out.get(0, 0, 1), 2.0 * -1.0 + 4.0 * 3.0);
        assert_eq!(out.get(1, 0, 1), 6.0 * -1.0 + 8.0 * 3.0);
    }

    #[test]
    fn facewise_shape_errors() {
        let a = DenseTensor3::zeros(2, 3, 2);
        let b = DenseTensor3::zeros(2, 2, 2);
        assert!(facewise_product(&a, &b).is_err());
        let c = DenseTensor3::zeros(3, 2, 3);
        assert!(facewise_product(&a, &c).is_err());
    }

    #[test]
    fn m_product_identity_reduces_to_facewise() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let a = DenseTensor3::random_uniform(2, 3, 4, -1.0, 1.0, &mut rng);
        let b = DenseTensor3::random_uniform(3, 2, 4, -1.0, 1.0, &mut rng);
        let m = MixingMatrix::identity(4).unwrap();
        let viaproduct = m_product(&a, &b, &m).unwrap();
        let direct = facewise_product(&a, &b).unwrap();
        assert!(viaproduct.max_abs_diff(&direct) < 1e-12);
    }

    #[test]
    fn m_product_identity_slices_absorbed() {
        // row sums of the band equal one, so transformed identity slices stay
        // identity and the product returns B
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let b = DenseTensor3::random_uniform(3, 2, 4, -1.0, 1.0, &mut rng);
        let eye = DenseTensor3::from_fn(3, 3, 4, |i, j, _| if i == j { 1.0 } else { 0.0 });
        let m = banded_m(4, 2).unwrap();
        let out = m_product(&eye, &b, &m).unwrap();
        assert!(out.max_abs_diff(&b) < 1e-12);
    }

    #[test]
    fn m_product_matches_composed_oracle() {
        // straight-line composition of the three definitions, written out
        // independently of the banded kernel
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = DenseTensor3::random_uniform(2, 2, 3, -1.0, 1.0, &mut rng);
        let b = DenseTensor3::random_uniform(2, 2, 3, -1.0, 1.0, &mut rng);
        let m = banded_m(3, 2).unwrap();

        let dense_mt = |x: &DenseTensor3, mat: &SquareMatrix| {
            let (d1, d2, d3) = x.dims();
            DenseTensor3::from_fn(d1, d2, d3, |i, j, t| {
                (0..d3).map(|k| mat.get(t, k) * x.get(i, j, k)).sum()
            })
        };
        let ta = dense_mt(&a, m.entries());
        let tb = dense_mt(&b, m.entries());
        let mut prod = DenseTensor3::zeros(2, 2, 3);
        for t in 0..3 {
            for i in 0..2 {
                for j in 0..2 {
                    let mut acc = 0.0;
                    for k in 0..2 {
                        acc += ta.get(i, k, t) * tb.get(k, j, t);
                    }
                    prod.set(i, j, t, acc);
                }
            }
        }
        let expect = dense_mt(&prod, m.inverse());

        let got = m_product(&a, &b, &m).unwrap();
        assert!(got.max_abs_diff(&expect) < 1e-12);
    }

    #[test]
    fn banded_transform_is_causal() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let a = DenseTensor3::random_uniform(2, 2, 6, -1.0, 1.0, &mut rng);
        let m = banded_m(6, 3).unwrap();
        let base = m_transform(&a, m.entries()).unwrap();
        // perturb slice k = 4: slices t < 4 must be bitwise unchanged
        let mut perturbed = a.clone();
        for i in 0..2 {
            for j in 0..2 {
                perturbed.set(i, j, 4, perturbed.get(i, j, 4) + 1.0);
            }
        }
        let after = m_transform(&perturbed, m.entries()).unwrap();
        for t in 0..4 {
            for i in 0..2 {
                for j in 0..2 {
                    assert_eq!(base.get(i, j, t), after.get(i, j, t), "t={t}");
                }
            }
        }
        // slices inside the band [4, 6) must actually move
        for t in 4..6 {
            assert!(base.get(0, 0, t) != after.get(0, 0, t), "t={t}");
        }
    }
}
