//! Scalar abstraction shared by every numerical routine in the crate.
//!
//! All physics code is written against [`Real`], which is implemented for
//! `f32` and `f64`. The dense symmetric eigensolver is the one place where a
//! concrete backend is needed, so it lives on the trait and is dispatched per
//! type.

use std::fmt::{Debug, Display};
use std::iter::Sum;

use nalgebra::DMatrix;
use num_traits::{Float, FloatConst, FromPrimitive, NumAssign, ToPrimitive};

/// Real floating point type usable throughout the crate.
pub trait Real:
    Float
    + FloatConst
    + FromPrimitive
    + ToPrimitive
    + NumAssign
    + Sum
    + Default
    + Debug
    + Display
    + Send
    + Sync
    + nalgebra::Scalar
    + 'static
{
    /// Tolerance used when validating unit norms and similar invariants on
    /// construction. Scales with the machine epsilon of the type.
    fn validation_tol() -> Self;

    /// Full eigendecomposition of a real symmetric matrix.
    ///
    /// Returns eigenvalues in ascending order and the matching orthonormal
    /// eigenvectors as columns, or `None` when the solver fails.
    fn symmetric_eigen(matrix: &DMatrix<Self>) -> Option<(Vec<Self>, DMatrix<Self>)>;

    #[inline]
    fn lit(x: f64) -> Self {
        Self::from_f64(x).expect("literal representable in every Real type")
    }

    #[inline]
    fn to_f64_lossy(self) -> f64 {
        self.to_f64().unwrap_or(f64::NAN)
    }
}

macro_rules! impl_real {
    ($t:ty, $tol:expr) => {
        impl Real for $t {
            #[inline]
            fn validation_tol() -> Self {
                $tol
            }

            fn symmetric_eigen(matrix: &DMatrix<Self>) -> Option<(Vec<Self>, DMatrix<Self>)> {
                let n = matrix.nrows();
                if n != matrix.ncols() {
                    return None;
                }
                if n == 0 {
                    return Some((Vec::new(), DMatrix::zeros(0, 0)));
                }
                let mat = faer::Mat::<$t>::from_fn(n, n, |i, j| matrix[(i, j)]);
                let evd = mat.self_adjoint_eigen(faer::Side::Lower).ok()?;
                let values = evd.S().column_vector();
                let vectors = evd.U();
                let mut order: Vec<usize> = (0..n).collect();
                order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
                let energies: Vec<$t> = order.iter().map(|&k| values[k]).collect();
                if energies.iter().any(|e| !e.is_finite()) {
                    return None;
                }
                let eigvecs = DMatrix::from_fn(n, n, |i, k| vectors[(i, order[k])]);
                Some((energies, eigvecs))
            }
        }
    };
}

impl_real!(f64, 1e-10);
impl_real!(f32, 1e-4);

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn eigen_sorted_and_orthonormal() {
        let m = DMatrix::from_row_slice(3, 3, &[2.0, 1.0, 0.0, 1.0, 2.0, 1.0, 0.0, 1.0, 2.0]);
        let (vals, vecs) = f64::symmetric_eigen(&m).unwrap();
        let s = 2f64.sqrt();
        for (got, want) in vals.iter().zip([2.0 - s, 2.0, 2.0 + s]) {
            assert!((got - want).abs() < 1e-12);
        }
        let gram = vecs.transpose() * &vecs;
        assert!((gram - DMatrix::identity(3, 3)).abs().max() < 1e-12);
        let resid = &m * &vecs - &vecs * DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vals));
        assert!(resid.abs().max() < 1e-12);
    }

    #[test]
    fn eigen_single_precision() {
        let m = DMatrix::<f32>::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]);
        let (vals, _) = f32::symmetric_eigen(&m).unwrap();
        assert_eq!(vals, vec![-1.0, 1.0]);
    }
}
