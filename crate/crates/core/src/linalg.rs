use nalgebra::{DMatrix, DVector, SymmetricEigen};
use rand::Rng;
use rand_distr::StandardNormal;

/// Eigendecomposition `m = V diag(values) V^T` of a symmetric matrix.
#[derive(Clone, Debug)]
pub struct SymEigen {
    pub values: DVector<f64>,
    pub vectors: DMatrix<f64>,
}

impl SymEigen {
    pub fn new(m: &DMatrix<f64>) -> Self {
        // Implicit symmetric QR on the tridiagonal form, iterated to machine precision.
        let eig = SymmetricEigen::new(m.clone());
        Self { values: eig.eigenvalues, vectors: eig.eigenvectors }
    }

    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min(&self) -> f64 {
        self.values.iter().copied().fold(f64::INFINITY, f64::min)
    }
}

/// Largest singular value of `a`.
pub fn sigma_max(a: &DMatrix<f64>) -> f64 {
    if a.is_empty() {
        return 0.0;
    }
    SymEigen::new(&a.tr_mul(a)).max().max(0.0).sqrt()
}

/// Haar-distributed orthogonal matrix: QR of a standard Gaussian matrix with
/// the columns of Q flipped so that diag(R) is positive.
pub fn haar_orthogonal<R: Rng + ?Sized>(d: usize, rng: &mut R) -> DMatrix<f64> {
    let g = DMatrix::<f64>::from_fn(d, d, |_, _| rng.sample(StandardNormal));
    let qr = g.qr();
    let r = qr.r();
    let mut q = qr.q();
    for j in 0..d {
        if r[(j, j)] < 0.0 {
            q.column_mut(j).neg_mut();
        }
    }
    q
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng;

    #[test]
    fn haar_matrix_is_orthogonal() {
        let mut s = rng::stream(3, 0, rng::role::MATRIX);
        let q = haar_orthogonal(12, &mut s);
        let err = (q.tr_mul(&q) - DMatrix::identity(12, 12)).abs().max();
        assert!(err < 1e-12, "{err}");
    }

    #[test]
    fn sigma_max_of_diagonal() {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![2.0, -5.0, 1.0]));
        assert!((sigma_max(&a) - 5.0).abs() < 1e-12);
    }
}
