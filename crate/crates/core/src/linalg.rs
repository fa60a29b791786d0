//! Thin wrappers around nalgebra's dense decompositions. Everything else in
//! the crate stores matrices as `ndarray::Array2`; only SVD and symmetric
//! eigendecomposition cross this boundary.

use nalgebra::DMatrix;
use ndarray::Array2;

fn to_dmatrix(m: &Array2<f64>) -> DMatrix<f64> {
    DMatrix::from_fn(m.nrows(), m.ncols(), |i, j| m[[i, j]])
}

/// All singular values of `m`, sorted descending.
pub fn singular_values(m: &Array2<f64>) -> Vec<f64> {
    let svd = to_dmatrix(m).svd(false, false);
    let mut sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    sv.sort_unstable_by(|a, b| b.partial_cmp(a).expect("singular values are finite"));
    sv
}

/// Eigendecomposition of a symmetric matrix: `(eigenvalues, eigenvectors)`
/// with eigenvectors as columns, in matching (unsorted) order.
pub fn symmetric_eigen(m: &Array2<f64>) -> (Vec<f64>, Array2<f64>) {
    let eig = to_dmatrix(m).symmetric_eigen();
    let n = eig.eigenvalues.len();
    let values: Vec<f64> = eig.eigenvalues.iter().copied().collect();
    let vectors = Array2::from_shape_fn((n, n), |(i, j)| eig.eigenvectors[(i, j)]);
    (values, vectors)
}
