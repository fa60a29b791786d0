//! Kernel and Markov-operator construction from a point configuration.
//!
//! The pipeline is: pairwise distances, a Gaussian affinity `A = exp(-D^2/eps)`,
//! and one of two normalizations into a row-stochastic operator `P`:
//!
//! * homogeneous: `P = Q^-1 A`, the classical diffusion-maps operator;
//! * anisotropic: `K = Q^-1 A Q^-1` followed by row normalization, which
//!   divides out the sampling density before building the Markov chain.
//!
//! Row sums and matrix-vector products on the operator path use the
//! correctly rounded summation in [`crate::fsum`], so every constructed
//! operator is bitwise equivariant under reordering of the input rows.

use crate::error::{Error, Result};
use crate::fsum;
use crate::linalg;
use ndarray::{Array1, Array2, ArrayView1};
use serde::{Deserialize, Serialize};

/// Point configuration: one observation per row, one coordinate per column.
pub type DataMatrix = Array2<f64>;

/// Distance between two points; the library itself only ever uses
/// [`Euclidean`], but the interface accepts alternatives.
pub trait Metric {
    fn distance(&self, a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64;
}

/// Standard L2 distance.
#[derive(Debug, Clone, Copy, Default)]
pub struct Euclidean;

impl Metric for Euclidean {
    fn distance(&self, a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
        // Feature order is fixed, so a plain sequential sum is already
        // independent of any row reordering.
        let mut s = 0.0;
        for (x, y) in a.iter().zip(b.iter()) {
            let d = x - y;
            s += d * d;
        }
        s.sqrt()
    }
}

/// Gaussian affinities together with the bandwidth that produced them.
/// Symmetric, unit diagonal, entries in (0, 1].
#[derive(Debug, Clone)]
pub struct AffinityMatrix {
    pub values: Array2<f64>,
    pub epsilon: f64,
}

/// Row sums of an affinity matrix. Every entry is at least 1 because each
/// point has unit self-affinity.
#[derive(Debug, Clone)]
pub struct DegreeDiagonal {
    pub degrees: Array1<f64>,
}

/// Which normalization produced a [`DiffusionOperator`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OperatorKind {
    /// `P = Q^-1 A`.
    Homogeneous,
    /// `P = RowNormalize(Q^-1 A Q^-1)`.
    Anisotropic,
}

/// Row-stochastic diffusion operator.
///
/// `degrees` holds the affinity row sums (the `Q` whose diagonal drives the
/// engine's convergence test); `kernel_degrees` holds the row sums of the
/// kernel that was row-normalized, which conjugates `P` to a symmetric
/// matrix and so certifies a real spectrum in [-1, 1].
#[derive(Debug, Clone)]
pub struct DiffusionOperator {
    pub values: Array2<f64>,
    pub epsilon: f64,
    pub kind: OperatorKind,
    pub degrees: DegreeDiagonal,
    pub kernel_degrees: Array1<f64>,
}

/// Checks shape and finiteness of a point configuration.
pub fn validate_data(x: &DataMatrix) -> Result<()> {
    if x.nrows() < 2 {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 points, got {}",
            x.nrows()
        )));
    }
    if x.ncols() < 1 {
        return Err(Error::InvalidParameter("need at least 1 feature".into()));
    }
    for ((i, j), v) in x.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFinite { row: i, col: j });
        }
    }
    Ok(())
}

/// Euclidean distance matrix: symmetric with a zero diagonal.
pub fn pairwise_distances(x: &DataMatrix) -> Result<Array2<f64>> {
    pairwise_distances_with(&Euclidean, x)
}

/// Distance matrix under a caller-supplied metric.
pub fn pairwise_distances_with<M: Metric>(metric: &M, x: &DataMatrix) -> Result<Array2<f64>> {
    validate_data(x)?;
    let n = x.nrows();
    let mut d = Array2::zeros((n, n));
    for i in 0..n {
        for j in (i + 1)..n {
            let v = metric.distance(x.row(i), x.row(j));
            // Mirror instead of recompute: symmetry holds exactly.
            d[[i, j]] = v;
            d[[j, i]] = v;
        }
    }
    Ok(d)
}

/// `A[i,j] = exp(-D[i,j]^2 / epsilon)`.
///
/// Entries that would underflow to zero are floored at the smallest positive
/// normal float, keeping the affinity graph connected and degrees strictly
/// above off-diagonal mass.
pub fn gaussian_affinity(d: &Array2<f64>, epsilon: f64) -> Result<AffinityMatrix> {
    if epsilon <= 0.0 || !epsilon.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "bandwidth must be a positive finite number, got {epsilon}"
        )));
    }
    if d.nrows() != d.ncols() {
        return Err(Error::DimensionMismatch(format!(
            "distance matrix must be square, got {}x{}",
            d.nrows(),
            d.ncols()
        )));
    }
    let values = d.mapv(|dist| {
        let a = (-(dist * dist) / epsilon).exp();
        if a == 0.0 {
            f64::MIN_POSITIVE
        } else {
            a
        }
    });
    Ok(AffinityMatrix { values, epsilon })
}

/// Affinity row sums, computed with order-independent summation.
pub fn degree_diagonal(a: &AffinityMatrix) -> DegreeDiagonal {
    let degrees = a
        .values
        .rows()
        .into_iter()
        .map(|row| fsum::sum(row.iter().copied()))
        .collect::<Vec<_>>();
    DegreeDiagonal {
        degrees: Array1::from(degrees),
    }
}

/// Builds the row-stochastic operator of the requested kind.
pub fn markov_normalize(a: &AffinityMatrix, kind: OperatorKind) -> DiffusionOperator {
    let degrees = degree_diagonal(a);
    let n = a.values.nrows();
    let (values, kernel_degrees) = match kind {
        OperatorKind::Homogeneous => {
            let mut p = a.values.clone();
            for (mut row, &q) in p.rows_mut().into_iter().zip(degrees.degrees.iter()) {
                row.mapv_inplace(|v| v / q);
            }
            (p, degrees.degrees.clone())
        }
        OperatorKind::Anisotropic => {
            let q = &degrees.degrees;
            let mut kernel = Array2::zeros((n, n));
            for i in 0..n {
                for j in 0..n {
                    kernel[[i, j]] = a.values[[i, j]] / (q[i] * q[j]);
                }
            }
            let row_sums: Vec<f64> = kernel
                .rows()
                .into_iter()
                .map(|row| fsum::sum(row.iter().copied()))
                .collect();
            for (mut row, &s) in kernel.rows_mut().into_iter().zip(row_sums.iter()) {
                row.mapv_inplace(|v| v / s);
            }
            (kernel, Array1::from(row_sums))
        }
    };
    DiffusionOperator {
        values,
        epsilon: a.epsilon,
        kind,
        degrees,
        kernel_degrees,
    }
}

/// `P * X`. Each output row is a convex combination of input rows.
pub fn apply_operator(p: &DiffusionOperator, x: &DataMatrix) -> Result<DataMatrix> {
    let n = p.values.nrows();
    if x.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator is {n}x{n} but data has {} rows",
            x.nrows()
        )));
    }
    let m = x.ncols();
    let mut out = Array2::zeros((n, m));
    for i in 0..n {
        let prow = p.values.row(i);
        for k in 0..m {
            out[[i, k]] = fsum::dot(prow.iter(), x.column(k).iter());
        }
    }
    Ok(out)
}

/// `L = (P - I) / epsilon`, the generator whose action gives per-point
/// displacement rates.
pub fn infinitesimal_generator(p: &DiffusionOperator) -> Array2<f64> {
    let n = p.values.nrows();
    let mut l = p.values.clone();
    for i in 0..n {
        l[[i, i]] -= 1.0;
    }
    l.mapv_inplace(|v| v / p.epsilon);
    l
}

/// `L * X`: the arrow field showing where each point is headed.
pub fn velocity_field(p: &DiffusionOperator, x: &DataMatrix) -> Result<Array2<f64>> {
    let n = p.values.nrows();
    if x.nrows() != n {
        return Err(Error::DimensionMismatch(format!(
            "operator is {n}x{n} but data has {} rows",
            x.nrows()
        )));
    }
    Ok(infinitesimal_generator(p).dot(x))
}

/// Conjugates `P` by the square root of its kernel row sums:
/// `S = Q_k^{1/2} P Q_k^{-1/2}`. `S` is symmetric up to rounding, which is
/// what makes the spectrum of `P` real.
pub fn symmetric_conjugate(p: &DiffusionOperator) -> Array2<f64> {
    let n = p.values.nrows();
    let sqrt_q: Vec<f64> = p.kernel_degrees.iter().map(|q| q.sqrt()).collect();
    let mut s = Array2::zeros((n, n));
    for i in 0..n {
        for j in 0..n {
            s[[i, j]] = sqrt_q[i] * p.values[[i, j]] / sqrt_q[j];
        }
    }
    s
}

/// Eigenvalues of `P`, sorted descending. Computed on the symmetrized
/// conjugate, so the results are exactly real.
pub fn eigenvalues(p: &DiffusionOperator) -> Vec<f64> {
    let s = symmetric_conjugate(p);
    let sym = 0.5 * (&s + &s.t());
    let (mut vals, _) = linalg::symmetric_eigen(&sym);
    vals.sort_by(|a, b| b.partial_cmp(a).unwrap());
    vals
}
