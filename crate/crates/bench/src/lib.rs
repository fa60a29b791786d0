//! Shared fixtures for the benchmark suite.

use condensation::{datasets, DataMatrix};

/// Three Gaussian blobs with the default centers and widths.
pub fn blob_cloud(n: usize) -> DataMatrix {
    datasets::blobs(
        n,
        &datasets::DEFAULT_BLOB_CENTERS,
        &datasets::DEFAULT_BLOB_STDS,
        7,
    )
    .unwrap()
    .data
}

/// The evenly sampled 2:1 ellipse used throughout the spectral diagnostics.
pub fn ellipse_cloud(n: usize) -> DataMatrix {
    datasets::hyperuniform_ellipse(n, 2.0, 1.0).unwrap().data
}
