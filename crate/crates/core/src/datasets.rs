//! Deterministic dataset generators and CSV ingestion.
//!
//! Every generator is a pure function of its parameters and seed (ChaCha8
//! keyed by a `u64`, so datasets are reproducible across platforms), and
//! every dataset carries a [`DatasetDescriptor`] from which [`regenerate`]
//! rebuilds it bit for bit.

use crate::error::{Error, Result};
use crate::io;
use crate::operators::DataMatrix;
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;
use std::path::Path;

/// Default radius ratio of the inner circle in [`noisy_circles`].
pub const DEFAULT_CIRCLES_FACTOR: f64 = 0.5;
/// Default Gaussian noise scale for [`noisy_circles`] and [`noisy_moons`].
pub const DEFAULT_NOISE: f64 = 0.05;
/// Default blob centers: three well-separated points.
pub const DEFAULT_BLOB_CENTERS: [[f64; 2]; 3] = [[-7.0, -4.0], [0.0, 0.0], [7.0, -4.0]];
/// Default per-blob standard deviations (the middle blob is the wide one).
pub const DEFAULT_BLOB_STDS: [f64; 3] = [1.0, 1.5, 0.5];

/// Parameter-sample count for the ellipse arc-length table.
const ELLIPSE_SAMPLES: usize = 32768;

/// Full recipe for rebuilding a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "generator", rename_all = "snake_case")]
pub enum DatasetDescriptor {
    HyperuniformCircle { n: usize, radius: f64 },
    UniformCircle { n: usize, radius: f64, seed: u64 },
    HyperuniformEllipse { n: usize, a: f64, b: f64 },
    NoisyCircles { n: usize, factor: f64, noise: f64, seed: u64 },
    NoisyMoons { n: usize, noise: f64, seed: u64 },
    Blobs { n: usize, centers: Vec<[f64; 2]>, stds: Vec<f64>, seed: u64 },
    NoStructure { n: usize, seed: u64 },
    Csv { path: String, has_header: bool, label_column: Option<usize> },
}

/// Points plus optional ground-truth labels plus the recipe that made them.
#[derive(Debug, Clone)]
pub struct LabeledDataset {
    pub data: DataMatrix,
    pub labels: Option<Vec<usize>>,
    pub descriptor: DatasetDescriptor,
}

impl LabeledDataset {
    pub fn n_points(&self) -> usize {
        self.data.nrows()
    }
}

fn require(cond: bool, msg: impl FnOnce() -> String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter(msg()))
    }
}

/// `n` points at angles `2*pi*i/n` on a circle: perfectly even spacing.
pub fn hyperuniform_circle(n: usize, radius: f64) -> Result<LabeledDataset> {
    require(n >= 3, || format!("need at least 3 points, got {n}"))?;
    require(radius > 0.0 && radius.is_finite(), || {
        format!("radius must be positive, got {radius}")
    })?;
    let mut data = Array2::zeros((n, 2));
    for i in 0..n {
        let theta = 2.0 * PI * i as f64 / n as f64;
        data[[i, 0]] = radius * theta.cos();
        data[[i, 1]] = radius * theta.sin();
    }
    Ok(LabeledDataset {
        data,
        labels: None,
        descriptor: DatasetDescriptor::HyperuniformCircle { n, radius },
    })
}

/// `n` points at i.i.d. uniform angles on a circle.
pub fn uniform_circle(n: usize, radius: f64, seed: u64) -> Result<LabeledDataset> {
    require(n >= 3, || format!("need at least 3 points, got {n}"))?;
    require(radius > 0.0 && radius.is_finite(), || {
        format!("radius must be positive, got {radius}")
    })?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Array2::zeros((n, 2));
    for i in 0..n {
        let theta = 2.0 * PI * rng.random::<f64>();
        data[[i, 0]] = radius * theta.cos();
        data[[i, 1]] = radius * theta.sin();
    }
    Ok(LabeledDataset {
        data,
        labels: None,
        descriptor: DatasetDescriptor::UniformCircle { n, radius, seed },
    })
}

/// `n` points spaced equally by arc length along the ellipse
/// `x^2/a^2 + y^2/b^2 = 1` (semi-axes `a >= b > 0`).
///
/// The cumulative arc length is tabulated with the trapezoid rule on a
/// dense parameter grid and inverted by linear interpolation, so the
/// sampling density is constant on the curve itself; points crowd in
/// parameter space near the flat ends, not on the manifold.
pub fn hyperuniform_ellipse(n: usize, a: f64, b: f64) -> Result<LabeledDataset> {
    require(n >= 3, || format!("need at least 3 points, got {n}"))?;
    require(
        b > 0.0 && a >= b && a.is_finite(),
        || format!("semi-axes must satisfy a >= b > 0, got a={a}, b={b}"),
    )?;
    // speed of the parameterization t -> (a cos t, b sin t)
    let speed = |t: f64| ((a * t.sin()).powi(2) + (b * t.cos()).powi(2)).sqrt();
    let dt = 2.0 * PI / ELLIPSE_SAMPLES as f64;
    let mut cumulative = vec![0.0; ELLIPSE_SAMPLES + 1];
    for j in 0..ELLIPSE_SAMPLES {
        let t0 = j as f64 * dt;
        let t1 = (j + 1) as f64 * dt;
        cumulative[j + 1] = cumulative[j] + 0.5 * (speed(t0) + speed(t1)) * dt;
    }
    let total = cumulative[ELLIPSE_SAMPLES];

    let mut data = Array2::zeros((n, 2));
    for i in 0..n {
        let target = total * i as f64 / n as f64;
        // rightmost table entry not exceeding the target
        let j = cumulative.partition_point(|c| *c <= target).saturating_sub(1);
        let j = j.min(ELLIPSE_SAMPLES - 1);
        let seg = cumulative[j + 1] - cumulative[j];
        let frac = if seg > 0.0 { (target - cumulative[j]) / seg } else { 0.0 };
        let t = (j as f64 + frac) * dt;
        data[[i, 0]] = a * t.cos();
        data[[i, 1]] = b * t.sin();
    }
    Ok(LabeledDataset {
        data,
        labels: None,
        descriptor: DatasetDescriptor::HyperuniformEllipse { n, a, b },
    })
}

fn add_noise(data: &mut DataMatrix, noise: f64, rng: &mut ChaCha8Rng) {
    if noise > 0.0 {
        for v in data.iter_mut() {
            let z: f64 = rng.sample(StandardNormal);
            *v += noise * z;
        }
    }
}

/// Two concentric circles (outer radius 1, inner radius `factor`) with
/// Gaussian jitter. Labels: 0 = outer, 1 = inner.
pub fn noisy_circles(n: usize, factor: f64, noise: f64, seed: u64) -> Result<LabeledDataset> {
    require(n >= 4, || format!("need at least 4 points, got {n}"))?;
    require(factor > 0.0 && factor < 1.0, || {
        format!("factor must lie in (0, 1), got {factor}")
    })?;
    require(noise >= 0.0 && noise.is_finite(), || {
        format!("noise must be nonnegative, got {noise}")
    })?;
    let n_out = n / 2;
    let n_in = n - n_out;
    let mut data = Array2::zeros((n, 2));
    for i in 0..n_out {
        let theta = 2.0 * PI * i as f64 / n_out as f64;
        data[[i, 0]] = theta.cos();
        data[[i, 1]] = theta.sin();
    }
    for i in 0..n_in {
        let theta = 2.0 * PI * i as f64 / n_in as f64;
        data[[n_out + i, 0]] = factor * theta.cos();
        data[[n_out + i, 1]] = factor * theta.sin();
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    add_noise(&mut data, noise, &mut rng);
    let labels = (0..n).map(|i| usize::from(i >= n_out)).collect();
    Ok(LabeledDataset {
        data,
        labels: Some(labels),
        descriptor: DatasetDescriptor::NoisyCircles { n, factor, noise, seed },
    })
}

/// Two interleaved half-moon arcs with Gaussian jitter. Labels: 0 = upper
/// arc, 1 = lower arc.
pub fn noisy_moons(n: usize, noise: f64, seed: u64) -> Result<LabeledDataset> {
    require(n >= 4, || format!("need at least 4 points, got {n}"))?;
    require(noise >= 0.0 && noise.is_finite(), || {
        format!("noise must be nonnegative, got {noise}")
    })?;
    let n_out = n / 2;
    let n_in = n - n_out;
    let mut data = Array2::zeros((n, 2));
    for i in 0..n_out {
        let t = PI * i as f64 / (n_out - 1) as f64;
        data[[i, 0]] = t.cos();
        data[[i, 1]] = t.sin();
    }
    for i in 0..n_in {
        let t = PI * i as f64 / (n_in - 1) as f64;
        data[[n_out + i, 0]] = 1.0 - t.cos();
        data[[n_out + i, 1]] = 1.0 - t.sin() - 0.5;
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    add_noise(&mut data, noise, &mut rng);
    let labels = (0..n).map(|i| usize::from(i >= n_out)).collect();
    Ok(LabeledDataset {
        data,
        labels: Some(labels),
        descriptor: DatasetDescriptor::NoisyMoons { n, noise, seed },
    })
}

/// Isotropic Gaussian blobs at fixed centers. Points are split as evenly as
/// possible in center order (earlier blobs get the remainder), so
/// `n = 300` over three centers gives exactly 100 points each.
pub fn blobs(n: usize, centers: &[[f64; 2]], stds: &[f64], seed: u64) -> Result<LabeledDataset> {
    require(n >= 4, || format!("need at least 4 points, got {n}"))?;
    require(!centers.is_empty(), || "need at least one center".into())?;
    require(centers.len() == stds.len(), || {
        format!("{} centers but {} deviations", centers.len(), stds.len())
    })?;
    require(n >= centers.len(), || {
        format!("{n} points cannot cover {} blobs", centers.len())
    })?;
    require(stds.iter().all(|s| *s > 0.0 && s.is_finite()), || {
        "blob standard deviations must be positive".into()
    })?;
    let k = centers.len();
    let base = n / k;
    let extra = n % k;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Array2::zeros((n, 2));
    let mut labels = Vec::with_capacity(n);
    let mut row = 0;
    for (blob, (center, std)) in centers.iter().zip(stds.iter()).enumerate() {
        let count = base + usize::from(blob < extra);
        for _ in 0..count {
            for c in 0..2 {
                let z: f64 = rng.sample(StandardNormal);
                data[[row, c]] = center[c] + std * z;
            }
            labels.push(blob);
            row += 1;
        }
    }
    Ok(LabeledDataset {
        data,
        labels: Some(labels),
        descriptor: DatasetDescriptor::Blobs {
            n,
            centers: centers.to_vec(),
            stds: stds.to_vec(),
            seed,
        },
    })
}

/// Uniform noise on the unit square; no ground truth.
pub fn no_structure(n: usize, seed: u64) -> Result<LabeledDataset> {
    require(n >= 4, || format!("need at least 4 points, got {n}"))?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut data = Array2::zeros((n, 2));
    for v in data.iter_mut() {
        *v = rng.random::<f64>();
    }
    Ok(LabeledDataset {
        data,
        labels: None,
        descriptor: DatasetDescriptor::NoStructure { n, seed },
    })
}

/// Loads a rectangular numeric CSV, optionally splitting one column out as
/// integer ground-truth labels.
pub fn load_csv(path: &Path, has_header: bool, label_column: Option<usize>) -> Result<LabeledDataset> {
    let cells = io::read_cells(path)?;
    let skip = usize::from(has_header);
    if cells.len() <= skip {
        return Err(Error::InvalidParameter(format!(
            "no data rows in {}",
            path.display()
        )));
    }
    let rows = &cells[skip..];
    let descriptor = DatasetDescriptor::Csv {
        path: path.display().to_string(),
        has_header,
        label_column,
    };
    match label_column {
        None => Ok(LabeledDataset {
            data: io::parse_matrix(rows, skip + 1)?,
            labels: None,
            descriptor,
        }),
        Some(lc) => {
            let width = rows[0].len();
            if lc >= width {
                return Err(Error::InvalidParameter(format!(
                    "label column {lc} out of range for {width} columns"
                )));
            }
            let mut labels = Vec::with_capacity(rows.len());
            let mut stripped: Vec<Vec<String>> = Vec::with_capacity(rows.len());
            for (r, row) in rows.iter().enumerate() {
                if row.len() != width {
                    return Err(Error::Parse {
                        row: skip + 1 + r,
                        col: row.len().min(width) + 1,
                        message: format!("ragged row: expected {width} cells"),
                    });
                }
                labels.push(row[lc].parse().map_err(|_| Error::Parse {
                    row: skip + 1 + r,
                    col: lc + 1,
                    message: format!("label is not a nonnegative integer: {:?}", row[lc]),
                })?);
                stripped.push(
                    row.iter()
                        .enumerate()
                        .filter(|(c, _)| *c != lc)
                        .map(|(_, v)| v.clone())
                        .collect(),
                );
            }
            Ok(LabeledDataset {
                data: io::parse_matrix(&stripped, skip + 1)?,
                labels: Some(labels),
                descriptor,
            })
        }
    }
}

/// Rebuilds a dataset from its recipe; generator outputs are bit-identical
/// to the original.
pub fn regenerate(descriptor: &DatasetDescriptor) -> Result<LabeledDataset> {
    match descriptor {
        DatasetDescriptor::HyperuniformCircle { n, radius } => hyperuniform_circle(*n, *radius),
        DatasetDescriptor::UniformCircle { n, radius, seed } => uniform_circle(*n, *radius, *seed),
        DatasetDescriptor::HyperuniformEllipse { n, a, b } => hyperuniform_ellipse(*n, *a, *b),
        DatasetDescriptor::NoisyCircles { n, factor, noise, seed } => {
            noisy_circles(*n, *factor, *noise, *seed)
        }
        DatasetDescriptor::NoisyMoons { n, noise, seed } => noisy_moons(*n, *noise, *seed),
        DatasetDescriptor::Blobs { n, centers, stds, seed } => blobs(*n, centers, stds, *seed),
        DatasetDescriptor::NoStructure { n, seed } => no_structure(*n, *seed),
        DatasetDescriptor::Csv { path, has_header, label_column } => {
            load_csv(Path::new(path), *has_header, *label_column)
        }
    }
}
