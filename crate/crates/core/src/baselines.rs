//! Reference clusterers used to put condensation output side by side with
//! the classics: Lloyd and mini-batch k-means, and greedy agglomerative
//! clustering with ward or average linkage. Everything here is seeded and
//! deterministic so comparison reports are reproducible.

use crate::datasets::LabeledDataset;
use crate::engine::{self, CondensationConfig};
use crate::error::{Error, Result};
use crate::hierarchy;
use crate::operators::{self, DataMatrix};
use ndarray::Array2;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

/// Default mini-batch size for the mini-batch k-means variant.
pub const DEFAULT_BATCH_SIZE: usize = 100;

/// Iteration cap shared by Lloyd and mini-batch updates.
const MAX_ROUNDS: usize = 300;

/// Labels produced by one baseline method, with enough parameters recorded
/// to rerun it.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct BaselineResult {
    /// One of `kmeans`, `minibatch-kmeans`, `ward`, `average`.
    pub method: String,
    pub labels: Vec<usize>,
    pub params: serde_json::Value,
}

/// Full k-means state, exposed so tests and callers can inspect centers
/// and the inertia trajectory.
#[derive(Debug, Clone)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    pub centers: Array2<f64>,
    /// Sum of squared distances to assigned centers.
    pub inertia: f64,
    pub rounds: usize,
    /// Inertia recorded after each assignment step (Lloyd only).
    pub inertia_history: Vec<f64>,
}

fn sq_dist(a: ndarray::ArrayView1<f64>, b: ndarray::ArrayView1<f64>) -> f64 {
    a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Index of the nearest center, lowest index winning ties.
fn nearest(point: ndarray::ArrayView1<f64>, centers: &Array2<f64>) -> usize {
    let mut best = 0;
    let mut best_d = f64::INFINITY;
    for (c, center) in centers.rows().into_iter().enumerate() {
        let d = sq_dist(point, center);
        if d < best_d {
            best_d = d;
            best = c;
        }
    }
    best
}

fn assign_all(x: &DataMatrix, centers: &Array2<f64>) -> Vec<usize> {
    x.rows().into_iter().map(|p| nearest(p, centers)).collect()
}

fn inertia_of(x: &DataMatrix, centers: &Array2<f64>, labels: &[usize]) -> f64 {
    labels
        .iter()
        .enumerate()
        .map(|(i, &c)| sq_dist(x.row(i), centers.row(c)))
        .sum()
}

/// k-means++ seeding: first center uniform, each next center sampled with
/// probability proportional to squared distance from the chosen set.
fn kmeans_pp(x: &DataMatrix, k: usize, rng: &mut ChaCha8Rng) -> Array2<f64> {
    let n = x.nrows();
    let m = x.ncols();
    let mut centers = Array2::zeros((k, m));
    let mut chosen = vec![false; n];

    let first = rng.random_range(0..n);
    centers.row_mut(0).assign(&x.row(first));
    chosen[first] = true;

    let mut weights: Vec<f64> = (0..n).map(|i| sq_dist(x.row(i), x.row(first))).collect();
    for c in 1..k {
        let total: f64 = weights.iter().sum();
        let pick = if total > 0.0 {
            let r = rng.random::<f64>() * total;
            let mut cum = 0.0;
            let mut pick = n - 1;
            for (i, w) in weights.iter().enumerate() {
                cum += w;
                if cum > r {
                    pick = i;
                    break;
                }
            }
            pick
        } else {
            // all remaining mass at distance zero (duplicates): take the
            // first point not already a center
            (0..n).find(|&i| !chosen[i]).unwrap_or(0)
        };
        chosen[pick] = true;
        centers.row_mut(c).assign(&x.row(pick));
        for (i, w) in weights.iter_mut().enumerate() {
            let d = sq_dist(x.row(i), x.row(pick));
            if d < *w {
                *w = d;
            }
        }
    }
    centers
}

fn lloyd(x: &DataMatrix, k: usize, rng: &mut ChaCha8Rng) -> KMeansFit {
    let m = x.ncols();
    let mut centers = kmeans_pp(x, k, rng);
    let mut labels = assign_all(x, &centers);
    let mut history = vec![inertia_of(x, &centers, &labels)];
    let mut rounds = 0;

    while rounds < MAX_ROUNDS {
        rounds += 1;
        // update step: each center moves to the mean of its points; an
        // empty cluster keeps its previous center
        let mut sums = Array2::<f64>::zeros((k, m));
        let mut counts = vec![0usize; k];
        for (i, &c) in labels.iter().enumerate() {
            counts[c] += 1;
            let mut row = sums.row_mut(c);
            row += &x.row(i);
        }
        for (c, &count) in counts.iter().enumerate() {
            if count > 0 {
                let mut row = centers.row_mut(c);
                row.assign(&(&sums.row(c) / count as f64));
            }
        }
        let next = assign_all(x, &centers);
        history.push(inertia_of(x, &centers, &next));
        if next == labels {
            break;
        }
        labels = next;
    }
    let inertia = *history.last().unwrap();
    KMeansFit {
        labels,
        centers,
        inertia,
        rounds,
        inertia_history: history,
    }
}

fn minibatch(x: &DataMatrix, k: usize, batch_size: usize, rng: &mut ChaCha8Rng) -> KMeansFit {
    let n = x.nrows();
    let mut centers = kmeans_pp(x, k, rng);
    let mut counts = vec![0usize; k];
    let mut labels = assign_all(x, &centers);
    let mut rounds = 0;

    while rounds < MAX_ROUNDS {
        rounds += 1;
        let batch: Vec<usize> = (0..batch_size).map(|_| rng.random_range(0..n)).collect();
        let cached: Vec<usize> = batch.iter().map(|&i| nearest(x.row(i), &centers)).collect();
        for (&i, &c) in batch.iter().zip(cached.iter()) {
            counts[c] += 1;
            let eta = 1.0 / counts[c] as f64;
            let mut row = centers.row_mut(c);
            let updated = &row * (1.0 - eta) + &x.row(i) * eta;
            row.assign(&updated);
        }
        let next = assign_all(x, &centers);
        if next == labels {
            break;
        }
        labels = next;
    }
    let inertia = inertia_of(x, &centers, &labels);
    KMeansFit {
        labels,
        centers,
        inertia,
        rounds,
        inertia_history: Vec::new(),
    }
}

/// Seeded k-means clustering into `k` groups; `minibatch` switches from
/// full Lloyd updates to per-batch center updates of size `batch_size`.
/// Runs until the assignment stops changing or 300 rounds.
pub fn kmeans_fit(
    x: &DataMatrix,
    k: usize,
    seed: u64,
    minibatch_updates: bool,
    batch_size: usize,
) -> Result<KMeansFit> {
    operators::validate_data(x)?;
    let n = x.nrows();
    if k < 2 || k > n {
        return Err(Error::InvalidParameter(format!(
            "k must satisfy 2 <= k <= {n}, got {k}"
        )));
    }
    if minibatch_updates && batch_size == 0 {
        return Err(Error::InvalidParameter("batch size must be positive".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok(if minibatch_updates {
        minibatch(x, k, batch_size, &mut rng)
    } else {
        lloyd(x, k, &mut rng)
    })
}

/// [`kmeans_fit`] wrapped into a [`BaselineResult`].
pub fn kmeans(
    x: &DataMatrix,
    k: usize,
    seed: u64,
    minibatch_updates: bool,
    batch_size: usize,
) -> Result<BaselineResult> {
    let fit = kmeans_fit(x, k, seed, minibatch_updates, batch_size)?;
    let (method, params) = if minibatch_updates {
        (
            "minibatch-kmeans",
            json!({ "k": k, "seed": seed, "batch_size": batch_size }),
        )
    } else {
        ("kmeans", json!({ "k": k, "seed": seed }))
    };
    Ok(BaselineResult {
        method: method.to_string(),
        labels: fit.labels,
        params,
    })
}

/// Linkage rule driving agglomerative merges.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Linkage {
    /// Merge the pair whose union least increases total within-cluster
    /// variance.
    Ward,
    /// Merge the pair with the smallest mean pairwise distance.
    Average,
}

impl Linkage {
    pub fn name(self) -> &'static str {
        match self {
            Linkage::Ward => "ward",
            Linkage::Average => "average",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "ward" => Ok(Linkage::Ward),
            "average" => Ok(Linkage::Average),
            other => Err(Error::InvalidParameter(format!(
                "unknown linkage {other:?}, expected ward or average"
            ))),
        }
    }
}

/// One executed merge. Clusters are named by their smallest member index,
/// so `first < second` and the union keeps the name `first`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DendrogramStep {
    pub first: usize,
    pub second: usize,
    /// Ward: the variance increase of the union; average: the mean
    /// pairwise distance between the merged clusters.
    pub height: f64,
}

/// Complete greedy merge sequence (`n_points - 1` steps).
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Dendrogram {
    pub n_points: usize,
    pub linkage: Linkage,
    pub steps: Vec<DendrogramStep>,
}

/// Builds the full merge sequence under the chosen linkage. Dissimilarities
/// evolve by the Lance-Williams update; ties break toward the
/// lexicographically smallest cluster pair.
pub fn dendrogram(x: &DataMatrix, linkage: Linkage) -> Result<Dendrogram> {
    operators::validate_data(x)?;
    let n = x.nrows();
    let dist = operators::pairwise_distances(x)?;
    // ward tracks the variance increase of merging, which for singleton
    // pairs is half the squared distance; average tracks plain distance
    let mut diss = vec![vec![0.0f64; n]; n];
    for i in 0..n {
        for j in 0..n {
            diss[i][j] = match linkage {
                Linkage::Ward => 0.5 * dist[[i, j]] * dist[[i, j]],
                Linkage::Average => dist[[i, j]],
            };
        }
    }
    let mut active = vec![true; n];
    let mut size = vec![1usize; n];
    let mut steps = Vec::with_capacity(n - 1);

    for _ in 0..(n - 1) {
        let mut best: Option<(usize, usize)> = None;
        let mut best_d = f64::INFINITY;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if active[j] && diss[i][j] < best_d {
                    best_d = diss[i][j];
                    best = Some((i, j));
                }
            }
        }
        let (i, j) = best.expect("at least two active clusters remain");
        steps.push(DendrogramStep {
            first: i,
            second: j,
            height: best_d,
        });
        let (ni, nj) = (size[i] as f64, size[j] as f64);
        for k in 0..n {
            if !active[k] || k == i || k == j {
                continue;
            }
            let nk = size[k] as f64;
            let updated = match linkage {
                Linkage::Ward => {
                    let s = ni + nj + nk;
                    ((ni + nk) * diss[i][k] + (nj + nk) * diss[j][k] - nk * diss[i][j]) / s
                }
                Linkage::Average => (ni * diss[i][k] + nj * diss[j][k]) / (ni + nj),
            };
            diss[i][k] = updated;
            diss[k][i] = updated;
        }
        size[i] += size[j];
        active[j] = false;
    }
    Ok(Dendrogram {
        n_points: n,
        linkage,
        steps,
    })
}

/// Stops the merge sequence early so `n_clusters` groups remain, and
/// relabels them 0.. in order of each group's smallest member.
pub fn cut_dendrogram(dendro: &Dendrogram, n_clusters: usize) -> Result<Vec<usize>> {
    let n = dendro.n_points;
    if n_clusters < 1 || n_clusters > n {
        return Err(Error::InvalidParameter(format!(
            "n_clusters must satisfy 1 <= n_clusters <= {n}, got {n_clusters}"
        )));
    }
    let mut labels = engine::Labels::new(n);
    for step in &dendro.steps[..n - n_clusters] {
        labels.union(step.first, step.second);
    }
    // roots are the smallest member of each group; rank them so labels
    // read 0.. in order of first appearance
    let roots = labels.assignments();
    let mut distinct = roots.clone();
    distinct.sort_unstable();
    distinct.dedup();
    Ok(roots
        .iter()
        .map(|r| distinct.binary_search(r).unwrap())
        .collect())
}

/// Greedy agglomerative clustering down to `n_clusters` groups.
pub fn agglomerative(x: &DataMatrix, n_clusters: usize, linkage: Linkage) -> Result<BaselineResult> {
    let dendro = dendrogram(x, linkage)?;
    let labels = cut_dendrogram(&dendro, n_clusters)?;
    Ok(BaselineResult {
        method: linkage.name().to_string(),
        labels,
        params: json!({ "n_clusters": n_clusters, "linkage": linkage.name() }),
    })
}

/// One row of a comparison report.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MethodEntry {
    pub method: String,
    pub n_clusters: usize,
    /// Adjusted Rand index against ground truth; absent when the dataset
    /// carries no labels.
    pub ari: Option<f64>,
    pub labels: Vec<usize>,
}

/// Condensation at two depths next to four reference clusterers.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub early_iteration: usize,
    pub late_iteration: usize,
    /// Cluster count requested from every baseline: the late condensation
    /// count, floored at 2 so k-means stays well-posed.
    pub baseline_k: usize,
    pub entries: Vec<MethodEntry>,
}

fn distinct_count(labels: &[usize]) -> usize {
    let mut seen: Vec<usize> = labels.to_vec();
    seen.sort_unstable();
    seen.dedup();
    seen.len()
}

/// Runs condensation on the dataset, cuts the hierarchy at half depth and
/// full depth, and clusters the same points with each baseline at the late
/// cluster count. Produces exactly six entries: condensation-early,
/// condensation-late, kmeans, minibatch-kmeans, ward, average.
pub fn compare(
    dataset: &LabeledDataset,
    cfg: &CondensationConfig,
    seed: u64,
) -> Result<ComparisonReport> {
    let x = &dataset.data;
    let trace = engine::run(x, cfg)?;
    let tree = hierarchy::build_tree(&trace);
    let late_t = tree.final_iteration;
    let early_t = late_t / 2;
    let early = tree.cut_at(early_t);
    let late = tree.cut_at(late_t);
    let k = distinct_count(&late).max(2);

    let truth = dataset.labels.as_deref();
    let entry = |method: &str, labels: Vec<usize>| -> Result<MethodEntry> {
        let ari = match truth {
            Some(t) => Some(hierarchy::adjusted_rand_index(&labels, t)?),
            None => None,
        };
        Ok(MethodEntry {
            method: method.to_string(),
            n_clusters: distinct_count(&labels),
            ari,
            labels,
        })
    };

    let entries = vec![
        entry("condensation-early", early)?,
        entry("condensation-late", late)?,
        entry("kmeans", kmeans(x, k, seed, false, DEFAULT_BATCH_SIZE)?.labels)?,
        entry(
            "minibatch-kmeans",
            kmeans(x, k, seed, true, DEFAULT_BATCH_SIZE)?.labels,
        )?,
        entry("ward", agglomerative(x, k, Linkage::Ward)?.labels)?,
        entry("average", agglomerative(x, k, Linkage::Average)?.labels)?,
    ];
    Ok(ComparisonReport {
        early_iteration: early_t,
        late_iteration: late_t,
        baseline_k: k,
        entries,
    })
}
