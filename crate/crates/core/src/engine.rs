//! The condensation loop: repeatedly smooth the point configuration with a
//! freshly built diffusion operator, merging clusters whose points collapse
//! onto each other, and doubling the bandwidth whenever the degree sequence
//! stops changing. The run records everything (snapshots, bandwidth
//! schedule, degree vectors, merge events, per-iteration labels) in a
//! [`CondensationTrace`].
//!
//! Control flow, spelled out once:
//!
//! ```text
//! i = 0, i_prev = -2, Q' = identity diagonal, eps = eps0
//! while i - i_prev > 1:
//!     i_prev = i
//!     Q_diff = inf
//!     while Q_diff >= qdiff_threshold:
//!         stop if i == max_iterations
//!         i += 1
//!         D = distances(X); merge labels where D < merge_threshold
//!         A = exp(-D^2/eps); Q = rowsum(A)
//!         P = row_normalize(Q^-1 A Q^-1); X = P X
//!         Q_diff = max|diag Q - diag Q'|; Q' = Q
//!         stop if one cluster remains
//!     eps *= epsilon_growth
//! ```
//!
//! An epoch whose inner loop converges after a single pass means the
//! configuration is stationary at this scale and doubling has stopped
//! helping, so the run ends.

use crate::error::{Error, Result};
use crate::operators::{
    self, apply_operator, gaussian_affinity, markov_normalize, pairwise_distances, DataMatrix,
    DegreeDiagonal, OperatorKind,
};
use ndarray::Array2;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

/// Initial bandwidth: a fixed value, or data-driven.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum EpsilonSpec {
    /// Squared median nonzero pairwise distance of the input.
    Auto,
    Fixed(f64),
}

impl Serialize for EpsilonSpec {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            EpsilonSpec::Auto => s.serialize_str("auto"),
            EpsilonSpec::Fixed(v) => s.serialize_f64(*v),
        }
    }
}

impl<'de> Deserialize<'de> for EpsilonSpec {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Repr {
            Num(f64),
            Word(String),
        }
        match Repr::deserialize(d)? {
            Repr::Num(v) => Ok(EpsilonSpec::Fixed(v)),
            Repr::Word(w) if w == "auto" => Ok(EpsilonSpec::Auto),
            Repr::Word(w) => Err(serde::de::Error::custom(format!(
                "bandwidth must be a number or \"auto\", got {w:?}"
            ))),
        }
    }
}

/// How the merge threshold is interpreted.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MergeThresholdMode {
    /// Compare distances against the threshold as given.
    Absolute,
    /// Scale the threshold by the input's median nonzero pairwise distance.
    RelativeToMedian,
}

/// Tunable knobs of a condensation run. `Default` gives the canonical
/// settings: auto bandwidth, merge below 1e-3, degree convergence at 1e-4,
/// bandwidth doubling, a 1000-iteration budget, every snapshot kept.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CondensationConfig {
    pub epsilon0: EpsilonSpec,
    pub merge_threshold: f64,
    pub merge_threshold_mode: MergeThresholdMode,
    pub qdiff_threshold: f64,
    pub epsilon_growth: f64,
    pub max_iterations: usize,
    pub snapshot_stride: usize,
}

impl Default for CondensationConfig {
    fn default() -> Self {
        CondensationConfig {
            epsilon0: EpsilonSpec::Auto,
            merge_threshold: 1e-3,
            merge_threshold_mode: MergeThresholdMode::Absolute,
            qdiff_threshold: 1e-4,
            epsilon_growth: 2.0,
            max_iterations: 1000,
            snapshot_stride: 1,
        }
    }
}

impl CondensationConfig {
    pub fn validate(&self) -> Result<()> {
        // `!x.is_finite()` doubles as the NaN check in each guard below.
        if let EpsilonSpec::Fixed(v) = self.epsilon0 {
            if v <= 0.0 || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "initial bandwidth must be positive and finite, got {v}"
                )));
            }
        }
        if self.merge_threshold <= 0.0 || !self.merge_threshold.is_finite() {
            return Err(Error::InvalidParameter(
                "merge threshold must be positive and finite".into(),
            ));
        }
        if self.qdiff_threshold <= 0.0 || !self.qdiff_threshold.is_finite() {
            return Err(Error::InvalidParameter(
                "degree convergence threshold must be positive and finite".into(),
            ));
        }
        if self.epsilon_growth <= 1.0 || !self.epsilon_growth.is_finite() {
            return Err(Error::InvalidParameter(
                "bandwidth growth factor must exceed 1 and be finite".into(),
            ));
        }
        if self.max_iterations == 0 {
            return Err(Error::InvalidParameter(
                "iteration budget must be at least 1".into(),
            ));
        }
        if self.snapshot_stride == 0 {
            return Err(Error::InvalidParameter(
                "snapshot stride must be at least 1".into(),
            ));
        }
        Ok(())
    }
}

/// One cluster absorbing another. `surviving_label` is always the smaller id
/// (cluster ids are the smallest original point index in the cluster).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeEvent {
    pub iteration: usize,
    pub absorbed_label: usize,
    pub surviving_label: usize,
    pub member_count_after: usize,
}

/// Why the run stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HaltReason {
    /// A bandwidth epoch converged after a single pass.
    OuterLoopConverged,
    /// Every point ended up in one cluster.
    SingleCluster,
    /// The iteration budget ran out.
    MaxIterations,
}

/// Disjoint-set forest over point indices. The representative of a cluster
/// is its smallest member, which makes labels stable and reproducible.
#[derive(Debug, Clone)]
pub struct Labels {
    parent: Vec<usize>,
    size: Vec<usize>,
    n_clusters: usize,
}

impl Labels {
    pub fn new(n: usize) -> Self {
        Labels {
            parent: (0..n).collect(),
            size: vec![1; n],
            n_clusters: n,
        }
    }

    pub fn len(&self) -> usize {
        self.parent.len()
    }

    pub fn is_empty(&self) -> bool {
        self.parent.is_empty()
    }

    pub fn cluster_count(&self) -> usize {
        self.n_clusters
    }

    /// Representative of `i`'s cluster, compressing the path walked.
    pub fn find(&mut self, i: usize) -> usize {
        let mut root = i;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        let mut cur = i;
        while self.parent[cur] != root {
            let next = self.parent[cur];
            self.parent[cur] = root;
            cur = next;
        }
        root
    }

    /// Joins the clusters of `a` and `b`. Returns
    /// `(surviving, absorbed, member_count_after)` if they were distinct.
    pub fn union(&mut self, a: usize, b: usize) -> Option<(usize, usize, usize)> {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return None;
        }
        let (surviving, absorbed) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[absorbed] = surviving;
        self.size[surviving] += self.size[absorbed];
        self.n_clusters -= 1;
        Some((surviving, absorbed, self.size[surviving]))
    }

    /// Current label of every point.
    pub fn assignments(&mut self) -> Vec<usize> {
        (0..self.parent.len()).map(|i| self.find(i)).collect()
    }

    /// Size of the cluster containing `i`.
    pub fn cluster_size(&mut self, i: usize) -> usize {
        let r = self.find(i);
        self.size[r]
    }
}

/// Everything a run produces. `labels_per_iteration[t]` is the partition
/// after pass `t` (entry 0 is all singletons); `epsilon_schedule` holds the
/// bandwidth each pass actually used; snapshots are `(t, X(t))` pairs at the
/// configured stride plus the final configuration.
#[derive(Debug, Clone)]
pub struct CondensationTrace {
    pub config: CondensationConfig,
    /// Resolved initial bandwidth (meaningful when the config said "auto").
    pub initial_epsilon: f64,
    pub snapshots: Vec<(usize, DataMatrix)>,
    pub epsilon_schedule: Vec<(usize, f64)>,
    pub degree_log: Vec<(usize, Vec<f64>)>,
    pub merge_log: Vec<MergeEvent>,
    pub labels_per_iteration: Vec<Vec<usize>>,
    pub halt_reason: HaltReason,
}

impl CondensationTrace {
    pub fn n_points(&self) -> usize {
        self.labels_per_iteration[0].len()
    }

    /// Index of the last completed pass.
    pub fn final_iteration(&self) -> usize {
        self.labels_per_iteration.len() - 1
    }

    pub fn final_labels(&self) -> &[usize] {
        self.labels_per_iteration.last().unwrap()
    }

    /// Number of distinct labels after pass `t`.
    pub fn cluster_count_at(&self, t: usize) -> usize {
        let labels = &self.labels_per_iteration[t.min(self.final_iteration())];
        let mut seen: Vec<usize> = labels.clone();
        seen.sort_unstable();
        seen.dedup();
        seen.len()
    }

    /// Snapshot at iteration `t`, if the stride kept it.
    pub fn snapshot(&self, t: usize) -> Option<&DataMatrix> {
        self.snapshots
            .iter()
            .find(|(it, _)| *it == t)
            .map(|(_, x)| x)
    }

    /// Bandwidth of the operator that acts on snapshot `t` (the bandwidth of
    /// pass `t + 1`; the final snapshot reuses the last pass's bandwidth so
    /// every snapshot has a well-defined operator).
    pub fn operator_epsilon(&self, t: usize) -> f64 {
        let last = self.epsilon_schedule.len() - 1;
        self.epsilon_schedule[t.min(last)].1
    }
}

/// Median of the nonzero pairwise Euclidean distances. An even count
/// averages the two central order statistics.
pub fn median_nonzero_distance(x: &DataMatrix) -> Result<f64> {
    let d = pairwise_distances(x)?;
    let n = x.nrows();
    let mut dists = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            if d[[i, j]] > 0.0 {
                dists.push(d[[i, j]]);
            }
        }
    }
    if dists.is_empty() {
        return Err(Error::Degenerate(
            "degenerate input: zero spread (all points identical)".into(),
        ));
    }
    dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let m = dists.len();
    Ok(if m % 2 == 1 {
        dists[m / 2]
    } else {
        0.5 * (dists[m / 2 - 1] + dists[m / 2])
    })
}

/// Data-driven initial bandwidth: the squared median nonzero pairwise
/// distance.
pub fn auto_epsilon(x: &DataMatrix) -> Result<f64> {
    let med = median_nonzero_distance(x)?;
    Ok(med * med)
}

fn check_finite_at(x: &DataMatrix, iteration: usize) -> Result<()> {
    for ((i, j), v) in x.indexed_iter() {
        if !v.is_finite() {
            return Err(Error::NonFiniteAtIteration {
                iteration,
                row: i,
                col: j,
            });
        }
    }
    Ok(())
}

/// Unions every pair of clusters whose points sit closer than `threshold`.
///
/// Simultaneous merges are grouped into connected components first and each
/// component is absorbed into its smallest cluster id in ascending order, so
/// the event log depends only on which clusters collided, not on the scan
/// order that found them.
fn detect_merges(
    d: &Array2<f64>,
    threshold: f64,
    iteration: usize,
    labels: &mut Labels,
) -> Vec<MergeEvent> {
    let n = d.nrows();
    let mut scratch = Labels::new(n);
    let mut hit = false;
    for i in 0..n {
        for j in (i + 1)..n {
            if d[[i, j]] < threshold {
                let ri = labels.find(i);
                let rj = labels.find(j);
                if ri != rj {
                    scratch.union(ri, rj);
                    hit = true;
                }
            }
        }
    }
    if !hit {
        return Vec::new();
    }
    // components of colliding clusters, keyed by their smallest cluster id
    let mut components: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for i in 0..n {
        if labels.find(i) == i && scratch.cluster_size(i) > 1 {
            components.entry(scratch.find(i)).or_default().push(i);
        }
    }
    let mut events = Vec::new();
    for (surviving, members) in components {
        for &absorbed in members.iter().filter(|m| **m != surviving) {
            let (s, a, count) = labels
                .union(surviving, absorbed)
                .expect("distinct clusters by construction");
            debug_assert_eq!(s, surviving);
            events.push(MergeEvent {
                iteration,
                absorbed_label: a,
                surviving_label: s,
                member_count_after: count,
            });
        }
    }
    events
}

/// One pass of the loop: merge, build the anisotropic operator from the
/// current configuration, smooth. Returns the smoothed configuration, the
/// affinity degree diagonal (the convergence signal), and any merges.
pub fn condense_step(
    x: &DataMatrix,
    epsilon: f64,
    merge_threshold: f64,
    iteration: usize,
    labels: &mut Labels,
) -> Result<(DataMatrix, DegreeDiagonal, Vec<MergeEvent>)> {
    let d = pairwise_distances(x)?;
    let events = detect_merges(&d, merge_threshold, iteration, labels);
    let a = gaussian_affinity(&d, epsilon)?;
    let p = markov_normalize(&a, OperatorKind::Anisotropic);
    let next = apply_operator(&p, x)?;
    Ok((next, p.degrees, events))
}

/// Runs condensation to termination and returns the full trace.
pub fn run(x: &DataMatrix, cfg: &CondensationConfig) -> Result<CondensationTrace> {
    operators::validate_data(x)?;
    cfg.validate()?;
    let n = x.nrows();

    let initial_epsilon = match cfg.epsilon0 {
        EpsilonSpec::Fixed(v) => v,
        EpsilonSpec::Auto => auto_epsilon(x)?,
    };
    let merge_threshold = match cfg.merge_threshold_mode {
        MergeThresholdMode::Absolute => cfg.merge_threshold,
        MergeThresholdMode::RelativeToMedian => {
            cfg.merge_threshold * median_nonzero_distance(x)?
        }
    };

    let mut x_cur = x.clone();
    let mut labels = Labels::new(n);
    let mut labels_per_iteration = vec![labels.assignments()];
    let mut snapshots = vec![(0, x_cur.clone())];
    let mut epsilon_schedule = Vec::new();
    let mut degree_log = Vec::new();
    let mut merge_log = Vec::new();

    let mut epsilon = initial_epsilon;
    let mut i: i64 = 0;
    let mut i_prev: i64 = -2;
    // degree diagonal of the previous pass; starts at the identity's
    let mut q_prev = vec![1.0; n];
    let mut halt = None;

    'outer: while i - i_prev > 1 {
        i_prev = i;
        let mut q_diff = f64::INFINITY;
        while q_diff >= cfg.qdiff_threshold {
            if i as usize >= cfg.max_iterations {
                halt = Some(HaltReason::MaxIterations);
                break 'outer;
            }
            i += 1;
            let t = i as usize;
            let (x_next, q, events) =
                condense_step(&x_cur, epsilon, merge_threshold, t, &mut labels)?;
            check_finite_at(&x_next, t)?;
            x_cur = x_next;
            merge_log.extend(events);
            labels_per_iteration.push(labels.assignments());
            epsilon_schedule.push((t, epsilon));
            q_diff = q
                .degrees
                .iter()
                .zip(q_prev.iter())
                .map(|(a, b)| (a - b).abs())
                .fold(0.0, f64::max);
            q_prev = q.degrees.to_vec();
            degree_log.push((t, q_prev.clone()));
            if t.is_multiple_of(cfg.snapshot_stride) {
                snapshots.push((t, x_cur.clone()));
            }
            if labels.cluster_count() == 1 {
                halt = Some(HaltReason::SingleCluster);
                break 'outer;
            }
        }
        epsilon *= cfg.epsilon_growth;
    }

    let final_t = i as usize;
    if snapshots.last().map(|(t, _)| *t) != Some(final_t) {
        snapshots.push((final_t, x_cur));
    }

    Ok(CondensationTrace {
        config: cfg.clone(),
        initial_epsilon,
        snapshots,
        epsilon_schedule,
        degree_log,
        merge_log,
        labels_per_iteration,
        halt_reason: halt.unwrap_or(HaltReason::OuterLoopConverged),
    })
}
