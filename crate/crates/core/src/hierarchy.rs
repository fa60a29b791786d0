//! Turns a run's merge log into a cluster hierarchy.
//!
//! Every maximal label lifetime becomes one tree node: a cluster that
//! absorbs others at iteration `t` dies there and a new node (same label,
//! born at `t`) takes its place with the participants as children. Leaves
//! are the original points, born at iteration 0. On top of the tree this
//! module offers iteration cuts, persistence tables, Sankey documents, and
//! adjusted-Rand comparison of partitions.

use crate::engine::CondensationTrace;
use crate::error::{Error, Result};
use crate::io;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;
use std::path::Path;

/// One cluster lifetime. `death` is `None` while the cluster is still alive
/// at the end of the run.
#[derive(Debug, Clone)]
pub struct TreeNode {
    /// Cluster label: the smallest original point index among members.
    pub label: usize,
    pub birth: usize,
    pub death: Option<usize>,
    /// Sorted original point indices.
    pub members: Vec<usize>,
    /// Node index of the cluster this one merged into.
    pub parent: Option<usize>,
    /// Node indices that merged to form this node (empty for leaves).
    pub children: Vec<usize>,
}

/// Merge hierarchy of a condensation run. A forest in general: runs halted
/// before total collapse leave several alive roots.
#[derive(Debug, Clone)]
pub struct ClusterTree {
    pub nodes: Vec<TreeNode>,
    /// Indices of nodes alive at the end of the run.
    pub roots: Vec<usize>,
    /// Last iteration of the run; doubles as the death sentinel when
    /// computing persistence of alive nodes.
    pub final_iteration: usize,
    pub n_points: usize,
}

/// One persistence entry. `death` of an alive cluster is the run's final
/// iteration, so persistence is always finite.
#[derive(Debug, Clone, PartialEq)]
pub struct PersistenceRow {
    pub cluster_id: usize,
    pub birth: usize,
    pub death: usize,
    pub persistence: f64,
    pub size: usize,
}

/// Rows sorted by descending persistence (ties: earlier birth, then smaller
/// id first).
#[derive(Debug, Clone)]
pub struct PersistenceTable {
    pub rows: Vec<PersistenceRow>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SankeyNode {
    pub id: usize,
    pub size: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SankeyIteration {
    pub t: usize,
    pub nodes: Vec<SankeyNode>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SankeyLink {
    pub t: usize,
    pub src: usize,
    pub dst: usize,
    pub flow: usize,
}

/// Flow diagram of cluster sizes across an iteration range.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Eq)]
pub struct SankeyDocument {
    pub iterations: Vec<SankeyIteration>,
    pub links: Vec<SankeyLink>,
}

impl ClusterTree {
    /// The single surviving cluster, when the run collapsed completely.
    pub fn root(&self) -> Option<usize> {
        match self.roots.as_slice() {
            [r] => Some(*r),
            _ => None,
        }
    }

    fn alive_at(&self, node: &TreeNode, t: usize) -> bool {
        node.birth <= t && node.death.is_none_or(|d| d > t)
    }

    /// Partition at iteration `t` as a per-point label vector. Values beyond
    /// the final iteration return the final partition, so `usize::MAX` reads
    /// as "cut at the end".
    pub fn cut_at(&self, t: usize) -> Vec<usize> {
        let mut out = vec![usize::MAX; self.n_points];
        for node in &self.nodes {
            if self.alive_at(node, t) {
                for &p in &node.members {
                    out[p] = node.label;
                }
            }
        }
        debug_assert!(out.iter().all(|l| *l != usize::MAX));
        out
    }

    fn sorted_table(&self, mut rows: Vec<PersistenceRow>) -> PersistenceTable {
        rows.sort_by(|a, b| {
            b.persistence
                .partial_cmp(&a.persistence)
                .unwrap()
                .then(a.birth.cmp(&b.birth))
                .then(a.cluster_id.cmp(&b.cluster_id))
        });
        PersistenceTable { rows }
    }

    /// Persistence in iteration counts: death minus birth.
    pub fn persistence_table(&self) -> PersistenceTable {
        let rows = self
            .nodes
            .iter()
            .map(|n| {
                let death = n.death.unwrap_or(self.final_iteration);
                PersistenceRow {
                    cluster_id: n.label,
                    birth: n.birth,
                    death,
                    persistence: (death - n.birth) as f64,
                    size: n.members.len(),
                }
            })
            .collect();
        self.sorted_table(rows)
    }

    /// Persistence in bandwidth mass instead of iteration counts: each pass
    /// a cluster survives contributes that pass's bandwidth. Slow early
    /// passes weigh less than the doubled late ones.
    pub fn epsilon_weighted_persistence(&self, trace: &CondensationTrace) -> PersistenceTable {
        // prefix[t] = sum of bandwidths of passes 1..=t
        let mut prefix = vec![0.0; trace.epsilon_schedule.len() + 1];
        for (idx, (_, eps)) in trace.epsilon_schedule.iter().enumerate() {
            prefix[idx + 1] = prefix[idx] + eps;
        }
        let rows = self
            .nodes
            .iter()
            .map(|n| {
                let death = n.death.unwrap_or(self.final_iteration);
                PersistenceRow {
                    cluster_id: n.label,
                    birth: n.birth,
                    death,
                    persistence: prefix[death] - prefix[n.birth],
                    size: n.members.len(),
                }
            })
            .collect();
        self.sorted_table(rows)
    }
}

/// Builds the hierarchy from a trace's merge log.
pub fn build_tree(trace: &CondensationTrace) -> ClusterTree {
    let n = trace.n_points();
    let mut nodes: Vec<TreeNode> = (0..n)
        .map(|i| TreeNode {
            label: i,
            birth: 0,
            death: None,
            members: vec![i],
            parent: None,
            children: Vec::new(),
        })
        .collect();
    // label -> index of its currently alive node
    let mut active: BTreeMap<usize, usize> = (0..n).map(|i| (i, i)).collect();

    // the log arrives grouped: events of one merge component are contiguous
    // and share (iteration, surviving_label)
    let log = &trace.merge_log;
    let mut idx = 0;
    while idx < log.len() {
        let t = log[idx].iteration;
        let surviving = log[idx].surviving_label;
        let mut labels = vec![surviving];
        while idx < log.len()
            && log[idx].iteration == t
            && log[idx].surviving_label == surviving
        {
            labels.push(log[idx].absorbed_label);
            idx += 1;
        }
        let children: Vec<usize> = labels
            .iter()
            .map(|l| active.remove(l).expect("merge of an inactive label"))
            .collect();
        let mut members = Vec::new();
        for &c in &children {
            members.extend_from_slice(&nodes[c].members);
        }
        members.sort_unstable();
        let parent_idx = nodes.len();
        for &c in &children {
            nodes[c].death = Some(t);
            nodes[c].parent = Some(parent_idx);
        }
        nodes.push(TreeNode {
            label: surviving,
            birth: t,
            death: None,
            members,
            parent: None,
            children,
        });
        active.insert(surviving, parent_idx);
    }

    ClusterTree {
        roots: active.into_values().collect(),
        nodes,
        final_iteration: trace.final_iteration(),
        n_points: n,
    }
}

/// Cluster flow diagram over `[from_t, to_t]`. Nodes are the clusters alive
/// at each iteration in range; every cluster sends its full size to the
/// cluster containing it one iteration later, so inflows always add up to
/// the receiving cluster's size.
pub fn sankey_export(tree: &ClusterTree, from_t: usize, to_t: usize) -> Result<SankeyDocument> {
    if from_t > to_t {
        return Err(Error::InvalidParameter(format!(
            "empty iteration range: {from_t} > {to_t}"
        )));
    }
    if to_t > tree.final_iteration {
        return Err(Error::InvalidParameter(format!(
            "iteration {to_t} is beyond the final iteration {}",
            tree.final_iteration
        )));
    }
    let mut iterations = Vec::with_capacity(to_t - from_t + 1);
    let mut links = Vec::new();
    for t in from_t..=to_t {
        let mut alive: Vec<&TreeNode> = tree
            .nodes
            .iter()
            .filter(|n| tree.alive_at(n, t))
            .collect();
        alive.sort_by_key(|n| n.label);
        iterations.push(SankeyIteration {
            t,
            nodes: alive
                .iter()
                .map(|n| SankeyNode {
                    id: n.label,
                    size: n.members.len(),
                })
                .collect(),
        });
        if t < to_t {
            let next_labels = tree.cut_at(t + 1);
            for n in &alive {
                links.push(SankeyLink {
                    t,
                    src: n.label,
                    dst: next_labels[n.members[0]],
                    flow: n.members.len(),
                });
            }
        }
    }
    Ok(SankeyDocument { iterations, links })
}

/// Writes a persistence table as CSV with a
/// `cluster_id,birth,death,persistence,size` header.
pub fn write_persistence_csv(table: &PersistenceTable, path: &Path) -> Result<()> {
    let mut out = String::from("cluster_id,birth,death,persistence,size\n");
    for r in &table.rows {
        out.push_str(&format!(
            "{},{},{},{},{}\n",
            r.cluster_id, r.birth, r.death, r.persistence, r.size
        ));
    }
    io::write_atomic(path, out.as_bytes())
}

fn pairs(k: u64) -> u128 {
    (k as u128) * (k.saturating_sub(1) as u128) / 2
}

/// Adjusted Rand index between two labelings of the same points: 1 for
/// identical partitions, near 0 for independent ones, negative for
/// disagreement beyond chance.
pub fn adjusted_rand_index(a: &[usize], b: &[usize]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch(format!(
            "label vectors differ in length: {} vs {}",
            a.len(),
            b.len()
        )));
    }
    if a.len() < 2 {
        return Err(Error::InvalidParameter(
            "need at least 2 points to compare partitions".into(),
        ));
    }
    let mut cont: BTreeMap<(usize, usize), u64> = BTreeMap::new();
    let mut rows: BTreeMap<usize, u64> = BTreeMap::new();
    let mut cols: BTreeMap<usize, u64> = BTreeMap::new();
    for (&x, &y) in a.iter().zip(b.iter()) {
        *cont.entry((x, y)).or_insert(0) += 1;
        *rows.entry(x).or_insert(0) += 1;
        *cols.entry(y).or_insert(0) += 1;
    }
    let sum_ij: u128 = cont.values().map(|&v| pairs(v)).sum();
    let sum_a: u128 = rows.values().map(|&v| pairs(v)).sum();
    let sum_b: u128 = cols.values().map(|&v| pairs(v)).sum();
    let total = pairs(a.len() as u64);
    // degenerate case: expected index equals maximum index (both partitions
    // all-singletons or both one-cluster); identical-by-construction, so 1
    if total * (sum_a + sum_b) == 2 * sum_a * sum_b {
        return Ok(1.0);
    }
    let expected = (sum_a as f64) * (sum_b as f64) / (total as f64);
    let num = sum_ij as f64 - expected;
    let den = 0.5 * (sum_a as f64 + sum_b as f64) - expected;
    Ok(num / den)
}

/// Mean ARI between two runs' partitions over iterations `t0..=t1`.
pub fn mean_ari_over_range(
    a: &CondensationTrace,
    b: &CondensationTrace,
    t0: usize,
    t1: usize,
) -> Result<f64> {
    if a.n_points() != b.n_points() {
        return Err(Error::DimensionMismatch(format!(
            "traces cover different point counts: {} vs {}",
            a.n_points(),
            b.n_points()
        )));
    }
    if t0 > t1 || t1 > a.final_iteration().min(b.final_iteration()) {
        return Err(Error::InvalidParameter(format!(
            "iteration range [{t0}, {t1}] is not covered by both traces"
        )));
    }
    let mut acc = 0.0;
    for t in t0..=t1 {
        acc += adjusted_rand_index(&a.labels_per_iteration[t], &b.labels_per_iteration[t])?;
    }
    Ok(acc / (t1 - t0 + 1) as f64)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::{run, CondensationConfig, HaltReason, MergeEvent};
    use ndarray::Array2;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    /// Hand-built trace: N points, given merge events, `t_final` passes.
    fn toy_trace(n: usize, events: Vec<MergeEvent>, t_final: usize) -> CondensationTrace {
        let mut labels = crate::engine::Labels::new(n);
        let mut labels_per_iteration = vec![labels.assignments()];
        for t in 1..=t_final {
            for e in events.iter().filter(|e| e.iteration == t) {
                labels.union(e.surviving_label, e.absorbed_label);
            }
            labels_per_iteration.push(labels.assignments());
        }
        CondensationTrace {
            config: CondensationConfig::default(),
            initial_epsilon: 1.0,
            snapshots: vec![(0, Array2::zeros((n, 1)))],
            epsilon_schedule: (1..=t_final).map(|t| (t, 1.0)).collect(),
            degree_log: Vec::new(),
            merge_log: events,
            labels_per_iteration,
            halt_reason: HaltReason::MaxIterations,
        }
    }

    fn merge(iteration: usize, surviving: usize, absorbed: usize, count: usize) -> MergeEvent {
        MergeEvent {
            iteration,
            absorbed_label: absorbed,
            surviving_label: surviving,
            member_count_after: count,
        }
    }

    #[test]
    fn single_merge_tree_shape() {
        let trace = toy_trace(2, vec![merge(5, 0, 1, 2)], 6);
        let tree = build_tree(&trace);
        assert_eq!(tree.nodes.len(), 3);
        assert_eq!(tree.nodes[0].death, Some(5));
        assert_eq!(tree.nodes[1].death, Some(5));
        let root = tree.root().unwrap();
        assert_eq!(tree.nodes[root].birth, 5);
        assert_eq!(tree.nodes[root].members, vec![0, 1]);
        assert_eq!(tree.nodes[root].children, vec![0, 1]);
        assert_eq!(tree.nodes[0].parent, Some(root));
    }

    #[test]
    fn no_merges_gives_leaf_forest() {
        let trace = toy_trace(4, vec![], 3);
        let tree = build_tree(&trace);
        assert_eq!(tree.nodes.len(), 4);
        assert_eq!(tree.roots.len(), 4);
        assert!(tree.root().is_none());
        assert_eq!(tree.cut_at(2), vec![0, 1, 2, 3]);
    }

    #[test]
    fn cut_points_at_the_merge_boundary() {
        let trace = toy_trace(3, vec![merge(2, 0, 1, 2), merge(4, 0, 2, 3)], 5);
        let tree = build_tree(&trace);
        assert_eq!(tree.cut_at(0), vec![0, 1, 2]);
        assert_eq!(tree.cut_at(1), vec![0, 1, 2]);
        assert_eq!(tree.cut_at(2), vec![0, 0, 2]);
        assert_eq!(tree.cut_at(3), vec![0, 0, 2]);
        assert_eq!(tree.cut_at(4), vec![0, 0, 0]);
        assert_eq!(tree.cut_at(usize::MAX), vec![0, 0, 0]);
    }

    #[test]
    fn persistence_uses_final_iteration_sentinel() {
        let trace = toy_trace(2, vec![merge(5, 0, 1, 2)], 8);
        let tree = build_tree(&trace);
        let table = tree.persistence_table();
        // leaves persist 5, root persists 8 - 5 = 3
        assert_eq!(table.rows[0].persistence, 5.0);
        assert_eq!(table.rows[1].persistence, 5.0);
        assert_eq!(table.rows[2].persistence, 3.0);
        assert_eq!(table.rows[2].death, 8);
        // descending order with deterministic tie-breaks
        assert!(table.rows.windows(2).all(|w| {
            w[0].persistence > w[1].persistence
                || (w[0].persistence == w[1].persistence && w[0].cluster_id <= w[1].cluster_id)
        }));
    }

    #[test]
    fn epsilon_weighted_persistence_sums_bandwidths() {
        let mut trace = toy_trace(2, vec![merge(2, 0, 1, 2)], 3);
        trace.epsilon_schedule = vec![(1, 1.0), (2, 2.0), (3, 4.0)];
        let tree = build_tree(&trace);
        let table = tree.epsilon_weighted_persistence(&trace);
        let leaf = table.rows.iter().find(|r| r.size == 1).unwrap();
        // alive through passes 1 and 2: bandwidth mass 1 + 2
        assert_eq!(leaf.persistence, 3.0);
        let root = table.rows.iter().find(|r| r.size == 2).unwrap();
        // alive through pass 3 only
        assert_eq!(root.persistence, 4.0);
    }

    #[test]
    fn structural_invariants_on_a_real_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(15);
        let x = Array2::from_shape_fn((24, 2), |_| rng.random::<f64>() * 2.0);
        let trace = run(&x, &CondensationConfig::default()).unwrap();
        let tree = build_tree(&trace);

        let leaves: Vec<&TreeNode> = tree.nodes.iter().filter(|n| n.children.is_empty()).collect();
        assert_eq!(leaves.len(), 24);
        assert!(leaves.iter().all(|n| n.birth == 0 && n.members.len() == 1));

        for node in &tree.nodes {
            if let Some(d) = node.death {
                assert!(node.birth <= d);
            }
            // parent members are exactly the union of child members
            if !node.children.is_empty() {
                let mut union: Vec<usize> = node
                    .children
                    .iter()
                    .flat_map(|c| tree.nodes[*c].members.iter().copied())
                    .collect();
                union.sort_unstable();
                assert_eq!(union, node.members);
            }
        }

        // the tree reproduces the engine's label log at every iteration
        for (t, labels) in trace.labels_per_iteration.iter().enumerate() {
            assert_eq!(&tree.cut_at(t), labels, "cut mismatch at iteration {t}");
        }

        // leaf-to-root persistence telescopes to the full run length
        let table = tree.persistence_table();
        let by_node: Vec<f64> = tree
            .nodes
            .iter()
            .map(|n| (n.death.unwrap_or(tree.final_iteration) - n.birth) as f64)
            .collect();
        assert_eq!(table.rows.len(), by_node.len());
        for leaf_idx in 0..24 {
            let mut acc = 0.0;
            let mut cur = Some(leaf_idx);
            while let Some(i) = cur {
                acc += by_node[i];
                cur = tree.nodes[i].parent;
            }
            assert_eq!(acc, tree.final_iteration as f64);
        }
    }

    #[test]
    fn sankey_single_merge_shape() {
        let trace = toy_trace(2, vec![merge(3, 0, 1, 2)], 4);
        let tree = build_tree(&trace);
        let doc = sankey_export(&tree, 2, 3).unwrap();
        assert_eq!(doc.iterations.len(), 2);
        assert_eq!(doc.iterations[0].nodes.len(), 2);
        assert_eq!(doc.iterations[1].nodes, vec![SankeyNode { id: 0, size: 2 }]);
        assert_eq!(
            doc.links,
            vec![
                SankeyLink { t: 2, src: 0, dst: 0, flow: 1 },
                SankeyLink { t: 2, src: 1, dst: 0, flow: 1 },
            ]
        );
    }

    #[test]
    fn sankey_without_merges_is_parallel() {
        let trace = toy_trace(3, vec![], 2);
        let tree = build_tree(&trace);
        let doc = sankey_export(&tree, 0, 2).unwrap();
        assert_eq!(doc.links.len(), 6);
        assert!(doc.links.iter().all(|l| l.src == l.dst && l.flow == 1));
    }

    #[test]
    fn sankey_conserves_mass_on_a_real_run() {
        let mut rng = ChaCha8Rng::seed_from_u64(16);
        let x = Array2::from_shape_fn((20, 2), |_| rng.random::<f64>());
        let trace = run(&x, &CondensationConfig::default()).unwrap();
        let tree = build_tree(&trace);
        let t_final = trace.final_iteration();
        let doc = sankey_export(&tree, 0, t_final).unwrap();
        for it in doc.iterations.iter().filter(|it| it.t > 0) {
            for node in &it.nodes {
                let inflow: usize = doc
                    .links
                    .iter()
                    .filter(|l| l.t + 1 == it.t && l.dst == node.id)
                    .map(|l| l.flow)
                    .sum();
                assert_eq!(inflow, node.size, "inflow mismatch at t={} id={}", it.t, node.id);
            }
        }
        // every iteration's sizes add up to N
        for it in &doc.iterations {
            assert_eq!(it.nodes.iter().map(|n| n.size).sum::<usize>(), 20);
        }
    }

    #[test]
    fn sankey_rejects_bad_ranges() {
        let trace = toy_trace(2, vec![], 3);
        let tree = build_tree(&trace);
        assert!(sankey_export(&tree, 2, 1).is_err());
        assert!(sankey_export(&tree, 0, 4).is_err());
    }

    #[test]
    fn sankey_document_schema() {
        let trace = toy_trace(2, vec![merge(1, 0, 1, 2)], 1);
        let tree = build_tree(&trace);
        let doc = sankey_export(&tree, 0, 1).unwrap();
        let json = serde_json::to_value(&doc).unwrap();
        assert!(json["iterations"][0]["t"].is_u64());
        assert!(json["iterations"][0]["nodes"][0]["id"].is_u64());
        assert!(json["iterations"][0]["nodes"][0]["size"].is_u64());
        assert!(json["links"][0]["src"].is_u64());
        assert!(json["links"][0]["dst"].is_u64());
        assert!(json["links"][0]["flow"].is_u64());
        let back: SankeyDocument = serde_json::from_value(json).unwrap();
        assert_eq!(back, doc);
    }

    #[test]
    fn ari_hand_cases() {
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[0, 0, 1, 1]).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[0, 0, 1, 1], &[5, 5, 9, 9]).unwrap(), 1.0);
        let v = adjusted_rand_index(&[1, 1, 2, 2], &[1, 2, 1, 2]).unwrap();
        assert!((v + 0.5).abs() < 1e-15);
        // both trivial partitions count as perfect agreement
        assert_eq!(adjusted_rand_index(&[0, 1, 2], &[5, 6, 7]).unwrap(), 1.0);
        assert_eq!(adjusted_rand_index(&[3, 3, 3], &[9, 9, 9]).unwrap(), 1.0);
        assert!(adjusted_rand_index(&[0, 1], &[0, 1, 2]).is_err());
        assert!(adjusted_rand_index(&[0], &[0]).is_err());
    }

    #[test]
    fn ari_matches_pair_counting_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(123);
        for _ in 0..25 {
            let n = rng.random_range(5..40);
            let ka = rng.random_range(1..6);
            let kb = rng.random_range(1..6);
            let a: Vec<usize> = (0..n).map(|_| rng.random_range(0..ka)).collect();
            let b: Vec<usize> = (0..n).map(|_| rng.random_range(0..kb)).collect();

            // count agreeing/disagreeing point pairs directly
            let (mut n00, mut n01, mut n10, mut n11) = (0f64, 0f64, 0f64, 0f64);
            for i in 0..n {
                for j in (i + 1)..n {
                    match (a[i] == a[j], b[i] == b[j]) {
                        (true, true) => n11 += 1.0,
                        (true, false) => n10 += 1.0,
                        (false, true) => n01 += 1.0,
                        (false, false) => n00 += 1.0,
                    }
                }
            }
            let denom = (n00 + n01) * (n01 + n11) + (n00 + n10) * (n10 + n11);
            let got = adjusted_rand_index(&a, &b).unwrap();
            if denom == 0.0 {
                assert_eq!(got, 1.0);
            } else {
                let want = 2.0 * (n00 * n11 - n01 * n10) / denom;
                assert!(
                    (got - want).abs() < 1e-12,
                    "ari {got} vs oracle {want} on {a:?} / {b:?}"
                );
            }
            assert!((-1.0..=1.0).contains(&got));

            // symmetry and self-agreement
            let sym = adjusted_rand_index(&b, &a).unwrap();
            assert!((got - sym).abs() < 1e-12);
            assert_eq!(adjusted_rand_index(&a, &a).unwrap(), 1.0);
        }
    }

    #[test]
    fn mean_ari_of_a_trace_with_itself_is_one() {
        let trace = toy_trace(4, vec![merge(2, 0, 1, 2)], 3);
        assert_eq!(mean_ari_over_range(&trace, &trace, 0, 3).unwrap(), 1.0);
        assert!(mean_ari_over_range(&trace, &trace, 0, 9).is_err());
        let other = toy_trace(5, vec![], 3);
        assert!(mean_ari_over_range(&trace, &other, 0, 3).is_err());
    }

    #[test]
    fn persistence_csv_layout() {
        let trace = toy_trace(2, vec![merge(1, 0, 1, 2)], 2);
        let tree = build_tree(&trace);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("persistence.csv");
        write_persistence_csv(&tree.persistence_table(), &path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "cluster_id,birth,death,persistence,size");
        assert_eq!(lines.len(), 4);
        assert!(lines[1].split(',').count() == 5);
    }
}
