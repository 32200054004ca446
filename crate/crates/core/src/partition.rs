//! Splits one large labeled graph into several distribution-shifted subgraphs:
//! farthest-point anchors, k-hop spans, overlap control and largest connected
//! components.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{bfs_on_lists, write_json, AttributedGraph, Dataset};
use crate::rng::{stream, stream_rng, Rng};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PartitionConfig {
    /// Number of subgraphs.
    pub m: usize,
    /// Hop radius of each span.
    pub k: usize,
    pub max_normal_overlap: f64,
    pub max_retries: usize,
    /// Largest allowed ratio between the biggest and smallest subgraph.
    pub max_size_ratio: f64,
    pub seed: u64,
}

impl Default for PartitionConfig {
    fn default() -> Self {
        Self { m: 4, k: 2, max_normal_overlap: 0.10, max_retries: 50, max_size_ratio: 2.0, seed: 0 }
    }
}

impl PartitionConfig {
    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::config(format!("m: must be at least 2, got {}", self.m)));
        }
        if self.k < 1 {
            return Err(Error::config("k: must be at least 1"));
        }
        if !(0.0..1.0).contains(&self.max_normal_overlap) {
            return Err(Error::config(format!(
                "max_normal_overlap: must lie in [0, 1), got {}",
                self.max_normal_overlap
            )));
        }
        if self.max_retries == 0 {
            return Err(Error::config("max_retries: must be at least 1"));
        }
        if !(self.max_size_ratio >= 1.0) {
            return Err(Error::config(format!("max_size_ratio: must be at least 1, got {}", self.max_size_ratio)));
        }
        Ok(())
    }
}

/// Greedy max-min farthest-point anchors starting from `first`; ties go to
/// the smallest node id.
pub fn farthest_point_anchors_from(adj: &[Vec<usize>], m: usize, first: usize) -> Result<Vec<usize>> {
    let mut anchors = vec![first];
    let mut min_dist = bfs_on_lists(adj, first, None);
    while anchors.len() < m {
        let mut best: Option<(usize, usize)> = None;
        for (v, d) in min_dist.iter().enumerate() {
            if let Some(d) = *d {
                if d > 0 && best.is_none_or(|(_, bd)| d > bd) {
                    best = Some((v, d));
                }
            }
        }
        let Some((next, _)) = best else {
            return Err(Error::Partition(format!(
                "only {} mutually reachable anchors exist from node {first}, need {m}",
                anchors.len()
            )));
        };
        anchors.push(next);
        for (cur, d) in min_dist.iter_mut().zip(bfs_on_lists(adj, next, None)) {
            if let (Some(c), Some(d)) = (*cur, d) {
                *cur = Some(c.min(d));
            }
        }
    }
    Ok(anchors)
}

/// Uniformly random first anchor, then greedy max-min farthest points.
pub fn farthest_point_anchors<T: Scalar>(graph: &AttributedGraph<T>, m: usize, rng: &mut Rng) -> Result<Vec<usize>> {
    if graph.num_nodes() == 0 {
        return Err(Error::Partition("graph has no nodes".into()));
    }
    let first = rng.random_range(0..graph.num_nodes());
    farthest_point_anchors_from(&graph.neighbor_lists(), m, first)
}

/// All nodes within `k` hops of `anchor`, sorted.
pub fn span_subgraph<T: Scalar>(graph: &AttributedGraph<T>, anchor: usize, k: usize) -> Result<Vec<usize>> {
    if anchor >= graph.num_nodes() {
        return Err(Error::Range(format!("anchor {anchor} outside graph of {} nodes", graph.num_nodes())));
    }
    Ok(span_on_lists(&graph.neighbor_lists(), anchor, k))
}

fn span_on_lists(adj: &[Vec<usize>], anchor: usize, k: usize) -> Vec<usize> {
    bfs_on_lists(adj, anchor, Some(k))
        .iter()
        .enumerate()
        .filter(|(_, d)| d.is_some())
        .map(|(v, _)| v)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct NormalOverlap {
    pub subgraph: usize,
    pub other: usize,
    pub shared: Vec<usize>,
    /// Shared normals as a fraction of `subgraph`'s normals.
    pub fraction: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OverlapReport {
    pub passed: bool,
    pub shared_anomalies: Vec<usize>,
    pub normal_violations: Vec<NormalOverlap>,
    pub max_pairwise_normal_overlap: f64,
}

/// Fails on any anomaly present in two sets, or on any ordered pair whose
/// shared normals reach `max_normal_overlap` of the first set's normals.
pub fn validate_overlap(sets: &[Vec<usize>], ground_truth: &[u8], max_normal_overlap: f64) -> OverlapReport {
    let n = ground_truth.len();
    let mut membership = vec![0usize; n];
    for set in sets {
        for &v in set {
            membership[v] += 1;
        }
    }
    let shared_anomalies: Vec<usize> = (0..n).filter(|&v| membership[v] > 1 && ground_truth[v] == 1).collect();

    let mut normal_violations = Vec::new();
    let mut max_frac: f64 = 0.0;
    let masks: Vec<Vec<bool>> = sets
        .iter()
        .map(|s| {
            let mut m = vec![false; n];
            for &v in s {
                m[v] = true;
            }
            m
        })
        .collect();
    for (i, set) in sets.iter().enumerate() {
        let normals: Vec<usize> = set.iter().copied().filter(|&v| ground_truth[v] == 0).collect();
        if normals.is_empty() {
            continue;
        }
        for (j, mask) in masks.iter().enumerate().filter(|&(j, _)| j != i) {
            let shared: Vec<usize> = normals.iter().copied().filter(|&v| mask[v]).collect();
            let fraction = shared.len() as f64 / normals.len() as f64;
            max_frac = max_frac.max(fraction);
            if !shared.is_empty() && fraction >= max_normal_overlap {
                normal_violations.push(NormalOverlap { subgraph: i, other: j, shared, fraction });
            }
        }
    }
    OverlapReport {
        passed: shared_anomalies.is_empty() && normal_violations.is_empty(),
        shared_anomalies,
        normal_violations,
        max_pairwise_normal_overlap: max_frac,
    }
}

/// Largest connected component of the subgraph induced by `nodes`; ties go to
/// the component holding the smallest node id.
pub fn largest_connected_component<T: Scalar>(graph: &AttributedGraph<T>, nodes: &[usize]) -> Vec<usize> {
    lcc_on_lists(&graph.neighbor_lists(), nodes)
}

fn lcc_on_lists(adj: &[Vec<usize>], nodes: &[usize]) -> Vec<usize> {
    let mut inside = vec![false; adj.len()];
    for &v in nodes {
        inside[v] = true;
    }
    let mut seen = vec![false; adj.len()];
    let mut sorted = nodes.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    let mut best: Vec<usize> = Vec::new();
    for &start in &sorted {
        if seen[start] {
            continue;
        }
        seen[start] = true;
        let mut comp = vec![start];
        let mut head = 0;
        while head < comp.len() {
            let u = comp[head];
            head += 1;
            for &v in &adj[u] {
                if inside[v] && !seen[v] {
                    seen[v] = true;
                    comp.push(v);
                }
            }
        }
        // Components are discovered in order of their smallest id, so strict
        // comparison keeps the earliest on ties.
        if comp.len() > best.len() {
            best = comp;
        }
    }
    best.sort_unstable();
    best
}

/// One materialized subgraph and its id table (`remap[new] = original`).
#[derive(Clone, Debug)]
pub struct Subgraph<T> {
    pub dataset: Dataset<T>,
    pub remap: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct PartitionReport {
    pub m: usize,
    pub k: usize,
    pub seed: u64,
    pub retries_used: usize,
    pub sizes: Vec<usize>,
    pub anomaly_overlap: usize,
    pub max_pairwise_normal_overlap: f64,
    pub remap: BTreeMap<String, Vec<usize>>,
}

impl PartitionReport {
    pub fn save(&self, path: &Path) -> Result<()> {
        write_json(path, self)
    }
}

#[derive(Clone, Debug)]
pub struct Partition<T> {
    pub subgraphs: Vec<Subgraph<T>>,
    pub report: PartitionReport,
}

/// Reassigns nodes present in several sets to the set whose anchor is nearest
/// (ties to the lower index).
fn assign_shared_to_nearest(sets: &mut [Vec<usize>], anchor_dists: &[Vec<Option<usize>>], n: usize) {
    let mut owners: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (i, set) in sets.iter().enumerate() {
        for &v in set {
            owners[v].push(i);
        }
    }
    let mut keep_in = vec![usize::MAX; n];
    for (v, own) in owners.iter().enumerate().filter(|(_, o)| o.len() > 1) {
        keep_in[v] = *own
            .iter()
            .min_by_key(|&&i| (anchor_dists[i][v].unwrap_or(usize::MAX), i))
            .expect("non-empty");
    }
    for (i, set) in sets.iter_mut().enumerate() {
        set.retain(|&v| keep_in[v] == usize::MAX || keep_in[v] == i);
    }
}

/// Runs anchor selection, spanning, overlap control, LCC extraction and the
/// size check, retrying with fresh anchors until every requirement holds.
pub fn partition<T: Scalar>(graph: &AttributedGraph<T>, ground_truth: &[u8], config: &PartitionConfig) -> Result<Partition<T>> {
    config.validate()?;
    let n = graph.num_nodes();
    if ground_truth.len() != n {
        return Err(Error::shape(format!("{} labels for {n} nodes", ground_truth.len())));
    }
    if n == 0 {
        return Err(Error::Partition("graph has no nodes".into()));
    }
    let adj = graph.neighbor_lists();
    let mut rng = stream_rng(config.seed, stream::PARTITION);
    let mut last_failure = String::new();

    for attempt in 0..config.max_retries {
        let first = rng.random_range(0..n);
        let anchors = match farthest_point_anchors_from(&adj, config.m, first) {
            Ok(a) => a,
            Err(e) => {
                last_failure = e.to_string();
                continue;
            }
        };
        let anchor_dists: Vec<Vec<Option<usize>>> = anchors.iter().map(|&a| bfs_on_lists(&adj, a, None)).collect();
        let mut sets: Vec<Vec<usize>> = anchors.iter().map(|&a| span_on_lists(&adj, a, config.k)).collect();

        let raw = validate_overlap(&sets, ground_truth, config.max_normal_overlap);
        if !raw.shared_anomalies.is_empty() {
            last_failure = format!("spans share anomalies {:?}", raw.shared_anomalies);
            continue;
        }
        if !raw.passed {
            assign_shared_to_nearest(&mut sets, &anchor_dists, n);
        }
        let sets: Vec<Vec<usize>> = sets.iter().map(|s| lcc_on_lists(&adj, s)).collect();

        let check = validate_overlap(&sets, ground_truth, config.max_normal_overlap);
        if !check.passed {
            last_failure = format!(
                "overlap check failed: {} shared anomalies, {} normal violations",
                check.shared_anomalies.len(),
                check.normal_violations.len()
            );
            continue;
        }
        let sizes: Vec<usize> = sets.iter().map(Vec::len).collect();
        let (lo, hi) = (*sizes.iter().min().unwrap(), *sizes.iter().max().unwrap());
        if lo == 0 || hi as f64 > config.max_size_ratio * lo as f64 {
            last_failure = format!("subgraph sizes {sizes:?} exceed ratio {}", config.max_size_ratio);
            continue;
        }

        let mut subgraphs = Vec::with_capacity(sets.len());
        let mut remap = BTreeMap::new();
        for (i, nodes) in sets.into_iter().enumerate() {
            let sub = graph.induced(format!("{}_sub{i}", graph.graph_id()), &nodes)?;
            let labels = nodes.iter().map(|&v| ground_truth[v]).collect();
            remap.insert(i.to_string(), nodes.clone());
            subgraphs.push(Subgraph { dataset: Dataset { graph: sub, labels }, remap: nodes });
        }
        let report = PartitionReport {
            m: config.m,
            k: config.k,
            seed: config.seed,
            retries_used: attempt,
            sizes,
            anomaly_overlap: check.shared_anomalies.len(),
            max_pairwise_normal_overlap: check.max_pairwise_normal_overlap,
            remap,
        };
        return Ok(Partition { subgraphs, report });
    }
    Err(Error::Partition(format!(
        "no valid partition after {} attempts; last failure: {last_failure}",
        config.max_retries
    )))
}
