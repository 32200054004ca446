//! Synthetic families of attributed graphs sharing one anomaly pattern over
//! per-graph shifted normal backgrounds.

use rand::seq::index;
use rand::Rng as _;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, Dataset, NodeRoles};
use crate::linalg::Matrix;
use crate::rng::{derive_seed, stream, stream_rng, Rng};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SynthConfig {
    pub num_graphs: usize,
    pub num_nodes: usize,
    pub feature_dim: usize,
    pub anomaly_ratio: f64,
    /// Norm of each graph's normal-mean offset from the shared base.
    pub background_shift: f64,
    /// Distance of the shared anomaly mean from the base.
    pub anomaly_separation: f64,
    pub p_in: f64,
    pub p_out: f64,
    pub seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        Self {
            num_graphs: 4,
            num_nodes: 300,
            feature_dim: 16,
            anomaly_ratio: 0.05,
            background_shift: 3.0,
            anomaly_separation: 6.0,
            p_in: 0.05,
            p_out: 0.005,
            seed: 0,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::config(format!("{key}: {why}")));
        if self.num_graphs == 0 {
            return bad("num_graphs", "must be at least 1".into());
        }
        if self.num_nodes < 2 {
            return bad("num_nodes", format!("must be at least 2, got {}", self.num_nodes));
        }
        if self.feature_dim == 0 {
            return bad("feature_dim", "must be positive".into());
        }
        if !(self.anomaly_ratio > 0.0 && self.anomaly_ratio < 0.5) {
            return bad("anomaly_ratio", format!("must lie in (0, 0.5), got {}", self.anomaly_ratio));
        }
        if !(self.p_out > 0.0) {
            return bad("p_out", format!("must be positive, got {}", self.p_out));
        }
        if !(self.p_in > self.p_out && self.p_in <= 1.0) {
            return bad("p_in", format!("must satisfy p_out < p_in ≤ 1, got {}", self.p_in));
        }
        if !(self.background_shift >= 0.0 && self.background_shift.is_finite()) {
            return bad("background_shift", format!("must be finite and non-negative, got {}", self.background_shift));
        }
        if !(self.anomaly_separation >= 0.0 && self.anomaly_separation.is_finite()) {
            return bad(
                "anomaly_separation",
                format!("must be finite and non-negative, got {}", self.anomaly_separation),
            );
        }
        Ok(())
    }

    pub fn anomalies_per_graph(&self) -> usize {
        (self.anomaly_ratio * self.num_nodes as f64).ceil() as usize
    }
}

/// A generated family and the means it was drawn around.
#[derive(Clone, Debug)]
pub struct SynthFamily<T> {
    pub datasets: Vec<Dataset<T>>,
    pub anomaly_mean: Vec<f64>,
    pub background_means: Vec<Vec<f64>>,
}

fn unit_vector(d: usize, rng: &mut Rng) -> Vec<f64> {
    loop {
        let v: Vec<f64> = (0..d).map(|_| rng.sample(StandardNormal)).collect();
        let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
        if norm > 1e-12 {
            return v.into_iter().map(|x| x / norm).collect();
        }
    }
}

/// Normals ~ N(base + shift_g, I), anomalies ~ N(μ_A, ½I) with μ_A shared by
/// every graph; edges from a two-block stochastic block model.
pub fn generate_family<T: Scalar>(config: &SynthConfig) -> Result<SynthFamily<T>> {
    config.validate()?;
    let d = config.feature_dim;
    let base = vec![0.0; d];
    let mut shared = stream_rng(config.seed, stream::SYNTH);
    let anomaly_mean: Vec<f64> = unit_vector(d, &mut shared)
        .iter()
        .zip(&base)
        .map(|(u, b)| b + config.anomaly_separation * u)
        .collect();
    let anomaly_std = 0.5f64.sqrt();
    let n = config.num_nodes;
    let n_anom = config.anomalies_per_graph();

    let mut datasets = Vec::with_capacity(config.num_graphs);
    let mut background_means = Vec::with_capacity(config.num_graphs);
    for g in 0..config.num_graphs {
        let mut rng = stream_rng(derive_seed(config.seed, g as u64 + 1), stream::SYNTH);
        let mean: Vec<f64> = unit_vector(d, &mut rng)
            .iter()
            .zip(&base)
            .map(|(u, b)| b + config.background_shift * u)
            .collect();
        let mut labels = vec![0u8; n];
        for v in index::sample(&mut rng, n, n_anom) {
            labels[v] = 1;
        }
        let mut data = Vec::with_capacity(n * d);
        for &y in &labels {
            let (mu, sd) = if y == 1 { (&anomaly_mean, anomaly_std) } else { (&mean, 1.0) };
            for &m in mu.iter() {
                let z: f64 = rng.sample(StandardNormal);
                data.push(T::lit(m + sd * z));
            }
        }
        let mut edges = Vec::new();
        for u in 0..n {
            for v in u + 1..n {
                let p = if labels[u] == labels[v] { config.p_in } else { config.p_out };
                if rng.random::<f64>() < p {
                    edges.push((u, v));
                }
            }
        }
        let graph = AttributedGraph::new(format!("synth_{g}"), n, edges, Matrix::from_vec(n, d, data)?)?;
        datasets.push(Dataset { graph, labels });
        background_means.push(mean);
    }
    Ok(SynthFamily { datasets, anomaly_mean, background_means })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GraphStats {
    pub graph_id: String,
    pub num_nodes: usize,
    pub num_edges: usize,
    pub num_anomalies: usize,
    pub anomaly_ratio: f64,
    pub contamination: Option<f64>,
}

/// Fraction of unlabeled true anomalies inside the normal pool.
pub fn contamination(roles: &NodeRoles) -> f64 {
    if roles.normal_pool.is_empty() {
        return 0.0;
    }
    let hidden = roles.normal_pool.iter().filter(|&&v| roles.ground_truth[v] == 1).count();
    hidden as f64 / roles.normal_pool.len() as f64
}

pub fn family_stats<T: Scalar>(family: &[Dataset<T>], roles: Option<&[NodeRoles]>) -> Vec<GraphStats> {
    family
        .iter()
        .enumerate()
        .map(|(i, ds)| {
            let n = ds.graph.num_nodes();
            let anomalies = ds.num_anomalies();
            GraphStats {
                graph_id: ds.graph.graph_id().to_owned(),
                num_nodes: n,
                num_edges: ds.graph.edges().len(),
                num_anomalies: anomalies,
                anomaly_ratio: if n == 0 { 0.0 } else { anomalies as f64 / n as f64 },
                contamination: roles.and_then(|r| r.get(i)).map(contamination),
            }
        })
        .collect()
}

pub fn format_stats_table(stats: &[GraphStats]) -> String {
    let mut out = format!("{:<16} {:>7} {:>7} {:>9} {:>7} {:>8}\n", "graph", "nodes", "edges", "anomalies", "r", "beta");
    for s in stats {
        let beta = s.contamination.map_or_else(|| "-".to_owned(), |b| format!("{b:.4}"));
        out.push_str(&format!(
            "{:<16} {:>7} {:>7} {:>9} {:>7.4} {:>8}\n",
            s.graph_id, s.num_nodes, s.num_edges, s.num_anomalies, s.anomaly_ratio, beta
        ));
    }
    out
}
