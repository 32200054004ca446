//! Attributed graphs, dataset directories, adjacency normalization, node-role
//! splitting and hop distances.

use std::collections::VecDeque;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::{index, SliceRandom};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{CsrMatrix, Matrix};
use crate::rng::{stream, stream_rng};
use crate::scalar::Scalar;

/// Undirected, unweighted graph with a dense attribute row per node.
#[derive(Clone, Debug, PartialEq)]
pub struct AttributedGraph<T> {
    graph_id: String,
    num_nodes: usize,
    edges: Vec<(usize, usize)>,
    features: Matrix<T>,
}

impl<T: Scalar> AttributedGraph<T> {
    /// Validates endpoints and canonicalizes edges: each pair stored once as
    /// `(lo, hi)`, sorted, self-loops dropped.
    pub fn new(
        graph_id: impl Into<String>,
        num_nodes: usize,
        edges: impl IntoIterator<Item = (usize, usize)>,
        features: Matrix<T>,
    ) -> Result<Self> {
        if features.rows() != num_nodes {
            return Err(Error::Validation {
                file: "features".into(),
                row: features.rows(),
                message: format!("expected {num_nodes} feature rows, found {}", features.rows()),
            });
        }
        let mut canon = Vec::new();
        for (row, (a, b)) in edges.into_iter().enumerate() {
            if a >= num_nodes || b >= num_nodes {
                return Err(Error::Validation {
                    file: "edges".into(),
                    row: row + 1,
                    message: format!("edge ({a},{b}) has an endpoint outside [0, {num_nodes})"),
                });
            }
            if a != b {
                canon.push((a.min(b), a.max(b)));
            }
        }
        canon.sort_unstable();
        canon.dedup();
        Ok(Self { graph_id: graph_id.into(), num_nodes, edges: canon, features })
    }

    pub fn graph_id(&self) -> &str {
        &self.graph_id
    }

    pub fn num_nodes(&self) -> usize {
        self.num_nodes
    }

    pub fn feature_dim(&self) -> usize {
        self.features.cols()
    }

    /// Canonical edge list (`src < dst`, sorted, unique).
    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    pub fn features(&self) -> &Matrix<T> {
        &self.features
    }

    /// Sorted neighbor list of every node.
    pub fn neighbor_lists(&self) -> Vec<Vec<usize>> {
        let mut adj = vec![Vec::new(); self.num_nodes];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        for list in &mut adj {
            list.sort_unstable();
        }
        adj
    }

    /// Subgraph induced by `nodes` (original ids), re-indexed densely in the
    /// given order.
    pub fn induced(&self, graph_id: impl Into<String>, nodes: &[usize]) -> Result<Self> {
        let mut local = vec![usize::MAX; self.num_nodes];
        for (new, &old) in nodes.iter().enumerate() {
            local[old] = new;
        }
        let edges = self
            .edges
            .iter()
            .filter(|&&(a, b)| local[a] != usize::MAX && local[b] != usize::MAX)
            .map(|&(a, b)| (local[a], local[b]));
        Self::new(graph_id, nodes.len(), edges.collect::<Vec<_>>(), self.features.gather_rows(nodes))
    }

    /// Same graph, different scalar type.
    pub fn cast<U: Scalar>(&self) -> AttributedGraph<U> {
        AttributedGraph {
            graph_id: self.graph_id.clone(),
            num_nodes: self.num_nodes,
            edges: self.edges.clone(),
            features: self.features.map(|x| U::lit(x.as_f64())),
        }
    }
}

/// `D^{-1/2}(A+I)D^{-1/2}` stored sparsely.
#[derive(Clone, Debug, PartialEq)]
pub struct NormalizedAdjacency<T> {
    matrix: CsrMatrix<T>,
}

impl<T: Scalar> NormalizedAdjacency<T> {
    pub fn matrix(&self) -> &CsrMatrix<T> {
        &self.matrix
    }

    pub fn num_nodes(&self) -> usize {
        self.matrix.n_rows()
    }

    pub fn get(&self, r: usize, c: usize) -> T {
        self.matrix.get(r, c)
    }

    pub fn cast<U: Scalar>(&self) -> NormalizedAdjacency<U> {
        NormalizedAdjacency { matrix: self.matrix.map(|x| U::lit(x.as_f64())) }
    }
}

pub fn normalize_adjacency<T: Scalar>(graph: &AttributedGraph<T>) -> NormalizedAdjacency<T> {
    let adj = graph.neighbor_lists();
    let inv_sqrt: Vec<T> =
        adj.iter().map(|nb| T::from_usize_lossy(nb.len() + 1).sqrt().recip()).collect();
    let rows = adj
        .iter()
        .enumerate()
        .map(|(i, nb)| {
            let mut row: Vec<(usize, T)> =
                nb.iter().map(|&j| (j, inv_sqrt[i] * inv_sqrt[j])).collect();
            let pos = row.partition_point(|&(j, _)| j < i);
            row.insert(pos, (i, inv_sqrt[i] * inv_sqrt[i]));
            row
        })
        .collect();
    NormalizedAdjacency { matrix: CsrMatrix::from_row_lists(graph.num_nodes(), rows) }
}

/// Unweighted hop distance from `source`; `None` marks unreachable nodes.
pub fn bfs_hops<T: Scalar>(graph: &AttributedGraph<T>, source: usize) -> Result<Vec<Option<usize>>> {
    if source >= graph.num_nodes() {
        return Err(Error::Range(format!("source {source} outside graph of {} nodes", graph.num_nodes())));
    }
    Ok(bfs_on_lists(&graph.neighbor_lists(), source, None))
}

/// BFS over prebuilt neighbor lists, optionally stopping beyond `max_depth`.
pub(crate) fn bfs_on_lists(
    adj: &[Vec<usize>],
    source: usize,
    max_depth: Option<usize>,
) -> Vec<Option<usize>> {
    let mut dist = vec![None; adj.len()];
    dist[source] = Some(0);
    let mut queue = VecDeque::from([source]);
    while let Some(u) = queue.pop_front() {
        let du = dist[u].unwrap();
        if max_depth.is_some_and(|k| du >= k) {
            continue;
        }
        for &v in &adj[u] {
            if dist[v].is_none() {
                dist[v] = Some(du + 1);
                queue.push_back(v);
            }
        }
    }
    dist
}

/// Per-graph partition of node ids into training roles. All id lists are sorted.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NodeRoles {
    pub seed: u64,
    pub labeled_anomalies: Vec<usize>,
    pub normal_pool: Vec<usize>,
    pub test_nodes: Vec<usize>,
    pub anomaly_train: Vec<usize>,
    pub anomaly_val: Vec<usize>,
    pub normal_train: Vec<usize>,
    pub normal_val: Vec<usize>,
    pub ground_truth: Vec<u8>,
}

impl NodeRoles {
    pub fn num_nodes(&self) -> usize {
        self.ground_truth.len()
    }

    /// Checks the partition invariants.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_nodes();
        let mut owner = vec![0u8; n];
        for (tag, set) in
            [(1u8, &self.labeled_anomalies), (2, &self.normal_pool), (3, &self.test_nodes)]
        {
            for &v in set {
                if v >= n || owner[v] != 0 {
                    return Err(Error::config(format!("node {v} assigned to more than one role")));
                }
                owner[v] = tag;
            }
        }
        if let Some(v) = owner.iter().position(|&o| o == 0) {
            return Err(Error::config(format!("node {v} has no role")));
        }
        if let Some(&v) = self.labeled_anomalies.iter().find(|&&v| self.ground_truth[v] != 1) {
            return Err(Error::config(format!("labeled anomaly {v} is not an anomaly")));
        }
        let check_sub = |whole: &[usize], a: &[usize], b: &[usize], what: &str| {
            let mut merged: Vec<usize> = a.iter().chain(b).copied().collect();
            merged.sort_unstable();
            if merged != whole {
                return Err(Error::config(format!("{what} sub-split does not partition its pool")));
            }
            Ok(())
        };
        check_sub(&self.labeled_anomalies, &self.anomaly_train, &self.anomaly_val, "anomaly")?;
        check_sub(&self.normal_pool, &self.normal_train, &self.normal_val, "normal")
    }
}

fn round_count(x: f64) -> usize {
    x.round() as usize
}

/// Splits one 4:2 share into (train, val), both sorted.
fn split_four_two(mut ids: Vec<usize>, rng: &mut crate::rng::Rng) -> (Vec<usize>, Vec<usize>) {
    ids.shuffle(rng);
    let n_train = round_count(ids.len() as f64 * 4.0 / 6.0);
    let mut val = ids.split_off(n_train);
    ids.sort_unstable();
    val.sort_unstable();
    (ids, val)
}

/// Samples labeled anomalies and assigns the remaining nodes 60/40 to the
/// train+val pool and the test set; the labeled set and normal pool are each
/// sub-split 4:2 into train/val.
pub fn split_roles(ground_truth: &[u8], num_labeled_anomalies: usize, seed: u64) -> Result<NodeRoles> {
    let anomalies: Vec<usize> =
        ground_truth.iter().enumerate().filter(|(_, &y)| y == 1).map(|(i, _)| i).collect();
    if anomalies.len() < num_labeled_anomalies {
        return Err(Error::config(format!(
            "requested {num_labeled_anomalies} labeled anomalies but the graph has only {}",
            anomalies.len()
        )));
    }
    let mut rng = stream_rng(seed, stream::SPLIT_LABELED);
    let mut labeled: Vec<usize> = index::sample(&mut rng, anomalies.len(), num_labeled_anomalies)
        .into_iter()
        .map(|k| anomalies[k])
        .collect();
    labeled.sort_unstable();

    let mut is_labeled = vec![false; ground_truth.len()];
    for &v in &labeled {
        is_labeled[v] = true;
    }
    let mut rest: Vec<usize> = (0..ground_truth.len()).filter(|&v| !is_labeled[v]).collect();
    let mut rng = stream_rng(seed, stream::SPLIT_POOL);
    rest.shuffle(&mut rng);
    let n_pool = round_count(rest.len() as f64 * 0.6);
    let mut test_nodes = rest.split_off(n_pool);
    let mut normal_pool = rest;
    normal_pool.sort_unstable();
    test_nodes.sort_unstable();

    let (anomaly_train, anomaly_val) =
        split_four_two(labeled.clone(), &mut stream_rng(seed, stream::SPLIT_ANOMALY_SUB));
    let (normal_train, normal_val) =
        split_four_two(normal_pool.clone(), &mut stream_rng(seed, stream::SPLIT_NORMAL_SUB));

    Ok(NodeRoles {
        seed,
        labeled_anomalies: labeled,
        normal_pool,
        test_nodes,
        anomaly_train,
        anomaly_val,
        normal_train,
        normal_val,
        ground_truth: ground_truth.to_vec(),
    })
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SplitsFile {
    seed: u64,
    labeled_anomalies: Vec<usize>,
    anomaly_train: Vec<usize>,
    anomaly_val: Vec<usize>,
    normal_train: Vec<usize>,
    normal_val: Vec<usize>,
    test: Vec<usize>,
}

pub fn save_splits(path: &Path, roles: &NodeRoles) -> Result<()> {
    let file = SplitsFile {
        seed: roles.seed,
        labeled_anomalies: roles.labeled_anomalies.clone(),
        anomaly_train: roles.anomaly_train.clone(),
        anomaly_val: roles.anomaly_val.clone(),
        normal_train: roles.normal_train.clone(),
        normal_val: roles.normal_val.clone(),
        test: roles.test_nodes.clone(),
    };
    write_json(path, &file)
}

pub fn load_splits(path: &Path, ground_truth: &[u8]) -> Result<NodeRoles> {
    let file: SplitsFile = read_json(path)?;
    let mut normal_pool: Vec<usize> =
        file.normal_train.iter().chain(&file.normal_val).copied().collect();
    normal_pool.sort_unstable();
    let roles = NodeRoles {
        seed: file.seed,
        labeled_anomalies: file.labeled_anomalies,
        normal_pool,
        test_nodes: file.test,
        anomaly_train: file.anomaly_train,
        anomaly_val: file.anomaly_val,
        normal_train: file.normal_train,
        normal_val: file.normal_val,
        ground_truth: ground_truth.to_vec(),
    };
    roles.validate()?;
    Ok(roles)
}

/// A graph with its per-node ground-truth labels (0 normal, 1 anomaly).
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset<T> {
    pub graph: AttributedGraph<T>,
    pub labels: Vec<u8>,
}

impl<T: Scalar> Dataset<T> {
    pub fn num_anomalies(&self) -> usize {
        self.labels.iter().filter(|&&y| y == 1).count()
    }
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MetaFile {
    name: String,
    num_nodes: usize,
    num_edges: usize,
    feature_dim: usize,
}

pub(crate) fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|source| Error::Load { path: path.to_path_buf(), source })
}

pub(crate) fn write_text(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|source| Error::Write { path: path.to_path_buf(), source })
}

pub(crate) fn read_json<D: serde::de::DeserializeOwned>(path: &Path) -> Result<D> {
    let text = read_text(path)?;
    serde_json::from_str(&text)
        .map_err(|e| Error::Json { file: path.display().to_string(), message: e.to_string() })
}

pub(crate) fn write_json<S: Serialize>(path: &Path, value: &S) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value).expect("serializable value");
    text.push('\n');
    write_text(path, &text)
}

pub(crate) fn create_dir(path: &Path) -> Result<()> {
    fs::create_dir_all(path).map_err(|source| Error::Write { path: path.to_path_buf(), source })
}

/// Reads a headerless CSV, returning each record's fields with its 1-based row number.
fn read_csv_rows(path: &Path) -> Result<Vec<(usize, Vec<String>)>> {
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(text.as_bytes());
    let file = file_name(path);
    let mut rows = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| Error::Validation {
            file: file.clone(),
            row: i + 1,
            message: e.to_string(),
        })?;
        rows.push((i + 1, record.iter().map(str::to_owned).collect()));
    }
    Ok(rows)
}

fn file_name(path: &Path) -> String {
    path.file_name().map_or_else(|| path.display().to_string(), |f| f.to_string_lossy().into_owned())
}

fn parse_field<F: std::str::FromStr>(file: &str, row: usize, field: &str, what: &str) -> Result<F> {
    field.parse().map_err(|_| Error::Validation {
        file: file.into(),
        row,
        message: format!("cannot parse {what} from {field:?}"),
    })
}

fn required(dir: &Path, name: &str) -> Result<PathBuf> {
    let path = dir.join(name);
    if !path.is_file() {
        return Err(Error::Load {
            path: path.clone(),
            source: std::io::Error::new(std::io::ErrorKind::NotFound, format!("missing {name}")),
        });
    }
    Ok(path)
}

/// Loads a dataset directory (`meta.json`, `nodes.csv`, `edges.csv`, `features.csv`).
pub fn load_dataset<T: Scalar>(dir: &Path) -> Result<Dataset<T>> {
    let meta: MetaFile = read_json(&required(dir, "meta.json")?)?;
    let nodes_path = required(dir, "nodes.csv")?;
    let edges_path = required(dir, "edges.csv")?;
    let features_path = required(dir, "features.csv")?;

    let mut labels = Vec::with_capacity(meta.num_nodes);
    for (row, fields) in read_csv_rows(&nodes_path)? {
        if fields.len() != 2 {
            return Err(Error::Validation {
                file: "nodes.csv".into(),
                row,
                message: format!("expected `node_id,label`, found {} fields", fields.len()),
            });
        }
        let id: usize = parse_field("nodes.csv", row, &fields[0], "node id")?;
        if id != labels.len() {
            return Err(Error::Validation {
                file: "nodes.csv".into(),
                row,
                message: format!("node ids must be dense and ascending; expected {}, found {id}", labels.len()),
            });
        }
        let label: u8 = match fields[1].as_str() {
            "0" => 0,
            "1" => 1,
            other => {
                return Err(Error::Validation {
                    file: "nodes.csv".into(),
                    row,
                    message: format!("label must be 0 or 1, found {other:?}"),
                })
            }
        };
        labels.push(label);
    }
    if labels.len() != meta.num_nodes {
        return Err(Error::Validation {
            file: "nodes.csv".into(),
            row: labels.len(),
            message: format!("meta.json declares {} nodes, nodes.csv has {}", meta.num_nodes, labels.len()),
        });
    }

    let mut edges = Vec::new();
    for (row, fields) in read_csv_rows(&edges_path)? {
        if fields.len() != 2 {
            return Err(Error::Validation {
                file: "edges.csv".into(),
                row,
                message: format!("expected `src,dst`, found {} fields", fields.len()),
            });
        }
        let a: usize = parse_field("edges.csv", row, &fields[0], "source id")?;
        let b: usize = parse_field("edges.csv", row, &fields[1], "target id")?;
        if a >= meta.num_nodes || b >= meta.num_nodes {
            return Err(Error::Validation {
                file: "edges.csv".into(),
                row,
                message: format!("edge ({a},{b}) has an endpoint outside [0, {})", meta.num_nodes),
            });
        }
        edges.push((a, b));
    }

    let mut data = Vec::with_capacity(meta.num_nodes * meta.feature_dim);
    let mut n_rows = 0;
    for (row, fields) in read_csv_rows(&features_path)? {
        if fields.len() != meta.feature_dim {
            return Err(Error::Validation {
                file: "features.csv".into(),
                row,
                message: format!("expected {} values, found {}", meta.feature_dim, fields.len()),
            });
        }
        for f in &fields {
            let x: f64 = parse_field("features.csv", row, f, "feature value")?;
            if !x.is_finite() {
                return Err(Error::Validation {
                    file: "features.csv".into(),
                    row,
                    message: format!("non-finite feature value {f:?}"),
                });
            }
            data.push(T::lit(x));
        }
        n_rows += 1;
    }
    if n_rows != meta.num_nodes {
        return Err(Error::Validation {
            file: "features.csv".into(),
            row: n_rows,
            message: format!("meta.json declares {} nodes, features.csv has {n_rows} rows", meta.num_nodes),
        });
    }
    let features = Matrix::from_vec(n_rows, meta.feature_dim, data)?;
    let graph = AttributedGraph::new(meta.name, meta.num_nodes, edges, features)?;
    Ok(Dataset { graph, labels })
}

/// Writes a dataset directory that [`load_dataset`] reads back exactly.
pub fn save_dataset<T: Scalar>(dir: &Path, dataset: &Dataset<T>) -> Result<()> {
    let graph = &dataset.graph;
    if dataset.labels.len() != graph.num_nodes() {
        return Err(Error::shape(format!(
            "{} labels for a graph of {} nodes",
            dataset.labels.len(),
            graph.num_nodes()
        )));
    }
    create_dir(dir)?;
    let meta = MetaFile {
        name: graph.graph_id().to_owned(),
        num_nodes: graph.num_nodes(),
        num_edges: graph.edges().len(),
        feature_dim: graph.feature_dim(),
    };
    write_json(&dir.join("meta.json"), &meta)?;

    let mut nodes = String::new();
    for (i, y) in dataset.labels.iter().enumerate() {
        nodes.push_str(&format!("{i},{y}\n"));
    }
    write_text(&dir.join("nodes.csv"), &nodes)?;

    let mut edges = String::new();
    for (a, b) in graph.edges() {
        edges.push_str(&format!("{a},{b}\n"));
    }
    write_text(&dir.join("edges.csv"), &edges)?;

    let mut features = String::new();
    for i in 0..graph.num_nodes() {
        let row: Vec<String> = graph.features().row(i).iter().map(|x| format!("{}", x.as_f64())).collect();
        features.push_str(&row.join(","));
        features.push('\n');
    }
    write_text(&dir.join("features.csv"), &features)
}
