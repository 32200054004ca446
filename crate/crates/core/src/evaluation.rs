//! Leave-one-out generalization harness comparing AugAN, its ablations and
//! the DeepAll baseline.

use std::collections::BTreeMap;
use std::fmt;
use std::path::Path;
use std::str::FromStr;
use std::sync::Mutex;

use serde::{Deserialize, Serialize};

use crate::detector::train_deepall;
use crate::episodic::{predict_scores, train_augan, TrainConfig, TrainOutcome};
use crate::error::{Error, Result};
use crate::graph::{create_dir, read_text, split_roles, write_json, write_text, AttributedGraph, Dataset, NodeRoles};
use crate::metrics::{auc, aupr, topk_count};
use crate::rng::derive_seed;
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Method {
    #[serde(rename = "deepall")]
    DeepAll,
    #[serde(rename = "augan")]
    AugAN,
    #[serde(rename = "augan-anomaly-only")]
    AnomalyOnly,
    #[serde(rename = "augan-normal-only")]
    NormalOnly,
}

impl Method {
    pub const ALL: [Method; 4] = [Method::DeepAll, Method::AugAN, Method::AnomalyOnly, Method::NormalOnly];

    pub fn name(self) -> &'static str {
        match self {
            Method::DeepAll => "deepall",
            Method::AugAN => "augan",
            Method::AnomalyOnly => "augan-anomaly-only",
            Method::NormalOnly => "augan-normal-only",
        }
    }

    /// `config` with the augmentation switches this method implies.
    pub fn configure(self, config: &TrainConfig) -> TrainConfig {
        let (anomaly, normal) = match self {
            Method::DeepAll => (config.enable_anomaly_aug, config.enable_normal_aug),
            Method::AugAN => (true, true),
            Method::AnomalyOnly => (true, false),
            Method::NormalOnly => (false, true),
        };
        TrainConfig { enable_anomaly_aug: anomaly, enable_normal_aug: normal, ..config.clone() }
    }

    pub fn train<T: Scalar>(
        self,
        graphs: &[AttributedGraph<T>],
        roles: &[NodeRoles],
        config: &TrainConfig,
    ) -> Result<TrainOutcome<T>> {
        let config = self.configure(config);
        match self {
            Method::DeepAll => train_deepall(graphs, roles, &config),
            _ => train_augan(graphs, roles, &config),
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL.into_iter().find(|m| m.name() == s).ok_or_else(|| {
            Error::config(format!(
                "method: unknown method {s:?}, expected one of deepall, augan, augan-anomaly-only, augan-normal-only"
            ))
        })
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SplitMetrics {
    pub auc: f64,
    pub aupr: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UnseenMetrics {
    pub auc: f64,
    pub aupr: f64,
    pub topk: BTreeMap<String, usize>,
}

/// One (method, held-out graph, seed) cell; serializes as `metrics.json`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub method: Method,
    pub heldout: String,
    pub seed: u64,
    pub train_domain: SplitMetrics,
    pub unseen: UnseenMetrics,
    /// Scores of every node of the held-out graph.
    #[serde(skip)]
    pub unseen_scores: Vec<f64>,
}

/// AUC, AUPR and top-K counts of one scored graph.
pub fn graph_metrics<T: Scalar>(scores: &[T], labels: &[u8], ks: &[usize]) -> Result<UnseenMetrics> {
    let mut topk = BTreeMap::new();
    for &k in ks {
        topk.insert(k.to_string(), topk_count(scores, labels, k)?);
    }
    Ok(UnseenMetrics { auc: auc(scores, labels)?, aupr: aupr(scores, labels)?, topk })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SummaryRow {
    pub method: Method,
    /// Held-out graph id, or `all` for the pooled summary across graphs.
    pub heldout: String,
    pub split: &'static str,
    pub metric: String,
    pub mean: f64,
    pub std: f64,
    pub runs: usize,
}

#[derive(Clone, Debug)]
pub struct EvalReport {
    pub cells: Vec<CellResult>,
    pub seeds: Vec<u64>,
    pub summary: Vec<SummaryRow>,
}

impl EvalReport {
    pub fn cells_for(&self, method: Method) -> impl Iterator<Item = &CellResult> {
        self.cells.iter().filter(move |c| c.method == method)
    }

    /// Mean over all cells of `method` for the given split (`unseen` or
    /// `train_domain`) and metric.
    pub fn mean(&self, method: Method, split: &str, metric: &str) -> Option<f64> {
        self.summary
            .iter()
            .find(|r| r.method == method && r.heldout == "all" && r.split == split && r.metric == metric)
            .map(|r| r.mean)
    }

    /// `<out>/<method>/<heldout>/seed_<s>/metrics.json` per cell plus
    /// `<out>/report.csv`.
    pub fn write(&self, out: &Path) -> Result<()> {
        create_dir(out)?;
        for cell in &self.cells {
            let dir = cell_dir(out, cell.method, &cell.heldout, cell.seed);
            create_dir(&dir)?;
            write_json(&dir.join("metrics.json"), cell)?;
            save_scores(&dir.join("scores.csv"), &cell.unseen_scores)?;
        }
        write_text(&out.join("report.csv"), &self.report_csv())
    }

    pub fn report_csv(&self) -> String {
        let mut out = String::from("method,heldout,split,metric,mean,std,runs\n");
        for r in &self.summary {
            out.push_str(&format!(
                "{},{},{},{},{},{},{}\n",
                r.method, r.heldout, r.split, r.metric, r.mean, r.std, r.runs
            ));
        }
        out
    }
}

/// `node_id,score` rows for every node, in node order.
pub fn save_scores<T: Scalar>(path: &Path, scores: &[T]) -> Result<()> {
    let mut out = String::from("node_id,score\n");
    for (v, s) in scores.iter().enumerate() {
        out.push_str(&format!("{v},{}\n", s.as_f64()));
    }
    write_text(path, &out)
}

pub fn load_scores(path: &Path) -> Result<Vec<f64>> {
    let file = path.display().to_string();
    let text = read_text(path)?;
    let mut reader = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(text.as_bytes());
    let header = reader.headers().map_err(|e| Error::Validation { file: file.clone(), row: 0, message: e.to_string() })?;
    if header.iter().collect::<Vec<_>>() != ["node_id", "score"] {
        return Err(Error::Validation { file, row: 0, message: "header must be node_id,score".into() });
    }
    let mut scores = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let row = i + 1;
        let bad = |message: String| Error::Validation { file: file.clone(), row, message };
        let record = record.map_err(|e| bad(e.to_string()))?;
        let id: usize = record.get(0).unwrap_or("").parse().map_err(|_| bad("node_id is not an integer".into()))?;
        if id != scores.len() {
            return Err(bad(format!("expected node_id {}, found {id}", scores.len())));
        }
        let score: f64 = record.get(1).unwrap_or("").parse().map_err(|_| bad("score is not a number".into()))?;
        scores.push(score);
    }
    Ok(scores)
}

pub fn cell_dir(out: &Path, method: Method, heldout: &str, seed: u64) -> std::path::PathBuf {
    out.join(method.name()).join(heldout).join(format!("seed_{seed}"))
}

/// Settings of the leave-one-out harness.
#[derive(Clone, Debug)]
pub struct EvalConfig {
    pub train: TrainConfig,
    pub num_labeled_anomalies: usize,
    pub topk: Vec<usize>,
    pub jobs: usize,
}

/// Role split of training graph `g` under `seed`; shared by every method.
pub fn cell_roles<T: Scalar>(dataset: &Dataset<T>, g: usize, num_labeled: usize, seed: u64) -> Result<NodeRoles> {
    split_roles(&dataset.labels, num_labeled, derive_seed(seed, g as u64))
}

fn run_cell<T: Scalar>(
    datasets: &[Dataset<T>],
    heldout: usize,
    seed: u64,
    methods: &[Method],
    config: &EvalConfig,
) -> Result<Vec<CellResult>> {
    let train_idx: Vec<usize> = (0..datasets.len()).filter(|&g| g != heldout).collect();
    let graphs: Vec<AttributedGraph<T>> = train_idx.iter().map(|&g| datasets[g].graph.clone()).collect();
    let roles = train_idx
        .iter()
        .map(|&g| cell_roles(&datasets[g], g, config.num_labeled_anomalies, seed))
        .collect::<Result<Vec<_>>>()?;
    let target = &datasets[heldout];
    let train_config = TrainConfig { seed, ..config.train.clone() };

    let mut results = Vec::with_capacity(methods.len());
    for &method in methods {
        let outcome = method.train(&graphs, &roles, &train_config)?;
        let mut pooled_scores = Vec::new();
        let mut pooled_labels = Vec::new();
        for (graph, r) in graphs.iter().zip(&roles) {
            let scores = predict_scores(&outcome.params, graph)?;
            for &v in &r.test_nodes {
                pooled_scores.push(scores[v]);
                pooled_labels.push(r.ground_truth[v]);
            }
        }
        let unseen_scores = predict_scores(&outcome.params, &target.graph)?;
        results.push(CellResult {
            method,
            heldout: target.graph.graph_id().to_owned(),
            seed,
            train_domain: SplitMetrics { auc: auc(&pooled_scores, &pooled_labels)?, aupr: aupr(&pooled_scores, &pooled_labels)? },
            unseen: graph_metrics(&unseen_scores, &target.labels, &config.topk)?,
            unseen_scores: unseen_scores.iter().map(|s| s.as_f64()).collect(),
        });
    }
    Ok(results)
}

fn mean_std(values: &[f64]) -> (f64, f64) {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let std = if values.len() > 1 {
        (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

fn summarize(cells: &[CellResult], methods: &[Method], heldouts: &[String], ks: &[usize]) -> Vec<SummaryRow> {
    type Getter = Box<dyn Fn(&CellResult) -> f64>;
    let mut metrics: Vec<(&'static str, String, Getter)> = vec![
        ("train_domain", "auc".into(), Box::new(|c| c.train_domain.auc)),
        ("train_domain", "aupr".into(), Box::new(|c| c.train_domain.aupr)),
        ("unseen", "auc".into(), Box::new(|c| c.unseen.auc)),
        ("unseen", "aupr".into(), Box::new(|c| c.unseen.aupr)),
    ];
    for &k in ks {
        let key = k.to_string();
        metrics.push(("unseen", format!("top{k}"), Box::new(move |c| c.unseen.topk[&key] as f64)));
    }
    let mut rows = Vec::new();
    for &method in methods {
        let groups = heldouts.iter().map(|h| Some(h.as_str())).chain(std::iter::once(None));
        for group in groups {
            let selected: Vec<&CellResult> =
                cells.iter().filter(|c| c.method == method && group.is_none_or(|h| c.heldout == h)).collect();
            if selected.is_empty() {
                continue;
            }
            for (split, metric, get) in &metrics {
                let values: Vec<f64> = selected.iter().map(|c| get(c)).collect();
                let (mean, std) = mean_std(&values);
                rows.push(SummaryRow {
                    method,
                    heldout: group.unwrap_or("all").to_owned(),
                    split,
                    metric: metric.clone(),
                    mean,
                    std,
                    runs: values.len(),
                });
            }
        }
    }
    rows
}

/// Holds out each graph in turn, trains every method on the others for every
/// seed, and scores both the pooled training-domain test splits and the whole
/// held-out graph. Cells run on up to `config.jobs` threads; results are
/// ordered by (held-out graph, seed, method) regardless of scheduling.
pub fn leave_one_out<T: Scalar>(
    datasets: &[Dataset<T>],
    methods: &[Method],
    config: &EvalConfig,
    seeds: &[u64],
) -> Result<EvalReport> {
    if datasets.len() < 3 {
        return Err(Error::config(format!(
            "leave-one-out needs at least 3 graphs so that 2 remain for training, got {}",
            datasets.len()
        )));
    }
    if methods.is_empty() || seeds.is_empty() {
        return Err(Error::config("leave-one-out needs at least one method and one seed"));
    }
    config.train.validate()?;

    let jobs: Vec<(usize, u64)> = (0..datasets.len()).flat_map(|h| seeds.iter().map(move |&s| (h, s))).collect();
    let slots: Vec<Mutex<Option<Result<Vec<CellResult>>>>> = jobs.iter().map(|_| Mutex::new(None)).collect();
    let next = Mutex::new(0usize);
    let workers = config.jobs.clamp(1, jobs.len());
    std::thread::scope(|scope| {
        for _ in 0..workers {
            scope.spawn(|| loop {
                let i = {
                    let mut n = next.lock().expect("queue lock");
                    let i = *n;
                    *n += 1;
                    i
                };
                let Some(&(h, s)) = jobs.get(i) else { break };
                let result = run_cell(datasets, h, s, methods, config);
                *slots[i].lock().expect("slot lock") = Some(result);
            });
        }
    });

    let mut cells = Vec::with_capacity(jobs.len() * methods.len());
    for slot in slots {
        cells.extend(slot.into_inner().expect("slot lock").expect("every job ran")?);
    }
    let heldouts: Vec<String> = datasets.iter().map(|d| d.graph.graph_id().to_owned()).collect();
    let summary = summarize(&cells, methods, &heldouts, &config.topk);
    Ok(EvalReport { cells, seeds: seeds.to_vec(), summary })
}
