use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use augan::augmentation::save_pseudo_labels;
use augan::config::RunConfig;
use augan::episodic::predict_scores;
use augan::error::{Error, Result};
use augan::evaluation::{graph_metrics, leave_one_out, load_scores, save_scores, EvalConfig, Method};
use augan::graph::{load_dataset, load_splits, save_dataset, save_splits, split_roles, NodeRoles};
use augan::model::{config_fingerprint, load_model, save_model};
use augan::partition::partition;
use augan::rng::derive_seed;
use augan::synth::{family_stats, format_stats_table, generate_family};
use augan::Dataset;

#[derive(Parser)]
#[command(name = "augan", version, about = "Graph anomaly detection that generalizes to unseen graphs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone, Default)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Master seed; overrides every seed in the config file.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic family of graphs.
    Synth {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        out: PathBuf,
    },
    /// Split one dataset into distribution-shifted subgraphs.
    Partition {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train a detector on one or more datasets.
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        method: String,
        #[arg(long, required = true)]
        data: Vec<PathBuf>,
        #[arg(long)]
        out: PathBuf,
    },
    /// Score every node of a dataset with a trained model.
    Score {
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Output scores.csv path.
        #[arg(long)]
        out: PathBuf,
    },
    /// Compute AUC, AUPR and top-K counts of a scores file.
    Eval {
        #[arg(long)]
        scores: PathBuf,
        #[arg(long)]
        data: PathBuf,
        #[arg(long, value_delimiter = ',')]
        topk: Vec<usize>,
        /// Optional metrics.json path; the metrics are always printed.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Leave-one-out evaluation over several datasets.
    Loocv {
        #[command(flatten)]
        common: Common,
        #[arg(long, required = true)]
        data: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',', default_values_t = vec!["deepall".to_string(), "augan".to_string()])]
        method: Vec<String>,
        #[arg(long, value_delimiter = ',')]
        seeds: Vec<u64>,
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, value_delimiter = ',')]
        topk: Vec<usize>,
        #[arg(long)]
        out: PathBuf,
    },
}

/// File (or default) config with CLI overrides applied, then validated.
fn run_config(common: &Common, tweak: impl FnOnce(&mut RunConfig)) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::load(path)?,
        None => RunConfig::default(),
    };
    if common.seed.is_some() {
        cfg.seed = common.seed;
    }
    cfg.resolve_seed();
    tweak(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

fn load_all(dirs: &[PathBuf]) -> Result<Vec<Dataset>> {
    dirs.iter().map(|d| load_dataset(d)).collect()
}

fn cmd_synth(common: &Common, out: &Path) -> Result<()> {
    let cfg = run_config(common, |_| {})?;
    let family = generate_family::<f64>(&cfg.synth)?;
    std::fs::create_dir_all(out).map_err(|source| Error::Write { path: out.to_path_buf(), source })?;
    for ds in &family.datasets {
        save_dataset(&out.join(ds.graph.graph_id()), ds)?;
    }
    let text = serde_json::to_string_pretty(&cfg.synth).expect("config serializes") + "\n";
    let path = out.join("family.json");
    std::fs::write(&path, text).map_err(|source| Error::Write { path: path.to_path_buf(), source })?;
    print!("{}", format_stats_table(&family_stats(&family.datasets, None)));
    Ok(())
}

fn cmd_partition(common: &Common, data: &Path, out: &Path) -> Result<()> {
    let cfg = run_config(common, |_| {})?;
    let ds: Dataset = load_dataset(data)?;
    let result = partition(&ds.graph, &ds.labels, &cfg.partition)?;
    for (i, sub) in result.subgraphs.iter().enumerate() {
        save_dataset(&out.join(format!("sub_{i}")), &sub.dataset)?;
    }
    result.report.save(&out.join("partition_report.json"))?;
    println!(
        "{} subgraphs, sizes {:?}, retries used {}",
        result.subgraphs.len(),
        result.report.sizes,
        result.report.retries_used
    );
    Ok(())
}

/// Roles from `splits.json` when the dataset ships one, otherwise a fresh split.
fn dataset_roles(dir: &Path, ds: &Dataset, g: usize, cfg: &RunConfig) -> Result<NodeRoles> {
    let path = dir.join("splits.json");
    if path.exists() {
        load_splits(&path, &ds.labels)
    } else {
        split_roles(&ds.labels, cfg.num_labeled_anomalies, derive_seed(cfg.train.seed, g as u64))
    }
}

fn cmd_train(common: &Common, method: &str, data: &[PathBuf], out: &Path) -> Result<()> {
    let method: Method = method.parse()?;
    let cfg = run_config(common, |_| {})?;
    let datasets = load_all(data)?;
    let roles = datasets
        .iter()
        .enumerate()
        .map(|(g, ds)| dataset_roles(&data[g], ds, g, &cfg))
        .collect::<Result<Vec<_>>>()?;
    let graphs: Vec<_> = datasets.iter().map(|d| d.graph.clone()).collect();
    let train_cfg = method.configure(&cfg.train);
    let outcome = method.train(&graphs, &roles, &train_cfg)?;

    std::fs::create_dir_all(out).map_err(|source| Error::Write { path: out.to_path_buf(), source })?;
    save_model(&out.join("model.json"), &outcome.params, &config_fingerprint(&train_cfg))?;
    let mut log = String::new();
    for rec in &outcome.log {
        log.push_str(&serde_json::to_string(rec).expect("record serializes"));
        log.push('\n');
    }
    let log_path = out.join("train_log.jsonl");
    std::fs::write(&log_path, log).map_err(|source| Error::Write { path: log_path.to_path_buf(), source })?;
    for (g, r) in roles.iter().enumerate() {
        save_splits(&out.join(format!("splits_{g}.json")), r)?;
    }
    if method != Method::DeepAll {
        save_pseudo_labels(&out.join("pseudo_labels.json"), &outcome.pseudo_labels)?;
    }
    match outcome.best_val_auc {
        Some(a) => println!("{method}: best validation AUC {a:.4} after {} epochs", outcome.best_epoch),
        None => println!("{method}: trained {} epochs (no validation split)", outcome.log.len()),
    }
    Ok(())
}

fn cmd_score(model: &Path, data: &Path, out: &Path) -> Result<()> {
    let (params, _) = load_model::<f64>(model)?;
    let ds: Dataset = load_dataset(data)?;
    let scores = predict_scores(&params, &ds.graph)?;
    save_scores(out, &scores)
}

fn cmd_eval(scores: &Path, data: &Path, topk: &[usize], out: Option<&Path>) -> Result<()> {
    let ds: Dataset = load_dataset(data)?;
    let scores = load_scores(scores)?;
    if scores.len() != ds.labels.len() {
        return Err(Error::shape(format!("{} scores for {} nodes", scores.len(), ds.labels.len())));
    }
    let metrics = graph_metrics(&scores, &ds.labels, topk)?;
    let text = serde_json::to_string_pretty(&metrics).expect("metrics serialize") + "\n";
    if let Some(path) = out {
        std::fs::write(path, &text).map_err(|source| Error::Write { path: path.to_path_buf(), source })?;
    }
    print!("{text}");
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn cmd_loocv(
    common: &Common,
    data: &[PathBuf],
    methods: &[String],
    seeds: &[u64],
    jobs: Option<usize>,
    topk: &[usize],
    out: &Path,
) -> Result<()> {
    let methods = methods.iter().map(|m| m.parse()).collect::<Result<Vec<Method>>>()?;
    let cfg = run_config(common, |c| {
        if !seeds.is_empty() {
            c.seeds = seeds.to_vec();
        }
        if let Some(j) = jobs {
            c.jobs = j;
        }
        if !topk.is_empty() {
            c.topk = topk.to_vec();
        }
    })?;
    let datasets = load_all(data)?;
    let eval = EvalConfig {
        train: cfg.train.clone(),
        num_labeled_anomalies: cfg.num_labeled_anomalies,
        topk: cfg.topk.clone(),
        jobs: cfg.jobs,
    };
    let report = leave_one_out(&datasets, &methods, &eval, &cfg.seeds)?;
    report.write(out)?;
    for row in report.summary.iter().filter(|r| r.heldout == "all") {
        println!("{:<20} {:<12} {:<6} {:.4} ± {:.4}", row.method, row.split, row.metric, row.mean, row.std);
    }
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Synth { common, out } => cmd_synth(&common, &out),
        Command::Partition { common, data, out } => cmd_partition(&common, &data, &out),
        Command::Train { common, method, data, out } => cmd_train(&common, &method, &data, &out),
        Command::Score { model, data, out } => cmd_score(&model, &data, &out),
        Command::Eval { scores, data, topk, out } => cmd_eval(&scores, &data, &topk, out.as_deref()),
        Command::Loocv { common, data, method, seeds, jobs, topk, out } => {
            cmd_loocv(&common, &data, &method, &seeds, jobs, &topk, &out)
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
