mod common;

use augan::episodic::{train_augan, TrainConfig};
use augan::evaluation::{leave_one_out, EvalConfig, Method};
use augan::graph::{load_dataset, load_splits, save_dataset, save_splits, split_roles, Dataset};
use augan::partition::{partition, PartitionConfig};
use augan::rng::stream_rng;
use augan::synth::{generate_family, SynthConfig};
use augan::Error;

fn small_family(graphs: usize, seed: u64) -> Vec<Dataset<f64>> {
    let cfg = SynthConfig { num_graphs: graphs, num_nodes: 120, feature_dim: 6, anomaly_ratio: 0.1, seed, ..SynthConfig::default() };
    generate_family(&cfg).unwrap().datasets
}

fn quick_train() -> TrainConfig {
    TrainConfig { epochs: 20, warmup_epochs: 10, num_tasks: 3, batch_size: 8, hidden_dim: 8, ref_samples: 500, val_every: 5, ..TrainConfig::default() }
}

#[test]
fn dataset_round_trip_is_exact() {
    let ds = small_family(1, 3).remove(0);
    let dir = tempfile::tempdir().unwrap();
    save_dataset(dir.path(), &ds).unwrap();
    let back: Dataset<f64> = load_dataset(dir.path()).unwrap();
    assert_eq!(back.labels, ds.labels);
    assert_eq!(back.graph.edges(), ds.graph.edges());
    assert_eq!(back.graph.features().as_slice(), ds.graph.features().as_slice());

    let roles = split_roles(&ds.labels, 5, 9).unwrap();
    let path = dir.path().join("splits.json");
    save_splits(&path, &roles).unwrap();
    assert_eq!(load_splits(&path, &ds.labels).unwrap(), roles);
}

#[test]
fn loader_reports_file_and_row() {
    let ds = small_family(1, 4).remove(0);
    let dir = tempfile::tempdir().unwrap();
    save_dataset(dir.path(), &ds).unwrap();

    let nodes = std::fs::read_to_string(dir.path().join("nodes.csv")).unwrap();
    let broken: String = nodes.lines().enumerate().map(|(i, l)| if i == 4 { "4,7\n".to_owned() } else { format!("{l}\n") }).collect();
    std::fs::write(dir.path().join("nodes.csv"), broken).unwrap();
    match load_dataset::<f64>(dir.path()) {
        Err(Error::Validation { file, row, .. }) => {
            assert!(file.contains("nodes"));
            assert_eq!(row, 5);
        }
        other => panic!("expected a validation error, got {other:?}"),
    }

    std::fs::remove_file(dir.path().join("edges.csv")).unwrap();
    let err = load_dataset::<f64>(dir.path()).unwrap_err();
    assert!(err.to_string().contains("edges.csv"), "{err}");
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn augan_needs_two_graphs_for_anomaly_augmentation() {
    let fam = small_family(1, 5);
    let roles = vec![split_roles(&fam[0].labels, 6, 0).unwrap()];
    let graphs = vec![fam[0].graph.clone()];
    let err = train_augan(&graphs, &roles, &quick_train()).unwrap_err();
    assert!(err.to_string().contains("requires ≥ 2 training graphs"), "{err}");
    assert_eq!(err.exit_code(), 2);

    let normal_only = Method::NormalOnly.train(&graphs, &roles, &quick_train()).unwrap();
    assert_eq!(normal_only.log.len(), 20);
    let deepall = Method::DeepAll.train(&graphs, &roles, &quick_train()).unwrap();
    assert!(deepall.params.all_finite());
}

#[test]
fn anomaly_only_logs_pseudo_labels_and_one_scene() {
    let fam = small_family(3, 6);
    let graphs: Vec<_> = fam.iter().map(|d| d.graph.clone()).collect();
    let roles: Vec<_> = fam.iter().enumerate().map(|(g, d)| split_roles(&d.labels, 9, g as u64).unwrap()).collect();
    let cfg = TrainConfig { sigma: 0.9, ..quick_train() };
    let out = Method::AnomalyOnly.train(&graphs, &roles, &cfg).unwrap();
    assert!(!out.pseudo_labels.is_empty());
    for rec in &out.log {
        assert!(rec.num_pseudo_labels.unwrap() > 0);
        assert_eq!(rec.num_scenes, Some(1));
    }
    let full = Method::AugAN.train(&graphs, &roles, &cfg).unwrap();
    assert_eq!(full.log[0].num_scenes, Some(cfg.num_tasks + 1));
}

#[test]
fn deepall_checkpoint_never_worse_than_init() {
    let fam = small_family(2, 7);
    let graphs: Vec<_> = fam.iter().map(|d| d.graph.clone()).collect();
    let roles: Vec<_> = fam.iter().enumerate().map(|(g, d)| split_roles(&d.labels, 9, g as u64).unwrap()).collect();
    let zero_epochs = Method::DeepAll.train(&graphs, &roles, &TrainConfig { epochs: 0, ..quick_train() }).unwrap();
    let trained = Method::DeepAll.train(&graphs, &roles, &quick_train()).unwrap();
    assert!(trained.best_val_auc.unwrap() >= zero_epochs.best_val_auc.unwrap());
}

#[test]
fn training_is_deterministic_under_seed() {
    let fam = small_family(3, 8);
    let graphs: Vec<_> = fam.iter().map(|d| d.graph.clone()).collect();
    let roles: Vec<_> = fam.iter().enumerate().map(|(g, d)| split_roles(&d.labels, 9, g as u64).unwrap()).collect();
    let a = Method::AugAN.train(&graphs, &roles, &quick_train()).unwrap();
    let b = Method::AugAN.train(&graphs, &roles, &quick_train()).unwrap();
    assert_eq!(a.params.to_flat(), b.params.to_flat());
    assert_eq!(a.log, b.log);
}

#[test]
fn leave_one_out_cardinality_and_thread_independence() {
    let fam = small_family(4, 9);
    let mut cfg = EvalConfig { train: quick_train(), num_labeled_anomalies: 6, topk: vec![5, 10], jobs: 1 };
    let seeds = [0, 1];
    let serial = leave_one_out(&fam, &[Method::DeepAll, Method::AugAN], &cfg, &seeds).unwrap();
    assert_eq!(serial.cells.len(), 16);
    cfg.jobs = 3;
    let parallel = leave_one_out(&fam, &[Method::DeepAll, Method::AugAN], &cfg, &seeds).unwrap();
    assert_eq!(serial.cells, parallel.cells);
    assert_eq!(serial.report_csv(), parallel.report_csv());
    for c in &serial.cells {
        assert!((0.0..=1.0).contains(&c.unseen.auc) && (0.0..=1.0).contains(&c.train_domain.aupr));
        assert!(c.unseen.topk["5"] <= 5);
    }

    let dir = tempfile::tempdir().unwrap();
    serial.write(dir.path()).unwrap();
    let count = walk(dir.path()).into_iter().filter(|p| p.ends_with("metrics.json")).count();
    assert_eq!(count, 16);

    assert!(leave_one_out(&fam[..2], &[Method::DeepAll], &cfg, &seeds).is_err());
}

fn walk(dir: &std::path::Path) -> Vec<std::path::PathBuf> {
    let mut out = Vec::new();
    for entry in std::fs::read_dir(dir).unwrap() {
        let p = entry.unwrap().path();
        if p.is_dir() {
            out.extend(walk(&p));
        } else {
            out.push(p);
        }
    }
    out
}

fn two_cliques() -> (augan::Graph, Vec<u8>) {
    // Two 12-cliques joined by a 6-node path; one anomaly in each clique.
    let mut edges = Vec::new();
    for base in [0, 18] {
        for u in base..base + 12 {
            for v in u + 1..base + 12 {
                edges.push((u, v));
            }
        }
    }
    for u in 11..18 {
        edges.push((u, u + 1));
    }
    let n = 30;
    let mut labels = vec![0u8; n];
    labels[3] = 1;
    labels[25] = 1;
    let g = augan::Graph::new("cliques", n, edges, augan::Dense::zeros(n, 2)).unwrap();
    (g, labels)
}

#[test]
fn partition_splits_two_cliques() {
    let (g, labels) = two_cliques();
    let cfg = PartitionConfig { m: 2, k: 2, ..PartitionConfig::default() };
    let p = partition(&g, &labels, &cfg).unwrap();
    assert_eq!(p.subgraphs.len(), 2);
    assert_eq!(p.report.anomaly_overlap, 0);
    for sub in &p.subgraphs {
        // Remap is a bijection onto sorted original ids, and edges are induced.
        assert!(sub.remap.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(sub.dataset.graph.num_nodes(), sub.remap.len());
        let expected: Vec<(usize, usize)> = g
            .edges()
            .iter()
            .filter_map(|&(u, v)| {
                let a = sub.remap.binary_search(&u).ok()?;
                let b = sub.remap.binary_search(&v).ok()?;
                Some((a, b))
            })
            .collect();
        assert_eq!(sub.dataset.graph.edges(), expected.as_slice());
        assert_eq!(sub.dataset.num_anomalies(), 1);
    }
    let again = partition(&g, &labels, &cfg).unwrap();
    assert_eq!(again.report, p.report);
}

#[test]
fn impossible_partition_is_exit_three() {
    let (g, labels) = two_cliques();
    let err = partition(&g, &labels, &PartitionConfig { m: 40, max_retries: 3, ..PartitionConfig::default() }).unwrap_err();
    assert_eq!(err.exit_code(), 3);
    let mut rng = stream_rng(1, 0);
    let scattered = common::random_graph("er", 60, 2, 0.5, &mut rng);
    let all_anomalous = vec![1u8; 60];
    let err = partition(&scattered, &all_anomalous, &PartitionConfig { m: 2, k: 2, max_retries: 4, ..PartitionConfig::default() }).unwrap_err();
    assert!(matches!(err, Error::Partition(_)));
}
