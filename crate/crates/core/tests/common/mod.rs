#![allow(dead_code)]

use augan::augmentation::{NodeRef, PseudoLabelPair, SampleRef};
use augan::detector::ModelParams;
use augan::encoder::Batch;
use augan::graph::AttributedGraph;
use augan::linalg::Matrix;
use augan::rng::Rng;
use rand::Rng as _;
use rand_distr::StandardNormal;

/// Erdős–Rényi graph with standard normal features.
pub fn random_graph(id: &str, n: usize, d: usize, p: f64, rng: &mut Rng) -> AttributedGraph<f64> {
    let mut edges = Vec::new();
    for u in 0..n {
        for v in u + 1..n {
            if rng.random::<f64>() < p {
                edges.push((u, v));
            }
        }
    }
    let data = (0..n * d).map(|_| rng.sample(StandardNormal)).collect();
    AttributedGraph::new(id, n, edges, Matrix::from_vec(n, d, data).unwrap()).unwrap()
}

pub fn random_model(d: usize, h: usize, layers: usize, rng: &mut Rng) -> ModelParams<f64> {
    ModelParams::init(d, h, layers, rng).unwrap()
}

/// Balanced batch of plain nodes from graph 0 plus pseudo-label samples
/// between graphs 0 and 1.
pub fn mixed_batch(n0: usize, n1: usize, per_class: usize, rng: &mut Rng) -> Batch {
    let mut items = Vec::new();
    let mut labels = Vec::new();
    for i in 0..per_class {
        let anchor = NodeRef::new(0, rng.random_range(0..n0));
        if i % 2 == 0 && n1 > 0 {
            let partner = NodeRef::new(1, rng.random_range(0..n1));
            let lambda = rng.random_range(0.05..0.95);
            items.push(SampleRef::Pseudo(PseudoLabelPair { anchor, partner, lambda }));
        } else {
            items.push(SampleRef::Node(anchor));
        }
        labels.push(1);
    }
    for _ in 0..per_class {
        let g = if n1 > 0 { rng.random_range(0..2) } else { 0 };
        let n = if g == 0 { n0 } else { n1 };
        items.push(SampleRef::Node(NodeRef::new(g, rng.random_range(0..n))));
        labels.push(0);
    }
    Batch { items, labels }
}

/// Norm-wise relative error `‖a − b‖ / max(‖a‖, ‖b‖, floor)`.
pub fn relative_error(a: &[f64], b: &[f64], floor: f64) -> f64 {
    let diff = a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>().sqrt();
    let na = a.iter().map(|x| x * x).sum::<f64>().sqrt();
    let nb = b.iter().map(|x| x * x).sum::<f64>().sqrt();
    diff / na.max(nb).max(floor)
}

/// Central differences of `f` at `x`.
pub fn finite_difference(x: &[f64], step: f64, mut f: impl FnMut(&[f64]) -> f64) -> Vec<f64> {
    let mut probe = x.to_vec();
    (0..x.len())
        .map(|i| {
            let orig = probe[i];
            probe[i] = orig + step;
            let up = f(&probe);
            probe[i] = orig - step;
            let down = f(&probe);
            probe[i] = orig;
            (up - down) / (2.0 * step)
        })
        .collect()
}
