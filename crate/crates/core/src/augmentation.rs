//! Cross-graph anomaly augmentation (latent-space pseudo-labels) and
//! normal-distribution augmentation (masked scenes).

use std::path::Path;

use rand::seq::index;
use rand::Rng as _;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{write_json, NodeRoles};
use crate::linalg::Matrix;
use crate::rng::{stream_rng, Rng};
use crate::scalar::Scalar;

/// A node of one of the training graphs.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub struct NodeRef {
    pub graph: usize,
    pub node: usize,
}

impl NodeRef {
    pub fn new(graph: usize, node: usize) -> Self {
        Self { graph, node }
    }
}

/// Recipe for one interpolated anomaly embedding: `(1-λ)·h_anchor + λ·h_partner`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PseudoLabelPair {
    pub anchor: NodeRef,
    pub partner: NodeRef,
    pub lambda: f64,
}

/// Something that can be placed in a training batch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SampleRef {
    Node(NodeRef),
    Pseudo(PseudoLabelPair),
}

/// One simulated background: every merged anomaly plus the normals that
/// survived masking.
#[derive(Clone, Debug, PartialEq)]
pub struct Scene {
    pub anomaly_refs: Vec<SampleRef>,
    pub normal_refs: Vec<NodeRef>,
    pub mask_seed: u64,
}

pub fn squared_distance<T: Scalar>(a: &[T], b: &[T]) -> Result<T> {
    if a.len() != b.len() {
        return Err(Error::shape(format!("cannot compare embeddings of width {} and {}", a.len(), b.len())));
    }
    Ok(a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum())
}

/// `σ · min_{c ≠ anchor} ‖h_anchor − h_c‖²` over the anchor's own graph.
///
/// The anchor itself is excluded from the minimum; including it would pin the
/// threshold at zero.
pub fn threshold_eta<T: Scalar>(anchor: usize, own_embeddings: &Matrix<T>, sigma: T) -> Result<T> {
    if own_embeddings.rows() < 2 {
        return Err(Error::Degenerate(format!(
            "threshold needs at least two nodes in the anchor's graph, found {}",
            own_embeddings.rows()
        )));
    }
    if anchor >= own_embeddings.rows() {
        return Err(Error::Range(format!("anchor {anchor} outside graph of {} nodes", own_embeddings.rows())));
    }
    let h_a = own_embeddings.row(anchor);
    let mut min = T::infinity();
    for c in (0..own_embeddings.rows()).filter(|&c| c != anchor) {
        let d = squared_distance(h_a, own_embeddings.row(c))?;
        if d < min {
            min = d;
        }
    }
    Ok(sigma * min)
}

/// External-graph nodes strictly closer than `eta` to the anchor embedding.
///
/// `embeddings[g]` holds graph `g`'s node embeddings; the anchor's own graph
/// is skipped.
pub fn high_confidence_set<T: Scalar>(anchor: NodeRef, embeddings: &[Matrix<T>], eta: T) -> Result<Vec<NodeRef>> {
    let own = embeddings
        .get(anchor.graph)
        .ok_or_else(|| Error::Range(format!("anchor graph {} not among {} graphs", anchor.graph, embeddings.len())))?;
    if anchor.node >= own.rows() {
        return Err(Error::Range(format!("anchor node {} outside graph of {} nodes", anchor.node, own.rows())));
    }
    let h_a = own.row(anchor.node);
    let mut out = Vec::new();
    for (g, emb) in embeddings.iter().enumerate().filter(|&(g, _)| g != anchor.graph) {
        for v in 0..emb.rows() {
            if squared_distance(h_a, emb.row(v))? < eta {
                out.push(NodeRef::new(g, v));
            }
        }
    }
    Ok(out)
}

pub fn interpolate<T: Scalar>(a: &[T], b: &[T], lambda: T) -> Result<Vec<T>> {
    if a.len() != b.len() {
        return Err(Error::shape(format!("cannot interpolate widths {} and {}", a.len(), b.len())));
    }
    let keep = T::one() - lambda;
    Ok(a.iter().zip(b).map(|(&x, &y)| keep * x + lambda * y).collect())
}

/// A generated pair with the quantities that justified it.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SelectedPair {
    pub pair: PseudoLabelPair,
    pub eta: f64,
    pub distance: f64,
}

fn open_unit(rng: &mut Rng) -> f64 {
    loop {
        let u: f64 = rng.random();
        if u > 0.0 {
            return u;
        }
    }
}

/// For every train-split labeled anomaly, finds its cross-graph high-confidence
/// set and emits `alpha` pairs with uniformly drawn partners and `λ ∈ (0,1)`.
pub fn generate_pseudo_labels<T: Scalar>(
    roles: &[NodeRoles],
    embeddings: &[Matrix<T>],
    sigma: T,
    alpha: usize,
    rng: &mut Rng,
) -> Result<Vec<SelectedPair>> {
    if embeddings.len() < 2 {
        return Err(Error::config(format!(
            "anomaly augmentation requires at least 2 training graphs, got {}",
            embeddings.len()
        )));
    }
    if roles.len() != embeddings.len() {
        return Err(Error::shape(format!("{} role sets for {} graphs", roles.len(), embeddings.len())));
    }
    let mut out = Vec::new();
    for (g, r) in roles.iter().enumerate() {
        for &a in &r.anomaly_train {
            let anchor = NodeRef::new(g, a);
            let eta = threshold_eta(a, &embeddings[g], sigma)?;
            let candidates = high_confidence_set(anchor, embeddings, eta)?;
            if candidates.is_empty() {
                continue;
            }
            for _ in 0..alpha {
                let partner = candidates[rng.random_range(0..candidates.len())];
                let lambda = open_unit(rng);
                let distance =
                    squared_distance(embeddings[g].row(a), embeddings[partner.graph].row(partner.node))?;
                out.push(SelectedPair {
                    pair: PseudoLabelPair { anchor, partner, lambda },
                    eta: eta.as_f64(),
                    distance: distance.as_f64(),
                });
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct PseudoLabelRecord {
    anchor: [usize; 2],
    partner: [usize; 2],
    lambda: f64,
    eta: f64,
    distance: f64,
}

/// Writes the audit list of generated pairs.
pub fn save_pseudo_labels(path: &Path, pairs: &[SelectedPair]) -> Result<()> {
    let records: Vec<PseudoLabelRecord> = pairs
        .iter()
        .map(|s| PseudoLabelRecord {
            anchor: [s.pair.anchor.graph, s.pair.anchor.node],
            partner: [s.pair.partner.graph, s.pair.partner.node],
            lambda: s.pair.lambda,
            eta: s.eta,
            distance: s.distance,
        })
        .collect();
    write_json(path, &records)
}

/// Merged anomaly refs (train anomalies of every graph, then pseudo-labels)
/// and merged normal refs (train normals of every graph).
pub fn merge_training_data(roles: &[NodeRoles], pseudo: &[PseudoLabelPair]) -> (Vec<SampleRef>, Vec<NodeRef>) {
    let mut anomalies = Vec::new();
    let mut normals = Vec::new();
    for (g, r) in roles.iter().enumerate() {
        anomalies.extend(r.anomaly_train.iter().map(|&v| SampleRef::Node(NodeRef::new(g, v))));
        normals.extend(r.normal_train.iter().map(|&v| NodeRef::new(g, v)));
    }
    anomalies.extend(pseudo.iter().copied().map(SampleRef::Pseudo));
    (anomalies, normals)
}

/// Number of normals removed from a pool of `pool` at mask ratio `rho`.
pub fn mask_count(pool: usize, rho: f64) -> usize {
    (rho * pool as f64).round() as usize
}

/// Masks exactly `round(ρ·|N_merge|)` normals chosen uniformly without
/// replacement; anomalies pass through untouched.
pub fn make_scene(s_merge: &[SampleRef], n_merge: &[NodeRef], rho: f64, mask_seed: u64) -> Result<Scene> {
    if !(0.0..1.0).contains(&rho) {
        return Err(Error::config(format!("rho must lie in [0, 1), got {rho}")));
    }
    let masked = mask_count(n_merge.len(), rho);
    if masked >= n_merge.len() {
        return Err(Error::config(format!(
            "masking {masked} of {} normals would leave the scene without normals",
            n_merge.len()
        )));
    }
    let mut rng = stream_rng(mask_seed, 0);
    let mut drop = vec![false; n_merge.len()];
    for i in index::sample(&mut rng, n_merge.len(), masked) {
        drop[i] = true;
    }
    let normal_refs = n_merge.iter().zip(&drop).filter(|(_, &d)| !d).map(|(&r, _)| r).collect();
    Ok(Scene { anomaly_refs: s_merge.to_vec(), normal_refs, mask_seed })
}
