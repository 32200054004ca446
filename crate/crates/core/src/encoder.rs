//! Shared graph-convolution encoder and the gradient engine used by training.
//!
//! Layer `k` computes `H⁽ᵏ⁾ = σ(Â H⁽ᵏ⁻¹⁾ W⁽ᵏ⁾)` with ReLU on hidden layers and
//! a linear output layer. The product `ÂX` is fixed per graph, so it is
//! computed once in [`PreparedGraph`]. Gradient evaluation only materializes
//! the rows inside the receptive field of the batch; every row it does compute
//! is bit-identical to the full-graph pass.

use std::cell::OnceCell;

use rand::distr::{Distribution, Uniform};

use crate::augmentation::{NodeRef, SampleRef};
use crate::detector::{Loss, ModelParams};
use crate::error::{Error, Result};
use crate::graph::{normalize_adjacency, AttributedGraph, NormalizedAdjacency};
use crate::linalg::{dot, Matrix};
use crate::rng::Rng;
use crate::scalar::{Dual, Scalar};

#[derive(Clone, Debug, PartialEq)]
pub struct EncoderParams<T> {
    layers: Vec<Matrix<T>>,
}

impl<T: Scalar> EncoderParams<T> {
    pub fn new(layers: Vec<Matrix<T>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::shape("encoder needs at least one layer"));
        }
        for (k, pair) in layers.windows(2).enumerate() {
            if pair[0].cols() != pair[1].rows() {
                return Err(Error::shape(format!(
                    "layer {} emits {} dims but layer {} expects {}",
                    k + 1,
                    pair[0].cols(),
                    k + 2,
                    pair[1].rows()
                )));
            }
        }
        Ok(Self { layers })
    }

    /// Glorot-uniform layers for the dimension chain `dims[0] → dims[1] → ...`.
    pub fn glorot(dims: &[usize], rng: &mut Rng) -> Result<Self> {
        let layers = dims
            .windows(2)
            .map(|w| {
                let limit = (6.0 / (w[0] + w[1]) as f64).sqrt();
                let dist = Uniform::new_inclusive(-limit, limit).expect("finite Glorot bound");
                let data = (0..w[0] * w[1]).map(|_| T::lit(dist.sample(rng))).collect();
                Matrix::from_vec(w[0], w[1], data)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(layers)
    }

    pub fn zeros_like(other: &Self) -> Self {
        Self { layers: other.layers.iter().map(|w| Matrix::zeros(w.rows(), w.cols())).collect() }
    }

    pub fn layers(&self) -> &[Matrix<T>] {
        &self.layers
    }

    pub fn num_layers(&self) -> usize {
        self.layers.len()
    }

    pub fn input_dim(&self) -> usize {
        self.layers[0].rows()
    }

    pub fn output_dim(&self) -> usize {
        self.layers[self.layers.len() - 1].cols()
    }

    /// `[d, h_1, ..., h_K]`
    pub fn dims(&self) -> Vec<usize> {
        let mut dims = vec![self.input_dim()];
        dims.extend(self.layers.iter().map(Matrix::cols));
        dims
    }
}

/// A graph ready for encoding: normalized adjacency plus the cached `ÂX`.
#[derive(Clone, Debug)]
pub struct PreparedGraph<T> {
    adj: NormalizedAdjacency<T>,
    ax: Matrix<T>,
}

impl<T: Scalar> PreparedGraph<T> {
    pub fn new(graph: &AttributedGraph<T>) -> Self {
        let adj = normalize_adjacency(graph);
        let ax = adj.matrix().matmul_dense(graph.features()).expect("adjacency matches node count");
        Self { adj, ax }
    }

    pub fn num_nodes(&self) -> usize {
        self.adj.num_nodes()
    }

    pub fn feature_dim(&self) -> usize {
        self.ax.cols()
    }

    pub fn adjacency(&self) -> &NormalizedAdjacency<T> {
        &self.adj
    }

    pub fn cast<U: Scalar>(&self) -> PreparedGraph<U> {
        PreparedGraph { adj: self.adj.cast(), ax: self.ax.map(|x| U::lit(x.as_f64())) }
    }
}

/// Full-graph embeddings `H⁽ᴷ⁾`.
pub fn encode<T: Scalar>(
    graph: &AttributedGraph<T>,
    adj: &NormalizedAdjacency<T>,
    params: &EncoderParams<T>,
) -> Result<Matrix<T>> {
    if adj.num_nodes() != graph.num_nodes() {
        return Err(Error::shape(format!(
            "adjacency has {} nodes, graph has {}",
            adj.num_nodes(),
            graph.num_nodes()
        )));
    }
    let ax = adj.matrix().matmul_dense(graph.features())?;
    encode_prepared(&PreparedGraph { adj: adj.clone(), ax }, params)
}

pub fn encode_prepared<T: Scalar>(graph: &PreparedGraph<T>, params: &EncoderParams<T>) -> Result<Matrix<T>> {
    let all: Vec<usize> = (0..graph.num_nodes()).collect();
    Ok(forward_rows(graph, params, &all)?.output)
}

struct LayerCache<T> {
    /// Node ids whose rows this layer computes, sorted.
    rows: Vec<usize>,
    /// Aggregated input `(Â H⁽ᵏ⁻¹⁾)[rows]`.
    input: Matrix<T>,
    /// Pre-activation `input · W⁽ᵏ⁾`.
    pre: Matrix<T>,
}

struct Forward<T> {
    layers: Vec<LayerCache<T>>,
    output: Matrix<T>,
}

fn relu<T: Scalar>(m: &Matrix<T>) -> Matrix<T> {
    m.map(|x| if x > T::zero() { x } else { T::zero() })
}

fn position_map(n: usize, rows: &[usize]) -> Vec<usize> {
    let mut pos = vec![usize::MAX; n];
    for (i, &r) in rows.iter().enumerate() {
        pos[r] = i;
    }
    pos
}

/// Forward pass producing the output rows listed in `targets` (sorted, unique).
fn forward_rows<T: Scalar>(graph: &PreparedGraph<T>, params: &EncoderParams<T>, targets: &[usize]) -> Result<Forward<T>> {
    if graph.feature_dim() != params.input_dim() {
        return Err(Error::shape(format!(
            "layer 1 expects {} input dims, graph has {}",
            params.input_dim(),
            graph.feature_dim()
        )));
    }
    let n = graph.num_nodes();
    let k_layers = params.num_layers();
    let a = graph.adj.matrix();

    // Row sets from the output layer back to layer 1.
    let mut row_sets = vec![Vec::new(); k_layers];
    row_sets[k_layers - 1] = targets.to_vec();
    for k in (1..k_layers).rev() {
        let mut mark = vec![false; n];
        for &r in &row_sets[k] {
            for &c in a.row(r).0 {
                mark[c] = true;
            }
        }
        row_sets[k - 1] = (0..n).filter(|&v| mark[v]).collect();
    }

    let mut layers: Vec<LayerCache<T>> = Vec::with_capacity(k_layers);
    let mut prev_out: Option<Matrix<T>> = None;
    for (k, rows) in row_sets.into_iter().enumerate() {
        let w = &params.layers[k];
        let input = match &prev_out {
            None => graph.ax.gather_rows(&rows),
            Some(h_prev) => {
                let pos = position_map(n, &layers[k - 1].rows);
                let mut agg = Matrix::zeros(rows.len(), h_prev.cols());
                for (i, &r) in rows.iter().enumerate() {
                    let (cols, vals) = a.row(r);
                    let out = agg.row_mut(i);
                    for (&c, &v) in cols.iter().zip(vals) {
                        for (o, &x) in out.iter_mut().zip(h_prev.row(pos[c])) {
                            *o += v * x;
                        }
                    }
                }
                agg
            }
        };
        if input.cols() != w.rows() {
            return Err(Error::shape(format!(
                "layer {} expects {} input dims, got {}",
                k + 1,
                w.rows(),
                input.cols()
            )));
        }
        let pre = input.matmul(w)?;
        let out = if k + 1 < k_layers { relu(&pre) } else { pre.clone() };
        layers.push(LayerCache { rows, input, pre });
        prev_out = Some(out);
    }
    Ok(Forward { layers, output: prev_out.expect("at least one layer") })
}

/// Backpropagates `d_out` (one row per target) and adds weight gradients into `grads`.
fn backward_rows<T: Scalar>(
    graph: &PreparedGraph<T>,
    params: &EncoderParams<T>,
    fwd: &Forward<T>,
    d_out: Matrix<T>,
    grads: &mut [Matrix<T>],
) -> Result<()> {
    let n = graph.num_nodes();
    let a = graph.adj.matrix();
    let k_layers = params.num_layers();
    let mut d_h = d_out;
    for k in (0..k_layers).rev() {
        let cache = &fwd.layers[k];
        let mut d_pre = d_h;
        if k + 1 < k_layers {
            for (g, &z) in d_pre.as_mut_slice().iter_mut().zip(cache.pre.as_slice()) {
                if !(z > T::zero()) {
                    *g = T::zero();
                }
            }
        }
        let d_w = cache.input.t_matmul(&d_pre)?;
        for (acc, &g) in grads[k].as_mut_slice().iter_mut().zip(d_w.as_slice()) {
            *acc += g;
        }
        if k == 0 {
            break;
        }
        let d_input = d_pre.matmul_t(&params.layers[k])?;
        let prev_rows = &fwd.layers[k - 1].rows;
        let pos = position_map(n, prev_rows);
        let mut d_prev = Matrix::zeros(prev_rows.len(), d_input.cols());
        for (i, &r) in cache.rows.iter().enumerate() {
            let (cols, vals) = a.row(r);
            let g_row = d_input.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                for (o, &g) in d_prev.row_mut(pos[c]).iter_mut().zip(g_row) {
                    *o += v * g;
                }
            }
        }
        d_h = d_prev;
    }
    Ok(())
}

/// A labeled batch of samples for one loss evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct Batch {
    pub items: Vec<SampleRef>,
    pub labels: Vec<u8>,
}

impl Batch {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }
}

/// Per-graph output rows needed by a batch.
fn targets_per_graph(num_graphs: usize, batch: &Batch) -> Result<Vec<Vec<usize>>> {
    let mut targets = vec![Vec::new(); num_graphs];
    let mut push = |r: NodeRef| -> Result<()> {
        let list = targets.get_mut(r.graph).ok_or_else(|| {
            Error::Range(format!("batch references graph {} but only {num_graphs} are loaded", r.graph))
        })?;
        list.push(r.node);
        Ok(())
    };
    for item in &batch.items {
        match item {
            SampleRef::Node(r) => push(*r)?,
            SampleRef::Pseudo(p) => {
                push(p.anchor)?;
                push(p.partner)?;
            }
        }
    }
    for list in &mut targets {
        list.sort_unstable();
        list.dedup();
    }
    Ok(targets)
}

/// Loss on `batch` and its exact gradient with respect to every parameter.
///
/// Pseudo-label samples are embedded as `(1-λ)·h_anchor + λ·h_partner` from the
/// current encoder output, so gradients reach both endpoints.
pub fn encode_with_gradients<T: Scalar>(
    graphs: &[PreparedGraph<T>],
    params: &ModelParams<T>,
    batch: &Batch,
    loss: &Loss<T>,
) -> Result<(T, ModelParams<T>)> {
    if batch.items.len() != batch.labels.len() {
        return Err(Error::shape(format!("{} batch items but {} labels", batch.items.len(), batch.labels.len())));
    }
    let targets = targets_per_graph(graphs.len(), batch)?;
    let mut forwards: Vec<Option<Forward<T>>> = Vec::with_capacity(graphs.len());
    let mut positions: Vec<Vec<usize>> = Vec::with_capacity(graphs.len());
    for (g, rows) in graphs.iter().zip(&targets) {
        if let Some(&bad) = rows.iter().find(|&&v| v >= g.num_nodes()) {
            return Err(Error::Range(format!("node {bad} outside graph of {} nodes", g.num_nodes())));
        }
        if rows.is_empty() {
            forwards.push(None);
            positions.push(Vec::new());
        } else {
            forwards.push(Some(forward_rows(g, &params.encoder, rows)?));
            positions.push(position_map(g.num_nodes(), rows));
        }
    }
    let emb_row = |r: NodeRef| -> &[T] {
        forwards[r.graph].as_ref().expect("graph was encoded").output.row(positions[r.graph][r.node])
    };

    let h_dim = params.encoder.output_dim();
    let mut emb = Matrix::zeros(batch.len(), h_dim);
    for (i, item) in batch.items.iter().enumerate() {
        let out = emb.row_mut(i);
        match item {
            SampleRef::Node(r) => out.copy_from_slice(emb_row(*r)),
            SampleRef::Pseudo(p) => {
                let lam = T::lit(p.lambda);
                let keep = T::one() - lam;
                for ((o, &x), &y) in out.iter_mut().zip(emb_row(p.anchor)).zip(emb_row(p.partner)) {
                    *o = keep * x + lam * y;
                }
            }
        }
    }
    let head = &params.detector;
    let scores: Vec<T> = (0..batch.len()).map(|i| dot(emb.row(i), &head.weight) + head.bias).collect();
    let (value, d_scores) = loss.value_and_grad(&scores, &batch.labels)?;
    if !value.is_finite() {
        return Err(Error::Numerical(format!("non-finite loss {value} on batch {:?}", batch.items)));
    }

    let mut grad = params.zeros_like();
    for (i, &ds) in d_scores.iter().enumerate() {
        for (g, &x) in grad.detector.weight.iter_mut().zip(emb.row(i)) {
            *g += ds * x;
        }
        grad.detector.bias += ds;
    }

    let mut d_outs: Vec<Matrix<T>> = targets.iter().map(|rows| Matrix::zeros(rows.len(), h_dim)).collect();
    let mut scatter = |r: NodeRef, coef: T, ds: T| {
        let row = d_outs[r.graph].row_mut(positions[r.graph][r.node]);
        for (o, &w) in row.iter_mut().zip(&head.weight) {
            *o += coef * ds * w;
        }
    };
    for (item, &ds) in batch.items.iter().zip(&d_scores) {
        match item {
            SampleRef::Node(r) => scatter(*r, T::one(), ds),
            SampleRef::Pseudo(p) => {
                let lam = T::lit(p.lambda);
                scatter(p.anchor, T::one() - lam, ds);
                scatter(p.partner, lam, ds);
            }
        }
    }

    let mut enc_grads: Vec<Matrix<T>> = grad.encoder.layers().to_vec();
    for ((g, fwd), d_out) in graphs.iter().zip(&forwards).zip(d_outs) {
        if let Some(fwd) = fwd {
            backward_rows(g, &params.encoder, fwd, d_out, &mut enc_grads)?;
        }
    }
    grad.encoder = EncoderParams::new(enc_grads)?;
    Ok((value, grad))
}

/// Owns the prepared training graphs and evaluates losses, gradients and
/// Hessian-vector products on flat parameter vectors.
pub struct GradientEngine<T: Scalar> {
    graphs: Vec<PreparedGraph<T>>,
    dual: OnceCell<Vec<PreparedGraph<Dual<T>>>>,
}

impl<T: Scalar> GradientEngine<T> {
    pub fn new(graphs: Vec<PreparedGraph<T>>) -> Self {
        Self { graphs, dual: OnceCell::new() }
    }

    pub fn from_graphs(graphs: &[AttributedGraph<T>]) -> Self {
        Self::new(graphs.iter().map(PreparedGraph::new).collect())
    }

    pub fn graphs(&self) -> &[PreparedGraph<T>] {
        &self.graphs
    }

    pub fn value_and_grad(&self, params: &ModelParams<T>, batch: &Batch, loss: &Loss<T>) -> Result<(T, ModelParams<T>)> {
        encode_with_gradients(&self.graphs, params, batch, loss)
    }

    /// Exact `∇²L(θ)·v` via forward-mode tangents through the reverse pass.
    pub fn hessian_vector(
        &self,
        template: &ModelParams<T>,
        theta: &[T],
        v: &[T],
        batch: &Batch,
        loss: &Loss<T>,
    ) -> Result<Vec<T>> {
        if theta.len() != v.len() {
            return Err(Error::shape("direction and parameters differ in length"));
        }
        let dual_graphs = self.dual.get_or_init(|| self.graphs.iter().map(PreparedGraph::cast).collect());
        let lifted: Vec<Dual<T>> = theta.iter().zip(v).map(|(&x, &d)| Dual::new(x, d)).collect();
        let params = template.from_flat_like(&lifted)?;
        let loss = loss.lift(Dual::constant);
        let (_, grad) = encode_with_gradients(dual_graphs, &params, batch, &loss)?;
        Ok(grad.to_flat().into_iter().map(|x| x.eps).collect())
    }

    /// Embeddings of every node of graph `g`.
    pub fn embeddings(&self, g: usize, params: &EncoderParams<T>) -> Result<Matrix<T>> {
        encode_prepared(&self.graphs[g], params)
    }
}
