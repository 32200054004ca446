//! Episodic meta-training over scenes: balanced task batches, inner-loop
//! adaptation, meta-gradients and the full training loop.

use rand::seq::index;
use rand::Rng as _;
use serde::{Deserialize, Serialize};

use crate::augmentation::{
    generate_pseudo_labels, make_scene, merge_training_data, NodeRef, PseudoLabelPair, SampleRef, Scene,
    SelectedPair,
};
use crate::detector::{sample_reference, score, Loss, LossKind, ModelParams};
use crate::encoder::{encode_prepared, Batch, GradientEngine, PreparedGraph};
use crate::error::{Error, Result};
use crate::graph::{AttributedGraph, NodeRoles};
use crate::metrics::auc;
use crate::rng::{stream, stream_rng, Rng};
use crate::scalar::Scalar;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptimizerKind {
    Sgd,
    Adam,
}

/// Hyper-parameters of both trainers. Field names double as config-file keys.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainConfig {
    pub epochs: usize,
    pub num_tasks: usize,
    pub batch_size: usize,
    pub inner_steps: usize,
    pub inner_lr: f64,
    pub meta_lr: f64,
    pub sigma: f64,
    pub alpha: usize,
    pub rho: f64,
    pub loss: LossKind,
    pub second_order: bool,
    pub warmup_epochs: usize,
    pub seed: u64,
    pub enable_anomaly_aug: bool,
    pub enable_normal_aug: bool,
    pub hidden_dim: usize,
    pub num_layers: usize,
    pub margin: f64,
    pub ref_samples: usize,
    pub optimizer: OptimizerKind,
    pub val_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 300,
            num_tasks: 8,
            batch_size: 32,
            inner_steps: 5,
            inner_lr: 0.01,
            meta_lr: 0.005,
            sigma: 0.1,
            alpha: 3,
            rho: 0.5,
            loss: LossKind::Deviation,
            second_order: false,
            warmup_epochs: 100,
            seed: 0,
            enable_anomaly_aug: true,
            enable_normal_aug: true,
            hidden_dim: 64,
            num_layers: 2,
            margin: 5.0,
            ref_samples: 5000,
            optimizer: OptimizerKind::Adam,
            val_every: 10,
        }
    }
}

impl TrainConfig {
    /// Settings matching the original large-scale experiments.
    pub fn paper_scale() -> Self {
        Self { epochs: 2000, num_tasks: 30, batch_size: 128, inner_steps: 5, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |key: &str, why: String| Err(Error::config(format!("{key}: {why}")));
        if self.batch_size < 2 || self.batch_size % 2 != 0 {
            return bad("batch_size", format!("must be even and at least 2, got {}", self.batch_size));
        }
        if self.num_tasks == 0 {
            return bad("num_tasks", "must be at least 1".into());
        }
        if self.inner_steps == 0 {
            return bad("inner_steps", "must be at least 1".into());
        }
        if !(self.inner_lr > 0.0 && self.inner_lr.is_finite()) {
            return bad("inner_lr", format!("must be positive, got {}", self.inner_lr));
        }
        if !(self.meta_lr > 0.0 && self.meta_lr.is_finite()) {
            return bad("meta_lr", format!("must be positive, got {}", self.meta_lr));
        }
        if !(self.sigma > 0.0 && self.sigma < 1.0) {
            return bad("sigma", format!("must lie in (0, 1), got {}", self.sigma));
        }
        if !(0.0..1.0).contains(&self.rho) {
            return bad("rho", format!("must lie in [0, 1), got {}", self.rho));
        }
        if self.hidden_dim == 0 {
            return bad("hidden_dim", "must be positive".into());
        }
        if self.num_layers == 0 {
            return bad("num_layers", "must be positive".into());
        }
        if self.ref_samples < 2 {
            return bad("ref_samples", format!("must be at least 2, got {}", self.ref_samples));
        }
        if !(self.margin > 0.0) {
            return bad("margin", format!("must be positive, got {}", self.margin));
        }
        if self.val_every == 0 {
            return bad("val_every", "must be at least 1".into());
        }
        Ok(())
    }
}

/// One episode: support batch from one scene, query batch from another.
#[derive(Clone, Debug, PartialEq)]
pub struct Task {
    pub support: Batch,
    pub query: Batch,
    pub support_scene: usize,
    pub query_scene: usize,
}

fn draw<R: Copy>(pool: &[R], k: usize, rng: &mut Rng) -> Vec<R> {
    if pool.len() >= k {
        index::sample(rng, pool.len(), k).into_iter().map(|i| pool[i]).collect()
    } else {
        (0..k).map(|_| pool[rng.random_range(0..pool.len())]).collect()
    }
}

/// `t/2` anomaly samples and `t/2` normal samples from the scene; without
/// replacement when a side is large enough, with replacement otherwise.
pub fn sample_balanced_batch(scene: &Scene, t: usize, rng: &mut Rng) -> Result<Batch> {
    if t < 2 || t % 2 != 0 {
        return Err(Error::config(format!("batch_size must be even and at least 2, got {t}")));
    }
    if scene.anomaly_refs.is_empty() {
        return Err(Error::config("scene has no anomaly samples"));
    }
    if scene.normal_refs.is_empty() {
        return Err(Error::config("scene has no normal samples"));
    }
    let half = t / 2;
    let mut items = draw(&scene.anomaly_refs, half, rng);
    items.extend(draw(&scene.normal_refs, half, rng).into_iter().map(SampleRef::Node));
    let mut labels = vec![1u8; half];
    labels.resize(t, 0);
    Ok(Batch { items, labels })
}

/// A differentiable scalar function of a flat parameter vector.
pub trait Objective<T: Scalar> {
    fn value_and_grad(&self, theta: &[T]) -> Result<(T, Vec<T>)>;

    /// `∇²f(θ)·v`; needed only for second-order meta-gradients.
    fn hessian_vector(&self, theta: &[T], v: &[T]) -> Result<Vec<T>>;
}

/// Model loss on a fixed batch.
pub struct BatchObjective<'a, T: Scalar> {
    pub engine: &'a GradientEngine<T>,
    pub template: &'a ModelParams<T>,
    pub batch: Batch,
    pub loss: Loss<T>,
}

impl<T: Scalar> Objective<T> for BatchObjective<'_, T> {
    fn value_and_grad(&self, theta: &[T]) -> Result<(T, Vec<T>)> {
        let params = self.template.from_flat_like(theta)?;
        let (value, grad) = self.engine.value_and_grad(&params, &self.batch, &self.loss)?;
        Ok((value, grad.to_flat()))
    }

    fn hessian_vector(&self, theta: &[T], v: &[T]) -> Result<Vec<T>> {
        self.engine.hessian_vector(self.template, theta, v, &self.batch, &self.loss)
    }
}

fn check_finite<T: Scalar>(v: &[T], what: &str) -> Result<()> {
    match v.iter().position(|x| !x.is_finite()) {
        Some(i) => Err(Error::Numerical(format!("non-finite {what} at coordinate {i}"))),
        None => Ok(()),
    }
}

/// Parameters visited by `steps` gradient-descent steps on `support`, starting at `theta`.
fn inner_trajectory<T: Scalar, O: Objective<T>>(theta: &[T], support: &O, r1: T, steps: usize) -> Result<Vec<Vec<T>>> {
    if steps == 0 {
        return Err(Error::config("inner_steps must be at least 1"));
    }
    let mut traj = Vec::with_capacity(steps + 1);
    traj.push(theta.to_vec());
    for _ in 0..steps {
        let current = traj.last().expect("non-empty");
        let (_, g) = support.value_and_grad(current)?;
        check_finite(&g, "inner gradient")?;
        let next = current.iter().zip(&g).map(|(&x, &d)| x - r1 * d).collect();
        traj.push(next);
    }
    Ok(traj)
}

/// Task-adapted parameters `θ'` after `steps` descent steps of rate `r1`; `theta` is not modified.
pub fn inner_adapt<T: Scalar, O: Objective<T>>(theta: &[T], support: &O, r1: T, steps: usize) -> Result<Vec<T>> {
    Ok(inner_trajectory(theta, support, r1, steps)?.pop().expect("non-empty"))
}

/// Mean query loss over tasks and its gradient with respect to `theta`.
///
/// First-order: each task contributes `∇L_query(θ'_i)`. Second-order: the
/// query gradient is pulled back through every inner step with
/// `v ← v − r1·∇²L_support(θ_k)·v`.
pub fn meta_gradient<T: Scalar, O: Objective<T>>(
    theta: &[T],
    tasks: &[(O, O)],
    r1: T,
    steps: usize,
    second_order: bool,
) -> Result<(T, Vec<T>)> {
    if tasks.is_empty() {
        return Err(Error::config("meta step needs at least one task"));
    }
    let mut total = T::zero();
    let mut sum = vec![T::zero(); theta.len()];
    for (support, query) in tasks {
        let traj = inner_trajectory(theta, support, r1, steps)?;
        let (lq, mut v) = query.value_and_grad(traj.last().expect("non-empty"))?;
        if second_order {
            for point in traj[..steps].iter().rev() {
                let hv = support.hessian_vector(point, &v)?;
                for (vi, h) in v.iter_mut().zip(hv) {
                    *vi -= r1 * h;
                }
            }
        }
        total += lq;
        for (s, g) in sum.iter_mut().zip(v) {
            *s += g;
        }
    }
    let inv = T::from_usize_lossy(tasks.len()).recip();
    for s in &mut sum {
        *s *= inv;
    }
    check_finite(&sum, "meta-gradient")?;
    Ok((total * inv, sum))
}

/// `θ − r2 · ∇θ mean_i L_query(θ'_i)`
pub fn meta_step<T: Scalar, O: Objective<T>>(
    theta: &[T],
    tasks: &[(O, O)],
    r2: T,
    r1: T,
    steps: usize,
    second_order: bool,
) -> Result<Vec<T>> {
    let (_, g) = meta_gradient(theta, tasks, r1, steps, second_order)?;
    Ok(theta.iter().zip(g).map(|(&x, d)| x - r2 * d).collect())
}

/// Applies gradients to a flat parameter vector.
#[derive(Clone, Debug)]
pub struct Optimizer<T> {
    kind: OptimizerKind,
    lr: T,
    first: Vec<T>,
    second: Vec<T>,
    steps: i32,
}

impl<T: Scalar> Optimizer<T> {
    pub fn new(kind: OptimizerKind, lr: T, dim: usize) -> Self {
        Self { kind, lr, first: vec![T::zero(); dim], second: vec![T::zero(); dim], steps: 0 }
    }

    pub fn step(&mut self, theta: &mut [T], grad: &[T]) {
        match self.kind {
            OptimizerKind::Sgd => {
                for (x, &g) in theta.iter_mut().zip(grad) {
                    *x -= self.lr * g;
                }
            }
            OptimizerKind::Adam => {
                let (b1, b2, eps) = (T::lit(0.9), T::lit(0.999), T::lit(1e-8));
                self.steps += 1;
                let c1 = T::one() - b1.powi(self.steps);
                let c2 = T::one() - b2.powi(self.steps);
                for (((x, &g), m), v) in theta.iter_mut().zip(grad).zip(&mut self.first).zip(&mut self.second) {
                    *m = b1 * *m + (T::one() - b1) * g;
                    *v = b2 * *v + (T::one() - b2) * g * g;
                    *x -= self.lr * (*m / c1) / ((*v / c2).sqrt() + eps);
                }
            }
        }
    }
}

/// One row of the training log.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct EpochRecord {
    pub epoch: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub loss: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub meta_loss: Option<f64>,
    pub val_auc: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_pseudo_labels: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub num_scenes: Option<usize>,
}

/// Trained parameters plus everything needed to audit the run.
#[derive(Clone, Debug)]
pub struct TrainOutcome<T> {
    pub params: ModelParams<T>,
    pub log: Vec<EpochRecord>,
    pub best_val_auc: Option<f64>,
    /// Epochs completed when the returned parameters were checkpointed.
    pub best_epoch: usize,
    pub pseudo_labels: Vec<SelectedPair>,
}

/// Scores of the listed nodes (any order, repeats allowed).
pub fn score_nodes<T: Scalar>(graph: &PreparedGraph<T>, params: &ModelParams<T>, nodes: &[usize]) -> Result<Vec<T>> {
    let emb = encode_prepared(graph, &params.encoder)?;
    let all = score(&emb, &params.detector)?;
    nodes
        .iter()
        .map(|&v| all.get(v).copied().ok_or_else(|| Error::Range(format!("node {v} outside graph"))))
        .collect()
}

/// Anomaly score of every node of `graph`.
pub fn predict_scores<T: Scalar>(model: &ModelParams<T>, graph: &AttributedGraph<T>) -> Result<Vec<T>> {
    if graph.feature_dim() != model.encoder.input_dim() {
        return Err(Error::shape(format!(
            "model expects {} features, graph {} has {}",
            model.encoder.input_dim(),
            graph.graph_id(),
            graph.feature_dim()
        )));
    }
    let prepared = PreparedGraph::new(graph);
    score(&encode_prepared(&prepared, &model.encoder)?, &model.detector)
}

/// Pooled validation AUC (validation anomalies vs validation normals); `None`
/// when either side is empty.
pub(crate) fn validation_auc<T: Scalar>(
    engine: &GradientEngine<T>,
    roles: &[NodeRoles],
    params: &ModelParams<T>,
) -> Result<Option<f64>> {
    let mut scores = Vec::new();
    let mut labels = Vec::new();
    for (g, r) in roles.iter().enumerate() {
        if r.anomaly_val.is_empty() && r.normal_val.is_empty() {
            continue;
        }
        let emb = engine.embeddings(g, &params.encoder)?;
        let s = score(&emb, &params.detector)?;
        for &v in &r.anomaly_val {
            scores.push(s[v].as_f64());
            labels.push(1u8);
        }
        for &v in &r.normal_val {
            scores.push(s[v].as_f64());
            labels.push(0u8);
        }
    }
    if scores.iter().any(|s| !s.is_finite()) {
        return Err(Error::Numerical("non-finite validation score".into()));
    }
    Ok(auc(&scores, &labels).ok())
}

/// Tracks the best checkpoint by validation AUC (strict improvement only).
pub(crate) struct Selector<T> {
    pub best: ModelParams<T>,
    pub best_auc: Option<f64>,
    pub best_epoch: usize,
}

impl<T: Scalar> Selector<T> {
    pub fn new(initial: ModelParams<T>, auc: Option<f64>) -> Self {
        Self { best: initial, best_auc: auc, best_epoch: 0 }
    }

    pub fn offer(&mut self, params: &ModelParams<T>, auc: Option<f64>, epoch: usize) {
        let better = match (auc, self.best_auc) {
            (Some(a), Some(b)) => a > b,
            (Some(_), None) => true,
            (None, _) => false,
        };
        if better {
            self.best = params.clone();
            self.best_auc = auc;
            self.best_epoch = epoch;
        }
    }
}

pub(crate) fn is_checkpoint(epoch: usize, total: usize, every: usize) -> bool {
    (epoch + 1) % every == 0 || epoch + 1 == total
}

/// Per-epoch loss: the deviation reference is resampled once per epoch.
pub(crate) fn epoch_loss<T: Scalar>(config: &TrainConfig, rng: &mut Rng) -> Result<Loss<T>> {
    Ok(match config.loss {
        LossKind::Deviation => {
            let (mean, std) = sample_reference(rng, config.ref_samples)?;
            Loss::Deviation { ref_mean: T::lit(mean), ref_std: T::lit(std), margin: T::lit(config.margin) }
        }
        LossKind::CrossEntropy => Loss::CrossEntropy,
    })
}

/// Pooled training data as a single unmasked scene.
pub(crate) fn pooled_scene(roles: &[NodeRoles]) -> Scene {
    let (anomaly_refs, normal_refs) = merge_training_data(roles, &[]);
    Scene { anomaly_refs, normal_refs, mask_seed: 0 }
}

/// Plain mini-batch training on pooled data for `epochs` epochs, one balanced
/// batch per epoch. Returns the final parameters and per-epoch losses.
pub(crate) fn pooled_descent<T: Scalar>(
    engine: &GradientEngine<T>,
    roles: &[NodeRoles],
    mut params: ModelParams<T>,
    config: &TrainConfig,
    epochs: usize,
    rng: &mut Rng,
    mut on_epoch: impl FnMut(usize, &ModelParams<T>, f64) -> Result<()>,
) -> Result<ModelParams<T>> {
    let scene = pooled_scene(roles);
    let mut theta = params.to_flat();
    let mut opt = Optimizer::new(config.optimizer, T::lit(config.meta_lr), theta.len());
    for epoch in 0..epochs {
        let loss = epoch_loss(config, rng).map_err(|e| e.in_task(epoch, 0))?;
        let batch = sample_balanced_batch(&scene, config.batch_size, rng).map_err(|e| e.in_task(epoch, 0))?;
        let (value, grad) = engine.value_and_grad(&params, &batch, &loss).map_err(|e| e.in_task(epoch, 0))?;
        let grad = grad.to_flat();
        check_finite(&grad, "gradient").map_err(|e| e.in_task(epoch, 0))?;
        opt.step(&mut theta, &grad);
        params = params.from_flat_like(&theta)?;
        on_epoch(epoch, &params, value.as_f64())?;
    }
    Ok(params)
}

fn check_training_inputs<T: Scalar>(graphs: &[AttributedGraph<T>], roles: &[NodeRoles]) -> Result<()> {
    if graphs.is_empty() {
        return Err(Error::config("at least one training graph is required"));
    }
    if graphs.len() != roles.len() {
        return Err(Error::config(format!("{} graphs but {} role sets", graphs.len(), roles.len())));
    }
    let d = graphs[0].feature_dim();
    for (g, r) in graphs.iter().zip(roles) {
        if g.feature_dim() != d {
            return Err(Error::shape(format!("graph {} has {} features, expected {d}", g.graph_id(), g.feature_dim())));
        }
        if r.num_nodes() != g.num_nodes() {
            return Err(Error::shape(format!("roles cover {} nodes, graph {} has {}", r.num_nodes(), g.graph_id(), g.num_nodes())));
        }
    }
    if roles.iter().all(|r| r.anomaly_train.is_empty()) {
        return Err(Error::config("no labeled training anomalies in any graph"));
    }
    if roles.iter().all(|r| r.normal_train.is_empty()) {
        return Err(Error::config("no normal training nodes in any graph"));
    }
    Ok(())
}

pub(crate) fn init_params<T: Scalar>(graphs: &[AttributedGraph<T>], config: &TrainConfig) -> Result<ModelParams<T>> {
    ModelParams::init(
        graphs[0].feature_dim(),
        config.hidden_dim,
        config.num_layers,
        &mut stream_rng(config.seed, stream::INIT),
    )
}

/// Builds this epoch's scenes: `P+1` masked scenes, or one unmasked scene
/// when normal-distribution augmentation is off.
fn build_scenes(s_merge: &[SampleRef], n_merge: &[NodeRef], config: &TrainConfig, rng: &mut Rng) -> Result<Vec<Scene>> {
    if !config.enable_normal_aug {
        return Ok(vec![make_scene(s_merge, n_merge, 0.0, 0)?]);
    }
    (0..=config.num_tasks).map(|_| make_scene(s_merge, n_merge, config.rho, rng.random())).collect()
}

/// Draws the epoch's tasks; support scene `i`, query scene uniform over the others.
pub fn build_tasks(scenes: &[Scene], num_tasks: usize, t: usize, rng: &mut Rng) -> Result<Vec<Task>> {
    let mut tasks = Vec::with_capacity(num_tasks);
    for i in 0..num_tasks {
        let (support_scene, query_scene) = if scenes.len() == 1 {
            (0, 0)
        } else {
            if scenes.len() < num_tasks + 1 {
                return Err(Error::config(format!("{} scenes cannot serve {num_tasks} tasks", scenes.len())));
            }
            let mut j = rng.random_range(0..scenes.len() - 1);
            if j >= i {
                j += 1;
            }
            (i, j)
        };
        let support = sample_balanced_batch(&scenes[support_scene], t, rng)?;
        let query = sample_balanced_batch(&scenes[query_scene], t, rng)?;
        tasks.push(Task { support, query, support_scene, query_scene });
    }
    Ok(tasks)
}

/// Warm-up, one-time pseudo-label selection, then episodic meta-training;
/// returns the checkpoint with the best pooled validation AUC.
pub fn train_augan<T: Scalar>(
    graphs: &[AttributedGraph<T>],
    roles: &[NodeRoles],
    config: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    check_training_inputs(graphs, roles)?;
    if config.enable_anomaly_aug && graphs.len() < 2 {
        return Err(Error::config(format!(
            "anomaly augmentation requires ≥ 2 training graphs, got {}",
            graphs.len()
        )));
    }
    let engine = GradientEngine::from_graphs(graphs);
    let params = init_params(graphs, config)?;

    let mut warm_rng = stream_rng(config.seed, stream::WARMUP);
    let params =
        pooled_descent(&engine, roles, params, config, config.warmup_epochs, &mut warm_rng, |_, _, _| Ok(()))?;

    let pseudo_labels = if config.enable_anomaly_aug {
        let embeddings = (0..graphs.len())
            .map(|g| engine.embeddings(g, &params.encoder))
            .collect::<Result<Vec<_>>>()?;
        let mut rng = stream_rng(config.seed, stream::PSEUDO);
        generate_pseudo_labels(roles, &embeddings, T::lit(config.sigma), config.alpha, &mut rng)?
    } else {
        Vec::new()
    };
    let pairs: Vec<PseudoLabelPair> = pseudo_labels.iter().map(|s| s.pair).collect();

    let mut selector = Selector::new(params.clone(), validation_auc(&engine, roles, &params)?);
    let mut log = Vec::with_capacity(config.epochs);
    let mut theta = params.to_flat();
    let template = params;
    let mut opt = Optimizer::new(config.optimizer, T::lit(config.meta_lr), theta.len());
    let mut rng = stream_rng(config.seed, stream::EPISODES);
    let r1 = T::lit(config.inner_lr);

    for epoch in 0..config.epochs {
        let (s_merge, n_merge) = merge_training_data(roles, &pairs);
        let scenes = build_scenes(&s_merge, &n_merge, config, &mut rng).map_err(|e| e.in_task(epoch, 0))?;
        let loss = epoch_loss::<T>(config, &mut rng).map_err(|e| e.in_task(epoch, 0))?;
        let tasks = build_tasks(&scenes, config.num_tasks, config.batch_size, &mut rng)
            .map_err(|e| e.in_task(epoch, 0))?;
        let objectives: Vec<_> = tasks
            .into_iter()
            .map(|task| {
                (
                    BatchObjective { engine: &engine, template: &template, batch: task.support, loss },
                    BatchObjective { engine: &engine, template: &template, batch: task.query, loss },
                )
            })
            .collect();

        let mut meta_loss = T::zero();
        let mut grad = vec![T::zero(); theta.len()];
        for (i, pair) in objectives.iter().enumerate() {
            let (l, g) = meta_gradient(&theta, std::slice::from_ref(pair), r1, config.inner_steps, config.second_order)
                .map_err(|e| e.in_task(epoch, i))?;
            meta_loss += l;
            for (acc, x) in grad.iter_mut().zip(g) {
                *acc += x;
            }
        }
        let inv = T::from_usize_lossy(objectives.len()).recip();
        for g in &mut grad {
            *g *= inv;
        }
        opt.step(&mut theta, &grad);
        let params = template.from_flat_like(&theta)?;
        if !params.all_finite() {
            return Err(Error::Numerical("parameters diverged".into()).in_task(epoch, 0));
        }

        let val_auc = if is_checkpoint(epoch, config.epochs, config.val_every) {
            let auc = validation_auc(&engine, roles, &params)?;
            selector.offer(&params, auc, epoch + 1);
            auc
        } else {
            None
        };
        log.push(EpochRecord {
            epoch,
            loss: None,
            meta_loss: Some((meta_loss * inv).as_f64()),
            val_auc,
            num_pseudo_labels: Some(pairs.len()),
            num_scenes: Some(scenes.len()),
        });
    }

    Ok(TrainOutcome {
        params: selector.best,
        log,
        best_val_auc: selector.best_auc,
        best_epoch: selector.best_epoch,
        pseudo_labels,
    })
}
