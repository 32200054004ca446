//! Linear anomaly-score head, training losses and model parameter containers.

use rand::Rng as _;
use rand_distr::{Distribution, StandardNormal, Uniform};
use serde::{Deserialize, Serialize};

use crate::encoder::{EncoderParams, GradientEngine};
use crate::episodic::{
    init_params, is_checkpoint, pooled_descent, validation_auc, EpochRecord, Selector, TrainConfig, TrainOutcome,
};
use crate::graph::{AttributedGraph, NodeRoles};
use crate::error::{Error, Result};
use crate::linalg::{dot, Matrix};
use crate::rng::{stream, stream_rng, Rng};
use crate::scalar::Scalar;

/// Score head `s = w·h + b`.
#[derive(Clone, Debug, PartialEq)]
pub struct DetectorParams<T> {
    pub weight: Vec<T>,
    pub bias: T,
}

impl<T: Scalar> DetectorParams<T> {
    pub fn zeros(input_dim: usize) -> Self {
        Self { weight: vec![T::zero(); input_dim], bias: T::zero() }
    }

    pub fn glorot(input_dim: usize, rng: &mut Rng) -> Self {
        let limit = (6.0 / (input_dim as f64 + 1.0)).sqrt();
        let dist = Uniform::new_inclusive(-limit, limit).expect("finite Glorot bound");
        Self { weight: (0..input_dim).map(|_| T::lit(dist.sample(rng))).collect(), bias: T::zero() }
    }

    pub fn input_dim(&self) -> usize {
        self.weight.len()
    }
}

/// Encoder and detector parameters together; the unit updated by training.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelParams<T> {
    pub encoder: EncoderParams<T>,
    pub detector: DetectorParams<T>,
}

impl<T: Scalar> ModelParams<T> {
    pub fn new(encoder: EncoderParams<T>, detector: DetectorParams<T>) -> Result<Self> {
        if encoder.output_dim() != detector.input_dim() {
            return Err(Error::shape(format!(
                "encoder emits {} dims but the detector expects {}",
                encoder.output_dim(),
                detector.input_dim()
            )));
        }
        Ok(Self { encoder, detector })
    }

    /// Glorot-uniform encoder layers and head for dims `[d, h, ..., h]`.
    pub fn init(input_dim: usize, hidden_dim: usize, num_layers: usize, rng: &mut Rng) -> Result<Self> {
        if num_layers == 0 || hidden_dim == 0 {
            return Err(Error::config("num_layers and hidden_dim must be positive"));
        }
        let mut dims = vec![input_dim];
        dims.extend(std::iter::repeat_n(hidden_dim, num_layers));
        let encoder = EncoderParams::glorot(&dims, rng)?;
        let detector = DetectorParams::glorot(hidden_dim, rng);
        Self::new(encoder, detector)
    }

    pub fn zeros_like(&self) -> Self {
        Self {
            encoder: EncoderParams::zeros_like(&self.encoder),
            detector: DetectorParams::zeros(self.detector.input_dim()),
        }
    }

    pub fn num_params(&self) -> usize {
        self.encoder.layers().iter().map(|w| w.rows() * w.cols()).sum::<usize>()
            + self.detector.weight.len()
            + 1
    }

    /// Flattens in a fixed order: encoder layers row-major, head weight, bias.
    pub fn to_flat(&self) -> Vec<T> {
        let mut out = Vec::with_capacity(self.num_params());
        for w in self.encoder.layers() {
            out.extend_from_slice(w.as_slice());
        }
        out.extend_from_slice(&self.detector.weight);
        out.push(self.detector.bias);
        out
    }

    /// Inverse of [`Self::to_flat`], using `self` for shapes.
    pub fn from_flat_like<U: Scalar>(&self, flat: &[U]) -> Result<ModelParams<U>> {
        if flat.len() != self.num_params() {
            return Err(Error::shape(format!(
                "flat parameter vector has {} entries, model has {}",
                flat.len(),
                self.num_params()
            )));
        }
        let mut offset = 0;
        let mut layers = Vec::with_capacity(self.encoder.num_layers());
        for w in self.encoder.layers() {
            let len = w.rows() * w.cols();
            layers.push(Matrix::from_vec(w.rows(), w.cols(), flat[offset..offset + len].to_vec())?);
            offset += len;
        }
        let h = self.detector.input_dim();
        let weight = flat[offset..offset + h].to_vec();
        let bias = flat[offset + h];
        Ok(ModelParams { encoder: EncoderParams::new(layers)?, detector: DetectorParams { weight, bias } })
    }

    pub fn cast<U: Scalar>(&self) -> ModelParams<U> {
        let flat: Vec<U> = self.to_flat().into_iter().map(|x| U::lit(x.as_f64())).collect();
        self.from_flat_like(&flat).expect("same shape")
    }

    pub fn all_finite(&self) -> bool {
        self.to_flat().iter().all(|x| x.is_finite())
    }
}

/// Anomaly score of every embedding row.
pub fn score<T: Scalar>(embeddings: &Matrix<T>, params: &DetectorParams<T>) -> Result<Vec<T>> {
    if embeddings.cols() != params.input_dim() {
        return Err(Error::shape(format!(
            "embeddings have width {}, score head expects {}",
            embeddings.cols(),
            params.input_dim()
        )));
    }
    Ok((0..embeddings.rows()).map(|i| dot(embeddings.row(i), &params.weight) + params.bias).collect())
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LossKind {
    Deviation,
    CrossEntropy,
}

/// A fully specified loss, ready to evaluate on a score batch.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Loss<T> {
    Deviation { ref_mean: T, ref_std: T, margin: T },
    CrossEntropy,
}

impl<T: Scalar> Loss<T> {
    /// Mean loss over the batch and its gradient with respect to each score.
    pub fn value_and_grad(&self, scores: &[T], labels: &[u8]) -> Result<(T, Vec<T>)> {
        if scores.len() != labels.len() {
            return Err(Error::shape(format!("{} scores but {} labels", scores.len(), labels.len())));
        }
        if scores.is_empty() {
            return Err(Error::config("loss evaluated on an empty batch"));
        }
        let inv_n = T::from_usize_lossy(scores.len()).recip();
        match *self {
            Loss::Deviation { ref_mean, ref_std, margin } => {
                if !(ref_std > T::zero()) {
                    return Err(Error::config(format!("reference std must be positive, got {ref_std}")));
                }
                let mut total = T::zero();
                let mut grad = Vec::with_capacity(scores.len());
                for (&s, &y) in scores.iter().zip(labels) {
                    let dev = (s - ref_mean) / ref_std;
                    if y == 0 {
                        total += dev.abs();
                        let sign = if dev > T::zero() {
                            T::one()
                        } else if dev < T::zero() {
                            -T::one()
                        } else {
                            T::zero()
                        };
                        grad.push(sign / ref_std * inv_n);
                    } else {
                        let gap = margin - dev;
                        if gap > T::zero() {
                            total += gap;
                            grad.push(-(ref_std.recip()) * inv_n);
                        } else {
                            grad.push(T::zero());
                        }
                    }
                }
                Ok((total * inv_n, grad))
            }
            Loss::CrossEntropy => {
                let mut total = T::zero();
                let mut grad = Vec::with_capacity(scores.len());
                for (&s, &y) in scores.iter().zip(labels) {
                    let y = if y == 1 { T::one() } else { T::zero() };
                    total += s.max(T::zero()) - s * y + (-s.abs()).exp().ln_1p();
                    grad.push((sigmoid(s) - y) * inv_n);
                }
                Ok((total * inv_n, grad))
            }
        }
    }

    pub fn lift<U: Scalar>(&self, f: impl Fn(T) -> U) -> Loss<U> {
        match *self {
            Loss::Deviation { ref_mean, ref_std, margin } => {
                Loss::Deviation { ref_mean: f(ref_mean), ref_std: f(ref_std), margin: f(margin) }
            }
            Loss::CrossEntropy => Loss::CrossEntropy,
        }
    }
}

fn sigmoid<T: Scalar>(s: T) -> T {
    if s >= T::zero() {
        (T::one() + (-s).exp()).recip()
    } else {
        let e = s.exp();
        e / (T::one() + e)
    }
}

/// Mean deviation loss: normals pulled to the reference mean, anomalies pushed
/// at least `margin` reference deviations above it.
pub fn deviation_loss<T: Scalar>(scores: &[T], labels: &[u8], ref_mean: T, ref_std: T, margin: T) -> Result<T> {
    Loss::Deviation { ref_mean, ref_std, margin }.value_and_grad(scores, labels).map(|(l, _)| l)
}

/// Mean binary cross-entropy of `sigmoid(score)` against labels.
pub fn bce_loss<T: Scalar>(scores: &[T], labels: &[u8]) -> Result<T> {
    Loss::CrossEntropy.value_and_grad(scores, labels).map(|(l, _)| l)
}

/// Empirical mean and standard deviation of `k` standard-normal draws.
pub fn sample_reference(rng: &mut Rng, k: usize) -> Result<(f64, f64)> {
    if k < 2 {
        return Err(Error::config(format!("reference sample count must be at least 2, got {k}")));
    }
    let draws: Vec<f64> = (0..k).map(|_| rng.sample(StandardNormal)).collect();
    let mean = draws.iter().sum::<f64>() / k as f64;
    let var = draws.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (k as f64 - 1.0);
    Ok((mean, var.sqrt()))
}

/// Baseline: pools every training graph's train nodes and runs plain
/// mini-batch descent (one balanced batch per epoch), keeping the checkpoint
/// with the best pooled validation AUC.
pub fn train_deepall<T: Scalar>(
    graphs: &[AttributedGraph<T>],
    roles: &[NodeRoles],
    config: &TrainConfig,
) -> Result<TrainOutcome<T>> {
    config.validate()?;
    if roles.iter().all(|r| r.anomaly_train.is_empty()) {
        return Err(Error::config("deepall needs at least one labeled training anomaly"));
    }
    if graphs.is_empty() || graphs.len() != roles.len() {
        return Err(Error::config(format!("{} graphs but {} role sets", graphs.len(), roles.len())));
    }
    let engine = GradientEngine::from_graphs(graphs);
    let init = init_params(graphs, config)?;
    let mut selector = Selector::new(init.clone(), validation_auc(&engine, roles, &init)?);
    let mut log = Vec::with_capacity(config.epochs);
    let mut rng = stream_rng(config.seed, stream::DEEPALL);
    pooled_descent(&engine, roles, init, config, config.epochs, &mut rng, |epoch, params, loss| {
        let val_auc = if is_checkpoint(epoch, config.epochs, config.val_every) {
            let auc = validation_auc(&engine, roles, params)?;
            selector.offer(params, auc, epoch + 1);
            auc
        } else {
            None
        };
        log.push(EpochRecord {
            epoch,
            loss: Some(loss),
            meta_loss: None,
            val_auc,
            num_pseudo_labels: None,
            num_scenes: None,
        });
        Ok(())
    })?;
    Ok(TrainOutcome {
        params: selector.best,
        log,
        best_val_auc: selector.best_auc,
        best_epoch: selector.best_epoch,
        pseudo_labels: Vec::new(),
    })
}
