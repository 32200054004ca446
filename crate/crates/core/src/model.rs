//! `model.json` persistence for trained encoder + detector parameters.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::detector::{DetectorParams, ModelParams};
use crate::encoder::EncoderParams;
use crate::episodic::TrainConfig;
use crate::error::{Error, Result};
use crate::graph::{read_json, write_json};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct EncoderFile {
    num_layers: usize,
    dims: Vec<usize>,
    weights: Vec<Vec<Vec<f64>>>,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct DetectorFile {
    weight: Vec<f64>,
    bias: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelFile {
    encoder: EncoderFile,
    detector: DetectorFile,
    config_fingerprint: String,
}

/// 64-bit FNV-1a hash of the canonical JSON form of `config`, as hex.
pub fn config_fingerprint(config: &TrainConfig) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in text.bytes() {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    format!("{h:016x}")
}

pub fn save_model<T: Scalar>(path: &Path, model: &ModelParams<T>, fingerprint: &str) -> Result<()> {
    let weights = model
        .encoder
        .layers()
        .iter()
        .map(|w| w.to_rows().into_iter().map(|r| r.into_iter().map(Scalar::as_f64).collect()).collect())
        .collect();
    let file = ModelFile {
        encoder: EncoderFile { num_layers: model.encoder.num_layers(), dims: model.encoder.dims(), weights },
        detector: DetectorFile {
            weight: model.detector.weight.iter().map(|w| w.as_f64()).collect(),
            bias: model.detector.bias.as_f64(),
        },
        config_fingerprint: fingerprint.to_owned(),
    };
    write_json(path, &file)
}

/// Loads parameters and the fingerprint of the config that produced them.
pub fn load_model<T: Scalar>(path: &Path) -> Result<(ModelParams<T>, String)> {
    let file: ModelFile = read_json(path)?;
    let bad = |message: String| Error::Json { file: path.display().to_string(), message };
    if file.encoder.weights.len() != file.encoder.num_layers || file.encoder.dims.len() != file.encoder.num_layers + 1 {
        return Err(bad(format!(
            "num_layers {} disagrees with {} weight matrices and {} dims",
            file.encoder.num_layers,
            file.encoder.weights.len(),
            file.encoder.dims.len()
        )));
    }
    let mut layers = Vec::with_capacity(file.encoder.num_layers);
    for (k, w) in file.encoder.weights.iter().enumerate() {
        let (rows, cols) = (file.encoder.dims[k], file.encoder.dims[k + 1]);
        let m: Matrix<f64> = Matrix::from_rows(w).map_err(|e| bad(format!("layer {}: {e}", k + 1)))?;
        if m.rows() != rows || m.cols() != cols {
            return Err(bad(format!(
                "layer {} is {}x{} but dims say {rows}x{cols}",
                k + 1,
                m.rows(),
                m.cols()
            )));
        }
        layers.push(m.map(T::lit));
    }
    let encoder = EncoderParams::new(layers)?;
    let detector = DetectorParams {
        weight: file.detector.weight.iter().map(|&w| T::lit(w)).collect(),
        bias: T::lit(file.detector.bias),
    };
    Ok((ModelParams::new(encoder, detector)?, file.config_fingerprint))
}
