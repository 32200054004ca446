//! Graph anomaly detection that generalizes to unseen graphs: a shared GCN
//! encoder with a linear scoring head, trained episodically over several
//! labeled graphs with cross-graph anomaly augmentation and masked normal
//! scenes.
//!
//! The numeric core is generic over [`Scalar`]; the aliases below fix it to
//! `f64`, which is what the CLI and file formats use.

pub mod augmentation;
pub mod config;
pub mod detector;
pub mod encoder;
pub mod episodic;
pub mod error;
pub mod evaluation;
pub mod graph;
pub mod linalg;
pub mod metrics;
pub mod model;
pub mod partition;
pub mod rng;
pub mod scalar;
pub mod synth;

pub use error::{Error, Result};
pub use scalar::{Dual, Scalar};

pub type Graph = graph::AttributedGraph<f64>;
pub type Dataset = graph::Dataset<f64>;
pub type Adjacency = graph::NormalizedAdjacency<f64>;
pub type Encoder = encoder::EncoderParams<f64>;
pub type Detector = detector::DetectorParams<f64>;
pub type Model = detector::ModelParams<f64>;
pub type Outcome = episodic::TrainOutcome<f64>;
pub type Dense = linalg::Matrix<f64>;
