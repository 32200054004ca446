//! Run configuration shared by every CLI subcommand.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::episodic::TrainConfig;
use crate::error::{Error, Result};
use crate::graph::read_text;
use crate::partition::PartitionConfig;
use crate::synth::SynthConfig;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// When set, overrides the seeds of every section.
    pub seed: Option<u64>,
    pub train: TrainConfig,
    pub partition: PartitionConfig,
    pub synth: SynthConfig,
    pub num_labeled_anomalies: usize,
    pub topk: Vec<usize>,
    pub seeds: Vec<u64>,
    pub jobs: usize,
    pub data: Vec<PathBuf>,
    pub out: Option<PathBuf>,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            seed: None,
            train: TrainConfig::default(),
            partition: PartitionConfig::default(),
            synth: SynthConfig::default(),
            num_labeled_anomalies: 20,
            topk: vec![100],
            seeds: vec![0],
            jobs: 1,
            data: Vec::new(),
            out: None,
        }
    }
}

fn in_section<T>(section: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{section}.{msg}")),
        other => other,
    })
}

impl RunConfig {
    pub fn from_json(text: &str, source: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Json { file: source.to_owned(), message: e.to_string() })
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read_text(path)?, &path.display().to_string())
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    /// Pushes the top-level seed, if any, into every section.
    pub fn resolve_seed(&mut self) {
        if let Some(seed) = self.seed {
            self.train.seed = seed;
            self.partition.seed = seed;
            self.synth.seed = seed;
        }
    }

    pub fn validate(&self) -> Result<()> {
        in_section("train", self.train.validate())?;
        in_section("partition", self.partition.validate())?;
        in_section("synth", self.synth.validate())?;
        if self.num_labeled_anomalies == 0 {
            return Err(Error::config("num_labeled_anomalies: must be at least 1"));
        }
        if self.seeds.is_empty() {
            return Err(Error::config("seeds: must list at least one seed"));
        }
        if self.jobs == 0 {
            return Err(Error::config("jobs: must be at least 1"));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trips_unchanged() {
        let mut cfg = RunConfig::default();
        cfg.seed = Some(9);
        cfg.topk = vec![10, 50];
        cfg.train.epochs = 12;
        let back = RunConfig::from_json(&cfg.to_json(), "mem").unwrap();
        assert_eq!(back, cfg);
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let err = RunConfig::from_json(r#"{"train": {"epoch": 3}}"#, "cfg.json").unwrap_err();
        assert!(err.to_string().contains("epoch"));
        assert!(RunConfig::from_json(r#"{"bogus": 1}"#, "cfg.json").is_err());
    }

    #[test]
    fn validation_names_section_and_key() {
        let mut cfg = RunConfig::default();
        cfg.synth.anomaly_ratio = 0.6;
        assert!(cfg.validate().unwrap_err().to_string().contains("synth.anomaly_ratio"));
        let mut cfg = RunConfig::default();
        cfg.train.batch_size = 3;
        assert!(cfg.validate().unwrap_err().to_string().contains("train.batch_size"));
    }

    #[test]
    fn top_level_seed_reaches_sections() {
        let mut cfg = RunConfig::from_json(r#"{"seed": 5}"#, "mem").unwrap();
        cfg.resolve_seed();
        assert_eq!((cfg.train.seed, cfg.partition.seed, cfg.synth.seed), (5, 5, 5));
    }
}
