use std::path::{Path, PathBuf};

use lstar_rnn::rnn::{Cell, Shape, TrainConfig};
use serde::{Deserialize, Serialize};

use crate::CliError;

/// One experiment, read from TOML and overridable by flags.
#[derive(Clone, Debug, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    /// Registry name such as `tomita3`; ignored when `dfa_file` is set.
    pub language: Option<String>,
    /// Ground-truth automaton in the JSON DFA format.
    pub dfa_file: Option<PathBuf>,
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
    pub network: NetworkSection,
    pub train: TrainSection,
    pub extract: ExtractSection,
    pub baseline: BaselineSection,
    pub eval: EvalSection,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkSection {
    pub cell: Cell,
    pub n_layers: usize,
    pub hidden: usize,
}

impl Default for NetworkSection {
    fn default() -> Self {
        NetworkSection {
            cell: Cell::Gru,
            n_layers: 2,
            hidden: 50,
        }
    }
}

impl NetworkSection {
    pub fn shape(&self) -> Shape {
        Shape {
            cell: self.cell,
            n_layers: self.n_layers,
            hidden: self.hidden,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainSection {
    /// Word lengths in the training set; defaults depend on the language.
    pub lengths: Option<Vec<usize>>,
    pub per_length: usize,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub max_epochs: usize,
    pub target_accuracy: f64,
    pub clip_norm: f64,
    pub max_seconds: f64,
}

impl Default for TrainSection {
    fn default() -> Self {
        let t = TrainConfig::default();
        TrainSection {
            lengths: None,
            per_length: 300,
            learning_rate: t.learning_rate,
            batch_size: t.batch_size,
            max_epochs: t.max_epochs,
            target_accuracy: t.target_accuracy,
            clip_norm: t.clip_norm,
            max_seconds: t.max_seconds,
        }
    }
}

impl TrainSection {
    pub fn train_config(&self, seed: u64) -> TrainConfig {
        TrainConfig {
            seed,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            max_epochs: self.max_epochs,
            target_accuracy: self.target_accuracy,
            clip_norm: self.clip_norm,
            max_seconds: self.max_seconds,
            ..TrainConfig::default()
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SampleSource {
    /// Shortest words of each network label in the saved training set.
    Train,
    /// Shortest words of each label among short enumerated and random words.
    Random,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExtractSection {
    pub initial_depth: usize,
    /// Seconds.
    pub time_limit: f64,
    pub starting_samples: SampleSource,
}

impl Default for ExtractSection {
    fn default() -> Self {
        ExtractSection {
            initial_depth: lstar_rnn::abstraction::DEFAULT_INITIAL_DEPTH,
            time_limit: 30.0,
            starting_samples: SampleSource::Train,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BaselineSection {
    pub q: usize,
    pub k: usize,
    /// Seconds.
    pub time_limit: f64,
    pub max_states: Option<usize>,
    /// Longest word length sampled by the random-sampling oracle.
    pub max_length: usize,
    pub per_length: usize,
}

impl Default for BaselineSection {
    fn default() -> Self {
        BaselineSection {
            q: 2,
            k: 100,
            time_limit: 30.0,
            max_states: None,
            max_length: 100,
            per_length: 1000,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EvalSection {
    pub lengths: Vec<usize>,
    pub n: usize,
}

impl Default for EvalSection {
    fn default() -> Self {
        EvalSection {
            lengths: vec![10, 50, 100, 1000],
            n: 1000,
        }
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::config(format!("cannot read {}: {e}", path.display())))?;
        let mut cfg: ExperimentConfig =
            toml::from_str(&text).map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
        // relative paths in the file are relative to the file
        let base = path.parent().unwrap_or(Path::new("."));
        if let Some(d) = &cfg.dfa_file {
            if d.is_relative() {
                cfg.dfa_file = Some(base.join(d));
            }
        }
        Ok(cfg)
    }

    pub fn seed(&self) -> Result<u64, CliError> {
        self.seed
            .ok_or_else(|| CliError::config("a seed is required (config `seed` or --seed)"))
    }

    pub fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }
}
