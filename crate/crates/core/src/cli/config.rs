use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::codec;
use crate::error::{Error, Result};
use crate::game::{EncoderKind, ModelDims, TrainConfig, Vocabulary};
use crate::scenegen::ConceptCatalog;
use crate::seed;

/// Everything that determines an experiment's results. Output locations are
/// deliberately absent so the echo in every artifact is location-independent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub n_scenes: usize,
    /// JSON catalog file; `None` selects the built-in dining catalog.
    pub catalog: Option<PathBuf>,
    pub d: usize,
    pub k: usize,
    pub noise_sigma: f64,
    pub data_seed: u64,

    pub eval_fraction: f64,
    /// `None`: one round per held-out scene.
    pub eval_rounds: Option<usize>,

    pub message_len: usize,
    pub n_distractors: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub tau: f64,
    pub gcn_hidden: usize,
    pub embed: usize,
    pub gru_hidden: usize,
    pub token_dim: usize,

    pub vocab_sizes: Vec<usize>,
    pub encoders: Vec<EncoderKind>,
    pub seeds: Vec<u64>,
    pub master_seed: u64,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        let model = ModelDims::default();
        ExperimentConfig {
            n_scenes: 2000,
            catalog: None,
            d: 18,
            k: 2,
            noise_sigma: 0.1,
            data_seed: 0,
            eval_fraction: 0.2,
            eval_rounds: None,
            message_len: 10,
            n_distractors: train.n_distractors,
            batch_size: train.batch_size,
            epochs: train.epochs,
            learning_rate: train.learning_rate,
            tau: train.tau,
            gcn_hidden: model.gcn_hidden,
            embed: model.embed,
            gru_hidden: model.gru_hidden,
            token_dim: model.token_dim,
            vocab_sizes: vec![10, 20, 80],
            encoders: vec![EncoderKind::Vag, EncoderKind::Baseline],
            seeds: vec![0, 1, 2],
            master_seed: 0,
        }
    }
}

/// One point of the sweep grid.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cell {
    pub vocab: usize,
    pub encoder: EncoderKind,
    pub seed: u64,
}

impl Cell {
    pub fn name(&self) -> String {
        format!("V{}_{}_s{}", self.vocab, self.encoder, self.seed)
    }
}

impl ExperimentConfig {
    pub fn load(path: &Path) -> Result<Self> {
        codec::read_json(path)
    }

    pub fn validate(&self) -> Result<()> {
        if self.vocab_sizes.is_empty() || self.encoders.is_empty() || self.seeds.is_empty() {
            return Err(Error::config("sweep lists (vocab_sizes, encoders, seeds) must be non-empty"));
        }
        if let Some(path) = &self.catalog {
            if !path.is_file() {
                return Err(Error::Missing(path.clone()));
            }
        }
        if !(0.0..1.0).contains(&self.eval_fraction) {
            return Err(Error::config(format!("eval_fraction must lie in [0, 1), got {}", self.eval_fraction)));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return Err(Error::config(format!("noise_sigma must be finite and non-negative, got {}", self.noise_sigma)));
        }
        for cell in self.cells() {
            self.train_config(&cell).validate()?;
        }
        Ok(())
    }

    pub fn load_catalog(&self) -> Result<ConceptCatalog> {
        let catalog = match &self.catalog {
            Some(path) => codec::read_json(path)?,
            None => ConceptCatalog::default(),
        };
        catalog.validate()?;
        Ok(catalog)
    }

    /// Grid in vocab → encoder → seed order.
    pub fn cells(&self) -> Vec<Cell> {
        let mut out = Vec::new();
        for &vocab in &self.vocab_sizes {
            for &encoder in &self.encoders {
                for &seed in &self.seeds {
                    out.push(Cell { vocab, encoder, seed });
                }
            }
        }
        out
    }

    pub fn cell_seed(&self, cell: &Cell) -> u64 {
        seed::derive(&[self.master_seed, cell.vocab as u64, seed::label(cell.encoder.as_str()), cell.seed])
    }

    /// Train/eval split seed, shared by every cell.
    pub fn split_seed(&self) -> u64 {
        seed::derive(&[self.master_seed, seed::label("split")])
    }

    pub fn train_config(&self, cell: &Cell) -> TrainConfig {
        TrainConfig {
            vocab: Vocabulary {
                size: cell.vocab,
                length: self.message_len,
            },
            n_distractors: self.n_distractors,
            batch_size: self.batch_size,
            epochs: self.epochs,
            learning_rate: self.learning_rate,
            tau: self.tau,
            seed: self.cell_seed(cell),
            encoder: cell.encoder,
            model: ModelDims {
                gcn_hidden: self.gcn_hidden,
                embed: self.embed,
                gru_hidden: self.gru_hidden,
                token_dim: self.token_dim,
            },
        }
    }

    /// Self-describing echo written into cell artifacts.
    pub fn echo(&self, cell: Option<&Cell>) -> serde_json::Value {
        let mut value = serde_json::to_value(self).expect("config serializes");
        if let Some(cell) = cell {
            value["cell"] = serde_json::json!({
                "name": cell.name(),
                "vocab": cell.vocab,
                "encoder": cell.encoder,
                "seed": cell.seed,
                "derived_seed": self.cell_seed(cell),
            });
        }
        value
    }
}
