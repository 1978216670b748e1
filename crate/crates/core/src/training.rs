//! Desk-scale decoder training: simulated data in, model and history out.

use std::path::PathBuf;

use micronn::{ArchConfig, History, Model, TrainConfig};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::collective::{gen_training_set, TrainGenConfig, TrainingSet};
use crate::experiment::{derive_seed, ContentSource, HarnessError};
use crate::content::{load_content_dir, procedural_content};
use crate::frame::Frame;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrainRunConfig {
    pub seed: u64,
    pub train_samples: usize,
    pub val_samples: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Stop early once validation bit accuracy reaches this value.
    pub target_accuracy: Option<f64>,
    /// Channel widths; the first layer is a 1×1 convolution.
    pub widths: Vec<usize>,
    pub content: ContentSource,
    pub data: TrainGenConfig,
    pub output_dir: PathBuf,
}

impl Default for TrainRunConfig {
    fn default() -> Self {
        TrainRunConfig {
            seed: 1,
            train_samples: 2000,
            val_samples: 200,
            epochs: 8,
            batch_size: 16,
            learning_rate: 1e-3,
            target_accuracy: None,
            widths: ArchConfig::default().widths,
            content: ContentSource::default(),
            data: TrainGenConfig::default(),
            output_dir: PathBuf::from("runs/model"),
        }
    }
}

impl TrainRunConfig {
    pub fn from_toml_str(text: &str) -> Result<TrainRunConfig, HarnessError> {
        Ok(toml::from_str(text)?)
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::Config(m.into()));
        if self.train_samples < 2 || self.batch_size < 2 {
            return bad("need at least 2 training samples and a batch size of at least 2");
        }
        if self.widths.is_empty() {
            return bad("widths must not be empty");
        }
        if self.data.side < 8 || self.data.rows == 0 || self.data.cols == 0 {
            return bad("degenerate input side or grid");
        }
        if !(0.0..=0.5).contains(&self.data.jitter) {
            return bad("jitter must lie in [0, 0.5] cells");
        }
        if let Some(dir) = &self.content.dir {
            if !dir.is_dir() {
                return Err(HarnessError::Config(format!("content directory {} does not exist", dir.display())));
            }
        } else if self.content.procedural == 0 {
            return bad("no content: set content.dir or content.procedural");
        }
        self.data.channel.rate_ratio().map_err(|e| HarnessError::Config(e.to_string()))?;
        Ok(())
    }

    pub fn arch(&self) -> ArchConfig {
        ArchConfig {
            input_side: self.data.side,
            widths: self.widths.clone(),
            outputs: self.data.rows * self.data.cols,
            ..ArchConfig::default()
        }
    }

    pub fn load_content(&self) -> Result<Vec<Frame>, HarnessError> {
        let (w, h) = (self.data.display_width, self.data.display_height);
        let mut frames = procedural_content(self.content.procedural, w, h, self.seed);
        if let Some(dir) = &self.content.dir {
            frames.extend(load_content_dir(dir, w, h)?);
        }
        Ok(frames)
    }

    /// Training and validation sets from disjoint generator seeds.
    pub fn datasets(&self, content: &[Frame]) -> Result<(TrainingSet, TrainingSet), HarnessError> {
        let gen = |stream, count| {
            let cfg = TrainGenConfig {
                seed: derive_seed(self.seed, stream),
                ..self.data.clone()
            };
            gen_training_set(content, &cfg, count)
        };
        Ok((gen(1, self.train_samples)?, gen(2, self.val_samples)?))
    }
}

/// Result of [`train_decoder`].
#[derive(Debug, Clone)]
pub struct TrainedDecoder {
    pub model: Model,
    pub history: History,
}

/// Builds a fresh model and fits it to simulated data.
pub fn train_decoder(cfg: &TrainRunConfig, verbose: bool) -> Result<TrainedDecoder, HarnessError> {
    cfg.validate()?;
    let content = cfg.load_content()?;
    let (train_set, val_set) = cfg.datasets(&content)?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(cfg.seed, 3));
    let mut model = Model::from_arch(&cfg.arch(), &mut rng)?;
    let tc = TrainConfig {
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        seed: derive_seed(cfg.seed, 4),
        adam: micronn::AdamConfig {
            lr: cfg.learning_rate,
            ..micronn::AdamConfig::default()
        },
        target_accuracy: cfg.target_accuracy,
        verbose,
    };
    let val: Option<&dyn micronn::Dataset> = if val_set.samples.is_empty() { None } else { Some(&val_set) };
    let history = micronn::train(&mut model, &train_set, val, &tc).map_err(|e| HarnessError::Model(e.source))?;
    Ok(TrainedDecoder { model, history })
}
