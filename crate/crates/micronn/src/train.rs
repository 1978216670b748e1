//! Mini-batch training loop with per-epoch history.

use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::error::NnError;
use crate::model::Model;
use crate::optim::{Adam, AdamConfig};
use crate::tensor::Tensor;

/// One input image `[C, H, W]` and its 0/1 target bits.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub input: Tensor,
    pub target: Vec<f64>,
}

/// Random-access source of samples. Lets callers keep compact storage and
/// materialize `f64` tensors only per batch.
pub trait Dataset {
    fn len(&self) -> usize;
    fn sample(&self, index: usize) -> Sample;
    fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

impl Dataset for [Sample] {
    fn len(&self) -> usize {
        <[Sample]>::len(self)
    }
    fn sample(&self, index: usize) -> Sample {
        self[index].clone()
    }
}

impl Dataset for Vec<Sample> {
    fn len(&self) -> usize {
        <[Sample]>::len(self)
    }
    fn sample(&self, index: usize) -> Sample {
        self[index].clone()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub seed: u64,
    pub adam: AdamConfig,
    /// Stop once validation bit accuracy reaches this value.
    pub target_accuracy: Option<f64>,
    /// Print one line per epoch to stderr.
    pub verbose: bool,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            epochs: 10,
            batch_size: 16,
            seed: 0,
            adam: AdamConfig::default(),
            target_accuracy: None,
            verbose: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EpochStats {
    pub epoch: usize,
    pub steps: u64,
    pub train_loss: f64,
    pub train_bit_accuracy: f64,
    pub val_loss: Option<f64>,
    pub val_bit_accuracy: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct History {
    pub epochs: Vec<EpochStats>,
}

impl History {
    pub const CSV_HEADER: &'static str =
        "epoch,steps,train_loss,train_bit_accuracy,val_loss,val_bit_accuracy";

    pub fn last(&self) -> Option<&EpochStats> {
        self.epochs.last()
    }

    pub fn write_csv(&self, mut out: impl Write) -> std::io::Result<()> {
        writeln!(out, "{}", Self::CSV_HEADER)?;
        let opt = |v: Option<f64>| v.map(|x| format!("{x:.6}")).unwrap_or_default();
        for e in &self.epochs {
            writeln!(
                out,
                "{},{},{:.6},{:.6},{},{}",
                e.epoch,
                e.steps,
                e.train_loss,
                e.train_bit_accuracy,
                opt(e.val_loss),
                opt(e.val_bit_accuracy)
            )?;
        }
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> std::io::Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }
}

/// Training stopped early; `history` holds the completed epochs.
#[derive(Debug, Error)]
#[error("training aborted after {} epochs: {source}", history.epochs.len())]
pub struct TrainError {
    #[source]
    pub source: NnError,
    pub history: History,
}

fn batch_tensors(data: &(impl Dataset + ?Sized), idx: &[usize], outputs: usize) -> Result<(Tensor, Tensor), NnError> {
    let samples: Vec<Sample> = idx.iter().map(|&i| data.sample(i)).collect();
    let inputs: Vec<&Tensor> = samples.iter().map(|s| &s.input).collect();
    let x = Tensor::stack(&inputs)?;
    let mut t = Vec::with_capacity(idx.len() * outputs);
    for s in &samples {
        if s.target.len() != outputs {
            return Err(NnError::Shape {
                context: "sample target",
                expected: vec![outputs],
                actual: vec![s.target.len()],
            });
        }
        t.extend_from_slice(&s.target);
    }
    Ok((x, Tensor::from_vec(&[idx.len(), outputs], t)?))
}

/// Fraction of bits where `p > 0.5` agrees with the target.
pub fn bit_accuracy(p: &Tensor, targets: &Tensor) -> f64 {
    let hits = p
        .data()
        .iter()
        .zip(targets.data())
        .filter(|(&p, &t)| (p > 0.5) == (t > 0.5))
        .count();
    hits as f64 / p.len().max(1) as f64
}

/// Mean BCE and bit accuracy in inference mode.
pub fn evaluate(model: &Model, data: &(impl Dataset + ?Sized), batch_size: usize) -> Result<(f64, f64), NnError> {
    let n = data.len();
    let mut loss = 0.0;
    let mut hits = 0.0;
    let all: Vec<usize> = (0..n).collect();
    for chunk in all.chunks(batch_size.max(1)) {
        let (x, t) = batch_tensors(data, chunk, model.outputs())?;
        let p = model.predict(&x)?;
        let (l, _) = crate::loss::bce_loss(&p, &t)?;
        loss += l * chunk.len() as f64;
        hits += bit_accuracy(&p, &t) * chunk.len() as f64;
    }
    Ok((loss / n.max(1) as f64, hits / n.max(1) as f64))
}

/// Trains `model` in place with Adam on shuffled mini-batches.
///
/// A trailing batch of one sample is dropped, since batch norm cannot
/// normalize it.
pub fn train(
    model: &mut Model,
    train_set: &(impl Dataset + ?Sized),
    val_set: Option<&(dyn Dataset + '_)>,
    config: &TrainConfig,
) -> Result<History, TrainError> {
    let mut history = History::default();
    let fail = |source, history: &History| TrainError {
        source,
        history: history.clone(),
    };
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut opt = Adam::new(config.adam, model);
    let mut order: Vec<usize> = (0..train_set.len()).collect();
    let outputs = model.outputs();
    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let (mut loss_sum, mut acc_sum, mut seen) = (0.0, 0.0, 0usize);
        for idx in order.chunks(config.batch_size.max(2)) {
            if idx.len() < 2 {
                continue;
            }
            let (x, t) = batch_tensors(train_set, idx, outputs).map_err(|e| fail(e, &history))?;
            let (loss, p) = model
                .train_step(&x, &t, &mut opt)
                .map_err(|e| fail(e, &history))?;
            loss_sum += loss * idx.len() as f64;
            acc_sum += bit_accuracy(&p, &t) * idx.len() as f64;
            seen += idx.len();
        }
        let (val_loss, val_acc) = match val_set {
            Some(v) if !v.is_empty() => {
                let (l, a) = evaluate(model, v, config.batch_size).map_err(|e| fail(e, &history))?;
                (Some(l), Some(a))
            }
            _ => (None, None),
        };
        let stats = EpochStats {
            epoch,
            steps: opt.steps(),
            train_loss: loss_sum / seen.max(1) as f64,
            train_bit_accuracy: acc_sum / seen.max(1) as f64,
            val_loss,
            val_bit_accuracy: val_acc,
        };
        if config.verbose {
            eprintln!(
                "epoch {epoch:>3}  loss {:.4}  acc {:.4}  val_acc {}",
                stats.train_loss,
                stats.train_bit_accuracy,
                val_acc.map(|a| format!("{a:.4}")).unwrap_or_else(|| "-".into())
            );
        }
        history.epochs.push(stats);
        if let (Some(goal), Some(acc)) = (config.target_accuracy, val_acc) {
            if acc >= goal {
                break;
            }
        }
    }
    Ok(history)
}
