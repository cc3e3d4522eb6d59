use std::fs;
use std::io::Write;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::metrics::{compute_metrics, MetricsReport};
use super::optim::{clip_global_norm, AdamW, LinearSchedule};
use crate::autograd::Gradients;
use crate::corpus::Label;
use crate::error::{Error, Result};
use crate::model::{ForwardOutput, PreparedInput, SentimentModel};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TrainConfig {
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    /// Fraction of total optimizer steps spent warming up.
    pub warmup_fraction: f64,
    pub weight_decay: f64,
    /// Global gradient-norm bound; 0 disables clipping.
    pub clip_norm: f64,
    pub seed: u64,
    /// Name of the backbone that produced the region features.
    pub image_encoder: String,
    /// Stops training after this many optimizer steps.
    pub max_steps: Option<usize>,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 30,
            batch_size: 16,
            learning_rate: 2e-5,
            warmup_fraction: 0.1,
            weight_decay: 0.01,
            clip_norm: 1.0,
            seed: 42,
            image_encoder: "resnet50".into(),
            max_steps: None,
        }
    }
}

impl TrainConfig {
    /// Defaults with the learning rate used for the named benchmark.
    pub fn for_dataset(name: &str) -> Self {
        let mut c = Self::default();
        if name.contains("2017") {
            c.learning_rate = 1e-5;
        }
        c
    }

    pub fn validate(&self) -> Result<()> {
        if self.epochs == 0 || self.batch_size == 0 {
            return Err(Error::Config("epochs and batch_size must be positive".into()));
        }
        if !self.learning_rate.is_finite() || self.learning_rate < 0.0 {
            return Err(Error::Config(format!("invalid learning rate {}", self.learning_rate)));
        }
        if !(0.0..=1.0).contains(&self.warmup_fraction) {
            return Err(Error::Config(format!(
                "warmup fraction {} outside [0, 1]",
                self.warmup_fraction
            )));
        }
        if self.clip_norm < 0.0 || self.weight_decay < 0.0 {
            return Err(Error::Config("clip_norm and weight_decay must be non-negative".into()));
        }
        if self.max_steps == Some(0) {
            return Err(Error::Config("max_steps must be positive".into()));
        }
        Ok(())
    }
}

/// One line of the metrics log.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpochRecord {
    pub epoch: usize,
    pub split: String,
    pub accuracy: f64,
    pub macro_f1: f64,
    pub loss: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictionRecord {
    pub sample_id: String,
    pub gold: Label,
    pub predicted: Label,
    pub probabilities: [f64; 3],
}

#[derive(Debug, Clone)]
pub struct Evaluation {
    pub report: MetricsReport,
    pub predictions: Vec<PredictionRecord>,
    pub mean_loss: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    /// Parameters from the epoch with the best dev macro-F1 (earliest on ties).
    pub best: SentimentModel,
    /// Parameters after the last step.
    pub last: SentimentModel,
    pub best_epoch: usize,
    pub best_dev: MetricsReport,
    pub log: Vec<EpochRecord>,
    pub steps: usize,
}

/// Full-split inference and scoring.
pub fn evaluate(model: &SentimentModel, inputs: &[PreparedInput]) -> Result<Evaluation> {
    if inputs.is_empty() {
        return Err(Error::Contract("cannot evaluate an empty split".into()));
    }
    let outputs = model.predict_batch(inputs)?;
    score(inputs, &outputs)
}

fn score(inputs: &[PreparedInput], outputs: &[ForwardOutput]) -> Result<Evaluation> {
    let mut predictions = Vec::with_capacity(inputs.len());
    let mut loss = 0.0;
    for (input, out) in inputs.iter().zip(outputs) {
        let gold = input
            .label
            .ok_or_else(|| Error::Contract(format!("sample {} has no gold label", input.sample_id)))?;
        loss -= out.probabilities[gold.index()].ln();
        predictions.push(PredictionRecord {
            sample_id: input.sample_id.clone(),
            gold,
            predicted: out.predicted(),
            probabilities: out.probabilities,
        });
    }
    let gold: Vec<Label> = predictions.iter().map(|p| p.gold).collect();
    let pred: Vec<Label> = predictions.iter().map(|p| p.predicted).collect();
    Ok(Evaluation {
        report: compute_metrics(&gold, &pred)?,
        predictions,
        mean_loss: loss / inputs.len() as f64,
    })
}

fn argmax(p: &[f64; 3]) -> Label {
    let mut best = 0;
    for i in 1..3 {
        if p[i] > p[best] {
            best = i;
        }
    }
    Label::from_index(best).expect("three classes")
}

/// Fine-tunes `model` on `train`, selecting on `dev`.
///
/// Deterministic for a fixed seed: shuffling and dropout draw from seeded
/// generators and per-sample gradients are summed in batch order.
pub fn train(
    model: SentimentModel,
    train: &[PreparedInput],
    dev: &[PreparedInput],
    config: &TrainConfig,
) -> Result<TrainOutcome> {
    config.validate()?;
    if train.is_empty() || dev.is_empty() {
        return Err(Error::Contract("train and dev splits must be non-empty".into()));
    }
    let batches_per_epoch = train.len().div_ceil(config.batch_size);
    let mut total_steps = batches_per_epoch * config.epochs;
    if let Some(cap) = config.max_steps {
        total_steps = total_steps.min(cap);
    }
    let schedule = LinearSchedule::new(config.learning_rate, total_steps, config.warmup_fraction);
    let mut optimizer = AdamW::new(model.params.len(), config.weight_decay);
    let mut shuffle_rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut dropout_rng = ChaCha8Rng::seed_from_u64(config.seed ^ 0x9e37_79b9_7f4a_7c15);

    let mut model = model;
    let mut best: Option<(SentimentModel, usize, MetricsReport)> = None;
    let mut log = Vec::new();
    let mut step = 0usize;
    let mut order: Vec<usize> = (0..train.len()).collect();

    for epoch in 1..=config.epochs {
        if step >= total_steps {
            break;
        }
        order.shuffle(&mut shuffle_rng);
        let mut loss_sum = 0.0;
        let mut seen = 0usize;
        let mut gold = Vec::new();
        let mut pred = Vec::new();
        for batch in order.chunks(config.batch_size) {
            if step >= total_steps {
                break;
            }
            let mut grads = Gradients::default();
            let weight = 1.0 / batch.len() as f64;
            for &i in batch {
                let (loss, probs, g) = model.loss_and_gradients(&train[i], Some(&mut dropout_rng))?;
                if !loss.is_finite() {
                    return Err(Error::Divergence { step, loss });
                }
                loss_sum += loss;
                seen += 1;
                gold.push(train[i].label.expect("checked by loss_and_gradients"));
                pred.push(argmax(&probs));
                grads.accumulate(g, weight);
            }
            if config.clip_norm > 0.0 {
                let norm = clip_global_norm(&mut grads, config.clip_norm);
                if !norm.is_finite() {
                    return Err(Error::Divergence { step, loss: norm });
                }
            }
            optimizer.step(&mut model.params, &grads, schedule.lr(step));
            step += 1;
        }
        let train_report = compute_metrics(&gold, &pred)?;
        log.push(EpochRecord {
            epoch,
            split: "train".into(),
            accuracy: train_report.accuracy,
            macro_f1: train_report.macro_f1,
            loss: loss_sum / seen as f64,
        });
        let dev_eval = evaluate(&model, dev)?;
        log.push(EpochRecord {
            epoch,
            split: "dev".into(),
            accuracy: dev_eval.report.accuracy,
            macro_f1: dev_eval.report.macro_f1,
            loss: dev_eval.mean_loss,
        });
        let improved = match &best {
            None => true,
            Some((_, _, r)) => dev_eval.report.macro_f1 > r.macro_f1,
        };
        if improved {
            best = Some((model.clone(), epoch, dev_eval.report));
        }
    }
    let (best, best_epoch, best_dev) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        best,
        last: model,
        best_epoch,
        best_dev,
        log,
        steps: step,
    })
}

fn write_jsonl<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let mut out = Vec::new();
    for r in rows {
        serde_json::to_writer(&mut out, r)?;
        out.push(b'\n');
    }
    fs::File::create(path)?.write_all(&out)?;
    Ok(())
}

pub fn write_metrics_log(path: &Path, log: &[EpochRecord]) -> Result<()> {
    write_jsonl(path, log)
}

pub fn write_predictions(path: &Path, predictions: &[PredictionRecord]) -> Result<()> {
    write_jsonl(path, predictions)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_validation() {
        TrainConfig::default().validate().unwrap();
        assert_eq!(TrainConfig::for_dataset("twitter2017").learning_rate, 1e-5);
        let c = TrainConfig {
            batch_size: 0,
            ..TrainConfig::default()
        };
        assert!(matches!(c.validate(), Err(Error::Config(_))));
        let c = TrainConfig {
            learning_rate: f64::NAN,
            ..TrainConfig::default()
        };
        assert!(c.validate().is_err());
    }
}
