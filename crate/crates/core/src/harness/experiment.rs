use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::metrics::MetricsReport;
use super::train::{evaluate, train, EpochRecord, PredictionRecord, TrainConfig};
use crate::corpus::JoinedInstance;
use crate::error::{Error, Result};
use crate::model::{prepare_all, AblationFlags, ModelConfig, SentimentModel, Vocab};

/// Joined train/dev/test instances and the vocabulary shared by every run.
#[derive(Debug, Clone)]
pub struct ExperimentData {
    pub train: Vec<JoinedInstance>,
    pub dev: Vec<JoinedInstance>,
    pub test: Vec<JoinedInstance>,
    pub vocab: Vocab,
}

impl ExperimentData {
    /// Builds the vocabulary from the training instances.
    pub fn new(train: Vec<JoinedInstance>, dev: Vec<JoinedInstance>, test: Vec<JoinedInstance>) -> Self {
        let vocab = Vocab::build(&train, 1);
        Self {
            train,
            dev,
            test,
            vocab,
        }
    }
}

#[derive(Debug, Clone)]
pub struct ExperimentResult {
    pub model: SentimentModel,
    pub best_epoch: usize,
    pub log: Vec<EpochRecord>,
    pub dev: MetricsReport,
    pub test: MetricsReport,
    /// Test metrics of the parameters after the final step.
    pub test_last: MetricsReport,
    pub test_predictions: Vec<PredictionRecord>,
}

/// Train on `train`, select on `dev`, score the selected model on `test`.
pub fn run_experiment(
    data: &ExperimentData,
    model_config: &ModelConfig,
    train_config: &TrainConfig,
) -> Result<ExperimentResult> {
    let model = SentimentModel::new(model_config.clone(), data.vocab.clone(), train_config.seed)?;
    run_experiment_from(data, model, train_config)
}

/// Like [`run_experiment`] but fine-tunes the given model (for example one
/// loaded from converted pretrained weights) instead of a fresh one. Inputs
/// are prepared with the model's own configuration and vocabulary.
pub fn run_experiment_from(
    data: &ExperimentData,
    model: SentimentModel,
    train_config: &TrainConfig,
) -> Result<ExperimentResult> {
    let model_config = &model.config.clone();
    let train_inputs = prepare_all(&data.train, model_config)?;
    let dev_inputs = prepare_all(&data.dev, model_config)?;
    let test_inputs = prepare_all(&data.test, model_config)?;
    let outcome = train(model, &train_inputs, &dev_inputs, train_config)?;
    let test = evaluate(&outcome.best, &test_inputs)?;
    let test_last = evaluate(&outcome.last, &test_inputs)?;
    Ok(ExperimentResult {
        model: outcome.best,
        best_epoch: outcome.best_epoch,
        log: outcome.log,
        dev: outcome.best_dev,
        test: test.report,
        test_last: test_last.report,
        test_predictions: test.predictions,
    })
}

/// One removable mechanism.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Ablation {
    Caption,
    AdjacencyMatrix,
    AdjacencyMatrixAndSceneGraph,
    Prompt,
    Freeze,
}

impl Ablation {
    pub const ALL: [Ablation; 5] = [
        Ablation::Caption,
        Ablation::AdjacencyMatrix,
        Ablation::AdjacencyMatrixAndSceneGraph,
        Ablation::Prompt,
        Ablation::Freeze,
    ];

    /// Row label, e.g. `w/o caption`.
    pub fn label(self) -> &'static str {
        match self {
            Ablation::Caption => "w/o caption",
            Ablation::AdjacencyMatrix => "w/o adjacency matrix",
            Ablation::AdjacencyMatrixAndSceneGraph => "w/o adjacency matrix & scene graph",
            Ablation::Prompt => "w/o prompt",
            Ablation::Freeze => "w/o freeze",
        }
    }

    /// Short command-line spelling, e.g. `caption`.
    pub fn key(self) -> &'static str {
        match self {
            Ablation::Caption => "caption",
            Ablation::AdjacencyMatrix => "adjacency",
            Ablation::AdjacencyMatrixAndSceneGraph => "adjacency-scene-graph",
            Ablation::Prompt => "prompt",
            Ablation::Freeze => "freeze",
        }
    }

    pub fn apply(self, flags: &mut AblationFlags) {
        match self {
            Ablation::Caption => flags.use_caption = false,
            Ablation::AdjacencyMatrix => flags.use_visibility_matrix = false,
            Ablation::AdjacencyMatrixAndSceneGraph => {
                flags.use_visibility_matrix = false;
                flags.use_scene_graph = false;
            }
            Ablation::Prompt => flags.use_prompt = false,
            Ablation::Freeze => flags.freeze_image_encoder = false,
        }
    }
}

impl fmt::Display for Ablation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.label())
    }
}

impl FromStr for Ablation {
    type Err = Error;

    /// Accepts the row label or the short key, case-insensitively, with an
    /// optional `w/o ` / `wo-` / `no-` prefix.
    fn from_str(s: &str) -> Result<Self> {
        let lowered = s.trim().to_lowercase();
        let mut body = lowered.as_str();
        for prefix in ["w/o ", "w/o-", "wo-", "wo ", "no-", "without-", "without "] {
            if let Some(rest) = body.strip_prefix(prefix) {
                body = rest.trim();
                break;
            }
        }
        let canonical: String = body
            .chars()
            .map(|c| if c == ' ' || c == '_' { '-' } else { c })
            .collect::<String>()
            .replace("-&-", "-")
            .replace("-and-", "-");
        let found = match canonical.as_str() {
            "caption" => Ablation::Caption,
            "adjacency" | "adjacency-matrix" | "visibility-matrix" => Ablation::AdjacencyMatrix,
            "adjacency-scene-graph" | "adjacency-matrix-scene-graph" => Ablation::AdjacencyMatrixAndSceneGraph,
            "prompt" => Ablation::Prompt,
            "freeze" => Ablation::Freeze,
            _ => {
                return Err(Error::Validation(format!(
                    "unknown ablation {s:?}; expected one of: {}",
                    Ablation::ALL.map(|a| a.key()).join(", ")
                )))
            }
        };
        Ok(found)
    }
}

/// Model configuration with `ablation` applied to `base`.
pub fn ablated_config(base: &ModelConfig, ablation: Option<Ablation>) -> ModelConfig {
    let mut c = base.clone();
    if let Some(a) = ablation {
        a.apply(&mut c.flags);
    }
    c
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub name: String,
    pub dev_accuracy: f64,
    pub dev_macro_f1: f64,
    pub test_accuracy: f64,
    pub test_macro_f1: f64,
}

impl ResultRow {
    fn new(name: impl Into<String>, r: &ExperimentResult) -> Self {
        Self {
            name: name.into(),
            dev_accuracy: r.dev.accuracy,
            dev_macro_f1: r.dev.macro_f1,
            test_accuracy: r.test.accuracy,
            test_macro_f1: r.test.macro_f1,
        }
    }
}

/// One train + evaluate per ablation, in the given order. An empty list
/// runs the unablated model once.
pub fn run_ablation(
    data: &ExperimentData,
    base: &ModelConfig,
    train_config: &TrainConfig,
    ablations: &[Ablation],
) -> Result<Vec<ResultRow>> {
    if ablations.is_empty() {
        let r = run_experiment(data, base, train_config)?;
        return Ok(vec![ResultRow::new("full model", &r)]);
    }
    ablations
        .iter()
        .map(|&a| {
            let r = run_experiment(data, &ablated_config(base, Some(a)), train_config)?;
            Ok(ResultRow::new(a.label(), &r))
        })
        .collect()
}

/// Largest triple count the sweep accepts.
pub const MAX_SWEEP_K: usize = 10;

/// Configuration of one sweep point (`k` triples of each kind).
pub fn sweep_config(base: &ModelConfig, k: usize) -> ModelConfig {
    let mut c = base.clone();
    c.k_object_object = k;
    c.k_image_object = k;
    c
}

/// Train + evaluate once per triple count.
pub fn run_triple_sweep(
    data: &ExperimentData,
    base: &ModelConfig,
    train_config: &TrainConfig,
    ks: &[usize],
) -> Result<Vec<ResultRow>> {
    if let Some(k) = ks.iter().find(|&&k| k > MAX_SWEEP_K) {
        return Err(Error::Config(format!("triple count {k} outside 0..={MAX_SWEEP_K}")));
    }
    ks.iter()
        .map(|&k| {
            let r = run_experiment(data, &sweep_config(base, k), train_config)?;
            Ok(ResultRow::new(k.to_string(), &r))
        })
        .collect()
}

pub const TABLE_HEADER: &str = "name\tdev_accuracy\tdev_macro_f1\ttest_accuracy\ttest_macro_f1";

/// Tab-separated table with a header line.
pub fn format_table(rows: &[ResultRow]) -> String {
    let mut out = String::from(TABLE_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{}\t{:.6}\t{:.6}\t{:.6}\t{:.6}\n",
            r.name, r.dev_accuracy, r.dev_macro_f1, r.test_accuracy, r.test_macro_f1
        ));
    }
    out
}

pub fn parse_table(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h == TABLE_HEADER => {}
        _ => return Err(Error::Validation("result table lacks the expected header".into())),
    }
    lines
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| {
            let f: Vec<&str> = l.split('\t').collect();
            let num = |s: &str| {
                s.parse::<f64>()
                    .map_err(|_| Error::Validation(format!("row {}: bad number {s:?}", i + 2)))
            };
            if f.len() != 5 {
                return Err(Error::Validation(format!("row {}: expected 5 fields", i + 2)));
            }
            Ok(ResultRow {
                name: f[0].to_string(),
                dev_accuracy: num(f[1])?,
                dev_macro_f1: num(f[2])?,
                test_accuracy: num(f[3])?,
                test_macro_f1: num(f[4])?,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ablation_names_parse() {
        for a in Ablation::ALL {
            assert_eq!(a.label().parse::<Ablation>().unwrap(), a);
            assert_eq!(a.key().parse::<Ablation>().unwrap(), a);
        }
        assert_eq!("wo-caption".parse::<Ablation>().unwrap(), Ablation::Caption);
        assert!(matches!("w/o image".parse::<Ablation>(), Err(Error::Validation(_))));
    }

    #[test]
    fn flags_applied() {
        let base = ModelConfig::tiny(4);
        let c = ablated_config(&base, Some(Ablation::AdjacencyMatrixAndSceneGraph));
        assert!(!c.flags.use_visibility_matrix && !c.flags.use_scene_graph);
        assert!(c.flags.use_caption);
        assert_eq!(ablated_config(&base, None), base);
    }

    #[test]
    fn table_roundtrip() {
        let rows = vec![ResultRow {
            name: "w/o prompt".into(),
            dev_accuracy: 0.5,
            dev_macro_f1: 0.25,
            test_accuracy: 0.125,
            test_macro_f1: 1.0,
        }];
        assert_eq!(parse_table(&format_table(&rows)).unwrap(), rows);
    }
}
