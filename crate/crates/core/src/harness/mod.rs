//! Training loop, evaluation metrics, ablations and the triple-count sweep.

mod experiment;
mod metrics;
mod optim;
mod train;

pub use experiment::{
    ablated_config, format_table, parse_table, run_ablation, run_experiment, run_experiment_from, run_triple_sweep,
    sweep_config, Ablation, ExperimentData, ExperimentResult, ResultRow, MAX_SWEEP_K, TABLE_HEADER,
};
pub use metrics::{compute_metrics, confusion_matrix, merge_confusion, ClassMetrics, MetricsReport};
pub use optim::{clip_global_norm, AdamW, LinearSchedule};
pub use train::{
    evaluate, train, write_metrics_log, write_predictions, EpochRecord, Evaluation, PredictionRecord, TrainConfig,
    TrainOutcome,
};
