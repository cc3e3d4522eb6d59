//! Runs the full model and each of the five ablations on a generated corpus
//! and prints the result table.

use seqcsg::corpus::{join_sources, SplitName};
use seqcsg::harness::{format_table, run_ablation, Ablation, ExperimentData, TrainConfig};
use seqcsg::model::ModelConfig;
use seqcsg::synthetic::demo_corpus;

fn main() -> anyhow::Result<()> {
    let corpus = demo_corpus(11, [60, 20, 20], 8);
    let join = |name| {
        join_sources(
            corpus.split(name).expect("split"),
            &corpus.captions,
            &corpus.graphs,
            false,
        )
    };
    let data = ExperimentData::new(join(SplitName::Train)?, join(SplitName::Dev)?, join(SplitName::Test)?);
    let config = ModelConfig::tiny(corpus.feature_dim);
    let train_config = TrainConfig {
        epochs: 3,
        batch_size: 8,
        learning_rate: 1e-3,
        ..TrainConfig::default()
    };
    let mut rows = run_ablation(&data, &config, &train_config, &[])?;
    rows.extend(run_ablation(&data, &config, &train_config, &Ablation::ALL)?);
    print!("{}", format_table(&rows));
    Ok(())
}
