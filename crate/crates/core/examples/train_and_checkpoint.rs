//! Trains the tiny model on a generated corpus, saves the selected
//! checkpoint, reloads it and checks that test metrics are reproduced.

use seqcsg::corpus::{join_sources, SplitName};
use seqcsg::harness::{evaluate, run_experiment, ExperimentData, TrainConfig};
use seqcsg::model::{prepare_all, ModelConfig, SentimentModel};
use seqcsg::synthetic::demo_corpus;

fn main() -> anyhow::Result<()> {
    let corpus = demo_corpus(7, [96, 32, 32], 8);
    let join = |name| {
        join_sources(
            corpus.split(name).expect("split"),
            &corpus.captions,
            &corpus.graphs,
            true,
        )
    };
    let data = ExperimentData::new(join(SplitName::Train)?, join(SplitName::Dev)?, join(SplitName::Test)?);

    let config = ModelConfig::tiny(corpus.feature_dim);
    let train_config = TrainConfig {
        epochs: 6,
        batch_size: 8,
        learning_rate: 1e-3,
        ..TrainConfig::default()
    };
    let result = run_experiment(&data, &config, &train_config)?;
    for r in &result.log {
        println!(
            "epoch {:>2} {:<5} loss {:.4} acc {:.3} macro-F1 {:.3}",
            r.epoch, r.split, r.loss, r.accuracy, r.macro_f1
        );
    }
    println!(
        "best epoch {}: test acc {:.3} macro-F1 {:.3} (last epoch: {:.3} / {:.3})",
        result.best_epoch,
        result.test.accuracy,
        result.test.macro_f1,
        result.test_last.accuracy,
        result.test_last.macro_f1
    );

    let dir = tempfile::tempdir()?;
    let path = dir.path().join("checkpoint.json");
    result.model.save(&path)?;
    let reloaded = SentimentModel::load(&path)?;
    let again = evaluate(&reloaded, &prepare_all(&data.test, &config)?)?;
    println!(
        "reloaded checkpoint ({} bytes) reproduces test metrics: {}",
        std::fs::metadata(&path)?.len(),
        again.report == result.test
    );
    Ok(())
}
