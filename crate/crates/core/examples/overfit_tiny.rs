//! Fits the tiny model to the 20-sample synthetic corpus, with and without
//! the decoder prompt, and prints the per-sample predictions of one
//! same-sentence pair.

use seqcsg::corpus::{join_sources, SplitName};
use seqcsg::harness::{evaluate, train, TrainConfig};
use seqcsg::model::{prepare_all, ModelConfig, SentimentModel, Vocab};
use seqcsg::synthetic::overfit_corpus;

fn main() -> anyhow::Result<()> {
    let corpus = overfit_corpus();
    let split = corpus.split(SplitName::Train).expect("train split");
    let joined = join_sources(split, &corpus.captions, &corpus.graphs, true)?;
    let vocab = Vocab::build(&joined, 1);

    for use_prompt in [true, false] {
        let mut config = ModelConfig::tiny(corpus.feature_dim);
        config.flags.use_prompt = use_prompt;
        let inputs = prepare_all(&joined, &config)?;
        let model = SentimentModel::new(config, vocab.clone(), 7)?;
        let train_config = TrainConfig {
            epochs: 40,
            batch_size: 4,
            learning_rate: 1e-3,
            seed: 7,
            ..TrainConfig::default()
        };
        let start = std::time::Instant::now();
        let outcome = train(model, &inputs, &inputs, &train_config)?;
        let eval = evaluate(&outcome.last, &inputs)?;
        println!(
            "use_prompt={use_prompt}: {} steps in {:.1?}, train accuracy {:.3}, macro-F1 {:.3}",
            outcome.steps,
            start.elapsed(),
            eval.report.accuracy,
            eval.report.macro_f1
        );
        for p in eval.predictions.iter().take(2) {
            println!(
                "  {} gold={} predicted={}",
                p.sample_id,
                p.gold.as_str(),
                p.predicted.as_str()
            );
        }
    }
    Ok(())
}
