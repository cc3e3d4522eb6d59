//! Varies the number of kept triples per kind and writes the curve as a
//! table and an SVG plot into the current directory.

use seqcsg::corpus::{join_sources, SplitName};
use seqcsg::harness::{format_table, run_triple_sweep, ExperimentData, TrainConfig};
use seqcsg::model::ModelConfig;
use seqcsg::synthetic::demo_corpus;
use seqcsg::viz::plot_rows_svg;

fn main() -> anyhow::Result<()> {
    let corpus = demo_corpus(5, [60, 20, 20], 8);
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
        epochs: 2,
        batch_size: 8,
        learning_rate: 1e-3,
        ..TrainConfig::default()
    };
    let ks: Vec<usize> = (0..=10).step_by(2).collect();
    let rows = run_triple_sweep(&data, &config, &train_config, &ks)?;
    let table = format_table(&rows);
    print!("{table}");
    std::fs::write("sweep.tsv", &table)?;
    std::fs::write("sweep.svg", plot_rows_svg(&rows, "triples per kind"))?;
    println!("wrote sweep.tsv and sweep.svg");
    Ok(())
}
