//! Trains briefly, then extracts the decoder cross-attention from `[mask]`
//! onto the `[img]` tokens of one test sample and saves a heatmap PNG.

use seqcsg::corpus::{join_sources, SplitName};
use seqcsg::harness::{run_experiment, ExperimentData, TrainConfig};
use seqcsg::model::{extract_cross_attention, prepare_input, ModelConfig};
use seqcsg::synthetic::demo_corpus;
use seqcsg::viz::{write_heatmap_png, HeatmapWeights};

fn main() -> anyhow::Result<()> {
    let corpus = demo_corpus(3, [60, 20, 20], 8);
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
        epochs: 3,
        batch_size: 8,
        learning_rate: 1e-3,
        ..TrainConfig::default()
    };
    let model = run_experiment(&data, &config, &train_config)?.model;

    let (instance, input) = data
        .test
        .iter()
        .map(|i| prepare_input(i, &config).map(|p| (i, p)))
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .max_by_key(|(_, p)| p.image_features.len())
        .expect("test split is not empty");
    let positions = input.sequence.image_positions();
    anyhow::ensure!(!positions.is_empty(), "no test sample has [img] tokens");
    let regions: Vec<String> = positions
        .iter()
        .map(|&p| input.sequence.tokens[p].region_id.clone().unwrap_or_default())
        .collect();

    let forward = model.forward(&input, true)?;
    let attention = extract_cross_attention(&forward, &positions, &regions, input.mask_position)?;
    println!(
        "sample {} target {:?}",
        instance.sample.sample_id, instance.sample.target
    );
    for (region, w) in regions.iter().zip(&attention.mean) {
        println!("  {region}: {w:.4}");
    }
    let weights = HeatmapWeights {
        sample_id: instance.sample.sample_id.clone(),
        attention,
    };
    write_heatmap_png(std::path::Path::new("heatmap.png"), &weights)?;
    println!("wrote heatmap.png");
    Ok(())
}
