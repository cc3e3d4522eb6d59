//! Writes a generated corpus to a temporary directory, breaks one caption
//! record, and shows what the validators and loaders report.

use std::fs;

use seqcsg::corpus::{
    load_split, split_stats, validate_caption_file, validate_dataset_file, validate_scene_graph_file, SplitName,
};
use seqcsg::synthetic::demo_corpus;

fn main() -> anyhow::Result<()> {
    let dir = tempfile::tempdir()?;
    let corpus = demo_corpus(1, [30, 10, 10], 4);
    corpus.write_to(dir.path())?;

    for name in SplitName::ALL {
        let path = dir.path().join(format!("{name}.tsv"));
        let stats = split_stats(&load_split(&path, name)?);
        println!(
            "{name}: {} samples (pos {}, neu {}, neg {}), {:.2} targets per sentence",
            stats.total, stats.positive, stats.neutral, stats.negative, stats.targets_per_sentence
        );
        println!("  findings: {}", validate_dataset_file(&path).len());
    }
    let graphs = dir.path().join("scene_graphs.jsonl");
    println!("scene graphs findings: {}", validate_scene_graph_file(&graphs).len());

    let captions = dir.path().join("captions.jsonl");
    let mut text = fs::read_to_string(&captions)?;
    let first = text.lines().next().unwrap_or_default().to_string();
    text.push_str(&first);
    text.push('\n');
    fs::write(&captions, text)?;
    for finding in validate_caption_file(&captions) {
        println!("{finding}");
    }
    Ok(())
}
