//! Small generated corpora with captions, scene graphs and region features.
//!
//! The overfit corpus pairs every tweet with two targets of different
//! sentiment, so a classifier can only fit it by looking at which target is
//! asked about. The demo corpus is a larger train/dev/test set whose labels
//! follow the target's name, used by the examples and the CLI walkthrough.

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use rand::seq::IndexedRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::corpus::{
    write_captions, write_scene_graphs, write_split, CaptionRecord, DatasetSplit, ImageTriple, Label, ObjectTriple,
    Sample, SceneGraphFile, SceneGraphRecord, SplitName,
};
use crate::error::Result;

const POSITIVE_NAMES: [&str; 4] = ["Alice", "Carol", "Erin", "Oscar"];
const NEGATIVE_NAMES: [&str; 4] = ["Bob", "Dave", "Frank", "Mallory"];
const NEUTRAL_NAMES: [&str; 4] = ["Grace", "Heidi", "Ivan", "Judy"];
const PLACES: [&str; 6] = ["park", "stadium", "beach", "museum", "market", "concert"];
const OBJECTS: [&str; 6] = ["man", "woman", "dog", "ball", "car", "tree"];
const PREDICATES: [&str; 4] = ["near", "holding", "behind", "on"];

/// Dataset split(s) plus the image-side files they refer to.
#[derive(Debug, Clone)]
pub struct SyntheticCorpus {
    pub splits: Vec<DatasetSplit>,
    pub captions: Vec<CaptionRecord>,
    pub graphs: Vec<SceneGraphRecord>,
    pub feature_dim: usize,
}

impl SyntheticCorpus {
    pub fn split(&self, name: SplitName) -> Option<&DatasetSplit> {
        self.splits.iter().find(|s| s.name == name)
    }

    /// Writes `<split>.tsv`, `captions.jsonl` and `scene_graphs.jsonl`.
    pub fn write_to(&self, dir: &Path) -> Result<()> {
        fs::create_dir_all(dir)?;
        for split in &self.splits {
            write_split(dir.join(format!("{}.tsv", split.name.as_str())), split)?;
        }
        write_captions(dir.join("captions.jsonl"), &self.captions)?;
        write_scene_graphs(
            dir.join("scene_graphs.jsonl"),
            &SceneGraphFile {
                feature_dim: self.feature_dim,
                records: self.graphs.clone(),
            },
        )
    }
}

fn names(label: Label) -> &'static [&'static str; 4] {
    match label {
        Label::Positive => &POSITIVE_NAMES,
        Label::Negative => &NEGATIVE_NAMES,
        Label::Neutral => &NEUTRAL_NAMES,
    }
}

fn image_record(image_id: &str, rng: &mut ChaCha8Rng, feature_dim: usize) -> (CaptionRecord, SceneGraphRecord) {
    let a = *OBJECTS.choose(rng).expect("non-empty");
    let b = *OBJECTS.choose(rng).expect("non-empty");
    let pred = *PREDICATES.choose(rng).expect("non-empty");
    let mut graph = SceneGraphRecord::empty(image_id);
    graph.object_object.push(ObjectTriple {
        subject: a.into(),
        predicate: pred.into(),
        object: b.into(),
        score: 0.9,
    });
    graph.object_object.push(ObjectTriple {
        subject: b.into(),
        predicate: "near".into(),
        object: "tree".into(),
        score: 0.6,
    });
    for (i, obj) in [a, b].iter().enumerate() {
        let region = format!("r{i}");
        graph.image_object.push(ImageTriple {
            region_id: region.clone(),
            object: (*obj).into(),
            score: 0.8 - 0.1 * i as f64,
        });
        let feature: Vec<f64> = (0..feature_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        graph.region_features.insert(region, feature);
    }
    let caption = CaptionRecord {
        image_id: image_id.into(),
        caption: format!("a {a} {pred} a {b}"),
    };
    (caption, graph)
}

/// Twenty training samples: ten tweets, each with two targets whose labels
/// differ.
pub fn overfit_corpus() -> SyntheticCorpus {
    let feature_dim = 4;
    let mut rng = ChaCha8Rng::seed_from_u64(20);
    let pairs = [
        (Label::Positive, Label::Negative),
        (Label::Negative, Label::Neutral),
        (Label::Neutral, Label::Positive),
        (Label::Positive, Label::Neutral),
        (Label::Negative, Label::Positive),
        (Label::Neutral, Label::Negative),
        (Label::Positive, Label::Negative),
        (Label::Negative, Label::Neutral),
        (Label::Neutral, Label::Positive),
        (Label::Positive, Label::Neutral),
    ];
    let mut samples = Vec::new();
    let mut captions = Vec::new();
    let mut graphs = Vec::new();
    for (i, (la, lb)) in pairs.iter().enumerate() {
        let a = names(*la)[i % 4];
        let b = names(*lb)[(i + 1) % 4];
        let place = PLACES[i % PLACES.len()];
        let tweet = format!("{a} and {b} at the {place} today");
        let image_id = format!("img{i:02}.jpg");
        for (j, (target, label)) in [(a, *la), (b, *lb)].into_iter().enumerate() {
            samples.push(
                Sample::new(
                    format!("s{:02}", 2 * i + j),
                    tweet.clone(),
                    target,
                    label,
                    image_id.clone(),
                )
                .expect("generated sample is valid"),
            );
        }
        let (c, g) = image_record(&image_id, &mut rng, feature_dim);
        captions.push(c);
        graphs.push(g);
    }
    SyntheticCorpus {
        splits: vec![DatasetSplit::new(SplitName::Train, samples)],
        captions,
        graphs,
        feature_dim,
    }
}

/// Train/dev/test splits of the given sizes (in samples). Labels follow the
/// target name; about half the tweets mention a second target.
pub fn demo_corpus(seed: u64, sizes: [usize; 3], feature_dim: usize) -> SyntheticCorpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut captions = Vec::new();
    let mut graphs = Vec::new();
    let mut splits = Vec::new();
    let mut image_counter = 0usize;
    for (name, size) in SplitName::ALL.into_iter().zip(sizes) {
        let mut samples: Vec<Sample> = Vec::with_capacity(size);
        while samples.len() < size {
            let image_id = format!("img{image_counter:04}.jpg");
            image_counter += 1;
            let la = Label::ALL[rng.random_range(0..3)];
            let a = *names(la).choose(&mut rng).expect("non-empty");
            let place = *PLACES.choose(&mut rng).expect("non-empty");
            let second = rng.random_bool(0.5) && samples.len() + 1 < size;
            let mut mentions = vec![(a, la)];
            let tweet = if second {
                let lb = Label::ALL[(la.index() + rng.random_range(1..3)) % 3];
                let b = *names(lb).choose(&mut rng).expect("non-empty");
                mentions.push((b, lb));
                format!("{a} met {b} at the {place}")
            } else {
                format!("{a} spent the day at the {place}")
            };
            for (target, label) in mentions {
                let id = format!("{}-{:05}", name.as_str(), samples.len());
                samples.push(
                    Sample::new(id, tweet.clone(), target, label, image_id.clone()).expect("generated sample is valid"),
                );
            }
            let (c, g) = image_record(&image_id, &mut rng, feature_dim);
            captions.push(c);
            graphs.push(g);
        }
        splits.push(DatasetSplit::new(name, samples));
    }
    SyntheticCorpus {
        splits,
        captions,
        graphs,
        feature_dim,
    }
}

/// Label counts of a split, keyed by label name.
pub fn label_histogram(split: &DatasetSplit) -> BTreeMap<&'static str, usize> {
    let counts = split.class_counts();
    Label::ALL.iter().map(|l| (l.as_str(), counts[l.index()])).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn overfit_corpus_shape() {
        let c = overfit_corpus();
        let train = c.split(SplitName::Train).unwrap();
        assert_eq!(train.len(), 20);
        for pair in train.samples.chunks(2) {
            assert_eq!(pair[0].tweet, pair[1].tweet);
            assert_ne!(pair[0].label, pair[1].label);
        }
        let h = label_histogram(train);
        assert!(h.values().all(|&n| n > 0));
    }

    #[test]
    fn demo_corpus_sizes_and_determinism() {
        let a = demo_corpus(5, [30, 10, 10], 6);
        let b = demo_corpus(5, [30, 10, 10], 6);
        assert_eq!(a.splits, b.splits);
        assert_eq!(a.splits.iter().map(|s| s.len()).collect::<Vec<_>>(), vec![30, 10, 10]);
        for g in &a.graphs {
            g.check(6).unwrap();
        }
    }
}
