use std::collections::HashMap;
use std::sync::Arc;

use super::clean::clean_tweet;
use super::io::{CaptionRecord, SceneGraphRecord};
use super::sample::{DatasetSplit, Sample};
use crate::error::{Error, Result};

/// A sample paired with the caption and scene graph of its image.
#[derive(Debug, Clone, PartialEq)]
pub struct JoinedInstance {
    pub sample: Sample,
    pub cleaned_tweet: String,
    pub caption: Option<Arc<CaptionRecord>>,
    pub graph: Arc<SceneGraphRecord>,
}

impl JoinedInstance {
    pub fn caption_text(&self) -> Option<&str> {
        self.caption.as_deref().map(|c| c.caption.as_str())
    }
}

/// Pairs every sample with its caption and scene graph by image id.
///
/// Images without a scene graph get an empty one. A missing caption is an
/// error unless `require_captions` is false (the caption ablation).
pub fn join_sources(
    split: &DatasetSplit,
    captions: &[CaptionRecord],
    graphs: &[SceneGraphRecord],
    require_captions: bool,
) -> Result<Vec<JoinedInstance>> {
    let mut caption_index: HashMap<&str, Arc<CaptionRecord>> = HashMap::new();
    for c in captions {
        if caption_index.insert(c.image_id.as_str(), Arc::new(c.clone())).is_some() {
            return Err(Error::Ingestion(format!(
                "duplicate caption for image_id {:?}",
                c.image_id
            )));
        }
    }
    let mut graph_index: HashMap<&str, Arc<SceneGraphRecord>> = HashMap::new();
    for g in graphs {
        if graph_index.insert(g.image_id.as_str(), Arc::new(g.clone())).is_some() {
            return Err(Error::Ingestion(format!(
                "duplicate scene graph for image_id {:?}",
                g.image_id
            )));
        }
    }

    let mut empty_graphs: HashMap<&str, Arc<SceneGraphRecord>> = HashMap::new();
    split
        .samples
        .iter()
        .map(|sample| {
            let caption = caption_index.get(sample.image_id.as_str()).cloned();
            if caption.is_none() && require_captions {
                return Err(Error::Ingestion(format!(
                    "sample {}: no caption for image_id {:?}",
                    sample.sample_id, sample.image_id
                )));
            }
            let graph = match graph_index.get(sample.image_id.as_str()) {
                Some(g) => g.clone(),
                None => empty_graphs
                    .entry(sample.image_id.as_str())
                    .or_insert_with(|| Arc::new(SceneGraphRecord::empty(sample.image_id.clone())))
                    .clone(),
            };
            Ok(JoinedInstance {
                cleaned_tweet: clean_tweet(sample)?,
                sample: sample.clone(),
                caption,
                graph,
            })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::corpus::{Label, SplitName};

    fn split() -> DatasetSplit {
        let mk = |id: &str, target: &str, label| Sample {
            sample_id: id.into(),
            tweet: "Congrats to Jackson Swisher of Danville !".into(),
            target: target.into(),
            label,
            image_id: "img1".into(),
        };
        DatasetSplit::new(
            SplitName::Train,
            vec![
                mk("a", "Jackson Swisher", Label::Positive),
                mk("b", "Danville", Label::Neutral),
                mk("c", "Congrats", Label::Neutral),
            ],
        )
    }

    fn caption(id: &str) -> CaptionRecord {
        CaptionRecord {
            image_id: id.into(),
            caption: "a man running".into(),
        }
    }

    #[test]
    fn shared_image_shares_records() {
        let joined = join_sources(&split(), &[caption("img1")], &[SceneGraphRecord::empty("img1")], true).unwrap();
        assert_eq!(joined.len(), 3);
        assert!(Arc::ptr_eq(&joined[0].graph, &joined[2].graph));
        assert!(Arc::ptr_eq(
            joined[0].caption.as_ref().unwrap(),
            joined[1].caption.as_ref().unwrap()
        ));
    }

    #[test]
    fn missing_graph_is_empty() {
        let joined = join_sources(&split(), &[caption("img1")], &[], true).unwrap();
        assert!(joined
            .iter()
            .all(|j| j.graph.object_object.is_empty() && j.graph.image_object.is_empty()));
    }

    #[test]
    fn duplicate_caption_rejected() {
        let err = join_sources(&split(), &[caption("img1"), caption("img1")], &[], true);
        assert!(matches!(err, Err(Error::Ingestion(_))));
    }

    #[test]
    fn missing_caption_follows_flag() {
        assert!(join_sources(&split(), &[], &[], true).is_err());
        let joined = join_sources(&split(), &[], &[], false).unwrap();
        assert!(joined.iter().all(|j| j.caption.is_none()));
    }
}
