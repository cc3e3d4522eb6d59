use serde::{Deserialize, Serialize};

use super::sequence::{assemble_input, select_triples, serialize_triples, truncate, SemanticSequence, Template};
use super::visibility::{build_visibility_matrix, VisibilityMatrix};
use crate::corpus::JoinedInstance;
use crate::error::Result;

/// Knobs controlling how a joined instance becomes an encoder sequence.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SequenceConfig {
    pub k_object_object: usize,
    pub k_image_object: usize,
    pub template: Template,
    pub use_caption: bool,
    pub use_scene_graph: bool,
    pub n_max: usize,
}

impl Default for SequenceConfig {
    fn default() -> Self {
        Self {
            k_object_object: 5,
            k_image_object: 5,
            template: Template::Plain,
            use_caption: true,
            use_scene_graph: true,
            n_max: 512,
        }
    }
}

/// Builds the (truncated) encoder sequence of one instance.
pub fn build_sequence(instance: &JoinedInstance, config: &SequenceConfig) -> Result<SemanticSequence> {
    let triple_tokens = if config.use_scene_graph {
        let selected = select_triples(&instance.graph, config.k_object_object, config.k_image_object);
        serialize_triples(&selected)
    } else {
        Vec::new()
    };
    let caption = if config.use_caption {
        instance.caption_text()
    } else {
        None
    };
    let seq = assemble_input(&triple_tokens, caption, &instance.cleaned_tweet, config.template);
    truncate(&seq, config.n_max)
}

/// Sequence plus its visibility matrix.
pub fn build_graph_input(
    instance: &JoinedInstance,
    config: &SequenceConfig,
) -> Result<(SemanticSequence, VisibilityMatrix)> {
    let seq = build_sequence(instance, config)?;
    let m = build_visibility_matrix(&seq);
    Ok((seq, m))
}
