use crate::corpus::{JoinedInstance, Label};
use crate::error::{Error, Result};
use crate::semgraph::{build_graph_input, special, tokenize_text, SemanticSequence, VisibilityMatrix};

use super::config::ModelConfig;

/// Everything the network consumes for one sample.
#[derive(Debug, Clone)]
pub struct PreparedInput {
    pub sample_id: String,
    pub sequence: SemanticSequence,
    pub visibility: VisibilityMatrix,
    /// Region feature for each `[img]` position, in sequence order.
    pub image_features: Vec<(usize, Vec<f64>)>,
    /// Decoder prompt tokens.
    pub prompt: Vec<String>,
    /// Index of `[mask]` inside `prompt`.
    pub mask_position: usize,
    pub label: Option<Label>,
}

/// Decoder prompt `"<target> is [mask] ."`, or just `"[mask]"` without the
/// template. Target tokens beyond the budget are dropped.
pub fn build_prompt(target: &str, use_prompt: bool, n_max_prompt: usize) -> Result<(Vec<String>, usize)> {
    let words = tokenize_text(target);
    if words.is_empty() {
        return Err(Error::Validation("empty target".into()));
    }
    if !use_prompt {
        return Ok((vec![special::MASK.to_string()], 0));
    }
    let room = n_max_prompt.saturating_sub(3).max(1);
    let mut prompt: Vec<String> = words.into_iter().take(room).collect();
    prompt.push("is".into());
    let mask_position = prompt.len();
    prompt.push(special::MASK.into());
    prompt.push(".".into());
    Ok((prompt, mask_position))
}

/// Builds sequence, visibility matrix, region features and prompt.
pub fn prepare_input(instance: &JoinedInstance, config: &ModelConfig) -> Result<PreparedInput> {
    let (sequence, visibility) = build_graph_input(instance, &config.sequence_config())?;
    let mut image_features = Vec::new();
    for pos in sequence.image_positions() {
        let region = sequence.tokens[pos].region_id.clone().unwrap_or_default();
        let feature = instance
            .graph
            .region_features
            .get(&region)
            .ok_or_else(|| Error::FeatureLookup {
                image_id: instance.graph.image_id.clone(),
                region_id: region.clone(),
            })?;
        if feature.len() != config.feature_dim {
            return Err(Error::Contract(format!(
                "region {region:?} of image {:?} has {} features, expected {}",
                instance.graph.image_id,
                feature.len(),
                config.feature_dim
            )));
        }
        image_features.push((pos, feature.clone()));
    }
    let (prompt, mask_position) = build_prompt(&instance.sample.target, config.flags.use_prompt, config.n_max_prompt)?;
    Ok(PreparedInput {
        sample_id: instance.sample.sample_id.clone(),
        sequence,
        visibility,
        image_features,
        prompt,
        mask_position,
        label: Some(instance.sample.label),
    })
}

/// Prepares every instance, stopping at the first failure.
pub fn prepare_all(instances: &[JoinedInstance], config: &ModelConfig) -> Result<Vec<PreparedInput>> {
    instances.iter().map(|i| prepare_input(i, config)).collect()
}
