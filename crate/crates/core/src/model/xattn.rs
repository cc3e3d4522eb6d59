use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

use super::network::ForwardOutput;

/// Decoder cross-attention from the `[mask]` position onto the `[img]`
/// encoder positions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionAttention {
    pub image_positions: Vec<usize>,
    pub region_ids: Vec<String>,
    /// `[layer][head][region]`.
    pub weights: Vec<Vec<Vec<f64>>>,
    /// Mean over layers and heads, per region.
    pub mean: Vec<f64>,
    /// `[layer][head]` sum of the unrestricted row over all encoder positions.
    pub row_sums: Vec<Vec<f64>>,
}

impl RegionAttention {
    pub fn is_empty(&self) -> bool {
        self.image_positions.is_empty()
    }

    /// Weights of one decoder layer averaged over heads.
    pub fn layer_mean(&self, layer: usize) -> Vec<f64> {
        let heads = &self.weights[layer];
        let mut out = vec![0.0; self.image_positions.len()];
        for h in heads {
            for (o, w) in out.iter_mut().zip(h) {
                *o += w / heads.len() as f64;
            }
        }
        out
    }
}

/// Restricts the retained cross-attention rows at `mask_position` to the
/// given `[img]` positions. No positions gives an empty result.
pub fn extract_cross_attention(
    out: &ForwardOutput,
    image_positions: &[usize],
    region_ids: &[String],
    mask_position: usize,
) -> Result<RegionAttention> {
    if out.cross_attention.is_empty() {
        return Err(Error::Contract("forward pass did not retain attention".into()));
    }
    if image_positions.len() != region_ids.len() {
        return Err(Error::Contract("one region id per image position required".into()));
    }
    let mut weights = Vec::new();
    let mut row_sums = Vec::new();
    for layer in &out.cross_attention {
        let mut lw = Vec::new();
        let mut ls = Vec::new();
        for head in layer {
            if mask_position >= head.rows() {
                return Err(Error::Contract(format!(
                    "mask position {mask_position} outside the prompt"
                )));
            }
            let row = head.row(mask_position);
            if let Some(&p) = image_positions.iter().find(|&&p| p >= row.len()) {
                return Err(Error::Contract(format!("image position {p} outside the sequence")));
            }
            lw.push(image_positions.iter().map(|&p| row[p]).collect::<Vec<_>>());
            ls.push(row.iter().sum());
        }
        weights.push(lw);
        row_sums.push(ls);
    }
    let cells = weights.iter().map(Vec::len).sum::<usize>() as f64;
    let mut mean = vec![0.0; image_positions.len()];
    for layer in &weights {
        for head in layer {
            for (m, w) in mean.iter_mut().zip(head) {
                *m += w / cells;
            }
        }
    }
    Ok(RegionAttention {
        image_positions: image_positions.to_vec(),
        region_ids: region_ids.to_vec(),
        weights,
        mean,
        row_sums,
    })
}
