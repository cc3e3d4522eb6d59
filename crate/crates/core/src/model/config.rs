use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::semgraph::{SequenceConfig, Template};

/// Mechanism switches removed one at a time by the ablation runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct AblationFlags {
    pub use_caption: bool,
    pub use_scene_graph: bool,
    pub use_visibility_matrix: bool,
    pub use_prompt: bool,
    pub freeze_image_encoder: bool,
}

impl Default for AblationFlags {
    fn default() -> Self {
        Self {
            use_caption: true,
            use_scene_graph: true,
            use_visibility_matrix: true,
            use_prompt: true,
            freeze_image_encoder: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelConfig {
    pub d_model: usize,
    pub n_layers_enc: usize,
    pub n_layers_dec: usize,
    pub n_heads: usize,
    pub d_ff: usize,
    /// Additive score for invisible pairs; must underflow the softmax.
    pub delta: f64,
    pub dropout: f64,
    /// Region feature dimensionality.
    pub feature_dim: usize,
    /// Encoder sequence budget.
    pub n_max: usize,
    /// Decoder prompt budget.
    pub n_max_prompt: usize,
    pub label_count: usize,
    pub init_std: f64,
    pub k_object_object: usize,
    pub k_image_object: usize,
    pub template: Template,
    pub flags: AblationFlags,
}

impl ModelConfig {
    /// Smallest useful network; runs in milliseconds on a CPU.
    pub fn tiny(feature_dim: usize) -> Self {
        Self {
            d_model: 32,
            n_layers_enc: 2,
            n_layers_dec: 2,
            n_heads: 4,
            d_ff: 64,
            delta: -1e9,
            dropout: 0.1,
            feature_dim,
            n_max: 128,
            n_max_prompt: 16,
            label_count: 3,
            init_std: 0.1,
            k_object_object: 5,
            k_image_object: 5,
            template: Template::Plain,
            flags: AblationFlags::default(),
        }
    }

    /// Base-size dimensions (6 + 6 layers, 768 hidden, 12 heads).
    pub fn base(feature_dim: usize) -> Self {
        Self {
            d_model: 768,
            n_layers_enc: 6,
            n_layers_dec: 6,
            n_heads: 12,
            d_ff: 3072,
            delta: -1e9,
            dropout: 0.1,
            feature_dim,
            n_max: 512,
            n_max_prompt: 32,
            label_count: 3,
            init_std: 0.02,
            k_object_object: 5,
            k_image_object: 5,
            template: Template::Plain,
            flags: AblationFlags::default(),
        }
    }

    pub fn d_head(&self) -> usize {
        self.d_model / self.n_heads
    }

    pub fn sequence_config(&self) -> SequenceConfig {
        SequenceConfig {
            k_object_object: self.k_object_object,
            k_image_object: self.k_image_object,
            template: self.template,
            use_caption: self.flags.use_caption,
            use_scene_graph: self.flags.use_scene_graph,
            n_max: self.n_max,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if self.d_model == 0 || self.n_heads == 0 || self.d_ff == 0 || self.feature_dim == 0 {
            return fail("d_model, n_heads, d_ff and feature_dim must be positive".into());
        }
        if !self.d_model.is_multiple_of(self.n_heads) {
            return fail(format!(
                "d_model {} is not divisible by n_heads {}",
                self.d_model, self.n_heads
            ));
        }
        if self.delta > -1e4 {
            return fail(format!("delta {} must be at most -1e4", self.delta));
        }
        if !(0.0..1.0).contains(&self.dropout) {
            return fail(format!("dropout {} outside [0, 1)", self.dropout));
        }
        if self.label_count != 3 {
            return fail(format!("label_count must be 3, got {}", self.label_count));
        }
        if self.n_max < 3 || self.n_max_prompt < 4 {
            return fail("sequence budgets too small".into());
        }
        if self.init_std.is_nan() || self.init_std <= 0.0 {
            return fail("init_std must be positive".into());
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_validate() {
        ModelConfig::tiny(4).validate().unwrap();
        ModelConfig::base(2048).validate().unwrap();
    }

    #[test]
    fn rejects_bad_heads_and_delta() {
        let mut c = ModelConfig::tiny(4);
        c.n_heads = 5;
        assert!(c.validate().is_err());
        let mut c = ModelConfig::tiny(4);
        c.delta = -10.0;
        assert!(c.validate().is_err());
        let mut c = ModelConfig::tiny(4);
        c.dropout = 1.0;
        assert!(c.validate().is_err());
    }
}
