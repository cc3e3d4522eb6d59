//! The sentiment network: embeddings, visibility-masked encoder, prompt
//! decoder, classification head and checkpoints.

mod attention;
mod checkpoint;
mod config;
mod input;
mod network;
mod params;
mod vocab;
mod xattn;

pub use attention::{masked_self_attention, multi_head_attention, AttentionOutput, AttentionVars, AttentionWeights};
pub use checkpoint::{CHECKPOINT_FORMAT, CHECKPOINT_VERSION};
pub use config::{AblationFlags, ModelConfig};
pub use input::{build_prompt, prepare_all, prepare_input, PreparedInput};
pub use network::{EmbeddedSequence, ForwardOutput, SentimentModel};
pub use params::{Init, Initializer, ParamStore};
pub use vocab::{Vocab, RESERVED, UNK};
pub use xattn::{extract_cross_attention, RegionAttention};
