//! Sequential cross-modal semantic graph: triple selection and
//! serialization, encoder-input assembly and the visibility matrix.

mod pipeline;
mod sequence;
mod token;
mod visibility;

pub use pipeline::{build_graph_input, build_sequence, SequenceConfig};
pub use sequence::{
    assemble_input, assign_entity_groups, select_triples, serialize_triples, truncate, SelectedTriples,
    SemanticSequence, Template,
};
pub use token::{normalize_entity, special, tokenize_text, Token, TokenRole};
pub use visibility::{build_visibility_matrix, VisibilityMatrix};
