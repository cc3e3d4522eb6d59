//! Target-oriented multi-modal sentiment classification over a sequential
//! cross-modal semantic graph.
//!
//! An image's scene-graph triples, its caption and the tweet are serialized
//! into one encoder sequence whose self-attention is gated by a visibility
//! matrix. The decoder reads a target prompt `"<target> is [mask] ."` and
//! the hidden state at `[mask]` is classified into negative, neutral or
//! positive.
//!
//! * [`corpus`] loads and joins the three input files.
//! * [`semgraph`] builds the sequence and its visibility matrix.
//! * [`model`] is the encoder-decoder network.
//! * [`harness`] trains, evaluates, ablates and sweeps.

pub mod autograd;
pub mod cli;
pub mod corpus;
pub mod error;
pub mod harness;
pub mod model;
pub mod semgraph;
pub mod synthetic;
pub mod tensor;
pub mod viz;

pub use error::{Error, ErrorFamily, Result};
