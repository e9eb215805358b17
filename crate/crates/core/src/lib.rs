//! Emergent-communication laboratory over synthetic dining-scene knowledge graphs.
//!
//! A speaker agent encodes a target scene graph and emits a fixed-length
//! discrete message; a listener agent decodes the message and scores a set of
//! candidate scenes. Both are trained jointly through a Gumbel-Softmax
//! relaxation, and the resulting language is analysed with topographic
//! similarity, context independence and token-distribution statistics.
//!
//! Modules:
//! - [`scenegen`]: procedural dining scenes and their kNN scene graphs.
//! - [`nn`]: dense matrices, GCN/attention/GRU layers with hand-written
//!   backward passes, Gumbel-Softmax sampling, Adam, gradient checking.
//! - [`game`]: the referential game, training loop and evaluation.
//! - [`metrics`]: compositionality and token-usage measures.
//! - [`cli`]: experiment driver behind the `kgec` binary.

pub mod cli;
pub mod codec;
pub mod error;
pub mod game;
pub mod metrics;
pub mod nn;
pub mod scenegen;
pub mod seed;

pub use error::{Error, Result};
