//! Small dense numerical core with hand-written reverse-mode rules for a
//! fixed architecture. Every differentiable piece exposes a forward pass
//! that returns a cache and a backward pass that accumulates into
//! [`Gradients`]; [`finite_diff_check`] is the reference for all of them.

mod adam;
mod attention;
mod encoder;
mod gcn;
mod gradcheck;
mod gru;
mod gumbel;
mod matrix;
mod params;

pub use adam::Adam;
pub use attention::{attention_backward, attention_pool, AttentionOutput};
pub use encoder::{graph_encode, EncoderDims, GraphEncoderCache, GraphEncoderParams};
pub use gcn::{gcn_backward, gcn_forward, gcn_forward_cached, normalize_adjacency, GcnCache};
pub use gradcheck::{finite_diff_check, GradCheck};
pub use gru::{GruCache, GruParams};
pub use gumbel::{check_tau, gumbel_softmax, relaxed_sample, relaxed_sample_backward, sample_gumbel};
pub use matrix::{
    argmax, axpy, dot, mat_vec_acc, outer_acc, sigmoid, softmax, softmax_backward, vec_mat, vec_mat_acc,
    Matrix,
};
pub use params::{Gradients, ParamId, ParamStore};
