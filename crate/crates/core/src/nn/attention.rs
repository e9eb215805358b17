//! Additive attention pooling: `s_j = v · tanh(W_a h_j)`, `w = softmax(s)`,
//! `J = Σ_j w_j h_j`.

use super::matrix::{dot, outer_acc, softmax, softmax_backward, Matrix};
use crate::error::{Error, Result};

#[derive(Clone, Debug)]
pub struct AttentionOutput {
    pub pooled: Vec<f64>,
    pub weights: Vec<f64>,
    /// `tanh(H · W_a)`, one row per node.
    activations: Matrix,
}

/// `w_a` is `h×h` and applied as `h_j · W_a` (row-vector convention);
/// `v` has length `h`.
pub fn attention_pool(h: &Matrix, w_a: &Matrix, v: &[f64]) -> Result<AttentionOutput> {
    let (n, dim) = h.shape();
    if n == 0 {
        return Err(Error::structural("attention over an empty node set"));
    }
    if w_a.shape() != (dim, dim) || v.len() != dim {
        return Err(Error::structural(format!(
            "attention weights {:?}/{} do not match {dim}-dim nodes",
            w_a.shape(),
            v.len()
        )));
    }
    let activations = h.matmul(w_a)?.map(f64::tanh);
    let scores: Vec<f64> = (0..n).map(|j| dot(activations.row(j), v)).collect();
    let weights = softmax(&scores);
    let mut pooled = vec![0.0; dim];
    for (j, &wj) in weights.iter().enumerate() {
        super::matrix::axpy(wj, h.row(j), &mut pooled);
    }
    Ok(AttentionOutput {
        pooled,
        weights,
        activations,
    })
}

/// Backward of [`attention_pool`]. Accumulates into `dw_a`/`dv` and returns
/// `∂L/∂H`.
pub fn attention_backward(
    h: &Matrix,
    w_a: &Matrix,
    v: &[f64],
    out: &AttentionOutput,
    d_pooled: &[f64],
    dw_a: &mut Matrix,
    dv: &mut [f64],
) -> Result<Matrix> {
    let (n, dim) = h.shape();
    if d_pooled.len() != dim {
        return Err(Error::structural("attention_backward: gradient length mismatch"));
    }
    let mut dh = Matrix::zeros(n, dim);
    let mut d_weights = vec![0.0; n];
    for j in 0..n {
        super::matrix::axpy(out.weights[j], d_pooled, dh.row_mut(j));
        d_weights[j] = dot(h.row(j), d_pooled);
    }
    let d_scores = softmax_backward(&out.weights, &d_weights);
    // s_j = v · t_j  →  dv += Σ_j ds_j t_j,  dt_j = ds_j v
    let mut d_pre = Matrix::zeros(n, dim);
    for j in 0..n {
        let t = out.activations.row(j);
        super::matrix::axpy(d_scores[j], t, dv);
        for ((dp, &tk), &vk) in d_pre.row_mut(j).iter_mut().zip(t).zip(v) {
            *dp = d_scores[j] * vk * (1.0 - tk * tk);
        }
    }
    for j in 0..n {
        outer_acc(h.row(j), d_pre.row(j), dw_a);
    }
    dh.add_assign(&d_pre.matmul_t(w_a)?)?;
    Ok(dh)
}
