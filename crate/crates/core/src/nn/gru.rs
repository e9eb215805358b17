//! Gated recurrent unit, row-vector convention:
//!
//! ```text
//! z  = σ(x W_z + h U_z + b_z)
//! r  = σ(x W_r + h U_r + b_r)
//! h̃  = tanh(x W_n + (r ⊙ h) U_n + b_n)
//! h' = (1 − z) ⊙ h + z ⊙ h̃
//! ```

use super::matrix::{mat_vec_acc, outer_acc, sigmoid, vec_mat_acc};
use super::params::{Gradients, ParamId, ParamStore};
use crate::error::{Error, Result};
use crate::seed::Rng;

#[derive(Clone, Copy, Debug)]
struct Gate {
    w: ParamId,
    u: ParamId,
    b: ParamId,
}

impl Gate {
    fn new(store: &mut ParamStore, prefix: &str, gate: &str, input: usize, hidden: usize, rng: &mut Rng) -> Result<Self> {
        Ok(Gate {
            w: store.add_glorot(format!("{prefix}.w_{gate}"), input, hidden, rng)?,
            u: store.add_glorot(format!("{prefix}.u_{gate}"), hidden, hidden, rng)?,
            b: store.add_zeros(format!("{prefix}.b_{gate}"), 1, hidden)?,
        })
    }

    fn pre(&self, store: &ParamStore, x: &[f64], h: &[f64]) -> Vec<f64> {
        let mut a = store.value(self.b).as_slice().to_vec();
        vec_mat_acc(x, store.value(self.w), &mut a);
        vec_mat_acc(h, store.value(self.u), &mut a);
        a
    }

    /// Accumulates weight gradients for `a = x W + h U + b` and pushes
    /// `∂L/∂x`, `∂L/∂h` into `dx`, `dh`.
    fn backward(
        &self,
        store: &ParamStore,
        x: &[f64],
        h: &[f64],
        da: &[f64],
        grads: &mut Gradients,
        dx: &mut [f64],
        dh: &mut [f64],
    ) {
        outer_acc(x, da, grads.get_mut(self.w));
        outer_acc(h, da, grads.get_mut(self.u));
        super::matrix::axpy(1.0, da, grads.get_mut(self.b).as_mut_slice());
        mat_vec_acc(store.value(self.w), da, dx);
        mat_vec_acc(store.value(self.u), da, dh);
    }
}

#[derive(Clone, Copy, Debug)]
pub struct GruParams {
    update: Gate,
    reset: Gate,
    candidate: Gate,
    input: usize,
    hidden: usize,
}

#[derive(Clone, Debug)]
pub struct GruCache {
    x: Vec<f64>,
    h: Vec<f64>,
    z: Vec<f64>,
    r: Vec<f64>,
    cand: Vec<f64>,
    reset_h: Vec<f64>,
    pub output: Vec<f64>,
}

impl GruParams {
    pub fn new(store: &mut ParamStore, prefix: &str, input: usize, hidden: usize, rng: &mut Rng) -> Result<Self> {
        Ok(GruParams {
            update: Gate::new(store, prefix, "z", input, hidden, rng)?,
            reset: Gate::new(store, prefix, "r", input, hidden, rng)?,
            candidate: Gate::new(store, prefix, "n", input, hidden, rng)?,
            input,
            hidden,
        })
    }

    pub fn input_dim(&self) -> usize {
        self.input
    }

    pub fn hidden_dim(&self) -> usize {
        self.hidden
    }

    pub fn step(&self, store: &ParamStore, x: &[f64], h: &[f64]) -> Result<Vec<f64>> {
        Ok(self.step_cached(store, x, h)?.output)
    }

    pub fn step_cached(&self, store: &ParamStore, x: &[f64], h: &[f64]) -> Result<GruCache> {
        if x.len() != self.input || h.len() != self.hidden {
            return Err(Error::structural(format!(
                "gru_step expects input {} / hidden {}, got {} / {}",
                self.input,
                self.hidden,
                x.len(),
                h.len()
            )));
        }
        let z: Vec<f64> = self.update.pre(store, x, h).into_iter().map(sigmoid).collect();
        let r: Vec<f64> = self.reset.pre(store, x, h).into_iter().map(sigmoid).collect();
        let reset_h: Vec<f64> = r.iter().zip(h).map(|(a, b)| a * b).collect();
        let cand: Vec<f64> = self
            .candidate
            .pre(store, x, &reset_h)
            .into_iter()
            .map(f64::tanh)
            .collect();
        let output = (0..self.hidden)
            .map(|k| (1.0 - z[k]) * h[k] + z[k] * cand[k])
            .collect();
        Ok(GruCache {
            x: x.to_vec(),
            h: h.to_vec(),
            z,
            r,
            cand,
            reset_h,
            output,
        })
    }

    /// Returns `(∂L/∂x, ∂L/∂h)` given `∂L/∂h'`.
    pub fn backward(
        &self,
        store: &ParamStore,
        cache: &GruCache,
        d_out: &[f64],
        grads: &mut Gradients,
    ) -> (Vec<f64>, Vec<f64>) {
        let n = self.hidden;
        let mut dx = vec![0.0; self.input];
        let mut dh: Vec<f64> = (0..n).map(|k| d_out[k] * (1.0 - cache.z[k])).collect();

        let d_cand_pre: Vec<f64> = (0..n)
            .map(|k| d_out[k] * cache.z[k] * (1.0 - cache.cand[k] * cache.cand[k]))
            .collect();
        let mut d_reset_h = vec![0.0; n];
        self.candidate.backward(
            store,
            &cache.x,
            &cache.reset_h,
            &d_cand_pre,
            grads,
            &mut dx,
            &mut d_reset_h,
        );
        let d_reset_pre: Vec<f64> = (0..n)
            .map(|k| {
                dh[k] += d_reset_h[k] * cache.r[k];
                d_reset_h[k] * cache.h[k] * cache.r[k] * (1.0 - cache.r[k])
            })
            .collect();
        let d_update_pre: Vec<f64> = (0..n)
            .map(|k| d_out[k] * (cache.cand[k] - cache.h[k]) * cache.z[k] * (1.0 - cache.z[k]))
            .collect();

        self.reset
            .backward(store, &cache.x, &cache.h, &d_reset_pre, grads, &mut dx, &mut dh);
        self.update
            .backward(store, &cache.x, &cache.h, &d_update_pre, grads, &mut dx, &mut dh);
        (dx, dh)
    }
}
