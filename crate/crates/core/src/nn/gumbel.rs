//! Gumbel-Softmax relaxation of categorical sampling.
//!
//! `y = softmax((π + g) / τ)` with `g_k = −log(−log u_k)`, `u_k ~ U(0, 1)`.
//! Raw logits are used in place of log-probabilities; the two differ by a
//! per-row constant that softmax cancels.

use rand::distr::{Distribution, Open01};

use super::matrix::{softmax, softmax_backward};
use crate::error::{Error, Result};
use crate::seed::Rng;

pub fn sample_gumbel(n: usize, rng: &mut Rng) -> Vec<f64> {
    (0..n)
        .map(|_| {
            let u: f64 = Open01.sample(rng);
            -(-u.ln()).ln()
        })
        .collect()
}

pub fn check_tau(tau: f64) -> Result<()> {
    if tau > 0.0 && tau.is_finite() {
        Ok(())
    } else {
        Err(Error::config(format!("temperature must be positive, got {tau}")))
    }
}

pub fn gumbel_softmax(logits: &[f64], tau: f64, rng: &mut Rng) -> Result<Vec<f64>> {
    check_tau(tau)?;
    let noise = sample_gumbel(logits.len(), rng);
    relaxed_sample(logits, &noise, tau)
}

/// Deterministic part of [`gumbel_softmax`] with the noise supplied.
pub fn relaxed_sample(logits: &[f64], noise: &[f64], tau: f64) -> Result<Vec<f64>> {
    check_tau(tau)?;
    if logits.len() != noise.len() {
        return Err(Error::structural("gumbel noise length mismatch"));
    }
    if logits.iter().any(|l| !l.is_finite()) {
        return Err(Error::numerical("non-finite logits"));
    }
    let perturbed: Vec<f64> = logits.iter().zip(noise).map(|(l, g)| (l + g) / tau).collect();
    Ok(softmax(&perturbed))
}

/// `∂L/∂logits` given the sample `y` and `∂L/∂y`, noise held constant.
pub fn relaxed_sample_backward(y: &[f64], dy: &[f64], tau: f64) -> Vec<f64> {
    let mut d = softmax_backward(y, dy);
    d.iter_mut().for_each(|v| *v /= tau);
    d
}
