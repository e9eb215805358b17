//! Central-difference gradient verification.

use super::params::ParamStore;
use crate::error::{Error, Result};

/// Outcome of a [`finite_diff_check`].
#[derive(Clone, Debug)]
pub struct GradCheck {
    pub max_rel_err: f64,
    /// Parameter name and flat index of the worst coordinate.
    pub worst: Option<(String, usize)>,
    pub coordinates: usize,
}

/// Compares the gradients accumulated in `params` against central
/// differences `(f(p+ε) − f(p−ε)) / 2ε`, one coordinate at a time.
///
/// Relative error per coordinate is `|a − n| / max(|a|, |n|, 1e-8)`.
pub fn finite_diff_check<F>(mut f: F, params: &ParamStore, epsilon: f64) -> Result<GradCheck>
where
    F: FnMut(&ParamStore) -> Result<f64>,
{
    if !(epsilon > 0.0) {
        return Err(Error::config(format!("epsilon must be positive, got {epsilon}")));
    }
    let mut probe = params.clone();
    let mut report = GradCheck {
        max_rel_err: 0.0,
        worst: None,
        coordinates: 0,
    };
    for id in params.ids() {
        for k in 0..params.value(id).as_slice().len() {
            let original = params.value(id).as_slice()[k];
            probe.value_mut(id).as_mut_slice()[k] = original + epsilon;
            let plus = f(&probe)?;
            probe.value_mut(id).as_mut_slice()[k] = original - epsilon;
            let minus = f(&probe)?;
            probe.value_mut(id).as_mut_slice()[k] = original;
            if !plus.is_finite() || !minus.is_finite() {
                return Err(Error::numerical(format!(
                    "objective not finite when perturbing {}[{k}]",
                    params.name(id)
                )));
            }
            let numeric = (plus - minus) / (2.0 * epsilon);
            let analytic = params.grad(id).as_slice()[k];
            let rel = (analytic - numeric).abs() / analytic.abs().max(numeric.abs()).max(1e-8);
            report.coordinates += 1;
            if rel > report.max_rel_err || report.worst.is_none() {
                report.max_rel_err = rel;
                report.worst = Some((params.name(id).to_string(), k));
            }
        }
    }
    Ok(report)
}
