use rand::Rng as _;

use crate::error::{Error, Result};
use crate::scenegen::SceneGraph;
use crate::seed::Rng;

/// Resampling attempts per distractor before a same-tuple scene is accepted.
pub const MAX_COLLISION_RETRIES: usize = 100;

/// One referential-game round: the target hidden among distractors.
#[derive(Clone, Debug)]
pub struct Round<'a> {
    pub candidates: Vec<&'a SceneGraph>,
    pub target_index: usize,
}

impl<'a> Round<'a> {
    pub fn target(&self) -> &'a SceneGraph {
        self.candidates[self.target_index]
    }
}

/// Uniformly random target, see [`build_round_for_target`].
pub fn build_round<'a>(graphs: &'a [SceneGraph], n_distractors: usize, rng: &mut Rng) -> Result<Round<'a>> {
    check_size(graphs.len(), n_distractors)?;
    let target = rng.random_range(0..graphs.len());
    build_round_for_target(graphs, target, n_distractors, rng)
}

fn check_size(n: usize, n_distractors: usize) -> Result<()> {
    if n_distractors == 0 {
        return Err(Error::config("a round needs at least one distractor"));
    }
    if n <= n_distractors {
        return Err(Error::config(format!(
            "{n} scenes cannot supply a target and {n_distractors} distractors"
        )));
    }
    Ok(())
}

/// Draws distractors without replacement, resampling any whose concept tuple
/// equals the target's (up to [`MAX_COLLISION_RETRIES`] per slot), then
/// inserts the target at a uniform position.
pub fn build_round_for_target<'a>(
    graphs: &'a [SceneGraph],
    target: usize,
    n_distractors: usize,
    rng: &mut Rng,
) -> Result<Round<'a>> {
    check_size(graphs.len(), n_distractors)?;
    if target >= graphs.len() {
        return Err(Error::structural(format!("target {target} out of range")));
    }
    let mut used = vec![target];
    let mut candidates = Vec::with_capacity(n_distractors + 1);
    for _ in 0..n_distractors {
        let mut tries = 0;
        let pick = loop {
            let j = rng.random_range(0..graphs.len());
            if used.contains(&j) {
                continue;
            }
            if graphs[j].tuple != graphs[target].tuple || tries >= MAX_COLLISION_RETRIES {
                break j;
            }
            tries += 1;
        };
        used.push(pick);
        candidates.push(&graphs[pick]);
    }
    let target_index = rng.random_range(0..=n_distractors);
    candidates.insert(target_index, &graphs[target]);
    Ok(Round {
        candidates,
        target_index,
    })
}

/// Scores are clamped into this band before taking logs.
pub const SCORE_CLAMP: f64 = 1e-7;

/// Per-candidate binary cross-entropy, summed:
/// `−log s_target − Σ_{i≠target} log(1 − s_i)`.
pub fn round_loss(scores: &[f64], target_index: usize) -> f64 {
    assert!(target_index < scores.len(), "target index out of range");
    scores
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            let s = s.clamp(SCORE_CLAMP, 1.0 - SCORE_CLAMP);
            if i == target_index {
                -s.ln()
            } else {
                -(1.0 - s).ln()
            }
        })
        .sum()
}

/// `∂ round_loss / ∂ scores`; zero where the clamp is active.
pub fn round_loss_grad(scores: &[f64], target_index: usize) -> Vec<f64> {
    scores
        .iter()
        .enumerate()
        .map(|(i, &s)| {
            if !(SCORE_CLAMP..=1.0 - SCORE_CLAMP).contains(&s) {
                0.0
            } else if i == target_index {
                -1.0 / s
            } else {
                1.0 / (1.0 - s)
            }
        })
        .collect()
}
