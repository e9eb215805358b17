use super::agents::{Listener, Sampling, Speaker};
use super::round::{round_loss, round_loss_grad, Round};
use crate::error::Result;
use crate::nn::{argmax, Gradients, Matrix, ParamStore};

/// Loss, scores and both agents' gradients for one soft-mode round.
#[derive(Clone, Debug)]
pub struct Episode {
    pub loss: f64,
    pub scores: Vec<f64>,
    pub speaker_grads: Gradients,
    pub listener_grads: Gradients,
}

impl Episode {
    pub fn correct(&self, round: &Round<'_>) -> bool {
        argmax(&self.scores) == round.target_index
    }
}

/// Forward only, with explicit parameter stores so either agent can be
/// evaluated at perturbed parameters.
pub fn episode_loss_with(
    speaker: &Speaker,
    speaker_params: &ParamStore,
    listener: &Listener,
    listener_params: &ParamStore,
    round: &Round<'_>,
    noise: &Matrix,
    tau: f64,
) -> Result<f64> {
    let said = speaker
        .net
        .forward(speaker_params, round.target(), Sampling::Relaxed { noise, tau })?;
    let heard = listener
        .net
        .forward(listener_params, &said.message, &round.candidates)?;
    Ok(round_loss(&heard.scores, round.target_index))
}

/// Full forward and backward pass through speaker and listener.
pub fn run_episode(speaker: &Speaker, listener: &Listener, round: &Round<'_>, noise: &Matrix, tau: f64) -> Result<Episode> {
    let said = speaker
        .net
        .forward(&speaker.params, round.target(), Sampling::Relaxed { noise, tau })?;
    let heard = listener
        .net
        .forward(&listener.params, &said.message, &round.candidates)?;
    let loss = round_loss(&heard.scores, round.target_index);
    let d_scores = round_loss_grad(&heard.scores, round.target_index);

    let mut listener_grads = listener.params.gradient_buffer();
    let d_rows = listener
        .net
        .backward(&listener.params, &heard, &said.message, &d_scores, &mut listener_grads)?;
    let mut speaker_grads = speaker.params.gradient_buffer();
    speaker
        .net
        .backward(&speaker.params, &said, &d_rows, &mut speaker_grads)?;
    Ok(Episode {
        loss,
        scores: heard.scores,
        speaker_grads,
        listener_grads,
    })
}
