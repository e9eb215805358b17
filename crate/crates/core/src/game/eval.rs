use rayon::prelude::*;

use super::agents::{Listener, Speaker};
use super::message::MessageMode;
use super::round::{build_round, build_round_for_target, Round};
use crate::error::{Error, Result};
use crate::metrics::{CorpusRecord, MessageCorpus};
use crate::nn::argmax;
use crate::scenegen::SceneGraph;
use crate::seed::Rng;

/// Per-round outcome, kept for inspection and tests.
#[derive(Clone, Debug, PartialEq)]
pub struct RoundResult {
    pub target_index: usize,
    pub pick: usize,
    pub scores: Vec<f64>,
    pub tokens: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct Evaluation {
    pub accuracy: f64,
    pub corpus: MessageCorpus,
    pub rounds: Vec<RoundResult>,
}

/// Hard-mode evaluation. With `rounds = None` every scene serves once as the
/// target (in dataset order); otherwise `rounds` targets are drawn uniformly.
pub fn evaluate(
    speaker: &Speaker,
    listener: &Listener,
    graphs: &[SceneGraph],
    n_distractors: usize,
    rounds: Option<usize>,
    rng: &mut Rng,
) -> Result<Evaluation> {
    if speaker.dims().vocab != listener.dims().vocab {
        return Err(Error::Incompatible("speaker and listener vocabularies differ".into()));
    }
    let built: Vec<Round<'_>> = match rounds {
        None => (0..graphs.len())
            .map(|t| build_round_for_target(graphs, t, n_distractors, rng))
            .collect::<Result<_>>()?,
        Some(n) => (0..n)
            .map(|_| build_round(graphs, n_distractors, rng))
            .collect::<Result<_>>()?,
    };
    let results = built
        .par_iter()
        .map(|round| {
            let message = speaker.speak(round.target(), 1.0, &mut crate::seed::rng(0), MessageMode::Hard)?;
            let scores = listener.listen_score(&message, &round.candidates)?;
            Ok(RoundResult {
                target_index: round.target_index,
                pick: argmax(&scores),
                scores,
                tokens: message.tokens(),
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let mut corpus = MessageCorpus::new(speaker.dims().vocab.size);
    for (round, res) in built.iter().zip(&results) {
        corpus.push(CorpusRecord::new(&round.target().tuple, res.tokens.clone()))?;
    }
    let correct = results.iter().filter(|r| r.pick == r.target_index).count();
    let accuracy = if results.is_empty() {
        0.0
    } else {
        correct as f64 / results.len() as f64
    };
    Ok(Evaluation {
        accuracy,
        corpus,
        rounds: results,
    })
}
