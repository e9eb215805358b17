use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::agents::{AgentDims, Listener, ModelDims, Speaker};
use super::encoder::EncoderKind;
use super::episode::{run_episode, Episode};
use super::message::Vocabulary;
use super::round::build_round_for_target;
use crate::error::{Error, Result};
use crate::nn::{check_tau, Adam};
use crate::scenegen::SceneGraph;
use crate::seed;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub vocab: Vocabulary,
    pub n_distractors: usize,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub tau: f64,
    pub seed: u64,
    pub encoder: EncoderKind,
    pub model: ModelDims,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            vocab: Vocabulary { size: 10, length: 10 },
            n_distractors: 5,
            batch_size: 32,
            epochs: 100,
            learning_rate: 1e-3,
            tau: 1.0,
            seed: 0,
            encoder: EncoderKind::Vag,
            model: ModelDims::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        self.vocab.validate()?;
        check_tau(self.tau)?;
        if self.n_distractors < 1 {
            return Err(Error::config("need at least one distractor"));
        }
        if self.batch_size < 1 {
            return Err(Error::config("batch size must be positive"));
        }
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::config(format!("bad learning rate {}", self.learning_rate)));
        }
        Ok(())
    }

    pub fn agent_dims(&self, feature_dim: usize) -> AgentDims {
        AgentDims {
            encoder: self.encoder,
            feature_dim,
            vocab: self.vocab,
            model: self.model,
        }
    }
}

/// Freshly initialised agents for `config`, seeded independently per role.
pub fn init_agents(feature_dim: usize, config: &TrainConfig) -> Result<(Speaker, Listener)> {
    let dims = config.agent_dims(feature_dim);
    let speaker = Speaker::new(dims, &mut seed::rng_from(&[config.seed, seed::label("speaker")]))?;
    let listener = Listener::new(dims, &mut seed::rng_from(&[config.seed, seed::label("listener")]))?;
    Ok((speaker, listener))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EpochLog {
    /// 1-based.
    pub epoch: usize,
    pub mean_loss: f64,
    pub train_accuracy: f64,
}

pub fn log_to_csv(log: &[EpochLog]) -> String {
    let mut out = String::from("epoch,mean_loss,train_accuracy\n");
    for row in log {
        writeln!(out, "{},{},{}", row.epoch, row.mean_loss, row.train_accuracy).expect("string write");
    }
    out
}

pub fn log_from_csv(text: &str) -> Result<Vec<EpochLog>> {
    let mut lines = text.lines();
    if lines.next() != Some("epoch,mean_loss,train_accuracy") {
        return Err(Error::Incompatible("training log header mismatch".into()));
    }
    lines
        .filter(|l| !l.trim().is_empty())
        .map(|line| {
            let bad = || Error::Incompatible(format!("malformed log row `{line}`"));
            let mut f = line.split(',');
            let mut next = || f.next().ok_or_else(bad);
            let epoch = next()?.parse().map_err(|_| bad())?;
            let mean_loss = next()?.parse().map_err(|_| bad())?;
            let train_accuracy = next()?.parse().map_err(|_| bad())?;
            Ok(EpochLog {
                epoch,
                mean_loss,
                train_accuracy,
            })
        })
        .collect()
}

#[derive(Clone, Debug)]
pub struct TrainOutcome {
    pub speaker: Speaker,
    pub listener: Listener,
    pub log: Vec<EpochLog>,
}

pub fn train(graphs: &[SceneGraph], config: &TrainConfig) -> Result<TrainOutcome> {
    train_with(graphs, config, |_| {})
}

/// Mini-batch Adam on the mean round loss. Each epoch visits every scene
/// once as a target, in shuffled order. Round construction and Gumbel noise
/// are drawn sequentially from one seeded stream; per-round gradients may be
/// computed in parallel and are summed in round order, so results do not
/// depend on the thread count.
pub fn train_with(
    graphs: &[SceneGraph],
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochLog),
) -> Result<TrainOutcome> {
    config.validate()?;
    if graphs.len() <= config.n_distractors {
        return Err(Error::config(format!(
            "{} training scenes cannot fill rounds with {} distractors",
            graphs.len(),
            config.n_distractors
        )));
    }
    let (mut speaker, mut listener) = init_agents(graphs[0].feature_dim(), config)?;
    let mut speaker_opt = Adam::new(&speaker.params, config.learning_rate);
    let mut listener_opt = Adam::new(&listener.params, config.learning_rate);
    let mut rng = seed::rng_from(&[config.seed, seed::label("train")]);
    let mut order: Vec<usize> = (0..graphs.len()).collect();
    let mut log = Vec::with_capacity(config.epochs);

    for epoch in 1..=config.epochs {
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        let mut correct = 0usize;
        for (batch_no, batch) in order.chunks(config.batch_size).enumerate() {
            let prepared = batch
                .iter()
                .map(|&t| {
                    let round = build_round_for_target(graphs, t, config.n_distractors, &mut rng)?;
                    let noise = speaker.sample_noise(&mut rng);
                    Ok((round, noise))
                })
                .collect::<Result<Vec<_>>>()?;
            let episodes = prepared
                .par_iter()
                .map(|(round, noise)| run_episode(&speaker, &listener, round, noise, config.tau))
                .collect::<Vec<Result<Episode>>>();

            speaker.params.zero_grads();
            listener.params.zero_grads();
            let diverged = || Error::NonFiniteLoss {
                epoch,
                batch: batch_no,
                last_good_epoch: epoch.checked_sub(1).filter(|&e| e > 0),
            };
            for (ep, (round, _)) in episodes.into_iter().zip(&prepared) {
                let ep = match ep {
                    Ok(ep) => ep,
                    Err(Error::Numerical(_)) => return Err(diverged()),
                    Err(e) => return Err(e),
                };
                if !ep.loss.is_finite() || !ep.speaker_grads.is_finite() || !ep.listener_grads.is_finite() {
                    return Err(diverged());
                }
                loss_sum += ep.loss;
                correct += usize::from(ep.correct(round));
                speaker.params.accumulate(&ep.speaker_grads)?;
                listener.params.accumulate(&ep.listener_grads)?;
            }
            let scale = 1.0 / batch.len() as f64;
            speaker.params.scale_grads(scale);
            listener.params.scale_grads(scale);
            speaker_opt.step(&mut speaker.params);
            listener_opt.step(&mut listener.params);
        }
        let row = EpochLog {
            epoch,
            mean_loss: loss_sum / graphs.len() as f64,
            train_accuracy: correct as f64 / graphs.len() as f64,
        };
        on_epoch(&row);
        log.push(row);
    }
    Ok(TrainOutcome { speaker, listener, log })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenegen::{generate_dataset, ConceptCatalog};

    fn small() -> (Vec<SceneGraph>, TrainConfig) {
        let graphs = generate_dataset(24, &ConceptCatalog::default(), 8, 2, 0.1, 4).unwrap().graphs;
        let config = TrainConfig {
            vocab: Vocabulary { size: 4, length: 2 },
            n_distractors: 2,
            batch_size: 5,
            epochs: 2,
            model: ModelDims {
                gcn_hidden: 6,
                embed: 6,
                gru_hidden: 8,
                token_dim: 4,
            },
            ..Default::default()
        };
        (graphs, config)
    }

    #[test]
    fn zero_epochs_returns_initial_agents() {
        let (graphs, config) = small();
        let config = TrainConfig { epochs: 0, ..config };
        let out = train(&graphs, &config).unwrap();
        assert!(out.log.is_empty());
        let (s, l) = init_agents(8, &config).unwrap();
        assert_eq!(out.speaker.params.flat_values(), s.params.flat_values());
        assert_eq!(out.listener.params.flat_values(), l.params.flat_values());
    }

    #[test]
    fn zero_learning_rate_freezes_parameters() {
        let (graphs, config) = small();
        let config = TrainConfig {
            learning_rate: 0.0,
            ..config
        };
        let out = train(&graphs, &config).unwrap();
        let (s, l) = init_agents(8, &config).unwrap();
        assert_eq!(out.speaker.params.flat_values(), s.params.flat_values());
        assert_eq!(out.listener.params.flat_values(), l.params.flat_values());
        assert_eq!(out.log.len(), 2);
    }

    #[test]
    fn same_seed_same_log() {
        let (graphs, config) = small();
        let a = train(&graphs, &config).unwrap();
        let b = train(&graphs, &config).unwrap();
        assert_eq!(a.log, b.log);
        assert_eq!(a.speaker.params.flat_values(), b.speaker.params.flat_values());
        let c = train(&graphs, &TrainConfig { seed: 1, ..config }).unwrap();
        assert_ne!(a.log, c.log);
    }

    #[test]
    fn log_rows_are_sane() {
        let (graphs, config) = small();
        let out = train(&graphs, &config).unwrap();
        for (i, row) in out.log.iter().enumerate() {
            assert_eq!(row.epoch, i + 1);
            assert!(row.mean_loss.is_finite() && row.mean_loss > 0.0);
            assert!((0.0..=1.0).contains(&row.train_accuracy));
        }
        let csv = log_to_csv(&out.log);
        assert_eq!(csv.lines().count(), 3);
        assert_eq!(log_from_csv(&csv).unwrap(), out.log);
    }

    #[test]
    fn too_few_scenes_rejected() {
        let (graphs, config) = small();
        assert!(matches!(train(&graphs[..2], &config), Err(Error::Config(_))));
        let bad = TrainConfig { tau: 0.0, ..config };
        assert!(train(&graphs, &bad).is_err());
    }

    #[test]
    fn divergence_reports_last_good_epoch() {
        let (graphs, config) = small();
        let config = TrainConfig {
            learning_rate: 1e300,
            epochs: 5,
            ..config
        };
        match train(&graphs, &config) {
            Err(Error::NonFiniteLoss { epoch, last_good_epoch, .. }) => {
                assert_eq!(last_good_epoch, epoch.checked_sub(1).filter(|&e| e > 0));
            }
            other => panic!("expected divergence, got {:?}", other.map(|o| o.log)),
        }
    }
}
