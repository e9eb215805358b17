//! The referential game: a speaker describes a target scene graph with a
//! fixed-length discrete message and a listener picks the target out of a
//! set of candidates. Training relaxes messages with Gumbel-Softmax and
//! optimises per-candidate binary cross-entropy with Adam.

mod agents;
mod checkpoint;
mod encoder;
mod episode;
mod eval;
mod message;
mod round;
mod train;

pub use agents::{AgentDims, Listener, ListenerCache, ListenerNet, ModelDims, Sampling, Speaker, SpeakerCache, SpeakerNet};
pub use checkpoint::{AgentRole, Checkpoint, CHECKPOINT_VERSION};
pub use encoder::{baseline_encode, BaselineEncoderParams, EncoderCache, EncoderKind, SceneEncoder};
pub use episode::{episode_loss_with, run_episode, Episode};
pub use eval::{evaluate, Evaluation, RoundResult};
pub use message::{Message, MessageMode, Vocabulary};
pub use round::{build_round, build_round_for_target, round_loss, round_loss_grad, Round, MAX_COLLISION_RETRIES, SCORE_CLAMP};
pub use train::{init_agents, log_from_csv, log_to_csv, train, train_with, EpochLog, TrainConfig, TrainOutcome};
