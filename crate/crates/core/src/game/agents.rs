use serde::{Deserialize, Serialize};

use super::encoder::{EncoderCache, EncoderKind, SceneEncoder};
use super::message::{Message, MessageMode, Vocabulary};
use crate::error::{Error, Result};
use crate::nn::{
    argmax, axpy, dot, mat_vec_acc, outer_acc, relaxed_sample, relaxed_sample_backward, sample_gumbel, sigmoid,
    vec_mat, vec_mat_acc, EncoderDims, Gradients, GruCache, GruParams, Matrix, ParamId, ParamStore,
};
use crate::scenegen::SceneGraph;
use crate::seed::Rng;

/// Layer widths shared by both agents of a pair.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ModelDims {
    pub gcn_hidden: usize,
    pub embed: usize,
    pub gru_hidden: usize,
    pub token_dim: usize,
}

impl Default for ModelDims {
    fn default() -> Self {
        ModelDims {
            gcn_hidden: 32,
            embed: 32,
            gru_hidden: 64,
            token_dim: 32,
        }
    }
}

/// Everything needed to rebuild an agent's parameter layout.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AgentDims {
    pub encoder: EncoderKind,
    pub feature_dim: usize,
    pub vocab: Vocabulary,
    pub model: ModelDims,
}

impl AgentDims {
    fn encoder_dims(&self) -> EncoderDims {
        EncoderDims {
            input: self.feature_dim,
            hidden: self.model.gcn_hidden,
            output: self.model.embed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.vocab.validate()?;
        let m = self.model;
        if self.feature_dim == 0 || m.gcn_hidden == 0 || m.embed == 0 || m.gru_hidden == 0 || m.token_dim == 0 {
            return Err(Error::config(format!("all layer widths must be positive: {self:?}")));
        }
        Ok(())
    }
}

/// How the speaker turns logits into message rows.
#[derive(Clone, Copy, Debug)]
pub enum Sampling<'a> {
    /// Gumbel-Softmax with the given `L × |V|` noise.
    Relaxed { noise: &'a Matrix, tau: f64 },
    /// Argmax of the logits, no noise.
    Greedy,
}

/// Speaker parameter layout; methods take the store explicitly so the same
/// layout can be evaluated at perturbed parameters.
#[derive(Clone, Copy, Debug)]
pub struct SpeakerNet {
    pub dims: AgentDims,
    encoder: SceneEncoder,
    init_w: ParamId,
    init_b: ParamId,
    start: ParamId,
    gru: GruParams,
    out_w: ParamId,
    out_b: ParamId,
    token_embedding: ParamId,
}

#[derive(Clone, Debug)]
struct SpeakerStep {
    gru: GruCache,
    row: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct SpeakerCache {
    encoder: EncoderCache,
    h0: Vec<f64>,
    steps: Vec<SpeakerStep>,
    tau: Option<f64>,
    /// First-position logits, kept for inspection.
    pub first_logits: Vec<f64>,
    pub message: Message,
}

impl SpeakerNet {
    fn build(dims: AgentDims, store: &mut ParamStore, rng: &mut Rng) -> Result<Self> {
        dims.validate()?;
        let m = dims.model;
        let v = dims.vocab.size;
        Ok(SpeakerNet {
            dims,
            encoder: SceneEncoder::new(dims.encoder, store, "speaker.encoder", dims.encoder_dims(), rng)?,
            init_w: store.add_glorot("speaker.init_w", m.embed, m.gru_hidden, rng)?,
            init_b: store.add_zeros("speaker.init_b", 1, m.gru_hidden)?,
            start: store.add_glorot("speaker.start", 1, m.token_dim, rng)?,
            gru: GruParams::new(store, "speaker.gru", m.token_dim, m.gru_hidden, rng)?,
            out_w: store.add_glorot("speaker.out_w", m.gru_hidden, v, rng)?,
            out_b: store.add_zeros("speaker.out_b", 1, v)?,
            token_embedding: store.add_glorot("speaker.token_embedding", v, m.token_dim, rng)?,
        })
    }

    pub fn forward(&self, store: &ParamStore, target: &SceneGraph, sampling: Sampling<'_>) -> Result<SpeakerCache> {
        let vocab = self.dims.vocab;
        if let Sampling::Relaxed { noise, .. } = sampling {
            if noise.shape() != (vocab.length, vocab.size) {
                return Err(Error::structural(format!(
                    "noise shape {:?}, expected {:?}",
                    noise.shape(),
                    (vocab.length, vocab.size)
                )));
            }
        }
        let encoder = self.encoder.forward(store, target)?;
        let mut h0 = store.value(self.init_b).as_slice().to_vec();
        vec_mat_acc(encoder.output(), store.value(self.init_w), &mut h0);
        h0.iter_mut().for_each(|v| *v = v.tanh());

        let mut rows = Matrix::zeros(vocab.length, vocab.size);
        let mut steps: Vec<SpeakerStep> = Vec::with_capacity(vocab.length);
        let mut first_logits = Vec::new();
        let mut h = h0.clone();
        let mut x = store.value(self.start).as_slice().to_vec();
        for pos in 0..vocab.length {
            let gru = self.gru.step_cached(store, &x, &h)?;
            let mut logits = store.value(self.out_b).as_slice().to_vec();
            vec_mat_acc(&gru.output, store.value(self.out_w), &mut logits);
            if logits.iter().any(|l| !l.is_finite()) {
                return Err(Error::numerical("speaker produced non-finite logits"));
            }
            let row = match sampling {
                Sampling::Relaxed { noise, tau } => relaxed_sample(&logits, noise.row(pos), tau)?,
                Sampling::Greedy => {
                    let mut one_hot = vec![0.0; vocab.size];
                    one_hot[argmax(&logits)] = 1.0;
                    one_hot
                }
            };
            rows.row_mut(pos).copy_from_slice(&row);
            x = vec_mat(&row, store.value(self.token_embedding));
            h = gru.output.clone();
            if pos == 0 {
                first_logits = logits;
            }
            steps.push(SpeakerStep { gru, row });
        }
        let (mode, tau) = match sampling {
            Sampling::Relaxed { tau, .. } => (MessageMode::Soft, Some(tau)),
            Sampling::Greedy => (MessageMode::Hard, None),
        };
        Ok(SpeakerCache {
            encoder,
            h0,
            steps,
            tau,
            first_logits,
            message: Message::new(rows, mode),
        })
    }

    /// Back-propagates `∂L/∂rows` through the relaxed sampling chain. Only
    /// defined for caches produced with [`Sampling::Relaxed`].
    pub fn backward(&self, store: &ParamStore, cache: &SpeakerCache, d_rows: &Matrix, grads: &mut Gradients) -> Result<()> {
        let tau = cache
            .tau
            .ok_or_else(|| Error::structural("greedy messages are not differentiable"))?;
        let n_pos = cache.steps.len();
        if d_rows.shape() != cache.message.rows().shape() {
            return Err(Error::structural("message gradient shape mismatch"));
        }
        let hidden = self.dims.model.gru_hidden;
        let mut dh_next = vec![0.0; hidden];
        let mut dx_next: Option<Vec<f64>> = None;
        for pos in (0..n_pos).rev() {
            let step = &cache.steps[pos];
            let mut d_row = d_rows.row(pos).to_vec();
            if let Some(dx) = &dx_next {
                // x_{pos+1} = row_pos · E
                mat_vec_acc(store.value(self.token_embedding), dx, &mut d_row);
                outer_acc(&step.row, dx, grads.get_mut(self.token_embedding));
            }
            let d_logits = relaxed_sample_backward(&step.row, &d_row, tau);
            outer_acc(&step.gru.output, &d_logits, grads.get_mut(self.out_w));
            axpy(1.0, &d_logits, grads.get_mut(self.out_b).as_mut_slice());
            let mut dh = dh_next;
            mat_vec_acc(store.value(self.out_w), &d_logits, &mut dh);
            let (dx, dh_prev) = self.gru.backward(store, &step.gru, &dh, grads);
            dx_next = Some(dx);
            dh_next = dh_prev;
        }
        if let Some(dx) = dx_next {
            axpy(1.0, &dx, grads.get_mut(self.start).as_mut_slice());
        }
        let d_pre: Vec<f64> = dh_next
            .iter()
            .zip(&cache.h0)
            .map(|(g, h)| g * (1.0 - h * h))
            .collect();
        outer_acc(cache.encoder.output(), &d_pre, grads.get_mut(self.init_w));
        axpy(1.0, &d_pre, grads.get_mut(self.init_b).as_mut_slice());
        let mut d_emb = vec![0.0; self.dims.model.embed];
        mat_vec_acc(store.value(self.init_w), &d_pre, &mut d_emb);
        self.encoder.backward(store, &cache.encoder, &d_emb, grads)
    }
}

/// Message-producing agent (parameters θ).
#[derive(Clone, Debug)]
pub struct Speaker {
    pub params: ParamStore,
    pub net: SpeakerNet,
}

impl Speaker {
    pub fn new(dims: AgentDims, rng: &mut Rng) -> Result<Self> {
        let mut params = ParamStore::new();
        let net = SpeakerNet::build(dims, &mut params, rng)?;
        Ok(Speaker { params, net })
    }

    pub fn dims(&self) -> AgentDims {
        self.net.dims
    }

    /// Soft mode draws fresh Gumbel noise from `rng`; hard mode is
    /// deterministic and ignores `rng`.
    pub fn speak(&self, target: &SceneGraph, tau: f64, rng: &mut Rng, mode: MessageMode) -> Result<Message> {
        match mode {
            MessageMode::Hard => Ok(self.net.forward(&self.params, target, Sampling::Greedy)?.message),
            MessageMode::Soft => {
                crate::nn::check_tau(tau)?;
                let noise = self.sample_noise(rng);
                Ok(self
                    .net
                    .forward(&self.params, target, Sampling::Relaxed { noise: &noise, tau })?
                    .message)
            }
        }
    }

    /// Gumbel noise for one message, `L × |V|`, drawn row by row.
    pub fn sample_noise(&self, rng: &mut Rng) -> Matrix {
        let v = self.net.dims.vocab;
        let data = (0..v.length).flat_map(|_| sample_gumbel(v.size, rng)).collect();
        Matrix::from_vec(v.length, v.size, data).expect("shape matches by construction")
    }
}

#[derive(Clone, Copy, Debug)]
pub struct ListenerNet {
    pub dims: AgentDims,
    encoder: SceneEncoder,
    token_embedding: ParamId,
    gru: GruParams,
    dec_w: ParamId,
    dec_b: ParamId,
}

#[derive(Clone, Debug)]
pub struct ListenerCache {
    steps: Vec<GruCache>,
    pub decoded: Vec<f64>,
    candidates: Vec<EncoderCache>,
    pub scores: Vec<f64>,
}

impl ListenerCache {
    pub fn candidate_embedding(&self, i: usize) -> &[f64] {
        self.candidates[i].output()
    }
}

impl ListenerNet {
    fn build(dims: AgentDims, store: &mut ParamStore, rng: &mut Rng) -> Result<Self> {
        dims.validate()?;
        let m = dims.model;
        Ok(ListenerNet {
            dims,
            encoder: SceneEncoder::new(dims.encoder, store, "listener.encoder", dims.encoder_dims(), rng)?,
            token_embedding: store.add_glorot("listener.token_embedding", dims.vocab.size, m.token_dim, rng)?,
            gru: GruParams::new(store, "listener.gru", m.token_dim, m.gru_hidden, rng)?,
            dec_w: store.add_glorot("listener.dec_w", m.gru_hidden, m.embed, rng)?,
            dec_b: store.add_zeros("listener.dec_b", 1, m.embed)?,
        })
    }

    fn decode(&self, store: &ParamStore, message: &Message) -> Result<(Vec<GruCache>, Vec<f64>)> {
        let v = self.dims.vocab;
        if message.vocab_size() != v.size || message.len() != v.length {
            return Err(Error::structural(format!(
                "message is {}x{}, listener expects {}x{}",
                message.len(),
                message.vocab_size(),
                v.length,
                v.size
            )));
        }
        let mut h = vec![0.0; self.dims.model.gru_hidden];
        let mut steps = Vec::with_capacity(v.length);
        for pos in 0..v.length {
            let x = vec_mat(message.rows().row(pos), store.value(self.token_embedding));
            let step = self.gru.step_cached(store, &x, &h)?;
            h = step.output.clone();
            steps.push(step);
        }
        let mut decoded = store.value(self.dec_b).as_slice().to_vec();
        vec_mat_acc(&h, store.value(self.dec_w), &mut decoded);
        Ok((steps, decoded))
    }

    pub fn forward(&self, store: &ParamStore, message: &Message, candidates: &[&SceneGraph]) -> Result<ListenerCache> {
        if candidates.is_empty() {
            return Err(Error::structural("listener needs at least one candidate"));
        }
        let (steps, decoded) = self.decode(store, message)?;
        let candidates = candidates
            .iter()
            .map(|g| self.encoder.forward(store, g))
            .collect::<Result<Vec<_>>>()?;
        let scores = candidates.iter().map(|c| sigmoid(dot(&decoded, c.output()))).collect();
        Ok(ListenerCache {
            steps,
            decoded,
            candidates,
            scores,
        })
    }

    /// Given `∂L/∂scores`, accumulates parameter gradients and returns
    /// `∂L/∂rows` of the message.
    pub fn backward(
        &self,
        store: &ParamStore,
        cache: &ListenerCache,
        message: &Message,
        d_scores: &[f64],
        grads: &mut Gradients,
    ) -> Result<Matrix> {
        if d_scores.len() != cache.scores.len() {
            return Err(Error::structural("score gradient length mismatch"));
        }
        let m = self.dims.model;
        let mut d_decoded = vec![0.0; m.embed];
        for ((enc, &s), &ds) in cache.candidates.iter().zip(&cache.scores).zip(d_scores) {
            let dz = ds * s * (1.0 - s);
            if dz == 0.0 {
                continue;
            }
            axpy(dz, enc.output(), &mut d_decoded);
            let d_emb: Vec<f64> = cache.decoded.iter().map(|u| dz * u).collect();
            self.encoder.backward(store, enc, &d_emb, grads)?;
        }
        let last = &cache.steps.last().expect("L ≥ 1").output;
        outer_acc(last, &d_decoded, grads.get_mut(self.dec_w));
        axpy(1.0, &d_decoded, grads.get_mut(self.dec_b).as_mut_slice());
        let mut dh = vec![0.0; m.gru_hidden];
        mat_vec_acc(store.value(self.dec_w), &d_decoded, &mut dh);

        let mut d_rows = Matrix::zeros(message.len(), message.vocab_size());
        for pos in (0..cache.steps.len()).rev() {
            let (dx, dh_prev) = self.gru.backward(store, &cache.steps[pos], &dh, grads);
            outer_acc(message.rows().row(pos), &dx, grads.get_mut(self.token_embedding));
            mat_vec_acc(store.value(self.token_embedding), &dx, d_rows.row_mut(pos));
            dh = dh_prev;
        }
        Ok(d_rows)
    }
}

/// Message-reading agent (parameters φ).
#[derive(Clone, Debug)]
pub struct Listener {
    pub params: ParamStore,
    pub net: ListenerNet,
}

impl Listener {
    pub fn new(dims: AgentDims, rng: &mut Rng) -> Result<Self> {
        let mut params = ParamStore::new();
        let net = ListenerNet::build(dims, &mut params, rng)?;
        Ok(Listener { params, net })
    }

    pub fn dims(&self) -> AgentDims {
        self.net.dims
    }

    /// Independent per-candidate probabilities `σ(f_dec(m) · g_l(c_i))`.
    pub fn listen_score(&self, message: &Message, candidates: &[&SceneGraph]) -> Result<Vec<f64>> {
        Ok(self.net.forward(&self.params, message, candidates)?.scores)
    }

    /// `f_dec(m)`, the decoded message vector.
    pub fn decode(&self, message: &Message) -> Result<Vec<f64>> {
        Ok(self.net.decode(&self.params, message)?.1)
    }

    pub fn encode(&self, graph: &SceneGraph) -> Result<Vec<f64>> {
        self.net.encoder.encode(&self.params, graph)
    }
}
