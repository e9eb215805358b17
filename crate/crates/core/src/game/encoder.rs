use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::nn::{
    axpy, mat_vec_acc, outer_acc, vec_mat_acc, EncoderDims, GraphEncoderCache, GraphEncoderParams, Gradients,
    ParamId, ParamStore,
};
use crate::scenegen::SceneGraph;
use crate::seed::Rng;

/// Which scene encoder an agent pair uses.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EncoderKind {
    /// Attention-augmented GCN over the scene graph.
    Vag,
    /// Mean-pooled raw node features through an MLP; ignores edges.
    Baseline,
}

impl EncoderKind {
    pub fn as_str(self) -> &'static str {
        match self {
            EncoderKind::Vag => "vag",
            EncoderKind::Baseline => "baseline",
        }
    }
}

impl fmt::Display for EncoderKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EncoderKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "vag" => Ok(EncoderKind::Vag),
            "baseline" => Ok(EncoderKind::Baseline),
            other => Err(Error::config(format!("unknown encoder `{other}` (expected vag or baseline)"))),
        }
    }
}

/// `mean(rows) → ReLU(· W1 + b1) → · W2 + b2`.
#[derive(Clone, Copy, Debug)]
pub struct BaselineEncoderParams {
    w1: ParamId,
    b1: ParamId,
    w2: ParamId,
    b2: ParamId,
    dims: EncoderDims,
}

#[derive(Clone, Debug)]
pub struct BaselineCache {
    mean: Vec<f64>,
    hidden: Vec<f64>,
    pub output: Vec<f64>,
}

impl BaselineEncoderParams {
    pub fn new(store: &mut ParamStore, prefix: &str, dims: EncoderDims, rng: &mut Rng) -> Result<Self> {
        Ok(BaselineEncoderParams {
            w1: store.add_glorot(format!("{prefix}.mlp_w1"), dims.input, dims.hidden, rng)?,
            b1: store.add_zeros(format!("{prefix}.mlp_b1"), 1, dims.hidden)?,
            w2: store.add_glorot(format!("{prefix}.mlp_w2"), dims.hidden, dims.output, rng)?,
            b2: store.add_zeros(format!("{prefix}.mlp_b2"), 1, dims.output)?,
            dims,
        })
    }

    pub fn forward(&self, store: &ParamStore, graph: &SceneGraph) -> Result<BaselineCache> {
        let (n, d) = graph.node_features.shape();
        if d != self.dims.input {
            return Err(Error::structural(format!(
                "baseline encoder expects {}-dim node features, graph has {d}",
                self.dims.input
            )));
        }
        if n == 0 {
            return Err(Error::structural("cannot encode an empty graph"));
        }
        let mut mean = vec![0.0; d];
        for r in 0..n {
            axpy(1.0, graph.node_features.row(r), &mut mean);
        }
        mean.iter_mut().for_each(|v| *v /= n as f64);

        let mut hidden = store.value(self.b1).as_slice().to_vec();
        vec_mat_acc(&mean, store.value(self.w1), &mut hidden);
        hidden.iter_mut().for_each(|v| *v = v.max(0.0));
        let mut output = store.value(self.b2).as_slice().to_vec();
        vec_mat_acc(&hidden, store.value(self.w2), &mut output);
        Ok(BaselineCache { mean, hidden, output })
    }

    pub fn backward(&self, store: &ParamStore, cache: &BaselineCache, d_out: &[f64], grads: &mut Gradients) {
        outer_acc(&cache.hidden, d_out, grads.get_mut(self.w2));
        axpy(1.0, d_out, grads.get_mut(self.b2).as_mut_slice());
        let mut d_hidden = vec![0.0; self.dims.hidden];
        mat_vec_acc(store.value(self.w2), d_out, &mut d_hidden);
        for (g, &h) in d_hidden.iter_mut().zip(&cache.hidden) {
            if h <= 0.0 {
                *g = 0.0;
            }
        }
        outer_acc(&cache.mean, &d_hidden, grads.get_mut(self.w1));
        axpy(1.0, &d_hidden, grads.get_mut(self.b1).as_mut_slice());
    }
}

/// Scene embedding from the baseline encoder.
pub fn baseline_encode(graph: &SceneGraph, params: &BaselineEncoderParams, store: &ParamStore) -> Result<Vec<f64>> {
    Ok(params.forward(store, graph)?.output)
}

/// The per-agent scene encoder, `g_s` or `g_l`.
#[derive(Clone, Copy, Debug)]
pub enum SceneEncoder {
    Graph(GraphEncoderParams),
    Baseline(BaselineEncoderParams),
}

#[derive(Clone, Debug)]
pub enum EncoderCache {
    Graph(GraphEncoderCache),
    Baseline(BaselineCache),
}

impl EncoderCache {
    pub fn output(&self) -> &[f64] {
        match self {
            EncoderCache::Graph(c) => &c.output,
            EncoderCache::Baseline(c) => &c.output,
        }
    }
}

impl SceneEncoder {
    pub fn new(kind: EncoderKind, store: &mut ParamStore, prefix: &str, dims: EncoderDims, rng: &mut Rng) -> Result<Self> {
        Ok(match kind {
            EncoderKind::Vag => SceneEncoder::Graph(GraphEncoderParams::new(store, prefix, dims, rng)?),
            EncoderKind::Baseline => SceneEncoder::Baseline(BaselineEncoderParams::new(store, prefix, dims, rng)?),
        })
    }

    pub fn forward(&self, store: &ParamStore, graph: &SceneGraph) -> Result<EncoderCache> {
        Ok(match self {
            SceneEncoder::Graph(p) => EncoderCache::Graph(p.forward(store, graph)?),
            SceneEncoder::Baseline(p) => EncoderCache::Baseline(p.forward(store, graph)?),
        })
    }

    pub fn encode(&self, store: &ParamStore, graph: &SceneGraph) -> Result<Vec<f64>> {
        Ok(match self.forward(store, graph)? {
            EncoderCache::Graph(c) => c.output,
            EncoderCache::Baseline(c) => c.output,
        })
    }

    pub fn backward(&self, store: &ParamStore, cache: &EncoderCache, d_out: &[f64], grads: &mut Gradients) -> Result<()> {
        match (self, cache) {
            (SceneEncoder::Graph(p), EncoderCache::Graph(c)) => p.backward(store, c, d_out, grads),
            (SceneEncoder::Baseline(p), EncoderCache::Baseline(c)) => {
                p.backward(store, c, d_out, grads);
                Ok(())
            }
            _ => Err(Error::structural("encoder cache from a different encoder kind")),
        }
    }
}
