use serde::{Deserialize, Serialize};

use super::attention::{attention_backward, attention_pool, AttentionOutput};
use super::gcn::{gcn_backward, gcn_forward_cached, normalize_adjacency, GcnCache};
use super::matrix::{axpy, mat_vec_acc, outer_acc, vec_mat_acc, Matrix};
use super::params::{Gradients, ParamId, ParamStore};
use crate::error::{Error, Result};
use crate::scenegen::SceneGraph;
use crate::seed::Rng;

/// Widths of a scene encoder: node features in, hidden width, embedding out.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct EncoderDims {
    pub input: usize,
    pub hidden: usize,
    pub output: usize,
}

/// Two GCN layers (`d → h → h`), additive attention pooling, and a linear
/// projection `h → e` with bias.
#[derive(Clone, Copy, Debug)]
pub struct GraphEncoderParams {
    gcn: [ParamId; 2],
    att_w: ParamId,
    att_v: ParamId,
    proj_w: ParamId,
    proj_b: ParamId,
    dims: EncoderDims,
}

#[derive(Clone, Debug)]
pub struct GraphEncoderCache {
    adjacency: Matrix,
    layers: [GcnCache; 2],
    attention: AttentionOutput,
    pub output: Vec<f64>,
}

impl GraphEncoderCache {
    pub fn attention_weights(&self) -> &[f64] {
        &self.attention.weights
    }
}

impl GraphEncoderParams {
    pub fn new(store: &mut ParamStore, prefix: &str, dims: EncoderDims, rng: &mut Rng) -> Result<Self> {
        let EncoderDims { input, hidden, output } = dims;
        Ok(GraphEncoderParams {
            gcn: [
                store.add_glorot(format!("{prefix}.gcn0"), input, hidden, rng)?,
                store.add_glorot(format!("{prefix}.gcn1"), hidden, hidden, rng)?,
            ],
            att_w: store.add_glorot(format!("{prefix}.att_w"), hidden, hidden, rng)?,
            att_v: store.add_glorot(format!("{prefix}.att_v"), hidden, 1, rng)?,
            proj_w: store.add_glorot(format!("{prefix}.proj_w"), hidden, output, rng)?,
            proj_b: store.add_zeros(format!("{prefix}.proj_b"), 1, output)?,
            dims,
        })
    }

    pub fn dims(&self) -> EncoderDims {
        self.dims
    }

    pub fn forward(&self, store: &ParamStore, graph: &SceneGraph) -> Result<GraphEncoderCache> {
        if graph.feature_dim() != self.dims.input {
            return Err(Error::structural(format!(
                "encoder expects {}-dim node features, graph has {}",
                self.dims.input,
                graph.feature_dim()
            )));
        }
        let adjacency = normalize_adjacency(&graph.edges, graph.num_nodes())?;
        let l0 = gcn_forward_cached(&graph.node_features, &adjacency, store.value(self.gcn[0]))?;
        let l1 = gcn_forward_cached(&l0.output, &adjacency, store.value(self.gcn[1]))?;
        let attention = attention_pool(
            &l1.output,
            store.value(self.att_w),
            store.value(self.att_v).as_slice(),
        )?;
        let mut output = store.value(self.proj_b).as_slice().to_vec();
        vec_mat_acc(&attention.pooled, store.value(self.proj_w), &mut output);
        Ok(GraphEncoderCache {
            adjacency,
            layers: [l0, l1],
            attention,
            output,
        })
    }

    /// Accumulates parameter gradients for `∂L/∂output = d_out`.
    pub fn backward(
        &self,
        store: &ParamStore,
        cache: &GraphEncoderCache,
        d_out: &[f64],
        grads: &mut Gradients,
    ) -> Result<()> {
        outer_acc(&cache.attention.pooled, d_out, grads.get_mut(self.proj_w));
        axpy(1.0, d_out, grads.get_mut(self.proj_b).as_mut_slice());
        let mut d_pooled = vec![0.0; self.dims.hidden];
        mat_vec_acc(store.value(self.proj_w), d_out, &mut d_pooled);

        let mut dv = vec![0.0; self.dims.hidden];
        let d_h1 = attention_backward(
            &cache.layers[1].output,
            store.value(self.att_w),
            store.value(self.att_v).as_slice(),
            &cache.attention,
            &d_pooled,
            grads.get_mut(self.att_w),
            &mut dv,
        )?;
        axpy(1.0, &dv, grads.get_mut(self.att_v).as_mut_slice());

        let d_h0 = gcn_backward(
            &cache.layers[1],
            &cache.adjacency,
            store.value(self.gcn[1]),
            &d_h1,
            grads.get_mut(self.gcn[1]),
            true,
        )?
        .expect("requested dH");
        gcn_backward(
            &cache.layers[0],
            &cache.adjacency,
            store.value(self.gcn[0]),
            &d_h0,
            grads.get_mut(self.gcn[0]),
            false,
        )?;
        Ok(())
    }
}

/// Scene embedding from the attention-augmented GCN.
pub fn graph_encode(graph: &SceneGraph, params: &GraphEncoderParams, store: &ParamStore) -> Result<Vec<f64>> {
    Ok(params.forward(store, graph)?.output)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{dot, finite_diff_check};
    use crate::scenegen::{generate_dataset, ConceptCatalog};
    use crate::seed;
    use rand::seq::SliceRandom;
    use rand_distr::{Distribution, StandardNormal};

    fn graphs(n: usize) -> Vec<SceneGraph> {
        generate_dataset(n, &ConceptCatalog::default(), 10, 2, 0.1, 3).unwrap().graphs
    }

    fn setup(hidden: usize, output: usize) -> (ParamStore, GraphEncoderParams) {
        let mut store = ParamStore::new();
        let dims = EncoderDims { input: 10, hidden, output };
        let p = GraphEncoderParams::new(&mut store, "enc", dims, &mut seed::rng(11)).unwrap();
        // Non-zero biases so their gradients are exercised too.
        let mut rng = seed::rng(12);
        for id in store.ids() {
            for v in store.value_mut(id).as_mut_slice() {
                let z: f64 = StandardNormal.sample(&mut rng);
                *v += 0.1 * z;
            }
        }
        (store, p)
    }

    #[test]
    fn gradients_match_finite_differences() {
        let (mut store, p) = setup(6, 5);
        let g = &graphs(1)[0];
        let r: Vec<f64> = (0..5).map(|i| (i as f64 - 2.0) * 0.7).collect();
        let cache = p.forward(&store, g).unwrap();
        let mut grads = store.gradient_buffer();
        p.backward(&store, &cache, &r, &mut grads).unwrap();
        store.zero_grads();
        store.accumulate(&grads).unwrap();
        let check = finite_diff_check(|s| Ok(dot(&graph_encode(g, &p, s)?, &r)), &store, 1e-5).unwrap();
        assert!(check.max_rel_err < 1e-4, "{check:?}");
    }

    fn permuted(g: &SceneGraph, perm: &[usize]) -> SceneGraph {
        // perm[old] = new
        let n = g.num_nodes();
        let mut inv = vec![0; n];
        for (old, &new) in perm.iter().enumerate() {
            inv[new] = old;
        }
        let rows: Vec<Vec<f64>> = inv.iter().map(|&o| g.node_features.row(o).to_vec()).collect();
        let mut edges: Vec<(usize, usize)> = g
            .edges
            .iter()
            .map(|&(u, v)| (perm[u].min(perm[v]), perm[u].max(perm[v])))
            .collect();
        edges.sort_unstable();
        SceneGraph {
            node_concepts: inv.iter().map(|&o| g.node_concepts[o].clone()).collect(),
            centroids: inv.iter().map(|&o| g.centroids[o]).collect(),
            node_features: Matrix::from_rows(&rows).unwrap(),
            edges,
            tuple: g.tuple.clone(),
        }
    }

    #[test]
    fn node_order_does_not_matter() {
        let (store, p) = setup(8, 4);
        let mut rng = seed::rng(5);
        for g in graphs(10) {
            let mut perm: Vec<usize> = (0..g.num_nodes()).collect();
            perm.shuffle(&mut rng);
            let a = graph_encode(&g, &p, &store).unwrap();
            let b = graph_encode(&permuted(&g, &perm), &p, &store).unwrap();
            for (x, y) in a.iter().zip(&b) {
                assert!((x - y).abs() < 1e-9, "{a:?} vs {b:?}");
            }
        }
    }

    #[test]
    fn attention_weights_form_a_distribution() {
        let (store, p) = setup(8, 4);
        let cache = p.forward(&store, &graphs(1)[0]).unwrap();
        let w = cache.attention_weights();
        assert_eq!(w.len(), 6);
        assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        assert!(w.iter().all(|&x| x > 0.0));
    }

    #[test]
    fn wrong_feature_width_is_structural() {
        let mut store = ParamStore::new();
        let dims = EncoderDims { input: 7, hidden: 4, output: 4 };
        let p = GraphEncoderParams::new(&mut store, "enc", dims, &mut seed::rng(0)).unwrap();
        assert!(matches!(graph_encode(&graphs(1)[0], &p, &store), Err(Error::Structural(_))));
    }
}
