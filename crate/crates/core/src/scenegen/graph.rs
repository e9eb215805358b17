use std::collections::{BTreeMap, BTreeSet};

use rand_distr::{Distribution, Normal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::catalog::{ConceptCatalog, ConceptTuple, PLATE};
use super::layout::Scene;
use crate::error::{Error, Result};
use crate::nn::Matrix;
use crate::seed::Rng;

/// Fixed concept → embedding map shared by every scene of a dataset.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EmbeddingTable(BTreeMap<String, Vec<f64>>);

impl EmbeddingTable {
    /// One standard-Gaussian vector per object concept, drawn in catalog order.
    pub fn sample(catalog: &ConceptCatalog, dim: usize, rng: &mut Rng) -> Self {
        let mut table = BTreeMap::new();
        for concept in catalog.object_concepts() {
            let v: Vec<f64> = (0..dim).map(|_| StandardNormal.sample(rng)).collect();
            table.insert(concept.to_string(), v);
        }
        EmbeddingTable(table)
    }

    pub fn from_map(map: BTreeMap<String, Vec<f64>>) -> Result<Self> {
        let mut dims = map.values().map(Vec::len);
        if let Some(d) = dims.next() {
            if dims.any(|x| x != d) {
                return Err(Error::config("embedding vectors differ in length"));
            }
        }
        Ok(EmbeddingTable(map))
    }

    pub fn get(&self, concept: &str) -> Option<&[f64]> {
        self.0.get(concept).map(Vec::as_slice)
    }

    pub fn dim(&self) -> usize {
        self.0.values().next().map_or(0, Vec::len)
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Knowledge graph of one scene: nodes carry a concept label, a centroid and
/// a feature row; edges are undirected and stored once as `(u, v)`, `u < v`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SceneGraph {
    pub node_concepts: Vec<String>,
    pub centroids: Vec<[f64; 2]>,
    pub node_features: Matrix,
    pub edges: Vec<(usize, usize)>,
    pub tuple: ConceptTuple,
}

impl SceneGraph {
    pub fn num_nodes(&self) -> usize {
        self.node_concepts.len()
    }

    pub fn feature_dim(&self) -> usize {
        self.node_features.cols()
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        let key = if u < v { (u, v) } else { (v, u) };
        self.edges.binary_search(&key).is_ok()
    }

    pub fn degree(&self, u: usize) -> usize {
        self.edges.iter().filter(|&&(a, b)| a == u || b == u).count()
    }

    /// Checks internal consistency: shapes, edge canonical form and range,
    /// and that node labels spell out the tuple.
    pub fn validate(&self) -> Result<()> {
        let n = self.num_nodes();
        if self.centroids.len() != n || self.node_features.rows() != n {
            return Err(Error::structural(format!(
                "graph has {n} labels, {} centroids, {} feature rows",
                self.centroids.len(),
                self.node_features.rows()
            )));
        }
        self.node_features.ensure_finite("node features")?;
        for w in self.edges.windows(2) {
            if w[0] >= w[1] {
                return Err(Error::structural("edges must be sorted and unique"));
            }
        }
        for &(u, v) in &self.edges {
            if u >= v || v >= n {
                return Err(Error::structural(format!("bad edge ({u}, {v}) for {n} nodes")));
            }
        }
        let t = &self.tuple;
        let expected = [PLATE, &t.food, &t.drink, &t.tool1, &t.tool2, &t.tool3];
        if self.node_concepts.iter().map(String::as_str).ne(expected.iter().copied()) {
            return Err(Error::structural("node labels do not match the concept tuple"));
        }
        Ok(())
    }
}

/// Union over nodes of (node, its `k` nearest other nodes by Euclidean
/// distance), symmetrised. Distance ties go to the lower node index.
pub fn knn_edges(centroids: &[[f64; 2]], k: usize) -> Result<Vec<(usize, usize)>> {
    let n = centroids.len();
    if k == 0 || k >= n {
        return Err(Error::config(format!("neighbour count k = {k} needs 0 < k < {n}")));
    }
    let mut edges = BTreeSet::new();
    for (i, a) in centroids.iter().enumerate() {
        let mut others: Vec<(f64, usize)> = centroids
            .iter()
            .enumerate()
            .filter(|&(j, _)| j != i)
            .map(|(j, b)| ((a[0] - b[0]).hypot(a[1] - b[1]), j))
            .collect();
        others.sort_by(|x, y| x.0.total_cmp(&y.0).then(x.1.cmp(&y.1)));
        for &(_, j) in others.iter().take(k) {
            edges.insert((i.min(j), i.max(j)));
        }
    }
    Ok(edges.into_iter().collect())
}

/// Node features are `embedding + N(0, σ²)` followed by the two centroid
/// coordinates.
pub fn build_scene_graph(
    scene: &Scene,
    embeddings: &EmbeddingTable,
    noise_sigma: f64,
    k: usize,
    rng: &mut Rng,
) -> Result<SceneGraph> {
    if !(noise_sigma >= 0.0 && noise_sigma.is_finite()) {
        return Err(Error::config(format!("noise sigma must be a finite non-negative number, got {noise_sigma}")));
    }
    let centroids: Vec<[f64; 2]> = scene.objects.iter().map(|o| o.centroid).collect();
    let edges = knn_edges(&centroids, k)?;

    let emb_dim = embeddings.dim();
    let noise = Normal::new(0.0, noise_sigma).map_err(|e| Error::config(e.to_string()))?;
    let mut features = Matrix::zeros(scene.objects.len(), emb_dim + 2);
    for (i, obj) in scene.objects.iter().enumerate() {
        let emb = embeddings
            .get(&obj.concept)
            .ok_or_else(|| Error::config(format!("no embedding for concept `{}`", obj.concept)))?;
        let row = features.row_mut(i);
        for (dst, &e) in row.iter_mut().zip(emb) {
            *dst = if noise_sigma > 0.0 { e + noise.sample(rng) } else { e };
        }
        row[emb_dim] = obj.centroid[0];
        row[emb_dim + 1] = obj.centroid[1];
    }

    Ok(SceneGraph {
        node_concepts: scene.objects.iter().map(|o| o.concept.clone()).collect(),
        centroids,
        node_features: features,
        edges,
        tuple: scene.tuple.clone(),
    })
}
