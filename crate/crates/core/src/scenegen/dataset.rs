use std::fs::File;
use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::catalog::{sample_concept_tuple, ConceptCatalog};
use super::graph::{build_scene_graph, EmbeddingTable, SceneGraph};
use super::layout::{layout_scene, OBJECTS_PER_SCENE};
use crate::codec::{self, JsonLines};
use crate::error::{Error, Result};
use crate::seed;

pub const DATASET_FORMAT: &str = "kgec-dataset";
pub const DATASET_VERSION: u32 = 1;

/// Generation parameters; also the first line of a dataset file.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DatasetHeader {
    pub format: String,
    pub version: u32,
    pub seed: u64,
    /// Node feature width: embedding dims + 2 centroid dims.
    pub d: usize,
    pub k: usize,
    pub noise_sigma: f64,
    pub catalog: ConceptCatalog,
    pub embeddings: EmbeddingTable,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    pub header: DatasetHeader,
    pub graphs: Vec<SceneGraph>,
}

/// Procedural dataset: one shared embedding table, then per scene an
/// independent stream seeded from `(seed, scene index)`.
pub fn generate_dataset(
    n_scenes: usize,
    catalog: &ConceptCatalog,
    d: usize,
    k: usize,
    noise_sigma: f64,
    seed_value: u64,
) -> Result<Dataset> {
    catalog.validate()?;
    if d < 3 {
        return Err(Error::config(format!(
            "feature dimension d = {d} leaves no room for an embedding (need d ≥ 3)"
        )));
    }
    if k == 0 || k >= OBJECTS_PER_SCENE {
        return Err(Error::config(format!(
            "neighbour count k = {k} needs 0 < k < {OBJECTS_PER_SCENE}"
        )));
    }
    let mut table_rng = seed::rng_from(&[seed_value, seed::label("embeddings")]);
    let embeddings = EmbeddingTable::sample(catalog, d - 2, &mut table_rng);

    let graphs = (0..n_scenes)
        .map(|i| {
            let mut rng = seed::rng_from(&[seed_value, seed::label("scene"), i as u64]);
            let tuple = sample_concept_tuple(catalog, &mut rng)?;
            let scene = layout_scene(&tuple, &mut rng);
            build_scene_graph(&scene, &embeddings, noise_sigma, k, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(Dataset {
        header: DatasetHeader {
            format: DATASET_FORMAT.to_string(),
            version: DATASET_VERSION,
            seed: seed_value,
            d,
            k,
            noise_sigma,
            catalog: catalog.clone(),
            embeddings,
        },
        graphs,
    })
}

impl Dataset {
    pub fn len(&self) -> usize {
        self.graphs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.graphs.is_empty()
    }

    pub fn write_to<W: Write>(&self, out: W) -> std::io::Result<W> {
        let mut lines = JsonLines::new(out);
        lines.push(&self.header)?;
        for g in &self.graphs {
            lines.push(g)?;
        }
        lines.finish()
    }

    pub fn to_bytes(&self) -> Vec<u8> {
        self.write_to(Vec::new()).expect("writing to memory cannot fail")
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        codec::write_atomic(path, &self.to_bytes())
    }

    pub fn read_from<R: std::io::Read>(src: R) -> Result<Dataset> {
        let mut lines = codec::read_lines(src);
        let first = lines
            .next()
            .ok_or_else(|| Error::Incompatible("dataset file is empty".into()))?
            .map_err(|e| Error::io("<dataset>", e))?;
        let probe: serde_json::Value = serde_json::from_str(&first)?;
        let version = probe.get("version").and_then(|v| v.as_u64());
        if probe.get("format").and_then(|v| v.as_str()) != Some(DATASET_FORMAT)
            || version != Some(u64::from(DATASET_VERSION))
        {
            return Err(Error::Incompatible(format!(
                "expected {DATASET_FORMAT} version {DATASET_VERSION}, found version {version:?}"
            )));
        }
        let header: DatasetHeader = serde_json::from_value(probe)?;
        header.catalog.validate()?;
        let graphs = lines
            .map(|line| {
                let line = line.map_err(|e| Error::io("<dataset>", e))?;
                let g: SceneGraph = serde_json::from_str(&line)?;
                g.validate()?;
                if g.feature_dim() != header.d {
                    return Err(Error::Incompatible(format!(
                        "graph feature width {} differs from header d = {}",
                        g.feature_dim(),
                        header.d
                    )));
                }
                Ok(g)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Dataset { header, graphs })
    }

    pub fn load(path: &Path) -> Result<Dataset> {
        let f = File::open(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => Error::Missing(path.to_path_buf()),
            _ => Error::io(path, e),
        })?;
        Dataset::read_from(f)
    }

    /// Seeded shuffle, then the last `round(eval_fraction · n)` graphs form
    /// the held-out split. Returns `(train, eval)`.
    pub fn split(&self, eval_fraction: f64, seed_value: u64) -> Result<(Vec<SceneGraph>, Vec<SceneGraph>)> {
        if !(0.0..1.0).contains(&eval_fraction) {
            return Err(Error::config(format!("eval fraction must lie in [0, 1), got {eval_fraction}")));
        }
        use rand::seq::SliceRandom;
        let mut order: Vec<usize> = (0..self.graphs.len()).collect();
        order.shuffle(&mut seed::rng_from(&[seed_value, seed::label("split")]));
        let n_eval = (eval_fraction * self.graphs.len() as f64).round() as usize;
        let n_train = self.graphs.len() - n_eval;
        let pick = |ix: &[usize]| ix.iter().map(|&i| self.graphs[i].clone()).collect();
        Ok((pick(&order[..n_train]), pick(&order[n_train..])))
    }
}
