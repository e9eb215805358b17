//! Procedural dining scenes and their k-nearest-neighbour scene graphs.
//!
//! A scene fills the template "plate with {food}, a glass of {drink} on the
//! {dir1} of the plate, {tool1} and {tool2} on the {dir2}, {tool3} next to
//! the {drink}". Node features are a per-concept random embedding (plus
//! Gaussian noise) with the object centroid appended.

mod catalog;
mod dataset;
mod graph;
mod layout;

pub use catalog::{sample_concept_tuple, ConceptCatalog, ConceptTuple, Direction, PLATE};
pub use dataset::{generate_dataset, Dataset, DatasetHeader, DATASET_FORMAT, DATASET_VERSION};
pub use graph::{build_scene_graph, knn_edges, EmbeddingTable, SceneGraph};
pub use layout::{layout_scene, Scene, SceneObject, OBJECTS_PER_SCENE};
