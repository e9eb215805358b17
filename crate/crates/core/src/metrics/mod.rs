//! Language measures over a [`MessageCorpus`]: topographic similarity,
//! context independence, and token-usage statistics (rank-frequency curve,
//! cumulative coverage, histogram).

mod ci;
mod corpus;
mod distance;
mod report;
mod spearman;
mod tokens;
mod topsim;

pub use ci::context_independence;
pub use corpus::{CorpusRecord, MessageCorpus};
pub use distance::{hamming, levenshtein};
pub use report::{MetricsReport, COVERAGE_THRESHOLD};
pub use spearman::{average_ranks, pearson, spearman};
pub use tokens::{coverage_from_zipf, cumulative_coverage, token_histogram, zipf_curve, zipf_from_histogram};
pub use topsim::{pairwise_distances, topsim, topsim_sampled, TOPSIM_MAX_RECORDS};
