use rand::seq::index;

use super::corpus::{CorpusRecord, MessageCorpus};
use super::distance::{hamming, levenshtein};
use super::spearman::spearman;
use crate::error::{Error, Result};
use crate::seed;

/// Corpora larger than this are subsampled before pairing.
pub const TOPSIM_MAX_RECORDS: usize = 2000;

/// Spearman correlation between Hamming distances of concept tuples and
/// Levenshtein distances of messages over all unordered record pairs.
pub fn topsim(corpus: &MessageCorpus) -> Result<f64> {
    topsim_sampled(corpus, TOPSIM_MAX_RECORDS, corpus.len() as u64)
}

/// As [`topsim`], taking a seeded sample of `max_records` records first when
/// the corpus is larger.
pub fn topsim_sampled(corpus: &MessageCorpus, max_records: usize, sample_seed: u64) -> Result<f64> {
    if corpus.len() < 3 {
        return Err(Error::UndefinedCorrelation(format!(
            "topographic similarity needs at least 3 records, corpus has {}",
            corpus.len()
        )));
    }
    let records: Vec<&CorpusRecord> = if corpus.len() > max_records {
        let mut rng = seed::rng_from(&[sample_seed, seed::label("topsim")]);
        let mut picked = index::sample(&mut rng, corpus.len(), max_records).into_vec();
        picked.sort_unstable();
        picked.iter().map(|&i| &corpus.records()[i]).collect()
    } else {
        corpus.records().iter().collect()
    };
    let (concept_d, message_d) = pairwise_distances(&records);
    spearman(&concept_d, &message_d).map_err(|e| match e {
        Error::UndefinedCorrelation(what) => Error::UndefinedCorrelation(format!(
            "topographic similarity over {} pairs: {}",
            concept_d.len(),
            what.replace("first", "concept-distance").replace("second", "message-distance")
        )),
        other => other,
    })
}

/// `(D_c, D_m)` over pairs `(i, j)`, `i < j`, in row-major order.
pub fn pairwise_distances(records: &[&CorpusRecord]) -> (Vec<f64>, Vec<f64>) {
    let n = records.len();
    let pairs = n * n.saturating_sub(1) / 2;
    let mut dc = Vec::with_capacity(pairs);
    let mut dm = Vec::with_capacity(pairs);
    for i in 0..n {
        for j in i + 1..n {
            dc.push(hamming(&records[i].tuple, &records[j].tuple) as f64);
            dm.push(levenshtein(&records[i].tokens, &records[j].tokens) as f64);
        }
    }
    (dc, dm)
}
