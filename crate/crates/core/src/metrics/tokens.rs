use super::corpus::MessageCorpus;
use crate::error::{Error, Result};

/// Count per token id over all positions, zeros included.
pub fn token_histogram(corpus: &MessageCorpus) -> Vec<usize> {
    let mut counts = vec![0; corpus.vocab_size()];
    for r in corpus.records() {
        for &t in &r.tokens {
            counts[t] += 1;
        }
    }
    counts
}

/// Rank-frequency pairs `(rank, count)`, ranks from 1, counts non-increasing,
/// unused tokens omitted. Equal counts keep token-id order.
pub fn zipf_curve(corpus: &MessageCorpus) -> Vec<(usize, usize)> {
    zipf_from_histogram(&token_histogram(corpus))
}

pub fn zipf_from_histogram(histogram: &[usize]) -> Vec<(usize, usize)> {
    let mut counts: Vec<usize> = histogram.iter().copied().filter(|&c| c > 0).collect();
    counts.sort_by(|a, b| b.cmp(a));
    counts.into_iter().enumerate().map(|(i, c)| (i + 1, c)).collect()
}

/// Smallest number of top-ranked tokens whose counts reach
/// `threshold × total`. Returns 0 for an empty corpus.
pub fn cumulative_coverage(corpus: &MessageCorpus, threshold: f64) -> Result<usize> {
    coverage_from_zipf(&zipf_curve(corpus), threshold)
}

pub fn coverage_from_zipf(zipf: &[(usize, usize)], threshold: f64) -> Result<usize> {
    if !(threshold > 0.0 && threshold <= 1.0) {
        return Err(Error::config(format!("coverage threshold must lie in (0, 1], got {threshold}")));
    }
    let total: usize = zipf.iter().map(|&(_, c)| c).sum();
    let needed = threshold * total as f64;
    let mut running = 0usize;
    for &(rank, count) in zipf {
        running += count;
        if running as f64 >= needed {
            return Ok(rank);
        }
    }
    Ok(zipf.len())
}
