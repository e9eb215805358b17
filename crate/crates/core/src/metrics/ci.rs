use std::collections::BTreeMap;

use super::corpus::MessageCorpus;

/// Context independence at the token × atomic-concept level.
///
/// An atomic concept is a `(slot, value)` pair. Every concept of a record
/// co-occurs with each of the record's `L` tokens. With `N(c, t)` the
/// co-occurrence count and `N(t)` the total count of token `t`:
///
/// * `p_c(c | t) = N(c, t) / N(t)`
/// * `p_m(t | c) = N(c, t) / Σ_t' N(c, t')`
/// * `m^c = argmax_t p_c(c | t)`, ties to the lower token id
///
/// and the result is the mean over concepts of `p_m(m^c | c) · p_c(c | m^c)`.
/// Returns 0 for an empty corpus.
pub fn context_independence(corpus: &MessageCorpus) -> f64 {
    let v = corpus.vocab_size();
    let mut token_total = vec![0usize; v];
    let mut cooc: BTreeMap<(usize, &str), Vec<usize>> = BTreeMap::new();
    for record in corpus.records() {
        for &t in &record.tokens {
            token_total[t] += 1;
        }
        for (slot, value) in record.tuple.iter().enumerate() {
            let row = cooc.entry((slot, value.as_str())).or_insert_with(|| vec![0; v]);
            for &t in &record.tokens {
                row[t] += 1;
            }
        }
    }
    if cooc.is_empty() {
        return 0.0;
    }
    let total: f64 = cooc
        .values()
        .map(|row| {
            let concept_total: usize = row.iter().sum();
            let mut best_token = 0;
            let mut best_p = -1.0;
            for t in 0..v {
                if token_total[t] == 0 {
                    continue;
                }
                let p = row[t] as f64 / token_total[t] as f64;
                if p > best_p {
                    best_p = p;
                    best_token = t;
                }
            }
            let p_m = row[best_token] as f64 / concept_total as f64;
            p_m * best_p
        })
        .sum();
    (total / cooc.len() as f64).clamp(0.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::metrics::CorpusRecord;

    fn corpus(v: usize, recs: &[(&[&str], &[usize])]) -> MessageCorpus {
        MessageCorpus::from_records(
            v,
            recs.iter()
                .map(|(t, m)| CorpusRecord {
                    tuple: t.iter().map(|s| s.to_string()).collect(),
                    tokens: m.to_vec(),
                })
                .collect(),
        )
        .unwrap()
    }

    #[test]
    fn bijection_scores_one() {
        let c = corpus(3, &[(&["a"], &[0]), (&["b"], &[1]), (&["a"], &[0]), (&["b"], &[1])]);
        assert_eq!(context_independence(&c), 1.0);
    }

    #[test]
    fn shared_token_scores_half() {
        // p_m(0|c) = 1 and p_c(c|0) = 1/2 for both concepts.
        let c = corpus(3, &[(&["a"], &[0]), (&["b"], &[0]), (&["a"], &[0]), (&["b"], &[0])]);
        assert_eq!(context_independence(&c), 0.5);
    }

    #[test]
    fn empty_is_zero() {
        assert_eq!(context_independence(&MessageCorpus::new(4)), 0.0);
    }

    #[test]
    fn invariant_under_token_permutation() {
        let c = corpus(
            4,
            &[
                (&["a", "x"], &[0, 1, 1]),
                (&["b", "x"], &[2, 1, 3]),
                (&["a", "y"], &[0, 0, 3]),
                (&["c", "y"], &[3, 2, 2]),
            ],
        );
        let ci = context_independence(&c);
        let p = c.relabel(&[2, 3, 0, 1]).unwrap();
        assert!((ci - context_independence(&p)).abs() < 1e-15);
        assert!((0.0..=1.0).contains(&ci));
    }
}
